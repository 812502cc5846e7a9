//! Numerics for spontaneous parametric down-conversion (SPDC) sources.
//!
//! The crate evaluates biphoton amplitudes in three model families
//! (general sinc, double-sinc factorization, four-Gaussian), projects them
//! onto Laguerre-Gaussian collection modes and computes the spatial purity
//! `Tr(rho_q^2)` after tracing out the spectral degrees of freedom.
//!
//! Everything here is `no_std` (with `alloc`). IO, configuration files,
//! CSV output and the command line live in the `spdc` crate.
//!
//! Units are fixed crate-wide, see [`units`]: lengths in micrometres, times
//! in femtoseconds, angular frequencies in rad/fs and transverse momenta in
//! inverse micrometres.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod biphoton;
pub mod error;
pub mod modes;
pub mod numerics;
pub mod params;
pub mod phase_matching;
pub mod purity;
pub mod units;


pub use biphoton::{BiphotonModel, ModelKind};
pub use error::{Error, Result};
pub use modes::CollectionSpec;
pub use params::{derive_params, CrystalSpec, DerivedParams, PulseRegime, PumpSpec, SpdcType};
pub use phase_matching::{SpectralPoint, TransversePoint};
pub use purity::{KernelFlag, PurityResult, PuritySetting};

