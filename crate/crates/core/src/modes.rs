//! Laguerre–Gaussian collection modes in transverse momentum.

use alloc::format;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Collection mode shared by signal (`+ell`) and idler (`-ell`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionSpec {
    pub ell: i32,
    pub p_rad: u32,
    /// Collection waist, µm.
    pub w0: f64,
}

impl CollectionSpec {
    pub fn new(ell: i32, p_rad: u32, w0: f64) -> Result<Self> {
        let c = CollectionSpec { ell, p_rad, w0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w0.is_finite() && self.w0 > 0.0) {
            return Err(Error::validation("collection.w0", format!("{} must be positive", self.w0)));
        }
        Ok(())
    }

    /// Mode with the opposite OAM sign.
    pub fn conjugate(&self) -> Self {
        CollectionSpec { ell: -self.ell, ..*self }
    }
}

/// Associated Laguerre polynomial `L_p^a(y)` by upward recurrence.
pub fn laguerre_assoc(p: i32, a: i32, y: f64) -> Result<f64> {
    if p < 0 {
        return Err(Error::validation("p_rad", format!("{p} < 0")));
    }
    if a < 0 {
        return Err(Error::validation("a", format!("{a} < 0")));
    }
    Ok(laguerre(p as u32, a as u32, y))
}

pub(crate) fn laguerre(p: u32, a: u32, y: f64) -> f64 {
    let a = a as f64;
    let mut l0 = 1.0;
    if p == 0 {
        return l0;
    }
    let mut l1 = 1.0 + a - y;
    for k in 1..p {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + a - y) * l1 - (kf + a) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// `ln(p! / (p + m)!)`.
fn log_factorial_ratio(p: u32, m: u32) -> f64 {
    if p + m <= 12 {
        let mut r = 1.0;
        for k in (p + 1)..=(p + m) {
            r *= k as f64;
        }
        -libm::log(r)
    } else {
        libm::lgamma(p as f64 + 1.0) - libm::lgamma((p + m) as f64 + 1.0)
    }
}

/// Squared normalization `p! w0² / (4π (|ℓ|+p)!) · 2^{|ℓ|+1}`.
fn norm_sq(ell_abs: u32, p: u32, w0: f64) -> f64 {
    libm::exp(log_factorial_ratio(p, ell_abs) + (ell_abs as f64 + 1.0) * core::f64::consts::LN_2)
        * w0
        * w0
        / (4.0 * core::f64::consts::PI)
}

/// Real radial profile of the mode (everything except `e^{iℓφ}`).
pub fn lg_radial(q: f64, spec: &CollectionSpec) -> f64 {
    let ell_abs = spec.ell.unsigned_abs();
    let w0 = spec.w0;
    let y = w0 * w0 * q * q / 2.0;
    libm::sqrt(norm_sq(ell_abs, spec.p_rad, w0))
        * libm::pow(q * w0 / 2.0, ell_abs as f64)
        * laguerre(spec.p_rad, ell_abs, y)
        * libm::exp(-y / 2.0)
}

/// `|LG(q)|²` without the Gaussian factor, as a function of `y = w0² q² / 2`:
/// returns `c · y^{|ℓ|} L_p^{|ℓ|}(y)²` so that
/// `|LG|² = poly · exp(-y)`.
pub(crate) fn lg_intensity_poly(y: f64, spec: &CollectionSpec) -> f64 {
    let ell_abs = spec.ell.unsigned_abs();
    let l = laguerre(spec.p_rad, ell_abs, y);
    // (q w0 / 2)^{2|ℓ|} = (y / 2)^{|ℓ|}
    norm_sq(ell_abs, spec.p_rad, spec.w0) * libm::pow(y / 2.0, ell_abs as f64) * l * l
}

/// LG mode amplitude at transverse momentum `(q, φ)`, µm.
pub fn lg_mode(q: f64, phi: f64, spec: &CollectionSpec) -> Result<Complex64> {
    spec.validate()?;
    if !(q >= 0.0) {
        return Err(Error::validation("q", format!("{q} must be nonnegative")));
    }
    let r = lg_radial(q, spec);
    let arg = spec.ell as f64 * phi;
    Ok(Complex64::new(r * libm::cos(arg), r * libm::sin(arg)))
}
