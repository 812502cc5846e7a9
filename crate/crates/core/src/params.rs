//! Physical inputs and the constants derived from them.

use alloc::format;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{angular_frequency, gvd_per_mm_to_per_um, mm_to_um, C_UM_PER_FS};

/// Interpolation exponent of the Fedorov width formulas.
pub const FEDOROV_GAMMA: f64 = 2.21;

/// Gaussian-for-sinc prefactor on the spatial phase-matching argument.
pub const GAUSSIAN_PREFACTOR: f64 = 8.0 / 3.0;

pub const DEFAULT_Q_MAX: f64 = 0.5;
pub const DEFAULT_OMEGA_MAX_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpdcType {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseRegime {
    Short,
    Long,
}

/// Gaussian pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    /// Vacuum wavelength, µm.
    pub lambda_p: f64,
    /// Beam waist, µm.
    pub w_p: f64,
    /// Pulse duration, fs.
    pub tau: f64,
}

impl PumpSpec {
    pub fn new(lambda_p: f64, w_p: f64, tau: f64) -> Result<Self> {
        let p = PumpSpec { lambda_p, w_p, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("pump.lambda_p", self.lambda_p)?;
        positive("pump.w_p", self.w_p)?;
        positive("pump.tau", self.tau)
    }

    /// Degenerate signal/idler central wavelength, µm.
    pub fn degenerate_wavelength(&self) -> f64 {
        2.0 * self.lambda_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpIndex {
    /// Pump refractive index; `k_p = 2π n_p / λ_p`.
    RefractiveIndex(f64),
    /// Pump wavenumber inside the crystal, µm⁻¹.
    Wavenumber(f64),
}

/// Nonlinear crystal. Group velocities are stored as group-index divisors
/// (`v_g = c / n_g`), GVDs in fs²/µm and the length in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    pub spdc_type: SpdcType,
    pub length: f64,
    pub pump_index: PumpIndex,
    pub ng_p: f64,
    pub ng_s: f64,
    pub ng_i: f64,
    pub gvd_p: f64,
    pub gvd_s: f64,
    pub gvd_i: f64,
}

impl CrystalSpec {
    /// Build from lab units: length in mm, GVDs in fs²/mm.
    #[allow(clippy::too_many_arguments)]
    pub fn from_lab_units(
        spdc_type: SpdcType,
        length_mm: f64,
        pump_index: PumpIndex,
        ng: [f64; 3],
        gvd_fs2_per_mm: [f64; 3],
    ) -> Result<Self> {
        let c = CrystalSpec {
            spdc_type,
            length: mm_to_um(length_mm),
            pump_index,
            ng_p: ng[0],
            ng_s: ng[1],
            ng_i: ng[2],
            gvd_p: gvd_per_mm_to_per_um(gvd_fs2_per_mm[0]),
            gvd_s: gvd_per_mm_to_per_um(gvd_fs2_per_mm[1]),
            gvd_i: gvd_per_mm_to_per_um(gvd_fs2_per_mm[2]),
        };
        c.validate()?;
        Ok(c)
    }

    /// Type-II BBO, 0.5 mm, with the group indices 1.708/1.626/1.684 and
    /// GVDs 180/61.7/75.1 fs²/mm. The pump wavenumber uses the group index
    /// of the pump as its phase index.
    pub fn bbo_fig5() -> Self {
        CrystalSpec {
            spdc_type: SpdcType::TypeII,
            length: 500.0,
            pump_index: PumpIndex::RefractiveIndex(BBO_PUMP_INDEX),
            ng_p: 1.708,
            ng_s: 1.626,
            ng_i: 1.684,
            gvd_p: 0.180,
            gvd_s: 0.0617,
            gvd_i: 0.0751,
        }
    }

    /// LiIO₃-like type-I geometry. No dispersion data ships for LiIO₃, so
    /// the group indices and GVDs are the BBO signal values; `n_p` must be
    /// supplied by the caller.
    pub fn liio3_geometry(length_mm: f64, n_p: f64) -> Result<Self> {
        let bbo = Self::bbo_fig5();
        Self::from_lab_units(
            SpdcType::TypeI,
            length_mm,
            PumpIndex::RefractiveIndex(n_p),
            [bbo.ng_p, bbo.ng_s, bbo.ng_s],
            [bbo.gvd_p * 1e3, bbo.gvd_s * 1e3, bbo.gvd_s * 1e3],
        )
    }

    /// Type-I copy: idler group index and GVD replaced by the signal values.
    pub fn as_type_one(&self) -> Self {
        CrystalSpec {
            spdc_type: SpdcType::TypeI,
            ng_i: self.ng_s,
            gvd_i: self.gvd_s,
            ..*self
        }
    }

    /// Copy with signal and idler dispersion exchanged.
    pub fn swapped_signal_idler(&self) -> Self {
        CrystalSpec {
            ng_s: self.ng_i,
            ng_i: self.ng_s,
            gvd_s: self.gvd_i,
            gvd_i: self.gvd_s,
            ..*self
        }
    }

    pub fn with_length(&self, length_um: f64) -> Self {
        CrystalSpec {
            length: length_um,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("crystal.L", self.length)?;
        match self.pump_index {
            PumpIndex::RefractiveIndex(n) => positive("crystal.n_p", n)?,
            PumpIndex::Wavenumber(k) => positive("crystal.k_p", k)?,
        }
        for (name, v) in [("crystal.ng_p", self.ng_p), ("crystal.ng_s", self.ng_s), ("crystal.ng_i", self.ng_i)] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::validation(name, format!("group-index divisor {v} must be >= 1")));
            }
        }
        for (name, v) in [("crystal.gvd_p", self.gvd_p), ("crystal.gvd_s", self.gvd_s), ("crystal.gvd_i", self.gvd_i)] {
            if !v.is_finite() {
                return Err(Error::validation(name, "must be finite"));
            }
        }
        if !(self.gvd_s > 0.0) {
            return Err(Error::validation("crystal.gvd_s", "signal GVD must be positive"));
        }
        if self.gvd_i < 0.0 {
            return Err(Error::validation("crystal.gvd_i", "idler GVD must be nonnegative"));
        }
        if self.spdc_type == SpdcType::TypeI {
            if self.ng_s != self.ng_i {
                return Err(Error::validation(
                    "crystal.ng_i",
                    "type I requires identical signal and idler group velocities",
                ));
            }
            if self.gvd_s != self.gvd_i {
                return Err(Error::validation(
                    "crystal.gvd_i",
                    "type I requires identical signal and idler GVD",
                ));
            }
        }
        Ok(())
    }
}

/// Phase index used for the pump wavenumber in the BBO preset.
pub const BBO_PUMP_INDEX: f64 = 1.708;

/// Paraxial and narrowband validity bounds for point queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// µm⁻¹
    pub q_max: f64,
    /// rad/fs
    pub omega_max: f64,
}

impl Guards {
    pub fn check_q(&self, q: f64) -> Result<()> {
        if !(q.is_finite() && q.abs() <= self.q_max) {
            return Err(Error::Domain {
                bound: "paraxial q_max",
                value: q,
                limit: self.q_max,
            });
        }
        Ok(())
    }

    pub fn check_omega(&self, w: f64) -> Result<()> {
        if !(w.is_finite() && w.abs() <= self.omega_max) {
            return Err(Error::Domain {
                bound: "narrowband omega_max",
                value: w,
                limit: self.omega_max,
            });
        }
        Ok(())
    }
}

/// Everything downstream code needs, in crate units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub spdc_type: SpdcType,
    /// Pump wavenumber in the crystal, µm⁻¹.
    pub k_p: f64,
    /// Central pump angular frequency, rad/fs.
    pub omega_0: f64,
    /// Pump wavelength, µm.
    pub lambda_p: f64,
    /// Crystal length, µm.
    pub length: f64,
    /// Pump waist, µm.
    pub w_p: f64,
    /// Pump duration, fs.
    pub tau: f64,
    /// Inverse group velocities, fs/µm.
    pub inv_vg_p: f64,
    pub inv_vg_s: f64,
    pub inv_vg_i: f64,
    /// `1/v_{g,p} - 1/v_{g,s}`, fs/µm.
    pub delta_inv_vg: f64,
    /// fs²/µm
    pub gvd_s: f64,
    pub gvd_i: f64,
    /// `GVD_s / 2`, fs²/µm.
    pub beta_disp: f64,
    /// Group-index mismatch `c (1/v_{g,p} - 1/v_{g,s})`, dimensionless.
    pub a_fed: f64,
    pub eta: f64,
    pub b_fed: f64,
    pub gamma: f64,
    /// rad/fs
    pub a_tau: f64,
    pub b_tau: f64,
    /// µm
    pub sigma_q: f64,
    pub sigma_x: f64,
    pub regime: PulseRegime,
    pub alpha: f64,
    pub beta_t2: f64,
    pub guards: Guards,
}

impl DerivedParams {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta_t2(mut self, beta: f64) -> Self {
        self.beta_t2 = beta;
        self
    }

    pub fn with_guards(mut self, guards: Guards) -> Self {
        self.guards = guards;
        self
    }

    /// `a(τ)` in the limit `η → 0`.
    pub fn a_short_limit(&self) -> f64 {
        fedorov_a_prefactor(self.a_fed, self.lambda_p, self.length, self.omega_0)
    }

    /// Pump spectral amplitude width: the pump factor is
    /// `exp(-Ω₊² / (2 σ₊²))` with `σ₊ = 2√ln2 / τ`.
    pub fn pump_sum_width(&self) -> f64 {
        2.0 * libm::sqrt(core::f64::consts::LN_2) / self.tau
    }
}

fn fedorov_a_prefactor(a_fed: f64, lambda0: f64, length: f64, omega_0: f64) -> f64 {
    1.39 / (PI * a_fed * libm::sqrt(core::f64::consts::LN_2)) * (lambda0 / length) * omega_0
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::validation(field, format!("{v} must be positive and finite")));
    }
    Ok(())
}

/// Compute all derived constants.
///
/// The regime (and with it `alpha` and `beta_t2`) follows `η < 1` unless
/// `regime` is given.
pub fn derive_params(
    pump: &PumpSpec,
    crystal: &CrystalSpec,
    regime: Option<PulseRegime>,
) -> Result<DerivedParams> {
    pump.validate()?;
    crystal.validate()?;
    let lambda_p = pump.lambda_p;
    let length = crystal.length;
    let k_p = match crystal.pump_index {
        PumpIndex::RefractiveIndex(n) => 2.0 * PI * n / lambda_p,
        PumpIndex::Wavenumber(k) => k,
    };
    let omega_0 = angular_frequency(lambda_p);
    let c = C_UM_PER_FS;
    let inv_vg_p = crystal.ng_p / c;
    let inv_vg_s = crystal.ng_s / c;
    let inv_vg_i = crystal.ng_i / c;
    let delta_inv_vg = inv_vg_p - inv_vg_s;
    if delta_inv_vg == 0.0 {
        return Err(Error::DegenerateGroupVelocities);
    }
    let a_fed = c * delta_inv_vg;
    let eta = 2.0 * c * pump.tau / (a_fed.abs() * length);
    let b_fed = omega_0 * c * crystal.gvd_s / 4.0;
    let gamma = FEDOROV_GAMMA;
    let interp = libm::pow(1.0 + libm::pow(eta, gamma), 1.0 / gamma);
    let a_tau = fedorov_a_prefactor(a_fed.abs(), lambda_p, length, omega_0) / interp;
    let b_tau = libm::sqrt(lambda_p / (2.0 * PI * 0.249 * b_fed * length))
        * libm::sqrt(interp)
        * omega_0
        / libm::sqrt(eta);
    let sigma_x = libm::sqrt(length / (6.0 * k_p));
    let sigma_q = libm::sqrt(GAUSSIAN_PREFACTOR * length / (16.0 * k_p));
    let regime = regime.unwrap_or(if eta < 1.0 { PulseRegime::Short } else { PulseRegime::Long });
    let (alpha, beta_t2) = match regime {
        PulseRegime::Short => (0.4, 0.1),
        PulseRegime::Long => (1.0, 1.0),
    };
    Ok(DerivedParams {
        spdc_type: crystal.spdc_type,
        k_p,
        omega_0,
        lambda_p,
        length,
        w_p: pump.w_p,
        tau: pump.tau,
        inv_vg_p,
        inv_vg_s,
        inv_vg_i,
        delta_inv_vg,
        gvd_s: crystal.gvd_s,
        gvd_i: crystal.gvd_i,
        beta_disp: crystal.gvd_s / 2.0,
        a_fed,
        eta,
        b_fed,
        gamma,
        a_tau,
        b_tau,
        sigma_q,
        sigma_x,
        regime,
        alpha,
        beta_t2,
        guards: Guards {
            q_max: DEFAULT_Q_MAX,
            omega_max: DEFAULT_OMEGA_MAX_FRACTION * omega_0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bbo(tau: f64) -> DerivedParams {
        derive_params(&PumpSpec::new(0.4, 28.0, tau).unwrap(), &CrystalSpec::bbo_fig5(), None).unwrap()
    }

    #[test]
    fn bbo_constants_converted() {
        let c = CrystalSpec::bbo_fig5();
        let lab = CrystalSpec::from_lab_units(
            SpdcType::TypeII,
            0.5,
            PumpIndex::RefractiveIndex(BBO_PUMP_INDEX),
            [1.708, 1.626, 1.684],
            [180.0, 61.7, 75.1],
        )
        .unwrap();
        assert_eq!(c.length, lab.length);
        for (a, b) in [(c.gvd_p, lab.gvd_p), (c.gvd_s, lab.gvd_s), (c.gvd_i, lab.gvd_i)] {
            assert!((a - b).abs() < 1e-15);
        }
        let d = bbo(50.0);
        assert!((d.delta_inv_vg - 0.082 / C_UM_PER_FS).abs() < 1e-12);
        assert!((d.beta_disp - 0.03085).abs() < 1e-12);
    }

    #[test]
    fn sigma_x_hand_value() {
        let crystal = CrystalSpec::from_lab_units(
            SpdcType::TypeI,
            0.5,
            PumpIndex::RefractiveIndex(1.0),
            [1.708, 1.626, 1.626],
            [180.0, 61.7, 61.7],
        )
        .unwrap();
        let d = derive_params(&PumpSpec::new(0.4, 28.0, 50.0).unwrap(), &crystal, None).unwrap();
        // 500 / (6 * 2π/0.4) = 5.30516...
        let k = 15.707_963_267_948_966;
        assert!((d.sigma_x * d.sigma_x - 500.0 / (6.0 * k)).abs() < 1e-12);
        assert!((d.sigma_x - 2.303_290).abs() < 1e-5);
        assert!((1.0 / (16.0 * d.sigma_x * d.sigma_x) - 3.0 * d.k_p / (8.0 * d.length)).abs() < 1e-15);
        assert_eq!(d.sigma_q, d.sigma_x);
    }

    #[test]
    fn eta_linear_in_tau() {
        let a = bbo(50.0);
        let b = bbo(100.0);
        assert!((b.eta / a.eta - 2.0).abs() < 1e-14);
    }

    #[test]
    fn regime_switch_and_override() {
        let short = bbo(50.0);
        assert_eq!(short.regime, PulseRegime::Short);
        assert_eq!((short.alpha, short.beta_t2), (0.4, 0.1));
        let long = bbo(50_000.0);
        assert_eq!(long.regime, PulseRegime::Long);
        assert_eq!((long.alpha, long.beta_t2), (1.0, 1.0));
        let forced = derive_params(
            &PumpSpec::new(0.4, 28.0, 50.0).unwrap(),
            &CrystalSpec::bbo_fig5(),
            Some(PulseRegime::Long),
        )
        .unwrap();
        assert_eq!(forced.alpha, 1.0);
        assert_eq!(forced.with_alpha(0.7).alpha, 0.7);
    }

    #[test]
    fn fedorov_widths_hand_values() {
        let d = bbo(50.0);
        // η = 2τ / (L Δ(1/v))
        let eta = 2.0 * 50.0 / (500.0 * 0.082 / C_UM_PER_FS);
        assert!((d.eta - eta).abs() < 1e-12);
        let omega0 = 2.0 * PI * C_UM_PER_FS / 0.4;
        let interp = (1.0 + eta.powf(2.21)).powf(1.0 / 2.21);
        let a = 1.39 / (PI * 0.082 * 2f64.ln().sqrt()) * (0.4 / 500.0) * omega0 / interp;
        assert!((d.a_tau - a).abs() < 1e-12 * a);
        let bfed = omega0 * C_UM_PER_FS * 0.0617 / 4.0;
        let b = (0.4 / (2.0 * PI * 0.249 * bfed * 500.0)).sqrt() * interp.sqrt() * omega0 / eta.sqrt();
        assert!((d.b_tau - b).abs() < 1e-12 * b);
    }

    #[test]
    fn long_pulse_a_tau_constant() {
        let taus = [1.0e5, 2.0e5, 5.0e5, 1.0e6];
        let at: alloc::vec::Vec<f64> = taus.iter().map(|&t| bbo(t).a_tau * t).collect();
        assert!(bbo(taus[0]).eta >= 100.0);
        for v in &at {
            assert!((v / at[0] - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn degenerate_group_velocities_rejected() {
        let mut c = CrystalSpec::bbo_fig5().as_type_one();
        c.ng_p = c.ng_s;
        let e = derive_params(&PumpSpec::new(0.4, 28.0, 50.0).unwrap(), &c, None).unwrap_err();
        assert_eq!(e, Error::DegenerateGroupVelocities);
    }

    #[test]
    fn validation_errors() {
        assert!(PumpSpec::new(0.4, -1.0, 50.0).is_err());
        assert!(PumpSpec::new(0.0, 1.0, 50.0).is_err());
        let mut c = CrystalSpec::bbo_fig5();
        c.length = 0.0;
        assert!(c.validate().is_err());
        let mut c = CrystalSpec::bbo_fig5();
        c.spdc_type = SpdcType::TypeI;
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "crystal.ng_i"),
            other => panic!("{other:?}"),
        }
        let mut c = CrystalSpec::bbo_fig5();
        c.ng_s = 0.9;
        assert!(c.validate().is_err());
        assert!(CrystalSpec::bbo_fig5().as_type_one().validate().is_ok());
    }

    #[test]
    fn pure_function() {
        let a = bbo(123.0);
        let b = bbo(123.0);
        assert_eq!(alloc::format!("{a:?}"), alloc::format!("{b:?}"));
        assert_eq!(a.a_tau.to_bits(), b.a_tau.to_bits());
    }
}
