//! Unit policy.
//!
//! | quantity              | unit      |
//! |-----------------------|-----------|
//! | length, wavelength    | µm        |
//! | time                  | fs        |
//! | angular frequency     | rad/fs    |
//! | transverse momentum   | µm⁻¹      |
//! | GVD                   | fs²/µm    |
//!
//! Every public function takes and returns these units. Conversions from the
//! customary lab units (mm, ps, fs²/mm, nm) happen at the edges through the
//! helpers below.

use core::f64::consts::PI;

/// Speed of light in µm/fs.
pub const C_UM_PER_FS: f64 = 0.299_792_458;

pub fn mm_to_um(mm: f64) -> f64 {
    mm * 1.0e3
}

pub fn um_to_mm(um: f64) -> f64 {
    um * 1.0e-3
}

pub fn nm_to_um(nm: f64) -> f64 {
    nm * 1.0e-3
}

pub fn ps_to_fs(ps: f64) -> f64 {
    ps * 1.0e3
}

/// fs²/mm to fs²/µm.
pub fn gvd_per_mm_to_per_um(gvd: f64) -> f64 {
    gvd * 1.0e-3
}

/// Angular frequency (rad/fs) of light with vacuum wavelength `lambda_um`.
pub fn angular_frequency(lambda_um: f64) -> f64 {
    2.0 * PI * C_UM_PER_FS / lambda_um
}

/// Exact detuning `2πc (1/λ − 1/λ_c)`; no small-detuning linearization.
pub fn wavelength_to_detuning(lambda_um: f64, center_um: f64) -> f64 {
    2.0 * PI * C_UM_PER_FS * (1.0 / lambda_um - 1.0 / center_um)
}

/// Inverse of [`wavelength_to_detuning`].
pub fn detuning_to_wavelength(omega: f64, center_um: f64) -> f64 {
    1.0 / (omega / (2.0 * PI * C_UM_PER_FS) + 1.0 / center_um)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detuning_round_trip() {
        let c = 0.8;
        for &l in &[0.7995, 0.8, 0.8005, 0.79, 0.81] {
            let w = wavelength_to_detuning(l, c);
            assert!((detuning_to_wavelength(w, c) - l).abs() < 1e-14);
        }
        assert_eq!(wavelength_to_detuning(c, c), 0.0);
        // shorter wavelength -> positive detuning
        assert!(wavelength_to_detuning(0.799, c) > 0.0);
    }
}
