//! Biphoton amplitudes for the three model families, normalization, grid
//! evaluation and JSA moment statistics.
//!
//! Every model factors as `exp(-w_p² |q_s + q_i|²) · K(|q_s - q_i|², Ω_s, Ω_i)`;
//! the kernel `K` carries everything model specific.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate_nd, pairwise_sum, QuadratureSpec, Rule};
use crate::params::{derive_params, CrystalSpec, DerivedParams, PulseRegime, PumpSpec, SpdcType};
use crate::phase_matching::{
    check_point, sinc, spatial_mismatch, spectral_mismatch, theta_spatial, theta_spectral,
    SpectralPoint, TransversePoint,
};
use crate::units::{detuning_to_wavelength, wavelength_to_detuning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Pump envelope times `sinc(Δk_z L / 2)`.
    General,
    /// Pump envelope times the product of spatial and spectral sincs.
    DoubleSinc,
    /// Fully separable product of four Gaussians.
    FourGaussian,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::General => "general",
            ModelKind::DoubleSinc => "double_sinc",
            ModelKind::FourGaussian => "four_gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonModel {
    pub kind: ModelKind,
    pub spdc_type: SpdcType,
    pub pump: PumpSpec,
    pub crystal: CrystalSpec,
    pub derived: DerivedParams,
    /// Constant factor applied to the amplitude (1 unless rescaled).
    pub scale: f64,
}

impl BiphotonModel {
    pub fn new(
        kind: ModelKind,
        pump: PumpSpec,
        crystal: CrystalSpec,
        regime: Option<PulseRegime>,
    ) -> Result<Self> {
        let derived = derive_params(&pump, &crystal, regime)?;
        Ok(BiphotonModel {
            kind,
            spdc_type: crystal.spdc_type,
            pump,
            crystal,
            derived,
            scale: 1.0,
        })
    }

    /// Build from precomputed constants. `derived` must match `pump` and
    /// `crystal`; only the regime factors and guards may differ.
    pub fn from_parts(
        kind: ModelKind,
        pump: PumpSpec,
        crystal: CrystalSpec,
        derived: DerivedParams,
    ) -> Result<Self> {
        let fresh = derive_params(&pump, &crystal, Some(derived.regime))?;
        let comparable = DerivedParams {
            alpha: fresh.alpha,
            beta_t2: fresh.beta_t2,
            guards: fresh.guards,
            ..derived
        };
        if comparable != fresh {
            return Err(Error::validation(
                "derived",
                "derived parameters are inconsistent with pump and crystal",
            ));
        }
        Ok(BiphotonModel {
            kind,
            spdc_type: crystal.spdc_type,
            pump,
            crystal,
            derived,
            scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    /// Pump spatial factor `exp(-w_p² |Q₊|²)` from `|Q₊|²`.
    pub(crate) fn pump_spatial(&self, sum_sq: f64) -> f64 {
        libm::exp(-self.derived.w_p * self.derived.w_p * sum_sq)
    }

    /// Pump spectral factor `exp(-τ² Ω₊² / (8 ln 2))`.
    pub(crate) fn pump_spectral(&self, omega_sum: f64) -> f64 {
        let t = self.derived.tau;
        libm::exp(-t * t * omega_sum * omega_sum / (8.0 * LN_2))
    }

    /// Spatial factor of the separable Gaussian models, `exp(-σ_q² s)`.
    pub(crate) fn gaussian_spatial(&self, s: f64) -> f64 {
        libm::exp(-self.derived.sigma_q * self.derived.sigma_q * s)
    }

    /// Spectral part of the four-Gaussian amplitude.
    pub(crate) fn gaussian_spectral(&self, ws: f64, wi: f64) -> f64 {
        let d = &self.derived;
        let sum = ws + wi;
        match self.spdc_type {
            SpdcType::TypeI => {
                let diff = ws - wi;
                libm::exp(-d.alpha * sum * sum / (2.0 * d.a_tau * d.a_tau) - diff * diff / (2.0 * d.b_tau * d.b_tau))
            }
            SpdcType::TypeII => {
                // √GVD-weighted difference, measured in units of √GVD_s so
                // that b(τ) keeps its frequency units
                let u = libm::sqrt(d.gvd_s) * ws - libm::sqrt(d.gvd_i) * wi;
                libm::exp(
                    -d.beta_t2 * sum * sum / (2.0 * d.a_tau * d.a_tau)
                        - u * u / (2.0 * d.b_tau * d.b_tau * d.gvd_s),
                )
            }
        }
    }

    /// Kernel `K(s, Ω_s, Ω_i)` with `s = |q_s - q_i|²`; no guards, no scale.
    pub(crate) fn kernel(&self, s: f64, ws: f64, wi: f64) -> f64 {
        let d = &self.derived;
        match self.kind {
            ModelKind::General => {
                self.pump_spectral(ws + wi)
                    * sinc(d.length / 2.0 * (spatial_mismatch(s, d) + spectral_mismatch(ws, wi, d)))
            }
            ModelKind::DoubleSinc => {
                self.pump_spectral(ws + wi) * theta_spatial(s, d) * theta_spectral(ws, wi, d)
            }
            ModelKind::FourGaussian => self.gaussian_spatial(s) * self.gaussian_spectral(ws, wi),
        }
    }

    /// Amplitude before normalization. Real and nonnegative up to the sign
    /// of the sinc factors; returned as complex.
    pub fn amplitude(&self, qs: &TransversePoint, qi: &TransversePoint, w: &SpectralPoint) -> Result<Complex64> {
        check_point(qs, qi, w, &self.derived)?;
        let v = self.scale
            * self.pump_spatial(qs.plus(qi).norm_sq())
            * self.kernel(qs.minus(qi).norm_sq(), w.omega_s, w.omega_i);
        Ok(Complex64::new(v, 0.0))
    }

    /// Default quadrature for [`normalize`]: axes `(Q₋x, Q₋y, Ω₊, Ω₋)`.
    ///
    /// Four-Gaussian models use Gauss–Hermite over the whole space. The sinc
    /// models are not square integrable over all `Q₋` and `Ω₋` (the
    /// phase-matching ring carries the same weight at every detuning), so
    /// they are normalized on the guard box `|Q₋| ≤ 2 q_max`,
    /// `|Ω₋| ≤ 2 Ω_max` with Gauss–Legendre.
    pub fn normalization_spec(&self, order: usize) -> QuadratureSpec {
        let d = &self.derived;
        match self.kind {
            ModelKind::FourGaussian => {
                let (s_plus, s_minus) = self.gaussian_sum_diff_widths();
                // |Φ|² halves each squared width
                let sq = 1.0 / (core::f64::consts::SQRT_2 * d.sigma_q);
                QuadratureSpec::new(
                    Rule::GaussHermite,
                    vec![order; 4],
                    vec![sq, sq, s_plus / core::f64::consts::SQRT_2, s_minus / core::f64::consts::SQRT_2],
                )
            }
            _ => {
                let q = 2.0 * d.guards.q_max;
                let s_plus = 6.0 * d.pump_sum_width();
                QuadratureSpec::new(
                    Rule::GaussLegendre,
                    vec![order; 4],
                    vec![q, q, s_plus, 2.0 * d.guards.omega_max],
                )
            }
        }
    }

    /// Amplitude `1/e` half-widths of the four-Gaussian spectral factor along
    /// `Ω₊` and `Ω₋` (exact for type I; for type II the widths along the
    /// same axes of the diagonal part).
    fn gaussian_sum_diff_widths(&self) -> (f64, f64) {
        let d = &self.derived;
        let f = match self.spdc_type {
            SpdcType::TypeI => d.alpha,
            SpdcType::TypeII => d.beta_t2,
        };
        (d.a_tau * libm::sqrt(2.0 / f), d.b_tau * libm::sqrt(2.0))
    }
}

/// `N` such that `∫ |N Φ|² d²q_s d²q_i dΩ_s dΩ_i = 1`.
///
/// The pump factor in `Q₊ = q_s + q_i` is integrated analytically; the rest
/// is integrated with `quad` over `(Q₋x, Q₋y, Ω₊, Ω₋)`.
pub fn normalize(model: &BiphotonModel, quad: &QuadratureSpec) -> Result<f64> {
    if quad.orders.iter().any(|&o| o < 2) {
        return Err(Error::Convergence(String::from("degenerate grid: quadrature order below 2")));
    }
    if quad.orders.len() != 4 {
        return Err(Error::validation("quadrature.orders", "normalization needs 4 axes"));
    }
    let f = |x: &[f64]| {
        let s = x[0] * x[0] + x[1] * x[1];
        let ws = 0.5 * (x[2] + x[3]);
        let wi = 0.5 * (x[2] - x[3]);
        let k = model.kernel(s, ws, wi);
        k * k
    };
    let report = integrate_nd(&f, quad)?;
    if !report.converged {
        return Err(Error::Convergence(format!(
            "normalization: relative change {:.3e} > {:.1e}",
            report.last_delta, quad.tolerance
        )));
    }
    let w = model.derived.w_p;
    // d²q_s d²q_i = ¼ d²Q₊ d²Q₋, dΩ_s dΩ_i = ½ dΩ₊ dΩ₋
    let integral = model.scale * model.scale * PI / (2.0 * w * w) * report.value / 8.0;
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(Error::Convergence(format!("normalization integral {integral}")));
    }
    Ok(1.0 / libm::sqrt(integral))
}

/// Closed-form normalization of a four-Gaussian model.
pub fn normalization_closed_form(model: &BiphotonModel) -> Result<f64> {
    if model.kind != ModelKind::FourGaussian {
        return Err(Error::Unsupported(format!("closed form for {:?}", model.kind)));
    }
    let d = &model.derived;
    // |Φ|² = exp(-xᵀ Q x) over (Ω_s, Ω_i); ∫ = π / √det Q
    let (qss, qii, qsi) = match model.spdc_type {
        SpdcType::TypeI => {
            let p = d.alpha / (d.a_tau * d.a_tau);
            let m = 1.0 / (d.b_tau * d.b_tau);
            (p + m, p + m, p - m)
        }
        SpdcType::TypeII => {
            let p = d.beta_t2 / (d.a_tau * d.a_tau);
            let m = 1.0 / (d.b_tau * d.b_tau * d.gvd_s);
            (p + m * d.gvd_s, p + m * d.gvd_i, p - m * libm::sqrt(d.gvd_s * d.gvd_i))
        }
    };
    let det = qss * qii - qsi * qsi;
    let spectral = PI / libm::sqrt(det);
    let spatial = 0.25 * (PI / (2.0 * d.w_p * d.w_p)) * (PI / (2.0 * d.sigma_q * d.sigma_q));
    let integral = model.scale * model.scale * spatial * spectral;
    Ok(1.0 / libm::sqrt(integral))
}

/// Position-space four-Gaussian type-I amplitude (one transverse axis),
/// unit value at the origin.
pub fn position_amplitude_type1_4g(x_s: f64, x_i: f64, w: &SpectralPoint, model: &BiphotonModel) -> Result<f64> {
    if model.kind != ModelKind::FourGaussian || model.spdc_type != SpdcType::TypeI {
        return Err(Error::Unsupported(String::from(
            "position_amplitude_type1_4g needs a type-I four-Gaussian model",
        )));
    }
    let d = &model.derived;
    let xp = x_s + x_i;
    let xm = x_s - x_i;
    Ok(libm::exp(-xp * xp / (16.0 * d.w_p * d.w_p))
        * libm::exp(-xm * xm / (16.0 * d.sigma_x * d.sigma_x))
        * model.gaussian_spectral(w.omega_s, w.omega_i))
}

/// One-axis position amplitude `∫∫ dq_s dq_i e^{i(q_s x_s + q_i x_i)} Φ` for
/// any model, with `q_y = 0`.
///
/// The pump factor transforms to `(√π / 2 w_p) exp(-(x_s + x_i)² / (16 w_p²))`
/// exactly; the kernel is transformed numerically along `Q₋`.
pub fn position_amplitude_1d(x_s: f64, x_i: f64, w: &SpectralPoint, model: &BiphotonModel) -> Result<f64> {
    let d = &model.derived;
    d.guards.check_omega(w.omega_s)?;
    d.guards.check_omega(w.omega_i)?;
    let xp = x_s + x_i;
    let xm = x_s - x_i;
    let pump = libm::sqrt(PI) / (2.0 * d.w_p) * libm::exp(-xp * xp / (16.0 * d.w_p * d.w_p));
    Ok(model.scale * pump * kernel_transform(model, xm, w.omega_s, w.omega_i)?)
}

/// `∫ cos(Q x₋ / 2) K(Q², Ω_s, Ω_i) dQ` over the real line.
fn kernel_transform(model: &BiphotonModel, xm: f64, ws: f64, wi: f64) -> Result<f64> {
    let d = &model.derived;
    if model.kind == ModelKind::FourGaussian {
        let sq = d.sigma_q;
        return Ok(libm::sqrt(PI) / sq
            * libm::exp(-xm * xm / (16.0 * sq * sq))
            * model.gaussian_spectral(ws, wi));
    }
    // sinc argument is u - u0 with u = c Q²; panels follow its lobes and the
    // cosine period
    let c = d.length / (4.0 * d.k_p);
    let u0 = match model.kind {
        ModelKind::General => d.length / 2.0 * spectral_mismatch(ws, wi, d),
        _ => 0.0,
    };
    let u_max = u0.max(0.0) + 400.0 * PI;
    let q_max = libm::sqrt(u_max / c);
    let half = xm.abs() / 2.0;
    let (t, tw) = gauss_legendre(8)?;
    let mut terms = Vec::new();
    let mut q = 0.0;
    while q < q_max {
        let next_u = libm::sqrt((c * q * q + PI / 2.0) / c);
        let next_x = if half > 0.0 { q + PI / (2.0 * half) } else { f64::INFINITY };
        let q1 = next_u.min(next_x).min(q_max);
        let (m, h) = (0.5 * (q1 + q), 0.5 * (q1 - q));
        for (ti, wi_) in t.iter().zip(&tw) {
            let qq = m + h * ti;
            terms.push(wi_ * h * libm::cos(qq * half) * model.kernel(qq * qq, ws, wi));
        }
        q = q1;
    }
    Ok(2.0 * pairwise_sum(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisVar {
    /// Signal wavelength, µm.
    LambdaS,
    /// Idler wavelength, µm.
    LambdaI,
    /// Signal detuning, rad/fs.
    OmegaS,
    /// Idler detuning, rad/fs.
    OmegaI,
    /// Signal transverse momentum, x component, µm⁻¹.
    QSx,
    /// Idler transverse momentum, x component, µm⁻¹.
    QIx,
    /// Signal transverse position, µm.
    XS,
    /// Idler transverse position, µm.
    XI,
}

impl AxisVar {
    pub fn name(&self) -> &'static str {
        match self {
            AxisVar::LambdaS => "lambda_s_um",
            AxisVar::LambdaI => "lambda_i_um",
            AxisVar::OmegaS => "Omega_s",
            AxisVar::OmegaI => "Omega_i",
            AxisVar::QSx => "q_sx",
            AxisVar::QIx => "q_ix",
            AxisVar::XS => "x_s_um",
            AxisVar::XI => "x_i_um",
        }
    }

    fn is_position(&self) -> bool {
        matches!(self, AxisVar::XS | AxisVar::XI)
    }

    fn is_momentum(&self) -> bool {
        matches!(self, AxisVar::QSx | AxisVar::QIx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub var: AxisVar,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(var: AxisVar, start: f64, end: f64, count: usize) -> Self {
        Axis { var, start, end, count }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| self.start + (self.end - self.start) * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Values of the coordinates that are not swept. Wavelengths in µm; a
/// wavelength of 0 means "degenerate" (`2 λ_p`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FixedCoords {
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub q_sx: f64,
    pub q_sy: f64,
    pub q_ix: f64,
    pub q_iy: f64,
    pub x_s: f64,
    pub x_i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldValue {
    Amplitude,
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Column axis.
    pub x: Axis,
    /// Row axis.
    pub y: Axis,
    pub fixed: FixedCoords,
    pub value: FieldValue,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("grid.x", &self.x), ("grid.y", &self.y)] {
            if a.count < 2 {
                return Err(Error::validation(name, format!("{} points, need >= 2", a.count)));
            }
            if !(a.start.is_finite() && a.end.is_finite()) || a.start == a.end {
                return Err(Error::validation(name, "range must be finite and nonempty"));
            }
        }
        if self.x.var == self.y.var {
            return Err(Error::validation("grid.y", "axes must differ"));
        }
        let pos = self.x.var.is_position() || self.y.var.is_position();
        let mom = self.x.var.is_momentum() || self.y.var.is_momentum();
        if pos && mom {
            return Err(Error::validation("grid", "cannot mix position and momentum axes"));
        }
        let is_lambda = |v: AxisVar| matches!(v, AxisVar::LambdaS | AxisVar::LambdaI);
        let is_omega = |v: AxisVar| matches!(v, AxisVar::OmegaS | AxisVar::OmegaI);
        if (is_lambda(self.x.var) && is_omega(self.y.var)) || (is_omega(self.x.var) && is_lambda(self.y.var)) {
            return Err(Error::validation("grid", "cannot mix wavelength and detuning axes"));
        }
        for v in [self.x.var, self.y.var] {
            if is_lambda(v) {
                let a = if v == self.x.var { self.x } else { self.y };
                if a.start <= 0.0 || a.end <= 0.0 {
                    return Err(Error::validation("grid", "wavelengths must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn position_domain(&self) -> bool {
        self.x.var.is_position() || self.y.var.is_position()
    }
}

/// Row-major 2D field: `values[row * xs.len() + col]`, row index along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub x_var: AxisVar,
    pub y_var: AxisVar,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    pub value: FieldValue,
}

impl Field {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.xs.len() + col]
    }
}

/// Fully resolved coordinates of one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub qs: TransversePoint,
    pub qi: TransversePoint,
    pub w: SpectralPoint,
    /// Positions, µm; only meaningful on position grids.
    pub x_s: f64,
    pub x_i: f64,
}

impl GridSpec {
    /// Coordinates at column value `xv` and row value `yv`; `center` is the
    /// degenerate wavelength, µm.
    pub fn point(&self, center: f64, xv: f64, yv: f64) -> GridPoint {
        let mut c = self.fixed;
        if c.lambda_s == 0.0 {
            c.lambda_s = center;
        }
        if c.lambda_i == 0.0 {
            c.lambda_i = center;
        }
        let mut omega_s = None;
        let mut omega_i = None;
        for (var, v) in [(self.x.var, xv), (self.y.var, yv)] {
            match var {
                AxisVar::LambdaS => c.lambda_s = v,
                AxisVar::LambdaI => c.lambda_i = v,
                AxisVar::OmegaS => omega_s = Some(v),
                AxisVar::OmegaI => omega_i = Some(v),
                AxisVar::QSx => c.q_sx = v,
                AxisVar::QIx => c.q_ix = v,
                AxisVar::XS => c.x_s = v,
                AxisVar::XI => c.x_i = v,
            }
        }
        GridPoint {
            qs: TransversePoint::new(c.q_sx, c.q_sy),
            qi: TransversePoint::new(c.q_ix, c.q_iy),
            w: SpectralPoint::new(
                omega_s.unwrap_or_else(|| wavelength_to_detuning(c.lambda_s, center)),
                omega_i.unwrap_or_else(|| wavelength_to_detuning(c.lambda_i, center)),
            ),
            x_s: c.x_s,
            x_i: c.x_i,
        }
    }
}

fn point_value(model: &BiphotonModel, grid: &GridSpec, xv: f64, yv: f64) -> Result<f64> {
    let p = grid.point(model.pump.degenerate_wavelength(), xv, yv);
    let a = if grid.position_domain() {
        position_amplitude_1d(p.x_s, p.x_i, &p.w, model)?
    } else {
        model.amplitude(&p.qs, &p.qi, &p.w)?.re
    };
    Ok(match grid.value {
        FieldValue::Amplitude => a.abs(),
        FieldValue::Intensity => a * a,
    })
}

/// Values of one grid row (fixed `y`), in column order.
pub fn jsa_row(model: &BiphotonModel, grid: &GridSpec, row: usize) -> Result<Vec<f64>> {
    grid.validate()?;
    if row >= grid.y.count {
        return Err(Error::validation("row", format!("{row} >= {}", grid.y.count)));
    }
    let yv = grid.y.values()[row];
    grid.x.values().into_iter().map(|xv| point_value(model, grid, xv, yv)).collect()
}

/// Evaluate `|Φ|` or `|Φ|²` on a 2D grid.
pub fn jsa_grid(model: &BiphotonModel, grid: &GridSpec) -> Result<Field> {
    grid.validate()?;
    let mut values = Vec::with_capacity(grid.x.count * grid.y.count);
    for row in 0..grid.y.count {
        values.extend(jsa_row(model, grid, row)?);
    }
    Ok(field_from_rows(grid, values))
}

/// Assemble a [`Field`] from row-major values computed elsewhere.
pub fn field_from_rows(grid: &GridSpec, values: Vec<f64>) -> Field {
    Field {
        x_var: grid.x.var,
        y_var: grid.y.var,
        xs: grid.x.values(),
        ys: grid.y.values(),
        values,
        value: grid.value,
    }
}

/// Moment statistics of a nonnegative 2D field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsaStats {
    /// `(x, y)` in axis units.
    pub centroid: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Major-axis angle measured from the `x` axis toward the `y` axis,
    /// radians in `(-π/2, π/2]`.
    pub tilt: f64,
    /// `√(λ_max / λ_min)`.
    pub axis_ratio: f64,
    /// Set when the covariance is isotropic and the tilt is meaningless.
    pub tilt_undefined: bool,
}

/// Intensity-weighted centroid, covariance and principal axis. The field
/// values themselves are the weights.
pub fn jsa_stats(field: &Field) -> Result<JsaStats> {
    let nx = field.xs.len();
    if field.values.len() != nx * field.ys.len() || field.values.is_empty() {
        return Err(Error::validation("field", "shape mismatch"));
    }
    if field.values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::validation("field", "values must be nonnegative"));
    }
    let weights = &field.values;
    let total = pairwise_sum(weights);
    if !(total > 0.0) {
        return Err(Error::validation("field", "field is identically zero"));
    }
    let moment = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        let terms: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * f(field.xs[k % nx], field.ys[k / nx]))
            .collect();
        pairwise_sum(&terms) / total
    };
    let mx = moment(&|x, _| x);
    let my = moment(&|_, y| y);
    let sxx = moment(&|x, _| (x - mx) * (x - mx));
    let syy = moment(&|_, y| (y - my) * (y - my));
    let sxy = moment(&|x, y| (x - mx) * (y - my));
    let half_tr = 0.5 * (sxx + syy);
    let r = libm::hypot(0.5 * (sxx - syy), sxy);
    let l_max = half_tr + r;
    let l_min = (half_tr - r).max(0.0);
    let mut tilt = 0.5 * libm::atan2(2.0 * sxy, sxx - syy);
    if tilt <= -PI / 2.0 {
        tilt += PI;
    }
    Ok(JsaStats {
        centroid: [mx, my],
        covariance: [[sxx, sxy], [sxy, syy]],
        tilt,
        axis_ratio: if l_min > 0.0 { libm::sqrt(l_max / l_min) } else { f64::INFINITY },
        tilt_undefined: r <= 1e-9 * half_tr.abs(),
    })
}

/// Wavelength (µm) of a detuning about the degenerate center of `model`.
pub fn detuning_wavelength(model: &BiphotonModel, omega: f64) -> f64 {
    detuning_to_wavelength(omega, model.pump.degenerate_wavelength())
}
