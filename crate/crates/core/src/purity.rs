//! Spatial purity of LG-projected biphotons.
//!
//! With `ℓ_s = -ℓ_i` the LG phases cancel in the spectral Gram
//! `M(Ω, Ω') = ∫ d²q_s d²q_i Φ_LG(q, Ω) Φ_LG*(q, Ω')`, and every model
//! factors as `exp(-w_p²|Q₊|²) K(s, Ω)` with `s = |q_s - q_i|²`. Integrating
//! `Q₊` and the direction of `Q₋` first leaves
//!
//! `M(Ω, Ω') = ∫ ds W(s) K(s, Ω) K(s, Ω')`,
//!
//! where `W(s) = (π/4) ∫ d²Q₊ e^{-2 w_p² |Q₊|²} |LG(q_s)|² |LG(q_i)|²` is
//! evaluated exactly with a 2D Gauss–Hermite rule. The purity
//! `P = Tr(M²) / Tr(M)²` is then read off the smaller of the two Gram
//! matrices of `A[j, r] = √(v_j u_r) K(s_r, Ω_j)`.
//!
//! A second engine (`Rule::Trapezoid`) integrates the same quantity on
//! dense Cartesian trapezoid grids in all four transverse coordinates and
//! serves as an oracle.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::biphoton::{BiphotonModel, ModelKind};
use crate::error::{Error, Result};
use crate::modes::{lg_intensity_poly, lg_mode, CollectionSpec};
use crate::numerics::{
    composite_gauss_legendre, gauss_hermite, integration_nodes, pairwise_sum, QuadratureSpec, Rule,
    MAX_HERMITE_ORDER,
};
use crate::params::{PulseRegime, SpdcType};
use crate::phase_matching::{check_point, sinc, spectral_mismatch, SpectralPoint, TransversePoint};

/// Which phase mismatch enters the sinc kernels inside purity integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFlag {
    /// Only the quadratic spatial and spectral terms; the linear
    /// group-velocity term is dropped.
    QuadraticOnly,
    /// The full mismatch of the crystal's SPDC type.
    FullSinc,
}

impl KernelFlag {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFlag::QuadraticOnly => "quadratic_only",
            KernelFlag::FullSinc => "full_sinc",
        }
    }
}

/// Default phase distance kept beyond the phase-matching ring along `Ω₋`.
pub const DEFAULT_PHASE_TAIL: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PuritySetting {
    pub model: BiphotonModel,
    /// Applied as `ℓ_s = +ell`, `ℓ_i = -ell` with a shared waist and `p`.
    pub collection: CollectionSpec,
    /// Gauss engines (`GaussHermite`/`GaussLegendre`): orders are
    /// `[radial, transverse, Ω₊, Ω₋]`. Trapezoid oracle: points per axis
    /// `[Q₋, Q₊, Ω₊, Ω₋]`. Scalings multiply the automatically chosen widths.
    pub quad: QuadratureSpec,
    pub kernel: KernelFlag,
    /// Sinc phase kept beyond the phase-matching ring along `Ω₋`, rad.
    pub phase_tail: f64,
}

impl PuritySetting {
    pub fn new(model: BiphotonModel, collection: CollectionSpec) -> Result<Self> {
        let s = PuritySetting {
            model,
            collection,
            quad: default_quadrature(),
            kernel: KernelFlag::QuadraticOnly,
            phase_tail: DEFAULT_PHASE_TAIL,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_kernel(mut self, kernel: KernelFlag) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_quad(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_phase_tail(mut self, tail: f64) -> Self {
        self.phase_tail = tail;
        self
    }

    /// True for radial index p > 0, outside the p = 0 regime the purity
    /// results are validated against.
    pub fn radial_extension(&self) -> bool {
        self.collection.p_rad > 0
    }

    pub fn validate(&self) -> Result<()> {
        self.collection.validate()?;
        if self.quad.orders.len() != 4 {
            return Err(Error::validation("quadrature.orders", "purity needs 4 orders"));
        }
        if self.quad.scalings.len() != 4 {
            return Err(Error::validation("quadrature.scalings", "purity needs 4 scalings"));
        }
        self.quad.validate()?;
        if !(self.phase_tail > 0.0 && self.phase_tail.is_finite()) {
            return Err(Error::validation("quadrature.phase_tail", "must be positive"));
        }
        Ok(())
    }
}

/// Orders 24 radial, 16 transverse, 12 per spectral axis.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        rule: Rule::GaussHermite,
        orders: vec![24, 16, 12, 12],
        scalings: vec![1.0; 4],
        tolerance: 1e-4,
        max_refinements: 1,
        truncation_radius: 6.0,
    }
}

/// Oracle quadrature: dense trapezoid grids.
pub fn trapezoid_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        rule: Rule::Trapezoid,
        orders: vec![33, 17, 13, 321],
        scalings: vec![1.0; 4],
        tolerance: 1e-3,
        max_refinements: 1,
        truncation_radius: 6.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityResult {
    pub purity: f64,
    /// `Tr(M)` at the final level over `Tr(M)` one level coarser.
    pub trace_check: f64,
    /// Side of the Gram matrix used for the final trace of `M²`.
    pub gram_dimension: usize,
    /// `|ΔP|` between successive refinement levels.
    pub deltas: Vec<f64>,
    pub converged: bool,
    pub radial_nodes: usize,
    pub spectral_nodes: usize,
    /// Copy of [`PuritySetting::radial_extension`].
    pub radial_extension: bool,
    pub setting: PuritySetting,
}

/// `sinc` PMF with only the quadratic terms of the mismatch:
/// `-|q_s - q_i|²/(2k_p) + (GVD_s/4)(Ω_s - Ω_i)²` for type I and
/// `-|q_s - q_i|²/(2k_p) + (√GVD_s Ω_s - √GVD_i Ω_i)²/2` for type II.
pub fn simplified_kernel(
    qs: &TransversePoint,
    qi: &TransversePoint,
    w: &SpectralPoint,
    d: &crate::params::DerivedParams,
) -> Result<f64> {
    check_point(qs, qi, w, d)?;
    let s = qs.minus(qi).norm_sq();
    Ok(sinc(quadratic_phase(w.omega_s, w.omega_i, d) - d.length * s / (4.0 * d.k_p)))
}

/// `(L/2)` times the quadratic spectral mismatch.
fn quadratic_phase(ws: f64, wi: f64, d: &crate::params::DerivedParams) -> f64 {
    match d.spdc_type {
        SpdcType::TypeI => {
            let m = ws - wi;
            d.length / 2.0 * d.gvd_s / 4.0 * m * m
        }
        SpdcType::TypeII => {
            let u = libm::sqrt(d.gvd_s) * ws - libm::sqrt(d.gvd_i) * wi;
            d.length / 2.0 * u * u / 2.0
        }
    }
}

/// Kernel used inside the purity integrals.
struct PurityKernel<'a> {
    model: &'a BiphotonModel,
    flag: KernelFlag,
    /// `L / (4 k_p)`
    rate: f64,
}

impl<'a> PurityKernel<'a> {
    fn new(s: &'a PuritySetting) -> Self {
        let d = &s.model.derived;
        PurityKernel {
            model: &s.model,
            flag: s.kernel,
            rate: d.length / (4.0 * d.k_p),
        }
    }

    /// Spectral sinc phase for the sinc models.
    fn phase(&self, ws: f64, wi: f64) -> f64 {
        let d = &self.model.derived;
        match self.flag {
            KernelFlag::QuadraticOnly => quadratic_phase(ws, wi, d),
            KernelFlag::FullSinc => d.length / 2.0 * spectral_mismatch(ws, wi, d),
        }
    }

    fn eval(&self, s: f64, ws: f64, wi: f64) -> f64 {
        match self.model.kind {
            ModelKind::General => self.model.pump_spectral(ws + wi) * sinc(self.phase(ws, wi) - self.rate * s),
            ModelKind::DoubleSinc => {
                self.model.pump_spectral(ws + wi) * sinc(self.rate * s) * sinc(self.phase(ws, wi))
            }
            ModelKind::FourGaussian => self.model.kernel(s, ws, wi),
        }
    }

    /// Radial decay/oscillation rate of `K` in `s`.
    fn s_rate(&self) -> f64 {
        match self.model.kind {
            ModelKind::FourGaussian => self.model.derived.sigma_q * self.model.derived.sigma_q,
            _ => self.rate,
        }
    }

    /// Kernel depends on `Ω₊` only through a factor that does not involve `s`.
    fn separable_in_sum(&self) -> bool {
        self.model.kind == ModelKind::General
            && self.flag == KernelFlag::QuadraticOnly
            && self.model.spdc_type == SpdcType::TypeI
    }

    fn even_in_difference(&self) -> bool {
        self.model.spdc_type == SpdcType::TypeI
    }
}

/// `Φ · LG_{p}^{ℓ}(q_s) · LG_{p}^{-ℓ}(q_i)`, with the setting's kernel flag.
pub fn phi_lg(qs: &TransversePoint, qi: &TransversePoint, w: &SpectralPoint, s: &PuritySetting) -> Result<Complex64> {
    s.validate()?;
    let d = &s.model.derived;
    check_point(qs, qi, w, d)?;
    let k = PurityKernel::new(s);
    let amp = s.model.scale
        * s.model.pump_spatial(qs.plus(qi).norm_sq())
        * k.eval(qs.minus(qi).norm_sq(), w.omega_s, w.omega_i);
    let ls = lg_mode(qs.norm(), qs.phi(), &s.collection)?;
    let li = lg_mode(qi.norm(), qi.phi(), &s.collection.conjugate())?;
    Ok(ls * li * amp)
}

/// `m = 2|ℓ| + 4p`: degree of `W(s)` as a polynomial in `s`.
fn weight_degree(c: &CollectionSpec) -> f64 {
    (2 * c.ell.unsigned_abs() + 4 * c.p_rad) as f64
}

/// Upper end of `t = β s` where `t^m e^{-t}` has dropped by `e^{-40}`
/// relative to its peak.
fn radial_extent(m: f64) -> f64 {
    if m == 0.0 {
        return 40.0;
    }
    let g = |t: f64| m * libm::log(t / m) - (t - m) + 40.0;
    let (mut lo, mut hi) = (m, m + 40.0);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

struct RadialRule {
    s: Vec<f64>,
    /// Quadrature weight times `W(s)`.
    u: Vec<f64>,
}

/// `W(s) = (π/4) e^{-β s} Σ (h_a h_b / c) poly(y_s) poly(y_i)` on the 2D
/// Hermite nodes of `Q₊`, with `β = w0²/4` and `c = 2 w_p² + w0²/4`.
struct SpatialWeight {
    beta: f64,
    c: f64,
    tq: Vec<f64>,
    th: Vec<f64>,
    collection: CollectionSpec,
}

impl SpatialWeight {
    fn new(setting: &PuritySetting, order: usize) -> Result<Self> {
        let w0 = setting.collection.w0;
        let wp = setting.model.derived.w_p;
        let needed = (2 * setting.collection.ell.unsigned_abs() + 4 * setting.collection.p_rad + 1) as usize;
        let n = order.max(needed);
        if n > MAX_HERMITE_ORDER {
            return Err(Error::Unsupported(format!("transverse order {n} for ell/p too large")));
        }
        let (tq, th) = gauss_hermite(n)?;
        Ok(SpatialWeight {
            beta: w0 * w0 / 4.0,
            c: 2.0 * wp * wp + w0 * w0 / 4.0,
            tq,
            th,
            collection: setting.collection,
        })
    }

    fn eval(&self, s: f64) -> f64 {
        let w0sq = self.collection.w0 * self.collection.w0;
        let rs = libm::sqrt(s);
        let inv = 1.0 / libm::sqrt(self.c);
        let mut terms = Vec::with_capacity(self.tq.len() * self.tq.len());
        for (ta, ha) in self.tq.iter().zip(&self.th) {
            let px = ta * inv;
            for (tb, hb) in self.tq.iter().zip(&self.th) {
                let py = tb * inv;
                let qs2 = 0.25 * ((px + rs) * (px + rs) + py * py);
                let qi2 = 0.25 * ((px - rs) * (px - rs) + py * py);
                let v = lg_intensity_poly(w0sq * qs2 / 2.0, &self.collection)
                    * lg_intensity_poly(w0sq * qi2 / 2.0, &self.collection);
                terms.push(ha * hb * v);
            }
        }
        PI / 4.0 * libm::exp(-self.beta * s) * pairwise_sum(&terms) / self.c
    }
}

fn radial_rule(setting: &PuritySetting, kernel: &PurityKernel, level: u32) -> Result<RadialRule> {
    let weight = SpatialWeight::new(setting, setting.quad.orders[1])?;
    let beta = weight.beta;
    let t_max = radial_extent(weight_degree(&setting.collection));
    let ratio = kernel.s_rate() / beta;
    let width = 2.0 / (1.0 + ratio) * setting.quad.scalings[0];
    let panels = libm::ceil(t_max / width) as usize;
    if panels > 200_000 {
        return Err(Error::Unsupported(format!("{panels} radial panels")));
    }
    let breaks: Vec<f64> = (0..=panels).map(|k| t_max * k as f64 / panels as f64).collect();
    let per_panel = ((setting.quad.orders[0] / 4).max(2)) << level;
    let (t, w) = composite_gauss_legendre(&breaks, per_panel)?;
    let s: Vec<f64> = t.iter().map(|t| t / beta).collect();
    let u = s.iter().zip(&w).map(|(s, w)| w / beta * weight.eval(*s)).collect();
    Ok(RadialRule { s, u })
}

struct SpectralRule {
    ws: Vec<f64>,
    wi: Vec<f64>,
    v: Vec<f64>,
}

/// Amplitude width of the `Ω₊` envelope (the squared kernel falls as
/// `exp(-Ω₊²/σ²)`).
fn sum_width(setting: &PuritySetting) -> f64 {
    let d = &setting.model.derived;
    match setting.model.kind {
        ModelKind::FourGaussian => {
            let f = match setting.model.spdc_type {
                SpdcType::TypeI => d.alpha,
                SpdcType::TypeII => d.beta_t2,
            };
            d.a_tau / libm::sqrt(f)
        }
        _ => d.pump_sum_width(),
    }
}

/// Quadratic coefficient of the spectral phase along `Ω₋`.
fn difference_curvature(d: &crate::params::DerivedParams) -> f64 {
    match d.spdc_type {
        SpdcType::TypeI => d.length / 2.0 * d.gvd_s / 4.0,
        SpdcType::TypeII => {
            let g = libm::sqrt(d.gvd_s) + libm::sqrt(d.gvd_i);
            d.length / 2.0 * g * g / 8.0
        }
    }
}

/// Largest `t = β s` reached by the radial rule, as `s`.
fn s_max(setting: &PuritySetting) -> f64 {
    let w0 = setting.collection.w0;
    radial_extent(weight_degree(&setting.collection)) / (w0 * w0 / 4.0)
}

/// `Ω₋` truncation for the sinc kernels, shared by both engines: the
/// spectral phase exceeds the largest spatial phase by `phase_tail` for
/// every `|Ω₊| ≤ 6σ₊`.
fn difference_bounds(setting: &PuritySetting, kernel: &PurityKernel) -> (f64, f64) {
    let d = &setting.model.derived;
    let cut = setting.phase_tail + kernel.rate * s_max(setting);
    let c2 = difference_curvature(d);
    let plus_max = 6.0 * sum_width(setting);
    let probes: Vec<f64> = if kernel.separable_in_sum() {
        vec![0.0]
    } else {
        (-4..=4).map(|k| plus_max * k as f64 / 4.0).collect()
    };
    let phase = |wp: f64, wm: f64| kernel.phase(0.5 * (wp + wm), 0.5 * (wp - wm));
    let mut hi: f64 = 0.0;
    let mut lo: f64 = 0.0;
    for &wp in &probes {
        for dir in [1.0, -1.0] {
            let mut b = libm::sqrt(cut / c2).max(1e-12);
            while phase(wp, dir * b) < cut {
                b *= 2.0;
            }
            let mut a = 0.0;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if phase(wp, dir * m) < cut {
                    a = m;
                } else {
                    b = m;
                }
            }
            if dir > 0.0 {
                hi = hi.max(b);
            } else {
                lo = lo.min(-b);
            }
        }
    }
    (lo, hi)
}

/// Composite panels along `Ω₋` whose width keeps the phase change per
/// panel near `π/2`.
fn difference_breaks(
    setting: &PuritySetting,
    kernel: &PurityKernel,
    plus_nodes: &[f64],
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let d = &setting.model.derived;
    let c2 = difference_curvature(d);
    let h0 = libm::sqrt(PI / (2.0 * c2)) * setting.quad.scalings[3];
    let slope = |wm: f64| -> f64 {
        let dl = 1e-7 * h0;
        plus_nodes
            .iter()
            .map(|&wp| {
                let f = |x: f64| kernel.phase(0.5 * (wp + x), 0.5 * (wp - x));
                ((f(wm + dl) - f(wm - dl)) / (2.0 * dl)).abs()
            })
            .fold(0.0, f64::max)
    };
    let step = |x: f64, dir: f64| -> f64 {
        let h = h0.min(PI / 2.0 / slope(x).max(1e-300));
        // re-check at the far end of the tentative panel
        h.min(PI / 2.0 / slope(x + dir * h).max(1e-300)).min(h0)
    };
    let mut up = vec![0.0];
    let mut x: f64 = 0.0;
    while x < hi {
        x = (x + step(x, 1.0)).min(hi);
        up.push(x);
        if up.len() > 1_000_000 {
            return Err(Error::Unsupported(String::from("too many spectral panels")));
        }
    }
    let mut breaks = Vec::new();
    if lo < 0.0 {
        let mut down = Vec::new();
        let mut x: f64 = 0.0;
        while x > lo {
            x = (x - step(x, -1.0)).max(lo);
            down.push(x);
            if down.len() > 1_000_000 {
                return Err(Error::Unsupported(String::from("too many spectral panels")));
            }
        }
        down.reverse();
        breaks.extend(down);
    }
    breaks.extend(up);
    Ok(breaks)
}

fn spectral_rule(setting: &PuritySetting, kernel: &PurityKernel, level: u32) -> Result<SpectralRule> {
    let o_plus = (setting.quad.orders[2] << level).min(MAX_HERMITE_ORDER);
    let o_minus = setting.quad.orders[3] << level;
    let sig_plus = sum_width(setting) * setting.quad.scalings[2];
    let (plus, plus_w) = if kernel.separable_in_sum() {
        // ∫ exp(-Ω₊²/σ²) dΩ₊ = σ√π; P does not depend on this axis
        (vec![0.0], vec![sig_plus * libm::sqrt(PI)])
    } else {
        integration_nodes(Rule::GaussHermite, o_plus, sig_plus, 1.0)?
    };
    let (minus, minus_w) = match setting.model.kind {
        ModelKind::FourGaussian => {
            let b = setting.model.derived.b_tau * setting.quad.scalings[3];
            integration_nodes(Rule::GaussHermite, o_minus.min(MAX_HERMITE_ORDER), b, 1.0)?
        }
        _ => {
            let (lo, hi) = difference_bounds(setting, kernel);
            let even = kernel.even_in_difference();
            let lo = if even { 0.0 } else { lo };
            let breaks = difference_breaks(setting, kernel, &plus, lo, hi)?;
            let (x, mut w) = composite_gauss_legendre(&breaks, (o_minus / 2).max(2))?;
            if even {
                w.iter_mut().for_each(|w| *w *= 2.0);
            }
            (x, w)
        }
    };
    let mut r = SpectralRule {
        ws: Vec::with_capacity(plus.len() * minus.len()),
        wi: Vec::with_capacity(plus.len() * minus.len()),
        v: Vec::with_capacity(plus.len() * minus.len()),
    };
    for (p, pw) in plus.iter().zip(&plus_w) {
        for (m, mw) in minus.iter().zip(&minus_w) {
            r.ws.push(0.5 * (p + m));
            r.wi.push(0.5 * (p - m));
            // dΩ_s dΩ_i = ½ dΩ₊ dΩ₋
            r.v.push(0.5 * pw * mw);
        }
    }
    Ok(r)
}

/// Deterministic blocked dot product.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 256;
    let mut partial = Vec::with_capacity(a.len() / BLOCK + 1);
    for (ca, cb) in a.chunks(BLOCK).zip(b.chunks(BLOCK)) {
        let mut acc = [0.0f64; 4];
        let mut ia = ca.chunks_exact(4);
        let mut ib = cb.chunks_exact(4);
        for (x, y) in (&mut ia).zip(&mut ib) {
            acc[0] += x[0] * y[0];
            acc[1] += x[1] * y[1];
            acc[2] += x[2] * y[2];
            acc[3] += x[3] * y[3];
        }
        let mut tail = 0.0;
        for (x, y) in ia.remainder().iter().zip(ib.remainder()) {
            tail += x * y;
        }
        partial.push((acc[0] + acc[1]) + (acc[2] + acc[3]) + tail);
    }
    pairwise_sum(&partial)
}

/// `(Tr G, Tr G², dim)` for the Gram of the rows of `mat` (`n` rows of
/// length `len`, row-major).
fn gram_traces(mat: &[f64], n: usize, len: usize) -> (f64, f64, usize) {
    let rows: Vec<&[f64]> = (0..n).map(|k| &mat[k * len..(k + 1) * len]).collect();
    let mut diag = Vec::with_capacity(n);
    let mut sq = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        let g = dot(rows[a], rows[a]);
        diag.push(g);
        sq.push(g * g);
        for b in (a + 1)..n {
            let g = dot(rows[a], rows[b]);
            sq.push(2.0 * g * g);
        }
    }
    (pairwise_sum(&diag), pairwise_sum(&sq), n)
}

struct Level {
    purity: f64,
    trace: f64,
    dim: usize,
    radial: usize,
    spectral: usize,
}

fn gauss_level(setting: &PuritySetting, level: u32) -> Result<Level> {
    let kernel = PurityKernel::new(setting);
    let radial = radial_rule(setting, &kernel, level)?;
    let spectral = spectral_rule(setting, &kernel, level)?;
    let (nr, nj) = (radial.s.len(), spectral.v.len());
    let ru: Vec<f64> = radial.u.iter().map(|u| libm::sqrt(u.max(0.0))).collect();
    let rv: Vec<f64> = spectral.v.iter().map(|v| libm::sqrt(v.max(0.0))).collect();
    // rows along the smaller dimension so the Gram is the small one
    let (tr, tr2, dim) = if nr <= nj {
        let mut mat = Vec::with_capacity(nr * nj);
        for r in 0..nr {
            for j in 0..nj {
                mat.push(ru[r] * rv[j] * kernel.eval(radial.s[r], spectral.ws[j], spectral.wi[j]));
            }
        }
        gram_traces(&mat, nr, nj)
    } else {
        let mut mat = Vec::with_capacity(nr * nj);
        for j in 0..nj {
            for r in 0..nr {
                mat.push(ru[r] * rv[j] * kernel.eval(radial.s[r], spectral.ws[j], spectral.wi[j]));
            }
        }
        gram_traces(&mat, nj, nr)
    };
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::Convergence(format!("Gram trace {tr}")));
    }
    Ok(Level {
        purity: tr2 / (tr * tr),
        trace: tr,
        dim,
        radial: nr,
        spectral: nj,
    })
}

/// Trapezoid oracle: Cartesian grids in `Q₋` (2D), `Q₊` (2D), `Ω₊`, `Ω₋`.
/// Spatial points with equal `|Q₋|²` share all kernel values and are
/// merged before the Gram is formed.
fn trapezoid_level(setting: &PuritySetting, level: u32) -> Result<Level> {
    let kernel = PurityKernel::new(setting);
    let d = &setting.model.derived;
    let c = &setting.collection;
    let w0 = c.w0;
    let refine = |n: usize| ((n - 1) << level) + 1;
    let (nm, np, nsp, nsm) = (
        refine(setting.quad.orders[0]) | 1,
        refine(setting.quad.orders[1]) | 1,
        refine(setting.quad.orders[2]),
        refine(setting.quad.orders[3]),
    );
    let r = setting.quad.truncation_radius;
    let m = weight_degree(c);
    let cq = 2.0 * d.w_p * d.w_p + w0 * w0 / 4.0;
    let plus_half = (r + libm::sqrt(m)) / libm::sqrt(cq) * setting.quad.scalings[1];
    let minus_half = 1.05 * libm::sqrt(s_max(setting)) * setting.quad.scalings[0];
    let hp = 2.0 * plus_half / (np - 1) as f64;
    let hm = 2.0 * minus_half / (nm - 1) as f64;
    let half_m = (nm - 1) / 2;
    let half_p = (np - 1) / 2;
    let conj = c.conjugate();
    // merged spatial weight per integer key i² + j²
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for i in 0..nm {
        for j in 0..nm {
            let (ii, jj) = (i as i64 - half_m as i64, j as i64 - half_m as i64);
            let qm = TransversePoint::new(ii as f64 * hm, jj as f64 * hm);
            let mut acc = Vec::with_capacity(np * np);
            for a in 0..np {
                for b in 0..np {
                    let qp = TransversePoint::new(
                        (a as f64 - half_p as f64) * hp,
                        (b as f64 - half_p as f64) * hp,
                    );
                    let qs = TransversePoint::new(0.5 * (qp.qx + qm.qx), 0.5 * (qp.qy + qm.qy));
                    let qi = TransversePoint::new(0.5 * (qp.qx - qm.qx), 0.5 * (qp.qy - qm.qy));
                    let ls = lg_mode(qs.norm(), qs.phi(), c)?;
                    let li = lg_mode(qi.norm(), qi.phi(), &conj)?;
                    let pump = setting.model.pump_spatial(qp.norm_sq());
                    acc.push((ls * li).norm_sqr() * pump * pump);
                }
            }
            // d²q_s d²q_i = ¼ d²Q₊ d²Q₋
            let w = 0.25 * hp * hp * hm * hm * pairwise_sum(&acc);
            groups.entry((ii * ii + jj * jj) as u64).or_default().push(w);
        }
    }
    let radial: Vec<(f64, f64)> = groups
        .into_iter()
        .map(|(key, ws)| (key as f64 * hm * hm, pairwise_sum(&ws)))
        .collect();

    let sig_plus = sum_width(setting) * setting.quad.scalings[2];
    let (plus, plus_w) = integration_nodes(Rule::Trapezoid, nsp, sig_plus, r)?;
    let (lo, hi) = match setting.model.kind {
        ModelKind::FourGaussian => {
            let b = d.b_tau * r;
            (-b, b)
        }
        _ => difference_bounds(setting, &kernel),
    };
    let hs = (hi - lo) / (nsm - 1) as f64;
    let mut spectral = Vec::with_capacity(nsp * nsm);
    for (p, pw) in plus.iter().zip(&plus_w) {
        for k in 0..nsm {
            let mw = if k == 0 || k == nsm - 1 { 0.5 * hs } else { hs };
            let mm = lo + hs * k as f64;
            spectral.push((0.5 * (p + mm), 0.5 * (p - mm), 0.5 * pw * mw));
        }
    }
    let nr = radial.len();
    let nj = spectral.len();
    let mut mat = Vec::with_capacity(nr * nj);
    for &(s, u) in &radial {
        let su = libm::sqrt(u);
        for &(ws, wi, v) in &spectral {
            mat.push(su * libm::sqrt(v) * kernel.eval(s, ws, wi));
        }
    }
    let (tr, tr2, dim) = gram_traces(&mat, nr, nj);
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::Convergence(format!("Gram trace {tr}")));
    }
    Ok(Level {
        purity: tr2 / (tr * tr),
        trace: tr,
        dim,
        radial: nr,
        spectral: nj,
    })
}

/// Spatial purity `Tr(ρ_q²)`.
///
/// Node density doubles until `|ΔP| ≤ quad.tolerance` or
/// `quad.max_refinements` (at least one) is used up; a non-converged result
/// has `converged == false`.
pub fn purity(setting: &PuritySetting) -> Result<PurityResult> {
    setting.validate()?;
    let eval = |level: u32| match setting.quad.rule {
        Rule::Trapezoid => trapezoid_level(setting, level),
        _ => gauss_level(setting, level),
    };
    let mut prev = eval(0)?;
    let mut deltas = Vec::new();
    let mut converged = false;
    let mut cur;
    let mut level = 0;
    loop {
        level += 1;
        cur = eval(level)?;
        let delta = (cur.purity - prev.purity).abs();
        deltas.push(delta);
        if delta <= setting.quad.tolerance {
            converged = true;
        }
        if converged || level as usize >= setting.quad.max_refinements.max(1) {
            break;
        }
        prev = cur;
    }
    Ok(PurityResult {
        purity: cur.purity,
        trace_check: cur.trace / prev.trace,
        gram_dimension: cur.dim,
        deltas,
        converged,
        radial_nodes: cur.radial,
        spectral_nodes: cur.spectral,
        radial_extension: setting.radial_extension(),
        setting: setting.clone(),
    })
}

/// Spectral Gram on the base-level nodes of the Gauss engine.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGram {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    /// `J × J`, row-major, quadrature weights folded in symmetrically.
    pub matrix: Vec<f64>,
}

impl SpectralGram {
    pub fn dim(&self) -> usize {
        self.omega_s.len()
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.matrix[j * self.dim() + k]
    }

    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let tr = pairwise_sum(&(0..n).map(|j| self.at(j, j)).collect::<Vec<_>>());
        let sq: Vec<f64> = self.matrix.iter().map(|m| m * m).collect();
        pairwise_sum(&sq) / (tr * tr)
    }
}

/// `M[j, k] = √(v_j v_k) ∫ ds W(s) K(s, Ω_j) K(s, Ω_k)`, each entry summed
/// independently in a fixed order.
pub fn spectral_gram(setting: &PuritySetting) -> Result<SpectralGram> {
    setting.validate()?;
    let kernel = PurityKernel::new(setting);
    let radial = radial_rule(setting, &kernel, 0)?;
    let spectral = spectral_rule(setting, &kernel, 0)?;
    let nj = spectral.v.len();
    let rows: Vec<Vec<f64>> = (0..nj)
        .map(|j| {
            let sv = libm::sqrt(spectral.v[j]);
            radial
                .s
                .iter()
                .zip(&radial.u)
                .map(|(s, u)| sv * libm::sqrt(*u) * kernel.eval(*s, spectral.ws[j], spectral.wi[j]))
                .collect()
        })
        .collect();
    let mut matrix = Vec::with_capacity(nj * nj);
    for a in &rows {
        for b in &rows {
            matrix.push(dot(a, b));
        }
    }
    Ok(SpectralGram {
        omega_s: spectral.ws,
        omega_i: spectral.wi,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    /// Collection waist over pump waist.
    WsOverWp,
    Ell,
    /// Crystal length, µm.
    Length,
    /// Pulse duration, fs.
    Tau,
    /// Pump waist, µm; the collection waist is kept.
    Wp,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::WsOverWp => "ws_over_wp",
            SweepAxis::Ell => "ell",
            SweepAxis::Length => "L",
            SweepAxis::Tau => "tau",
            SweepAxis::Wp => "w_p",
        }
    }
}

/// Setting with one parameter replaced. Derived constants are recomputed;
/// the pulse regime of `base` is kept.
pub fn apply_axis(base: &PuritySetting, axis: SweepAxis, value: f64) -> Result<PuritySetting> {
    let m = &base.model;
    let mut pump = m.pump;
    let mut crystal = m.crystal;
    let mut collection = base.collection;
    match axis {
        SweepAxis::WsOverWp => collection.w0 = value * pump.w_p,
        SweepAxis::Ell => {
            if libm::trunc(value) != value || value.abs() > 1000.0 {
                return Err(Error::validation("sweep.values", format!("ell {value} is not an integer")));
            }
            collection.ell = value as i32;
        }
        SweepAxis::Length => crystal.length = value,
        SweepAxis::Tau => pump.tau = value,
        SweepAxis::Wp => pump.w_p = value,
    }
    let regime: Option<PulseRegime> = if axis == SweepAxis::Tau || axis == SweepAxis::Length {
        None
    } else {
        Some(m.derived.regime)
    };
    let model = BiphotonModel::new(m.kind, pump, crystal, regime)?.with_scale(m.scale);
    collection.validate()?;
    Ok(PuritySetting {
        model,
        collection,
        ..base.clone()
    })
}

/// One result per value, in input order; failures stay in their rows.
pub fn purity_sweep(base: &PuritySetting, axis: SweepAxis, values: &[f64]) -> Vec<Result<PurityResult>> {
    values
        .iter()
        .map(|&v| apply_axis(base, axis, v).and_then(|s| purity(&s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CrystalSpec, PumpSpec};

    fn setting(kind: ModelKind, length_mm: f64, tau: f64, ell: i32, ratio: f64) -> PuritySetting {
        let model = BiphotonModel::new(
            kind,
            PumpSpec::new(0.4, 28.0, tau).unwrap(),
            CrystalSpec::liio3_geometry(length_mm, 1.9).unwrap(),
            None,
        )
        .unwrap();
        PuritySetting::new(model, CollectionSpec::new(ell, 0, ratio * 28.0).unwrap()).unwrap()
    }

    #[test]
    fn radial_extent_solves_tail_equation() {
        assert_eq!(radial_extent(0.0), 40.0);
        for m in [2.0, 8.0, 24.0] {
            let t = radial_extent(m);
            assert!(t > m);
            assert!((m * (t / m).ln() - (t - m) + 40.0).abs() < 1e-9);
        }
    }

    #[test]
    fn spatial_weight_matches_direct_quadrature() {
        // W(s) against a brute-force 2D Legendre integral over Q₊
        let s = setting(ModelKind::General, 0.5, 50.0, 2, 0.7);
        let w = SpatialWeight::new(&s, 16).unwrap();
        let c = s.collection;
        let wp = s.model.derived.w_p;
        let half = 8.0 / w.c.sqrt();
        let (x, xw) = crate::numerics::nodes_weights(Rule::GaussLegendre, 120, half).unwrap();
        for &sv in &[0.0, 1e-3, 5e-3, 2e-2] {
            let rs = f64::sqrt(sv);
            let mut acc = 0.0;
            for (px, wx) in x.iter().zip(&xw) {
                for (py, wy) in x.iter().zip(&xw) {
                    let qs = TransversePoint::new(0.5 * (px + rs), 0.5 * py);
                    let qi = TransversePoint::new(0.5 * (px - rs), 0.5 * py);
                    let ls = lg_mode(qs.norm(), qs.phi(), &c).unwrap().norm_sqr();
                    let li = lg_mode(qi.norm(), qi.phi(), &c.conjugate()).unwrap().norm_sqr();
                    acc += wx * wy * (-2.0 * wp * wp * (px * px + py * py)).exp() * ls * li;
                }
            }
            let direct = PI / 4.0 * acc;
            let fast = w.eval(sv);
            assert!((direct - fast).abs() <= 1e-10 * direct.abs().max(1e-300), "{sv} {direct} {fast}");
        }
    }

    #[test]
    fn four_gaussian_is_pure() {
        for (l, ell, ratio, tau) in [(0.5, 0, 0.2, 50.0), (5.0, 4, 1.0, 5.0e4), (0.5, 6, 10.0, 5.0e4)] {
            let r = purity(&setting(ModelKind::FourGaussian, l, tau, ell, ratio)).unwrap();
            assert!((r.purity - 1.0).abs() < 1e-9, "{l} {ell} {ratio}: {}", r.purity);
            assert!(r.converged);
        }
    }

    #[test]
    fn double_sinc_is_pure() {
        let r = purity(&setting(ModelKind::DoubleSinc, 0.5, 50.0, 1, 0.5).with_kernel(KernelFlag::FullSinc)).unwrap();
        assert!((r.purity - 1.0).abs() < 1e-9, "{}", r.purity);
    }

    #[test]
    fn general_purity_in_range() {
        let r = purity(&setting(ModelKind::General, 0.5, 5.0e4, 4, 0.5)).unwrap();
        assert!(r.purity > 0.0 && r.purity <= 1.0 + 1e-6, "{}", r.purity);
        assert!((r.trace_check - 1.0).abs() < 1e-4, "{}", r.trace_check);
    }

    #[test]
    fn gram_is_symmetric_and_consistent() {
        let s = setting(ModelKind::General, 0.5, 5.0e4, 2, 0.5).with_phase_tail(30.0);
        let g = spectral_gram(&s).unwrap();
        let n = g.dim();
        let norm = g.matrix.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..n {
            assert!(g.at(j, j) > 0.0);
            for k in 0..n {
                assert!((g.at(j, k) - g.at(k, j)).abs() <= 1e-10 * norm);
            }
        }
        let direct = gauss_level(&s, 0).unwrap().purity;
        assert!((g.purity() - direct).abs() < 1e-10);
    }

    #[test]
    fn phi_lg_rotation_and_sign() {
        let s = setting(ModelKind::General, 0.5, 50.0, 3, 1.0);
        let qs = TransversePoint::new(0.02, 0.01);
        let qi = TransversePoint::new(-0.015, 0.004);
        let w = SpectralPoint::new(0.01, -0.004);
        let base = phi_lg(&qs, &qi, &w, &s).unwrap();
        for th in [0.3, 1.7, -2.2] {
            let r = phi_lg(&qs.rotated(th), &qi.rotated(th), &w, &s).unwrap();
            assert!((r - base).norm() < 1e-12 * base.norm());
        }
        let mut flipped = s.clone();
        flipped.collection.ell = -3;
        let f = phi_lg(&qs, &qi, &w, &flipped).unwrap();
        assert!((f.norm() - base.norm()).abs() < 1e-12 * base.norm());
        // ℓ = 0: plain amplitude times two Gaussian envelopes
        let z = setting(ModelKind::General, 0.5, 50.0, 0, 1.0);
        let v = phi_lg(&qs, &qi, &w, &z).unwrap();
        let amp = z.model.amplitude(&qs, &qi, &w).unwrap().re;
        let lg = |q: &TransversePoint| crate::modes::lg_radial(q.norm(), &z.collection);
        let quad = z.model.pump_spatial(qs.plus(&qi).norm_sq())
            * simplified_kernel(&qs, &qi, &w, &z.model.derived).unwrap()
            * z.model.pump_spectral(w.sum());
        assert!((v.re - quad * lg(&qs) * lg(&qi)).abs() < 1e-14 * v.norm());
        assert!(v.im.abs() < 1e-15 * v.norm().max(1e-300));
        assert!(amp.is_finite());
    }

    #[test]
    fn simplified_kernel_properties() {
        let s = setting(ModelKind::General, 5.0, 50.0, 1, 1.0);
        let d = &s.model.derived;
        let qs = TransversePoint::new(0.03, 0.0);
        let qi = TransversePoint::new(-0.01, 0.02);
        let w0 = SpectralPoint::default();
        let spatial_only = sinc(-d.length / 2.0 * qs.minus(&qi).norm_sq() / (2.0 * d.k_p));
        assert_eq!(simplified_kernel(&qs, &qi, &w0, d).unwrap(), spatial_only);
        let w = SpectralPoint::new(0.02, -0.01);
        let a = simplified_kernel(&qs, &qi, &w, d).unwrap();
        let b = simplified_kernel(&qi, &qs, &w.swapped(), d).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_invariance() {
        let s = setting(ModelKind::General, 0.5, 5.0e4, 1, 0.5);
        let mut t = s.clone();
        t.model = t.model.with_scale(123.0);
        let a = gauss_level(&s, 0).unwrap().purity;
        let b = gauss_level(&t, 0).unwrap().purity;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_match_direct_calls() {
        let base = setting(ModelKind::FourGaussian, 0.5, 50.0, 1, 1.0);
        let rows = purity_sweep(&base, SweepAxis::Ell, &[2.0, 0.5]);
        assert_eq!(rows.len(), 2);
        let direct = purity(&apply_axis(&base, SweepAxis::Ell, 2.0).unwrap()).unwrap();
        assert_eq!(rows[0].as_ref().unwrap().purity, direct.purity);
        assert!(rows[1].is_err());
    }

    #[test]
    fn radial_extension_flag() {
        let mut s = setting(ModelKind::FourGaussian, 0.5, 50.0, 1, 1.0);
        assert!(!s.radial_extension());
        s.collection.p_rad = 1;
        let r = purity(&s).unwrap();
        assert!(r.radial_extension);
        assert!((r.purity - 1.0).abs() < 1e-9);
    }
}
