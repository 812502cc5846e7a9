//! Quadrature rules and tensor-product integration.
//!
//! Gauss rules are generated by Newton iteration on the three-term
//! recurrences. Results never depend on evaluation order: every reduction
//! goes through [`pairwise_sum`] in a fixed order.

use alloc::collections::BTreeMap;
use alloc::collections::btree_map::Entry;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest Gauss–Hermite order for which the Newton root search is
/// verified (every order up to here is covered by a test).
pub const MAX_HERMITE_ORDER: usize = 150;
pub const MAX_LEGENDRE_ORDER: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Weight `e^{-x²}` on the real line.
    GaussHermite,
    /// Weight 1 on `[-1, 1]`.
    GaussLegendre,
    /// Equally spaced closed rule on a truncated box.
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub orders: Vec<usize>,
    /// Per-axis scale: Gaussian width for Hermite, half-interval for
    /// Legendre, box unit for Trapezoid.
    pub scalings: Vec<f64>,
    pub tolerance: f64,
    pub max_refinements: usize,
    /// Trapezoid boxes extend to `± truncation_radius * scaling`.
    pub truncation_radius: f64,
}

impl QuadratureSpec {
    pub fn new(rule: Rule, orders: Vec<usize>, scalings: Vec<f64>) -> Self {
        QuadratureSpec {
            rule,
            orders,
            scalings,
            tolerance: 1e-8,
            max_refinements: 3,
            truncation_radius: 5.0,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_refinements(mut self, n: usize) -> Self {
        self.max_refinements = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::validation("quadrature.orders", "at least one axis required"));
        }
        if self.orders.len() != self.scalings.len() {
            return Err(Error::validation(
                "quadrature.scalings",
                format!("{} scalings for {} axes", self.scalings.len(), self.orders.len()),
            ));
        }
        if let Some(o) = self.orders.iter().find(|&&o| o < 2) {
            return Err(Error::validation("quadrature.orders", format!("order {o} < 2")));
        }
        if self.scalings.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation("quadrature.scalings", "scalings must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("quadrature.tolerance", "tolerance must be positive"));
        }
        if !(self.truncation_radius > 0.0) {
            return Err(Error::validation(
                "quadrature.truncation_radius",
                "truncation radius must be positive",
            ));
        }
        Ok(())
    }
}

/// Sum in a fixed binary-tree order. Error grows as `O(log n)` rather than
/// `O(n)` and the result is independent of how the slice was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_LEGENDRE_ORDER).contains(&n) {
        return Err(Error::Unsupported(format!("Gauss-Legendre order {n}")));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Gauss–Hermite nodes and natural-log weights for weight `e^{-x²}`,
/// nodes ascending. Log weights avoid underflow at high order.
fn gauss_hermite_log(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_HERMITE_ORDER).contains(&n) {
        return Err(Error::Unsupported(format!("Gauss-Hermite order {n}")));
    }
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z_desc = vec![0.0; m];
    let mut lw = vec![0.0; m];
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => libm::sqrt(2.0 * nf + 1.0) - 1.855_75 * libm::pow(2.0 * nf + 1.0, -1.0 / 6.0),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * z_desc[0],
            3 => 1.91 * z - 0.91 * z_desc[1],
            _ => 2.0 * z - z_desc[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * libm::sqrt(2.0 / (jf + 1.0)) * p2 - libm::sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = libm::sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        z_desc[i] = z;
        lw[i] = libm::log(2.0) - 2.0 * libm::log(pp.abs());
    }
    let mut x = vec![0.0; n];
    let mut l = vec![0.0; n];
    for i in 0..m {
        x[i] = -z_desc[i];
        x[n - 1 - i] = z_desc[i];
        l[i] = lw[i];
        l[n - 1 - i] = lw[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, l))
}

/// Gauss–Hermite nodes and weights for weight `e^{-x²}`, nodes ascending.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, lw) = gauss_hermite_log(n)?;
    Ok((x, lw.into_iter().map(libm::exp).collect()))
}

/// Classical rule scaled by `scaling`.
///
/// * Hermite: integrates `∫ f(x) e^{-(x/s)²} dx`.
/// * Legendre: integrates `∫_{-s}^{s} f(x) dx`.
/// * Trapezoid: integrates `∫_{-s}^{s} f(x) dx` with `order` equally spaced
///   points including both ends.
pub fn nodes_weights(rule: Rule, order: usize, scaling: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 2 {
        return Err(Error::Unsupported(format!("{rule:?} order {order} (need >= 2)")));
    }
    let (t, w) = match rule {
        Rule::GaussHermite => gauss_hermite(order)?,
        Rule::GaussLegendre => gauss_legendre(order)?,
        Rule::Trapezoid => trapezoid(order),
    };
    Ok((
        t.into_iter().map(|t| t * scaling).collect(),
        w.into_iter().map(|w| w * scaling).collect(),
    ))
}

fn trapezoid(order: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 / (order - 1) as f64;
    let x = (0..order).map(|i| -1.0 + h * i as f64).collect();
    let w = (0..order)
        .map(|i| if i == 0 || i == order - 1 { 0.5 * h } else { h })
        .collect();
    (x, w)
}

/// Nodes and weights for the unweighted integral `∫ f(x) dx` along one axis.
///
/// Hermite weights are multiplied by `e^{t²}` so that the rule is exact for
/// Gaussians of width `scaling` times polynomials; the Trapezoid box is
/// `± radius * scaling`.
pub fn integration_nodes(
    rule: Rule,
    order: usize,
    scaling: f64,
    radius: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 2 {
        return Err(Error::Unsupported(format!("{rule:?} order {order} (need >= 2)")));
    }
    match rule {
        Rule::GaussHermite => {
            let (t, lw) = gauss_hermite_log(order)?;
            let w = t
                .iter()
                .zip(&lw)
                .map(|(t, lw)| scaling * libm::exp(lw + t * t))
                .collect();
            Ok((t.into_iter().map(|t| t * scaling).collect(), w))
        }
        Rule::GaussLegendre => nodes_weights(rule, order, scaling),
        Rule::Trapezoid => nodes_weights(rule, order, scaling * radius),
    }
}

/// Composite Gauss–Legendre over consecutive panels `[breaks[k], breaks[k+1]]`.
pub fn composite_gauss_legendre(breaks: &[f64], per_panel: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, w) = gauss_legendre(per_panel)?;
    let panels = breaks.len().saturating_sub(1);
    let mut xs = Vec::with_capacity(panels * per_panel);
    let mut ws = Vec::with_capacity(panels * per_panel);
    for p in breaks.windows(2) {
        let half = 0.5 * (p[1] - p[0]);
        let mid = 0.5 * (p[1] + p[0]);
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(mid + half * ti);
            ws.push(half * wi);
        }
    }
    Ok((xs, ws))
}

/// Caches classical rules for one computation.
#[derive(Debug, Default)]
pub struct RuleCache {
    rules: BTreeMap<(Rule, usize), (Vec<f64>, Vec<f64>)>,
}

impl RuleCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unscaled classical rule (Hermite weights are the `e^{-x²}` weights).
    pub fn get(&mut self, rule: Rule, order: usize) -> Result<&(Vec<f64>, Vec<f64>)> {
        Ok(match self.rules.entry((rule, order)) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(nodes_weights(rule, order, 1.0)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationReport {
    pub value: f64,
    /// Relative change between the last two refinement levels.
    pub last_delta: f64,
    pub converged: bool,
    /// Number of evaluations of the tensor-product rule.
    pub levels: usize,
    pub final_orders: Vec<usize>,
}

fn tensor_sum(
    f: &dyn Fn(&[f64]) -> f64,
    axes: &[(Vec<f64>, Vec<f64>)],
    point: &mut Vec<f64>,
) -> f64 {
    let k = point.len();
    let (x, w) = &axes[k];
    let mut terms = Vec::with_capacity(x.len());
    for (xi, wi) in x.iter().zip(w) {
        point.push(*xi);
        let v = if k + 1 == axes.len() {
            f(point)
        } else {
            tensor_sum(f, axes, point)
        };
        point.pop();
        terms.push(wi * v);
    }
    pairwise_sum(&terms)
}

/// Tensor-product quadrature of `∫ f(x) dⁿx` (real line for Hermite, boxes
/// otherwise). Orders double until the relative change is within
/// `spec.tolerance` or `spec.max_refinements` is exhausted; a non-converged
/// result is still returned with `converged == false`.
pub fn integrate_nd(f: &dyn Fn(&[f64]) -> f64, spec: &QuadratureSpec) -> Result<IntegrationReport> {
    spec.validate()?;
    let mut orders = spec.orders.clone();
    let eval = |orders: &[usize]| -> Result<f64> {
        let axes = orders
            .iter()
            .zip(&spec.scalings)
            .map(|(&o, &s)| integration_nodes(spec.rule, o, s, spec.truncation_radius))
            .collect::<Result<Vec<_>>>()?;
        let mut point = Vec::with_capacity(axes.len());
        Ok(tensor_sum(f, &axes, &mut point))
    };
    let mut value = eval(&orders)?;
    let mut last_delta = f64::INFINITY;
    let mut levels = 1;
    let mut converged = false;
    for _ in 0..spec.max_refinements {
        let next: Vec<usize> = orders
            .iter()
            .map(|&o| match spec.rule {
                // keep the trapezoid grid nested: 2(n-1)+1 points
                Rule::Trapezoid => 2 * o - 1,
                _ => 2 * o,
            })
            .collect();
        let refined = match eval(&next) {
            Ok(v) => v,
            Err(Error::Unsupported(_)) => break,
            Err(e) => return Err(e),
        };
        levels += 1;
        last_delta = (refined - value).abs() / refined.abs().max(f64::MIN_POSITIVE);
        value = refined;
        orders = next;
        if last_delta <= spec.tolerance {
            converged = true;
            break;
        }
    }
    Ok(IntegrationReport {
        value,
        last_delta,
        converged,
        levels,
        final_orders: orders,
    })
}
