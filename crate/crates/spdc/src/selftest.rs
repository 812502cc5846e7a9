//! Quick invariant suite behind `spdc selftest`.

use std::f64::consts::PI;

use spdc_core::biphoton::{normalization_closed_form, normalize};
use spdc_core::modes::lg_mode;
use spdc_core::numerics::{composite_gauss_legendre, gauss_hermite};
use spdc_core::phase_matching::{pmf, sinc, PmfKind};
use spdc_core::purity::{purity, spectral_gram, trapezoid_quadrature, PuritySetting};
use spdc_core::{BiphotonModel, CollectionSpec, CrystalSpec, ModelKind, PumpSpec, SpectralPoint, TransversePoint};

use crate::CliError;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn liio3(kind: ModelKind, length_mm: f64, tau: f64) -> BiphotonModel {
    BiphotonModel::new(
        kind,
        PumpSpec::new(0.4, 28.0, tau).expect("valid pump"),
        CrystalSpec::liio3_geometry(length_mm, 1.9).expect("valid crystal"),
        None,
    )
    .expect("valid model")
}

/// `⟨a|b⟩` on a polar grid; exact in the angle for `|Δℓ| < 24`.
fn lg_overlap(a: &CollectionSpec, b: &CollectionSpec) -> (f64, f64) {
    let q_end = 16.0 / a.w0;
    let breaks: Vec<f64> = (0..=64).map(|i| q_end * i as f64 / 64.0).collect();
    let (q, wq) = composite_gauss_legendre(&breaks, 10).expect("valid rule");
    let nphi = 24;
    let (mut re, mut im) = (0.0, 0.0);
    for (qi, wi) in q.iter().zip(&wq) {
        for k in 0..nphi {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            let v = lg_mode(*qi, phi, a).expect("valid").conj() * lg_mode(*qi, phi, b).expect("valid");
            let w = wi * qi * 2.0 * PI / nphi as f64;
            re += v.re * w;
            im += v.im * w;
        }
    }
    (re, im)
}

/// Largest deviation of `⟨ℓp|ℓ'p'⟩` from `δδ` over `|ℓ|, p ≤ max_index`.
pub fn lg_orthonormality_error(max_index: i32) -> f64 {
    let modes: Vec<CollectionSpec> = (-max_index..=max_index)
        .flat_map(|l| (0..=max_index as u32).map(move |p| CollectionSpec::new(l, p, 10.0).expect("valid")))
        .collect();
    let mut worst: f64 = 0.0;
    for (j, a) in modes.iter().enumerate() {
        for (k, b) in modes.iter().enumerate().skip(j) {
            let (re, im) = lg_overlap(a, b);
            let e = if j == k { 1.0 } else { 0.0 };
            worst = worst.max(((re - e).powi(2) + im * im).sqrt());
        }
    }
    worst
}

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();

    let (x, w) = gauss_hermite(4).expect("order 4");
    let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
    let exact = 3.0 * PI.sqrt() / 4.0;
    out.push(check(
        "hermite_x4_exact",
        (m4 - exact).abs() <= 1e-14,
        format!("err={:.2e}", (m4 - exact).abs()),
    ));

    let worst = lg_orthonormality_error(4);
    out.push(check("lg_orthonormality", worst <= 1e-6, format!("max err={worst:.2e}")));

    let d = liio3(ModelKind::General, 0.5, 50.0).derived;
    let lhs = 1.0 / (16.0 * d.sigma_x * d.sigma_x);
    let rhs = 3.0 * d.k_p / (8.0 * d.length);
    out.push(check(
        "sigma_x_identity",
        (lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs,
        format!("rel={:.2e}", (lhs - rhs).abs() / rhs),
    ));

    let xs: f64 = 7e-4;
    let series = 1.0 - xs * xs / 6.0 + xs.powi(4) / 120.0;
    out.push(check(
        "sinc_near_zero",
        (sinc(xs) - series).abs() <= 1e-12,
        format!("err={:.2e}", (sinc(xs) - series).abs()),
    ));

    let d5 = liio3(ModelKind::General, 5.0, 50.0).derived;
    let qs = TransversePoint::new(0.03, -0.01);
    let qi = TransversePoint::new(-0.02, 0.015);
    let sp = SpectralPoint::new(0.004, -0.007);
    let mut rot: f64 = 0.0;
    let mut exch: f64 = 0.0;
    for kind in [PmfKind::GeneralSinc, PmfKind::DoubleSinc, PmfKind::GaussianSubstitute] {
        let v = pmf(kind, &qs, &qi, &sp, &d5).expect("in guards");
        for k in 0..8 {
            let th = 0.7 * k as f64 - 2.5;
            let r = pmf(kind, &qs.rotated(th), &qi.rotated(th), &sp, &d5).expect("in guards");
            rot = rot.max((r - v).abs());
        }
        let e = pmf(kind, &qi, &qs, &sp.swapped(), &d5).expect("in guards");
        exch = exch.max((e - v).abs());
    }
    out.push(check("pmf_rotation_invariance", rot <= 1e-12, format!("max diff={rot:.2e}")));
    out.push(check("pmf_exchange_symmetry", exch <= 1e-12, format!("max diff={exch:.2e}")));

    let g4 = liio3(ModelKind::FourGaussian, 0.5, 50.0);
    let n_quad = normalize(&g4, &g4.normalization_spec(12));
    let n_closed = normalization_closed_form(&g4);
    let ok = matches!((&n_quad, &n_closed), (Ok(a), Ok(b)) if (a - b).abs() <= 1e-6 * b);
    out.push(check(
        "four_gaussian_normalization",
        ok,
        format!("quadrature={n_quad:?} closed={n_closed:?}"),
    ));

    let coll = CollectionSpec::new(4, 0, 28.0).expect("valid");
    let sep = PuritySetting::new(g4, coll).and_then(|s| purity(&s));
    out.push(match sep {
        Ok(r) => check(
            "separable_purity_one",
            (r.purity - 1.0).abs() <= 1e-3,
            format!("P={:.9}", r.purity),
        ),
        Err(e) => check("separable_purity_one", false, e.to_string()),
    });

    let general = PuritySetting::new(liio3(ModelKind::General, 0.5, 5.0e4), coll)
        .expect("valid")
        .with_phase_tail(20.0);
    out.push(match spectral_gram(&general) {
        Ok(g) => {
            let n = g.dim();
            let norm = g.matrix.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut asym: f64 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    asym = asym.max((g.at(j, k) - g.at(k, j)).abs());
                }
            }
            check(
                "gram_hermitian",
                asym <= 1e-10 * norm,
                format!("max|M-M^T|/|M|={:.2e}", asym / norm),
            )
        }
        Err(e) => check("gram_hermitian", false, e.to_string()),
    });

    let smoke = general.clone().with_quad(trapezoid_quadrature());
    out.push(match (purity(&general), purity(&smoke)) {
        (Ok(a), Ok(b)) => check(
            "hermite_vs_trapezoid",
            (a.purity - b.purity).abs() <= 1e-3,
            format!("{:.7} vs {:.7}", a.purity, b.purity),
        ),
        (a, b) => check("hermite_vs_trapezoid", false, format!("{:?} / {:?}", a.err(), b.err())),
    });

    let long: Vec<f64> = [1.0e6, 2.0e6, 4.0e6]
        .iter()
        .map(|&tau| {
            let d = liio3(ModelKind::General, 0.5, tau).derived;
            d.a_tau * tau
        })
        .collect();
    let spread = long.iter().map(|v| (v / long[0] - 1.0).abs()).fold(0.0, f64::max);
    out.push(check("fedorov_long_pulse", spread <= 0.01, format!("spread={spread:.2e}")));

    out
}

/// Print the table; `Err` unless every check passed.
pub fn run_and_report() -> Result<Vec<String>, CliError> {
    let results = checks();
    let mut lines = Vec::new();
    for c in &results {
        let line = format!("{:<28} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
        println!("{line}");
        lines.push(line);
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} self-test check(s) failed")));
    }
    let line = format!("all {} checks passed", results.len());
    println!("{line}");
    lines.push(line);
    Ok(lines)
}
