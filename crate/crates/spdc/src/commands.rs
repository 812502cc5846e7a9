//! The five CLI commands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use spdc_core::biphoton::{jsa_row, jsa_stats, field_from_rows, GridSpec};
use spdc_core::phase_matching::pmf;
use spdc_core::purity::{apply_axis, purity, PurityResult, PuritySetting, SweepAxis};
use spdc_core::units::detuning_to_wavelength;
use spdc_core::{BiphotonModel, ModelKind, SpdcType};

use crate::config::{self, RunConfig};
use crate::output::{artifact_path, num, write, Csv};
use crate::{selftest, svg, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PmfSlice,
    Jsa,
    PuritySweep,
    CompareModels,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PmfSlice => "pmf-slice",
            Command::Jsa => "jsa",
            Command::PuritySweep => "purity-sweep",
            Command::CompareModels => "compare-models",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub figures: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    /// Fill the `wall_time_ms` sweep column. Off by default so that repeated
    /// runs produce identical files.
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            config: None,
            out: PathBuf::from("."),
            figures: false,
            threads: None,
            timing: false,
        }
    }
}

/// Run one command. Returns the one-line summaries that were printed.
pub fn run(command: Command, opts: &Options) -> Result<Vec<String>, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Config {
                path: String::from("--threads"),
                msg: String::from("must be at least 1"),
            });
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Failed(e.to_string()))?;
    if command == Command::Selftest {
        return pool.install(selftest::run_and_report);
    }
    let path = opts.config.as_ref().ok_or_else(|| CliError::Config {
        path: String::from("--config"),
        msg: String::from("required for this command"),
    })?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let cfg = config::parse(&text)?;
    let hash = cfg.hash(command.name());
    let ctx = Ctx {
        cfg: &cfg,
        hash: &hash,
        opts,
        command,
    };
    let lines = pool.install(|| match command {
        Command::PmfSlice => pmf_slice(&ctx),
        Command::Jsa => jsa(&ctx),
        Command::PuritySweep => purity_sweep(&ctx),
        Command::CompareModels => compare_models(&ctx),
        Command::Selftest => unreachable!(),
    })?;
    for l in &lines {
        println!("{l}");
    }
    Ok(lines)
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    hash: &'a str,
    opts: &'a Options,
    command: Command,
}

impl Ctx<'_> {
    fn path(&self, model: &str, ext: &str) -> PathBuf {
        artifact_path(&self.opts.out, self.command.name(), model, self.hash, ext)
    }

    fn emit_csv(&self, model: &str, csv: &Csv, lines: &mut Vec<String>) -> Result<PathBuf, CliError> {
        let p = self.path(model, "csv");
        write(&p, csv.as_str())?;
        lines.push(format!("wrote {} ({} rows)", p.display(), csv.rows()));
        Ok(p)
    }

    fn emit_svg(&self, name: &str, body: &str, lines: &mut Vec<String>) -> Result<(), CliError> {
        let p = self.path(name, "svg");
        write(&p, body)?;
        lines.push(format!("wrote {}", p.display()));
        Ok(())
    }
}

/// Evaluate every row of `grid` in parallel, keeping row order.
fn grid_values<F>(grid: &GridSpec, f: F) -> Result<Vec<f64>, CliError>
where
    F: Fn(usize) -> spdc_core::Result<Vec<f64>> + Sync + Send,
{
    let rows: Vec<spdc_core::Result<Vec<f64>>> = (0..grid.y.count).into_par_iter().map(f).collect();
    let mut out = Vec::with_capacity(grid.x.count * grid.y.count);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

fn pmf_slice(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let model = ctx.cfg.model()?;
    let grid = ctx.cfg.grid_spec()?;
    if grid.position_domain() {
        return Err(CliError::Config {
            path: String::from("grid"),
            msg: String::from("PMF slices are defined in momentum space"),
        });
    }
    let kinds = ctx.cfg.pmf_kinds()?;
    let center = model.pump.degenerate_wavelength();
    let (xs, ys) = (grid.x.values(), grid.y.values());
    let (xn, yn) = (grid.x.var.name(), grid.y.var.name());
    let mut csv = Csv::new(
        ctx.hash,
        &[
            "lambda_s_um",
            "lambda_i_um",
            "q_sx",
            "q_sy",
            "q_ix",
            "q_iy",
            "Omega_s",
            "Omega_i",
            "pmf_kind",
            "value",
        ],
    );
    let mut lines = Vec::new();
    let mut svgs = Vec::new();
    for kind in kinds {
        let values = grid_values(&grid, |r| {
            xs.iter()
                .map(|&x| {
                    let p = grid.point(center, x, ys[r]);
                    pmf(kind, &p.qs, &p.qi, &p.w, &model.derived)
                })
                .collect()
        })?;
        for (r, &y) in ys.iter().enumerate() {
            for (c, &x) in xs.iter().enumerate() {
                let p = grid.point(center, x, y);
                csv.row(&[
                    num(detuning_to_wavelength(p.w.omega_s, center)),
                    num(detuning_to_wavelength(p.w.omega_i, center)),
                    num(p.qs.qx),
                    num(p.qs.qy),
                    num(p.qi.qx),
                    num(p.qi.qy),
                    num(p.w.omega_s),
                    num(p.w.omega_i),
                    kind.name().to_string(),
                    num(values[r * xs.len() + c]),
                ]);
            }
        }
        if ctx.opts.figures {
            let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            svgs.push((kind.name(), svg::heatmap(&format!("|PMF| {}", kind.name()), xn, yn, &xs, &ys, &abs)));
        }
    }
    ctx.emit_csv("pmf", &csv, &mut lines)?;
    for (name, body) in svgs {
        ctx.emit_svg(&format!("pmf-{name}"), &body, &mut lines)?;
    }
    Ok(lines)
}

fn jsa(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let model = ctx.cfg.model()?;
    let grid = ctx.cfg.grid_spec()?;
    let values = grid_values(&grid, |r| jsa_row(&model, &grid, r))?;
    let field = field_from_rows(&grid, values);
    let (xn, yn) = (grid.x.var.name(), grid.y.var.name());
    let mut csv = Csv::new(ctx.hash, &[yn, xn, "value"]);
    for (r, &y) in field.ys.iter().enumerate() {
        for (c, &x) in field.xs.iter().enumerate() {
            csv.row(&[num(y), num(x), num(field.at(r, c))]);
        }
    }
    let mut lines = Vec::new();
    let name = model.kind.name();
    ctx.emit_csv(name, &csv, &mut lines)?;
    match jsa_stats(&field) {
        Ok(s) if s.tilt_undefined => lines.push(format!(
            "centroid=({:.6e}, {:.6e}) tilt=undefined axis_ratio={:.4}",
            s.centroid[0], s.centroid[1], s.axis_ratio
        )),
        Ok(s) => lines.push(format!(
            "centroid=({:.6e}, {:.6e}) tilt_deg={:.3} axis_ratio={:.4}",
            s.centroid[0],
            s.centroid[1],
            s.tilt.to_degrees(),
            s.axis_ratio
        )),
        Err(e) => lines.push(format!("stats unavailable: {e}")),
    }
    if ctx.opts.figures {
        let body = svg::heatmap(&format!("{name} {}", value_label(&grid)), xn, yn, &field.xs, &field.ys, &field.values);
        ctx.emit_svg(name, &body, &mut lines)?;
    }
    Ok(lines)
}

fn value_label(grid: &GridSpec) -> &'static str {
    match grid.value {
        spdc_core::biphoton::FieldValue::Intensity => "intensity",
        spdc_core::biphoton::FieldValue::Amplitude => "amplitude",
    }
}

fn compare_models(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let grid = ctx.cfg.grid_spec()?;
    let kinds = [ModelKind::General, ModelKind::DoubleSinc, ModelKind::FourGaussian];
    let models: Vec<BiphotonModel> = kinds.iter().map(|k| ctx.cfg.model_of(*k)).collect::<Result<_, _>>()?;
    let mut fields = Vec::new();
    for m in &models {
        fields.push(grid_values(&grid, |r| jsa_row(m, &grid, r))?);
    }
    let (xs, ys) = (grid.x.values(), grid.y.values());
    let (xn, yn) = (grid.x.var.name(), grid.y.var.name());
    let mut csv = Csv::new(ctx.hash, &[yn, xn, "general", "double_sinc", "four_gaussian"]);
    for (r, &y) in ys.iter().enumerate() {
        for (c, &x) in xs.iter().enumerate() {
            let k = r * xs.len() + c;
            csv.row(&[num(y), num(x), num(fields[0][k]), num(fields[1][k]), num(fields[2][k])]);
        }
    }
    let mut lines = Vec::new();
    ctx.emit_csv("all", &csv, &mut lines)?;
    let peak = fields[0].iter().cloned().fold(0.0, f64::max);
    let max_diff = |f: &[f64]| f.iter().zip(&fields[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    lines.push(format!(
        "max|double_sinc-general|={:.4e} max|four_gaussian-general|={:.4e} peak(general)={:.4e}",
        max_diff(&fields[1]),
        max_diff(&fields[2]),
        peak
    ));
    if ctx.opts.figures {
        for (k, f) in kinds.iter().zip(&fields) {
            let body = svg::heatmap(&format!("{} {}", k.name(), value_label(&grid)), xn, yn, &xs, &ys, f);
            ctx.emit_svg(k.name(), &body, &mut lines)?;
        }
    }
    Ok(lines)
}

/// Row descriptor for a sweep point, filled even when the point fails.
struct RowInfo {
    ell: i32,
    p: u32,
    l_mm: f64,
    w_p: f64,
    w0: f64,
    tau: f64,
}

fn row_info(base: &PuritySetting, axis: SweepAxis, v: f64) -> RowInfo {
    let mut r = RowInfo {
        ell: base.collection.ell,
        p: base.collection.p_rad,
        l_mm: base.model.crystal.length * 1e-3,
        w_p: base.model.pump.w_p,
        w0: base.collection.w0,
        tau: base.model.pump.tau,
    };
    match axis {
        SweepAxis::WsOverWp => r.w0 = v * r.w_p,
        SweepAxis::Ell => r.ell = v as i32,
        SweepAxis::Length => r.l_mm = v * 1e-3,
        SweepAxis::Tau => r.tau = v,
        SweepAxis::Wp => r.w_p = v,
    }
    r
}

fn purity_sweep(ctx: &Ctx) -> Result<Vec<String>, CliError> {
    let base = ctx.cfg.purity_setting()?;
    let (axis, values) = ctx.cfg.sweep()?;
    let results: Vec<(spdc_core::Result<PurityResult>, f64)> = values
        .par_iter()
        .map(|&v| {
            let t = Instant::now();
            let r = apply_axis(&base, axis, v).and_then(|s| purity(&s));
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();
    let mut csv = Csv::new(
        ctx.hash,
        &[
            "model",
            "spdc_type",
            "ell",
            "p",
            "L_mm",
            "w_p_um",
            "w0_um",
            "tau_fs",
            "ws_over_wp",
            "purity",
            "trace_check",
            "converged",
            "wall_time_ms",
        ],
    );
    let mut lines = Vec::new();
    let mut first_err = None;
    let mut any_converged = false;
    let mut series = Vec::new();
    for (k, ((r, ms), &v)) in results.into_iter().zip(&values).enumerate() {
        let info = row_info(&base, axis, v);
        let (p, tc, conv) = match r {
            Ok(res) => {
                any_converged |= res.converged;
                if !res.converged {
                    eprintln!("row {k}: not converged, deltas {:?}", res.deltas);
                }
                series.push((v, res.purity));
                (num(res.purity), num(res.trace_check), res.converged)
            }
            Err(e) => {
                eprintln!("row {k}: {e}");
                first_err.get_or_insert(e);
                (String::new(), String::new(), false)
            }
        };
        csv.row(&[
            base.model.kind.name().to_string(),
            match base.model.spdc_type {
                SpdcType::TypeI => "I",
                SpdcType::TypeII => "II",
            }
            .to_string(),
            info.ell.to_string(),
            info.p.to_string(),
            num(info.l_mm),
            num(info.w_p),
            num(info.w0),
            num(info.tau),
            num(info.w0 / info.w_p),
            p,
            tc,
            conv.to_string(),
            if ctx.opts.timing { format!("{ms:.1}") } else { String::new() },
        ]);
    }
    ctx.emit_csv(base.model.kind.name(), &csv, &mut lines)?;
    if ctx.opts.figures {
        let body = svg::lines(
            &format!("purity, {} model", base.model.kind.name()),
            axis.name(),
            "P",
            &[("P", series.clone())],
        );
        ctx.emit_svg(base.model.kind.name(), &body, &mut lines)?;
    }
    if series.is_empty() {
        if let Some(e) = first_err {
            return Err(e.into());
        }
    }
    if !any_converged {
        return Err(spdc_core::Error::Convergence(String::from("no sweep point converged")).into());
    }
    Ok(lines)
}

/// Parse `path` and return the output paths a command would write, for
/// callers that want to locate artifacts.
pub fn expected_csv(command: Command, config_path: &Path, out: &Path) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| CliError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = config::parse(&text)?;
    let hash = cfg.hash(command.name());
    let model = match command {
        Command::PmfSlice => "pmf".to_string(),
        Command::CompareModels => "all".to_string(),
        _ => cfg.model_kind().name().to_string(),
    };
    Ok(artifact_path(out, command.name(), &model, &hash, "csv"))
}
