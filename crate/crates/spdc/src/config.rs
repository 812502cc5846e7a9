//! TOML run configuration. Parsing is strict: unknown keys are errors and
//! every error carries the dotted path of the offending field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spdc_core::biphoton::{Axis, AxisVar, FieldValue, FixedCoords, GridSpec};
use spdc_core::numerics::{QuadratureSpec, Rule};
use spdc_core::params::PumpIndex;
use spdc_core::phase_matching::PmfKind;
use spdc_core::purity::{default_quadrature, trapezoid_quadrature, KernelFlag, PuritySetting, SweepAxis};
use spdc_core::{BiphotonModel, CollectionSpec, CrystalSpec, ModelKind, PulseRegime, PumpSpec, SpdcType};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pump: PumpSection,
    pub crystal: CrystalSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collection: Option<CollectionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub pmf: PmfSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub lambda_p_um: f64,
    pub w_p_um: f64,
    pub tau_fs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum TypeName {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeName {
    Short,
    Long,
}

/// Either a preset (`"BBO-Fig5"`, `"LiIO3"`) with optional overrides, or a
/// fully specified crystal.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub spdc_type: Option<TypeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_p_per_um: Option<f64>,
    /// Group-index divisors `[p, s, i]`: `v_g = c / n_g`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_index: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gvd_fs2_per_mm: Option<[f64; 3]>,
    #[serde(default)]
    pub swap_signal_idler: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max_per_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    #[default]
    General,
    DoubleSinc,
    FourGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    #[default]
    QuadraticOnly,
    FullSinc,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub kind: ModelName,
    #[serde(default)]
    pub kernel: KernelName,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSection {
    #[serde(default)]
    pub ell: i32,
    #[serde(default)]
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ws_over_wp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    LambdaSUm,
    LambdaIUm,
    OmegaS,
    OmegaI,
    QSx,
    QIx,
    XSUm,
    XIUm,
}

impl AxisName {
    fn var(self) -> AxisVar {
        match self {
            AxisName::LambdaSUm => AxisVar::LambdaS,
            AxisName::LambdaIUm => AxisVar::LambdaI,
            AxisName::OmegaS => AxisVar::OmegaS,
            AxisName::OmegaI => AxisVar::OmegaI,
            AxisName::QSx => AxisVar::QSx,
            AxisName::QIx => AxisVar::QIx,
            AxisName::XSUm => AxisVar::XS,
            AxisName::XIUm => AxisVar::XI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub var: AxisName,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueName {
    #[default]
    Intensity,
    Amplitude,
}

/// Coordinates held fixed on a grid; a wavelength of 0 means degenerate.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedSection {
    pub lambda_s_um: f64,
    pub lambda_i_um: f64,
    pub q_sx: f64,
    pub q_sy: f64,
    pub q_ix: f64,
    pub q_iy: f64,
    pub x_s_um: f64,
    pub x_i_um: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x: AxisSection,
    pub y: AxisSection,
    #[serde(default)]
    pub value: ValueName,
    #[serde(default)]
    pub fixed: FixedSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum SweepName {
    #[serde(rename = "ws_over_wp")]
    WsOverWp,
    #[serde(rename = "ell")]
    Ell,
    #[serde(rename = "L_mm")]
    LengthMm,
    #[serde(rename = "tau_fs")]
    TauFs,
    #[serde(rename = "w_p_um")]
    WpUm,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PmfName {
    GeneralSinc,
    DoubleSinc,
    GaussianSubstitute,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PmfSection {
    #[serde(default = "all_pmfs")]
    pub kinds: Vec<PmfName>,
}

impl Default for PmfSection {
    fn default() -> Self {
        PmfSection { kinds: all_pmfs() }
    }
}

fn all_pmfs() -> Vec<PmfName> {
    vec![PmfName::GeneralSinc, PmfName::DoubleSinc, PmfName::GaussianSubstitute]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    #[default]
    GaussHermite,
    Trapezoid,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default)]
    pub rule: RuleName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_refinements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_tail: Option<f64>,
}

/// Parse a config, reporting the field path on failure.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config {
        path: String::from("<document>"),
        msg: e.message().trim().to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        let msg = e.into_inner().message().trim().to_string();
        // a missing key is reported against its table; name the key itself
        if let Some(key) = msg.strip_prefix("missing field `").and_then(|m| m.strip_suffix('`')) {
            path = if path == "." { key.to_string() } else { format!("{path}.{key}") };
        }
        CliError::Config {
            path: if path == "." { String::from("<root>") } else { path },
            msg,
        }
    })
}

fn config_err(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        msg: msg.into(),
    }
}

impl RunConfig {
    /// SHA-256 over the command name and the re-serialized config, so that
    /// formatting and defaulted keys do not change the hash.
    pub fn hash(&self, command: &str) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(format!("command = \"{command}\"\n{canonical}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn pump_spec(&self) -> Result<PumpSpec, CliError> {
        let p = &self.pump;
        Ok(PumpSpec::new(p.lambda_p_um, p.w_p_um, p.tau_fs)?)
    }

    pub fn crystal_spec(&self) -> Result<CrystalSpec, CliError> {
        let c = &self.crystal;
        let index = match (c.n_p, c.k_p_per_um) {
            (Some(_), Some(_)) => return Err(config_err("crystal", "give n_p or k_p_per_um, not both")),
            (Some(n), None) => Some(PumpIndex::RefractiveIndex(n)),
            (None, Some(k)) => Some(PumpIndex::Wavenumber(k)),
            (None, None) => None,
        };
        let mut spec = match c.preset.as_deref() {
            Some("BBO-Fig5") => {
                let mut b = CrystalSpec::bbo_fig5();
                if c.spdc_type == Some(TypeName::I) {
                    b = b.as_type_one();
                }
                b
            }
            Some("LiIO3") => {
                let n = match index {
                    Some(PumpIndex::RefractiveIndex(n)) => n,
                    Some(PumpIndex::Wavenumber(_)) | None => {
                        return Err(config_err("crystal.n_p", "the LiIO3 preset needs a user-supplied n_p"))
                    }
                };
                let l = c
                    .length_mm
                    .ok_or_else(|| config_err("crystal.length_mm", "missing for preset LiIO3"))?;
                if c.spdc_type == Some(TypeName::II) {
                    return Err(config_err("crystal.type", "the LiIO3 preset is type I"));
                }
                CrystalSpec::liio3_geometry(l, n)?
            }
            Some(other) => return Err(config_err("crystal.preset", format!("unknown preset `{other}`"))),
            None => {
                let t = c.spdc_type.ok_or_else(|| config_err("crystal.type", "missing field"))?;
                let l = c.length_mm.ok_or_else(|| config_err("crystal.length_mm", "missing field"))?;
                let idx = index.ok_or_else(|| config_err("crystal.n_p", "missing n_p or k_p_per_um"))?;
                let ng = c.group_index.ok_or_else(|| config_err("crystal.group_index", "missing field"))?;
                let gvd = c
                    .gvd_fs2_per_mm
                    .ok_or_else(|| config_err("crystal.gvd_fs2_per_mm", "missing field"))?;
                let t = match t {
                    TypeName::I => SpdcType::TypeI,
                    TypeName::II => SpdcType::TypeII,
                };
                CrystalSpec::from_lab_units(t, l, idx, ng, gvd)?
            }
        };
        if c.preset.is_some() {
            if let Some(l) = c.length_mm {
                spec = spec.with_length(l * 1e3);
            }
            if let Some(idx) = index {
                spec.pump_index = idx;
            }
            if let Some(ng) = c.group_index {
                spec.ng_p = ng[0];
                spec.ng_s = ng[1];
                spec.ng_i = ng[2];
            }
            if let Some(g) = c.gvd_fs2_per_mm {
                spec.gvd_p = g[0] * 1e-3;
                spec.gvd_s = g[1] * 1e-3;
                spec.gvd_i = g[2] * 1e-3;
            }
        }
        if c.swap_signal_idler {
            spec = spec.swapped_signal_idler();
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn model_kind(&self) -> ModelKind {
        match self.model.kind {
            ModelName::General => ModelKind::General,
            ModelName::DoubleSinc => ModelKind::DoubleSinc,
            ModelName::FourGaussian => ModelKind::FourGaussian,
        }
    }

    pub fn model(&self) -> Result<BiphotonModel, CliError> {
        self.model_of(self.model_kind())
    }

    pub fn model_of(&self, kind: ModelKind) -> Result<BiphotonModel, CliError> {
        let c = &self.crystal;
        let regime = c.regime.map(|r| match r {
            RegimeName::Short => PulseRegime::Short,
            RegimeName::Long => PulseRegime::Long,
        });
        let mut m = BiphotonModel::new(kind, self.pump_spec()?, self.crystal_spec()?, regime)?;
        if let Some(a) = c.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(config_err("crystal.alpha", "must be positive"));
            }
            m.derived = m.derived.with_alpha(a);
        }
        if let Some(b) = c.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(config_err("crystal.beta", "must be positive"));
            }
            m.derived = m.derived.with_beta_t2(b);
        }
        let mut guards = m.derived.guards;
        if let Some(q) = c.q_max_per_um {
            guards.q_max = q;
        }
        if let Some(f) = c.omega_max_fraction {
            guards.omega_max = f * m.derived.omega_0;
        }
        if !(guards.q_max > 0.0 && guards.omega_max > 0.0) {
            return Err(config_err("crystal", "guards must be positive"));
        }
        m.derived = m.derived.with_guards(guards);
        Ok(m)
    }

    pub fn kernel(&self) -> KernelFlag {
        match self.model.kernel {
            KernelName::QuadraticOnly => KernelFlag::QuadraticOnly,
            KernelName::FullSinc => KernelFlag::FullSinc,
        }
    }

    pub fn collection_spec(&self) -> Result<CollectionSpec, CliError> {
        let c = self
            .collection
            .as_ref()
            .ok_or_else(|| config_err("collection", "missing section"))?;
        let w0 = match (c.w0_um, c.ws_over_wp) {
            (Some(w), None) => w,
            (None, Some(r)) => r * self.pump.w_p_um,
            _ => return Err(config_err("collection", "give exactly one of w0_um, ws_over_wp")),
        };
        Ok(CollectionSpec::new(c.ell, c.p, w0)?)
    }

    pub fn quadrature(&self) -> Result<(QuadratureSpec, f64), CliError> {
        let q = &self.quadrature;
        let mut spec = match q.rule {
            RuleName::GaussHermite => default_quadrature(),
            RuleName::Trapezoid => trapezoid_quadrature(),
        };
        if let Some(o) = &q.orders {
            spec.orders = o.clone();
        }
        if let Some(s) = &q.scalings {
            spec.scalings = s.clone();
        }
        if let Some(t) = q.tolerance {
            spec.tolerance = t;
        }
        if let Some(m) = q.max_refinements {
            spec.max_refinements = m;
        }
        if let Some(r) = q.truncation_radius {
            spec.truncation_radius = r;
        }
        if spec.rule == Rule::Trapezoid && spec.orders.iter().any(|o| o % 2 == 0) {
            return Err(config_err("quadrature.orders", "trapezoid point counts must be odd"));
        }
        spec.validate()?;
        Ok((spec, q.phase_tail.unwrap_or(spdc_core::purity::DEFAULT_PHASE_TAIL)))
    }

    pub fn purity_setting(&self) -> Result<PuritySetting, CliError> {
        let (quad, tail) = self.quadrature()?;
        let s = PuritySetting::new(self.model()?, self.collection_spec()?)?
            .with_kernel(self.kernel())
            .with_quad(quad)
            .with_phase_tail(tail);
        s.validate()?;
        Ok(s)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        let g = self.grid.as_ref().ok_or_else(|| config_err("grid", "missing section"))?;
        let axis = |a: &AxisSection| Axis::new(a.var.var(), a.start, a.end, a.count);
        let f = &g.fixed;
        let spec = GridSpec {
            x: axis(&g.x),
            y: axis(&g.y),
            fixed: FixedCoords {
                lambda_s: f.lambda_s_um,
                lambda_i: f.lambda_i_um,
                q_sx: f.q_sx,
                q_sy: f.q_sy,
                q_ix: f.q_ix,
                q_iy: f.q_iy,
                x_s: f.x_s_um,
                x_i: f.x_i_um,
            },
            value: match g.value {
                ValueName::Intensity => FieldValue::Intensity,
                ValueName::Amplitude => FieldValue::Amplitude,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Sweep axis and values in library units.
    pub fn sweep(&self) -> Result<(SweepAxis, Vec<f64>), CliError> {
        let s = self.sweep.as_ref().ok_or_else(|| config_err("sweep", "missing section"))?;
        if s.values.is_empty() {
            return Err(config_err("sweep.values", "empty"));
        }
        Ok(match s.axis {
            SweepName::WsOverWp => (SweepAxis::WsOverWp, s.values.clone()),
            SweepName::Ell => (SweepAxis::Ell, s.values.clone()),
            SweepName::LengthMm => (SweepAxis::Length, s.values.iter().map(|v| v * 1e3).collect()),
            SweepName::TauFs => (SweepAxis::Tau, s.values.clone()),
            SweepName::WpUm => (SweepAxis::Wp, s.values.clone()),
        })
    }

    pub fn pmf_kinds(&self) -> Result<Vec<PmfKind>, CliError> {
        if self.pmf.kinds.is_empty() {
            return Err(config_err("pmf.kinds", "empty"));
        }
        Ok(self
            .pmf
            .kinds
            .iter()
            .map(|k| match k {
                PmfName::GeneralSinc => PmfKind::GeneralSinc,
                PmfName::DoubleSinc => PmfKind::DoubleSinc,
                PmfName::GaussianSubstitute => PmfKind::GaussianSubstitute,
            })
            .collect())
    }
}
