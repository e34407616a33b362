//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "reset"          # reset | flux | dot
//! energy = 1.0
//! g = 1.6e-3
//! coupling_c = 1e-2       # p_c (reset) or gamma_c (flux, dot)
//! coupling_h = 1.1e-3
//! t_c = 0.0
//! t_h = "inf"             # number or "inf" (reset, dot)
//! u = 300.0               # dot only
//! rate_energy = "coulomb" # dot only: coulomb | gap
//!
//! [sweep]
//! optimize = true
//! [[sweep.axis]]
//! name = "t_h"            # t_c t_h g coupling_c coupling_h u energy
//! min = 0.01
//! max = 1e6
//! points = 20
//! scale = "log"           # linear | log
//! # or: values = [0.0, 20.0, 1e3]
//!
//! [optimize]
//! lower = 1e-6
//! upper = 1e-2
//! grid_points = 8
//! rel_tol = 1e-4
//! max_evals = 10000
//! over_t_h = false
//!
//! [threshold]
//! t_c = { min = 0.0, max = 0.25, points = 11 }
//! t_h_cap = 1e6
//! t_h_tol = 1e-3
//! critical = false
//!
//! [tolerance]
//! residual = 1e-10
//! uniqueness = 1e-8
//!
//! [output]
//! path = "sweep.csv"
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use qtm_core::models::DotRateEnergy;
use qtm_core::optimize::{OptimizationProblem, TemperatureSearch};
use qtm_core::{DotParams, FluxParams, ModelKind, ModelParams, ResetParams, SteadyOptions, Temperature};

/// Directory prepended to relative output paths.
pub const OUTPUT_DIR_ENV: &str = "QTM_OUTPUT_DIR";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<qtm_core::Error> for ConfigError {
    fn from(e: qtm_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TempValue {
    Number(f64),
    Token(String),
}

impl TempValue {
    fn resolve(&self, name: &str) -> Result<Temperature> {
        match self {
            TempValue::Number(t) => Temperature::new(*t).map_err(|e| bad(format!("{name}: {e}"))),
            TempValue::Token(s) => Temperature::from_str(s).map_err(|e| bad(format!("{name}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(default = "one")]
    pub energy: f64,
    pub g: f64,
    pub coupling_c: f64,
    pub coupling_h: f64,
    pub t_c: TempValue,
    pub t_h: TempValue,
    pub u: Option<f64>,
    pub rate_energy: Option<String>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
    pub values: Option<Vec<f64>>,
}

impl AxisSpec {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let out = match (&self.values, self.min, self.max, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if n == 0 {
                    return Err(bad(format!("axis `{name}`: points must be at least 1")));
                }
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return Err(bad(format!("axis `{name}`: need finite min <= max")));
                }
                if n == 1 {
                    vec![lo]
                } else {
                    match self.scale {
                        Scale::Linear => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
                        Scale::Log => {
                            if lo <= 0.0 {
                                return Err(bad(format!("axis `{name}`: log scale needs min > 0")));
                            }
                            let (a, b) = (lo.ln(), hi.ln());
                            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
                        }
                    }
                }
            }
            _ => {
                return Err(bad(format!(
                    "axis `{name}`: give either `values` or all of `min`, `max`, `points`"
                )))
            }
        };
        if out.is_empty() {
            return Err(bad(format!("axis `{name}` is empty")));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("axis `{name}` contains non-finite values")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedAxis {
    pub name: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
    pub values: Option<Vec<f64>>,
}

impl NamedAxis {
    fn spec(&self) -> AxisSpec {
        AxisSpec {
            min: self.min,
            max: self.max,
            points: self.points,
            scale: self.scale,
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub optimize: bool,
    #[serde(default)]
    pub axis: Vec<NamedAxis>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub grid_points: Option<usize>,
    pub rel_tol: Option<f64>,
    pub max_evals: Option<usize>,
    #[serde(default)]
    pub over_t_h: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub t_c: AxisSpec,
    pub t_h_cap: Option<f64>,
    pub t_h_tol: Option<f64>,
    pub t_c_tol: Option<f64>,
    #[serde(default)]
    pub critical: bool,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub residual: Option<f64>,
    pub uniqueness: Option<f64>,
    pub psd: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub optimize: OptimizeSection,
    pub threshold: Option<ThresholdSection>,
    #[serde(default)]
    pub tolerance: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.params()?;
        cfg.steady_options(None)?;
        cfg.problem(cfg.params()?)?;
        Ok(cfg)
    }

    pub fn kind(&self) -> Result<ModelKind> {
        Ok(ModelKind::from_str(&self.model.kind)?)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let t_c = m.t_c.resolve("t_c")?;
        let t_h = m.t_h.resolve("t_h")?;
        let kind = self.kind()?;
        if kind != ModelKind::Dot && (m.u.is_some() || m.rate_energy.is_some()) {
            return Err(bad("`u` and `rate_energy` apply to the dot model only"));
        }
        let params: ModelParams = match kind {
            ModelKind::Reset => ResetParams::new(m.energy, m.g, m.coupling_c, m.coupling_h, t_c, t_h)?.into(),
            ModelKind::Flux => FluxParams::new(m.energy, m.g, m.coupling_c, m.coupling_h, t_c, t_h)?.into(),
            ModelKind::Dot => {
                let mut p = DotParams::new(m.energy, m.g, m.coupling_c, m.coupling_h, t_c, t_h, m.u.unwrap_or(0.0))?;
                p.rate_energy = match m.rate_energy.as_deref().map(str::to_ascii_lowercase).as_deref() {
                    None | Some("coulomb") => DotRateEnergy::Coulomb,
                    Some("gap") => DotRateEnergy::Gap,
                    Some(other) => return Err(bad(format!("unknown rate_energy `{other}` (coulomb, gap)"))),
                };
                p.into()
            }
        };
        Ok(params)
    }

    /// Solver thresholds; `residual_override` comes from the command line.
    pub fn steady_options(&self, residual_override: Option<f64>) -> Result<SteadyOptions> {
        let d = SteadyOptions::default();
        let t = &self.tolerance;
        let opts = SteadyOptions {
            residual_tol: residual_override.or(t.residual).unwrap_or(d.residual_tol),
            uniqueness_tol: t.uniqueness.unwrap_or(d.uniqueness_tol),
            psd_tol: t.psd.unwrap_or(d.psd_tol),
        };
        for (name, v) in [
            ("residual", opts.residual_tol),
            ("uniqueness", opts.uniqueness_tol),
            ("psd", opts.psd_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("tolerance `{name}` must be a positive number")));
            }
        }
        Ok(opts)
    }

    pub fn problem(&self, base: ModelParams) -> Result<OptimizationProblem> {
        let o = &self.optimize;
        let mut p = OptimizationProblem::new(base);
        p.lower = o.lower.unwrap_or(p.lower);
        p.upper = o.upper.unwrap_or(p.upper);
        p.grid_points = o.grid_points.unwrap_or(p.grid_points);
        p.rel_tol = o.rel_tol.unwrap_or(p.rel_tol);
        p.max_evals = o.max_evals.unwrap_or(p.max_evals);
        p.validate()?;
        Ok(p)
    }

    pub fn search(&self) -> Result<TemperatureSearch> {
        let mut s = TemperatureSearch::default();
        let p = self.problem(self.params()?)?;
        s.lower = p.lower;
        s.upper = p.upper;
        s.grid_points = p.grid_points;
        if let Some(t) = &self.threshold {
            s.t_h_cap = t.t_h_cap.unwrap_or(s.t_h_cap);
            s.t_h_tol = t.t_h_tol.unwrap_or(s.t_h_tol);
            s.t_c_tol = t.t_c_tol.unwrap_or(s.t_c_tol);
        }
        for (name, v) in [("t_h_cap", s.t_h_cap), ("t_h_tol", s.t_h_tol), ("t_c_tol", s.t_c_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("threshold `{name}` must be a positive number")));
            }
        }
        Ok(s)
    }

    /// Parameter sets of a sweep, outer axis major.
    pub fn sweep_points(&self) -> Result<Vec<ModelParams>> {
        let sweep = self.sweep.as_ref().ok_or_else(|| bad("missing [sweep] section"))?;
        if sweep.axis.is_empty() || sweep.axis.len() > 2 {
            return Err(bad("a sweep needs one or two [[sweep.axis]] entries"));
        }
        if sweep.axis.len() == 2 && sweep.axis[0].name == sweep.axis[1].name {
            return Err(bad("sweep axes must differ"));
        }
        let axes: Vec<(&str, Vec<f64>)> = sweep
            .axis
            .iter()
            .map(|a| Ok((a.name.as_str(), a.spec().values(&a.name)?)))
            .collect::<Result<_>>()?;
        let base = self.params()?;
        let mut points = Vec::new();
        let inner: &[f64] = axes.get(1).map(|a| a.1.as_slice()).unwrap_or(&[f64::NAN]);
        for &outer in &axes[0].1 {
            let p = set_axis(&base, axes[0].0, outer)?;
            for &x in inner {
                points.push(if x.is_nan() { p } else { set_axis(&p, axes[1].0, x)? });
            }
        }
        Ok(points)
    }

    pub fn threshold_grid(&self) -> Result<Vec<f64>> {
        let t = self.threshold.as_ref().ok_or_else(|| bad("missing [threshold] section"))?;
        let grid = t.t_c.values("t_c")?;
        if grid.iter().any(|v| *v < 0.0) {
            return Err(bad("threshold t_c values must be non-negative"));
        }
        Ok(grid)
    }

    /// Output path from the command line or config, placed under
    /// `$QTM_OUTPUT_DIR` when that is set and the path is relative.
    pub fn output_path(&self, cli: Option<&Path>) -> Option<PathBuf> {
        let path = cli.map(Path::to_path_buf).or_else(|| self.output.path.clone())?;
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if path.is_relative() => Some(PathBuf::from(dir).join(path)),
            _ => Some(path),
        }
    }
}

fn set_axis(p: &ModelParams, name: &str, v: f64) -> Result<ModelParams> {
    let (t_c, t_h) = p.temperatures();
    let [g, c, h] = p.couplings();
    let out = match name {
        "t_c" => p.with_temperatures(Temperature::new(v)?, t_h)?,
        "t_h" => p.with_temperatures(t_c, Temperature::new(v)?)?,
        "g" => p.with_couplings([v, c, h])?,
        "coupling_c" => p.with_couplings([g, v, h])?,
        "coupling_h" => p.with_couplings([g, c, v])?,
        "u" => match p {
            ModelParams::Dot(d) => {
                let mut d = *d;
                d.u = v;
                d.validate()?;
                d.into()
            }
            _ => return Err(bad("axis `u` applies to the dot model only")),
        },
        "energy" => match *p {
            ModelParams::Reset(mut r) => {
                r.energy = v;
                r.validate()?;
                r.into()
            }
            ModelParams::Flux(mut f) => {
                f.energy = v;
                f.validate()?;
                f.into()
            }
            ModelParams::Dot(mut d) => {
                d.energy = v;
                d.validate()?;
                d.into()
            }
        },
        other => {
            return Err(bad(format!(
                "unknown sweep axis `{other}` (t_c, t_h, g, coupling_c, coupling_h, u, energy)"
            )))
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
kind = "reset"
g = 1.6e-3
coupling_c = 1e-2
coupling_h = 1.1e-3
t_c = 0
t_h = "inf"
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::parse(BASE).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.kind(), ModelKind::Reset);
        assert!(p.temperatures().1.is_infinite());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse(&format!("{BASE}colour = 1\n")).is_err());
        assert!(RunConfig::parse(&format!("{BASE}[extra]\nx = 1\n")).is_err());
    }

    #[test]
    fn rejects_infinite_flux_temperature() {
        assert!(RunConfig::parse(&BASE.replace("reset", "flux")).is_err());
    }

    #[test]
    fn sweep_is_outer_axis_major() {
        let text = format!(
            "{BASE}[sweep]\n[[sweep.axis]]\nname = \"t_c\"\nvalues = [0.1, 0.2]\n[[sweep.axis]]\nname = \"g\"\nmin = 1e-3\nmax = 1e-2\npoints = 3\nscale = \"log\"\n"
        );
        let pts = RunConfig::parse(&text).unwrap().sweep_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].temperatures().0, Temperature::Finite(0.1));
        assert_eq!(pts[2].temperatures().0, Temperature::Finite(0.1));
        assert_eq!(pts[3].temperatures().0, Temperature::Finite(0.2));
        assert!((pts[1].couplings()[0] - 10f64.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_point_axis_is_rejected() {
        let text = format!("{BASE}[sweep]\n[[sweep.axis]]\nname = \"t_h\"\nmin = 1\nmax = 2\npoints = 0\n");
        assert!(RunConfig::parse(&text).unwrap().sweep_points().is_err());
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(RunConfig::parse(&format!("{BASE}[tolerance]\nresidual = 0\n")).is_err());
    }
}
