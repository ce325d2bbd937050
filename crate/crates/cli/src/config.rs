use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use cmc_core::{threshold, Curve, IntegrationOptions, ProfileParams, SignCase};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

/// A number, or the name of a threshold curve evaluated at the run's `H`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    Named(String),
}

impl Param {
    fn parse_flag(s: &str) -> Param {
        match s.trim().parse::<f64>() {
            Ok(v) => Param::Value(v),
            Err(_) => Param::Named(s.trim().to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub residual: Option<f64>,
    pub kappa: Option<f64>,
    pub mean_stddev: Option<f64>,
}

/// Everything a config file may hold. Every field is optional; flags fill or
/// override them.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<Param>,
    pub g0: Option<Param>,
    pub index: Option<usize>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub t_span: Option<[f64; 2]>,
    pub max_g: Option<f64>,
    pub stride: Option<usize>,
    pub fd_step: Option<f64>,
    pub seed: Option<u64>,
    pub s_count: Option<usize>,
    pub flat_radius: Option<f64>,
    pub y_count: Option<usize>,
    pub t_count: Option<usize>,
    pub t_window: Option<[f64; 2]>,
    pub limits: Option<Limits>,
    pub h_range: Option<[f64; 2]>,
    pub c_range: Option<[f64; 2]>,
    pub grid: Option<[usize; 2]>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// hyp, desitter, sphere, antidesitter, euclidean or minkowski
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// A number, or r1 / r2
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: Option<String>,
    /// A number, or q1 / q2
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<String>,
    /// Index of the ambient space form
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// LO,HI
    #[arg(long, value_parser = float_pair, allow_hyphen_values = true)]
    pub t_span: Option<[f64; 2]>,
    #[arg(long)]
    pub max_g: Option<f64>,
    /// Emit every `stride`-th grid node
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub s_count: Option<usize>,
    #[arg(long)]
    pub flat_radius: Option<f64>,
    #[arg(long)]
    pub y_count: Option<usize>,
    #[arg(long)]
    pub t_count: Option<usize>,
    /// LO,HI
    #[arg(long, value_parser = float_pair, allow_hyphen_values = true)]
    pub t_window: Option<[f64; 2]>,
    #[arg(long)]
    pub max_residual: Option<f64>,
    #[arg(long)]
    pub max_kappa_err: Option<f64>,
    #[arg(long)]
    pub max_h_stddev: Option<f64>,
    /// LO,HI
    #[arg(long = "H-range", value_parser = float_pair, allow_hyphen_values = true)]
    pub h_range: Option<[f64; 2]>,
    /// LO,HI
    #[arg(long = "C-range", value_parser = float_pair, allow_hyphen_values = true)]
    pub c_range: Option<[f64; 2]>,
    /// NH,NC
    #[arg(long, value_parser = count_pair)]
    pub grid: Option<[usize; 2]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<[T; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || format!("expected two comma-separated values, got {s:?}");
    match parts.as_slice() {
        [x, y] => Ok([x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?]),
        _ => Err(bad()),
    }
}

fn float_pair(s: &str) -> Result<[f64; 2], String> {
    parse_pair(s)
}

fn count_pair(s: &str) -> Result<[usize; 2], String> {
    parse_pair(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyLimits {
    pub residual: f64,
    pub kappa: f64,
    pub mean_stddev: f64,
}

/// A validated run: the merged file and flags with defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: SignCase,
    pub n: usize,
    pub h: Option<f64>,
    pub c: Option<Param>,
    pub g0: Option<Param>,
    pub index: Option<usize>,
    pub integration: IntegrationOptions,
    pub stride: Option<usize>,
    pub fd_step: f64,
    pub seed: u64,
    pub s_count: usize,
    pub flat_radius: f64,
    pub y_count: usize,
    pub t_count: usize,
    pub t_window: Option<[f64; 2]>,
    pub limits: VerifyLimits,
    pub h_range: Option<[f64; 2]>,
    pub c_range: Option<[f64; 2]>,
    pub grid: [usize; 2],
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::invalid(msg.into())
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("bad config {}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        Self::merge(file, flags.clone())
    }

    pub fn merge(file: FileConfig, f: Flags) -> Result<Self, CliError> {
        let case_name = f
            .case
            .or(file.case)
            .ok_or_else(|| invalid("missing case"))?;
        let case = SignCase::parse(&case_name).map_err(|e| invalid(e.to_string()))?;
        let n = f.n.or(file.n).ok_or_else(|| invalid("missing n"))?;
        if n < 3 {
            return Err(invalid(format!("n must be at least 3, got {n}")));
        }
        let h = f.h.or(file.h).map(|h| finite("H", h)).transpose()?;
        let c = f.c.as_deref().map(Param::parse_flag).or(file.c);
        let g0 = f.g0.as_deref().map(Param::parse_flag).or(file.g0);

        let defaults = IntegrationOptions::default();
        let step = positive("step", f.step.or(file.step).unwrap_or(defaults.step))?;
        let tol = positive("tol", f.tol.or(file.tol).unwrap_or(defaults.tol))?;
        let [t_min, t_max] = f
            .t_span
            .or(file.t_span)
            .unwrap_or([defaults.t_min, defaults.t_max]);
        finite("t_span", t_min)?;
        finite("t_span", t_max)?;
        if t_min > 0.0 || t_max < 0.0 {
            return Err(invalid(format!(
                "t_span must contain 0, got [{t_min}, {t_max}]"
            )));
        }
        let max_g = positive("max_g", f.max_g.or(file.max_g).unwrap_or(defaults.max_g))?;
        let integration = IntegrationOptions {
            step,
            tol,
            t_min,
            t_max,
            max_g,
        };

        let stride = f.stride.or(file.stride);
        if stride == Some(0) {
            return Err(invalid("stride must be positive"));
        }
        let fd_step = positive("fd_step", f.fd_step.or(file.fd_step).unwrap_or(1e-4))?;
        let seed = f.seed.or(file.seed).unwrap_or(0);
        let s_count = f.s_count.or(file.s_count).unwrap_or(8);
        let flat_radius = positive(
            "flat_radius",
            f.flat_radius.or(file.flat_radius).unwrap_or(1.0),
        )?;
        let y_count = f.y_count.or(file.y_count).unwrap_or(s_count.min(4));
        let t_count = f.t_count.or(file.t_count).unwrap_or(16);
        if s_count == 0 || y_count == 0 || t_count == 0 {
            return Err(invalid("s_count, y_count and t_count must be positive"));
        }
        if y_count > s_count {
            return Err(invalid(format!(
                "y_count {y_count} exceeds s_count {s_count}"
            )));
        }
        let t_window = f.t_window.or(file.t_window);

        let fl = file.limits.unwrap_or_default();
        let limits = VerifyLimits {
            residual: positive(
                "max_residual",
                f.max_residual.or(fl.residual).unwrap_or(1e-7),
            )?,
            kappa: positive(
                "max_kappa_err",
                f.max_kappa_err.or(fl.kappa).unwrap_or(1e-4),
            )?,
            mean_stddev: positive(
                "max_h_stddev",
                f.max_h_stddev.or(fl.mean_stddev).unwrap_or(1e-5),
            )?,
        };

        let h_range = f.h_range.or(file.h_range);
        let c_range = f.c_range.or(file.c_range);
        let grid = f.grid.or(file.grid).unwrap_or([41, 41]);

        Ok(Self {
            case,
            n,
            h,
            c,
            g0,
            index: f.index.or(file.index),
            integration,
            stride,
            fd_step,
            seed,
            s_count,
            flat_radius,
            y_count,
            t_count,
            t_window,
            limits,
            h_range,
            c_range,
            grid,
            out: f.out.or(file.out),
        })
    }

    pub fn require_h(&self) -> Result<f64, CliError> {
        self.h.ok_or_else(|| invalid("missing H"))
    }

    fn named(&self, name: &str, allowed: [(&str, Curve); 2]) -> Result<f64, CliError> {
        let h = self.require_h()?;
        let lower = name.to_ascii_lowercase();
        let curve = allowed
            .iter()
            .find(|(n, _)| *n == lower)
            .map(|(_, c)| *c)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown value {name:?}; expected a number, {} or {}",
                    allowed[0].0, allowed[1].0
                ))
            })?;
        threshold(self.case, self.n, h, curve).map_err(CliError::from)
    }

    /// `C` as a number, if it was given.
    pub fn resolve_c(&self) -> Result<Option<f64>, CliError> {
        match &self.c {
            None => Ok(None),
            Some(Param::Value(v)) => finite("C", *v).map(Some),
            Some(Param::Named(s)) => self
                .named(s, [("r1", Curve::R1), ("r2", Curve::R2)])
                .map(Some),
        }
    }

    pub fn resolve_g0(&self) -> Result<f64, CliError> {
        match &self.g0 {
            None => Err(invalid("missing g0")),
            Some(Param::Value(v)) => positive("g0", *v),
            Some(Param::Named(s)) => self.named(s, [("q1", Curve::Q1), ("q2", Curve::Q2)]),
        }
    }

    pub fn params(&self) -> Result<ProfileParams, CliError> {
        let h = self.require_h()?;
        let c = self.resolve_c()?.ok_or_else(|| invalid("missing C"))?;
        let s = self.case.canonical_signs();
        ProfileParams::new(self.n, s.a, s.b, s.d, h, c).map_err(CliError::from)
    }
}
