//! TOML run configuration.
//!
//! ```toml
//! xi = 2.2                      # or a [xi_range] table, not both
//!
//! [params]
//! alpha = 0.1
//! beta = 0.319
//! delta = 0.3
//! epsilon = 0.322
//! k = 15.0
//!
//! [xi_range]
//! from = 0.5
//! to = 3.0
//! steps = 500
//!
//! [initial]                     # simulate
//! x = 10.0
//! y = 4.0
//!
//! [grid]                        # basin
//! x_min = 0.1
//! x_max = 15.0
//! y_min = 0.1
//! y_max = 10.0
//! nx = 40
//! ny = 40
//!
//! [bracket]                     # bifurcate
//! lo = 2.3
//! hi = 2.6
//!
//! [regime]                      # regime-map
//! epsilon_from = 0.05
//! epsilon_to = 0.6
//! epsilon_steps = 56
//!
//! [integrator]                  # any subset of the integrator settings
//! rel_tol = 1e-8
//!
//! [manifold]                    # any subset of the manifold settings
//! arclength_budget = 200.0
//!
//! [output]
//! path = "out.json"
//! format = "json"               # csv | json | svg
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrate::IntegratorSettings;
use crate::manifolds::{GridSpec, ManifoldSettings};
use crate::model::{ModelParams, State};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path} does not match the schema: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketBlock {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeBlock {
    pub epsilon_from: f64,
    pub epsilon_to: f64,
    pub epsilon_steps: usize,
}

impl Default for RegimeBlock {
    fn default() -> Self {
        Self {
            epsilon_from: 0.05,
            epsilon_to: 0.6,
            epsilon_steps: 56,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<ParamsBlock>,
    pub xi: Option<f64>,
    pub xi_range: Option<XiRange>,
    pub initial: Option<InitialBlock>,
    pub grid: Option<GridSpec>,
    pub bracket: Option<BracketBlock>,
    pub regime: Option<RegimeBlock>,
    pub integrator: Option<IntegratorSettings>,
    pub manifold: Option<ManifoldSettings>,
    pub output: Option<OutputBlock>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if cfg.xi.is_some() && cfg.xi_range.is_some() {
            return Err(ConfigError::Parse {
                path: path.to_path_buf(),
                message: "set either `xi` or `[xi_range]`, not both".into(),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

/// Values given on the command line; each one wins over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub xi: Option<f64>,
    pub xi_from: Option<f64>,
    pub xi_to: Option<f64>,
    pub xi_steps: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_time: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSpec {
    Scalar(f64),
    Range(XiRange),
}

/// Configuration after applying flag > file > default.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    /// Model constants with ξ set to the scalar value, or 0 for a range.
    pub params: ModelParams,
    pub xi: Option<XiSpec>,
    pub initial: Option<State>,
    pub grid: GridSpec,
    pub bracket: Option<(f64, f64)>,
    pub regime: RegimeBlock,
    pub integrator: IntegratorSettings,
    pub manifold: ManifoldSettings,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn default_grid() -> GridSpec {
    GridSpec {
        x_min: 0.1,
        x_max: 15.0,
        y_min: 0.1,
        y_max: 10.0,
        nx: 40,
        ny: 40,
    }
}

pub fn resolve(cfg: &RunConfig, o: &Overrides) -> Result<Resolved, ConfigError> {
    let file = cfg.params.clone().unwrap_or_default();
    let mut missing = Vec::new();
    let mut pick = |name: &'static str, flag: Option<f64>, file: Option<f64>| {
        let v = flag.or(file);
        if v.is_none() {
            missing.push(name);
        }
        v.unwrap_or(f64::NAN)
    };
    let alpha = pick("alpha", o.alpha, file.alpha);
    let beta = pick("beta", o.beta, file.beta);
    let delta = pick("delta", o.delta, file.delta);
    let epsilon = pick("epsilon", o.epsilon, file.epsilon);
    let k = pick("k", o.k, file.k);
    if !missing.is_empty() {
        return Err(ConfigError::Invalid(format!(
            "missing model parameter(s) {}: set them under [params] in the config file or with --{}",
            missing.join(", "),
            missing[0]
        )));
    }

    let xi = match (o.xi, o.xi_from, o.xi_to, o.xi_steps) {
        (Some(x), None, None, None) => Some(XiSpec::Scalar(x)),
        (Some(_), _, _, _) => {
            return Err(ConfigError::Invalid(
                "--xi cannot be combined with --xi-from/--xi-to/--xi-steps".into(),
            ))
        }
        (None, f, t, s) if f.is_some() || t.is_some() || s.is_some() => {
            let base = cfg.xi_range;
            let from = f.or(base.map(|r| r.from));
            let to = t.or(base.map(|r| r.to));
            let steps = s.or(base.map(|r| r.steps));
            match (from, to, steps) {
                (Some(from), Some(to), Some(steps)) => {
                    Some(XiSpec::Range(XiRange { from, to, steps }))
                }
                _ => {
                    return Err(ConfigError::Invalid(
                        "an xi range needs from, to and steps".into(),
                    ))
                }
            }
        }
        _ => match (cfg.xi, cfg.xi_range) {
            (Some(x), _) => Some(XiSpec::Scalar(x)),
            (None, Some(r)) => Some(XiSpec::Range(r)),
            (None, None) => None,
        },
    };

    let xi_value = match xi {
        Some(XiSpec::Scalar(x)) => x,
        _ => 0.0,
    };
    let params = ModelParams::new(alpha, beta, delta, epsilon, xi_value, k)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let mut integrator = cfg.integrator.unwrap_or_default();
    if let Some(v) = o.rel_tol {
        integrator.rel_tol = v;
    }
    if let Some(v) = o.abs_tol {
        integrator.abs_tol = v;
    }
    if let Some(v) = o.max_time {
        integrator.max_time = v;
    }
    integrator
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let out = cfg.output.clone().unwrap_or_default();
    Ok(Resolved {
        params,
        xi,
        initial: cfg.initial.map(|i| State::new(i.x, i.y)),
        grid: cfg.grid.unwrap_or_else(default_grid),
        bracket: cfg.bracket.map(|b| (b.lo, b.hi)),
        regime: cfg.regime.unwrap_or_default(),
        integrator,
        manifold: cfg.manifold.unwrap_or_default(),
        output: o.output.clone().or(out.path),
        format: o.format.or(out.format),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = r#"
xi = 2.2
[params]
alpha = 0.1
beta = 0.319
delta = 0.3
epsilon = 0.322
k = 15.0
[integrator]
rel_tol = 1e-9
[output]
format = "json"
path = "from_file.json"
"#;

    fn parse(s: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(s, Path::new("test.toml"))
    }

    #[test]
    fn file_values_used() {
        let r = resolve(&parse(FILE).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(r.params.xi(), 2.2);
        assert_eq!(r.integrator.rel_tol, 1e-9);
        assert_eq!(r.integrator.abs_tol, IntegratorSettings::default().abs_tol);
        assert_eq!(r.format, Some(Format::Json));
        assert_eq!(r.output, Some(PathBuf::from("from_file.json")));
        assert_eq!(r.grid, default_grid());
    }

    #[test]
    fn flags_win_per_field() {
        let o = Overrides {
            beta: Some(0.4),
            xi: Some(1.0),
            rel_tol: Some(1e-7),
            format: Some(Format::Csv),
            output: Some("flag.csv".into()),
            ..Default::default()
        };
        let r = resolve(&parse(FILE).unwrap(), &o).unwrap();
        assert_eq!(r.params.beta(), 0.4);
        assert_eq!(r.params.alpha(), 0.1);
        assert_eq!(r.params.xi(), 1.0);
        assert_eq!(r.integrator.rel_tol, 1e-7);
        assert_eq!(r.format, Some(Format::Csv));
        assert_eq!(r.output, Some(PathBuf::from("flag.csv")));
    }

    #[test]
    fn empty_file_reports_schema() {
        let err = resolve(&parse("").unwrap(), &Overrides::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha") && msg.contains("[params]"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse("gamma = 1.0").is_err());
        assert!(parse("[params]\ngamma = 1.0").is_err());
        assert!(parse("[integrator]\nrtol = 1.0").is_err());
    }

    #[test]
    fn scalar_and_range_exclusive() {
        let s = "xi = 1.0\n[xi_range]\nfrom = 0.5\nto = 3.0\nsteps = 10\n";
        assert!(parse(s).is_err());
    }

    #[test]
    fn range_from_flags_and_file() {
        let s = "[params]\nalpha=0.1\nbeta=0.319\ndelta=0.3\nepsilon=0.322\nk=15\n[xi_range]\nfrom = 0.5\nto = 3.0\nsteps = 10\n";
        let o = Overrides {
            xi_steps: Some(20),
            ..Default::default()
        };
        let r = resolve(&parse(s).unwrap(), &o).unwrap();
        assert_eq!(
            r.xi,
            Some(XiSpec::Range(XiRange {
                from: 0.5,
                to: 3.0,
                steps: 20
            }))
        );
    }

    #[test]
    fn invalid_parameter_is_config_error() {
        let s = FILE.replace("beta = 0.319", "beta = 0.2");
        assert!(matches!(
            resolve(&parse(&s).unwrap(), &Overrides::default()),
            Err(ConfigError::Invalid(_))
        ));
    }
}
