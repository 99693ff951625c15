//! JSON problem configuration.
//!
//! ```json
//! {
//!   "market": { "r": 0.02, "mu_hat": [0.08], "cov": [[0.04]] },
//!   "ambiguity": { "epsilon": 0.1, "vol": "none" },
//!   "preferences": { "rho": 0.05, "R": 2.0, "horizon": "infinite" },
//!   "sim": { "n_paths": 10000, "seed": 1 },
//!   "oracle": { "n_samples": 100000 }
//! }
//! ```
//!
//! The market is either inline (`r`, `mu_hat`, `cov`) or estimated from
//! `returns_csv` with `periods_per_year` and `r`. A relative CSV path is
//! resolved against the config file's directory. `vol` is `"none"`,
//! `{"box": {"lower": [..], "upper": [..]}}`, `{"cap": {"lambda_bar_sq": x}}`
//! or `{"frobenius": {"delta": x}}`; `horizon` is `"infinite"` or
//! `{"T": years, "A": bequest}`.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use robust_merton::oracle::OracleConfig;
use robust_merton::sim::{Scheme, SimConfig};
use robust_merton::{
    validate, AmbiguityModel, Covariance, Horizon, MarketModel, Preferences, ValidatedProblem, VolAmbiguity,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::estimate::estimate_market;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub market: MarketSpec,
    pub ambiguity: AmbiguitySpec,
    pub preferences: PreferencesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_hat: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods_per_year: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguitySpec {
    pub epsilon: f64,
    #[serde(default)]
    pub vol: VolSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolSpec {
    #[default]
    None,
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Cap {
        lambda_bar_sq: f64,
    },
    Frobenius {
        delta: f64,
    },
}

impl VolSpec {
    pub fn to_model(&self) -> VolAmbiguity {
        match self {
            VolSpec::None => VolAmbiguity::None,
            VolSpec::Box { lower, upper } => VolAmbiguity::DiagonalBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            VolSpec::Cap { lambda_bar_sq } => VolAmbiguity::EigenvalueCap {
                lambda_bar_sq: *lambda_bar_sq,
            },
            VolSpec::Frobenius { delta } => VolAmbiguity::FrobeniusBall { delta: *delta },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferencesSpec {
    pub rho: f64,
    #[serde(rename = "R")]
    pub risk_aversion: f64,
    pub horizon: HorizonSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonSpec {
    Named(String),
    Finite {
        #[serde(rename = "T")]
        t: f64,
        #[serde(rename = "A")]
        bequest: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub n_paths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points_per_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Truncation point for infinite-horizon simulation when none is given.
pub const DEFAULT_TRUNCATION: f64 = 200.0;

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ProblemConfig,
    pub problem: ValidatedProblem,
    pub sim: Option<SimConfig>,
    pub oracle: OracleConfig,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config: ProblemConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve(config, base).map_err(|e| match e {
        CliError::Usage(message) => CliError::Config {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn resolve(config: ProblemConfig, base: &Path) -> CliResult<Loaded> {
    let market = build_market(&config.market, base)?;
    let prefs = build_prefs(&config.preferences)?;
    let ambiguity = AmbiguityModel {
        epsilon: config.ambiguity.epsilon,
        vol: config.ambiguity.vol.to_model(),
    };
    let problem = validate(market, ambiguity, prefs)?;
    let sim = config.sim.as_ref().map(|s| build_sim(s, &prefs)).transpose()?;
    let oracle = build_oracle(config.oracle.as_ref())?;
    Ok(Loaded {
        config,
        problem,
        sim,
        oracle,
    })
}

fn build_market(spec: &MarketSpec, base: &Path) -> CliResult<MarketModel> {
    let r = spec
        .r
        .ok_or_else(|| CliError::Usage("market.r is required".into()))?;
    let inline = spec.mu_hat.is_some() || spec.cov.is_some();
    let estimated = spec.returns_csv.is_some() || spec.periods_per_year.is_some();
    match (inline, estimated) {
        (true, true) => Err(CliError::Usage(
            "market must be either inline (mu_hat, cov) or estimated (returns_csv, periods_per_year), not both".into(),
        )),
        (false, false) => Err(CliError::Usage("market needs mu_hat and cov, or returns_csv".into())),
        (true, false) => {
            let mu = spec
                .mu_hat
                .as_ref()
                .ok_or_else(|| CliError::Usage("market.mu_hat is required with market.cov".into()))?;
            let rows = spec
                .cov
                .as_ref()
                .ok_or_else(|| CliError::Usage("market.cov is required with market.mu_hat".into()))?;
            let cov = Covariance::from_rows(rows)?;
            Ok(MarketModel::with_covariance(r, DVector::from_vec(mu.clone()), cov)?)
        }
        (false, true) => {
            let csv = spec
                .returns_csv
                .as_ref()
                .ok_or_else(|| CliError::Usage("market.returns_csv is required".into()))?;
            let ppy = spec
                .periods_per_year
                .ok_or_else(|| CliError::Usage("market.periods_per_year is required".into()))?;
            let path = if csv.is_absolute() { csv.clone() } else { base.join(csv) };
            estimate_market(&path, ppy, r)
        }
    }
}

fn build_prefs(spec: &PreferencesSpec) -> CliResult<Preferences> {
    match &spec.horizon {
        HorizonSpec::Named(name) if name == "infinite" => Ok(Preferences::infinite(spec.rho, spec.risk_aversion)),
        HorizonSpec::Named(other) => Err(CliError::Usage(format!(
            "horizon must be \"infinite\" or {{\"T\": .., \"A\": ..}}, got \"{other}\""
        ))),
        HorizonSpec::Finite { t, bequest } => Ok(Preferences::finite(spec.rho, spec.risk_aversion, *t, *bequest)),
    }
}

fn build_sim(spec: &SimSpec, prefs: &Preferences) -> CliResult<SimConfig> {
    let defaults = SimConfig::default();
    let t_max = match (prefs.horizon, spec.t_max) {
        (Horizon::Finite { t, .. }, Some(given)) if given != t => {
            return Err(CliError::Usage(format!(
                "sim.t_max = {given} differs from the horizon T = {t}"
            )))
        }
        (Horizon::Finite { t, .. }, _) => t,
        (Horizon::Infinite, given) => given.unwrap_or(DEFAULT_TRUNCATION),
    };
    let scheme = match &spec.scheme {
        Some(s) => s.parse::<Scheme>()?,
        None => Scheme::ExactLog,
    };
    let cfg = SimConfig {
        n_paths: spec.n_paths,
        dt: spec.dt.unwrap_or(defaults.dt),
        t_max,
        seed: spec.seed,
        scheme,
        record_stride: spec.record_stride.unwrap_or(defaults.record_stride),
        w0: spec.w0.unwrap_or(1.0),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn build_oracle(spec: Option<&OracleSpec>) -> CliResult<OracleConfig> {
    let d = OracleConfig::default();
    let cfg = match spec {
        None => d,
        Some(s) => OracleConfig {
            n_samples: s.n_samples.unwrap_or(d.n_samples),
            grid_points_per_dim: s.grid_points_per_dim.unwrap_or(d.grid_points_per_dim),
            seed: s.seed.unwrap_or(d.seed),
            tolerance: s.tolerance.unwrap_or(d.tolerance),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Inline market spec for a model, handy for writing configs.
pub fn inline_market(market: &MarketModel) -> MarketSpec {
    let cov: &DMatrix<f64> = market.cov().matrix();
    MarketSpec {
        r: Some(market.r()),
        mu_hat: Some(market.mu_hat().iter().copied().collect()),
        cov: Some(cov.row_iter().map(|row| row.iter().copied().collect()).collect()),
        ..MarketSpec::default()
    }
}
