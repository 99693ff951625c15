//! Monte Carlo simulation of wealth under wealth-proportional controls.
//!
//! Paths are independent and each owns the normal stream keyed by its index,
//! so the ensemble does not depend on how paths are scheduled across threads.
//! The discounted consumption utility of every path is integrated on the full
//! time grid while it is simulated; only every `record_stride`-th point of
//! wealth and consumption is kept.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::RobustSolution;
use crate::model::{Covariance, Horizon, Preferences, ValidatedProblem};
use crate::oracle::sample_vol_set;
use crate::policy::{ConsumptionRule, Policy};
use crate::rng::{NormalStream, UniformStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Euler–Maruyama on the wealth level.
    Euler,
    /// Exact integration of log-wealth.
    ExactLog,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::ExactLog => "exact-log",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "euler" => Ok(Scheme::Euler),
            "exact-log" | "exactlog" => Ok(Scheme::ExactLog),
            _ => Err(Error::InvalidScheme(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    /// Horizon for finite problems, truncation point for infinite ones.
    pub t_max: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// Keep every `record_stride`-th grid point (the last is always kept).
    pub record_stride: usize,
    pub w0: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            dt: 1.0 / 2520.0,
            t_max: 200.0,
            seed: 0,
            scheme: Scheme::ExactLog,
            record_stride: 252,
            w0: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidConfig(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !(self.w0.is_finite() && self.w0 > 0.0) {
            return Err(Error::InvalidConfig(format!("w0 must be > 0, got {}", self.w0)));
        }
        Ok(())
    }

    /// Number of steps; `dt` is shrunk slightly when it does not divide `t_max`.
    pub fn n_steps(&self) -> usize {
        ((self.t_max / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_max / self.n_steps() as f64
    }
}

/// Constant drift and covariance generating the paths.
#[derive(Debug, Clone)]
pub struct Measure {
    pub mu: DVector<f64>,
    pub cov: Covariance,
    pub tag: String,
}

impl Measure {
    pub fn new(mu: DVector<f64>, cov: Covariance, tag: impl Into<String>) -> Result<Self> {
        if mu.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                what: "measure drift vs covariance",
                expected: cov.dim(),
                found: mu.len(),
            });
        }
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("measure drift".into()));
        }
        Ok(Self {
            mu,
            cov,
            tag: tag.into(),
        })
    }

    /// The estimated market.
    pub fn nominal(problem: &ValidatedProblem) -> Self {
        Self {
            mu: problem.market().mu_hat().clone(),
            cov: problem.market().cov().clone(),
            tag: "nominal".into(),
        }
    }

    /// The adversary's choice against the robust controls.
    pub fn worst(solution: &RobustSolution) -> Result<Self> {
        let mu = solution
            .worst_mu()
            .ok_or_else(|| Error::InvalidConfig("worst-case measure of an ill-posed solution".into()))?
            .clone();
        Ok(Self {
            mu,
            cov: solution.worst_cov().clone(),
            tag: "worst".into(),
        })
    }
}

/// Per-step coefficients of wealth under a measure and a constant portfolio.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub r: f64,
    /// `π'(μ − r𝟏)`.
    pub excess: f64,
    /// `L'π` with `LL' = Σ`: loading of `dw/w` on independent normals.
    pub loading: DVector<f64>,
    /// `π'Σπ`.
    pub variance: f64,
}

impl Dynamics {
    pub fn new(r: f64, pi: &DVector<f64>, measure: &Measure) -> Result<Self> {
        if pi.len() != measure.mu.len() {
            return Err(Error::DimensionMismatch {
                what: "portfolio vs measure",
                expected: measure.mu.len(),
                found: pi.len(),
            });
        }
        let loading = measure.cov.factor().transpose() * pi;
        Ok(Self {
            r,
            excess: pi.dot(&measure.mu.add_scalar(-r)),
            variance: loading.norm_squared(),
            loading,
        })
    }

    /// Drift of log-wealth before consumption.
    pub fn log_growth(&self) -> f64 {
        self.r + self.excess - 0.5 * self.variance
    }

    /// One Euler step of `dw = w(r + excess − rate)dt + w loading'dW`.
    pub fn euler_step(&self, w: f64, rate: f64, dt: f64, z: &[f64]) -> f64 {
        let shock: f64 = self.loading.iter().zip(z).map(|(b, z)| b * z).sum();
        w + w * (self.r + self.excess - rate) * dt + w * shock * dt.sqrt()
    }

    /// One exact step of log-wealth given the consumed fraction `∫rate ds`.
    pub fn exact_log_step(&self, log_w: f64, consumed: f64, dt: f64, z: &[f64]) -> f64 {
        let shock: f64 = self.loading.iter().zip(z).map(|(b, z)| b * z).sum();
        log_w + self.log_growth() * dt - consumed + shock * dt.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct PathEnsemble {
    /// Recorded times.
    pub times: Vec<f64>,
    /// Row-major `n_paths × times.len()`; NaN after a rejected Euler step.
    pub wealth: Vec<f64>,
    /// Consumption rate times wealth, same layout.
    pub consumption: Vec<f64>,
    /// Trapezoidal `∫ e^{−ρt} c^{1−R}/(1−R) dt` on the full grid, per path.
    pub consumption_utility: Vec<f64>,
    /// Paths whose Euler wealth left `(0, ∞)`.
    pub rejected: Vec<bool>,
    pub n_paths: usize,
    pub measure_tag: String,
    pub seed: u64,
    pub scheme: Scheme,
    pub t_max: f64,
    pub dt: f64,
    pub w0: f64,
    pub rho: f64,
    pub risk_aversion: f64,
    pub consumption_rule: ConsumptionRule,
    pub dynamics: Dynamics,
}

impl PathEnsemble {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn wealth_path(&self, path: usize) -> &[f64] {
        let m = self.n_times();
        &self.wealth[path * m..(path + 1) * m]
    }

    pub fn consumption_path(&self, path: usize) -> &[f64] {
        let m = self.n_times();
        &self.consumption[path * m..(path + 1) * m]
    }

    pub fn terminal_wealth(&self, path: usize) -> f64 {
        *self.wealth_path(path).last().expect("at least two recorded times")
    }

    pub fn n_rejected(&self) -> usize {
        self.rejected.iter().filter(|r| **r).count()
    }

    /// Wealth at recorded time index `k` across retained paths.
    pub fn cross_section(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths)
            .filter(|p| !self.rejected[*p])
            .map(|p| self.wealth_path(p)[k])
            .collect()
    }

    /// Full wealth matrix (paths × times).
    pub fn wealth_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_paths, self.n_times(), &self.wealth)
    }
}

/// Simulates the robust optimal controls of `solution`.
pub fn simulate_solution(
    problem: &ValidatedProblem,
    solution: &RobustSolution,
    measure: &Measure,
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    simulate(problem, &solution.policy()?, measure, cfg)
}

/// Simulates wealth under `policy` with returns drawn from `measure`.
pub fn simulate(
    problem: &ValidatedProblem,
    policy: &Policy,
    measure: &Measure,
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    cfg.validate()?;
    if measure.mu.len() != problem.market().n() {
        return Err(Error::DimensionMismatch {
            what: "measure vs market",
            expected: problem.market().n(),
            found: measure.mu.len(),
        });
    }
    let dynamics = Dynamics::new(problem.market().r(), &policy.pi, measure)?;
    let prefs = problem.prefs();
    let n = measure.mu.len();
    let steps = cfg.n_steps();
    let dt = cfg.effective_dt();
    let sqrt_dt = dt.sqrt();
    let one_minus = 1.0 - prefs.risk_aversion;
    let rule = &policy.consumption;

    let mut record = (0..=steps).step_by(cfg.record_stride).collect::<Vec<_>>();
    if *record.last().unwrap() != steps {
        record.push(steps);
    }
    let times: Vec<f64> = record.iter().map(|k| *k as f64 * dt).collect();
    let m = record.len();

    let rates: Vec<f64> = (0..=steps).map(|k| rule.rate(k as f64 * dt)).collect();
    // Trapezoidal weights of e^{−ρt} rate^{1−R}/(1−R); multiplied by w^{1−R}.
    let weights: Vec<f64> = rates
        .iter()
        .enumerate()
        .map(|(k, rate)| {
            if *rate <= 0.0 {
                return 0.0;
            }
            let end = if k == 0 || k == steps { 0.5 } else { 1.0 };
            end * dt * (-prefs.rho * k as f64 * dt).exp() * rate.powf(one_minus) / one_minus
        })
        .collect();
    let log_increments: Vec<f64> = (0..steps)
        .map(|k| dynamics.log_growth() * dt - rule.cumulative(k as f64 * dt, (k + 1) as f64 * dt))
        .collect();
    let shock = |z: &[f64]| -> f64 { dynamics.loading.iter().zip(z).map(|(b, z)| b * z).sum::<f64>() * sqrt_dt };

    let mut wealth = vec![0.0; cfg.n_paths * m];
    let mut consumption = vec![0.0; cfg.n_paths * m];
    let mut utility = vec![0.0; cfg.n_paths];
    let mut rejected = vec![false; cfg.n_paths];

    wealth
        .par_chunks_mut(m)
        .zip(consumption.par_chunks_mut(m))
        .zip(utility.par_iter_mut().zip(rejected.par_iter_mut()))
        .enumerate()
        .for_each(|(path, ((w_row, c_row), (util, rej)))| {
            let mut stream = NormalStream::new(cfg.seed, path as u64);
            let mut z = vec![0.0; n];
            let mut log_w = cfg.w0.ln();
            let mut w = cfg.w0;
            let mut acc = weights[0] * (one_minus * log_w).exp();
            w_row[0] = w;
            c_row[0] = rates[0] * w;
            let mut next = 1;
            for k in 0..steps {
                stream.fill(&mut z);
                match cfg.scheme {
                    Scheme::ExactLog => {
                        log_w += log_increments[k] + shock(&z);
                        w = log_w.exp();
                    }
                    Scheme::Euler => {
                        w = dynamics.euler_step(w, rates[k], dt, &z);
                        if !(w > 0.0 && w.is_finite()) {
                            *rej = true;
                            w_row[next..].fill(f64::NAN);
                            c_row[next..].fill(f64::NAN);
                            *util = f64::NAN;
                            return;
                        }
                        log_w = w.ln();
                    }
                }
                if weights[k + 1] != 0.0 {
                    acc += weights[k + 1] * (one_minus * log_w).exp();
                }
                if record[next] == k + 1 {
                    w_row[next] = w;
                    c_row[next] = rates[k + 1] * w;
                    next += 1;
                }
            }
            *util = acc;
        });

    Ok(PathEnsemble {
        times,
        wealth,
        consumption,
        consumption_utility: utility,
        rejected,
        n_paths: cfg.n_paths,
        measure_tag: measure.tag.clone(),
        seed: cfg.seed,
        scheme: cfg.scheme,
        t_max: cfg.t_max,
        dt,
        w0: cfg.w0,
        rho: prefs.rho,
        risk_aversion: prefs.risk_aversion,
        consumption_rule: rule.clone(),
        dynamics,
    })
}

/// Fixed-order pairwise sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Expected utility beyond the truncation point of an infinite-horizon run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Finite horizon, or nothing is consumed.
    None,
    /// Analytic value of the omitted integral.
    Finite(f64),
    /// Expected discounted utility grows at `rate`: no finite value exists.
    Divergent { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedUtility {
    /// Sample mean of the per-path utility over the simulated horizon.
    pub estimate: f64,
    pub std_error: f64,
    pub tail: Tail,
    pub n_used: usize,
}

impl RealizedUtility {
    /// Estimate including the tail, when it is finite.
    pub fn total(&self) -> f64 {
        match self.tail {
            Tail::Finite(t) => self.estimate + t,
            _ => self.estimate,
        }
    }

    /// Whether `value` lies within `k` standard errors of the estimate,
    /// allowing for the omitted tail on its side.
    pub fn brackets(&self, value: f64, k: f64) -> bool {
        let (a, b) = match self.tail {
            Tail::Finite(t) => (self.estimate.min(self.estimate + t), self.estimate.max(self.estimate + t)),
            _ => (self.estimate, self.estimate),
        };
        value >= a - k * self.std_error && value <= b + k * self.std_error
    }
}

fn check_prefs(ensemble: &PathEnsemble, prefs: &Preferences) -> Result<()> {
    if ensemble.rho != prefs.rho || ensemble.risk_aversion != prefs.risk_aversion {
        return Err(Error::PreferenceMismatch(format!(
            "ensemble integrated with rho = {}, R = {}; asked for rho = {}, R = {}",
            ensemble.rho, ensemble.risk_aversion, prefs.rho, prefs.risk_aversion
        )));
    }
    Ok(())
}

/// Per-path realized utility: consumption utility plus, on a finite horizon,
/// the bequest `A w_T^{1−R}/(1−R)`. Rejected paths are skipped.
pub fn path_utilities(ensemble: &PathEnsemble, prefs: &Preferences) -> Result<Vec<f64>> {
    check_prefs(ensemble, prefs)?;
    let bequest = match prefs.horizon {
        Horizon::Finite { t, bequest } => {
            if (ensemble.t_max - t).abs() > 1e-12 * t.max(1.0) {
                return Err(Error::HorizonMismatch(format!(
                    "ensemble ends at {} but the horizon is {t}",
                    ensemble.t_max
                )));
            }
            Some(bequest)
        }
        Horizon::Infinite => None,
    };
    Ok((0..ensemble.n_paths)
        .filter(|p| !ensemble.rejected[*p])
        .map(|p| {
            let mut u = ensemble.consumption_utility[p];
            if let Some(a) = bequest {
                u += a * prefs.utility(ensemble.terminal_wealth(p));
            }
            u
        })
        .collect())
}

/// Mean realized utility with its standard error; on an infinite horizon the
/// analytic tail beyond the truncation point is reported alongside.
pub fn realized_utility(ensemble: &PathEnsemble, prefs: &Preferences) -> Result<RealizedUtility> {
    let utilities = path_utilities(ensemble, prefs)?;
    if utilities.is_empty() {
        return Err(Error::InvalidConfig("every path was rejected".into()));
    }
    let (estimate, std_error) = mean_and_se(&utilities);
    let tail = match prefs.horizon {
        Horizon::Finite { .. } => Tail::None,
        Horizon::Infinite => tail_beyond(ensemble, prefs),
    };
    Ok(RealizedUtility {
        estimate,
        std_error,
        tail,
        n_used: utilities.len(),
    })
}

/// `∫_{t_max}^∞ e^{−ρt} E[c_t^{1−R}]/(1−R) dt` for consumption `κ w_t`, using
/// `E[w_t^{1−R}] = w₀^{1−R} exp(((1−R)m + (1−R)²v/2) t)` for log-wealth drift
/// `m` and variance rate `v`.
fn tail_beyond(ensemble: &PathEnsemble, prefs: &Preferences) -> Tail {
    let kappa = match ensemble.consumption_rule {
        ConsumptionRule::Proportional(k) if k > 0.0 => k,
        _ => return Tail::None,
    };
    let one_minus = 1.0 - prefs.risk_aversion;
    let m = ensemble.dynamics.log_growth() - kappa;
    let v = ensemble.dynamics.variance;
    let decay = prefs.rho - one_minus * m - one_minus * one_minus * v / 2.0;
    if decay <= 0.0 {
        return Tail::Divergent { rate: -decay };
    }
    let scale = kappa.powf(one_minus) * ensemble.w0.powf(one_minus) / one_minus;
    Tail::Finite(scale * (-decay * ensemble.t_max).exp() / decay)
}

#[derive(Debug, Clone)]
pub struct StressRow {
    pub tag: String,
    pub mu: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub utility: RealizedUtility,
    /// Standard error of `utility − worst utility`, paired path by path.
    pub paired_se: f64,
}

#[derive(Debug, Clone)]
pub struct StressTable {
    /// Row 0 is the worst-case measure.
    pub rows: Vec<StressRow>,
}

impl StressTable {
    pub fn worst(&self) -> &StressRow {
        &self.rows[0]
    }

    /// Row with the smallest total realized utility.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, row) in self.rows.iter().enumerate() {
            if row.utility.total() < self.rows[best].utility.total() {
                best = i;
            }
        }
        best
    }

    /// Whether the worst-case measure's utility is within `k` paired standard
    /// errors of the minimum across all measures.
    pub fn worst_is_minimal(&self, k: f64) -> bool {
        let min = &self.rows[self.argmin()];
        self.worst().utility.total() <= min.utility.total() + k * min.paired_se
    }
}

/// Realized utility of the robust controls under the worst-case measure and
/// under `n_measures` constant alternatives: covariances sampled from the
/// volatility set and drifts from the ellipsoid around them. All measures
/// share the same normal draws.
pub fn ambiguity_stress(
    problem: &ValidatedProblem,
    solution: &RobustSolution,
    cfg: &SimConfig,
    n_measures: usize,
) -> Result<StressTable> {
    let policy = solution.policy()?;
    let prefs = problem.prefs();
    let n = problem.market().n();
    let eps = problem.epsilon();
    let mu_hat = problem.market().mu_hat();

    let mut measures = vec![Measure::worst(solution)?];
    let mut normals = NormalStream::new(cfg.seed ^ 0x5712E55, u64::MAX);
    let mut uniforms = UniformStream::new(cfg.seed ^ 0x5712E55, u64::MAX);
    for i in 0..n_measures {
        let cov_m = sample_vol_set(problem, &mut normals, &mut uniforms, false);
        let cov = Covariance::new(cov_m)?;
        let u = DVector::from_fn(n, |_, _| normals.next_normal());
        let norm = u.norm();
        let radius = eps * uniforms.next_f64().powf(1.0 / n as f64);
        let dir = if norm > 0.0 { u / norm } else { DVector::zeros(n) };
        let mu = mu_hat + crate::oracle::sym_sqrt(cov.matrix()) * dir * radius;
        measures.push(Measure::new(mu, cov, format!("sample-{i}"))?);
    }

    let mut per_path = Vec::with_capacity(measures.len());
    let mut rows = Vec::with_capacity(measures.len());
    for measure in &measures {
        let ens = simulate(problem, &policy, measure, cfg)?;
        let utility = realized_utility(&ens, prefs)?;
        // keep all paths aligned for pairing: rejected paths become NaN
        let util: Vec<f64> = (0..ens.n_paths)
            .map(|p| {
                if ens.rejected[p] {
                    f64::NAN
                } else {
                    let mut u = ens.consumption_utility[p];
                    if let Horizon::Finite { bequest, .. } = prefs.horizon {
                        u += bequest * prefs.utility(ens.terminal_wealth(p));
                    }
                    u
                }
            })
            .collect();
        per_path.push(util);
        rows.push(StressRow {
            tag: measure.tag.clone(),
            mu: measure.mu.clone(),
            cov: measure.cov.matrix().clone(),
            utility,
            paired_se: 0.0,
        });
    }
    for (i, row) in rows.iter_mut().enumerate() {
        let diffs: Vec<f64> = per_path[i]
            .iter()
            .zip(&per_path[0])
            .map(|(a, b)| a - b)
            .filter(|d| d.is_finite())
            .collect();
        row.paired_se = if diffs.len() >= 2 { mean_and_se(&diffs).1 } else { f64::NAN };
    }
    Ok(StressTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, AmbiguityModel, MarketModel};

    fn problem(eps: f64, prefs: Preferences) -> ValidatedProblem {
        validate(
            MarketModel::scalar(0.02, 0.08, 0.04).unwrap(),
            AmbiguityModel::drift_only(eps),
            prefs,
        )
        .unwrap()
    }

    fn cfg(n_paths: usize, t_max: f64, dt: f64) -> SimConfig {
        SimConfig {
            n_paths,
            dt,
            t_max,
            seed: 42,
            scheme: Scheme::ExactLog,
            record_stride: 10,
            w0: 1.0,
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("euler".parse::<Scheme>().unwrap(), Scheme::Euler);
        assert_eq!("ExactLog".parse::<Scheme>().unwrap(), Scheme::ExactLog);
        assert_eq!("exact_log".parse::<Scheme>().unwrap(), Scheme::ExactLog);
        assert!(matches!("milstein".parse::<Scheme>(), Err(Error::InvalidScheme(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        for bad in [
            SimConfig { n_paths: 0, ..SimConfig::default() },
            SimConfig { dt: 0.0, ..SimConfig::default() },
            SimConfig { t_max: -1.0, ..SimConfig::default() },
            SimConfig { record_stride: 0, ..SimConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
        let c = cfg(1, 1.0, 1.0 / 2520.0);
        assert_eq!(c.n_steps(), 2520);
    }

    #[test]
    fn pure_savings_is_deterministic() {
        let p = problem(0.35, Preferences::infinite(0.05, 2.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let ens = simulate_solution(&p, &sol, &Measure::worst(&sol).unwrap(), &cfg(50, 3.0, 0.01)).unwrap();
        let gamma = 0.035;
        for path in 0..50 {
            for (k, t) in ens.times.iter().enumerate() {
                let exact = ((0.02 - gamma) * t).exp();
                assert!((ens.wealth_path(path)[k] - exact).abs() < 1e-12 * exact);
            }
        }
    }

    #[test]
    fn reproducible_and_recorded_grid() {
        let p = problem(0.1, Preferences::infinite(0.05, 2.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let m = Measure::worst(&sol).unwrap();
        let c = cfg(64, 1.0, 0.01);
        let a = simulate_solution(&p, &sol, &m, &c).unwrap();
        let b = simulate_solution(&p, &sol, &m, &c).unwrap();
        assert_eq!(a.wealth, b.wealth);
        assert_eq!(a.consumption_utility, b.consumption_utility);
        assert_eq!(a.times.len(), 11);
        assert_eq!(*a.times.last().unwrap(), 1.0);
    }

    #[test]
    fn exact_log_drift_under_worst_measure() {
        let p = problem(0.1, Preferences::infinite(0.05, 2.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let c = SimConfig {
            record_stride: 1000,
            ..cfg(20_000, 10.0, 0.1)
        };
        let ens = simulate_solution(&p, &sol, &Measure::worst(&sol).unwrap(), &c).unwrap();
        let rates: Vec<f64> = (0..ens.n_paths).map(|i| ens.terminal_wealth(i).ln() / 10.0).collect();
        let (mean, se) = mean_and_se(&rates);
        assert!((mean + 0.005).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn euler_base_case_stays_positive() {
        let p = problem(0.1, Preferences::infinite(0.05, 2.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let c = SimConfig {
            scheme: Scheme::Euler,
            record_stride: 2520,
            ..cfg(200, 1.0, 1.0 / 2520.0)
        };
        let ens = simulate_solution(&p, &sol, &Measure::worst(&sol).unwrap(), &c).unwrap();
        assert_eq!(ens.n_rejected(), 0);
    }

    #[test]
    fn euler_rejection_is_flagged() {
        let p = problem(0.1, Preferences::infinite(0.05, 2.0));
        let policy = Policy::new(DVector::from_element(1, 40.0), ConsumptionRule::Proportional(0.04));
        let c = SimConfig {
            scheme: Scheme::Euler,
            ..cfg(200, 1.0, 0.1)
        };
        let ens = simulate(&p, &policy, &Measure::nominal(&p), &c).unwrap();
        assert!(ens.n_rejected() > 0);
        let r = realized_utility(&ens, p.prefs()).unwrap();
        assert_eq!(r.n_used, 200 - ens.n_rejected());
        assert!(r.estimate.is_finite());
    }

    #[test]
    fn bequest_only() {
        let p = problem(0.1, Preferences::finite(0.05, 2.0, 1.0, 1.0));
        let policy = Policy::new(DVector::from_element(1, 0.5), ConsumptionRule::Zero);
        let ens = simulate(&p, &policy, &Measure::nominal(&p), &cfg(1000, 1.0, 0.01)).unwrap();
        let r = realized_utility(&ens, p.prefs()).unwrap();
        let direct: Vec<f64> = (0..1000).map(|i| -1.0 / ens.terminal_wealth(i)).collect();
        assert!((r.estimate - mean_and_se(&direct).0).abs() < 1e-12);
        assert_eq!(r.tail, Tail::None);
    }

    #[test]
    fn horizon_and_preference_mismatch() {
        let p = problem(0.1, Preferences::finite(0.05, 2.0, 1.0, 1.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let ens = simulate_solution(&p, &sol, &Measure::nominal(&p), &cfg(10, 2.0, 0.01)).unwrap();
        assert!(matches!(
            realized_utility(&ens, p.prefs()),
            Err(Error::HorizonMismatch(_))
        ));
        let other = Preferences::finite(0.06, 2.0, 2.0, 1.0);
        assert!(matches!(
            realized_utility(&ens, &other),
            Err(Error::PreferenceMismatch(_))
        ));
    }

    #[test]
    fn tail_divergence_reported() {
        // consuming slowly with R < 1 in a generous market makes utility grow
        let p = problem(0.0, Preferences::infinite(0.01, 0.5));
        let policy = Policy::new(DVector::from_element(1, 1.0), ConsumptionRule::Proportional(0.001));
        let ens = simulate(&p, &policy, &Measure::nominal(&p), &cfg(10, 1.0, 0.1)).unwrap();
        let r = realized_utility(&ens, p.prefs()).unwrap();
        assert!(matches!(r.tail, Tail::Divergent { .. }));
    }

    #[test]
    fn stress_with_no_ambiguity_is_constant() {
        let p = problem(0.0, Preferences::finite(0.05, 2.0, 1.0, 1.0));
        let sol = RobustSolution::solve(&p).unwrap();
        let t = ambiguity_stress(&p, &sol, &cfg(500, 1.0, 0.01), 5).unwrap();
        assert_eq!(t.rows.len(), 6);
        for row in &t.rows {
            assert_eq!(row.utility.estimate, t.worst().utility.estimate);
        }
    }

    #[test]
    fn pairwise_sum_matches() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }
}
