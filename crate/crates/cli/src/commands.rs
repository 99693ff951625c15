//! The four subcommands. Each writes its report to `out` and returns the
//! process exit code: 0 success, 2 ill-posed problem or failed verification.
//! Input errors come back as `Err` and map to exit code 1.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use robust_merton::frobenius::worst_cov_frobenius;
use robust_merton::oracle::{
    divergence_exponent, ellipsoid_min_sampled, hjb_residual, minimax_gap, vol_objective_at, volset_min_sampled,
};
use robust_merton::rng::NormalStream;
use robust_merton::sim::{realized_utility, simulate, Measure, Tail};
use robust_merton::{
    worst_case_cov, worst_case_drift, Covariance, DivergenceWitness, Horizon, RobustSolution, ValidatedProblem,
    VolAmbiguity,
};
use serde::{Deserialize, Serialize};

use crate::config::{self, Loaded};
use crate::error::{CliError, CliResult};
use crate::output::{full, quantile, rows_of, short, short_mat, short_vec, vec_of, write_ensemble};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MATH: i32 = 2;

fn io_err(e: std::io::Error) -> CliError {
    CliError::write("<stdout>", e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!("unknown format '{other}' (text, json, csv)"))),
        }
    }
}

/// Everything `solve` reports. Absent fields are serialized as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub horizon: String,
    pub well_posed: bool,
    pub pi: Vec<f64>,
    pub merton_pi: Vec<f64>,
    pub shrink: f64,
    /// Consumption-to-wealth rate (infinite horizon).
    pub gamma_eps: Option<f64>,
    /// `g(0)`; initial consumption rate is `1/g(0)` (finite horizon).
    pub g0: Option<f64>,
    pub k_eps: Option<f64>,
    pub sharpe: f64,
    pub sharpe_eps_plus: f64,
    pub worst_mu: Vec<f64>,
    pub worst_cov: Vec<Vec<f64>>,
    pub value_at_w0_1: Option<f64>,
    pub divergence: Option<String>,
}

impl SolveOutput {
    pub fn from_solution(solution: &RobustSolution) -> Self {
        match solution {
            RobustSolution::Infinite(rep) => SolveOutput {
                horizon: "infinite".into(),
                well_posed: rep.well_posed,
                pi: vec_of(&rep.pi_eps),
                merton_pi: vec_of(&rep.merton_pi),
                shrink: rep.shrink,
                gamma_eps: Some(rep.gamma_eps),
                g0: None,
                k_eps: None,
                sharpe: rep.sharpe,
                sharpe_eps_plus: rep.sharpe_eps_plus,
                worst_mu: vec_of(&rep.worst_mu),
                worst_cov: rows_of(rep.worst_cov.matrix()),
                value_at_w0_1: rep.value_at(1.0).ok(),
                divergence: rep.divergence.as_ref().map(|w| w.to_string()),
            },
            RobustSolution::Finite(rep) => SolveOutput {
                horizon: "finite".into(),
                well_posed: true,
                pi: vec_of(&rep.pi_eps),
                merton_pi: vec_of(&rep.merton_pi),
                shrink: rep.shrink,
                gamma_eps: None,
                g0: Some(rep.g.eval(0.0)),
                k_eps: Some(rep.k_eps),
                sharpe: rep.sharpe,
                sharpe_eps_plus: rep.sharpe_eps_plus,
                worst_mu: vec_of(&rep.worst_mu),
                worst_cov: rows_of(rep.worst_cov.matrix()),
                value_at_w0_1: Some(rep.value_at(1.0)),
                divergence: None,
            },
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line("horizon", self.horizon.clone());
        line("well_posed", self.well_posed.to_string());
        line("pi", short_vec(&self.pi));
        line("merton_pi", short_vec(&self.merton_pi));
        line("shrink", short(self.shrink));
        if let Some(g) = self.gamma_eps {
            line("gamma_eps", short(g));
        }
        if let Some(g) = self.g0 {
            line("g0", short(g));
            line("consumption_rate_0", short(1.0 / g));
        }
        if let Some(k) = self.k_eps {
            line("k_eps", short(k));
        }
        line("sharpe", short(self.sharpe));
        line("sharpe_eps_plus", short(self.sharpe_eps_plus));
        line("worst_mu", short_vec(&self.worst_mu));
        line("worst_cov", short_mat(&self.worst_cov));
        line(
            "value_at_w0_1",
            self.value_at_w0_1.map_or_else(|| "undefined".to_string(), short),
        );
        if let Some(d) = &self.divergence {
            line("diagnostic", format!("gamma_eps <= 0, value is infinite; {d}"));
        }
        s
    }

    /// Long-format `field,value` CSV at full precision.
    pub fn csv(&self) -> String {
        let mut s = String::from("field,value\n");
        let mut put = |k: String, v: String| s.push_str(&format!("{k},{v}\n"));
        put("horizon".into(), self.horizon.clone());
        put("well_posed".into(), self.well_posed.to_string());
        for (i, x) in self.pi.iter().enumerate() {
            put(format!("pi[{i}]"), full(*x));
        }
        for (i, x) in self.merton_pi.iter().enumerate() {
            put(format!("merton_pi[{i}]"), full(*x));
        }
        put("shrink".into(), full(self.shrink));
        for (k, v) in [("gamma_eps", self.gamma_eps), ("g0", self.g0), ("k_eps", self.k_eps)] {
            if let Some(v) = v {
                put(k.into(), full(v));
            }
        }
        put("sharpe".into(), full(self.sharpe));
        put("sharpe_eps_plus".into(), full(self.sharpe_eps_plus));
        for (i, x) in self.worst_mu.iter().enumerate() {
            put(format!("worst_mu[{i}]"), full(*x));
        }
        for (i, row) in self.worst_cov.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                put(format!("worst_cov[{i}][{j}]"), full(*x));
            }
        }
        if let Some(v) = self.value_at_w0_1 {
            put("value_at_w0_1".into(), full(v));
        }
        s
    }
}

pub fn cmd_solve(config_path: &Path, format: Format, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = config::load(config_path)?;
    let solution = RobustSolution::solve(&loaded.problem)?;
    let report = SolveOutput::from_solution(&solution);
    let text = match format {
        Format::Text => report.text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::write("<stdout>", e))?;
            s.push('\n');
            s
        }
        Format::Csv => report.csv(),
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(if solution.well_posed() { EXIT_OK } else { EXIT_MATH })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Epsilon,
    Delta,
}

impl std::str::FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "epsilon" => Ok(SweepParam::Epsilon),
            "delta" => Ok(SweepParam::Delta),
            other => Err(CliError::Usage(format!("unknown sweep parameter '{other}' (epsilon, delta)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub pi_norm: f64,
    pub shrink: f64,
    pub gamma_eps: f64,
    pub value: f64,
    pub well_posed: bool,
}

/// Solves on `points` evenly spaced values of the parameter in `[from, to]`.
pub fn sweep_rows(
    problem: &ValidatedProblem,
    param: SweepParam,
    from: f64,
    to: f64,
    points: usize,
) -> CliResult<Vec<SweepRow>> {
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(CliError::Usage(format!("sweep needs from <= to, got {from} > {to}")));
    }
    if points < 2 {
        return Err(CliError::Usage(format!("sweep needs at least 2 points, got {points}")));
    }
    if param == SweepParam::Delta
        && !matches!(
            problem.ambiguity().vol,
            VolAmbiguity::None | VolAmbiguity::FrobeniusBall { .. }
        )
    {
        return Err(CliError::Usage(
            "a delta sweep needs vol \"none\" or a frobenius ball in the config".into(),
        ));
    }
    (0..points)
        .map(|i| {
            let x = if i == points - 1 {
                to
            } else {
                from + (to - from) * i as f64 / (points - 1) as f64
            };
            let mut amb = problem.ambiguity().clone();
            match param {
                SweepParam::Epsilon => amb.epsilon = x,
                SweepParam::Delta => amb.vol = VolAmbiguity::FrobeniusBall { delta: x },
            }
            let p = problem.with_ambiguity(amb)?;
            let sol = RobustSolution::solve(&p)?;
            let (pi, rate) = match &sol {
                RobustSolution::Infinite(rep) => (rep.pi_eps.clone(), rep.gamma_eps),
                RobustSolution::Finite(rep) => (rep.pi_eps.clone(), rep.consumption_rate(0.0)),
            };
            Ok(SweepRow {
                x,
                pi_norm: pi.norm(),
                shrink: sol.shrink(),
                gamma_eps: rate,
                value: sol.value_at(1.0).unwrap_or(f64::NAN),
                well_posed: sol.well_posed(),
            })
        })
        .collect()
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let name = match param {
        SweepParam::Epsilon => "epsilon",
        SweepParam::Delta => "delta",
    };
    let mut s = format!("{name},pi_norm,shrink,gamma_eps,value,well_posed\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            full(r.x),
            full(r.pi_norm),
            full(r.shrink),
            full(r.gamma_eps),
            full(r.value),
            r.well_posed
        ));
    }
    s
}

pub fn cmd_sweep(
    config_path: &Path,
    param: SweepParam,
    from: f64,
    to: f64,
    points: usize,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let loaded = config::load(config_path)?;
    let rows = sweep_rows(&loaded.problem, param, from, to, points)?;
    let csv = sweep_csv(param, &rows);
    match out_path {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::write(path, e))?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

/// One line of `verify` output.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub observed: f64,
    pub tolerance: f64,
    pub note: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: observed {:.3e}, tolerance {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.tolerance
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// Tolerance for HJB residuals, relative to `e^{−ρt}w^{1−R}`.
pub const HJB_TOL: f64 = 1e-9;
/// Perturbed controls checked per verify run.
pub const HJB_PERTURBATIONS: usize = 1000;
/// Drift grid size for the minimax check.
pub const MINIMAX_RESOLUTION: usize = 10_000;

/// Worst-case covariance against a given portfolio.
fn worst_cov_against(problem: &ValidatedProblem, pi: &DVector<f64>) -> CliResult<Covariance> {
    match problem.ambiguity().vol {
        VolAmbiguity::FrobeniusBall { delta } => {
            if pi.norm() == 0.0 {
                return Ok(problem.market().cov().clone());
            }
            Ok(worst_cov_frobenius(
                pi,
                problem.market().cov(),
                delta,
                problem.prefs().risk_aversion,
                problem.epsilon(),
            )?
            .sigma_bar)
        }
        _ => Ok(worst_case_cov(problem)?),
    }
}

/// Runs every oracle against the solution (or against `override_pi`).
pub fn verify_checks(loaded: &Loaded, solution: &RobustSolution, override_pi: Option<&DVector<f64>>) -> CliResult<Vec<Check>> {
    let problem = &loaded.problem;
    let cfg = &loaded.oracle;
    let tol = cfg.tolerance;
    let n = problem.market().n();
    let pi = match override_pi {
        Some(p) => {
            if p.len() != n {
                return Err(CliError::Usage(format!("--override-pi needs {n} values, got {}", p.len())));
            }
            p.clone()
        }
        None => solution.pi().expect("well-posed").clone(),
    };
    // a nonzero direction for the set oracles even when the investor abstains
    let probe = if pi.norm() > 0.0 {
        pi.clone()
    } else if solution.merton_pi().norm() > 0.0 {
        solution.merton_pi().clone()
    } else {
        DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 })
    };
    let mut checks = Vec::new();

    // worst-case drift against boundary sampling
    let cov = worst_cov_against(problem, &probe)?;
    let eps = problem.epsilon();
    let mu_hat = problem.market().mu_hat();
    let closed = probe.dot(&worst_case_drift(&probe, &cov, eps, mu_hat));
    let sample = ellipsoid_min_sampled(&probe, &cov, eps, mu_hat, cfg);
    let scale = probe.dot(mu_hat).abs() + eps * cov.quad(&probe).sqrt();
    let below = (closed - sample.random_min) / scale;
    let gap = (sample.min_value - closed).abs() / scale;
    checks.push(Check {
        name: "ellipsoid_min",
        pass: below <= tol && gap <= tol,
        observed: gap.max(below),
        tolerance: tol,
        note: format!("closed {closed:.10}, sampled {:.10}", sample.random_min),
    });

    // worst-case covariance against sampling of the volatility set
    if problem.ambiguity().vol == VolAmbiguity::None {
        checks.push(Check {
            name: "volset_min",
            pass: true,
            observed: 0.0,
            tolerance: tol,
            note: "no volatility ambiguity".into(),
        });
    } else {
        let closed = vol_objective_at(&probe, cov.matrix(), problem);
        let sample = volset_min_sampled(&probe, problem, cfg);
        let rel = (sample.value - closed) / closed.abs().max(f64::MIN_POSITIVE);
        checks.push(Check {
            name: "volset_min",
            pass: rel >= -tol && rel <= tol,
            observed: rel.abs(),
            tolerance: tol,
            note: format!("closed {closed:.10}, sampled {:.10}", sample.value),
        });
    }

    // HJB residual on a grid and at perturbed controls
    let v = solution.value_function()?;
    let policy = solution.policy()?;
    let t_end = match problem.prefs().horizon {
        Horizon::Finite { t, .. } => t,
        Horizon::Infinite => 20.0,
    };
    let mut worst_abs: f64 = 0.0;
    let mut signed = 0.0;
    let mut fd: f64 = 0.0;
    for i in 0..10 {
        let t = t_end * i as f64 / 9.0;
        for j in 0..10 {
            let w = 0.1 * 100f64.powf(j as f64 / 9.0);
            let res = hjb_residual(&v, t, w, &(&pi * w), policy.consumption.rate(t) * w, problem);
            if res.relative().abs() > worst_abs {
                worst_abs = res.relative().abs();
                signed = res.relative();
            }
            fd = fd.max(res.fd_disagreement());
        }
    }
    checks.push(Check {
        name: "hjb_optimum",
        pass: worst_abs < HJB_TOL,
        observed: worst_abs,
        tolerance: HJB_TOL,
        note: format!("largest residual {signed:.3e} on a 10x10 (t, w) grid"),
    });
    checks.push(Check {
        name: "hjb_finite_difference",
        pass: fd <= tol,
        observed: fd,
        tolerance: tol,
        note: "analytic vs finite-difference derivatives".into(),
    });
    let mut stream = NormalStream::new(cfg.seed, 0x484A42);
    let spread = pi.norm().max(0.1);
    let mut max_res = f64::NEG_INFINITY;
    for _ in 0..HJB_PERTURBATIONS {
        let t = t_end * (stream.next_normal().abs() / 4.0).min(1.0);
        let w = (stream.next_normal()).exp();
        let theta = DVector::from_fn(n, |i, _| pi[i] + 0.5 * spread * stream.next_normal()) * w;
        let c = policy.consumption.rate(t) * w * (0.5 * stream.next_normal()).exp();
        max_res = max_res.max(hjb_residual(&v, t, w, &theta, c, problem).relative());
    }
    checks.push(Check {
        name: "hjb_perturbed",
        pass: max_res <= HJB_TOL,
        observed: max_res,
        tolerance: HJB_TOL,
        note: format!("max over {HJB_PERTURBATIONS} perturbed controls"),
    });

    // minimax equality
    if problem.prefs().horizon == Horizon::Infinite {
        let g = minimax_gap(problem, MINIMAX_RESOLUTION)?;
        let rel = g.relative();
        checks.push(Check {
            name: "minimax_gap",
            pass: g.gap >= -1e-9 * g.lower.abs() && rel <= tol,
            observed: rel,
            tolerance: tol,
            note: format!("sup-inf {:.10}, inf-sup {:.10}", g.lower, g.upper),
        });
    }

    // Monte Carlo value
    if let Some(sim) = &loaded.sim {
        let measure = Measure::worst(solution)?;
        let ens = simulate(problem, &robust_merton::Policy::new(pi.clone(), policy.consumption.clone()), &measure, sim)?;
        let u = realized_utility(&ens, problem.prefs())?;
        let value = solution.value_at(sim.w0).expect("well-posed");
        let z = (u.total() - value) / u.std_error;
        let tail = match u.tail {
            Tail::Finite(t) => format!(", tail {t:.6}"),
            Tail::Divergent { rate } => format!(", tail diverges at rate {rate:.3e}"),
            Tail::None => String::new(),
        };
        checks.push(Check {
            name: "realized_utility",
            pass: u.brackets(value, 3.0),
            observed: z.abs(),
            tolerance: 3.0,
            note: format!("estimate {:.6} ± {:.6}{tail}, value {value:.6}; observed in standard errors", u.estimate, u.std_error),
        });
    }
    Ok(checks)
}

pub fn cmd_verify(config_path: &Path, override_pi: Option<&[f64]>, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = config::load(config_path)?;
    let solution = RobustSolution::solve(&loaded.problem)?;
    if !solution.well_posed() {
        let RobustSolution::Infinite(rep) = &solution else {
            unreachable!("finite horizons are always well posed");
        };
        writeln!(out, "ILL-POSED gamma_eps = {:.6e} <= 0", rep.gamma_eps).map_err(io_err)?;
        match rep.divergence.as_ref().expect("ill-posed reports carry a witness") {
            w @ DivergenceWitness::ProportionalConsumption { pi, lambda, .. } => {
                let rate = divergence_exponent(&loaded.problem, pi, *lambda);
                writeln!(out, "{w}").map_err(io_err)?;
                writeln!(out, "brute-force utility growth exponent {rate:.6e}").map_err(io_err)?;
            }
            w => writeln!(out, "{w}").map_err(io_err)?,
        }
        return Ok(EXIT_MATH);
    }
    let override_pi = override_pi.map(DVector::from_column_slice);
    let checks = verify_checks(&loaded, &solution, override_pi.as_ref())?;
    for c in &checks {
        writeln!(out, "{c}").map_err(io_err)?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(out, "{} checks, {failed} failed", checks.len()).map_err(io_err)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_MATH })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureChoice {
    Nominal,
    Worst,
    File,
}

impl std::str::FromStr for MeasureChoice {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "nominal" => Ok(MeasureChoice::Nominal),
            "worst" => Ok(MeasureChoice::Worst),
            "file" => Ok(MeasureChoice::File),
            other => Err(CliError::Usage(format!("unknown measure '{other}' (nominal, worst, file)"))),
        }
    }
}

/// Measure file: `{"mu": [..], "cov": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub mu: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

fn load_measure(path: &Path) -> CliResult<Measure> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: MeasureSpec = serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let cov = Covariance::from_rows(&spec.cov)?;
    Ok(Measure::new(DVector::from_vec(spec.mu), cov, format!("file:{}", path.display()))?)
}

pub struct SimulateArgs<'a> {
    pub measure: MeasureChoice,
    pub measure_file: Option<&'a Path>,
    pub out: &'a Path,
    pub paths: Option<&'a Path>,
}

pub fn cmd_simulate(config_path: &Path, args: &SimulateArgs<'_>, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = config::load(config_path)?;
    let sim = loaded.sim.ok_or(CliError::SimConfigRequired)?;
    let problem = &loaded.problem;
    let solution = RobustSolution::solve(problem)?;
    if !solution.well_posed() {
        writeln!(out, "ill-posed problem: nothing to simulate").map_err(io_err)?;
        if let Some(w) = solution.divergence() {
            writeln!(out, "{w}").map_err(io_err)?;
        }
        return Ok(EXIT_MATH);
    }
    let measure = match args.measure {
        MeasureChoice::Nominal => Measure::nominal(problem),
        MeasureChoice::Worst => Measure::worst(&solution)?,
        MeasureChoice::File => load_measure(
            args.measure_file
                .ok_or_else(|| CliError::Usage("--measure file needs --measure-file <path>".into()))?,
        )?,
    };
    let policy = solution.policy()?;
    let ens = simulate(problem, &policy, &measure, &sim)?;
    let u = realized_utility(&ens, problem.prefs())?;
    let value = solution.value_at(sim.w0).expect("well-posed");

    let mut csv = String::from("section,time,statistic,value\n");
    let mut row = |section: &str, t: Option<f64>, stat: &str, v: f64| {
        csv.push_str(&format!("{section},{},{stat},{}\n", t.map_or(String::new(), full), full(v)));
    };
    for (k, t) in ens.times.iter().enumerate() {
        let mut w = ens.cross_section(k);
        w.sort_by(|a, b| a.total_cmp(b));
        let mean = robust_merton::sim::mean_and_se(&w).0;
        row("wealth", Some(*t), "mean", mean);
        for (name, p) in [("q05", 0.05), ("q25", 0.25), ("q50", 0.5), ("q75", 0.75), ("q95", 0.95)] {
            row("wealth", Some(*t), name, quantile(&w, p));
        }
        let c: Vec<f64> = (0..ens.n_paths)
            .filter(|p| !ens.rejected[*p])
            .map(|p| ens.consumption_path(p)[k])
            .collect();
        row("consumption", Some(*t), "mean", robust_merton::sim::mean_and_se(&c).0);
    }
    row("utility", None, "estimate", u.estimate);
    row("utility", None, "std_error", u.std_error);
    match u.tail {
        Tail::Finite(t) => row("utility", None, "tail", t),
        Tail::Divergent { rate } => row("utility", None, "tail_divergence_rate", rate),
        Tail::None => {}
    }
    row("utility", None, "total", u.total());
    row("utility", None, "robust_value", value);
    row("utility", None, "gap", u.total() - value);
    row("paths", None, "used", u.n_used as f64);
    row("paths", None, "rejected", ens.n_rejected() as f64);
    std::fs::write(args.out, csv).map_err(|e| CliError::write(args.out, e))?;

    if let Some(path) = args.paths {
        let file = File::create(path).map_err(|e| CliError::write(path, e))?;
        write_ensemble(BufWriter::new(file), &ens).map_err(|e| CliError::write(path, e))?;
    }

    writeln!(out, "measure = {}", measure.tag).map_err(io_err)?;
    writeln!(out, "realized_utility = {:.6} ± {:.6}", u.total(), u.std_error).map_err(io_err)?;
    writeln!(out, "robust_value = {value:.6}").map_err(io_err)?;
    writeln!(
        out,
        "gap = {:.6} ({:.2} standard errors)",
        u.total() - value,
        (u.total() - value) / u.std_error
    )
    .map_err(io_err)?;
    writeln!(out, "rejected_paths = {}", ens.n_rejected()).map_err(io_err)?;
    Ok(EXIT_OK)
}

/// Parses a comma-separated list of numbers.
pub fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("'{x}' is not a number")))
        })
        .collect()
}

/// Writes a config file for a problem with an inline market.
pub fn write_config(path: &Path, config: &config::ProblemConfig) -> CliResult<PathBuf> {
    let text = serde_json::to_string_pretty(config).map_err(|e| CliError::write(path, e))?;
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))?;
    Ok(path.to_path_buf())
}
