//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p robust-merton-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use robust_merton::frobenius::{solve_infinite_frobenius, worst_cov_frobenius};
use robust_merton::oracle::{
    ellipsoid_min_sampled, hjb_residual, minimax_gap, vol_objective_at, volset_min_sampled, OracleConfig,
};
use robust_merton::kernel::solve_infinite_at;
use robust_merton::rng::{NormalStream, UniformStream};
use robust_merton::sim::{realized_utility, simulate_solution, Measure, Scheme, SimConfig, Tail};
use robust_merton::{
    solve_infinite, validate, worst_case_drift, AmbiguityModel, Covariance, MarketModel,
    Preferences, RobustSolution, ValidatedProblem, VolAmbiguity,
};
use robust_merton_cli::commands::sweep_rows;
use robust_merton_cli::commands::SweepParam;

type Outcome = Result<String, String>;

/// Id, name, time budget in seconds, check.
type Criterion<'a> = (u32, &'static str, f64, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Deterministic source of random instances.
struct Gen {
    u: UniformStream,
}

impl Gen {
    fn new(seed: u64) -> Self {
        Self {
            u: UniformStream::new(seed, 0),
        }
    }

    fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.u.next_f64()
    }

    fn dim(&mut self, max: usize) -> usize {
        1 + (self.u.next_f64() * max as f64) as usize
    }

    fn spd(&mut self, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| self.uniform(-1.0, 1.0));
        let jitter = self.uniform(0.05, 0.5);
        (&a * a.transpose() + DMatrix::identity(n, n) * jitter) * (0.1 / n as f64)
    }

    fn vector(&mut self, n: usize, a: f64, b: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.uniform(a, b))
    }

    fn market(&mut self, n: usize) -> MarketModel {
        let r = self.uniform(0.0, 0.05);
        let mu = self.vector(n, -0.05, 0.15).add_scalar(r);
        MarketModel::new(r, mu, self.spd(n)).unwrap()
    }

    fn risk_aversion(&mut self, lo: f64, hi: f64) -> f64 {
        loop {
            let r = self.uniform(lo, hi);
            if (r - 1.0).abs() > 0.05 {
                return r;
            }
        }
    }
}

fn problem(market: MarketModel, eps: f64, vol: VolAmbiguity, prefs: Preferences) -> ValidatedProblem {
    validate(market, AmbiguityModel { epsilon: eps, vol }, prefs).unwrap()
}

fn base(eps: f64, prefs: Preferences) -> ValidatedProblem {
    problem(MarketModel::scalar(0.02, 0.08, 0.04).unwrap(), eps, VolAmbiguity::None, prefs)
}

/// Sharpe ratio by explicit inversion, independent of the library's Cholesky.
fn sharpe_direct(market: &MarketModel, cov: &DMatrix<f64>) -> f64 {
    let a = market.excess_return();
    let inv = cov.clone().try_inverse().unwrap();
    (a.transpose() * inv * &a)[(0, 0)].sqrt()
}

fn merton_direct(market: &MarketModel, cov: &DMatrix<f64>, big_r: f64) -> DVector<f64> {
    cov.clone().lu().solve(&market.excess_return()).unwrap() / big_r
}

fn c1_merton_reversion() -> Outcome {
    let mut g = Gen::new(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = g.dim(4);
        let market = g.market(n);
        let big_r = g.risk_aversion(0.3, 8.0);
        let p = problem(market.clone(), 0.0, VolAmbiguity::None, Preferences::infinite(g.uniform(0.5, 2.0), big_r));
        let rep = solve_infinite(&p).map_err(|e| e.to_string())?;
        let expected = merton_direct(&market, market.cov().matrix(), big_r);
        let err = (&rep.pi_eps - &expected).norm() / expected.norm();
        worst = worst.max(err);
    }
    ensure(worst <= 1e-12, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.3e} over 100 markets"))
}

fn c2_worst_drift_oracle() -> Outcome {
    let mut g = Gen::new(2);
    let mut worst_gap: f64 = 0.0;
    let mut worst_random_gap: f64 = 0.0;
    for i in 0..100 {
        let n = g.dim(3);
        let cov = Covariance::new(g.spd(n)).unwrap();
        let mu_hat = g.vector(n, 0.0, 0.15);
        let theta = g.vector(n, -2.0, 2.0);
        let eps = g.uniform(0.01, 0.5);
        let cfg = OracleConfig {
            seed: i,
            ..OracleConfig::default()
        };
        let closed = theta.dot(&worst_case_drift(&theta, &cov, eps, &mu_hat));
        let s = ellipsoid_min_sampled(&theta, &cov, eps, &mu_hat, &cfg);
        let scale = closed.abs().max(1e-12);
        ensure(closed <= s.random_min + 1e-12 * scale, || {
            format!("closed {closed} above sampled {}", s.random_min)
        })?;
        worst_gap = worst_gap.max((s.min_value - closed) / scale);
        worst_random_gap = worst_random_gap.max((s.random_min - closed) / scale);
    }
    ensure(worst_gap <= 1e-6, || format!("sampled minimum {worst_gap:.3e} above closed form"))?;
    Ok(format!(
        "closed <= every sampled value; gap to sampled min {worst_gap:.3e} (random directions alone: {worst_random_gap:.3e})"
    ))
}

fn c3_cutoff_shrinkage() -> Outcome {
    let mut cases = vec![MarketModel::scalar(0.02, 0.08, 0.04).unwrap()];
    let mut g = Gen::new(3);
    for _ in 0..4 {
        let n = g.dim(4);
        cases.push(g.market(n));
    }
    for market in cases {
        let prefs = Preferences::infinite(0.5, 2.0);
        let p = problem(market.clone(), 0.0, VolAmbiguity::None, prefs);
        let h = RobustSolution::solve(&p).unwrap().sharpe();
        let h_direct = sharpe_direct(&market, market.cov().matrix());
        let rows = sweep_rows(&p, SweepParam::Epsilon, 0.0, 2.0 * h, 101).map_err(|e| e.to_string())?;
        let merton = merton_direct(&market, market.cov().matrix(), 2.0);
        for w in rows.windows(2) {
            ensure(w[1].pi_norm <= w[0].pi_norm, || format!("pi_norm increases at eps = {}", w[1].x))?;
        }
        for row in &rows {
            if row.x >= h {
                ensure(row.pi_norm == 0.0, || format!("pi_norm {} at eps {} >= H", row.pi_norm, row.x))?;
            }
            let rep = solve_infinite(&p.with_ambiguity(AmbiguityModel::drift_only(row.x)).unwrap()).unwrap();
            let expected = &merton * ((h_direct - row.x).max(0.0) / h_direct);
            let err = (&rep.pi_eps - &expected).amax();
            ensure(err <= 1e-12 * merton.amax(), || format!("shrinkage error {err:.3e} at eps {}", row.x))?;
        }
    }
    Ok("5 markets x 101 points: monotone, zero beyond H, exact shrinkage".into())
}

fn c4_hjb_residual() -> Outcome {
    let p = base(0.1, Preferences::infinite(0.05, 2.0));
    let rep = solve_infinite(&p).unwrap();
    let v = rep.value_function().unwrap();
    let mut at_opt: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let t = 50.0 * i as f64 / 9.0;
            let w = 0.01 * 10_000f64.powf(j as f64 / 9.0);
            let res = hjb_residual(&v, t, w, &(&rep.pi_eps * w), rep.gamma_eps * w, &p);
            at_opt = at_opt.max(res.relative().abs());
        }
    }
    ensure(at_opt < 1e-9, || format!("residual {at_opt:.3e} at the optimum"))?;
    let mut s = NormalStream::new(4, 0);
    let mut max_off = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let t = 10.0 * s.next_normal().abs();
        let w = s.next_normal().exp();
        let theta = DVector::from_element(1, 0.5 + 0.5 * s.next_normal()) * w;
        let c = rep.gamma_eps * w * (0.5 * s.next_normal()).exp();
        max_off = max_off.max(hjb_residual(&v, t, w, &theta, c, &p).relative());
    }
    ensure(max_off <= 1e-9, || format!("perturbed residual {max_off:.3e} > 0"))?;
    Ok(format!("optimum |residual| {at_opt:.3e}; max perturbed residual {max_off:.3e}"))
}

fn c5_minimax() -> Outcome {
    let mut worst: f64 = 0.0;
    let g0 = minimax_gap(&base(0.1, Preferences::infinite(0.05, 2.0)), 10_000).map_err(|e| e.to_string())?;
    ensure(g0.gap >= -1e-9 * g0.lower.abs() && g0.relative() < 1e-6, || format!("base case {g0:?}"))?;
    let mut g = Gen::new(5);
    for _ in 0..20 {
        let market = g.market(2);
        let h = sharpe_direct(&market, market.cov().matrix());
        let eps = g.uniform(0.0, 0.95) * h;
        let big_r = g.uniform(1.1, 6.0);
        let p = problem(market, eps, VolAmbiguity::None, Preferences::infinite(g.uniform(0.01, 0.2), big_r));
        let gap = minimax_gap(&p, 10_000).map_err(|e| e.to_string())?;
        ensure(gap.gap >= -1e-9 * gap.lower.abs(), || format!("negative gap {gap:?}"))?;
        worst = worst.max(gap.relative());
    }
    ensure(worst < 1e-6, || format!("relative gap {worst:.3e}"))?;
    Ok(format!("base case gap {:.3e}; 20 two-asset cases max relative gap {worst:.3e}", g0.relative()))
}

fn c6_finite_ode() -> Outcome {
    let mut g = Gen::new(6);
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    for i in 0..50 {
        let n = g.dim(3);
        let market = g.market(n);
        let h = sharpe_direct(&market, market.cov().matrix());
        let eps = g.uniform(0.0, 1.2) * h;
        let t_end = g.uniform(0.5, 40.0);
        let bequest = g.uniform(0.1, 5.0);
        // every fifth case sits on the branch where k_ε = ρ
        let (big_r, rho) = if i % 5 == 0 {
            let big_r = g.uniform(0.2, 0.9);
            let hp = (h - eps).max(0.0);
            let k = (1.0 - big_r) * (market.r() + hp * hp / (2.0 * big_r));
            if k <= 0.0 {
                (big_r, 0.05)
            } else {
                degenerate += 1;
                (big_r, k + g.uniform(-5e-13, 5e-13))
            }
        } else {
            (g.risk_aversion(0.2, 8.0), g.uniform(0.001, 0.3))
        };
        let p = problem(market, eps, VolAmbiguity::None, Preferences::finite(rho, big_r, t_end, bequest));
        let rep = robust_merton::solve_finite(&p).map_err(|e| e.to_string())?;
        let gf = rep.g;
        ensure(gf.eval(t_end) == bequest.powf(1.0 / big_r), || format!("g(T) = {} != A^(1/R)", gf.eval(t_end)))?;
        for j in 0..1000 {
            let t = t_end * j as f64 / 999.0;
            // f' + k f + R e^{−ρt/R} f^{1−1/R}; f' also checked against an extrapolated five-point stencil
            let f = gf.f(t);
            let analytic = gf.f_derivative(t);
            let src = big_r * (-rho * t / big_r).exp() * f.powf(1.0 - 1.0 / big_r);
            let scale = analytic.abs() + (gf.k * f).abs() + src.abs();
            let res = (analytic + gf.k * f + src).abs() / scale;
            let hs = 1e-3 * t_end;
            if t > 2.0 * hs && t < t_end - 2.0 * hs {
                let fd = (gf.f(t - 2.0 * hs) - 8.0 * gf.f(t - hs) + 8.0 * gf.f(t + hs) - gf.f(t + 2.0 * hs))
                    / (12.0 * hs);
                let h2 = hs / 2.0;
                let fd2 = (gf.f(t - 2.0 * h2) - 8.0 * gf.f(t - h2) + 8.0 * gf.f(t + h2) - gf.f(t + 2.0 * h2)) / (12.0 * h2);
                let extrapolated = (16.0 * fd2 - fd) / 15.0;
                ensure((extrapolated - analytic).abs() <= 1e-6 * scale, || {
                    format!("f' mismatch at t = {t}: analytic {analytic}, stencil {extrapolated}")
                })?;
            }
            worst = worst.max(res);
        }
    }
    ensure(worst < 1e-8, || format!("ODE residual {worst:.3e}"))?;
    ensure(degenerate >= 5, || format!("only {degenerate} degenerate-branch cases"))?;
    Ok(format!("max ODE residual {worst:.3e} on 50 x 1000 points ({degenerate} cases with |k - rho| < 1e-12)"))
}

fn c7_mc_finite() -> Outcome {
    let p = base(0.1, Preferences::finite(0.05, 2.0, 1.0, 1.0));
    let sol = RobustSolution::solve(&p).unwrap();
    let value = sol.value_at(1.0).unwrap();
    let cfg = SimConfig {
        n_paths: 100_000,
        dt: 1.0 / 2520.0,
        t_max: 1.0,
        seed: 7,
        scheme: Scheme::ExactLog,
        record_stride: 2520,
        w0: 1.0,
    };
    let ens = simulate_solution(&p, &sol, &Measure::worst(&sol).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let u = realized_utility(&ens, p.prefs()).map_err(|e| e.to_string())?;
    let z = (u.estimate - value) / u.std_error;
    ensure(z.abs() <= 3.0, || format!("estimate {} ± {} vs value {value}", u.estimate, u.std_error))?;
    Ok(format!("estimate {:.6} ± {:.6}, value {value:.6} ({z:+.2} SE)", u.estimate, u.std_error))
}

fn c8_mc_infinite() -> Outcome {
    let p = base(0.1, Preferences::infinite(0.05, 2.0));
    let sol = RobustSolution::solve(&p).unwrap();
    let value = sol.value_at(1.0).unwrap();
    // exact log-wealth steps; weekly grid for the utility integral
    let cfg = SimConfig {
        n_paths: 20_000,
        dt: 1.0 / 52.0,
        t_max: 200.0,
        seed: 8,
        scheme: Scheme::ExactLog,
        record_stride: 5200,
        w0: 1.0,
    };
    let ens = simulate_solution(&p, &sol, &Measure::worst(&sol).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let u = realized_utility(&ens, p.prefs()).map_err(|e| e.to_string())?;
    let Tail::Finite(tail) = u.tail else {
        return Err(format!("unexpected tail {:?}", u.tail));
    };
    ensure(u.brackets(value, 3.0), || {
        format!("[{} + {tail}, {}] ± 3·{} misses {value}", u.estimate, u.estimate, u.std_error)
    })?;
    Ok(format!(
        "truncated {:.4} ± {:.4}, tail {tail:.4}, value {value:.4}",
        u.estimate, u.std_error
    ))
}

fn c9_vol_reductions() -> Outcome {
    let mut g = Gen::new(9);
    let cfg = OracleConfig::default();
    let mut worst_box: f64 = 0.0;
    let mut worst_cap: f64 = 0.0;
    let mut worst_cap_solve: f64 = 0.0;
    for i in 0..20 {
        let n = g.dim(3);
        let diag = g.vector(n, 0.01, 0.1);
        let market = MarketModel::new(
            g.uniform(0.0, 0.05),
            g.vector(n, 0.03, 0.15),
            DMatrix::from_diagonal(&diag),
        )
        .unwrap();
        let lower: Vec<f64> = diag.iter().map(|d| d * g.uniform(0.3, 1.0)).collect();
        let upper: Vec<f64> = diag.iter().map(|d| d * g.uniform(1.0, 3.0)).collect();
        let prefs = Preferences::infinite(0.5, g.risk_aversion(0.3, 6.0));
        let eps = g.uniform(0.0, 0.2);
        let pb = problem(
            market.clone(),
            eps,
            VolAmbiguity::DiagonalBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            prefs,
        );
        let theta = g.vector(n, -2.0, 2.0);
        let diag_upper = DMatrix::from_diagonal(&DVector::from_vec(upper.clone()));
        let sol = RobustSolution::solve(&pb).unwrap();
        ensure(sol.worst_cov().matrix() == &diag_upper, || "box worst covariance is not Diag(upper)".into())?;
        let closed = vol_objective_at(&theta, &diag_upper, &pb);
        let s = volset_min_sampled(&theta, &pb, &OracleConfig { seed: i, ..cfg });
        ensure(closed <= s.value + 1e-12 * closed.abs(), || "box sample beats Diag(upper)".into())?;
        ensure(s.argmin_cov == diag_upper, || format!("box sampled argmin {:?}", s.argmin_cov))?;
        worst_box = worst_box.max((s.value - closed).abs() / closed.abs());

        let cap = market.cov().max_eigenvalue() * g.uniform(1.0, 2.0);
        let pc = problem(market.clone(), eps, VolAmbiguity::EigenvalueCap { lambda_bar_sq: cap }, prefs);
        let capped = solve_infinite(&pc).unwrap();
        let direct = solve_infinite_at(&pc, Covariance::new(DMatrix::identity(n, n) * cap).unwrap());
        worst_cap_solve = worst_cap_solve
            .max((&capped.pi_eps - &direct.pi_eps).amax() / direct.merton_pi.amax().max(1e-300))
            .max((capped.gamma_eps - direct.gamma_eps).abs() / direct.gamma_eps.abs());
        let closed = vol_objective_at(&theta, &(DMatrix::identity(n, n) * cap), &pc);
        let s = volset_min_sampled(&theta, &pc, &OracleConfig { seed: i, ..cfg });
        ensure(closed <= s.value + 1e-12 * closed.abs(), || "cap sample beats cap*I".into())?;
        worst_cap = worst_cap.max((s.value - closed).abs() / closed.abs());
    }
    ensure(worst_box <= 1e-6 && worst_cap <= 1e-6, || {
        format!("oracle gaps: box {worst_box:.3e}, cap {worst_cap:.3e}")
    })?;
    ensure(worst_cap_solve <= 1e-12, || format!("cap solve differs by {worst_cap_solve:.3e}"))?;
    Ok(format!(
        "box oracle gap {worst_box:.3e}, cap oracle gap {worst_cap:.3e}, cap vs kernel at cap*I {worst_cap_solve:.3e}"
    ))
}

fn c10_frobenius() -> Outcome {
    let mut g = Gen::new(10);
    let mut worst_identity: f64 = 0.0;
    for _ in 0..1000 {
        let n = g.dim(4);
        let cov = Covariance::new(g.spd(n)).unwrap();
        let delta = g.uniform(0.0, 0.99) * cov.min_eigenvalue();
        let pi = g.vector(n, -2.0, 2.0);
        let inner = worst_cov_frobenius(&pi, &cov, delta, g.uniform(0.3, 6.0), g.uniform(0.0, 0.5))
            .map_err(|e| e.to_string())?;
        let theta = &pi * pi.transpose();
        let dev = inner.sigma_bar.matrix() - cov.matrix() - &theta * (delta / theta.norm());
        // the first-order-condition form must coincide with the rank-one update
        let foc = inner.multiplier_form() - inner.sigma_bar.matrix();
        let scale = cov.matrix().norm();
        worst_identity = worst_identity.max(dev.norm() / scale).max(if delta > 0.0 { foc.norm() / scale } else { 0.0 });
        ensure(inner.sigma_bar.min_eigenvalue() > 0.0, || "worst covariance not positive definite".into())?;
    }
    ensure(worst_identity < 1e-10, || format!("rank-one identity off by {worst_identity:.3e}"))?;

    let mut max_iter = 0;
    for _ in 0..100 {
        let market = g.market(2);
        let delta = g.uniform(0.0, 0.9) * market.cov().min_eigenvalue();
        let shifted = market.cov().matrix() + DMatrix::identity(2, 2) * delta;
        let h = sharpe_direct(&market, &shifted);
        let p = problem(
            market,
            g.uniform(0.0, 0.9) * h,
            VolAmbiguity::FrobeniusBall { delta },
            Preferences::infinite(0.5, g.uniform(1.1, 6.0)),
        );
        let sol = solve_infinite_frobenius(&p).map_err(|e| e.to_string())?;
        ensure(!sol.used_fallback && sol.iterations <= 200, || {
            format!("{} iterations, fallback {}", sol.iterations, sol.used_fallback)
        })?;
        ensure(sol.report.worst_cov.min_eigenvalue() > 0.0, || "worst covariance not positive definite".into())?;
        max_iter = max_iter.max(sol.iterations);
    }

    let mut worst_scalar: f64 = 0.0;
    for _ in 0..20 {
        let var = g.uniform(0.01, 0.1);
        let delta = g.uniform(0.0, 0.99) * var;
        let market = MarketModel::scalar(0.02, g.uniform(0.03, 0.2), var).unwrap();
        let h = (market.mu_hat()[0] - 0.02) / (var + delta).sqrt();
        let eps = g.uniform(0.0, 0.9) * h;
        let prefs = Preferences::infinite(0.5, g.uniform(1.1, 6.0));
        let pf = problem(market.clone(), eps, VolAmbiguity::FrobeniusBall { delta }, prefs);
        let sol = solve_infinite_frobenius(&pf).map_err(|e| e.to_string())?;
        let shifted = MarketModel::scalar(0.02, market.mu_hat()[0], var + delta).unwrap();
        let kernel = solve_infinite(&problem(shifted, eps, VolAmbiguity::None, prefs)).unwrap();
        worst_scalar = worst_scalar.max((sol.report.pi_eps[0] - kernel.pi_eps[0]).abs() / kernel.merton_pi[0].abs());
    }
    ensure(worst_scalar < 1e-10, || format!("scalar case differs from kernel at var+delta by {worst_scalar:.3e}"))?;
    Ok(format!(
        "identity error {worst_identity:.3e}; max {max_iter} iterations; scalar vs kernel {worst_scalar:.3e}"
    ))
}

fn c11_consumption_ordering() -> Outcome {
    let mut g = Gen::new(11);
    let mut count = 0;
    while count < 100 {
        let n = g.dim(4);
        let market = g.market(n);
        let h = sharpe_direct(&market, market.cov().matrix());
        if h < 1e-3 {
            continue;
        }
        let eps = g.uniform(0.01, 0.99) * h;
        let big_r = g.risk_aversion(0.2, 8.0);
        let prefs = Preferences::infinite(g.uniform(0.01, 0.5), big_r);
        let robust = solve_infinite(&problem(market.clone(), eps, VolAmbiguity::None, prefs)).unwrap();
        let plain = solve_infinite(&problem(market, 0.0, VolAmbiguity::None, prefs)).unwrap();
        if !(robust.well_posed && plain.well_posed) {
            continue;
        }
        count += 1;
        let ok = if big_r > 1.0 {
            robust.gamma_eps < plain.gamma_eps
        } else {
            robust.gamma_eps > plain.gamma_eps
        };
        ensure(ok, || {
            format!("R = {big_r}: gamma_eps {} vs gamma_0 {}", robust.gamma_eps, plain.gamma_eps)
        })?;
    }
    Ok("100 well-posed instances ordered as expected".into())
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_robust-merton")
}

fn config_json(rho: f64, big_r: f64, mu: f64) -> String {
    format!(
        r#"{{"market": {{"r": 0.02, "mu_hat": [{mu}], "cov": [[0.04]]}},
"ambiguity": {{"epsilon": 0.1, "vol": "none"}},
"preferences": {{"rho": {rho:e}, "R": {big_r}, "horizon": "infinite"}}}}"#
    )
}

fn c12_ill_posed_boundary(dir: &Path) -> Outcome {
    let big_r = 0.5;
    let mu = 0.5;
    let market = MarketModel::scalar(0.02, mu, 0.04).unwrap();
    // γ_ε from its definition, for the bisection
    let hp = (mu - 0.02) / 0.2 - 0.1;
    let gamma = |rho: f64| (rho + (big_r - 1.0) * (0.02 + hp * hp / (2.0 * big_r))) / big_r;
    let (mut lo, mut hi) = (1e-9, 10.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gamma(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho_star = 0.5 * (lo + hi);
    let posed = |rho: f64| {
        solve_infinite(&problem(market.clone(), 0.1, VolAmbiguity::None, Preferences::infinite(rho, big_r)))
            .unwrap()
            .well_posed
    };
    ensure(posed(rho_star + 1e-10) && !posed(rho_star - 1e-10), || {
        format!("well_posed does not flip at rho* = {rho_star}")
    })?;
    let at = solve_infinite(&problem(market, 0.1, VolAmbiguity::None, Preferences::infinite(rho_star, big_r))).unwrap();
    ensure(at.gamma_eps.abs() < 1e-10, || format!("gamma_eps {} at rho*", at.gamma_eps))?;

    let path = dir.join("ill_posed.json");
    std::fs::write(&path, config_json(rho_star / 2.0, big_r, mu)).unwrap();
    let out = Command::new(bin()).arg("verify").arg(&path).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.code() == Some(2), || format!("verify exit {:?}", out.status.code()))?;
    ensure(stdout.contains("witness") && stdout.contains("growth exponent"), || {
        format!("verify output lacks the witness: {stdout}")
    })?;
    Ok(format!("rho* = {rho_star:.12}; verify exits 2 with the proportional-consumption witness"))
}

fn run_bin(args: &[&str], threads: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(args)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn c13_reproducibility(dir: &Path) -> Outcome {
    let cfg = dir.join("repro.json");
    std::fs::write(
        &cfg,
        r#"{"market": {"r": 0.02, "mu_hat": [0.08, 0.06], "cov": [[0.04, 0.01], [0.01, 0.09]]},
"ambiguity": {"epsilon": 0.1, "vol": "none"},
"preferences": {"rho": 0.05, "R": 2.0, "horizon": {"T": 1.0, "A": 1.0}},
"sim": {"n_paths": 4000, "dt": 0.001, "seed": 13, "record_stride": 50, "scheme": "euler"}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let mut files = 0;
    for threads in [1, 4] {
        for run in 0..2 {
            let tag = format!("{threads}-{run}");
            let solve = run_bin(&["solve", c, "--format", "json"], threads)?;
            let sweep_out = dir.join(format!("sweep-{tag}.csv"));
            run_bin(
                &["sweep", c, "--param", "epsilon", "--from", "0", "--to", "0.5", "--points", "21", "--out", sweep_out.to_str().unwrap()],
                threads,
            )?;
            let sim_out = dir.join(format!("sim-{tag}.csv"));
            let paths_out = dir.join(format!("paths-{tag}.rmpe"));
            run_bin(
                &["simulate", c, "--measure", "worst", "--out", sim_out.to_str().unwrap(), "--paths", paths_out.to_str().unwrap()],
                threads,
            )?;
            std::fs::write(dir.join(format!("solve-{tag}.json")), solve).unwrap();
        }
    }
    for stem in ["solve-{}.json", "sweep-{}.csv", "sim-{}.csv", "paths-{}.rmpe"] {
        let reference = std::fs::read(dir.join(stem.replace("{}", "1-0"))).unwrap();
        for tag in ["1-1", "4-0", "4-1"] {
            let other = std::fs::read(dir.join(stem.replace("{}", tag))).unwrap();
            ensure(other == reference, || format!("{} differs from run 1-0", stem.replace("{}", tag)))?;
            files += 1;
        }
    }
    Ok(format!("{files} comparisons byte-identical (2 runs x 1 and 4 threads)"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        (1, "Merton reversion", 1.0, Box::new(c1_merton_reversion)),
        (2, "worst-drift oracle", 10.0, Box::new(c2_worst_drift_oracle)),
        (3, "cutoff and shrinkage", 1.0, Box::new(c3_cutoff_shrinkage)),
        (4, "HJB residual", 5.0, Box::new(c4_hjb_residual)),
        (5, "minimax equality", 30.0, Box::new(c5_minimax)),
        (6, "finite-horizon ODE", 2.0, Box::new(c6_finite_ode)),
        (7, "Monte Carlo value, finite horizon", 60.0, Box::new(c7_mc_finite)),
        (8, "Monte Carlo value, infinite horizon", 120.0, Box::new(c8_mc_infinite)),
        (9, "volatility ambiguity reductions", 10.0, Box::new(c9_vol_reductions)),
        (10, "Frobenius case", 30.0, Box::new(c10_frobenius)),
        (11, "consumption ordering", 1.0, Box::new(c11_consumption_ordering)),
        (12, "ill-posedness boundary", 2.0, Box::new(|| c12_ill_posed_boundary(dir.path()))),
        (13, "reproducibility", 60.0, Box::new(|| c13_reproducibility(dir.path()))),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(d) if secs < budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget} s budget")),
            Err(e) => (false, e),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name} ({secs:.2} s / {budget} s): {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
