//! Closed-form robust solutions: worst-case drift and covariance, the
//! infinite-horizon rule with its well-posedness test, and the
//! finite-horizon rule with its linearized value ODE.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{sharpe_ratio, Covariance, Horizon, Preferences, ValidatedProblem, VolAmbiguity};
use crate::policy::{ConsumptionRule, Policy};

/// Below this gap between `k_ε` and `ρ` the value-ODE integral uses its
/// limiting form.
pub const DEGENERATE_RATE_TOL: f64 = 1e-12;

/// Panels for Simpson quadrature of the deterministic consumption integral.
pub const SIMPSON_PANELS: usize = 10_000;

/// Drift minimizing `θ'μ` over the ellipsoid `(μ−μ̂)'Σ⁻¹(μ−μ̂) ≤ ε²`.
///
/// At `θ = 0` every point of the ellipsoid is a minimizer; `μ̂` is returned.
pub fn worst_case_drift(
    theta: &DVector<f64>,
    cov: &Covariance,
    epsilon: f64,
    mu_hat: &DVector<f64>,
) -> DVector<f64> {
    let q = cov.quad(theta);
    if epsilon == 0.0 || q == 0.0 {
        return mu_hat.clone();
    }
    let cov_theta = cov.matrix() * theta;
    mu_hat - cov_theta * (epsilon / q.sqrt())
}

/// Effective worst-case covariance for volatility sets whose minimizer does
/// not depend on the portfolio.
///
/// The inner problem only sees `θ'Σθ` and prefers it as large as possible:
/// for a diagonal box that is the upper corner, for an eigenvalue cap it is
/// `λ̄²‖θ‖²`, reproduced by `λ̄² I`.
pub fn worst_case_cov(problem: &ValidatedProblem) -> Result<Covariance> {
    let n = problem.market().n();
    match &problem.ambiguity().vol {
        VolAmbiguity::None => Ok(problem.market().cov().clone()),
        VolAmbiguity::DiagonalBox { upper, .. } => Covariance::diagonal(upper),
        VolAmbiguity::EigenvalueCap { lambda_bar_sq } => Covariance::scaled_identity(n, *lambda_bar_sq),
        VolAmbiguity::FrobeniusBall { .. } => Err(Error::UnsupportedVariant(
            "frobenius-ball worst case depends on the portfolio; use the frobenius module",
        )),
    }
}

/// `γ_ε = (ρ + (R−1)(r + (H_ε⁺)²/(2R))) / R`.
pub fn gamma_epsilon(prefs: &Preferences, r: f64, h_eps_plus: f64) -> f64 {
    let big_r = prefs.risk_aversion;
    (prefs.rho + (big_r - 1.0) * (r + h_eps_plus * h_eps_plus / (2.0 * big_r))) / big_r
}

/// `k_ε = (1−R)(r + (H_ε⁺)²/(2R))`.
pub fn k_epsilon(risk_aversion: f64, r: f64, h_eps_plus: f64) -> f64 {
    (1.0 - risk_aversion) * (r + h_eps_plus * h_eps_plus / (2.0 * risk_aversion))
}

/// Controls proving divergence of an ill-posed infinite-horizon problem.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceWitness {
    /// `θ = πw`, `c = λw`: expected discounted utility grows like
    /// `exp(growth_exponent · t)` with a positive exponent.
    ProportionalConsumption {
        pi: DVector<f64>,
        lambda: f64,
        growth_exponent: f64,
    },
    /// `γ_ε = 0`: `θ = πw`, `c = k/(1+t) w`. The integrand decays like
    /// `(1+t)^{−1}`, so the integral diverges.
    HyperbolicConsumption { pi: DVector<f64>, k: f64 },
}

impl fmt::Display for DivergenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceWitness::ProportionalConsumption {
                pi,
                lambda,
                growth_exponent,
            } => write!(
                f,
                "witness: pi = {:?}, c = {lambda} w, utility growth exponent {growth_exponent} > 0",
                pi.as_slice()
            ),
            DivergenceWitness::HyperbolicConsumption { pi, k } => write!(
                f,
                "witness: pi = {:?}, c = {k}/(1+t) w, integrand ~ 1/(1+t)",
                pi.as_slice()
            ),
        }
    }
}

fn divergence_witness(pi: &DVector<f64>, gamma_eps: f64, risk_aversion: f64) -> Option<DivergenceWitness> {
    if gamma_eps > 0.0 {
        return None;
    }
    // γ_ε ≤ 0 forces 0 < R < 1.
    let one_minus = 1.0 - risk_aversion;
    if gamma_eps < 0.0 {
        let lambda = -risk_aversion * gamma_eps / (2.0 * one_minus);
        Some(DivergenceWitness::ProportionalConsumption {
            pi: pi.clone(),
            lambda,
            growth_exponent: -risk_aversion * gamma_eps - lambda * one_minus,
        })
    } else {
        Some(DivergenceWitness::HyperbolicConsumption {
            pi: pi.clone(),
            k: 1.0 / one_minus - 1.0,
        })
    }
}

/// Portfolio quantities shared by every horizon.
#[derive(Debug, Clone)]
pub(crate) struct Allocation {
    pub sharpe: f64,
    pub sharpe_eps_plus: f64,
    pub shrink: f64,
    pub merton_pi: DVector<f64>,
    pub pi: DVector<f64>,
    pub worst_mu: DVector<f64>,
}

pub(crate) fn allocation(
    mu_hat: &DVector<f64>,
    r: f64,
    epsilon: f64,
    risk_aversion: f64,
    cov: &Covariance,
) -> Allocation {
    let excess = mu_hat.add_scalar(-r);
    let merton_pi = cov.solve(&excess) / risk_aversion;
    let sharpe = sharpe_ratio(mu_hat, cov, r);
    let sharpe_eps_plus = (sharpe - epsilon).max(0.0);
    let shrink = if sharpe > 0.0 { sharpe_eps_plus / sharpe } else { 0.0 };
    let pi = if shrink > 0.0 {
        &merton_pi * shrink
    } else {
        DVector::zeros(mu_hat.len())
    };
    let worst_mu = worst_case_drift(&pi, cov, epsilon, mu_hat);
    Allocation {
        sharpe,
        sharpe_eps_plus,
        shrink,
        merton_pi,
        pi,
        worst_mu,
    }
}

#[derive(Debug, Clone)]
pub struct InfiniteHorizonReport {
    /// Optimal fractions of wealth in the risky assets.
    pub pi_eps: DVector<f64>,
    pub gamma_eps: f64,
    /// Sharpe ratio under the worst-case covariance.
    pub sharpe: f64,
    pub sharpe_eps_plus: f64,
    pub worst_mu: DVector<f64>,
    pub worst_cov: Covariance,
    pub well_posed: bool,
    /// Ambiguity-neutral portfolio at the same covariance.
    pub merton_pi: DVector<f64>,
    /// `H_ε⁺ / H`, zero when `H = 0`.
    pub shrink: f64,
    pub divergence: Option<DivergenceWitness>,
    pub r: f64,
    pub rho: f64,
    pub risk_aversion: f64,
}

impl InfiniteHorizonReport {
    pub(crate) fn from_allocation(
        alloc: Allocation,
        worst_cov: Covariance,
        r: f64,
        prefs: &Preferences,
    ) -> Self {
        let gamma_eps = gamma_epsilon(prefs, r, alloc.sharpe_eps_plus);
        let divergence = divergence_witness(&alloc.pi, gamma_eps, prefs.risk_aversion);
        Self {
            pi_eps: alloc.pi,
            gamma_eps,
            sharpe: alloc.sharpe,
            sharpe_eps_plus: alloc.sharpe_eps_plus,
            worst_mu: alloc.worst_mu,
            worst_cov,
            well_posed: gamma_eps > 0.0,
            merton_pi: alloc.merton_pi,
            shrink: alloc.shrink,
            divergence,
            r,
            rho: prefs.rho,
            risk_aversion: prefs.risk_aversion,
        }
    }

    fn ill_posed(&self) -> Error {
        Error::IllPosed {
            gamma_eps: self.gamma_eps,
            witness: self.divergence.clone().expect("ill-posed reports carry a witness"),
        }
    }

    /// `V(0, w₀) = γ_ε^{−R} w₀^{1−R} / (1−R)`.
    pub fn value_at(&self, w0: f64) -> Result<f64> {
        if !self.well_posed {
            return Err(self.ill_posed());
        }
        let one_minus = 1.0 - self.risk_aversion;
        Ok(self.gamma_eps.powf(-self.risk_aversion) * w0.powf(one_minus) / one_minus)
    }

    pub fn value_function(&self) -> Result<ValueFunction> {
        if !self.well_posed {
            return Err(self.ill_posed());
        }
        Ok(ValueFunction::Infinite {
            gamma: self.gamma_eps,
            rho: self.rho,
            risk_aversion: self.risk_aversion,
        })
    }

    pub fn policy(&self) -> Result<Policy> {
        if !self.well_posed {
            return Err(self.ill_posed());
        }
        Ok(Policy::new(self.pi_eps.clone(), ConsumptionRule::Proportional(self.gamma_eps)))
    }

    /// Log-wealth law under the worst-case measure.
    pub fn wealth_law(&self, w0: f64) -> Result<WealthLaw> {
        Ok(WealthLaw {
            log_w0: w0.ln(),
            growth: investment_growth(self.r, self.sharpe_eps_plus, self.risk_aversion),
            log_vol: self.worst_cov.factor().transpose() * &self.pi_eps,
            consumption: self.policy()?.consumption,
        })
    }
}

/// `r + (H_ε⁺)²(2R−1)/(2R²)`: log-growth of wealth before consumption at the
/// robust portfolio under the worst-case measure.
fn investment_growth(r: f64, h_plus: f64, big_r: f64) -> f64 {
    r + h_plus * h_plus * (2.0 * big_r - 1.0) / (2.0 * big_r * big_r)
}

pub fn solve_infinite(problem: &ValidatedProblem) -> Result<InfiniteHorizonReport> {
    if problem.prefs().horizon != Horizon::Infinite {
        return Err(Error::HorizonMismatch("solve_infinite needs an infinite horizon".into()));
    }
    let worst_cov = worst_case_cov(problem)?;
    Ok(solve_infinite_at(problem, worst_cov))
}

/// Infinite-horizon closed form with the covariance fixed at `worst_cov`.
pub fn solve_infinite_at(problem: &ValidatedProblem, worst_cov: Covariance) -> InfiniteHorizonReport {
    let market = problem.market();
    let alloc = allocation(
        market.mu_hat(),
        market.r(),
        problem.epsilon(),
        problem.prefs().risk_aversion,
        &worst_cov,
    );
    InfiniteHorizonReport::from_allocation(alloc, worst_cov, market.r(), problem.prefs())
}

/// Solution `g` of the linearized finite-horizon value ODE, with `f = g^R`
/// solving `f' + k f + R e^{−ρt/R} f^{1−1/R} = 0`, `f(T) = A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunction {
    pub k: f64,
    pub rho: f64,
    pub risk_aversion: f64,
    pub t_end: f64,
    pub bequest: f64,
}

impl GFunction {
    /// `∫_t^T exp((k−ρ)s/R) ds`.
    pub fn tail_integral(&self, t: f64) -> f64 {
        let big_r = self.risk_aversion;
        let d = self.k - self.rho;
        if d.abs() <= DEGENERATE_RATE_TOL {
            (self.t_end - t) * (d * t / big_r).exp()
        } else {
            // R/d · (e^{dT/R} − e^{dt/R}), written with expm1 for small d.
            (d * t / big_r).exp() * big_r * (d * (self.t_end - t) / big_r).exp_m1() / d
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let big_r = self.risk_aversion;
        self.bequest.powf(1.0 / big_r) * (self.k * (self.t_end - t) / big_r).exp()
            + (-self.k * t / big_r).exp() * self.tail_integral(t)
    }

    /// Derivative of [`eval`](Self::eval), differentiated term by term.
    pub fn derivative(&self, t: f64) -> f64 {
        let big_r = self.risk_aversion;
        let a = self.bequest.powf(1.0 / big_r);
        let first = -(self.k / big_r) * a * (self.k * (self.t_end - t) / big_r).exp();
        let damp = (-self.k * t / big_r).exp();
        let second = -(self.k / big_r) * damp * self.tail_integral(t);
        let third = -damp * ((self.k - self.rho) * t / big_r).exp();
        first + second + third
    }

    /// `f(t) = g(t)^R`.
    pub fn f(&self, t: f64) -> f64 {
        self.eval(t).powf(self.risk_aversion)
    }

    pub fn f_derivative(&self, t: f64) -> f64 {
        let big_r = self.risk_aversion;
        big_r * self.eval(t).powf(big_r - 1.0) * self.derivative(t)
    }

    /// Residual of `f' + k f + R e^{−ρt/R} f^{1−1/R}` using the analytic
    /// derivative.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let big_r = self.risk_aversion;
        let f = self.f(t);
        self.f_derivative(t) + self.k * f + big_r * (-self.rho * t / big_r).exp() * f.powf(1.0 - 1.0 / big_r)
    }

    /// Consumption per unit wealth, `e^{−ρt/R}/g(t)`.
    pub fn consumption_rate(&self, t: f64) -> f64 {
        (-self.rho * t / self.risk_aversion).exp() / self.eval(t)
    }

    /// `∫_{t0}^{t1} e^{−ρs/R}/g(s) ds` in closed form. The linear ODE
    /// `g' = −(k/R) g − e^{−ρt/R}` turns the integrand into `−g'/g − k/R`.
    pub fn cumulative_consumption(&self, t0: f64, t1: f64) -> f64 {
        (self.eval(t0) / self.eval(t1)).ln() - self.k * (t1 - t0) / self.risk_aversion
    }

    /// The same integral by composite Simpson quadrature.
    pub fn cumulative_consumption_simpson(&self, t0: f64, t1: f64, panels: usize) -> f64 {
        simpson(|s| self.consumption_rate(s), t0, t1, panels)
    }
}

/// Composite Simpson rule; `panels` is rounded up to an even count.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..m {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

#[derive(Debug, Clone)]
pub struct FiniteHorizonReport {
    pub pi_eps: DVector<f64>,
    pub k_eps: f64,
    pub g: GFunction,
    pub sharpe: f64,
    pub sharpe_eps_plus: f64,
    pub worst_mu: DVector<f64>,
    pub worst_cov: Covariance,
    pub merton_pi: DVector<f64>,
    pub shrink: f64,
    pub r: f64,
}

impl FiniteHorizonReport {
    /// Consumption per unit wealth at time `t`.
    pub fn consumption_rate(&self, t: f64) -> f64 {
        self.g.consumption_rate(t)
    }

    /// `V(0, w₀) = g(0)^R w₀^{1−R}/(1−R)`.
    pub fn value_at(&self, w0: f64) -> f64 {
        let one_minus = 1.0 - self.g.risk_aversion;
        self.g.f(0.0) * w0.powf(one_minus) / one_minus
    }

    pub fn value_function(&self) -> ValueFunction {
        ValueFunction::Finite(self.g)
    }

    pub fn policy(&self) -> Policy {
        Policy::new(self.pi_eps.clone(), ConsumptionRule::Horizon(self.g))
    }

    pub fn wealth_law(&self, w0: f64) -> WealthLaw {
        WealthLaw {
            log_w0: w0.ln(),
            growth: investment_growth(self.r, self.sharpe_eps_plus, self.g.risk_aversion),
            log_vol: self.worst_cov.factor().transpose() * &self.pi_eps,
            consumption: ConsumptionRule::Horizon(self.g),
        }
    }
}

pub fn solve_finite(problem: &ValidatedProblem) -> Result<FiniteHorizonReport> {
    let Horizon::Finite { t, bequest } = problem.prefs().horizon else {
        return Err(Error::HorizonMismatch("solve_finite needs a finite horizon".into()));
    };
    let worst_cov = worst_case_cov(problem)?;
    let market = problem.market();
    let prefs = problem.prefs();
    let alloc = allocation(
        market.mu_hat(),
        market.r(),
        problem.epsilon(),
        prefs.risk_aversion,
        &worst_cov,
    );
    let k_eps = k_epsilon(prefs.risk_aversion, market.r(), alloc.sharpe_eps_plus);
    Ok(FiniteHorizonReport {
        pi_eps: alloc.pi,
        k_eps,
        g: GFunction {
            k: k_eps,
            rho: prefs.rho,
            risk_aversion: prefs.risk_aversion,
            t_end: t,
            bequest,
        },
        sharpe: alloc.sharpe,
        sharpe_eps_plus: alloc.sharpe_eps_plus,
        worst_mu: alloc.worst_mu,
        worst_cov,
        merton_pi: alloc.merton_pi,
        shrink: alloc.shrink,
        r: market.r(),
    })
}

/// Law of log-wealth under the worst-case measure at the optimal controls:
/// `log w_t = log w₀ + growth·t − ∫₀ᵗ c_s/w_s ds + (σ̄'π)'W_t`.
#[derive(Debug, Clone)]
pub struct WealthLaw {
    pub log_w0: f64,
    /// Drift of log-wealth before consumption.
    pub growth: f64,
    /// Loading of log-wealth on the Brownian motion, `σ̄'π`.
    pub log_vol: DVector<f64>,
    pub consumption: ConsumptionRule,
}

impl WealthLaw {
    /// Constant log-drift, when consumption is a constant fraction of wealth.
    pub fn log_drift(&self) -> Option<f64> {
        match self.consumption {
            ConsumptionRule::Proportional(k) => Some(self.growth - k),
            ConsumptionRule::Zero => Some(self.growth),
            ConsumptionRule::Horizon(_) => None,
        }
    }

    pub fn log_mean(&self, t: f64) -> f64 {
        let consumed = match &self.consumption {
            ConsumptionRule::Horizon(g) => g.cumulative_consumption_simpson(0.0, t, SIMPSON_PANELS),
            other => other.cumulative(0.0, t),
        };
        self.log_w0 + self.growth * t - consumed
    }

    pub fn log_variance(&self, t: f64) -> f64 {
        self.log_vol.norm_squared() * t
    }
}

/// CRRA value function `V(t, w)` with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueFunction {
    /// `γ^{−R} e^{−ρt} w^{1−R}/(1−R)`.
    Infinite { gamma: f64, rho: f64, risk_aversion: f64 },
    /// `f(t) w^{1−R}/(1−R)`, `f = g^R`.
    Finite(GFunction),
}

impl ValueFunction {
    pub fn risk_aversion(&self) -> f64 {
        match self {
            ValueFunction::Infinite { risk_aversion, .. } => *risk_aversion,
            ValueFunction::Finite(g) => g.risk_aversion,
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            ValueFunction::Infinite { rho, .. } => *rho,
            ValueFunction::Finite(g) => g.rho,
        }
    }

    /// Time factor `a(t)` with `V = a(t) w^{1−R}/(1−R)`, and its derivative.
    fn time_factor(&self, t: f64) -> (f64, f64) {
        match self {
            ValueFunction::Infinite {
                gamma,
                rho,
                risk_aversion,
            } => {
                let a = gamma.powf(-risk_aversion) * (-rho * t).exp();
                (a, -rho * a)
            }
            ValueFunction::Finite(g) => (g.f(t), g.f_derivative(t)),
        }
    }

    pub fn value(&self, t: f64, w: f64) -> f64 {
        let one_minus = 1.0 - self.risk_aversion();
        self.time_factor(t).0 * w.powf(one_minus) / one_minus
    }

    pub fn v_t(&self, t: f64, w: f64) -> f64 {
        let one_minus = 1.0 - self.risk_aversion();
        self.time_factor(t).1 * w.powf(one_minus) / one_minus
    }

    pub fn v_w(&self, t: f64, w: f64) -> f64 {
        self.time_factor(t).0 * w.powf(-self.risk_aversion())
    }

    pub fn v_ww(&self, t: f64, w: f64) -> f64 {
        let big_r = self.risk_aversion();
        -big_r * self.time_factor(t).0 * w.powf(-big_r - 1.0)
    }
}

/// Solution of either horizon, dispatching on the problem's variant.
#[derive(Debug, Clone)]
pub enum RobustSolution {
    Infinite(InfiniteHorizonReport),
    Finite(FiniteHorizonReport),
}

impl RobustSolution {
    pub fn solve(problem: &ValidatedProblem) -> Result<Self> {
        let frobenius = matches!(problem.ambiguity().vol, VolAmbiguity::FrobeniusBall { .. });
        match (problem.prefs().horizon, frobenius) {
            (Horizon::Infinite, false) => solve_infinite(problem).map(Self::Infinite),
            (Horizon::Infinite, true) => {
                crate::frobenius::solve_infinite_frobenius(problem).map(|s| Self::Infinite(s.report))
            }
            (Horizon::Finite { .. }, false) => solve_finite(problem).map(Self::Finite),
            (Horizon::Finite { .. }, true) => Err(Error::UnsupportedVariant(
                "frobenius-ball ambiguity is solved for the infinite horizon only",
            )),
        }
    }

    pub fn well_posed(&self) -> bool {
        match self {
            RobustSolution::Infinite(rep) => rep.well_posed,
            RobustSolution::Finite(_) => true,
        }
    }

    /// Optimal portfolio; absent for an ill-posed problem.
    pub fn pi(&self) -> Option<&DVector<f64>> {
        match self {
            RobustSolution::Infinite(rep) if !rep.well_posed => None,
            RobustSolution::Infinite(rep) => Some(&rep.pi_eps),
            RobustSolution::Finite(rep) => Some(&rep.pi_eps),
        }
    }

    pub fn worst_mu(&self) -> Option<&DVector<f64>> {
        match self {
            RobustSolution::Infinite(rep) if !rep.well_posed => None,
            RobustSolution::Infinite(rep) => Some(&rep.worst_mu),
            RobustSolution::Finite(rep) => Some(&rep.worst_mu),
        }
    }

    pub fn worst_cov(&self) -> &Covariance {
        match self {
            RobustSolution::Infinite(rep) => &rep.worst_cov,
            RobustSolution::Finite(rep) => &rep.worst_cov,
        }
    }

    pub fn sharpe(&self) -> f64 {
        match self {
            RobustSolution::Infinite(rep) => rep.sharpe,
            RobustSolution::Finite(rep) => rep.sharpe,
        }
    }

    pub fn sharpe_eps_plus(&self) -> f64 {
        match self {
            RobustSolution::Infinite(rep) => rep.sharpe_eps_plus,
            RobustSolution::Finite(rep) => rep.sharpe_eps_plus,
        }
    }

    pub fn shrink(&self) -> f64 {
        match self {
            RobustSolution::Infinite(rep) => rep.shrink,
            RobustSolution::Finite(rep) => rep.shrink,
        }
    }

    pub fn merton_pi(&self) -> &DVector<f64> {
        match self {
            RobustSolution::Infinite(rep) => &rep.merton_pi,
            RobustSolution::Finite(rep) => &rep.merton_pi,
        }
    }

    pub fn value_at(&self, w0: f64) -> Option<f64> {
        match self {
            RobustSolution::Infinite(rep) => rep.value_at(w0).ok(),
            RobustSolution::Finite(rep) => Some(rep.value_at(w0)),
        }
    }

    pub fn value_function(&self) -> Result<ValueFunction> {
        match self {
            RobustSolution::Infinite(rep) => rep.value_function(),
            RobustSolution::Finite(rep) => Ok(rep.value_function()),
        }
    }

    pub fn policy(&self) -> Result<Policy> {
        match self {
            RobustSolution::Infinite(rep) => rep.policy(),
            RobustSolution::Finite(rep) => Ok(rep.policy()),
        }
    }

    pub fn divergence(&self) -> Option<&DivergenceWitness> {
        match self {
            RobustSolution::Infinite(rep) => rep.divergence.as_ref(),
            RobustSolution::Finite(_) => None,
        }
    }
}

/// Log-wealth law of the optimally controlled wealth under the worst-case
/// measure.
pub fn optimal_wealth_law(solution: &RobustSolution, w0: f64) -> Result<WealthLaw> {
    match solution {
        RobustSolution::Infinite(rep) => rep.wealth_law(w0),
        RobustSolution::Finite(rep) => Ok(rep.wealth_law(w0)),
    }
}

/// Outer product `x x'`.
pub(crate) fn dyad(x: &DVector<f64>) -> DMatrix<f64> {
    x * x.transpose()
}
