//! Volatility ambiguity as a Frobenius ball around the covariance estimate.
//!
//! In wealth-relative coordinates the adversary maximizes
//! `ε√⟨Θ,Σ⟩ + (R/2)⟨Θ,Σ⟩` over the ball, with `Θ = ππ'`. Both terms increase
//! in `⟨Θ,Σ⟩`, so the worst case pushes `Σ̂` by the full radius along `Θ`:
//! `Σ̄ = Σ̂ + δ Θ/‖Θ‖_F`. The first-order multiplier form gives the same matrix
//! and is kept as a cross-check.
//!
//! The outer portfolio has no closed form; [`solve_infinite_frobenius`] runs a
//! damped fixed-point iteration between the kernel portfolio at a given
//! covariance and the worst-case covariance at a given portfolio.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{allocation, dyad, InfiniteHorizonReport};
use crate::model::{sharpe_ratio, Covariance, Horizon, ValidatedProblem, VolAmbiguity};

pub const DAMPING: f64 = 0.5;
pub const STEP_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct FrobeniusInner {
    /// `Θ = ππ'`.
    pub theta: DMatrix<f64>,
    /// `⟨Θ, Σ̂⟩`.
    pub a: f64,
    /// `‖Θ‖_F`.
    pub b: f64,
    /// `√(A + δB)`.
    pub xi: f64,
    /// Multiplier of the ball constraint (infinite when `δ = 0`).
    pub multiplier: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub sigma_hat: DMatrix<f64>,
    pub sigma_bar: Covariance,
}

impl FrobeniusInner {
    /// `Σ̂ + (1/(2λ̄))(α + β/(2ξ)) Θ`, the first-order-condition form.
    pub fn multiplier_form(&self) -> DMatrix<f64> {
        if self.delta == 0.0 {
            return self.sigma_hat.clone();
        }
        let coef = (self.alpha + self.beta / (2.0 * self.xi)) / (2.0 * self.multiplier);
        &self.sigma_hat + &self.theta * coef
    }

    /// `⟨Θ, Σ̄⟩`, the worst-case portfolio variance per unit wealth squared.
    pub fn worst_quadratic_form(&self) -> f64 {
        self.a + self.delta * self.b
    }
}

/// Adversary's objective `ε√(π'Σπ) + (R/2) π'Σπ`.
pub fn inner_objective(pi: &DVector<f64>, cov: &DMatrix<f64>, epsilon: f64, risk_aversion: f64) -> f64 {
    let q = (pi.transpose() * cov * pi)[(0, 0)];
    epsilon * q.max(0.0).sqrt() + 0.5 * risk_aversion * q
}

pub fn worst_cov_frobenius(
    pi: &DVector<f64>,
    sigma_hat: &Covariance,
    delta: f64,
    risk_aversion: f64,
    epsilon: f64,
) -> Result<FrobeniusInner> {
    if pi.iter().all(|x| *x == 0.0) {
        return Err(Error::ZeroPortfolio);
    }
    let theta = dyad(pi);
    let a = sigma_hat.quad(pi);
    let b = theta.norm();
    let xi = (a + delta * b).sqrt();
    let alpha = 0.5 * risk_aversion;
    let beta = epsilon;
    let multiplier = if delta > 0.0 {
        (2.0 * alpha * xi + beta) * b / (4.0 * delta * xi)
    } else {
        f64::INFINITY
    };
    let sigma_bar = Covariance::new(sigma_hat.matrix() + &theta * (delta / b))?;
    Ok(FrobeniusInner {
        theta,
        a,
        b,
        xi,
        multiplier,
        alpha,
        beta,
        delta,
        sigma_hat: sigma_hat.matrix().clone(),
        sigma_bar,
    })
}

#[derive(Debug, Clone)]
pub struct FrobeniusSolution {
    pub report: InfiniteHorizonReport,
    pub iterations: usize,
    /// Sup-norm of the last portfolio update.
    pub last_step: f64,
    /// Whether the directional fallback replaced the fixed-point iteration.
    pub used_fallback: bool,
}

struct Setup<'a> {
    mu_hat: &'a DVector<f64>,
    r: f64,
    epsilon: f64,
    risk_aversion: f64,
    sigma_hat: &'a Covariance,
    delta: f64,
}

impl Setup<'_> {
    fn worst(&self, pi: &DVector<f64>) -> Result<Covariance> {
        Ok(worst_cov_frobenius(pi, self.sigma_hat, self.delta, self.risk_aversion, self.epsilon)?.sigma_bar)
    }

    fn kernel_pi(&self, cov: &Covariance) -> DVector<f64> {
        allocation(self.mu_hat, self.r, self.epsilon, self.risk_aversion, cov).pi
    }

    /// Max-min objective `π'(μ̂−r𝟏) − ε√q − (R/2)q` with `q = ⟨ππ', Σ̄(π)⟩`.
    fn robust_objective(&self, pi: &DVector<f64>) -> f64 {
        let q = self.sigma_hat.quad(pi) + self.delta * pi.norm_squared();
        pi.dot(&self.mu_hat.add_scalar(-self.r)) - self.epsilon * q.sqrt() - 0.5 * self.risk_aversion * q
    }
}

pub fn solve_infinite_frobenius(problem: &ValidatedProblem) -> Result<FrobeniusSolution> {
    let VolAmbiguity::FrobeniusBall { delta } = problem.ambiguity().vol else {
        return Err(Error::UnsupportedVariant("solve_infinite_frobenius needs a frobenius-ball model"));
    };
    if problem.prefs().horizon != Horizon::Infinite {
        return Err(Error::HorizonMismatch(
            "frobenius-ball ambiguity is solved for the infinite horizon only".into(),
        ));
    }
    let market = problem.market();
    let setup = Setup {
        mu_hat: market.mu_hat(),
        r: market.r(),
        epsilon: problem.epsilon(),
        risk_aversion: problem.prefs().risk_aversion,
        sigma_hat: market.cov(),
        delta,
    };
    let n = market.n();

    // Along a direction d the max-min objective has slope d'(μ̂−r𝟏)/√(d'(Σ̂+δI)d)
    // at the origin; investing pays only if some direction beats ε.
    let cutoff = sharpe_ratio(
        market.mu_hat(),
        &Covariance::new(market.cov().matrix() + DMatrix::identity(n, n) * delta)?,
        market.r(),
    );
    if setup.epsilon >= cutoff {
        let mut alloc = allocation(setup.mu_hat, setup.r, setup.epsilon, setup.risk_aversion, setup.sigma_hat);
        alloc.sharpe = cutoff;
        alloc.sharpe_eps_plus = 0.0;
        alloc.shrink = 0.0;
        alloc.pi = DVector::zeros(n);
        alloc.worst_mu = market.mu_hat().clone();
        return Ok(FrobeniusSolution {
            report: InfiniteHorizonReport::from_allocation(alloc, market.cov().clone(), market.r(), problem.prefs()),
            iterations: 0,
            last_step: 0.0,
            used_fallback: false,
        });
    }

    let (pi, iterations, last_step, used_fallback) = match fixed_point(&setup) {
        Ok((pi, it, step)) => (pi, it, step, false),
        Err(Error::NoConvergence { .. }) => {
            let (pi, it, step) = directional_fallback(&setup)?;
            (pi, it, step, true)
        }
        Err(e) => return Err(e),
    };
    let worst_cov = setup.worst(&pi)?;
    let alloc = allocation(setup.mu_hat, setup.r, setup.epsilon, setup.risk_aversion, &worst_cov);
    Ok(FrobeniusSolution {
        report: InfiniteHorizonReport::from_allocation(alloc, worst_cov, market.r(), problem.prefs()),
        iterations,
        last_step,
        used_fallback,
    })
}

fn fixed_point(setup: &Setup<'_>) -> Result<(DVector<f64>, usize, f64)> {
    let mut pi = setup.kernel_pi(setup.sigma_hat);
    let mut step = f64::INFINITY;
    for k in 1..=MAX_ITERATIONS {
        if pi.iter().all(|x| *x == 0.0) {
            // The iteration collapsed onto the origin; let the fallback decide.
            return Err(Error::NoConvergence {
                iterations: k,
                residual: step,
            });
        }
        let target = setup.kernel_pi(&setup.worst(&pi)?);
        let next = &pi * (1.0 - DAMPING) + target * DAMPING;
        step = (&next - &pi).amax();
        pi = next;
        if step < STEP_TOL {
            return Ok((pi, k, step));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: step,
    })
}

/// Alternates the direction `Σ̄(π)⁻¹(μ̂−r𝟏)` with a golden-section search of
/// the concave max-min objective along it.
fn directional_fallback(setup: &Setup<'_>) -> Result<(DVector<f64>, usize, f64)> {
    let excess = setup.mu_hat.add_scalar(-setup.r);
    let mut cov = setup.sigma_hat.clone();
    let mut pi = DVector::zeros(excess.len());
    let mut step = f64::INFINITY;
    for k in 1..=MAX_ITERATIONS {
        let dir = cov.solve(&excess);
        let dir = &dir / dir.norm();
        let slope = dir.dot(&excess);
        let q_unit = setup.sigma_hat.quad(&dir) + setup.delta;
        // the objective along t·dir is negative beyond this length
        let t_max = 2.0 * slope.max(0.0) / (setup.risk_aversion * q_unit);
        let t = golden_max(|t| setup.robust_objective(&(&dir * t)), 0.0, t_max.max(0.0));
        let next = dir * t;
        step = (&next - &pi).amax();
        pi = next;
        if step < STEP_TOL {
            return Ok((pi, k, step));
        }
        if pi.iter().all(|x| *x == 0.0) {
            return Ok((pi, k, step));
        }
        cov = setup.worst(&pi)?;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: step,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-14 * (1.0 + a.abs() + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
