//! Brute-force verifiers for the closed forms.
//!
//! Every routine here evaluates the defining optimization problem directly
//! (sampling the feasible set, plugging controls into the HJB operator,
//! enumerating constant drifts) instead of reusing the kernel formulas.
//! Sampling is split into fixed-size chunks, each with its own stream keyed
//! by `(seed, chunk)`, and reduced in chunk order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{RobustSolution, ValueFunction};
use crate::model::{Covariance, Horizon, ValidatedProblem, VolAmbiguity};
use crate::rng::{NormalStream, UniformStream};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_samples: usize,
    pub grid_points_per_dim: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            grid_points_per_dim: 101,
            seed: 0x5EED,
            tolerance: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(Error::InvalidConfig(format!(
                "oracle n_samples must be >= 1000, got {}",
                self.n_samples
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "oracle tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.grid_points_per_dim < 2 {
            return Err(Error::InvalidConfig("oracle grid needs at least 2 points per dimension".into()));
        }
        Ok(())
    }
}

/// Symmetric square root `Q diag(√λ) Q'`.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

fn unit_vector(stream: &mut NormalStream, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| stream.next_normal());
        let norm = v.norm();
        if norm > 1e-300 {
            return v / norm;
        }
    }
}

fn chunk_ranges(n: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(n - c * CHUNK)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct EllipsoidSample {
    /// Smallest sampled value of `θ'μ`, including the KKT candidate point.
    pub min_value: f64,
    pub argmin: DVector<f64>,
    /// Smallest value over the random boundary points only.
    pub random_min: f64,
}

/// Samples `μ = μ̂ + ε Σ^{1/2} u` over unit directions `u` and minimizes `θ'μ`.
/// A linear objective attains its minimum on the boundary, so the interior is
/// not sampled.
pub fn ellipsoid_min_sampled(
    theta: &DVector<f64>,
    cov: &Covariance,
    epsilon: f64,
    mu_hat: &DVector<f64>,
    cfg: &OracleConfig,
) -> EllipsoidSample {
    let base = theta.dot(mu_hat);
    if epsilon == 0.0 {
        return EllipsoidSample {
            min_value: base,
            argmin: mu_hat.clone(),
            random_min: base,
        };
    }
    let n = mu_hat.len();
    let root = sym_sqrt(cov.matrix());
    // θ'(μ̂ + ε S u) = θ'μ̂ + ε (Sθ)'u
    let loading = &root * theta;
    let best = chunk_ranges(cfg.n_samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut stream = NormalStream::new(cfg.seed, chunk);
            let mut best = (f64::INFINITY, DVector::zeros(n));
            for _ in 0..len {
                let u = unit_vector(&mut stream, n);
                let v = base + epsilon * loading.dot(&u);
                if v < best.0 {
                    best = (v, u);
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, DVector::zeros(n)), |a, b| if b.0 < a.0 { b } else { a });
    let random_min = best.0;
    let mut winner = best;
    let ln = loading.norm();
    if ln > 0.0 {
        let u = -&loading / ln;
        let v = base + epsilon * loading.dot(&u);
        if v < winner.0 {
            winner = (v, u);
        }
    }
    EllipsoidSample {
        min_value: winner.0,
        argmin: mu_hat + root * winner.1 * epsilon,
        random_min,
    }
}

/// Largest `θ'Σθ` over the declared volatility set, by its own geometry.
pub fn worst_quadratic_form(problem: &ValidatedProblem, theta: &DVector<f64>) -> f64 {
    let cov = problem.market().cov();
    match &problem.ambiguity().vol {
        VolAmbiguity::None => cov.quad(theta),
        VolAmbiguity::DiagonalBox { upper, .. } => theta.iter().zip(upper).map(|(t, u)| t * t * u).sum(),
        VolAmbiguity::EigenvalueCap { lambda_bar_sq } => lambda_bar_sq * theta.norm_squared(),
        // ⟨θθ', Σ̂ + X⟩ with ‖X‖_F ≤ δ is maximized by X along θθ'.
        VolAmbiguity::FrobeniusBall { delta } => cov.quad(theta) + delta * theta.norm_squared(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HjbResidual {
    /// Residual with analytic derivatives of the value function.
    pub analytic: f64,
    /// Residual with finite-difference derivatives.
    pub finite_difference: f64,
    /// `e^{−ρt} w^{1−R}`, the natural size of the residual.
    pub scale: f64,
    /// Sum of absolute values of the terms in the analytic residual.
    pub magnitude: f64,
    /// Whether the finite differences fell back to Richardson extrapolation.
    pub richardson: bool,
}

impl HjbResidual {
    pub fn relative(&self) -> f64 {
        self.analytic / self.scale
    }

    /// Disagreement of the two evaluations relative to the term magnitudes.
    pub fn fd_disagreement(&self) -> f64 {
        (self.analytic - self.finite_difference).abs() / self.magnitude.max(f64::MIN_POSITIVE)
    }
}

struct Derivs {
    v_t: f64,
    v_w: f64,
    v_ww: f64,
}

fn fd_derivs(v: &ValueFunction, t: f64, w: f64, rel: f64, richardson: bool) -> Derivs {
    let ht = rel * t.abs().max(1.0);
    let hw = rel * w;
    let central = |ht: f64, hw: f64| Derivs {
        v_t: (v.value(t + ht, w) - v.value(t - ht, w)) / (2.0 * ht),
        v_w: (v.value(t, w + hw) - v.value(t, w - hw)) / (2.0 * hw),
        v_ww: (v.value(t, w + hw) - 2.0 * v.value(t, w) + v.value(t, w - hw)) / (hw * hw),
    };
    if !richardson {
        return central(ht, hw);
    }
    let fine = central(ht, hw);
    let coarse = central(2.0 * ht, 2.0 * hw);
    Derivs {
        v_t: (4.0 * fine.v_t - coarse.v_t) / 3.0,
        v_w: (4.0 * fine.v_w - coarse.v_w) / 3.0,
        v_ww: (4.0 * fine.v_ww - coarse.v_ww) / 3.0,
    }
}

/// Robust HJB operator
/// `u(t,c) + V_t + V_w(rw + θ'(μ̂−r𝟏) − ε√(θ'Σ̄θ) − c) + ½ θ'Σ̄θ V_ww`
/// at cash positions `theta` and consumption `c`, with `Σ̄` the worst case over
/// the volatility set. Zero at the optimum, nonpositive elsewhere.
pub fn hjb_residual(
    v: &ValueFunction,
    t: f64,
    w: f64,
    theta: &DVector<f64>,
    c: f64,
    problem: &ValidatedProblem,
) -> HjbResidual {
    let market = problem.market();
    let big_r = v.risk_aversion();
    let rho = v.rho();
    let q = worst_quadratic_form(problem, theta);
    let drift = market.r() * w + theta.dot(&market.excess_return()) - problem.epsilon() * q.sqrt() - c;
    let felicity = (-rho * t).exp() * c.powf(1.0 - big_r) / (1.0 - big_r);
    let eval = |d: &Derivs| felicity + d.v_t + d.v_w * drift + 0.5 * q * d.v_ww;
    let exact = Derivs {
        v_t: v.v_t(t, w),
        v_w: v.v_w(t, w),
        v_ww: v.v_ww(t, w),
    };
    let analytic = eval(&exact);
    let magnitude =
        felicity.abs() + exact.v_t.abs() + (exact.v_w * drift).abs() + (0.5 * q * exact.v_ww).abs();
    let mut richardson = false;
    let mut finite_difference = eval(&fd_derivs(v, t, w, 1e-5, false));
    if (finite_difference - analytic).abs() > 1e-6 * magnitude {
        richardson = true;
        finite_difference = eval(&fd_derivs(v, t, w, 1e-3, true));
    }
    HjbResidual {
        analytic,
        finite_difference,
        scale: (-rho * t).exp() * w.powf(1.0 - big_r),
        magnitude,
        richardson,
    }
}

/// Exponent of expected discounted utility growth for `θ = πw`, `c = λw`
/// under the worst-case drift: positive means the infinite-horizon value
/// diverges.
pub fn divergence_exponent(problem: &ValidatedProblem, pi: &DVector<f64>, lambda: f64) -> f64 {
    let market = problem.market();
    let big_r = problem.prefs().risk_aversion;
    let q = worst_quadratic_form(problem, pi);
    -problem.prefs().rho
        + (1.0 - big_r)
            * (market.r() + pi.dot(&market.excess_return()) - problem.epsilon() * q.sqrt() - lambda
                - 0.5 * big_r * q)
}

#[derive(Debug, Clone)]
pub struct MinimaxGap {
    /// Value of the robust controls under the worst-case drift.
    pub lower: f64,
    /// Smallest classical Merton value over the constant-drift grid.
    pub upper: f64,
    pub gap: f64,
    pub argmin: DVector<f64>,
    pub grid_size: usize,
}

impl MinimaxGap {
    pub fn relative(&self) -> f64 {
        self.gap / self.lower.abs()
    }
}

/// Compares the max-min value with the min over constant drifts of the
/// classical Merton value, at the solution's worst-case covariance and
/// `w₀ = 1`.
pub fn minimax_gap(problem: &ValidatedProblem, resolution: usize) -> Result<MinimaxGap> {
    if problem.prefs().horizon != Horizon::Infinite {
        return Err(Error::HorizonMismatch("minimax gap is defined for the infinite horizon".into()));
    }
    let solution = RobustSolution::solve(problem)?;
    let RobustSolution::Infinite(report) = &solution else {
        unreachable!("infinite horizon solves to an infinite report");
    };
    let lower = report.value_at(1.0)?;
    let market = problem.market();
    let cov = &report.worst_cov;
    let prefs = problem.prefs();
    let big_r = prefs.risk_aversion;
    let eps = problem.epsilon();
    let merton_value = |mu: &DVector<f64>| -> Option<f64> {
        let h2 = cov.inv_quad(&mu.add_scalar(-market.r()));
        let gamma = (prefs.rho + (big_r - 1.0) * (market.r() + h2 / (2.0 * big_r))) / big_r;
        (gamma > 0.0).then(|| gamma.powf(-big_r) / (1.0 - big_r))
    };
    let grid = drift_grid(market.mu_hat(), cov, eps, resolution.max(2));
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mu in &grid {
        if let Some(v) = merton_value(mu) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, mu.clone()));
            }
        }
    }
    let (upper, argmin) = best.ok_or_else(|| {
        Error::InvalidConfig("every grid drift gives an ill-posed classical problem".into())
    })?;
    Ok(MinimaxGap {
        lower,
        upper,
        gap: upper - lower,
        argmin,
        grid_size: grid.len(),
    })
}

/// Constant drifts covering the ellipsoid: an interval in one dimension, polar
/// rings in two, random directions on radial shells above that.
fn drift_grid(mu_hat: &DVector<f64>, cov: &Covariance, eps: f64, resolution: usize) -> Vec<DVector<f64>> {
    let n = mu_hat.len();
    if eps == 0.0 {
        return vec![mu_hat.clone()];
    }
    let root = sym_sqrt(cov.matrix()) * eps;
    let mut out = Vec::with_capacity(resolution + resolution / 2);
    match n {
        1 => {
            for i in 0..resolution {
                let s = -1.0 + 2.0 * i as f64 / (resolution - 1) as f64;
                out.push(mu_hat + &root * DVector::from_element(1, s));
            }
        }
        2 => {
            out.push(mu_hat.clone());
            let rings = 10;
            for j in 1..=rings {
                let radius = j as f64 / rings as f64;
                let count = if j == rings { resolution } else { (resolution / rings).max(8) };
                for k in 0..count {
                    let a = std::f64::consts::TAU * k as f64 / count as f64;
                    out.push(mu_hat + &root * DVector::from_vec(vec![a.cos(), a.sin()]) * radius);
                }
            }
        }
        _ => {
            out.push(mu_hat.clone());
            let mut stream = NormalStream::new(0x6D_696E_696D_6178, 0);
            for i in 0..resolution {
                let u = unit_vector(&mut stream, n);
                let radius = if i % 2 == 0 { 1.0 } else { ((i % 20) as f64 + 1.0) / 20.0 };
                out.push(mu_hat + &root * u * radius);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct VolSetSample {
    /// Smallest sampled value of `−ε√(θ'Σθ) − (R/2)θ'Σθ`.
    pub value: f64,
    pub argmin_cov: DMatrix<f64>,
    pub samples: usize,
}

/// Adversarial objective over covariances in relative coordinates.
fn vol_objective(theta: &DVector<f64>, cov: &DMatrix<f64>, epsilon: f64, risk_aversion: f64) -> f64 {
    let q = (theta.transpose() * cov * theta)[(0, 0)].max(0.0);
    -epsilon * q.sqrt() - 0.5 * risk_aversion * q
}

/// Random orthogonal matrix (QR of a Gaussian matrix, sign-corrected).
pub(crate) fn random_orthogonal(stream: &mut NormalStream, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| stream.next_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Draws one covariance from the volatility set. `boundary` pushes the draw
/// onto the part of the set where the adversary's optimum lives.
pub(crate) fn sample_vol_set(
    problem: &ValidatedProblem,
    normals: &mut NormalStream,
    uniforms: &mut UniformStream,
    boundary: bool,
) -> DMatrix<f64> {
    let sigma_hat = problem.market().cov().matrix();
    let n = sigma_hat.nrows();
    match &problem.ambiguity().vol {
        VolAmbiguity::None => sigma_hat.clone(),
        VolAmbiguity::DiagonalBox { lower, upper } => DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            lower[i] + (upper[i] - lower[i]) * uniforms.next_f64()
        })),
        VolAmbiguity::EigenvalueCap { lambda_bar_sq } => {
            let q = random_orthogonal(normals, n);
            let spectrum = DVector::from_fn(n, |i, _| {
                if boundary && i == 0 {
                    *lambda_bar_sq
                } else {
                    lambda_bar_sq * (1.0 - uniforms.next_f64()).max(1e-3)
                }
            });
            &q * DMatrix::from_diagonal(&spectrum) * q.transpose()
        }
        VolAmbiguity::FrobeniusBall { delta } => {
            let g = DMatrix::from_fn(n, n, |_, _| normals.next_normal());
            let sym = (&g + g.transpose()) * 0.5;
            let dir = &sym / sym.norm();
            let dim = (n * (n + 1) / 2) as f64;
            let radius = if boundary { *delta } else { delta * uniforms.next_f64().powf(1.0 / dim) };
            sigma_hat + dir * radius
        }
    }
}

/// Minimizes the adversary's objective by sampling the volatility set: box
/// corners plus interior points, random orthogonal conjugations of capped
/// spectra, or random symmetric perturbations in the Frobenius ball. The best
/// cap and ball samples are refined by a local step that stays in the set.
pub fn volset_min_sampled(
    theta: &DVector<f64>,
    problem: &ValidatedProblem,
    cfg: &OracleConfig,
) -> VolSetSample {
    let eps = problem.epsilon();
    let big_r = problem.prefs().risk_aversion;
    let sigma_hat = problem.market().cov().matrix().clone();
    let n = sigma_hat.nrows();
    let objective = |c: &DMatrix<f64>| vol_objective(theta, c, eps, big_r);

    let mut candidates: Vec<DMatrix<f64>> = vec![sigma_hat.clone()];
    if let VolAmbiguity::DiagonalBox { lower, upper } = &problem.ambiguity().vol {
        if n <= 16 {
            for mask in 0u32..(1 << n) {
                candidates.push(DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
                    if mask & (1 << i) != 0 {
                        upper[i]
                    } else {
                        lower[i]
                    }
                })));
            }
        }
    }
    let mut best = candidates
        .into_iter()
        .map(|c| (objective(&c), c))
        .fold((f64::INFINITY, sigma_hat.clone()), |a, b| if b.0 < a.0 { b } else { a });
    let mut samples = 1;

    if problem.ambiguity().vol != VolAmbiguity::None {
        let sampled = chunk_ranges(cfg.n_samples)
            .into_par_iter()
            .map(|(chunk, len)| {
                let mut normals = NormalStream::new(cfg.seed, chunk);
                let mut uniforms = UniformStream::new(cfg.seed, chunk);
                let mut best = (f64::INFINITY, sigma_hat.clone());
                for i in 0..len {
                    let c = sample_vol_set(problem, &mut normals, &mut uniforms, i % 2 == 0);
                    let v = objective(&c);
                    if v < best.0 {
                        best = (v, c);
                    }
                }
                best
            })
            .collect::<Vec<_>>();
        for cand in sampled {
            if cand.0 < best.0 {
                best = cand;
            }
        }
        samples += cfg.n_samples;
    }

    if let VolAmbiguity::EigenvalueCap { .. } = problem.ambiguity().vol {
        // Local search over the orbit of the best sample: the Householder
        // reflection taking its top eigenvector onto θ keeps the spectrum,
        // so the result stays in the set.
        let tn = theta.norm();
        if tn > 0.0 {
            let eig = SymmetricEigen::new(best.1.clone());
            let top = eig.eigenvalues.imax();
            let q = eig.eigenvectors.column(top).into_owned();
            let q = if q.dot(theta) < 0.0 { -q } else { q };
            let u = &q - theta / tn;
            let un = u.norm_squared();
            if un > 0.0 {
                let h = DMatrix::identity(n, n) - &u * u.transpose() * (2.0 / un);
                let polished = &h * &best.1 * &h;
                let v = objective(&polished);
                if v < best.0 {
                    best = (v, polished);
                }
            }
        }
    }

    if let VolAmbiguity::FrobeniusBall { delta } = problem.ambiguity().vol {
        // Projected gradient ascent of θ'Σθ over the ball; the gradient in
        // the perturbation X = Σ − Σ̂ is θθ'.
        let grad = theta * theta.transpose();
        let gnorm = grad.norm();
        if gnorm > 0.0 && delta > 0.0 {
            let mut x = &best.1 - &sigma_hat;
            for _ in 0..500 {
                let mut next = &x + &grad * (delta / gnorm);
                let norm = next.norm();
                if norm > delta {
                    next *= delta / norm;
                }
                x = next;
            }
            let polished = &sigma_hat + x;
            let v = objective(&polished);
            if v < best.0 {
                best = (v, polished);
            }
        }
    }

    VolSetSample {
        value: best.0,
        argmin_cov: best.1,
        samples,
    }
}

/// Value of the adversary's objective at a given covariance, for comparison
/// with [`volset_min_sampled`].
pub fn vol_objective_at(theta: &DVector<f64>, cov: &DMatrix<f64>, problem: &ValidatedProblem) -> f64 {
    vol_objective(theta, cov, problem.epsilon(), problem.prefs().risk_aversion)
}
