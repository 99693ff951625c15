//! Market, ambiguity and preference types, plus the elementary quantities
//! every solver needs (Sharpe ratio, market price of ambiguity).
//!
//! The covariance matrix is the primitive. Whenever a volatility matrix is
//! required it is the lower-triangular Cholesky factor of the covariance.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for symmetry of covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Minimum distance of the risk aversion from one (log utility is excluded).
pub const LOG_UTILITY_GAP: f64 = 1e-9;

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct Covariance {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    lower: DMatrix<f64>,
}

impl Covariance {
    /// Symmetrizes `matrix` and factorizes it. Fails if the input is not
    /// square, has non-finite entries, is asymmetric beyond
    /// [`SYMMETRY_TOL`] (relative to its largest entry) or is not positive
    /// definite.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 {
            return Err(Error::NonSpdCovariance("empty matrix".into()));
        }
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "covariance columns",
                expected: n,
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariance entry".into()));
        }
        let scale = matrix.amax();
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(Error::NonSpdCovariance(format!(
                        "asymmetric at ({i},{j}): |{} - {}| exceeds relative tolerance",
                        matrix[(i, j)],
                        matrix[(j, i)]
                    )));
                }
            }
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let chol = Cholesky::new(matrix.clone()).ok_or_else(|| {
            Error::NonSpdCovariance("Cholesky factorization failed (matrix is not positive definite)".into())
        })?;
        let lower = chol.l();
        if lower.diagonal().iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::NonSpdCovariance("singular Cholesky factor".into()));
        }
        Ok(Self {
            matrix,
            chol,
            lower,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "covariance row length",
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// `scale * I` of dimension `n`.
    pub fn scaled_identity(n: usize, scale: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * scale)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular factor `L` with `L L' = Σ`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// `Σ⁻¹ x`, through the stored factorization.
    pub fn solve(&self, x: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(x)
    }

    /// `L⁻¹ x`.
    pub fn whiten(&self, x: &DVector<f64>) -> DVector<f64> {
        self.lower
            .solve_lower_triangular(x)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `x' Σ x`.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        // ‖L' x‖² is nonnegative by construction.
        (self.lower.transpose() * x).norm_squared()
    }

    /// `x' Σ⁻¹ x`.
    pub fn inv_quad(&self, x: &DVector<f64>) -> f64 {
        self.whiten(x).norm_squared()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }
}

/// Constant-coefficient market: riskless rate, drift estimate and covariance
/// estimate, all annualized.
#[derive(Debug, Clone)]
pub struct MarketModel {
    r: f64,
    mu_hat: DVector<f64>,
    cov: Covariance,
}

impl MarketModel {
    pub fn new(r: f64, mu_hat: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let cov = Covariance::new(cov)?;
        Self::with_covariance(r, mu_hat, cov)
    }

    pub fn with_covariance(r: f64, mu_hat: DVector<f64>, cov: Covariance) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite("riskless rate".into()));
        }
        if mu_hat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("drift estimate".into()));
        }
        if mu_hat.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                what: "drift length vs covariance size",
                expected: cov.dim(),
                found: mu_hat.len(),
            });
        }
        Ok(Self { r, mu_hat, cov })
    }

    /// Single-asset market with volatility given as a variance.
    pub fn scalar(r: f64, mu_hat: f64, variance: f64) -> Result<Self> {
        Self::new(
            r,
            DVector::from_element(1, mu_hat),
            DMatrix::from_element(1, 1, variance),
        )
    }

    pub fn n(&self) -> usize {
        self.mu_hat.len()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu_hat(&self) -> &DVector<f64> {
        &self.mu_hat
    }

    pub fn cov(&self) -> &Covariance {
        &self.cov
    }

    /// `μ̂ − r𝟏`.
    pub fn excess_return(&self) -> DVector<f64> {
        self.mu_hat.add_scalar(-self.r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VolAmbiguity {
    None,
    /// Diagonal covariances with each variance in `[lower_i, upper_i]`.
    DiagonalBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Covariances whose largest eigenvalue does not exceed `lambda_bar_sq`.
    EigenvalueCap { lambda_bar_sq: f64 },
    /// Covariances within Frobenius distance `delta` of the estimate.
    FrobeniusBall { delta: f64 },
}

impl VolAmbiguity {
    pub fn name(&self) -> &'static str {
        match self {
            VolAmbiguity::None => "none",
            VolAmbiguity::DiagonalBox { .. } => "diagonal-box",
            VolAmbiguity::EigenvalueCap { .. } => "eigenvalue-cap",
            VolAmbiguity::FrobeniusBall { .. } => "frobenius-ball",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityModel {
    /// Radius of the drift ellipsoid, in Sharpe-ratio units.
    pub epsilon: f64,
    pub vol: VolAmbiguity,
}

impl AmbiguityModel {
    pub fn drift_only(epsilon: f64) -> Self {
        Self {
            epsilon,
            vol: VolAmbiguity::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Infinite,
    /// Finite horizon `T` (years) with bequest weight `A` on terminal wealth.
    Finite { t: f64, bequest: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preferences {
    /// Impatience rate ρ.
    pub rho: f64,
    /// Relative risk aversion R.
    pub risk_aversion: f64,
    pub horizon: Horizon,
}

impl Preferences {
    pub fn infinite(rho: f64, risk_aversion: f64) -> Self {
        Self {
            rho,
            risk_aversion,
            horizon: Horizon::Infinite,
        }
    }

    pub fn finite(rho: f64, risk_aversion: f64, t: f64, bequest: f64) -> Self {
        Self {
            rho,
            risk_aversion,
            horizon: Horizon::Finite { t, bequest },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.risk_aversion;
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::BadPreferences(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::BadPreferences(format!("R must be > 0, got {r}")));
        }
        if (r - 1.0).abs() <= LOG_UTILITY_GAP {
            return Err(Error::BadPreferences(format!(
                "R must differ from 1 (log utility is not supported), got {r}"
            )));
        }
        if let Horizon::Finite { t, bequest } = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::BadPreferences(format!("horizon T must be > 0, got {t}")));
            }
            if !(bequest.is_finite() && bequest > 0.0) {
                return Err(Error::BadPreferences(format!(
                    "bequest weight A must be > 0, got {bequest}"
                )));
            }
        }
        Ok(())
    }

    /// CRRA felicity `x^{1−R}/(1−R)` (undiscounted).
    pub fn utility(&self, x: f64) -> f64 {
        let one_minus = 1.0 - self.risk_aversion;
        x.powf(one_minus) / one_minus
    }
}

/// A problem whose inputs satisfy every standing assumption.
#[derive(Debug, Clone)]
pub struct ValidatedProblem {
    market: MarketModel,
    ambiguity: AmbiguityModel,
    prefs: Preferences,
}

impl ValidatedProblem {
    pub fn market(&self) -> &MarketModel {
        &self.market
    }

    pub fn ambiguity(&self) -> &AmbiguityModel {
        &self.ambiguity
    }

    pub fn prefs(&self) -> &Preferences {
        &self.prefs
    }

    /// Cholesky factor of the covariance estimate.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        self.market.cov.factor()
    }

    pub fn epsilon(&self) -> f64 {
        self.ambiguity.epsilon
    }

    /// Same market and preferences with a different ambiguity model.
    pub fn with_ambiguity(&self, ambiguity: AmbiguityModel) -> Result<Self> {
        validate(self.market.clone(), ambiguity, self.prefs)
    }

    pub fn with_prefs(&self, prefs: Preferences) -> Result<Self> {
        validate(self.market.clone(), self.ambiguity.clone(), prefs)
    }
}

pub fn validate(
    market: MarketModel,
    ambiguity: AmbiguityModel,
    prefs: Preferences,
) -> Result<ValidatedProblem> {
    prefs.validate()?;
    let eps = ambiguity.epsilon;
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::BadEpsilon(format!("epsilon must be finite and >= 0, got {eps}")));
    }
    let n = market.n();
    let cov = market.cov.matrix();
    match &ambiguity.vol {
        VolAmbiguity::None => {}
        VolAmbiguity::DiagonalBox { lower, upper } => {
            for (what, v) in [("box lower bounds", lower), ("box upper bounds", upper)] {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        what,
                        expected: n,
                        found: v.len(),
                    });
                }
            }
            let scale = cov.amax();
            for i in 0..n {
                for j in 0..n {
                    if i != j && cov[(i, j)].abs() > SYMMETRY_TOL * scale {
                        return Err(Error::InconsistentBox(format!(
                            "covariance estimate must be diagonal, entry ({i},{j}) = {}",
                            cov[(i, j)]
                        )));
                    }
                }
                let (lo, hi, d) = (lower[i], upper[i], cov[(i, i)]);
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::NonFinite(format!("box bound for asset {i}")));
                }
                if !(lo > 0.0) {
                    return Err(Error::InconsistentBox(format!(
                        "lower variance bound for asset {i} must be > 0, got {lo}"
                    )));
                }
                if !(lo <= d && d <= hi) {
                    return Err(Error::InconsistentBox(format!(
                        "asset {i}: estimate {d} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        VolAmbiguity::EigenvalueCap { lambda_bar_sq } => {
            let cap = *lambda_bar_sq;
            if !cap.is_finite() {
                return Err(Error::NonFinite("eigenvalue cap".into()));
            }
            let max_eigenvalue = market.cov.max_eigenvalue();
            if cap < max_eigenvalue * (1.0 - SYMMETRY_TOL) {
                return Err(Error::CapBelowSpectrum { cap, max_eigenvalue });
            }
        }
        VolAmbiguity::FrobeniusBall { delta } => {
            let delta = *delta;
            let min_eigenvalue = market.cov.min_eigenvalue();
            if !(delta.is_finite() && delta >= 0.0 && delta < min_eigenvalue) {
                return Err(Error::DeltaTooLarge {
                    delta,
                    min_eigenvalue,
                });
            }
        }
    }
    Ok(ValidatedProblem {
        market,
        ambiguity,
        prefs,
    })
}

/// Sharpe ratio `√((μ − r𝟏)' Σ⁻¹ (μ − r𝟏))`.
pub fn sharpe_ratio(mu: &DVector<f64>, cov: &Covariance, r: f64) -> f64 {
    cov.inv_quad(&mu.add_scalar(-r)).sqrt()
}

/// Market price of ambiguity `φ = σ' Σ⁻¹ (μ − μ̂)` with `σ` the Cholesky
/// factor, which reduces to `L⁻¹ (μ − μ̂)`.
pub fn market_price_of_ambiguity(
    mu: &DVector<f64>,
    mu_hat: &DVector<f64>,
    cov: &Covariance,
) -> DVector<f64> {
    cov.whiten(&(mu - mu_hat))
}

/// Whether `μ` lies in the ellipsoid `(μ−μ̂)' Σ⁻¹ (μ−μ̂) ≤ ε²` up to `tol`.
pub fn in_drift_ellipsoid(
    mu: &DVector<f64>,
    mu_hat: &DVector<f64>,
    cov: &Covariance,
    epsilon: f64,
    tol: f64,
) -> bool {
    cov.inv_quad(&(mu - mu_hat)) <= epsilon * epsilon + tol
}
