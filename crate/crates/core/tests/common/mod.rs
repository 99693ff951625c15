#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use robust_merton::{validate, AmbiguityModel, MarketModel, Preferences, ValidatedProblem, VolAmbiguity};

/// Covariance `(AA' + jitter·I)/n` scaled to annual-return magnitudes.
pub fn spd(n: usize, entries: &[f64], jitter: f64) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    (&a * a.transpose() + DMatrix::identity(n, n) * jitter) * (0.1 / n as f64)
}

#[derive(Debug, Clone)]
pub struct MarketCase {
    pub r: f64,
    pub mu_hat: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl MarketCase {
    pub fn market(&self) -> MarketModel {
        MarketModel::new(self.r, self.mu_hat.clone(), self.cov.clone()).unwrap()
    }

    pub fn problem(&self, eps: f64, vol: VolAmbiguity, prefs: Preferences) -> ValidatedProblem {
        validate(self.market(), AmbiguityModel { epsilon: eps, vol }, prefs).unwrap()
    }
}

pub fn market(max_n: usize) -> impl Strategy<Value = MarketCase> {
    (1..=max_n).prop_flat_map(|n| {
        (
            0.0..0.05f64,
            prop::collection::vec(-0.1..0.2f64, n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            0.05..0.5f64,
        )
            .prop_map(move |(r, mu, a, jitter)| MarketCase {
                r,
                mu_hat: DVector::from_vec(mu),
                cov: spd(n, &a, jitter),
            })
    })
}

pub fn base_problem(eps: f64) -> ValidatedProblem {
    validate(
        MarketModel::scalar(0.02, 0.08, 0.04).unwrap(),
        AmbiguityModel::drift_only(eps),
        Preferences::infinite(0.05, 2.0),
    )
    .unwrap()
}
