//! Robust Merton investment and consumption for an ambiguity-averse CRRA
//! investor.
//!
//! The drift is only known to lie in an ellipsoid around an estimate, scaled
//! by the covariance; the covariance itself may be ambiguous within a diagonal
//! box, under an eigenvalue cap, or inside a Frobenius ball. The investor
//! maximizes the worst-case expected utility of consumption (and bequest, on
//! a finite horizon).
//!
//! * [`model`]: inputs and their validation.
//! * [`kernel`]: closed-form optimal controls and value functions.
//! * [`frobenius`]: the Frobenius-ball case, solved by fixed-point iteration.
//! * [`oracle`]: brute-force checks of every closed form.
//! * [`sim`]: Monte Carlo simulation of controlled wealth.

pub mod error;
pub mod frobenius;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use kernel::{
    gamma_epsilon, k_epsilon, optimal_wealth_law, solve_finite, solve_infinite, worst_case_cov, worst_case_drift,
    DivergenceWitness, FiniteHorizonReport, GFunction, InfiniteHorizonReport, RobustSolution, ValueFunction,
    WealthLaw,
};
pub use model::{
    market_price_of_ambiguity, sharpe_ratio, validate, AmbiguityModel, Covariance, Horizon, MarketModel, Preferences,
    ValidatedProblem, VolAmbiguity,
};
pub use policy::{ConsumptionRule, Policy};
