//! Wealth-proportional controls: a constant relative portfolio and a
//! consumption-to-wealth rule.

use nalgebra::DVector;

use crate::kernel::GFunction;

/// Consumption expressed as a rate per unit of wealth.
#[derive(Debug, Clone, PartialEq)]
pub enum ConsumptionRule {
    /// `c_t = κ w_t`.
    Proportional(f64),
    /// `c_t = w_t e^{−ρt/R} / g(t)` from the finite-horizon solution.
    Horizon(GFunction),
    Zero,
}

impl ConsumptionRule {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            ConsumptionRule::Proportional(k) => *k,
            ConsumptionRule::Horizon(g) => g.consumption_rate(t),
            ConsumptionRule::Zero => 0.0,
        }
    }

    /// `∫_{t0}^{t1} rate(s) ds`, exact.
    pub fn cumulative(&self, t0: f64, t1: f64) -> f64 {
        match self {
            ConsumptionRule::Proportional(k) => k * (t1 - t0),
            ConsumptionRule::Horizon(g) => g.cumulative_consumption(t0, t1),
            ConsumptionRule::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    /// Fractions of wealth held in each risky asset.
    pub pi: DVector<f64>,
    pub consumption: ConsumptionRule,
}

impl Policy {
    pub fn new(pi: DVector<f64>, consumption: ConsumptionRule) -> Self {
        Self { pi, consumption }
    }
}
