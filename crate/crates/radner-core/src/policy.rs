//! Closed-form optimal consumption, wealth, holdings, and value functions
//! for a single agent facing a constant shadow rate.
//!
//! All policies are affine in the state, so they are exposed as cheap
//! state-evaluated functions; path storage belongs to the simulator.

use alloc::format;

use crate::error::Error;
use crate::math;
use crate::model::{AgentParams, TimeGrid};

/// One agent together with the constant shadow rate and time grid under
/// which she optimizes. The shadow annuity value is `1/shadow_rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub agent: AgentParams,
    pub shadow_rate: f64,
    pub grid: TimeGrid,
}

/// Optimal state at one grid point, given the realized income there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyPoint {
    pub time: f64,
    pub wealth: f64,
    pub consumption: f64,
    pub holdings: f64,
}

impl PolicyContext {
    pub fn new(agent: AgentParams, shadow_rate: f64, grid: TimeGrid) -> Result<Self, Error> {
        agent.validate()?;
        if !shadow_rate.is_finite() || shadow_rate <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "shadow rate must be > 0 (got {shadow_rate})"
            )));
        }
        Ok(PolicyContext {
            agent,
            shadow_rate,
            grid,
        })
    }

    /// Constant shadow annuity value `1/r`.
    pub fn annuity_value(&self) -> f64 {
        1.0 / self.shadow_rate
    }

    /// Initial shadow wealth `theta0 / r`.
    pub fn initial_wealth(&self) -> f64 {
        self.agent.theta0 / self.shadow_rate
    }

    fn discount(&self) -> f64 {
        self.agent.effective_discount().0
    }

    /// Optimal holdings are proportional to wealth: `theta = r * X`.
    pub fn holdings(&self, wealth: f64) -> f64 {
        self.shadow_rate * wealth
    }

    /// Change in optimal wealth per step (discrete) or per unit time
    /// (continuous). Equals the agent's excess demand at the shadow rate.
    pub fn wealth_drift(&self) -> f64 {
        let r = self.shadow_rate;
        let a = self.agent.alpha;
        let b = self.discount();
        match self.grid {
            TimeGrid::Discrete { delta } => (math::ln_1p(r * delta) - b * delta) / (a * r),
            TimeGrid::Continuous => (1.0 - b / r) / a,
        }
    }

    /// Change in optimal holdings per step (discrete) or per unit time
    /// (continuous): `r` times the wealth drift. Deterministic and constant
    /// across all grid points.
    pub fn trade_rate(&self) -> f64 {
        let r = self.shadow_rate;
        let a = self.agent.alpha;
        let b = self.discount();
        match self.grid {
            TimeGrid::Discrete { delta } => (math::ln_1p(r * delta) - b * delta) / a,
            TimeGrid::Continuous => (r - b) / a,
        }
    }

    /// Constant additive part of the optimal consumption rule
    /// `c = r*X + Y + adjustment`.
    pub fn consumption_adjustment(&self) -> f64 {
        let r = self.shadow_rate;
        let a = self.agent.alpha;
        let b = self.discount();
        match self.grid {
            TimeGrid::Discrete { delta } => (b * delta - math::ln_1p(r * delta)) / (a * r * delta),
            TimeGrid::Continuous => b / (r * a) - 1.0 / a,
        }
    }

    /// Optimal consumption given current wealth and income.
    pub fn consumption(&self, wealth: f64, income: f64) -> f64 {
        self.shadow_rate * wealth + income + self.consumption_adjustment()
    }

    /// Optimal wealth after `n` steps on a discrete grid. Deterministic:
    /// the income realization does not enter.
    ///
    /// Panics if the grid is continuous.
    pub fn wealth_at_step(&self, n: u64) -> f64 {
        assert!(
            self.grid.is_discrete(),
            "wealth_at_step requires a discrete grid"
        );
        self.initial_wealth() + n as f64 * self.wealth_drift()
    }

    /// Optimal wealth at time `t` in continuous time.
    ///
    /// Panics if the grid is discrete.
    pub fn wealth_at_time(&self, t: f64) -> f64 {
        assert!(
            !self.grid.is_discrete(),
            "wealth_at_time requires a continuous grid"
        );
        self.initial_wealth() + self.wealth_drift() * t
    }

    /// Value function at state `(x, y)`; strictly negative.
    pub fn value(&self, wealth: f64, income: f64) -> f64 {
        let r = self.shadow_rate;
        let a = self.agent.alpha;
        let b = self.discount();
        let state = -a * r * wealth - a * income;
        match self.grid {
            TimeGrid::Discrete { delta } => {
                let u = r * delta;
                // (1+u)^{1+1/u}, evaluated in log form for small-u accuracy
                let growth = math::exp((1.0 + 1.0 / u) * math::ln_1p(u));
                -(1.0 / u) * growth * math::exp(state - b / r)
            }
            TimeGrid::Continuous => -(1.0 / r) * math::exp(state + 1.0 - b / r),
        }
    }

    /// Optimal state at step `n` (discrete grid), given the income there.
    pub fn point_at_step(&self, n: u64, income: f64) -> PolicyPoint {
        let delta = self
            .grid
            .delta()
            .expect("point_at_step requires a discrete grid");
        let wealth = self.wealth_at_step(n);
        PolicyPoint {
            time: n as f64 * delta,
            wealth,
            consumption: self.consumption(wealth, income),
            holdings: self.holdings(wealth),
        }
    }
}
