//! Model primitives: agent and market parameters, effective discount rates,
//! excess-demand functions, and trade-regime classification.

use alloc::format;

use crate::error::Error;
use crate::math;

/// Exogenous description of one agent: CARA preferences over running
/// consumption and an arithmetic income stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    /// Absolute risk aversion of the exponential utility.
    pub alpha: f64,
    /// Time-preference rate.
    pub beta: f64,
    /// Income drift per unit time.
    pub mu: f64,
    /// Income volatility per square-root unit time.
    pub sigma: f64,
    /// Initial annuity share endowment.
    pub theta0: f64,
    /// Initial income level.
    pub y0: f64,
}

impl AgentParams {
    /// Checks the structural parameter constraints: `alpha > 0`, `beta > 0`,
    /// `sigma >= 0`, everything finite. Positivity of the effective discount
    /// is a separate, solver-level requirement.
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("theta0", self.theta0),
            ("y0", self.y0),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "alpha must be > 0 (got {})",
                self.alpha
            )));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta must be > 0 (got {})",
                self.beta
            )));
        }
        if self.sigma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "sigma must be >= 0 (got {})",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Time preference adjusted for income drift and risk:
    /// `beta + alpha*mu - alpha^2*sigma^2/2`.
    pub fn effective_discount(&self) -> EffectiveDiscount {
        EffectiveDiscount(
            self.beta + self.alpha * self.mu
                - self.alpha * self.alpha * self.sigma * self.sigma / 2.0,
        )
    }
}

/// The agent's effective discount rate. The solver requires it to be
/// strictly positive; it equals the agent's autarky shadow rate in
/// continuous time.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EffectiveDiscount(pub f64);

impl EffectiveDiscount {
    /// Shadow rate at which the agent's excess demand vanishes on the given
    /// grid: `(e^{b*delta}-1)/delta` in discrete time, `b` in continuous time.
    pub fn autarky_rate(&self, grid: TimeGrid) -> f64 {
        match grid {
            TimeGrid::Discrete { delta } => math::exp_m1(self.0 * delta) / delta,
            TimeGrid::Continuous => self.0,
        }
    }
}

/// Trading clock: an even grid of step `delta`, or the continuous limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeGrid {
    Discrete { delta: f64 },
    Continuous,
}

impl TimeGrid {
    pub fn delta(&self) -> Option<f64> {
        match self {
            TimeGrid::Discrete { delta } => Some(*delta),
            TimeGrid::Continuous => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, TimeGrid::Discrete { .. })
    }
}

/// Market structure: proportional transaction cost and the trading clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Proportional transaction cost; buying costs `(1+lambda)` and selling
    /// earns `(1-lambda)` times the quoted annuity value.
    pub lambda: f64,
    pub grid: TimeGrid,
}

impl MarketParams {
    pub fn discrete(lambda: f64, delta: f64) -> Self {
        MarketParams {
            lambda,
            grid: TimeGrid::Discrete { delta },
        }
    }

    pub fn continuous(lambda: f64) -> Self {
        MarketParams {
            lambda,
            grid: TimeGrid::Continuous,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.lambda.is_finite() || !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::InvalidParams(format!(
                "lambda must be in [0,1) (got {})",
                self.lambda
            )));
        }
        if let TimeGrid::Discrete { delta } = self.grid {
            if !delta.is_finite() || delta <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "delta must be > 0 (got {delta})"
                )));
            }
        }
        Ok(())
    }

    /// The bid-ask band `[(1-lambda)/(1+lambda), (1+lambda)/(1-lambda)]`
    /// constraining the ratio of the agents' shadow prices.
    pub fn closeness_band(&self) -> (f64, f64) {
        (
            (1.0 - self.lambda) / (1.0 + self.lambda),
            (1.0 + self.lambda) / (1.0 - self.lambda),
        )
    }
}

/// Who trades in equilibrium. `Agent2Buys` is the role-swapped image of
/// `Agent1Buys`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    NoTrade,
    Agent1Buys,
    Agent2Buys,
}

impl Regime {
    /// The regime seen after exchanging the two agents' labels.
    pub fn swapped(self) -> Self {
        match self {
            Regime::NoTrade => Regime::NoTrade,
            Regime::Agent1Buys => Regime::Agent2Buys,
            Regime::Agent2Buys => Regime::Agent1Buys,
        }
    }
}

/// Per-period value of the agent's desired annuity trade at shadow rate `r`
/// on a grid of step `delta`: `(log(1+r*delta) - b*delta)/(alpha*r)` with `b`
/// the effective discount.
pub fn excess_demand_discrete(rate: f64, agent: &AgentParams, delta: f64) -> Result<f64, Error> {
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "shadow rate must be > 0 (got {rate})"
        )));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "delta must be > 0 (got {delta})"
        )));
    }
    let b = agent.effective_discount().0;
    Ok((math::ln_1p(rate * delta) - b * delta) / (agent.alpha * rate))
}

/// Rate of the agent's desired annuity trade value at shadow rate `r` in
/// continuous time: `(1 - b/r)/alpha`.
pub fn excess_demand_cts(rate: f64, agent: &AgentParams) -> Result<f64, Error> {
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "shadow rate must be > 0 (got {rate})"
        )));
    }
    let b = agent.effective_discount().0;
    Ok((1.0 - b / rate) / agent.alpha)
}

pub(crate) fn validated_discounts(
    agents: &[AgentParams; 2],
    market: &MarketParams,
) -> Result<[f64; 2], Error> {
    market.validate()?;
    for (i, agent) in agents.iter().enumerate() {
        agent
            .validate()
            .map_err(|e| Error::InvalidParams(format!("agents[{i}]: {e}")))?;
    }
    let b = [
        agents[0].effective_discount().0,
        agents[1].effective_discount().0,
    ];
    for (i, bi) in b.iter().enumerate() {
        if bi.is_nan() || *bi <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "agents[{i}]: effective discount must be > 0 (got {bi})"
            )));
        }
    }
    Ok(b)
}

/// Classifies which agent, if any, trades in equilibrium.
///
/// The autarky-rate ratio is compared against the closeness band; a ratio on
/// the band edge counts as no trade (the trade volume there is zero, so both
/// readings coincide). The comparison is done in product form so that
/// swapping the agents swaps the outcome exactly, with no rounding asymmetry.
pub fn classify_regime(agents: &[AgentParams; 2], market: &MarketParams) -> Result<Regime, Error> {
    let b = validated_discounts(agents, market)?;
    let lambda = market.lambda;
    // weights w_i such that Agent1Buys iff w2*(1-lambda) > w1*(1+lambda),
    // i.e. the autarky-rate ratio w2/w1 exceeds (1+lambda)/(1-lambda)
    let (w1, w2) = match market.grid {
        TimeGrid::Discrete { delta } => (math::exp_m1(b[0] * delta), math::exp_m1(b[1] * delta)),
        TimeGrid::Continuous => (b[0], b[1]),
    };
    if w2 * (1.0 - lambda) > w1 * (1.0 + lambda) {
        Ok(Regime::Agent1Buys)
    } else if w1 * (1.0 - lambda) > w2 * (1.0 + lambda) {
        Ok(Regime::Agent2Buys)
    } else {
        Ok(Regime::NoTrade)
    }
}
