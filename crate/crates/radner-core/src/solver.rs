//! Equilibrium computation: regime, shadow rates, market rate (point or
//! interval), and trade rates, in discrete and continuous time; plus the
//! feasibility verdict for a traded bank account at constant rates.

use alloc::format;
use alloc::string::String;

use crate::error::Error;
use crate::math;
use crate::model::{
    classify_regime, validated_discounts, AgentParams, MarketParams, Regime, TimeGrid,
};
use crate::policy::PolicyContext;

/// Relative-width termination for the root bisection.
const BISECT_REL_TOL: f64 = 1e-14;
const BISECT_MAX_ITER: usize = 200;
/// Effective discounts within this (scaled) tolerance count as equal for the
/// bank-account verdict.
const BANK_DISCOUNT_EQ_TOL: f64 = 1e-12;

/// Closed interval of market rates consistent with a no-trade equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RateInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, rate: f64) -> bool {
        self.lo <= rate && rate <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// The market interest rate: a point when trade pins it down, an interval
/// when no trade occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarketRate {
    Point(f64),
    Interval(RateInterval),
}

impl MarketRate {
    pub fn lo(&self) -> f64 {
        match self {
            MarketRate::Point(r) => *r,
            MarketRate::Interval(iv) => iv.lo,
        }
    }

    /// Representative rate: the point itself, or the interval midpoint.
    /// The midpoint is a reporting convention; no-trade equilibria do not
    /// single out a rate.
    pub fn mid(&self) -> f64 {
        match self {
            MarketRate::Point(r) => *r,
            MarketRate::Interval(iv) => iv.midpoint(),
        }
    }

    pub fn hi(&self) -> f64 {
        match self {
            MarketRate::Point(r) => *r,
            MarketRate::Interval(iv) => iv.hi,
        }
    }
}

/// A solved equilibrium. Carries its inputs so verifiers are self-contained.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub regime: Regime,
    pub shadow_rate_1: f64,
    pub shadow_rate_2: f64,
    pub market_rate: MarketRate,
    /// Change in agent 1's optimal holdings per step (discrete) or per unit
    /// time (continuous). Positive when agent 1 buys, zero without trade.
    pub trade_per_step: f64,
    pub lambda: f64,
    pub grid: TimeGrid,
    pub agents: [AgentParams; 2],
}

impl EquilibriumSolution {
    pub fn market(&self) -> MarketParams {
        MarketParams {
            lambda: self.lambda,
            grid: self.grid,
        }
    }

    pub fn shadow_rate(&self, agent: usize) -> f64 {
        match agent {
            0 => self.shadow_rate_1,
            1 => self.shadow_rate_2,
            _ => panic!("agent index must be 0 or 1"),
        }
    }

    /// Shadow annuity value `1/r_i`.
    pub fn annuity_value(&self, agent: usize) -> f64 {
        1.0 / self.shadow_rate(agent)
    }

    /// Ratio of shadow annuity values `A_1/A_2 = r_2/r_1`; must lie in the
    /// closeness band, on its edge whenever trade occurs.
    pub fn closeness_ratio(&self) -> f64 {
        self.shadow_rate_2 / self.shadow_rate_1
    }

    /// The quoted annuity value at which trades settle: the buyer's shadow
    /// value divided by `1+lambda`. `None` without trade.
    pub fn traded_annuity_value(&self) -> Option<f64> {
        match self.regime {
            Regime::NoTrade => None,
            Regime::Agent1Buys => Some(self.annuity_value(0) / (1.0 + self.lambda)),
            Regime::Agent2Buys => Some(self.annuity_value(1) / (1.0 + self.lambda)),
        }
    }

    /// Policy context of one agent at her equilibrium shadow rate.
    pub fn policy_context(&self, agent: usize) -> PolicyContext {
        PolicyContext {
            agent: self.agents[agent],
            shadow_rate: self.shadow_rate(agent),
            grid: self.grid,
        }
    }

    /// Per-step (or per-time) holdings change of one agent, derived from her
    /// own closed-form policy.
    pub fn agent_trade(&self, agent: usize) -> f64 {
        self.policy_context(agent).trade_rate()
    }

    /// Excess demand of one agent at her equilibrium shadow rate.
    pub fn excess_demand(&self, agent: usize) -> f64 {
        self.policy_context(agent).wealth_drift()
    }

    /// Relative residual of the equation that pins the solution down: the
    /// market-rate product equation in a trade regime, the larger of the two
    /// autarky residuals without trade.
    pub fn defining_residual(&self) -> f64 {
        match self.regime {
            Regime::NoTrade => {
                let f1 = self.excess_demand(0);
                let f2 = self.excess_demand(1);
                math::abs(f1).max(math::abs(f2))
            }
            Regime::Agent1Buys | Regime::Agent2Buys => {
                let (buyer, seller) = match self.regime {
                    Regime::Agent1Buys => (0, 1),
                    _ => (1, 0),
                };
                let r = self.market_rate.mid();
                let ab = self.agents[buyer].alpha;
                let as_ = self.agents[seller].alpha;
                let bb = self.agents[buyer].effective_discount().0;
                let bs = self.agents[seller].effective_discount().0;
                let log_gap = match self.grid {
                    TimeGrid::Discrete { delta } => {
                        let u = r * delta;
                        math::ln_1p(u / (1.0 + self.lambda)) / (ab * delta)
                            + math::ln_1p(u / (1.0 - self.lambda)) / (as_ * delta)
                            - (bb / ab + bs / as_)
                    }
                    TimeGrid::Continuous => {
                        r * (1.0 / (ab * (1.0 + self.lambda)) + 1.0 / (as_ * (1.0 - self.lambda)))
                            - (bb / ab + bs / as_)
                    }
                };
                math::abs(math::exp_m1(log_gap))
            }
        }
    }

    /// Residual of real-goods clearing in wealth terms:
    /// `F_1(r_1) + F_2(r_2) - lambda*(|F_1| + |F_2|)`.
    pub fn wealth_clearing_residual(&self) -> f64 {
        let f1 = self.excess_demand(0);
        let f2 = self.excess_demand(1);
        f1 + f2 - self.lambda * (math::abs(f1) + math::abs(f2))
    }

    /// Residual of financial clearing in share terms:
    /// `r_1*F_1(r_1) + r_2*F_2(r_2)` (per-step holdings changes must cancel).
    pub fn share_clearing_residual(&self) -> f64 {
        self.agent_trade(0) + self.agent_trade(1)
    }

    pub fn delta(&self) -> Option<f64> {
        self.grid.delta()
    }
}

/// Outcome of the constant-rate feasibility check when the traded security
/// is a bank account instead of the annuity.
#[derive(Debug, Clone, PartialEq)]
pub enum BankVerdict {
    /// No constant-rate equilibrium exists for these parameters.
    Infeasible { reason: String },
    /// Equal effective discounts: the only constant-rate equilibrium has no
    /// trade, with both shadow rates equal to `rate`.
    NoTradeOnly { rate: f64 },
}

/// Bisection on a bracketing interval; `f` must change sign across it.
fn bisect(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<f64, Error> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "bisection bracket [{lo}, {hi}] does not change sign"
        )));
    }
    let lo_positive = flo > 0.0;
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval has collapsed to adjacent floats
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_REL_TOL * math::abs(mid) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NumericalFailure(format!(
        "bisection did not converge within {BISECT_MAX_ITER} iterations"
    )))
}

/// Solves for the equilibrium on whichever grid `market` specifies.
pub fn solve(
    agents: &[AgentParams; 2],
    market: &MarketParams,
) -> Result<EquilibriumSolution, Error> {
    match market.grid {
        TimeGrid::Discrete { delta } => solve_discrete(agents, market.lambda, delta),
        TimeGrid::Continuous => solve_cts(agents, market.lambda),
    }
}

/// Continuous-time equilibrium. Closed form in both regimes.
pub fn solve_cts(agents: &[AgentParams; 2], lambda: f64) -> Result<EquilibriumSolution, Error> {
    let market = MarketParams::continuous(lambda);
    let b = validated_discounts(agents, &market)?;
    let regime = classify_regime(agents, &market)?;
    let grid = TimeGrid::Continuous;
    let solution = match regime {
        Regime::NoTrade => {
            let lo = (1.0 - lambda) * b[0].max(b[1]);
            let hi = (1.0 + lambda) * b[0].min(b[1]);
            EquilibriumSolution {
                regime,
                shadow_rate_1: b[0],
                shadow_rate_2: b[1],
                market_rate: MarketRate::Interval(RateInterval { lo, hi }),
                trade_per_step: 0.0,
                lambda,
                grid,
                agents: *agents,
            }
        }
        Regime::Agent1Buys | Regime::Agent2Buys => {
            let buyer = if regime == Regime::Agent1Buys { 0 } else { 1 };
            let seller = 1 - buyer;
            let r = case2_rate_cts(
                agents[buyer].alpha,
                b[buyer],
                agents[seller].alpha,
                b[seller],
                lambda,
            );
            let r_buyer = r / (1.0 + lambda);
            let r_seller = r / (1.0 - lambda);
            let (r1, r2) = if buyer == 0 {
                (r_buyer, r_seller)
            } else {
                (r_seller, r_buyer)
            };
            let mut solution = EquilibriumSolution {
                regime,
                shadow_rate_1: r1,
                shadow_rate_2: r2,
                market_rate: MarketRate::Point(r),
                trade_per_step: 0.0,
                lambda,
                grid,
                agents: *agents,
            };
            solution.trade_per_step = solution.agent_trade(0);
            solution
        }
    };
    Ok(solution)
}

/// The explicit continuous-time trade-regime rate: risk-tolerance-weighted
/// mean of the effective discounts, deflated by the cost-adjusted weights.
pub(crate) fn case2_rate_cts(
    alpha_buyer: f64,
    b_buyer: f64,
    alpha_seller: f64,
    b_seller: f64,
    lambda: f64,
) -> f64 {
    let numerator = b_buyer / alpha_buyer + b_seller / alpha_seller;
    let denominator = 1.0 / (alpha_buyer * (1.0 + lambda)) + 1.0 / (alpha_seller * (1.0 - lambda));
    numerator / denominator
}

/// Discrete-time equilibrium. The trade-regime market rate is the unique
/// root of a strictly increasing product equation, solved by bisection on
/// the bracket guaranteed by the regime condition. The root is found in the
/// variable `u = r*delta` to keep small-step accuracy.
pub fn solve_discrete(
    agents: &[AgentParams; 2],
    lambda: f64,
    delta: f64,
) -> Result<EquilibriumSolution, Error> {
    let market = MarketParams::discrete(lambda, delta);
    let b = validated_discounts(agents, &market)?;
    let regime = classify_regime(agents, &market)?;
    let grid = TimeGrid::Discrete { delta };
    match regime {
        Regime::NoTrade => {
            let r1 = math::exp_m1(b[0] * delta) / delta;
            let r2 = math::exp_m1(b[1] * delta) / delta;
            let lo = (1.0 - lambda) * math::exp_m1(b[0].max(b[1]) * delta) / delta;
            let hi = (1.0 + lambda) * math::exp_m1(b[0].min(b[1]) * delta) / delta;
            Ok(EquilibriumSolution {
                regime,
                shadow_rate_1: r1,
                shadow_rate_2: r2,
                market_rate: MarketRate::Interval(RateInterval { lo, hi }),
                trade_per_step: 0.0,
                lambda,
                grid,
                agents: *agents,
            })
        }
        Regime::Agent1Buys | Regime::Agent2Buys => {
            let buyer = if regime == Regime::Agent1Buys { 0 } else { 1 };
            let seller = 1 - buyer;
            let (ab, as_) = (agents[buyer].alpha, agents[seller].alpha);
            let (bb, bs) = (b[buyer], b[seller]);
            // bracket in u = r*delta; nonempty exactly when the regime holds
            let u_lo = (1.0 + lambda) * math::exp_m1(bb * delta);
            let u_hi = (1.0 - lambda) * math::exp_m1(bs * delta);
            let rhs = (bb / ab + bs / as_) * delta;
            let g = |u: f64| {
                math::ln_1p(u / (1.0 + lambda)) / ab + math::ln_1p(u / (1.0 - lambda)) / as_ - rhs
            };
            let u = bisect(u_lo, u_hi, g)?;
            let r = u / delta;
            let r_buyer = r / (1.0 + lambda);
            let r_seller = r / (1.0 - lambda);
            let (r1, r2) = if buyer == 0 {
                (r_buyer, r_seller)
            } else {
                (r_seller, r_buyer)
            };
            let mut solution = EquilibriumSolution {
                regime,
                shadow_rate_1: r1,
                shadow_rate_2: r2,
                market_rate: MarketRate::Point(r),
                trade_per_step: 0.0,
                lambda,
                grid,
                agents: *agents,
            };
            solution.trade_per_step = solution.agent_trade(0);
            Ok(solution)
        }
    }
}

/// Decides whether a constant-rate equilibrium can exist when the traded
/// security is a bank account. Requires `lambda > 0`; with differing
/// effective discounts the answer is no.
pub fn check_bank_constant_equilibrium(
    agents: &[AgentParams; 2],
    lambda: f64,
    delta: f64,
) -> Result<BankVerdict, Error> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "the bank-account verdict requires lambda > 0 (got {lambda})"
        )));
    }
    let market = MarketParams::discrete(lambda, delta);
    let b = validated_discounts(agents, &market)?;
    if math::abs(b[0] - b[1]) <= BANK_DISCOUNT_EQ_TOL * math::abs(b[0]).max(1.0) {
        Ok(BankVerdict::NoTradeOnly {
            rate: math::exp_m1(b[0] * delta) / delta,
        })
    } else {
        Ok(BankVerdict::Infeasible {
            reason: format!(
                "constant rates with a traded bank account force r1 = r2 and zero trade, \
                 so both excess demands must vanish at one rate; log(1+r*delta) would have \
                 to equal both {}*delta and {}*delta, impossible for differing effective \
                 discounts",
                b[0], b[1]
            ),
        })
    }
}

/// Bracket for the trade-regime market rate implied by the uniqueness
/// argument; exposed for verification.
pub fn case2_rate_bracket(
    agents: &[AgentParams; 2],
    lambda: f64,
    delta: f64,
) -> Result<(f64, f64), Error> {
    let market = MarketParams::discrete(lambda, delta);
    let b = validated_discounts(agents, &market)?;
    let regime = classify_regime(agents, &market)?;
    let (bb, bs) = match regime {
        Regime::Agent1Buys => (b[0], b[1]),
        Regime::Agent2Buys => (b[1], b[0]),
        Regime::NoTrade => {
            return Err(Error::RegimeMismatch(String::from(
                "no trade occurs; the market-rate bracket applies to trade regimes",
            )))
        }
    };
    Ok((
        (1.0 + lambda) * math::exp_m1(bb * delta) / delta,
        (1.0 - lambda) * math::exp_m1(bs * delta) / delta,
    ))
}
