//! Comparative statics and limits: cost-parameter sweeps of the equilibrium
//! rate, the sign and size of `dr/dlambda`, and the small-time-step
//! convergence study.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::model::{classify_regime, AgentParams, MarketParams, Regime};
use crate::solver::{case2_rate_cts, solve_cts, solve_discrete, EquilibriumSolution, MarketRate};

/// Central-difference step for the sensitivity check.
const FD_STEP: f64 = 1e-6;

/// One sweep point. `rate_lo = rate_hi` whenever trade pins the market rate
/// to a point; without trade they are the interval ends and `rate_mid` its
/// midpoint (a reporting convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub regime: Regime,
    pub rate_lo: f64,
    pub rate_mid: f64,
    pub rate_hi: f64,
    pub shadow_rate_1: f64,
    pub shadow_rate_2: f64,
    pub trade_rate: f64,
}

impl SweepRow {
    pub fn from_solution(param: f64, solution: &EquilibriumSolution) -> Self {
        SweepRow {
            param,
            regime: solution.regime,
            rate_lo: solution.market_rate.lo(),
            rate_mid: solution.market_rate.mid(),
            rate_hi: solution.market_rate.hi(),
            shadow_rate_1: solution.shadow_rate_1,
            shadow_rate_2: solution.shadow_rate_2,
            trade_rate: solution.trade_per_step,
        }
    }
}

/// Analytic and central-difference derivative of the trade-regime rate with
/// respect to the cost parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSensitivity {
    pub analytic: f64,
    pub finite_difference: f64,
}

/// Result of the time-step convergence study: one row per step size, the
/// continuous-time limit rate, per-row distances to it, and the empirical
/// convergence order from a log-log fit (`None` with fewer than two usable
/// points).
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSweep {
    pub rows: Vec<SweepRow>,
    pub limit_rate: f64,
    pub deviations: Vec<f64>,
    pub convergence_order: Option<f64>,
}

/// Continuous-time equilibrium at each cost parameter, in grid order.
pub fn sweep_lambda(agents: &[AgentParams; 2], lambdas: &[f64]) -> Result<Vec<SweepRow>, Error> {
    lambdas
        .iter()
        .map(|&lambda| Ok(SweepRow::from_solution(lambda, &solve_cts(agents, lambda)?)))
        .collect()
}

/// `dr/dlambda` of the continuous-time trade-regime rate, analytically and
/// by central differences on the closed form. Errors unless trade occurs at
/// `lambda`.
pub fn rate_sensitivity(agents: &[AgentParams; 2], lambda: f64) -> Result<RateSensitivity, Error> {
    let market = MarketParams::continuous(lambda);
    let regime = classify_regime(agents, &market)?;
    let (buyer, seller) = match regime {
        Regime::Agent1Buys => (0, 1),
        Regime::Agent2Buys => (1, 0),
        Regime::NoTrade => {
            return Err(Error::RegimeMismatch(format!(
                "no trade occurs at lambda = {lambda}; the rate there is an interval, \
                 not a differentiable point"
            )))
        }
    };
    let (ab, as_) = (agents[buyer].alpha, agents[seller].alpha);
    let (bb, bs) = (
        agents[buyer].effective_discount().0,
        agents[seller].effective_discount().0,
    );
    let numerator = bb / ab + bs / as_;
    let weight = |l: f64| 1.0 / (ab * (1.0 + l)) + 1.0 / (as_ * (1.0 - l));
    let weight_slope = -1.0 / (ab * (1.0 + lambda) * (1.0 + lambda))
        + 1.0 / (as_ * (1.0 - lambda) * (1.0 - lambda));
    let analytic = -numerator * weight_slope / (weight(lambda) * weight(lambda));
    // central difference on the closed form; the formula extends smoothly
    // below lambda = 0, so no one-sided stencil is needed at the origin
    let up = case2_rate_cts(ab, bb, as_, bs, lambda + FD_STEP);
    let down = case2_rate_cts(ab, bb, as_, bs, lambda - FD_STEP);
    let finite_difference = (up - down) / (2.0 * FD_STEP);
    Ok(RateSensitivity {
        analytic,
        finite_difference,
    })
}

/// Discrete-time equilibrium at each step size, together with the
/// continuous-time limit rate. Errors unless trade occurs in the limit.
pub fn sweep_delta(
    agents: &[AgentParams; 2],
    lambda: f64,
    deltas: &[f64],
) -> Result<DeltaSweep, Error> {
    let market = MarketParams::continuous(lambda);
    if classify_regime(agents, &market)? == Regime::NoTrade {
        return Err(Error::RegimeMismatch(format!(
            "no trade occurs in the continuous-time limit at lambda = {lambda}; \
             the limit rate is not unique"
        )));
    }
    let limit = solve_cts(agents, lambda)?;
    let limit_rate = match limit.market_rate {
        MarketRate::Point(r) => r,
        MarketRate::Interval(_) => unreachable!("trade regime yields a point rate"),
    };
    let mut rows = Vec::with_capacity(deltas.len());
    let mut deviations = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let solution = solve_discrete(agents, lambda, delta)?;
        deviations.push(math::abs(solution.market_rate.mid() - limit_rate));
        rows.push(SweepRow::from_solution(delta, &solution));
    }
    let convergence_order = log_log_slope(deltas, &deviations);
    Ok(DeltaSweep {
        rows,
        limit_rate,
        deviations,
        convergence_order,
    })
}

/// Least-squares slope of `ln(y)` against `ln(x)` over the points with
/// strictly positive coordinates.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (math::ln(*x), math::ln(*y)))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in &points {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        return None;
    }
    Some(cov / var)
}

/// Grid of evenly spaced values, endpoint included up to rounding slack.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "grid step must be > 0 (got {step})"
        )));
    }
    if !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidParams(format!(
            "grid bounds must be finite with stop >= start (got {start}..{stop})"
        )));
    }
    let mut values = Vec::new();
    let mut k = 0u64;
    loop {
        let v = start + k as f64 * step;
        if v > stop + 0.5 * step {
            break;
        }
        values.push(if v > stop { stop } else { v });
        k += 1;
    }
    Ok(values)
}
