//! Monte Carlo generation of income paths and closed-form equilibrium
//! paths, plus the numerical verifiers: market clearing, self-financing,
//! transversality, and the value-process martingale property.
//!
//! Determinism: every path owns one counter-based RNG stream derived from
//! `(seed, path index)`, so results are bit-identical regardless of how
//! rayon schedules the work. Reductions over paths run sequentially with
//! compensated summation.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use radner_core::{AgentParams, EquilibriumSolution, Error, MarketParams, TimeGrid};

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Correlation of the two agents' income shocks.
    pub rho: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParams("n_paths must be >= 1".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParams("n_steps must be >= 1".into()));
        }
        if !self.rho.is_finite() || self.rho.abs() > 1.0 {
            return Err(Error::InvalidParams(format!(
                "rho must be in [-1,1] (got {})",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Row-major `n_paths x (n_steps + 1)` array of one per-path series.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    data: Vec<f64>,
    n_cols: usize,
}

impl Grid {
    fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Grid {
            data: vec![0.0; n_rows * n_cols],
            n_cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_cols
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn at(&self, path: usize, step: usize) -> f64 {
        self.data[path * self.n_cols + step]
    }

    pub fn row(&self, path: usize) -> &[f64] {
        &self.data[path * self.n_cols..(path + 1) * self.n_cols]
    }

    fn par_rows_mut(&mut self) -> rayon::slice::ChunksMut<'_, f64> {
        self.data.par_chunks_mut(self.n_cols)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Simulated income paths for both agents, tagged with the inputs that
/// produced them.
#[derive(Debug, Clone)]
pub struct IncomePaths {
    pub agents: [AgentParams; 2],
    pub market: MarketParams,
    pub cfg: SimConfig,
    pub times: Vec<f64>,
    pub income: [Grid; 2],
}

/// Closed-form equilibrium paths over simulated incomes, with per-path,
/// per-step clearing residuals.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub solution: EquilibriumSolution,
    pub cfg: SimConfig,
    pub times: Vec<f64>,
    pub income: [Grid; 2],
    pub consumption: [Grid; 2],
    pub wealth: [Grid; 2],
    pub holdings: [Grid; 2],
    pub real_residual: Grid,
    pub fin_residual: Grid,
}

/// Worst-case residuals of a path bundle.
#[derive(Debug, Clone, Copy)]
pub struct ClearingReport {
    pub max_real_residual: f64,
    pub max_fin_residual: f64,
    pub max_self_financing_residual: f64,
}

/// Closed-form vs Monte Carlo transversality term at one horizon.
#[derive(Debug, Clone, Copy)]
pub struct TransversalityCheck {
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
}

/// Start vs Monte Carlo terminal mean of the discounted value process.
#[derive(Debug, Clone, Copy)]
pub struct MartingaleCheck {
    pub initial_value: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits in [0,1)
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Marsaglia polar method; returns an independent standard normal pair.
fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let u = 2.0 * uniform(rng) - 1.0;
        let v = 2.0 * uniform(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let scale = (-2.0 * s.ln() / s).sqrt();
            return (u * scale, v * scale);
        }
    }
}

/// Correlated standard normal pair: the 2x2 Cholesky factor applied to an
/// independent pair.
fn correlated_pair(rng: &mut ChaCha8Rng, rho: f64, rho_comp: f64) -> (f64, f64) {
    let (n1, n2) = standard_normal_pair(rng);
    (n1, rho * n1 + rho_comp * n2)
}

/// Neumaier compensated sum; order-independent accuracy for means.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Sample mean and standard error of the mean.
fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let sum_sq: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = sum_sq / (n - 1.0);
    (mean, (variance / n).sqrt())
}

fn require_delta(grid: TimeGrid, what: &str) -> Result<f64, Error> {
    grid.delta().ok_or_else(|| {
        Error::PreconditionViolated(format!("{what} requires a discrete grid (set delta)"))
    })
}

/// Simulates both agents' income paths:
/// `Y_{n+1} = Y_n + mu*delta + sqrt(delta)*sigma*Z_{n+1}` with standard
/// normal pairs of correlation `rho`, independent across steps.
pub fn simulate_income(
    agents: &[AgentParams; 2],
    market: &MarketParams,
    cfg: &SimConfig,
) -> Result<IncomePaths, Error> {
    market.validate()?;
    for agent in agents {
        agent.validate()?;
    }
    cfg.validate()?;
    let delta = require_delta(market.grid, "income simulation")?;
    let n_steps = cfg.n_steps;
    let n_cols = n_steps + 1;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * delta).collect();
    let sqrt_delta = delta.sqrt();
    let rho = cfg.rho;
    let rho_comp = (1.0 - rho * rho).sqrt();
    let mut income1 = Grid::zeros(cfg.n_paths, n_cols);
    let mut income2 = Grid::zeros(cfg.n_paths, n_cols);
    let (a1, a2) = (agents[0], agents[1]);
    let seed = cfg.seed;
    income1
        .par_rows_mut()
        .zip(income2.par_rows_mut())
        .enumerate()
        .for_each(|(path, (row1, row2))| {
            let mut rng = path_rng(seed, path);
            let mut y1 = a1.y0;
            let mut y2 = a2.y0;
            row1[0] = y1;
            row2[0] = y2;
            for k in 1..=n_steps {
                let (z1, z2) = correlated_pair(&mut rng, rho, rho_comp);
                y1 += a1.mu * delta + sqrt_delta * a1.sigma * z1;
                y2 += a2.mu * delta + sqrt_delta * a2.sigma * z2;
                row1[k] = y1;
                row2[k] = y2;
            }
        });
    Ok(IncomePaths {
        agents: *agents,
        market: *market,
        cfg: *cfg,
        times,
        income: [income1, income2],
    })
}

/// Evaluates the closed-form equilibrium paths over simulated incomes and
/// forms the clearing residuals.
///
/// Real residual per path and step:
/// `sum_i c_i*delta - delta - sum_i Y_i*delta + 2*lambda*|trade_1|*A`,
/// with `A` the buyer's shadow annuity value divided by `1+lambda`; the
/// transaction term is identically zero without trade. Financial residual:
/// `theta_1 + theta_2 - 1`.
pub fn simulate_equilibrium_paths(
    solution: &EquilibriumSolution,
    incomes: &IncomePaths,
) -> Result<PathBundle, Error> {
    if incomes.market.lambda != solution.lambda || incomes.market.grid != solution.grid {
        return Err(Error::MismatchedInputs(
            "income paths were generated under a different market".into(),
        ));
    }
    if incomes.agents != solution.agents {
        return Err(Error::MismatchedInputs(
            "income paths were generated for different agents".into(),
        ));
    }
    let delta = require_delta(solution.grid, "equilibrium path evaluation")?;
    let cfg = incomes.cfg;
    let n_steps = cfg.n_steps;
    let n_cols = n_steps + 1;

    let ctx1 = solution.policy_context(0);
    let ctx2 = solution.policy_context(1);
    // trade settles at the buyer's shadow value marked down by 1+lambda;
    // a perturbed candidate may trade in either direction, so pick the
    // buyer from the sign of agent 1's holdings change
    let trade1 = ctx1.trade_rate();
    let traded_value = if trade1 > 0.0 {
        ctx1.annuity_value() / (1.0 + solution.lambda)
    } else if trade1 < 0.0 {
        ctx2.annuity_value() / (1.0 + solution.lambda)
    } else {
        0.0
    };
    let transaction_term = 2.0 * solution.lambda * trade1.abs() * traded_value;

    // wealth and holdings are deterministic; evaluate once per step
    let wealth_row: [Vec<f64>; 2] = [
        (0..=n_steps)
            .map(|k| ctx1.wealth_at_step(k as u64))
            .collect(),
        (0..=n_steps)
            .map(|k| ctx2.wealth_at_step(k as u64))
            .collect(),
    ];
    let holdings_row: [Vec<f64>; 2] = [
        wealth_row[0].iter().map(|&x| ctx1.holdings(x)).collect(),
        wealth_row[1].iter().map(|&x| ctx2.holdings(x)).collect(),
    ];
    let adjustment = [ctx1.consumption_adjustment(), ctx2.consumption_adjustment()];
    let rates = [ctx1.shadow_rate, ctx2.shadow_rate];

    let mut consumption1 = Grid::zeros(cfg.n_paths, n_cols);
    let mut consumption2 = Grid::zeros(cfg.n_paths, n_cols);
    let mut real_residual = Grid::zeros(cfg.n_paths, n_cols);
    let mut fin_residual = Grid::zeros(cfg.n_paths, n_cols);

    consumption1
        .par_rows_mut()
        .zip(consumption2.par_rows_mut())
        .zip(real_residual.par_rows_mut())
        .zip(fin_residual.par_rows_mut())
        .enumerate()
        .for_each(|(path, (((c1_row, c2_row), real_row), fin_row))| {
            let y1_row = incomes.income[0].row(path);
            let y2_row = incomes.income[1].row(path);
            for k in 0..=n_steps {
                let c1 = rates[0] * wealth_row[0][k] + y1_row[k] + adjustment[0];
                let c2 = rates[1] * wealth_row[1][k] + y2_row[k] + adjustment[1];
                c1_row[k] = c1;
                c2_row[k] = c2;
                real_row[k] =
                    (c1 + c2) * delta - delta - (y1_row[k] + y2_row[k]) * delta + transaction_term;
                fin_row[k] = holdings_row[0][k] + holdings_row[1][k] - 1.0;
            }
        });

    let mut wealth1 = Grid::zeros(cfg.n_paths, n_cols);
    let mut wealth2 = Grid::zeros(cfg.n_paths, n_cols);
    let mut holdings1 = Grid::zeros(cfg.n_paths, n_cols);
    let mut holdings2 = Grid::zeros(cfg.n_paths, n_cols);
    for grid_and_row in [
        (&mut wealth1, &wealth_row[0]),
        (&mut wealth2, &wealth_row[1]),
        (&mut holdings1, &holdings_row[0]),
        (&mut holdings2, &holdings_row[1]),
    ] {
        let (grid, row) = grid_and_row;
        grid.par_rows_mut().for_each(|dst| dst.copy_from_slice(row));
    }

    Ok(PathBundle {
        solution: solution.clone(),
        cfg,
        times: incomes.times.clone(),
        income: [incomes.income[0].clone(), incomes.income[1].clone()],
        consumption: [consumption1, consumption2],
        wealth: [wealth1, wealth2],
        holdings: [holdings1, holdings2],
        real_residual,
        fin_residual,
    })
}

/// Scans a bundle for its worst clearing and self-financing residuals.
#[allow(clippy::needless_range_loop)]
pub fn clearing_report(bundle: &PathBundle) -> ClearingReport {
    let delta = bundle
        .solution
        .grid
        .delta()
        .expect("bundles exist only on discrete grids");
    let n_steps = bundle.cfg.n_steps;
    let annuity = [
        bundle.solution.annuity_value(0),
        bundle.solution.annuity_value(1),
    ];
    let mut max_self_fin = 0.0f64;
    for path in 0..bundle.cfg.n_paths {
        for agent in 0..2 {
            let theta = bundle.holdings[agent].row(path);
            let income = bundle.income[agent].row(path);
            let consumption = bundle.consumption[agent].row(path);
            for k in 0..n_steps {
                let lhs = (theta[k + 1] - theta[k]) * annuity[agent];
                let rhs = (income[k] - consumption[k] + theta[k]) * delta;
                max_self_fin = max_self_fin.max((lhs - rhs).abs());
            }
        }
    }
    ClearingReport {
        max_real_residual: bundle.real_residual.max_abs(),
        max_fin_residual: bundle.fin_residual.max_abs(),
        max_self_financing_residual: max_self_fin,
    }
}

/// Income shock for one agent at one step, replaying the shared stream
/// discipline of [`simulate_income`].
fn agent_shock(pair: (f64, f64), agent: usize) -> f64 {
    if agent == 0 {
        pair.0
    } else {
        pair.1
    }
}

/// Transversality term at horizon `n`: closed form
/// `(1+r*delta)^{-n} * exp(-alpha*r*X_0 - alpha*y_0)` against the Monte
/// Carlo mean of `exp(-beta*t_n - alpha*r*X_n - alpha*Y_n)`.
pub fn check_transversality(
    solution: &EquilibriumSolution,
    agent: usize,
    n: usize,
    cfg: &SimConfig,
) -> Result<TransversalityCheck, Error> {
    let delta = require_delta(solution.grid, "the transversality check")?;
    cfg.validate()?;
    let ctx = solution.policy_context(agent);
    let params = ctx.agent;
    let r = ctx.shadow_rate;
    let x0 = ctx.initial_wealth();
    let closed_form = (1.0 + r * delta).powi(-(n as i32))
        * (-params.alpha * r * x0 - params.alpha * params.y0).exp();

    let wealth_n = ctx.wealth_at_step(n as u64);
    let t_n = n as f64 * delta;
    let sqrt_delta = delta.sqrt();
    let rho = cfg.rho;
    let rho_comp = (1.0 - rho * rho).sqrt();
    let seed = cfg.seed;
    let mut values = vec![0.0f64; cfg.n_paths];
    values.par_iter_mut().enumerate().for_each(|(path, out)| {
        let mut rng = path_rng(seed, path);
        let mut y = params.y0;
        for _ in 0..n {
            let z = agent_shock(correlated_pair(&mut rng, rho, rho_comp), agent);
            y += params.mu * delta + sqrt_delta * params.sigma * z;
        }
        *out = (-params.beta * t_n - params.alpha * r * wealth_n - params.alpha * y).exp();
    });
    let (mc_estimate, std_error) = mean_and_std_error(&values);
    Ok(TransversalityCheck {
        closed_form,
        mc_estimate,
        std_error,
    })
}

/// Discounted value process
/// `M_n = -sum_{k<n} e^{-beta*t_k - alpha*c_k} + e^{-beta*t_n} J(X_n, Y_n)`
/// under consumption `optimal + epsilon`, with wealth following the
/// self-financing recursion. At `epsilon = 0` the process is a martingale
/// (`E[M_n] = M_0`); any other epsilon makes it a strict supermartingale.
pub fn check_value_martingale(
    solution: &EquilibriumSolution,
    agent: usize,
    n: usize,
    cfg: &SimConfig,
    epsilon: f64,
) -> Result<MartingaleCheck, Error> {
    let delta = require_delta(solution.grid, "the martingale check")?;
    cfg.validate()?;
    let ctx = solution.policy_context(agent);
    let params = ctx.agent;
    let r = ctx.shadow_rate;
    let x0 = ctx.initial_wealth();
    let initial_value = ctx.value(x0, params.y0);

    let sqrt_delta = delta.sqrt();
    let rho = cfg.rho;
    let rho_comp = (1.0 - rho * rho).sqrt();
    let seed = cfg.seed;
    let mut values = vec![0.0f64; cfg.n_paths];
    values.par_iter_mut().enumerate().for_each(|(path, out)| {
        let mut rng = path_rng(seed, path);
        let mut x = x0;
        let mut y = params.y0;
        let mut m = 0.0;
        for k in 0..n {
            let t_k = k as f64 * delta;
            let c = ctx.consumption(x, y) + epsilon;
            m -= (-params.beta * t_k - params.alpha * c).exp();
            x += (x * r + y - c) * delta;
            let z = agent_shock(correlated_pair(&mut rng, rho, rho_comp), agent);
            y += params.mu * delta + sqrt_delta * params.sigma * z;
        }
        let t_n = n as f64 * delta;
        *out = m + (-params.beta * t_n).exp() * ctx.value(x, y);
    });
    let (mc_estimate, std_error) = mean_and_std_error(&values);
    Ok(MartingaleCheck {
        initial_value,
        mc_estimate,
        std_error,
    })
}
