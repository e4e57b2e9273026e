//! Result serialization: solution and bank-verdict JSON documents, CSV
//! tables for simulated paths and parameter sweeps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! number re-parses to the exact in-memory value.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use radner_core::analysis::SweepRow;
use radner_core::{
    AgentParams, BankVerdict, EquilibriumSolution, MarketRate, RateInterval, Regime, TimeGrid,
};

use crate::config::AgentConfig;
use crate::error::CliError;
use crate::sim::PathBundle;

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::NoTrade => "no_trade",
        Regime::Agent1Buys => "agent1_buys",
        Regime::Agent2Buys => "agent2_buys",
    }
}

fn regime_from_name(name: &str) -> Result<Regime, CliError> {
    match name {
        "no_trade" => Ok(Regime::NoTrade),
        "agent1_buys" => Ok(Regime::Agent1Buys),
        "agent2_buys" => Ok(Regime::Agent2Buys),
        other => Err(CliError::Parse(format!("unknown regime '{other}'"))),
    }
}

/// Market rate as serialized: a point collapses to `lo = mid = hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketRateJson {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
}

/// Wire form of an [`EquilibriumSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub regime: String,
    pub r_market: MarketRateJson,
    pub r1: f64,
    pub r2: f64,
    pub trade_rate: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub agents: Vec<AgentConfig>,
}

impl SolutionJson {
    pub fn from_solution(solution: &EquilibriumSolution) -> Self {
        SolutionJson {
            regime: regime_name(solution.regime).to_string(),
            r_market: MarketRateJson {
                lo: solution.market_rate.lo(),
                mid: solution.market_rate.mid(),
                hi: solution.market_rate.hi(),
            },
            r1: solution.shadow_rate_1,
            r2: solution.shadow_rate_2,
            trade_rate: solution.trade_per_step,
            lambda: solution.lambda,
            delta: solution.grid.delta(),
            agents: solution.agents.iter().map(|&a| a.into()).collect(),
        }
    }

    pub fn to_solution(&self) -> Result<EquilibriumSolution, CliError> {
        let regime = regime_from_name(&self.regime)?;
        if self.agents.len() != 2 {
            return Err(CliError::Parse(format!(
                "solution document must carry 2 agents (got {})",
                self.agents.len()
            )));
        }
        let market_rate = match regime {
            Regime::NoTrade => MarketRate::Interval(RateInterval {
                lo: self.r_market.lo,
                hi: self.r_market.hi,
            }),
            _ => MarketRate::Point(self.r_market.mid),
        };
        let agents: [AgentParams; 2] = [self.agents[0].into(), self.agents[1].into()];
        Ok(EquilibriumSolution {
            regime,
            shadow_rate_1: self.r1,
            shadow_rate_2: self.r2,
            market_rate,
            trade_per_step: self.trade_rate,
            lambda: self.lambda,
            grid: match self.delta {
                Some(delta) => TimeGrid::Discrete { delta },
                None => TimeGrid::Continuous,
            },
            agents,
        })
    }
}

/// Wire form of a [`BankVerdict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BankVerdictJson {
    Infeasible { reason: String },
    NoTradeOnly { rate: f64 },
}

impl From<&BankVerdict> for BankVerdictJson {
    fn from(v: &BankVerdict) -> Self {
        match v {
            BankVerdict::Infeasible { reason } => BankVerdictJson::Infeasible {
                reason: reason.clone(),
            },
            BankVerdict::NoTradeOnly { rate } => BankVerdictJson::NoTradeOnly { rate: *rate },
        }
    }
}

pub fn solution_to_json(solution: &EquilibriumSolution) -> String {
    let mut text = serde_json::to_string_pretty(&SolutionJson::from_solution(solution))
        .expect("solution serialization cannot fail");
    text.push('\n');
    text
}

pub fn bank_verdict_to_json(verdict: &BankVerdict) -> String {
    let mut text = serde_json::to_string_pretty(&BankVerdictJson::from(verdict))
        .expect("verdict serialization cannot fail");
    text.push('\n');
    text
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "param,regime,r_lo,r_mid,r_hi,r1,r2,trade_rate")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.param,
            regime_name(row.regime),
            row.rate_lo,
            row.rate_mid,
            row.rate_hi,
            row.shadow_rate_1,
            row.shadow_rate_2,
            row.trade_rate
        )?;
    }
    Ok(())
}

pub fn write_paths_csv<W: Write>(mut w: W, bundle: &PathBundle) -> io::Result<()> {
    writeln!(
        w,
        "path,step,t,Y1,Y2,c1,c2,X1,X2,theta1,theta2,real_residual,fin_residual"
    )?;
    for path in 0..bundle.cfg.n_paths {
        for (step, &t) in bundle.times.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                path,
                step,
                t,
                bundle.income[0].at(path, step),
                bundle.income[1].at(path, step),
                bundle.consumption[0].at(path, step),
                bundle.consumption[1].at(path, step),
                bundle.wealth[0].at(path, step),
                bundle.wealth[1].at(path, step),
                bundle.holdings[0].at(path, step),
                bundle.holdings[1].at(path, step),
                bundle.real_residual.at(path, step),
                bundle.fin_residual.at(path, step)
            )?;
        }
    }
    Ok(())
}
