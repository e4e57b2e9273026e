//! Configuration ingestion: one JSON document describes the two agents, the
//! market, and optional simulation settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use radner_core::{AgentParams, MarketParams};

use crate::error::CliError;
use crate::sim::SimConfig;

/// Slack allowed on the unit-supply condition `theta0[0] + theta0[1] = 1`.
const THETA_SUM_TOL: f64 = 1e-12;

pub const DEFAULT_N_PATHS: usize = 1000;
pub const DEFAULT_N_STEPS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

/// Parameters of one agent as they appear in the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub theta0: f64,
    pub y0: f64,
}

impl From<AgentParams> for AgentConfig {
    fn from(p: AgentParams) -> Self {
        AgentConfig {
            alpha: p.alpha,
            beta: p.beta,
            mu: p.mu,
            sigma: p.sigma,
            theta0: p.theta0,
            y0: p.y0,
        }
    }
}

impl From<AgentConfig> for AgentParams {
    fn from(c: AgentConfig) -> Self {
        AgentParams {
            alpha: c.alpha,
            beta: c.beta,
            mu: c.mu,
            sigma: c.sigma,
            theta0: c.theta0,
            y0: c.y0,
        }
    }
}

/// Simulation settings section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub rho: f64,
}

/// Full run configuration. `delta` absent means continuous time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub agents: Vec<AgentConfig>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSettings>,
}

impl Config {
    /// Parses and validates a JSON document; every violated invariant is
    /// reported with its field path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Config =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut violations = Vec::new();
        if self.agents.len() != 2 {
            violations.push(format!(
                "agents must list exactly 2 entries (got {})",
                self.agents.len()
            ));
        }
        for (i, agent) in self.agents.iter().enumerate() {
            let fields = [
                ("alpha", agent.alpha),
                ("beta", agent.beta),
                ("mu", agent.mu),
                ("sigma", agent.sigma),
                ("theta0", agent.theta0),
                ("y0", agent.y0),
            ];
            for (name, value) in fields {
                if !value.is_finite() {
                    violations.push(format!("agents[{i}].{name} must be finite"));
                }
            }
            if agent.alpha.is_nan() || agent.alpha <= 0.0 {
                violations.push(format!(
                    "agents[{i}].alpha must be > 0 (got {})",
                    agent.alpha
                ));
            }
            if agent.beta.is_nan() || agent.beta <= 0.0 {
                violations.push(format!("agents[{i}].beta must be > 0 (got {})", agent.beta));
            }
            if agent.sigma < 0.0 {
                violations.push(format!(
                    "agents[{i}].sigma must be >= 0 (got {})",
                    agent.sigma
                ));
            }
        }
        if self.agents.len() == 2 {
            let sum = self.agents[0].theta0 + self.agents[1].theta0;
            let deviation = (sum - 1.0).abs();
            if deviation.is_nan() || deviation > THETA_SUM_TOL {
                violations.push(format!("theta0 values must sum to 1 (got {sum})"));
            }
        }
        if !self.lambda.is_finite() || !(0.0..1.0).contains(&self.lambda) {
            violations.push(format!("lambda must be in [0,1) (got {})", self.lambda));
        }
        if let Some(delta) = self.delta {
            if !delta.is_finite() || delta <= 0.0 {
                violations.push(format!("delta must be > 0 (got {delta})"));
            }
        }
        if let Some(sim) = &self.sim {
            if sim.n_paths == 0 {
                violations.push("sim.n_paths must be >= 1".to_string());
            }
            if sim.n_steps == 0 {
                violations.push("sim.n_steps must be >= 1".to_string());
            }
            if !sim.rho.is_finite() || sim.rho.abs() > 1.0 {
                violations.push(format!("sim.rho must be in [-1,1] (got {})", sim.rho));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(violations))
        }
    }

    pub fn agent_params(&self) -> [AgentParams; 2] {
        [self.agents[0].into(), self.agents[1].into()]
    }

    /// Market implied by the document: discrete when `delta` is present.
    pub fn market(&self) -> MarketParams {
        match self.delta {
            Some(delta) => MarketParams::discrete(self.lambda, delta),
            None => MarketParams::continuous(self.lambda),
        }
    }

    /// Simulation settings with defaults for anything unspecified.
    pub fn sim_config(&self) -> SimConfig {
        match &self.sim {
            Some(s) => SimConfig {
                n_paths: s.n_paths,
                n_steps: s.n_steps,
                seed: s.seed,
                rho: s.rho,
            },
            None => SimConfig {
                n_paths: DEFAULT_N_PATHS,
                n_steps: DEFAULT_N_STEPS,
                seed: DEFAULT_SEED,
                rho: 0.0,
            },
        }
    }
}
