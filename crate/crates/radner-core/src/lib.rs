//! Equilibrium computation for a two-agent annuity market with proportional
//! transaction costs.
//!
//! Two CARA investors receive arithmetic-Brownian income streams, consume,
//! and trade a perpetual annuity in one-net supply subject to a proportional
//! transaction cost `lambda`. Each agent optimizes in her own frictionless
//! shadow market; equilibrium links the shadow rates through market clearing
//! and a closeness condition that keeps both shadow prices inside the bid-ask
//! band. This crate provides:
//!
//! - [`model`]: agent and market parameters, effective discount rates,
//!   excess-demand functions, and trade-regime classification;
//! - [`policy`]: closed-form optimal consumption, wealth, holdings, and
//!   value functions at a constant shadow rate;
//! - [`solver`]: the equilibrium itself (shadow rates, market rate or rate
//!   interval, trade rate) in discrete and continuous time, plus the
//!   bank-account feasibility verdict;
//! - [`analysis`]: comparative statics in the cost parameter and the
//!   time-step convergence study.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature to route float math through `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
mod error;
mod math;
pub mod model;
pub mod policy;
pub mod solver;

pub use error::Error;
pub use model::{
    classify_regime, excess_demand_cts, excess_demand_discrete, AgentParams, EffectiveDiscount,
    MarketParams, Regime, TimeGrid,
};
pub use policy::{PolicyContext, PolicyPoint};
pub use solver::{
    check_bank_constant_equilibrium, solve, solve_cts, solve_discrete, BankVerdict,
    EquilibriumSolution, MarketRate, RateInterval,
};
