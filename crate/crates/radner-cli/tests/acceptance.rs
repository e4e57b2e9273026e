//! End-to-end acceptance suite. Each test is one numbered criterion and
//! prints a PASS line with the measured quantities; tolerances are pinned
//! in the assertions.

use std::process::Command;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use radner_core::analysis::{rate_sensitivity, sweep_delta};
use radner_core::solver::case2_rate_bracket;
use radner_core::{
    check_bank_constant_equilibrium, classify_regime, solve_cts, solve_discrete, AgentParams,
    BankVerdict, MarketParams, MarketRate, Regime, TimeGrid,
};

use radner_cli::config::Config;
use radner_cli::sim::{
    check_transversality, check_value_martingale, clearing_report, simulate_equilibrium_paths,
    simulate_income, SimConfig,
};
use radner_cli::verify::override_market_rate;

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    lo + (hi - lo) * u
}

/// Agent with a prescribed effective discount; drift and volatility are
/// drawn too, with the time preference recovered (positive by redraw).
fn agent_with_discount_rng(rng: &mut ChaCha8Rng, alpha: f64, discount: f64) -> AgentParams {
    loop {
        let mu = uniform(rng, 0.0, 0.05);
        let sigma = uniform(rng, 0.0, 0.3);
        let beta = discount - alpha * mu + alpha * alpha * sigma * sigma / 2.0;
        if beta > 1e-3 {
            return AgentParams {
                alpha,
                beta,
                mu,
                sigma,
                theta0: 0.5,
                y0: 0.0,
            };
        }
    }
}

fn agent_fixed(alpha: f64, discount: f64, theta0: f64, y0: f64) -> AgentParams {
    let mu = 0.01;
    let sigma = 0.1;
    AgentParams {
        alpha,
        beta: discount - alpha * mu + alpha * alpha * sigma * sigma / 2.0,
        mu,
        sigma,
        theta0,
        y0,
    }
}

/// The reference parameter set used across criteria: risk aversions (1,1),
/// effective discounts (0.1, 0.3).
fn reference_agents() -> [AgentParams; 2] {
    [
        agent_fixed(1.0, 0.1, 0.6, 1.0),
        agent_fixed(1.0, 0.3, 0.4, 1.0),
    ]
}

#[test]
fn criterion_01_cts_trade_rate_exact() {
    let s = solve_cts(&reference_agents(), 0.1).unwrap();
    assert_eq!(s.regime, Regime::Agent1Buys);
    let r = s.market_rate.mid();
    assert!((r - 0.198).abs() <= 1e-14);
    assert!((s.shadow_rate_1 - 0.18).abs() <= 1e-14);
    assert!((s.shadow_rate_2 - 0.22).abs() <= 1e-14);
    assert!((s.trade_per_step - 0.08).abs() <= 1e-14);
    println!(
        "criterion 1 PASS - continuous rate {r}, shadow rates ({}, {}), trade {}",
        s.shadow_rate_1, s.shadow_rate_2, s.trade_per_step
    );
}

#[test]
fn criterion_02_discrete_root_vs_quadratic_oracle() {
    let (lambda, delta) = (0.1, 0.5);
    let agents = reference_agents();
    let s = solve_discrete(&agents, lambda, delta).unwrap();
    let r = s.market_rate.mid();
    // equal risk aversions reduce the product equation to a quadratic in
    // u = r*delta: u^2 + 2u + (1-lambda^2)(1 - e^{(b1+b2)delta}) = 0
    let b = [
        agents[0].effective_discount().0,
        agents[1].effective_discount().0,
    ];
    let u = -1.0 + (1.0 + (1.0 - lambda * lambda) * ((b[0] + b[1]) * delta).exp_m1()).sqrt();
    let oracle = u / delta;
    assert!(
        (r - oracle).abs() <= 1e-10,
        "bisection {r} vs quadratic {oracle}"
    );
    let residual = s.defining_residual();
    assert!(residual <= 1e-12);
    let (lo, hi) = case2_rate_bracket(&agents, lambda, delta).unwrap();
    assert!(lo < r && r < hi);
    println!(
        "criterion 2 PASS - r = {r} (oracle {oracle}), residual {residual:.2e}, bracket ({lo}, {hi})"
    );
}

#[test]
fn criterion_03_frictionless_closed_form_100_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let a1 = uniform(&mut rng, 0.3, 3.0);
        let a2 = uniform(&mut rng, 0.3, 3.0);
        let b1 = uniform(&mut rng, 0.02, 0.5);
        let b2 = uniform(&mut rng, 0.02, 0.5);
        let delta = uniform(&mut rng, 0.05, 1.5);
        let agents = [
            agent_with_discount_rng(&mut rng, a1, b1),
            agent_with_discount_rng(&mut rng, a2, b2),
        ];
        let s = solve_discrete(&agents, 0.0, delta).unwrap();
        let weighted = (b1 / a1 + b2 / a2) / (1.0 / a1 + 1.0 / a2);
        let closed = ((weighted * delta).exp_m1()) / delta;
        let err = (s.market_rate.mid() - closed).abs();
        assert!(err <= 1e-12, "draw failed: err {err:.2e}");
        max_err = max_err.max(err);
    }
    println!("criterion 3 PASS - 100 frictionless draws, max |r - closed form| = {max_err:.2e}");
}

#[test]
fn criterion_04_no_trade_intervals() {
    let agents = [
        agent_fixed(1.0, 0.2, 0.6, 1.0),
        agent_fixed(1.0, 0.21, 0.4, 1.0),
    ];
    let d = solve_discrete(&agents, 0.1, 1.0).unwrap();
    assert_eq!(d.regime, Regime::NoTrade);
    // mpmath: 0.9*(e^0.21-1), 1.1*(e^0.2-1)
    match d.market_rate {
        MarketRate::Interval(iv) => {
            assert!((iv.lo - 0.21031025396106893).abs() <= 1e-10);
            assert!((iv.hi - 0.24354303397618682).abs() <= 1e-10);
        }
        _ => panic!("expected interval"),
    }
    let c = solve_cts(&agents, 0.1).unwrap();
    assert_eq!(c.regime, Regime::NoTrade);
    match c.market_rate {
        MarketRate::Interval(iv) => {
            assert!((iv.lo - 0.189).abs() <= 1e-10);
            assert!((iv.hi - 0.22).abs() <= 1e-10);
        }
        _ => panic!("expected interval"),
    }

    // random draws: whenever the ratio condition classifies as no trade,
    // the admissible interval is nonempty
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut no_trade_seen = 0usize;
    for _ in 0..1000 {
        let a1 = uniform(&mut rng, 0.3, 3.0);
        let a2 = uniform(&mut rng, 0.3, 3.0);
        let b1 = uniform(&mut rng, 0.05, 0.5);
        let b2 = b1 * uniform(&mut rng, 0.7, 1.4);
        let lambda = uniform(&mut rng, 0.05, 0.6);
        let delta = uniform(&mut rng, 0.05, 1.5);
        let agents = [
            agent_with_discount_rng(&mut rng, a1, b1),
            agent_with_discount_rng(&mut rng, a2, b2),
        ];
        for market in [
            MarketParams::discrete(lambda, delta),
            MarketParams::continuous(lambda),
        ] {
            if classify_regime(&agents, &market).unwrap() == Regime::NoTrade {
                no_trade_seen += 1;
                let s = radner_core::solve(&agents, &market).unwrap();
                match s.market_rate {
                    MarketRate::Interval(iv) => assert!(
                        !iv.is_empty(),
                        "empty interval [{}, {}] at lambda={lambda}",
                        iv.lo,
                        iv.hi
                    ),
                    _ => panic!("no-trade solution must carry an interval"),
                }
            }
        }
    }
    assert!(no_trade_seen >= 200, "only {no_trade_seen} no-trade draws");
    println!("criterion 4 PASS - fixed intervals to 1e-10, {no_trade_seen} random no-trade draws all nonempty");
}

#[test]
fn criterion_05_clearing_residuals_and_discrimination() {
    let agents = reference_agents();
    let market = MarketParams::discrete(0.1, 0.5);
    let solution = solve_discrete(&agents, 0.1, 0.5).unwrap();
    let cfg = SimConfig {
        n_paths: 1000,
        n_steps: 1000,
        seed: 505,
        rho: 0.3,
    };
    let incomes = simulate_income(&agents, &market, &cfg).unwrap();
    let bundle = simulate_equilibrium_paths(&solution, &incomes).unwrap();
    let report = clearing_report(&bundle);
    assert!(report.max_real_residual <= 1e-10, "{report:?}");
    assert!(report.max_fin_residual <= 1e-10, "{report:?}");

    let perturbed = override_market_rate(&solution, solution.market_rate.mid() + 1e-3).unwrap();
    let perturbed_bundle = simulate_equilibrium_paths(&perturbed, &incomes).unwrap();
    let perturbed_report = clearing_report(&perturbed_bundle);
    let worst = perturbed_report
        .max_real_residual
        .max(perturbed_report.max_fin_residual);
    assert!(worst > 1e-4, "perturbed residual only {worst:.2e}");
    println!(
        "criterion 5 PASS - residuals (real {:.2e}, fin {:.2e}) at solution; {:.2e} after 1e-3 rate perturbation",
        report.max_real_residual, report.max_fin_residual, worst
    );
}

#[test]
fn criterion_06_transversality() {
    // worked example: r = 0.2, delta = 1, n = 10, alpha = 1, X0 = 2.5;
    // closed form (1.2)^-10 e^-0.5 = 0.09795808773745153 (50-digit oracle)
    let worked_agents = [
        AgentParams {
            alpha: 1.0,
            beta: 0.1,
            mu: 0.0,
            sigma: 0.1,
            theta0: 0.5,
            y0: 0.0,
        },
        AgentParams {
            alpha: 1.0,
            beta: 0.1,
            mu: 0.0,
            sigma: 0.1,
            theta0: 0.5,
            y0: 0.0,
        },
    ];
    let worked = radner_core::EquilibriumSolution {
        regime: Regime::NoTrade,
        shadow_rate_1: 0.2,
        shadow_rate_2: 0.2,
        market_rate: MarketRate::Point(0.2),
        trade_per_step: 0.0,
        lambda: 0.0,
        grid: TimeGrid::Discrete { delta: 1.0 },
        agents: worked_agents,
    };
    let small = SimConfig {
        n_paths: 10,
        n_steps: 10,
        seed: 0,
        rho: 0.0,
    };
    let check = check_transversality(&worked, 0, 10, &small).unwrap();
    assert!(
        (check.closed_form - 0.09795808773745153).abs() <= 1e-6,
        "closed form {}",
        check.closed_form
    );

    // Monte Carlo agreement at the equilibrium solution
    let solution = solve_discrete(&reference_agents(), 0.1, 0.5).unwrap();
    let cfg = SimConfig {
        n_paths: 100_000,
        n_steps: 20,
        seed: 606,
        rho: 0.0,
    };
    let mut detail = String::new();
    for n in [5, 10, 20] {
        let tv = check_transversality(&solution, 0, n, &cfg).unwrap();
        let z = (tv.mc_estimate - tv.closed_form).abs() / tv.std_error;
        assert!(z <= 3.0, "n={n}: z = {z:.2}");
        detail.push_str(&format!("n={n} z={z:.2} "));
    }
    println!(
        "criterion 6 PASS - worked closed form {:.9}; MC within 3 SE at {detail}",
        check.closed_form
    );
}

#[test]
fn criterion_07_martingale_and_supermartingale() {
    let solution = solve_discrete(&reference_agents(), 0.1, 0.5).unwrap();
    let cfg = SimConfig {
        n_paths: 100_000,
        n_steps: 20,
        seed: 707,
        rho: 0.0,
    };
    let optimum = check_value_martingale(&solution, 0, 20, &cfg, 0.0).unwrap();
    let z0 = (optimum.mc_estimate - optimum.initial_value).abs() / optimum.std_error;
    assert!(z0 <= 3.0, "martingale z = {z0:.2}");
    let perturbed = check_value_martingale(&solution, 0, 20, &cfg, 0.1).unwrap();
    let gap = optimum.initial_value - perturbed.mc_estimate;
    let z1 = gap / perturbed.std_error;
    assert!(z1 > 3.0, "supermartingale gap z = {z1:.2}");
    println!("criterion 7 PASS - optimum |E[M20]-M0|/se = {z0:.2}; perturbed gap/se = {z1:.1}");
}

#[test]
fn criterion_08_delta_convergence() {
    let deltas = [0.5, 0.25, 0.1, 0.01, 1e-3, 1e-4];
    let sweep = sweep_delta(&reference_agents(), 0.1, &deltas).unwrap();
    for pair in sweep.deviations.windows(2) {
        assert!(
            pair[1] < pair[0],
            "|r(delta) - r(0)| not strictly decreasing: {:?}",
            sweep.deviations
        );
    }
    assert!(sweep.deviations[5] <= 1e-4, "{:?}", sweep.deviations);
    let order = sweep.convergence_order.expect("enough points for a fit");
    println!(
        "criterion 8 PASS - deviations {:?} (limit {}), empirical convergence order {order:.4}",
        sweep.deviations, sweep.limit_rate
    );
}

#[test]
fn criterion_09_sensitivity_sign_100_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let a1 = uniform(&mut rng, 0.3, 3.0);
        let a2 = uniform(&mut rng, 0.3, 3.0);
        let b1 = uniform(&mut rng, 0.02, 0.25);
        let b2 = b1 + uniform(&mut rng, 0.01, 0.3);
        let agents = [
            agent_with_discount_rng(&mut rng, a1, b1),
            agent_with_discount_rng(&mut rng, a2, b2),
        ];
        let s = rate_sensitivity(&agents, 0.0).unwrap();
        // at lambda = 0 the sign is set by the risk-aversion gap
        assert_eq!(
            s.analytic > 0.0,
            a2 > a1,
            "sign mismatch: alphas ({a1}, {a2}), derivative {}",
            s.analytic
        );
        let rel = (s.analytic - s.finite_difference).abs() / s.analytic.abs();
        assert!(rel <= 1e-6, "relative gap {rel:.2e}");
        max_rel = max_rel.max(rel);
    }
    println!("criterion 9 PASS - 100 draws, sign(dr/dl) = sign(alpha2 - alpha1), max analytic-vs-fd relative gap {max_rel:.2e}");
}

#[test]
fn criterion_10_bank_verdicts_100_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..100 {
        let a1 = uniform(&mut rng, 0.3, 3.0);
        let a2 = uniform(&mut rng, 0.3, 3.0);
        let b1 = uniform(&mut rng, 0.02, 0.4);
        let offset = uniform(&mut rng, 1e-5, 0.3);
        let b2 = if uniform(&mut rng, 0.0, 1.0) < 0.5 {
            b1 + offset
        } else {
            (b1 - offset).max(1e-3)
        };
        if (b1 - b2).abs() <= 1e-6 {
            continue;
        }
        let lambda = uniform(&mut rng, 0.01, 0.9);
        let delta = uniform(&mut rng, 0.05, 1.5);
        let agents = [
            agent_with_discount_rng(&mut rng, a1, b1),
            agent_with_discount_rng(&mut rng, a2, b2),
        ];
        let verdict = check_bank_constant_equilibrium(&agents, lambda, delta).unwrap();
        assert!(
            matches!(verdict, BankVerdict::Infeasible { .. }),
            "expected infeasible at discounts ({b1}, {b2})"
        );
    }
    // equal discounts: the no-trade rate
    let agents = [
        agent_fixed(1.0, 0.2, 0.6, 1.0),
        agent_fixed(1.3, 0.2, 0.4, 1.0),
    ];
    let verdict = check_bank_constant_equilibrium(&agents, 0.1, 1.0).unwrap();
    match verdict {
        BankVerdict::NoTradeOnly { rate } => {
            assert!((rate - 0.22140275816016983).abs() <= 1e-12, "rate {rate}");
            println!("criterion 10 PASS - 100 unequal-discount draws infeasible; equal discounts give rate {rate}");
        }
        other => panic!("expected NoTradeOnly, got {other:?}"),
    }
}

#[test]
fn criterion_11_regime_boundary_continuity() {
    let agents = reference_agents();
    let boundary_lambda = 0.5;
    let s = solve_cts(&agents, boundary_lambda).unwrap();
    assert_eq!(s.regime, Regime::NoTrade);
    let (lo, hi) = match s.market_rate {
        MarketRate::Interval(iv) => (iv.lo, iv.hi),
        _ => panic!("expected interval"),
    };
    assert!((lo - 0.15).abs() <= 1e-12);
    assert!((hi - 0.15).abs() <= 1e-12);
    // trade-regime formula evaluated at the boundary
    let just_below = solve_cts(&agents, boundary_lambda - 1e-12).unwrap();
    let limit = just_below.market_rate.mid();
    assert!((limit - 0.15).abs() <= 1e-12);
    assert!(just_below.trade_per_step.abs() <= 1e-11);
    println!(
        "criterion 11 PASS - boundary interval [{lo}, {hi}], trade-regime limit {limit}, trade rate {:.2e}",
        just_below.trade_per_step
    );
}

#[test]
fn criterion_12_simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let config = Config::from_json(
        r#"{
            "agents": [
                {"alpha": 1.0, "beta": 0.095, "mu": 0.01, "sigma": 0.1, "theta0": 0.6, "y0": 1.0},
                {"alpha": 1.0, "beta": 0.295, "mu": 0.01, "sigma": 0.1, "theta0": 0.4, "y0": 1.0}
            ],
            "lambda": 0.1,
            "delta": 0.5,
            "sim": {"n_paths": 64, "n_steps": 128, "seed": 2024, "rho": 0.4}
        }"#,
    )
    .unwrap();
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    let run = |out: &str| {
        let out_path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_radner"))
            .args(["simulate", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&out_path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&out_path).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert!(!first.is_empty());
    assert_eq!(first, second, "simulate output differs between runs");
    println!(
        "criterion 12 PASS - two simulate runs produced byte-identical CSV ({} bytes)",
        first.len()
    );
}
