//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a single PASS/FAIL line (visible with `--nocapture`).
//!
//! The thresholds are Monte Carlo coverage targets with three-sigma
//! binomial margins, exact DP identities, and exhaustive enumerations at
//! small window sizes. All randomness is seeded; reruns are deterministic.

use fairwatch::{
    empirical_coverage, enumerate_optimal_cost, exact_runtime_fairness, hoeffding_pointwise_eps,
    induced_chain, simulate, simulate_labeled, stitched_uniform_eps, synthesize_value_table,
    AdditiveMonitor, BiasMap, BiasOutcomePair, CostModel, DeltaEnforcer, Dynamics, HmmMonitor,
    Horizon, InfeasiblePolicy, MarkovDynamics, MarkovMonitor, MeasureKind, Mode, PeriodicShield,
    ReachTable, Shield, StaticMonitor, ThresholdOutcomeEnforcer, UnitInterval, MIXING_TOL,
};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[{status}] {criterion}: {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn interval(lo: f64, hi: f64) -> UnitInterval {
    UnitInterval::new(lo, hi).unwrap()
}

/// 1. Static-coin pointwise coverage: p = 0.3, T = 1000, δ = 0.05,
///    10,000 trials; truth-in-interval rate at t = T must be ≥ 0.9435.
#[test]
fn criterion_01_static_pointwise_coverage() {
    let p = 0.3;
    let rate = empirical_coverage(10_000, 10_100, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut monitor = StaticMonitor::new(
            MeasureKind::BiasFairness,
            Horizon::Finite(0),
            Mode::Pointwise,
            0.05,
        )
        .unwrap();
        for _ in 0..1000 {
            monitor.observe(u8::from(rng.gen::<f64>() < p));
        }
        monitor.current_interval().contains(p)
    });
    report(
        "criterion 1 static pointwise coverage",
        rate >= 0.9435,
        &format!("rate = {rate:.4}, threshold 0.9435"),
    );
}

/// 2. Static-coin uniform coverage: truth inside the interval at every
///    t ∈ [2, 1000] simultaneously in ≥ 94.35% of trials.
#[test]
fn criterion_02_static_uniform_coverage() {
    let p = 0.3;
    let rate = empirical_coverage(10_000, 20_200, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut monitor = StaticMonitor::new(
            MeasureKind::BiasFairness,
            Horizon::Finite(0),
            Mode::Uniform,
            0.05,
        )
        .unwrap();
        for t in 1..=1000u64 {
            let verdict = monitor.step(u8::from(rng.gen::<f64>() < p));
            if t >= 2 && !verdict.contains(p) {
                return false;
            }
        }
        true
    });
    report(
        "criterion 2 static uniform coverage",
        rate >= 0.9435,
        &format!("rate = {rate:.4}, threshold 0.9435"),
    );
}

/// 3. Frozen bound values at t = 100, δ = 0.05, against an independent
///    high-precision evaluation, to four decimal places.
#[test]
fn criterion_03_bound_values() {
    let eps_p = hoeffding_pointwise_eps(100, 0.05).unwrap();
    let eps_u = stitched_uniform_eps(100, 0.05).unwrap();
    let p_ok = (eps_p - 0.135_810_151_574_061_95).abs() < 1e-12 && (eps_p - 0.135810).abs() < 5e-5;
    let u_ok = (eps_u - 0.282_223_898_864_368_54).abs() < 1e-12 && (eps_u - 0.28223).abs() < 5e-5;
    report(
        "criterion 3 bound values",
        p_ok && u_ok,
        &format!("eps_p = {eps_p:.6}, eps_u = {eps_u:.6}"),
    );
}

/// 4. One-step averaging band, exhaustively: outcome fairness over all
///    binary sequences and bias fairness over a 5-point bias grid, t ≤ 10,
///    |φ(w_{1:t}) - φ(w_{1:t-1})| ≤ 1/t with zero violations.
#[test]
fn criterion_04_averaging_band_exhaustive() {
    let mut violations = 0u64;

    // Outcome fairness: depth-first over all binary sequences.
    fn walk_outcomes(depth: usize, heads: u64, violations: &mut u64) {
        if depth == 10 {
            return;
        }
        let t = (depth + 1) as u64;
        for x in 0..2u64 {
            if depth > 0 {
                let prev = heads as f64 / depth as f64;
                let now = (heads + x) as f64 / t as f64;
                if (now - prev).abs() > 1.0 / t as f64 + 1e-15 {
                    *violations += 1;
                }
            }
            walk_outcomes(depth + 1, heads + x, violations);
        }
    }
    walk_outcomes(0, 0, &mut violations);

    // Bias fairness: depth-first over the 5-point grid.
    const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    fn walk_biases(depth: usize, sum: f64, violations: &mut u64) {
        if depth == 10 {
            return;
        }
        let t = (depth + 1) as u64;
        for p in GRID {
            if depth > 0 {
                let prev = sum / depth as f64;
                let now = (sum + p) / t as f64;
                if (now - prev).abs() > 1.0 / t as f64 + 1e-15 {
                    *violations += 1;
                }
            }
            walk_biases(depth + 1, sum + p, violations);
        }
    }
    walk_biases(0, 0.0, &mut violations);

    report(
        "criterion 4 averaging band exhaustive",
        violations == 0,
        &format!("{violations} violations across 2^10 outcome and 5^10 bias sequences"),
    );
}

/// 5. Threshold enforcer band: over all 2^14 raw streams and
///    p ∈ {0.3, 0.5, 0.9}, the enforced head rate stays inside
///    [max(0, p-1/t), min(1, p+1/t)] at every step.
#[test]
fn criterion_05_threshold_enforcer_band() {
    let mut violations = 0u64;
    for p in [0.3, 0.5, 0.9] {
        for stream in 0u32..(1 << 14) {
            let mut enforcer = ThresholdOutcomeEnforcer::free(p);
            let mut heads = 0u64;
            for t in 1..=14u64 {
                let raw = ((stream >> (t - 1)) & 1) as u8;
                heads += enforcer.step(raw) as u64;
                let rate = heads as f64 / t as f64;
                let lo = (p - 1.0 / t as f64).max(0.0);
                let hi = (p + 1.0 / t as f64).min(1.0);
                if rate < lo - 1e-15 || rate > hi + 1e-15 {
                    violations += 1;
                }
            }
        }
    }
    report(
        "criterion 5 threshold enforcer band",
        violations == 0,
        &format!("{violations} violations over 3 x 2^14 streams"),
    );
}

/// 6. δ-enforcer guarantee: exact DP on the enforced process gives
///    P_δ(0,0) ≥ 1-δ for T = 16, p ∈ {0.3, 0.5, 0.7}, I = [0.4, 0.6],
///    δ ∈ {0.05, 0.1, 0.2}; Monte Carlo success over 10,000 trials is
///    ≥ 1-δ minus a three-sigma margin.
#[test]
fn criterion_06_delta_enforcer_guarantee() {
    let window = 16u64;
    let target = interval(0.4, 0.6);
    let mut all_ok = true;
    let mut detail = String::new();
    for p in [0.3, 0.5, 0.7] {
        for delta in [0.05, 0.1, 0.2] {
            let table = ReachTable::build(p, window, target).unwrap();
            assert!(table.probability(0, 0) > 0.0);

            // Exact DP over the enforced process, driven by the actual
            // decision rule.
            let t_len = window as usize;
            let mut rows: Vec<Vec<f64>> = (0..=t_len).map(|t| vec![0.0; t + 1]).collect();
            for h in 0..=t_len {
                rows[t_len][h] = f64::from(target.contains(h as f64 / window as f64));
            }
            for t in (0..t_len).rev() {
                for h in 0..=t {
                    let mut acc = 0.0;
                    for raw in 0..2u8 {
                        let weight = if raw == 1 { p } else { 1.0 - p };
                        let emitted = DeltaEnforcer::decide(&table, delta, t as u64, h as u64, raw);
                        acc += weight * rows[t + 1][h + emitted as usize];
                    }
                    rows[t][h] = acc;
                }
            }
            let exact = rows[0][0];
            let exact_ok = exact >= 1.0 - delta - 1e-12;

            // Monte Carlo on the same rule through the public enforcer.
            let trials = 10_000u64;
            let rate = empirical_coverage(
                trials,
                60_000 + (p * 100.0) as u64 * 1000 + (delta * 100.0) as u64,
                |seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut enforcer = DeltaEnforcer::new(table.clone(), delta).unwrap();
                    let mut heads = 0u64;
                    for _ in 0..window {
                        let raw = u8::from(rng.gen::<f64>() < p);
                        heads += enforcer.step(raw).unwrap() as u64;
                    }
                    target.contains(heads as f64 / window as f64)
                },
            );
            let margin = fairwatch::three_sigma_margin(1.0 - delta, trials);
            let mc_ok = rate >= 1.0 - delta - margin;
            if !(exact_ok && mc_ok) {
                all_ok = false;
                detail = format!("p={p} delta={delta}: exact={exact:.4} rate={rate:.4}");
            }
        }
    }
    report(
        "criterion 6 delta-enforcer guarantee",
        all_ok,
        if detail.is_empty() {
            "all 9 instances meet 1-delta"
        } else {
            &detail
        },
    );
}

/// 7. Shield optimality: v(0,0) equals the full-history-tree optimum to
///    1e-9 on 50 randomized instances with T ≤ 12, and the
///    p = 0.5, T = 2, I = [0.5, 1] instance yields exactly 0.25.
#[test]
fn criterion_07_shield_optimality() {
    let exemplar = synthesize_value_table(
        BiasMap::Constant(0.5),
        2,
        interval(0.5, 1.0),
        CostModel::Unit,
    )
    .unwrap();
    let exemplar_ok = exemplar.value(0, 0) == 0.25;

    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let window = rng.gen_range(1..=12u64);
        let p: f64 = rng.gen_range(0.05..0.95);
        let lo: f64 = rng.gen_range(0.0..0.9);
        let hi: f64 = rng.gen_range(lo..1.0);
        let target = interval(lo, hi);
        let cost = if rng.gen::<bool>() {
            CostModel::Unit
        } else {
            CostModel::BiasWeighted
        };
        let table = synthesize_value_table(BiasMap::Constant(p), window, target, cost).unwrap();
        let oracle = enumerate_optimal_cost(&|_| p, window, target, cost).unwrap();
        let dp = table.value(0, 0);
        checked += 1;
        if oracle.is_finite() || dp.is_finite() {
            if !(oracle.is_finite() && dp.is_finite()) {
                worst = f64::INFINITY;
            } else {
                worst = worst.max((dp - oracle).abs());
            }
        }
    }
    report(
        "criterion 7 shield optimality",
        exemplar_ok && worst <= 1e-9,
        &format!(
            "exemplar v(0,0) = {}, max |dp - oracle| = {worst:.2e} over 50 instances",
            exemplar.value(0, 0)
        ),
    );
}

/// 8. Shield soundness at δ = 0: for every window T ≤ 14 and a battery of
///    (p, I) instances, every one of the 2^T raw streams is enforced into
///    I whenever v(0,0) is finite — zero violations.
#[test]
fn criterion_08_shield_soundness_exhaustive() {
    let battery = [
        (0.5, interval(0.4, 0.6)),
        (0.3, interval(0.5, 1.0)),
        (0.9, interval(0.0, 0.5)),
        (0.7, interval(1.0, 1.0)),
        (0.5, interval(0.41, 0.449)), // infeasible at most T: exercises the skip
    ];
    let mut violations = 0u64;
    let mut enforced_runs = 0u64;
    for window in 1..=14u64 {
        for (p, target) in battery {
            let table =
                synthesize_value_table(BiasMap::Constant(p), window, target, CostModel::Unit)
                    .unwrap();
            if !table.is_feasible() {
                continue;
            }
            for stream in 0u64..(1 << window) {
                let mut shield = Shield::new(table.clone());
                let mut heads = 0u64;
                for t in 0..window {
                    let raw = BiasOutcomePair {
                        bias: p,
                        outcome: ((stream >> t) & 1) as u8,
                    };
                    heads += shield.step(raw).unwrap().pair.outcome as u64;
                }
                enforced_runs += 1;
                if !target.contains(heads as f64 / window as f64) {
                    violations += 1;
                }
            }
        }
    }
    report(
        "criterion 8 shield soundness",
        violations == 0 && enforced_runs > 0,
        &format!("{violations} violations over {enforced_runs} enforced streams"),
    );
}

/// 9. Periodic shield: p = 0.5, T = 10, I = [0.4, 0.6], 5 windows,
///    10,000 trials; the overall head rate is inside I at every window
///    endpoint in 100% of trials.
#[test]
fn criterion_09_periodic_shield_endpoints() {
    let target = interval(0.4, 0.6);
    let trials = 10_000u64;
    let hits = (0..trials)
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(90_000 + i);
            let mut shield = PeriodicShield::new(
                0.5,
                10,
                target,
                CostModel::Unit,
                InfeasiblePolicy::HardError,
            )
            .unwrap();
            let mut heads = 0u64;
            for t in 1..=50u64 {
                let raw = BiasOutcomePair {
                    bias: 0.5,
                    outcome: u8::from(rng.gen::<f64>() < 0.5),
                };
                heads += shield.step(raw).unwrap().pair.outcome as u64;
                if t % 10 == 0 && !target.contains(heads as f64 / t as f64) {
                    return false;
                }
            }
            true
        })
        .count() as u64;
    report(
        "criterion 9 periodic shield endpoints",
        hits == trials,
        &format!("{hits}/{trials} trials hit all 5 endpoints"),
    );
}

/// 10. Hidden-Markov monitor on the sticky two-coin chain (biases 0.9/0.1,
///     switch 0.01, stationary start): at T = 1e5 the mixing-time-aware
///     interval contains the true limit 0.5 in ≥ 94% of 1,000 trials,
///     while a (wrongly assumed) static monitor on the same traces
///     excludes 0.5 in > 50% of them.
#[test]
fn criterion_10_hmm_vs_static_on_sticky_chain() {
    let eps = 0.01;
    let stay = 1.0 - eps;
    let base = MarkovDynamics::new(
        vec![0.9, 0.1],
        vec![
            [vec![stay, eps], vec![stay, eps]],
            [vec![eps, stay], vec![eps, stay]],
        ],
        vec![0.5, 0.5],
    )
    .unwrap();
    let chain = induced_chain(&base);
    let stationary_start = chain.stationary_coin_marginal().unwrap();
    let dynamics = base.with_initial(stationary_start).unwrap();
    let tau = chain.estimate_mixing_time(MIXING_TOL).unwrap();

    let trials = 1_000u64;
    let horizon = 100_000usize;
    let mut hmm_hits = 0u64;
    let mut static_excludes = 0u64;
    for i in 0..trials {
        let (trace, _labels) = simulate_labeled(&dynamics, horizon, 500_000 + i);
        let mut hmm = HmmMonitor::head_rate(tau, 0.05, Mode::Pointwise).unwrap();
        let mut naive = StaticMonitor::new(
            MeasureKind::BiasFairness,
            Horizon::Infinite,
            Mode::Pointwise,
            0.05,
        )
        .unwrap();
        for w in trace.iter() {
            hmm.observe(w.outcome);
            naive.observe(w.outcome);
        }
        hmm_hits += u64::from(hmm.current_interval().contains(0.5));
        static_excludes += u64::from(!naive.current_interval().contains(0.5));
    }
    let hmm_rate = hmm_hits as f64 / trials as f64;
    let exclude_rate = static_excludes as f64 / trials as f64;
    report(
        "criterion 10 hmm vs static on sticky chain",
        hmm_rate >= 0.94 && exclude_rate > 0.5,
        &format!(
            "tau = {tau}, hmm covers 0.5 at {hmm_rate:.3}, static excludes it at {exclude_rate:.3}"
        ),
    );
}

/// 11. Markov monitor coverage: random 2-coin kernels, horizons 0..2,
///     truth from exact runtime fairness; per-horizon coverage over
///     2,000 trials is ≥ 1-δ minus the three-sigma margin.
#[test]
fn criterion_11_markov_monitor_coverage() {
    let delta = 0.05;
    let trials = 2_000u64;
    let run_len = 400usize;
    let mut hits = [0u64; 3];
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(110_000 + i);
        let n = 2;
        let biases: Vec<f64> = vec![rng.gen_range(0.1..0.45), rng.gen_range(0.55..0.9)];
        let mut rows = Vec::new();
        for _ in 0..n {
            let mut pair_rows = Vec::new();
            for _ in 0..2 {
                let a: f64 = rng.gen_range(0.05..0.95);
                pair_rows.push(vec![a, 1.0 - a]);
            }
            rows.push([pair_rows[0].clone(), pair_rows[1].clone()]);
        }
        let dynamics = MarkovDynamics::new(biases, rows, vec![0.5, 0.5]).unwrap();
        let (trace, labels) = simulate_labeled(&dynamics, run_len, 300_000 + i);
        let mut monitor = MarkovMonitor::new(n, Mode::Pointwise, delta).unwrap();
        for (w, &k) in trace.iter().zip(&labels) {
            monitor.step(k, w.outcome).unwrap();
        }
        let wrapped = Dynamics::Markov(dynamics);
        for h in 0..3u64 {
            let truth =
                exact_runtime_fairness(&wrapped, &trace, h, MeasureKind::CurrentFairness).unwrap();
            let verdict = monitor.current_fairness_interval(h).unwrap();
            hits[h as usize] += u64::from(verdict.contains(truth));
        }
    }
    let margin = fairwatch::three_sigma_margin(1.0 - delta, trials);
    let threshold = 1.0 - delta - margin;
    let rates: Vec<f64> = hits.iter().map(|&h| h as f64 / trials as f64).collect();
    let ok = rates.iter().all(|&r| r >= threshold);
    report(
        "criterion 11 markov monitor coverage",
        ok,
        &format!("rates h=0..2 = {rates:?}, threshold {threshold:.4}"),
    );
}

/// 12. Additive monitor: p1 ∈ {0.2, 0.5, 0.8}, β = ±0.02, T = 2000,
///     δ = 0.05; the final current-fairness interval contains the
///     simulator's true bias in ≥ 94.35% of 10,000 trials.
#[test]
fn criterion_12_additive_monitor_coverage() {
    let mut all_ok = true;
    let mut detail = String::new();
    for (j, p1) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let dynamics = Dynamics::additive(p1, -0.02, 0.02).unwrap();
        let rate = empirical_coverage(10_000, 120_000 + j as u64 * 50_000, |seed| {
            let trace = simulate(&dynamics, 2000, seed).unwrap();
            let mut monitor = AdditiveMonitor::new(-0.02, 0.02, Mode::Pointwise, 0.05).unwrap();
            for w in trace.iter() {
                monitor.observe(w.outcome);
            }
            let truth = trace.last().unwrap().bias;
            monitor.verdict().current.contains(truth)
        });
        if rate < 0.9435 {
            all_ok = false;
        }
        detail.push_str(&format!("p1={p1}: {rate:.4} "));
    }
    report(
        "criterion 12 additive monitor coverage",
        all_ok,
        &format!("{detail}(threshold 0.9435)"),
    );
}
