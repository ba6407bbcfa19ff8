//! Experiment runners: wire dynamics, monitors, enforcers, and oracles
//! into CSV artifacts.

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairwatch::{
    dynamic_shield, empirical_coverage, exact_runtime_fairness, induced_chain, sample_next,
    simulate, simulate_labeled, three_sigma_margin, AdditiveMonitor, BiasOutcomePair,
    ConfidenceInterval, ConstantBiasEnforcer, DeltaEnforcer, Dynamics, EnforceError,
    ExactOutcomeMonitor, HmmMonitor, Horizon, InfeasiblePolicy, MarkovMonitor, MeasureKind, Mode,
    PeriodicShield, ReachTable, Shield, StaticMonitor, ThresholdOutcomeEnforcer, Trace, VerdictRow,
    MIXING_TOL,
};

use crate::config::Config;
use crate::{CliError, Invocation};

/// Cap on total simulated steps per invocation.
const STEP_BUDGET: u64 = 200_000_000;

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_path: PathBuf,
    pub config_hash: String,
    pub rows: u64,
}

struct Artifact {
    body: String,
    rows: u64,
    /// Set when the artifact was written but the instance is infeasible
    /// (exit 3 after writing).
    infeasible: Option<String>,
}

/// 17-significant-digit float rendering, round-trip safe.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Loads the config, runs the experiment, writes the artifact atomically.
pub fn run(invocation: &Invocation) -> Result<RunSummary, CliError> {
    let config = Config::load(
        &invocation.config_path,
        invocation.seed_override,
        invocation.out_override.as_deref(),
    )?;
    if let Some(jobs) = invocation.jobs {
        // Ignore AlreadyInitialized: tests run several experiments in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let out = config.out_path()?;
    let hash = config.hash();
    let artifact = match config.experiment()? {
        "simulate" => run_simulate(&config)?,
        "monitor" => run_monitor(&config)?,
        "enforce" => run_enforce(&config)?,
        "coverage" => run_coverage(&config)?,
        "synthesize-shield" => run_synthesize(&config)?,
        other => {
            return Err(CliError::Config(format!(
                "experiment `{other}` (want simulate|monitor|enforce|coverage|synthesize-shield)"
            )))
        }
    };
    let mut text = format!("# config_hash={hash}\n");
    text.push_str(&artifact.body);
    write_atomic(&out, &text)?;
    if let Some(reason) = artifact.infeasible {
        return Err(CliError::Infeasible(reason));
    }
    Ok(RunSummary {
        out_path: out,
        config_hash: hash,
        rows: artifact.rows,
    })
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename into {}: {e}", path.display())))
}

fn steps_of(config: &Config) -> Result<u64, CliError> {
    let steps: u64 = config.parse_typed("steps")?;
    if steps > STEP_BUDGET {
        return Err(CliError::Resource(format!(
            "steps {steps} exceeds the per-run budget {STEP_BUDGET}"
        )));
    }
    Ok(steps)
}

fn simulate_or_config_err(dynamics: &Dynamics, steps: u64, seed: u64) -> Result<Trace, CliError> {
    simulate(dynamics, steps as usize, seed).map_err(|e| CliError::Config(e.to_string()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn run_simulate(config: &Config) -> Result<Artifact, CliError> {
    let dynamics = config.dynamics()?;
    let steps = steps_of(config)?;
    let trace = simulate_or_config_err(&dynamics, steps, config.seed()?)?;
    let mut body = String::from("t,bias,outcome\n");
    for (i, w) in trace.iter().enumerate() {
        body.push_str(&format!("{},{},{}\n", i + 1, fmt(w.bias), w.outcome));
    }
    Ok(Artifact {
        body,
        rows: trace.len() as u64,
        infeasible: None,
    })
}

// ---------------------------------------------------------------------------
// monitor
// ---------------------------------------------------------------------------

enum MonitorKind {
    ExactOutcome,
    Static,
    Markov,
    Hmm,
    Additive,
}

fn monitor_kind(config: &Config) -> Result<MonitorKind, CliError> {
    match config.require("monitor")? {
        "exact-outcome" => Ok(MonitorKind::ExactOutcome),
        "static" => Ok(MonitorKind::Static),
        "markov" => Ok(MonitorKind::Markov),
        "hmm" => Ok(MonitorKind::Hmm),
        "additive" => Ok(MonitorKind::Additive),
        other => Err(CliError::Config(format!(
            "monitor `{other}` (want exact-outcome|static|markov|hmm|additive)"
        ))),
    }
}

/// Resolves the mixing-time bound for hidden-Markov monitoring: explicit
/// `tau` wins, otherwise it is estimated from the kernel.
fn resolve_tau(config: &Config, dynamics: &Dynamics) -> Result<u64, CliError> {
    if let Some(tau) = config.parse_optional::<u64>("tau")? {
        return Ok(tau);
    }
    let markov = dynamics.as_markov().map_err(|_| {
        CliError::Config(
            "hmm monitor requires markov dynamics (mixing-time bound assumption) or an explicit tau"
                .into(),
        )
    })?;
    induced_chain(markov)
        .estimate_mixing_time(MIXING_TOL)
        .map_err(|e| CliError::Config(format!("mixing time estimation failed: {e}")))
}

fn verdict_row(
    body: &mut String,
    t: u64,
    measure: MeasureKind,
    horizon: Horizon,
    mode: Mode,
    interval: &ConfidenceInterval,
    estimate: f64,
) {
    let row = VerdictRow {
        t,
        measure,
        horizon,
        mode,
        lo: interval.lo,
        hi: interval.hi,
        estimate,
    };
    body.push_str(&row.csv_line());
    body.push('\n');
}

fn run_monitor(config: &Config) -> Result<Artifact, CliError> {
    let dynamics = config.dynamics()?;
    let steps = steps_of(config)?;
    let seed = config.seed()?;
    let measure = config.measure()?;
    let horizon = config.horizon()?;
    let mode = config.mode()?;
    let delta = config.delta()?;
    let mut body = format!("{}\n", VerdictRow::CSV_HEADER);
    let mut rows = 0u64;

    match monitor_kind(config)? {
        MonitorKind::ExactOutcome => {
            if measure != MeasureKind::OutcomeFairness || horizon != Horizon::Finite(0) {
                return Err(CliError::Config(
                    "exact-outcome monitor solves outcome fairness at horizon 0 only".into(),
                ));
            }
            let trace = simulate_or_config_err(&dynamics, steps, seed)?;
            let mut monitor = ExactOutcomeMonitor::new();
            for (i, w) in trace.iter().enumerate() {
                let verdict = monitor.step(w.outcome);
                verdict_row(
                    &mut body,
                    i as u64 + 1,
                    measure,
                    horizon,
                    mode,
                    &verdict,
                    monitor.mean(),
                );
                rows += 1;
            }
        }
        MonitorKind::Static => {
            let trace = simulate_or_config_err(&dynamics, steps, seed)?;
            let mut monitor = StaticMonitor::new(measure, horizon, mode, delta)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for (i, w) in trace.iter().enumerate() {
                let verdict = monitor.step(w.outcome);
                verdict_row(
                    &mut body,
                    i as u64 + 1,
                    measure,
                    horizon,
                    mode,
                    &verdict,
                    monitor.mean(),
                );
                rows += 1;
            }
        }
        MonitorKind::Markov => {
            let markov = dynamics.as_markov().map_err(|_| {
                CliError::Config(
                    "markov monitor requires markov dynamics (observed coin labels)".into(),
                )
            })?;
            let Horizon::Finite(h) = horizon else {
                return Err(CliError::Config(
                    "markov monitor supports finite horizons only".into(),
                ));
            };
            if measure == MeasureKind::OutcomeFairness {
                return Err(CliError::Config(
                    "markov monitor tracks current and bias fairness; use exact-outcome for outcome fairness at horizon 0"
                        .into(),
                ));
            }
            let (trace, labels) = simulate_labeled(markov, steps as usize, seed);
            let mut monitor = MarkovMonitor::new(markov.coin_count(), mode, delta)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for (i, (w, &label)) in trace.iter().zip(&labels).enumerate() {
                monitor
                    .step(label, w.outcome)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let verdict = match measure {
                    MeasureKind::CurrentFairness => monitor.current_fairness_interval(h),
                    MeasureKind::BiasFairness => monitor.bias_fairness_interval(h),
                    MeasureKind::OutcomeFairness => unreachable!("rejected above"),
                }
                .map_err(|e| CliError::Resource(e.to_string()))?;
                verdict_row(
                    &mut body,
                    i as u64 + 1,
                    measure,
                    horizon,
                    mode,
                    &verdict,
                    verdict.midpoint(),
                );
                rows += 1;
            }
        }
        MonitorKind::Hmm => {
            if horizon != Horizon::Infinite {
                return Err(CliError::Config(
                    "hmm monitor requires horizon = inf (stationary-limit assumption)".into(),
                ));
            }
            let tau = resolve_tau(config, &dynamics)?;
            let trace = simulate_or_config_err(&dynamics, steps, seed)?;
            let mut monitor = HmmMonitor::head_rate(tau, delta, mode)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for (i, w) in trace.iter().enumerate() {
                let verdict = monitor.step(w.outcome);
                verdict_row(
                    &mut body,
                    i as u64 + 1,
                    measure,
                    horizon,
                    mode,
                    &verdict,
                    monitor.mean(),
                );
                rows += 1;
            }
        }
        MonitorKind::Additive => {
            let Dynamics::Additive { beta0, beta1, .. } = dynamics else {
                return Err(CliError::Config(
                    "additive monitor requires additive dynamics (known change function)".into(),
                ));
            };
            if horizon != Horizon::Finite(0) || measure == MeasureKind::OutcomeFairness {
                return Err(CliError::Config(
                    "additive monitor tracks current and bias fairness at horizon 0".into(),
                ));
            }
            let trace = simulate_or_config_err(&dynamics, steps, seed)?;
            let mut monitor = AdditiveMonitor::new(beta0, beta1, mode, delta)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for (i, w) in trace.iter().enumerate() {
                let verdict = monitor.step(w.outcome);
                let chosen = match measure {
                    MeasureKind::CurrentFairness => verdict.current,
                    MeasureKind::BiasFairness => verdict.bias,
                    MeasureKind::OutcomeFairness => unreachable!("rejected above"),
                };
                verdict_row(
                    &mut body,
                    i as u64 + 1,
                    measure,
                    horizon,
                    mode,
                    &chosen,
                    chosen.midpoint(),
                );
                rows += 1;
            }
        }
    }
    Ok(Artifact {
        body,
        rows,
        infeasible: None,
    })
}

// ---------------------------------------------------------------------------
// enforce
// ---------------------------------------------------------------------------

enum EnforcerKind {
    ConstantBias(ConstantBiasEnforcer),
    Threshold(ThresholdOutcomeEnforcer),
    Delta(DeltaEnforcer),
    Shield(Shield),
    Periodic(PeriodicShield),
}

fn infeasible_or_config(e: EnforceError) -> CliError {
    match e {
        EnforceError::EmptyIntersection
        | EnforceError::BandOutsideSchedule { .. }
        | EnforceError::InfeasibleWindow { .. }
        | EnforceError::InfeasibleState { .. } => CliError::Infeasible(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn constant_bias_of(dynamics: &Dynamics, what: &str) -> Result<f64, CliError> {
    match dynamics {
        Dynamics::Constant { p } => Ok(*p),
        _ => Err(CliError::Config(format!(
            "{what} assumes a known constant coin (set dynamics = constant)"
        ))),
    }
}

fn run_enforce(config: &Config) -> Result<Artifact, CliError> {
    let dynamics = config.dynamics()?;
    let steps = steps_of(config)?;
    let seed = config.seed()?;
    let cost_model = config.cost_model()?;
    let mut enforcer = match config.require("enforcer")? {
        "constant-bias" => {
            if matches!(dynamics, Dynamics::Markov(_)) {
                return Err(CliError::Config(
                    "constant-bias enforcement rewrites biases outside the kernel's coin set; \
                     use constant, additive, or scripted dynamics"
                        .into(),
                ));
            }
            let schedule = config.schedule()?;
            EnforcerKind::ConstantBias(
                ConstantBiasEnforcer::new(&schedule).map_err(infeasible_or_config)?,
            )
        }
        "threshold" => {
            let p: f64 = config.parse_typed("threshold_p")?;
            let schedule = config.schedule()?;
            EnforcerKind::Threshold(
                ThresholdOutcomeEnforcer::new(p, &schedule).map_err(infeasible_or_config)?,
            )
        }
        "delta" => {
            let p = constant_bias_of(&dynamics, "the delta enforcer")?;
            let window: u64 = config.parse_typed("window")?;
            if steps > window {
                return Err(CliError::Config(format!(
                    "delta enforcer window is {window}; steps {steps} would run past it"
                )));
            }
            let table = ReachTable::build(p, window, config.target_interval()?)
                .map_err(infeasible_or_config)?;
            EnforcerKind::Delta(
                DeltaEnforcer::new(table, config.delta()?).map_err(infeasible_or_config)?,
            )
        }
        "shield" | "dynamic-shield" => {
            let window: u64 = config.parse_typed("window")?;
            let shield = dynamic_shield(&dynamics, window, config.target_interval()?, cost_model)
                .map_err(infeasible_or_config)?;
            if !shield.table().is_feasible() {
                return Err(CliError::Infeasible(format!(
                    "no sound enforcer exists for this window (v(0,0) = inf, window {window})"
                )));
            }
            EnforcerKind::Shield(shield)
        }
        "periodic-shield" => {
            let p = constant_bias_of(&dynamics, "the periodic shield")?;
            let window: u64 = config.parse_typed("window")?;
            let policy_raw = config
                .parse_optional::<String>("infeasible")?
                .unwrap_or_else(|| "error".into());
            let policy = match policy_raw.as_str() {
                "error" => InfeasiblePolicy::HardError,
                "best-effort" => InfeasiblePolicy::BestEffort,
                other => {
                    return Err(CliError::Config(format!(
                        "infeasible `{other}` (want error|best-effort)"
                    )))
                }
            };
            EnforcerKind::Periodic(
                PeriodicShield::new(p, window, config.target_interval()?, cost_model, policy)
                    .map_err(infeasible_or_config)?,
            )
        }
        other => {
            return Err(CliError::Config(format!(
                "enforcer `{other}` (want constant-bias|threshold|delta|shield|periodic-shield|dynamic-shield)"
            )))
        }
    };

    let mut body =
        String::from("t,raw_bias,raw_outcome,enf_bias,enf_outcome,step_cost,fairness_after\n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut enforced_history = Trace::new();
    let mut heads = 0u64;
    let mut bias_sum = 0.0;
    for t in 1..=steps {
        let raw = sample_next(&dynamics, &enforced_history, &mut rng)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (pair, step_cost) = match &mut enforcer {
            EnforcerKind::ConstantBias(e) => (e.step(raw, &mut rng), 0.0),
            EnforcerKind::Threshold(e) => {
                let outcome = e.step(raw.outcome);
                let pair = BiasOutcomePair {
                    bias: raw.bias,
                    outcome,
                };
                (pair, cost_model.flip_cost(raw.bias, raw.outcome, outcome))
            }
            EnforcerKind::Delta(e) => {
                let outcome = e.step(raw.outcome).map_err(infeasible_or_config)?;
                let pair = BiasOutcomePair {
                    bias: raw.bias,
                    outcome,
                };
                (pair, cost_model.flip_cost(raw.bias, raw.outcome, outcome))
            }
            EnforcerKind::Shield(e) => {
                let step = e.step(raw).map_err(infeasible_or_config)?;
                (step.pair, step.cost)
            }
            EnforcerKind::Periodic(e) => {
                let step = e.step(raw).map_err(infeasible_or_config)?;
                (step.pair, step.cost)
            }
        };
        enforced_history.push(pair);
        heads += pair.outcome as u64;
        bias_sum += pair.bias;
        // Bias enforcement is judged on average bias, outcome enforcement
        // on the head rate.
        let fairness_after = match enforcer {
            EnforcerKind::ConstantBias(_) => bias_sum / t as f64,
            _ => heads as f64 / t as f64,
        };
        body.push_str(&format!(
            "{t},{},{},{},{},{},{}\n",
            fmt(raw.bias),
            raw.outcome,
            fmt(pair.bias),
            pair.outcome,
            fmt(step_cost),
            fmt(fairness_after),
        ));
    }
    Ok(Artifact {
        body,
        rows: steps,
        infeasible: None,
    })
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

fn run_coverage(config: &Config) -> Result<Artifact, CliError> {
    let dynamics = config.dynamics()?;
    let steps = steps_of(config)?;
    let trials: u64 = config.parse_typed("trials")?;
    if trials.saturating_mul(steps) > STEP_BUDGET {
        return Err(CliError::Resource(format!(
            "trials x steps = {} exceeds the per-run budget {STEP_BUDGET}",
            trials.saturating_mul(steps)
        )));
    }
    let seed = config.seed()?;
    let measure = config.measure()?;
    let horizon = config.horizon()?;
    let mode = config.mode()?;
    let delta = config.delta()?;
    let kind = monitor_kind(config)?;

    let rate = match kind {
        MonitorKind::ExactOutcome => {
            if measure != MeasureKind::OutcomeFairness || horizon != Horizon::Finite(0) {
                return Err(CliError::Config(
                    "exact-outcome coverage is defined for outcome fairness at horizon 0".into(),
                ));
            }
            let dynamics = &dynamics;
            empirical_coverage(trials, seed, move |trial_seed| {
                let trace = simulate(dynamics, steps as usize, trial_seed).expect("simulate");
                let mut monitor = ExactOutcomeMonitor::new();
                let mut heads = 0u64;
                let mut ok = true;
                for (i, w) in trace.iter().enumerate() {
                    let verdict = monitor.step(w.outcome);
                    heads += w.outcome as u64;
                    let truth = heads as f64 / (i + 1) as f64;
                    let covered = verdict.contains(truth);
                    match mode {
                        Mode::Uniform => ok &= covered,
                        Mode::Pointwise => ok = covered,
                    }
                }
                ok
            })
        }
        MonitorKind::Static => {
            let p = constant_bias_of(&dynamics, "static-coin coverage")?;
            let truth = match (measure, horizon) {
                (MeasureKind::BiasFairness | MeasureKind::CurrentFairness, _) => p,
                (MeasureKind::OutcomeFairness, Horizon::Infinite) => p,
                (MeasureKind::OutcomeFairness, Horizon::Finite(_)) => {
                    return Err(CliError::Config(
                        "static coverage for finite-horizon outcome fairness has a trace-dependent truth; \
                         monitor it with `experiment = monitor` instead"
                            .into(),
                    ))
                }
            };
            let dynamics = &dynamics;
            empirical_coverage(trials, seed, move |trial_seed| {
                let trace = simulate(dynamics, steps as usize, trial_seed).expect("simulate");
                let mut monitor = StaticMonitor::new(measure, horizon, mode, delta).expect("delta");
                match mode {
                    Mode::Pointwise => {
                        for w in trace.iter() {
                            monitor.observe(w.outcome);
                        }
                        monitor.current_interval().contains(truth)
                    }
                    Mode::Uniform => trace
                        .iter()
                        .all(|w| monitor.step(w.outcome).contains(truth)),
                }
            })
        }
        MonitorKind::Markov => {
            let markov = dynamics
                .as_markov()
                .map_err(|_| CliError::Config("markov coverage requires markov dynamics".into()))?;
            let Horizon::Finite(h) = horizon else {
                return Err(CliError::Config(
                    "markov coverage needs a finite horizon".into(),
                ));
            };
            if mode == Mode::Uniform {
                return Err(CliError::Config(
                    "markov coverage is pointwise: the finite-horizon truth changes every step"
                        .into(),
                ));
            }
            if measure == MeasureKind::OutcomeFairness {
                return Err(CliError::Config(
                    "markov coverage tracks current and bias fairness".into(),
                ));
            }
            let wrapped = Dynamics::Markov(markov.clone());
            let n = markov.coin_count();
            let markov = markov.clone();
            empirical_coverage(trials, seed, move |trial_seed| {
                let (trace, labels) = simulate_labeled(&markov, steps as usize, trial_seed);
                let mut monitor = MarkovMonitor::new(n, mode, delta).expect("caps");
                for (w, &label) in trace.iter().zip(&labels) {
                    monitor.step(label, w.outcome).expect("alphabet");
                }
                let verdict = match measure {
                    MeasureKind::CurrentFairness => monitor.current_fairness_interval(h),
                    MeasureKind::BiasFairness => monitor.bias_fairness_interval(h),
                    MeasureKind::OutcomeFairness => unreachable!(),
                }
                .expect("horizon cap");
                let truth = exact_runtime_fairness(&wrapped, &trace, h, measure).expect("oracle");
                verdict.contains(truth)
            })
        }
        MonitorKind::Hmm => {
            if horizon != Horizon::Infinite {
                return Err(CliError::Config(
                    "hmm coverage requires horizon = inf (stationary-limit assumption)".into(),
                ));
            }
            let markov = dynamics
                .as_markov()
                .map_err(|_| CliError::Config("hmm coverage requires markov dynamics".into()))?;
            let chain = induced_chain(markov);
            let marginal = chain
                .stationary_coin_marginal()
                .map_err(|e| CliError::Config(format!("stationary distribution: {e}")))?;
            let truth: f64 = marginal
                .iter()
                .zip(markov.biases())
                .map(|(w, p)| w * p)
                .sum();
            let tau = resolve_tau(config, &dynamics)?;
            let dynamics = &dynamics;
            empirical_coverage(trials, seed, move |trial_seed| {
                let trace = simulate(dynamics, steps as usize, trial_seed).expect("simulate");
                let mut monitor = HmmMonitor::head_rate(tau, delta, mode).expect("delta");
                match mode {
                    Mode::Pointwise => {
                        for w in trace.iter() {
                            monitor.observe(w.outcome);
                        }
                        monitor.current_interval().contains(truth)
                    }
                    Mode::Uniform => trace
                        .iter()
                        .all(|w| monitor.step(w.outcome).contains(truth)),
                }
            })
        }
        MonitorKind::Additive => {
            let Dynamics::Additive { beta0, beta1, .. } = dynamics else {
                return Err(CliError::Config(
                    "additive coverage requires additive dynamics".into(),
                ));
            };
            if horizon != Horizon::Finite(0) || measure == MeasureKind::OutcomeFairness {
                return Err(CliError::Config(
                    "additive coverage tracks current and bias fairness at horizon 0".into(),
                ));
            }
            let dynamics = &dynamics;
            empirical_coverage(trials, seed, move |trial_seed| {
                let trace = simulate(dynamics, steps as usize, trial_seed).expect("simulate");
                let mut monitor = AdditiveMonitor::new(beta0, beta1, mode, delta).expect("delta");
                let mut bias_sum = 0.0;
                let mut ok = true;
                for (i, w) in trace.iter().enumerate() {
                    let verdict = monitor.step(w.outcome);
                    bias_sum += w.bias;
                    let truth = match measure {
                        MeasureKind::CurrentFairness => w.bias,
                        MeasureKind::BiasFairness => bias_sum / (i + 1) as f64,
                        MeasureKind::OutcomeFairness => unreachable!(),
                    };
                    let chosen = match measure {
                        MeasureKind::CurrentFairness => verdict.current,
                        MeasureKind::BiasFairness => verdict.bias,
                        MeasureKind::OutcomeFairness => unreachable!(),
                    };
                    match mode {
                        Mode::Uniform => ok &= chosen.contains(truth),
                        Mode::Pointwise => ok = chosen.contains(truth),
                    }
                }
                ok
            })
        }
    };

    let hits = (rate * trials as f64).round() as u64;
    let margin = three_sigma_margin(1.0 - delta, trials);
    let mut body = String::from("config_hash,trials,hits,rate,margin\n");
    body.push_str(&format!(
        "{},{trials},{hits},{},{}\n",
        config.hash(),
        fmt(rate),
        fmt(margin),
    ));
    Ok(Artifact {
        body,
        rows: 1,
        infeasible: None,
    })
}

// ---------------------------------------------------------------------------
// synthesize-shield
// ---------------------------------------------------------------------------

fn run_synthesize(config: &Config) -> Result<Artifact, CliError> {
    let dynamics = config.dynamics()?;
    let window: u64 = config.parse_typed("window")?;
    let interval = config.target_interval()?;
    let cost = config.cost_model()?;
    let shield = dynamic_shield(&dynamics, window, interval, cost).map_err(infeasible_or_config)?;
    let table = shield.table();
    let rows = (window + 1) * (window + 2) / 2;
    let infeasible = (!table.is_feasible()).then(|| {
        format!("no sound enforcer exists: v(0,0) = inf for window {window} (table written)")
    });
    Ok(Artifact {
        body: table.to_csv(),
        rows,
        infeasible,
    })
}
