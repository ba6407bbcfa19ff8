//! Runtime fairness monitoring and enforcement over biased coin tosses.
//!
//! A process tosses one coin per step; the coin's bias may evolve with the
//! history. This crate provides:
//!
//! - [`fairness`]: the bias-outcome domain and the three fairness measures
//!   (outcome, bias, current) over finite prefixes;
//! - [`sim`]: dynamics classes (constant, Markov, additive, scripted) and
//!   seeded, bitwise-reproducible trace simulation;
//! - [`chain`]: the Markov chain induced by labelled dynamics, with
//!   stationary distributions and mixing-time estimates;
//! - [`monitor`]: sound monitors that emit confidence intervals for
//!   fairness at a chosen horizon, pointwise or uniformly valid;
//! - [`enforce`]: enforcers (shields) that overwrite biases or outcomes to
//!   keep fairness inside target intervals, including cost-optimal
//!   finite-window shields synthesized by dynamic programming;
//! - [`oracle`]: independent brute-force references used to validate every
//!   guarantee at small scale, plus a seeded Monte Carlo coverage harness.

pub mod chain;
pub mod enforce;
pub mod fairness;
pub mod monitor;
pub mod oracle;
pub mod sim;

pub use chain::{induced_chain, ChainState, InducedChain, MIXING_TOL};
pub use enforce::{
    dynamic_shield, synthesize_value_table, synthesize_value_table_counts, BiasMap,
    ConstantBiasEnforcer, CostModel, DeltaEnforcer, EnforceError, InfeasiblePolicy, PeriodicShield,
    ReachTable, Shield, ShieldStep, TargetSpec, ThresholdOutcomeEnforcer, ValueTable,
};
pub use fairness::{
    bias_fairness, current_fairness, evaluate_measure, outcome_fairness, BiasOutcomePair,
    FairnessError, MeasureKind, TargetIntervalSchedule, Trace, UnitInterval,
};
pub use monitor::{
    hoeffding_pointwise_eps, stitched_uniform_eps, AdditiveMonitor, AdditiveVerdict,
    ConfidenceInterval, ExactOutcomeMonitor, HmmMonitor, Horizon, MarkovMonitor, MarkovVerdict,
    Mode, MonitorError, StaticMonitor, VerdictRow,
};
pub use oracle::{
    empirical_coverage, enumerate_optimal_cost, enumerate_reach_probability,
    exact_runtime_fairness, three_sigma_margin, OracleError,
};
pub use sim::{sample_next, simulate, simulate_labeled, Dynamics, MarkovDynamics, SimError};
