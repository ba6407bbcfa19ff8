//! Brute-force reference implementations for tests and acceptance checks.
//!
//! Everything here is deliberately simple and exponential-time at small
//! scale, with hard instance caps instead of silent slowness. The oracles
//! share no code with the production DP and monitor paths: reach
//! probabilities are summed over explicit suffixes rather than tabulated
//! backward, optimal costs are minimized over the full binary history tree
//! rather than (t, h) states, and runtime fairness is an explicit
//! enumeration of continuations.

use std::fmt;

use rayon::prelude::*;

use crate::enforce::CostModel;
use crate::fairness::{BiasOutcomePair, MeasureKind, Trace, UnitInterval};
use crate::sim::Dynamics;

/// Hard caps that keep the exponential oracles honest about their size.
pub const MAX_REACH_SUFFIX: u64 = 24;
pub const MAX_OPTIMAL_WINDOW: u64 = 12;
pub const MAX_FAIRNESS_HORIZON: u64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    SuffixTooLong { len: u64, max: u64 },
    WindowTooLong { len: u64, max: u64 },
    HorizonTooLong { h: u64, max: u64 },
    EmptyPrefix,
    UnsupportedDynamics(&'static str),
    InconsistentPrefix(f64),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SuffixTooLong { len, max } => {
                write!(f, "suffix of {len} tosses exceeds enumeration cap {max}")
            }
            Self::WindowTooLong { len, max } => {
                write!(f, "window {len} exceeds full-tree cap {max}")
            }
            Self::HorizonTooLong { h, max } => {
                write!(f, "horizon {h} exceeds enumeration cap {max}")
            }
            Self::EmptyPrefix => write!(f, "conditioning prefix must be non-empty"),
            Self::UnsupportedDynamics(what) => write!(f, "unsupported dynamics: {what}"),
            Self::InconsistentPrefix(p) => {
                write!(f, "prefix bias {p} inconsistent with the dynamics")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Probability that an unenforced coin of bias `p` has its head rate in
/// `interval` at time `T`, given `t` tosses with `h` heads, by summing all
/// `2^(T-t)` suffixes with their Bernoulli weights.
pub fn enumerate_reach_probability(
    p: f64,
    window: u64,
    interval: UnitInterval,
    t: u64,
    h: u64,
) -> Result<f64, OracleError> {
    let suffix = window - t;
    if suffix > MAX_REACH_SUFFIX {
        return Err(OracleError::SuffixTooLong {
            len: suffix,
            max: MAX_REACH_SUFFIX,
        });
    }
    let mut total = 0.0;
    for mask in 0u64..(1u64 << suffix) {
        let extra = mask.count_ones() as u64;
        let heads = h + extra;
        let tails = suffix - extra;
        // h/T in I, evaluated independently of the DP path.
        let rate = heads as f64 / window as f64;
        if rate >= interval.lo() && rate <= interval.hi() {
            let mut weight = 1.0;
            for _ in 0..extra {
                weight *= p;
            }
            for _ in 0..tails {
                weight *= 1.0 - p;
            }
            total += weight;
        }
    }
    Ok(total)
}

/// Exact optimum of expected enforcement cost over all deterministic
/// outcome-enforcement policies, by backward induction over the full
/// binary history tree — no (t, h) collapse. The bias may depend on the
/// entire enforced outcome history.
pub fn enumerate_optimal_cost(
    bias_of: &dyn Fn(&[u8]) -> f64,
    window: u64,
    interval: UnitInterval,
    cost: CostModel,
) -> Result<f64, OracleError> {
    if window > MAX_OPTIMAL_WINDOW {
        return Err(OracleError::WindowTooLong {
            len: window,
            max: MAX_OPTIMAL_WINDOW,
        });
    }
    let mut history = Vec::with_capacity(window as usize);
    Ok(full_tree_cost(
        bias_of,
        window,
        &interval,
        cost,
        &mut history,
    ))
}

fn full_tree_cost(
    bias_of: &dyn Fn(&[u8]) -> f64,
    window: u64,
    interval: &UnitInterval,
    cost: CostModel,
    history: &mut Vec<u8>,
) -> f64 {
    if history.len() as u64 == window {
        let heads = history.iter().map(|&x| x as u64).sum::<u64>();
        let rate = heads as f64 / window as f64;
        return if rate >= interval.lo() && rate <= interval.hi() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let p = bias_of(history);
    history.push(0);
    let after_tails = full_tree_cost(bias_of, window, interval, cost, history);
    history.pop();
    history.push(1);
    let after_heads = full_tree_cost(bias_of, window, interval, cost, history);
    history.pop();

    let on_heads = after_heads.min(cost.flip_cost(p, 1, 0) + after_tails);
    let on_tails = after_tails.min(cost.flip_cost(p, 0, 1) + after_heads);
    let heads_part = if p == 0.0 { 0.0 } else { p * on_heads };
    let tails_part = if p == 1.0 { 0.0 } else { (1.0 - p) * on_tails };
    heads_part + tails_part
}

/// Exact runtime fairness `ρ_t^h = E(φ(W_{1:t+h}) | w_{1:t})` by
/// enumerating every (coin, outcome) continuation of length `h` with its
/// probability. Supports finite-support dynamics: constant, Markov, and
/// additive.
pub fn exact_runtime_fairness(
    dynamics: &Dynamics,
    prefix: &Trace,
    h: u64,
    measure: MeasureKind,
) -> Result<f64, OracleError> {
    if prefix.is_empty() {
        return Err(OracleError::EmptyPrefix);
    }
    if h > MAX_FAIRNESS_HORIZON {
        return Err(OracleError::HorizonTooLong {
            h,
            max: MAX_FAIRNESS_HORIZON,
        });
    }
    let bias_sum: f64 = prefix.iter().map(|w| w.bias).sum();
    let head_sum: u64 = prefix.iter().map(|w| w.outcome as u64).sum();
    let last = *prefix.last().expect("non-empty");
    let total_len = prefix.len() as u64 + h;
    let ctx = FairnessCtx {
        dynamics,
        measure,
        total_len,
    };
    ctx.check_supported()?;
    ctx.expect(last, h, bias_sum, head_sum as f64)
}

struct FairnessCtx<'a> {
    dynamics: &'a Dynamics,
    measure: MeasureKind,
    total_len: u64,
}

impl FairnessCtx<'_> {
    fn check_supported(&self) -> Result<(), OracleError> {
        match self.dynamics {
            Dynamics::Scripted { .. } => Err(OracleError::UnsupportedDynamics("scripted biases")),
            _ => Ok(()),
        }
    }

    /// Possible next biases and their probabilities given the last pair.
    fn next_biases(&self, last: BiasOutcomePair) -> Result<Vec<(f64, f64)>, OracleError> {
        match self.dynamics {
            Dynamics::Constant { p } => Ok(vec![(*p, 1.0)]),
            Dynamics::Additive { beta0, beta1, .. } => {
                let step = if last.is_heads() { *beta1 } else { *beta0 };
                Ok(vec![((last.bias + step).clamp(0.0, 1.0), 1.0)])
            }
            Dynamics::Markov(mk) => {
                let label = mk
                    .label_of(last.bias)
                    .map_err(|_| OracleError::InconsistentPrefix(last.bias))?;
                let row = mk.row(label, last.outcome);
                Ok(row
                    .iter()
                    .enumerate()
                    .filter(|(_, &q)| q > 0.0)
                    .map(|(k, &q)| (mk.biases()[k], q))
                    .collect())
            }
            Dynamics::Scripted { .. } => unreachable!("rejected in check_supported"),
        }
    }

    fn expect(
        &self,
        last: BiasOutcomePair,
        remaining: u64,
        bias_sum: f64,
        head_sum: f64,
    ) -> Result<f64, OracleError> {
        if remaining == 0 {
            let t = self.total_len as f64;
            return Ok(match self.measure {
                MeasureKind::OutcomeFairness => head_sum / t,
                MeasureKind::BiasFairness => bias_sum / t,
                MeasureKind::CurrentFairness => last.bias,
            });
        }
        let mut acc = 0.0;
        for (bias, q) in self.next_biases(last)? {
            for outcome in 0..2u8 {
                let weight = q * if outcome == 1 { bias } else { 1.0 - bias };
                if weight == 0.0 {
                    continue;
                }
                let next = BiasOutcomePair { bias, outcome };
                let value = self.expect(
                    next,
                    remaining - 1,
                    bias_sum + bias,
                    head_sum + outcome as f64,
                )?;
                acc += weight * value;
            }
        }
        Ok(acc)
    }
}

/// Fraction of seeded trials whose verdict covered the truth.
///
/// The trial closure receives `base_seed + trial_index` and reports
/// coverage for that trial; trials run in parallel and the aggregate is
/// order-independent, so the result is deterministic for a fixed seed.
pub fn empirical_coverage<F>(trials: u64, base_seed: u64, trial: F) -> f64
where
    F: Fn(u64) -> bool + Sync,
{
    let hits = (0..trials)
        .into_par_iter()
        .filter(|i| trial(base_seed + i))
        .count();
    hits as f64 / trials as f64
}

/// Three-sigma binomial margin for an empirical rate near `rate` over
/// `trials` trials.
pub fn three_sigma_margin(rate: f64, trials: u64) -> f64 {
    3.0 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::outcome_fairness;
    use crate::monitor::ExactOutcomeMonitor;
    use crate::sim::simulate;

    fn interval(lo: f64, hi: f64) -> UnitInterval {
        UnitInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn reach_enumeration_examples() {
        let p = enumerate_reach_probability(0.5, 2, interval(0.5, 1.0), 0, 0).unwrap();
        assert!((p - 0.75).abs() < 1e-15);

        let certain = enumerate_reach_probability(0.3, 10, interval(0.0, 1.0), 4, 1).unwrap();
        assert!((certain - 1.0).abs() < 1e-12);

        let impossible = enumerate_reach_probability(0.0, 6, interval(1.0, 1.0), 0, 0).unwrap();
        assert_eq!(impossible, 0.0);

        assert!(matches!(
            enumerate_reach_probability(0.5, 40, interval(0.0, 1.0), 0, 0),
            Err(OracleError::SuffixTooLong { .. })
        ));
    }

    #[test]
    fn optimal_cost_examples() {
        let c = enumerate_optimal_cost(&|_| 0.5, 2, interval(0.5, 1.0), CostModel::Unit).unwrap();
        assert!((c - 0.25).abs() < 1e-15);

        let free =
            enumerate_optimal_cost(&|_| 0.3, 8, interval(0.0, 1.0), CostModel::Unit).unwrap();
        assert_eq!(free, 0.0);

        // No integer head count lands in the target: infeasible.
        let stuck =
            enumerate_optimal_cost(&|_| 0.5, 10, interval(0.41, 0.449), CostModel::Unit).unwrap();
        assert_eq!(stuck, f64::INFINITY);

        assert!(matches!(
            enumerate_optimal_cost(&|_| 0.5, 13, interval(0.0, 1.0), CostModel::Unit),
            Err(OracleError::WindowTooLong { .. })
        ));
    }

    #[test]
    fn constant_bias_fairness_is_the_bias() {
        let dynamics = Dynamics::constant(0.37).unwrap();
        let prefix = simulate(&dynamics, 5, 3).unwrap();
        for h in [0u64, 1, 4, 8] {
            let v =
                exact_runtime_fairness(&dynamics, &prefix, h, MeasureKind::BiasFairness).unwrap();
            assert!((v - 0.37).abs() < 1e-12, "h = {h}");
            let c = exact_runtime_fairness(&dynamics, &prefix, h, MeasureKind::CurrentFairness)
                .unwrap();
            assert!((c - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn one_step_outcome_expectation() {
        let dynamics = Dynamics::constant(0.5).unwrap();
        let mut prefix = Trace::new();
        for outcome in [1u8, 1, 0] {
            prefix.push(BiasOutcomePair { bias: 0.5, outcome });
        }
        let v =
            exact_runtime_fairness(&dynamics, &prefix, 1, MeasureKind::OutcomeFairness).unwrap();
        assert!((v - 0.625).abs() < 1e-15);
    }

    #[test]
    fn zero_horizon_equals_direct_measure() {
        let dynamics = Dynamics::additive(0.6, -0.04, 0.03).unwrap();
        let prefix = simulate(&dynamics, 12, 5).unwrap();
        let v =
            exact_runtime_fairness(&dynamics, &prefix, 0, MeasureKind::OutcomeFairness).unwrap();
        assert_eq!(v, outcome_fairness(prefix.pairs()).unwrap());
    }

    #[test]
    fn unsupported_and_degenerate_inputs() {
        let scripted = Dynamics::scripted(vec![0.5; 4]).unwrap();
        let prefix = simulate(&scripted, 2, 0).unwrap();
        assert!(matches!(
            exact_runtime_fairness(&scripted, &prefix, 1, MeasureKind::BiasFairness),
            Err(OracleError::UnsupportedDynamics(_))
        ));
        let constant = Dynamics::constant(0.5).unwrap();
        assert!(matches!(
            exact_runtime_fairness(&constant, &Trace::new(), 1, MeasureKind::BiasFairness),
            Err(OracleError::EmptyPrefix)
        ));
        assert!(matches!(
            exact_runtime_fairness(&constant, &prefix, 9, MeasureKind::BiasFairness),
            Err(OracleError::HorizonTooLong { .. })
        ));
    }

    #[test]
    fn exact_monitor_always_covers() {
        let dynamics = Dynamics::constant(0.4).unwrap();
        let rate = empirical_coverage(200, 17, |seed| {
            let trace = simulate(&dynamics, 50, seed).unwrap();
            let mut monitor = ExactOutcomeMonitor::new();
            let mut verdict = None;
            for w in trace.iter() {
                verdict = Some(monitor.step(w.outcome));
            }
            let truth = outcome_fairness(trace.pairs()).unwrap();
            verdict.unwrap().contains(truth)
        });
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn coverage_is_deterministic_for_fixed_seed() {
        let dynamics = Dynamics::constant(0.5).unwrap();
        let run = || {
            empirical_coverage(64, 5, |seed| {
                let trace = simulate(&dynamics, 20, seed).unwrap();
                outcome_fairness(trace.pairs()).unwrap() >= 0.5
            })
        };
        assert_eq!(run(), run());
    }
}
