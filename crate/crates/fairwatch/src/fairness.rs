//! Coin/outcome domain and the three fairness measures over finite prefixes.
//!
//! A run of the system is a sequence of bias-outcome pairs `(p_t, x_t)`:
//! `p_t ∈ [0,1]` is the head-probability of the coin tossed at step `t`
//! and `x_t ∈ {0,1}` the toss outcome (1 = heads). Fairness of a prefix
//! is measured three ways:
//!
//! - outcome fairness: `(1/t)·Σ x_i`, the running head rate;
//! - bias fairness: `(1/t)·Σ p_i`, the running average bias;
//! - current fairness: `p_t`, the bias of the most recent coin.
//!
//! All three are undefined on the empty prefix and return a domain error.

use std::fmt;

/// Errors from domain validation and measure evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum FairnessError {
    /// A fairness measure was evaluated on an empty prefix.
    EmptyPrefix,
    /// A bias value fell outside `[0,1]`.
    InvalidBias(f64),
    /// An outcome was neither 0 nor 1.
    InvalidOutcome(u8),
    /// Interval bounds were not `0 ≤ lo ≤ hi ≤ 1`.
    InvalidInterval { lo: f64, hi: f64 },
}

impl fmt::Display for FairnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyPrefix => write!(f, "fairness measure undefined on empty prefix"),
            Self::InvalidBias(p) => write!(f, "bias {p} outside [0,1]"),
            Self::InvalidOutcome(x) => write!(f, "outcome {x} not in {{0,1}}"),
            Self::InvalidInterval { lo, hi } => {
                write!(
                    f,
                    "interval [{lo}, {hi}] is not a closed subinterval of [0,1]"
                )
            }
        }
    }
}

impl std::error::Error for FairnessError {}

/// One bias-outcome pair `(p_t, x_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasOutcomePair {
    /// Head-probability of the coin, in `[0,1]`.
    pub bias: f64,
    /// Toss outcome: 0 = tails, 1 = heads.
    pub outcome: u8,
}

impl BiasOutcomePair {
    /// Validates `0 ≤ bias ≤ 1` and `outcome ∈ {0,1}`.
    pub fn new(bias: f64, outcome: u8) -> Result<Self, FairnessError> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(FairnessError::InvalidBias(bias));
        }
        if outcome > 1 {
            return Err(FairnessError::InvalidOutcome(outcome));
        }
        Ok(Self { bias, outcome })
    }

    pub fn is_heads(&self) -> bool {
        self.outcome == 1
    }
}

/// A realized process history: an ordered finite sequence of bias-outcome pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pairs: Vec<BiasOutcomePair>,
}

impl Trace {
    pub fn new() -> Self {
        Self { pairs: Vec::new() }
    }

    pub fn from_pairs(pairs: Vec<BiasOutcomePair>) -> Self {
        Self { pairs }
    }

    pub fn push(&mut self, pair: BiasOutcomePair) {
        self.pairs.push(pair);
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[BiasOutcomePair] {
        &self.pairs
    }

    /// Prefix of length `m`; defined for every `0 ≤ m ≤ len`.
    pub fn prefix(&self, m: usize) -> &[BiasOutcomePair] {
        &self.pairs[..m]
    }

    pub fn last(&self) -> Option<&BiasOutcomePair> {
        self.pairs.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BiasOutcomePair> {
        self.pairs.iter()
    }
}

/// Which fairness measure a monitor or enforcer targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Running average of toss outcomes.
    OutcomeFairness,
    /// Running average of coin biases.
    BiasFairness,
    /// Bias of the most recent coin.
    CurrentFairness,
}

impl MeasureKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::OutcomeFairness => "outcome",
            Self::BiasFairness => "bias",
            Self::CurrentFairness => "current",
        }
    }
}

/// Outcome fairness of a prefix: `(1/t)·Σ x_i`.
pub fn outcome_fairness(prefix: &[BiasOutcomePair]) -> Result<f64, FairnessError> {
    if prefix.is_empty() {
        return Err(FairnessError::EmptyPrefix);
    }
    let heads: u64 = prefix.iter().map(|w| w.outcome as u64).sum();
    Ok(heads as f64 / prefix.len() as f64)
}

/// Bias fairness of a prefix: `(1/t)·Σ p_i`.
pub fn bias_fairness(prefix: &[BiasOutcomePair]) -> Result<f64, FairnessError> {
    if prefix.is_empty() {
        return Err(FairnessError::EmptyPrefix);
    }
    let sum: f64 = prefix.iter().map(|w| w.bias).sum();
    Ok(sum / prefix.len() as f64)
}

/// Current fairness of a prefix: the bias of its last pair.
pub fn current_fairness(prefix: &[BiasOutcomePair]) -> Result<f64, FairnessError> {
    prefix
        .last()
        .map(|w| w.bias)
        .ok_or(FairnessError::EmptyPrefix)
}

/// Evaluates the given measure on a prefix.
pub fn evaluate_measure(
    measure: MeasureKind,
    prefix: &[BiasOutcomePair],
) -> Result<f64, FairnessError> {
    match measure {
        MeasureKind::OutcomeFairness => outcome_fairness(prefix),
        MeasureKind::BiasFairness => bias_fairness(prefix),
        MeasureKind::CurrentFairness => current_fairness(prefix),
    }
}

/// A closed subinterval of `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitInterval {
    lo: f64,
    hi: f64,
}

impl UnitInterval {
    pub const FULL: UnitInterval = UnitInterval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, FairnessError> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(FairnessError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Intersection, or `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &UnitInterval) -> Option<UnitInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(UnitInterval { lo, hi })
    }

    pub fn is_full(&self) -> bool {
        self.lo == 0.0 && self.hi == 1.0
    }
}

/// Target intervals `I = (I_t)`: a handful of per-time overrides over the
/// trivial default `[0,1]`.
#[derive(Debug, Clone, Default)]
pub struct TargetIntervalSchedule {
    overrides: std::collections::BTreeMap<u64, UnitInterval>,
}

impl TargetIntervalSchedule {
    /// The trivial schedule `I_t = [0,1]` for all `t`.
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn with_override(mut self, t: u64, interval: UnitInterval) -> Self {
        self.overrides.insert(t, interval);
        self
    }

    pub fn set_override(&mut self, t: u64, interval: UnitInterval) {
        self.overrides.insert(t, interval);
    }

    /// The target at time `t`; unlisted times yield `[0,1]`.
    pub fn at(&self, t: u64) -> UnitInterval {
        self.overrides
            .get(&t)
            .copied()
            .unwrap_or(UnitInterval::FULL)
    }

    pub fn overrides(&self) -> impl Iterator<Item = (u64, UnitInterval)> + '_ {
        self.overrides.iter().map(|(t, i)| (*t, *i))
    }

    /// `∩_t I_t`, or `None` when the schedule is infeasible for bias
    /// enforcement.
    pub fn intersection(&self) -> Option<UnitInterval> {
        let mut acc = UnitInterval::FULL;
        for interval in self.overrides.values() {
            acc = acc.intersect(interval)?;
        }
        Some(acc)
    }
}
