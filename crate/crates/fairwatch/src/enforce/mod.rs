//! Enforcers (shields): interventions that keep fairness inside target
//! intervals.
//!
//! Two process-agnostic enforcers need almost no assumptions: a constant
//! bias overwrite for bias fairness and a threshold rule for outcome
//! fairness. Under a known coin, finite- and periodic-window enforcement of
//! outcome fairness becomes a planning problem: [`ReachTable`] backs the
//! probabilistic δ-enforcer, and [`ValueTable`] backs cost-optimal shields
//! synthesized by dynamic programming over (tosses seen, heads seen).
//! Count-determined dynamics (e.g. additive drift) reuse the same DP
//! through [`dynamic_shield`].
//!
//! Outcome enforcers never modify biases; the bias enforcer never touches
//! outcomes beyond redrawing them under the overwritten bias.

mod agnostic;
mod reach;
mod shield;
mod value;

pub use agnostic::{ConstantBiasEnforcer, ThresholdOutcomeEnforcer};
pub use reach::{DeltaEnforcer, ReachTable};
pub use shield::{dynamic_shield, InfeasiblePolicy, PeriodicShield, Shield, ShieldStep};
pub use value::{
    synthesize_value_table, synthesize_value_table_counts, BiasMap, TargetSpec, ValueTable,
};

use std::fmt;

/// Errors from enforcer construction and stepping.
#[derive(Debug, Clone, PartialEq)]
pub enum EnforceError {
    /// The target schedule has an empty intersection (bias enforcement).
    EmptyIntersection,
    /// The `±1/t` band around `p` escapes the target at time `t`.
    BandOutsideSchedule { t: u64 },
    /// δ must lie strictly inside (0,1).
    InvalidDelta(f64),
    /// Window length must be positive.
    EmptyWindow,
    /// A finite-window enforcer was stepped past its window.
    WindowOver { t: u64, window: u64 },
    /// Both continuations have infinite cost.
    InfeasibleState { t: u64, h: u64 },
    /// A periodic window has no achievable head-count target.
    InfeasibleWindow { index: u64 },
    /// The dynamics cannot be collapsed onto (t, h) states.
    UnsupportedDynamics(&'static str),
    /// A serialized value table failed to parse.
    BadTableFormat(String),
}

impl fmt::Display for EnforceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyIntersection => {
                write!(f, "target intervals have empty intersection")
            }
            Self::BandOutsideSchedule { t } => {
                write!(
                    f,
                    "threshold band [p-1/t, p+1/t] escapes the target at t = {t}"
                )
            }
            Self::InvalidDelta(d) => write!(f, "delta {d} outside (0,1)"),
            Self::EmptyWindow => write!(f, "window length must be at least 1"),
            Self::WindowOver { t, window } => {
                write!(f, "step {t} past the enforcement window {window}")
            }
            Self::InfeasibleState { t, h } => {
                write!(f, "no finite-cost continuation from (t={t}, h={h})")
            }
            Self::InfeasibleWindow { index } => {
                write!(
                    f,
                    "periodic window {index} has no achievable head-count target"
                )
            }
            Self::UnsupportedDynamics(what) => {
                write!(f, "dynamics not count-determined: {what}")
            }
            Self::BadTableFormat(msg) => write!(f, "bad value-table file: {msg}"),
        }
    }
}

impl std::error::Error for EnforceError {}

/// Intervention cost `c(bias, original outcome, enforced outcome)`.
///
/// Non-intervention is always free. The bias-weighted model charges the
/// probability of the outcome being overwritten: flipping a likely head is
/// a heavier intervention than flipping an unlikely one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    /// Every flip costs 1.
    Unit,
    /// Flipping heads costs `p`, flipping tails costs `1-p`.
    BiasWeighted,
}

impl CostModel {
    pub fn flip_cost(&self, bias: f64, from: u8, to: u8) -> f64 {
        if from == to {
            return 0.0;
        }
        match self {
            Self::Unit => 1.0,
            Self::BiasWeighted => {
                if from == 1 {
                    bias
                } else {
                    1.0 - bias
                }
            }
        }
    }

    pub fn descriptor(&self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::BiasWeighted => "bias-weighted",
        }
    }

    pub fn from_descriptor(s: &str) -> Option<Self> {
        match s {
            "unit" => Some(Self::Unit),
            "bias-weighted" => Some(Self::BiasWeighted),
            _ => None,
        }
    }
}

/// `h/t ∈ I`, evaluated in double precision like every other ratio test in
/// the crate.
pub(crate) fn heads_ratio_in(interval: &crate::fairness::UnitInterval, h: u64, t: u64) -> bool {
    interval.contains(h as f64 / t as f64)
}

/// Probability-weighted cost that treats zero-probability branches as free
/// even when their continuation is infeasible.
pub(crate) fn weight(p: f64, v: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_intervention_is_free() {
        for model in [CostModel::Unit, CostModel::BiasWeighted] {
            for x in 0..2u8 {
                assert_eq!(model.flip_cost(0.7, x, x), 0.0);
            }
        }
    }

    #[test]
    fn bias_weighted_charges_the_overwritten_mass() {
        let c = CostModel::BiasWeighted;
        assert_eq!(c.flip_cost(0.7, 1, 0), 0.7);
        assert!((c.flip_cost(0.7, 0, 1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_branches_are_free() {
        assert_eq!(weight(0.0, f64::INFINITY), 0.0);
        assert_eq!(weight(0.5, f64::INFINITY), f64::INFINITY);
        assert_eq!(weight(0.5, 3.0), 1.5);
    }
}
