//! Monitors: confidence intervals for fairness quantities at runtime.
//!
//! Every monitor is a sequential state machine fed one observation per time
//! step. Its verdict is a [`ConfidenceInterval`] that contains the true
//! runtime fairness value with probability at least `1-δ`, either at each
//! fixed time (pointwise) or simultaneously at all times (uniform). Four
//! monitor families cover four dynamics assumptions:
//!
//! - [`StaticMonitor`]: one unknown constant coin, any measure and horizon;
//! - [`MarkovMonitor`]: observed finite Markov dynamics, finite horizons;
//! - [`HmmMonitor`]: hidden Markov dynamics at infinite horizon, using a
//!   mixing-time bound;
//! - [`AdditiveMonitor`]: known additive drift with unknown starting bias.
//!
//! [`ExactOutcomeMonitor`] is the degenerate base case: outcome fairness at
//! horizon zero is observable, so its interval is a point.

mod additive;
mod bounds;
mod hmm;
mod markov;
mod static_coin;

pub use additive::{AdditiveMonitor, AdditiveVerdict};
pub use bounds::{hoeffding_pointwise_eps, stitched_uniform_eps, BoundError};
pub use hmm::HmmMonitor;
pub use markov::{
    MarkovMonitor, MarkovVerdict, TransitionInterval, MAX_EXPRESSION_HORIZON, MAX_MONITOR_COINS,
};
pub use static_coin::{ExactOutcomeMonitor, StaticMonitor};

use std::fmt;

use crate::fairness::MeasureKind;

/// Soundness flavour a verdict was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Valid at each fixed time with probability ≥ 1-δ.
    Pointwise,
    /// Valid at all times simultaneously with probability ≥ 1-δ.
    Uniform,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Pointwise => "pointwise",
            Self::Uniform => "uniform",
        }
    }
}

/// Prediction horizon `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(h) => write!(f, "{h}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

/// A closed subinterval of `[0,1]` carrying the error budget and soundness
/// mode it was produced under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub delta: f64,
    pub mode: Mode,
}

impl ConfidenceInterval {
    /// `[center - eps, center + eps]` clamped to `[0,1]`. Clamping never
    /// loses soundness: the monitored quantities live in `[0,1]`.
    pub fn around(center: f64, eps: f64, delta: f64, mode: Mode) -> Self {
        Self::from_bounds(center - eps, center + eps, delta, mode)
    }

    /// Clamps raw bounds into `[0,1]`.
    pub fn from_bounds(lo: f64, hi: f64, delta: f64, mode: Mode) -> Self {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(lo, 1.0);
        Self {
            lo,
            hi,
            delta,
            mode,
        }
    }

    /// The trivial verdict `[0,1]`.
    pub fn trivial(delta: f64, mode: Mode) -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            delta,
            mode,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// One monitor verdict in the CSV stream layout
/// `(t, measure, horizon, mode, lo, hi, estimate)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictRow {
    pub t: u64,
    pub measure: MeasureKind,
    pub horizon: Horizon,
    pub mode: Mode,
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
}

impl VerdictRow {
    pub const CSV_HEADER: &'static str = "t,measure,horizon,mode,lo,hi,estimate";

    /// One CSV line; reals carry 17 significant digits so they round-trip
    /// double precision.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.measure.name(),
            self.horizon,
            self.mode.name(),
            self.lo,
            self.hi,
            self.estimate,
        )
    }
}

/// Errors from monitor construction and stepping.
#[derive(Debug, Clone, PartialEq)]
pub enum MonitorError {
    /// δ must lie strictly inside (0,1).
    InvalidDelta(f64),
    /// Expression-horizon cap for exact path evaluation.
    HorizonTooLarge { h: u64, max: u64 },
    /// Coin-count cap for exact path evaluation.
    TooManyCoins { n: usize, max: usize },
    /// Observation outside the declared label alphabet.
    UnknownLabel { label: usize, n: usize },
    /// Window arity must be positive and `a < b`.
    BadWindowFunction,
}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidDelta(d) => write!(f, "delta {d} outside (0,1)"),
            Self::HorizonTooLarge { h, max } => {
                write!(f, "expression horizon {h} exceeds cap {max}")
            }
            Self::TooManyCoins { n, max } => write!(f, "{n} coins exceeds cap {max}"),
            Self::UnknownLabel { label, n } => {
                write!(f, "coin label {label} outside alphabet of size {n}")
            }
            Self::BadWindowFunction => write!(f, "window function needs arity ≥ 1 and a < b"),
        }
    }
}

impl std::error::Error for MonitorError {}

fn check_delta(delta: f64) -> Result<(), MonitorError> {
    if delta <= 0.0 || delta >= 1.0 {
        return Err(MonitorError::InvalidDelta(delta));
    }
    Ok(())
}

/// Error radius for one mean estimate from `count` observations under the
/// given mode and budget; infinite (trivial interval after clamping) when
/// the count is too small for the bound to apply.
fn mode_eps(mode: Mode, count: u64, delta: f64) -> f64 {
    match mode {
        Mode::Pointwise => {
            if count == 0 {
                f64::INFINITY
            } else {
                bounds::hoeffding_pointwise_eps(count, delta).expect("delta validated")
            }
        }
        Mode::Uniform => bounds::stitched_uniform_eps(count, delta).expect("delta validated"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_clamps_to_unit() {
        let iv = ConfidenceInterval::around(0.05, 0.2, 0.05, Mode::Pointwise);
        assert_eq!(iv.lo, 0.0);
        assert!((iv.hi - 0.25).abs() < 1e-15);
        let iv = ConfidenceInterval::around(0.9, 0.5, 0.05, Mode::Uniform);
        assert_eq!(iv.hi, 1.0);
        assert!((iv.lo - 0.4).abs() < 1e-15);
    }

    #[test]
    fn trivial_interval_contains_everything_in_unit() {
        let iv = ConfidenceInterval::trivial(0.1, Mode::Pointwise);
        assert!(iv.contains(0.0) && iv.contains(1.0) && iv.contains(0.5));
        assert_eq!(iv.width(), 1.0);
    }
}
