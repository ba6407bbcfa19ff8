//! Monitors for a single unknown constant coin, plus the exact monitor
//! for observable outcome fairness.

use crate::fairness::MeasureKind;
use crate::monitor::{check_delta, mode_eps, ConfidenceInterval, Horizon, Mode, MonitorError};

/// Exact monitor for outcome fairness at horizon zero: the quantity is
/// observable, so the verdict is the degenerate interval `[R_t, R_t]`.
///
/// Works under any dynamics whatsoever. The running-mean register
/// `R_t = (x + (t-1)·R_{t-1}) / t` is held as an integer head count so the
/// emitted point equals the direct head rate bit for bit.
#[derive(Debug, Clone, Default)]
pub struct ExactOutcomeMonitor {
    heads: u64,
    t: u64,
}

impl ExactOutcomeMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one outcome and returns `[R_t, R_t]`.
    pub fn step(&mut self, x: u8) -> ConfidenceInterval {
        debug_assert!(x <= 1);
        self.t += 1;
        self.heads += x as u64;
        let r = self.mean();
        ConfidenceInterval {
            lo: r,
            hi: r,
            delta: 0.0,
            mode: Mode::Pointwise,
        }
    }

    pub fn mean(&self) -> f64 {
        self.heads as f64 / self.t as f64
    }

    pub fn count(&self) -> u64 {
        self.t
    }
}

/// Monitor for an unknown constant coin.
///
/// Keeps the running outcome mean `R_t` and dresses it with a pointwise or
/// uniform error radius. Under constant dynamics the same interval is sound
/// for bias and current fairness at every horizon (they all equal `p`), and
/// for outcome fairness at infinite horizon. Outcome fairness at finite
/// horizon `h` interpolates the realized mean with the estimated future:
///
/// `[(t·R + h·(R-ε))/(t+h), (t·R + h·(R+ε))/(t+h)]`.
#[derive(Debug, Clone)]
pub struct StaticMonitor {
    measure: MeasureKind,
    horizon: Horizon,
    mode: Mode,
    delta: f64,
    r: f64,
    t: u64,
}

impl StaticMonitor {
    pub fn new(
        measure: MeasureKind,
        horizon: Horizon,
        mode: Mode,
        delta: f64,
    ) -> Result<Self, MonitorError> {
        check_delta(delta)?;
        Ok(Self {
            measure,
            horizon,
            mode,
            delta,
            r: 0.0,
            t: 0,
        })
    }

    /// Register update only, for callers that query the interval later.
    pub fn observe(&mut self, x: u8) {
        debug_assert!(x <= 1);
        self.t += 1;
        self.r = (x as f64 + (self.t - 1) as f64 * self.r) / self.t as f64;
    }

    /// Feeds one outcome and returns the current verdict.
    pub fn step(&mut self, x: u8) -> ConfidenceInterval {
        self.observe(x);
        self.current_interval()
    }

    /// The verdict for the observations seen so far.
    pub fn current_interval(&self) -> ConfidenceInterval {
        if self.t == 0 {
            return ConfidenceInterval::trivial(self.delta, self.mode);
        }
        let eps = mode_eps(self.mode, self.t, self.delta);
        match (self.measure, self.horizon) {
            (MeasureKind::OutcomeFairness, Horizon::Finite(h)) => {
                let t = self.t as f64;
                let h = h as f64;
                let lo = (t * self.r + h * (self.r - eps)) / (t + h);
                let hi = (t * self.r + h * (self.r + eps)) / (t + h);
                ConfidenceInterval::from_bounds(lo, hi, self.delta, self.mode)
            }
            _ => ConfidenceInterval::around(self.r, eps, self.delta, self.mode),
        }
    }

    pub fn mean(&self) -> f64 {
        self.r
    }

    pub fn count(&self) -> u64 {
        self.t
    }

    pub fn measure(&self) -> MeasureKind {
        self.measure
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }
}
