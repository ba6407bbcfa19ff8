//! Monitor for known additive dynamics with unknown starting bias.
//!
//! The bias drifts by a known outcome-driven increment,
//! `p_{t+1} = p_t + β(x_t)`, so `p_t = p_1 + C_{t-1}` with
//! `C_t = Σ_{i≤t} β(x_i)` computable from the observed outcomes. Debiasing
//! each outcome by the accumulated shift, `x_t - C_{t-1}` has conditional
//! mean `p_1`, so a running mean register estimates the starting bias:
//!
//! `R_t <- (R_{t-1}·(t-1) + (x_t - C_{t-1})) / t`
//!
//! Current fairness at horizon 0 is then `R_t + C_{t-1}` and bias fairness
//! is `R_t + A_t/t`, where `A_t = Σ_{i≤t} (t-i)·β(x_i)` accumulates via
//! `A_t = A_{t-1} + C_{t-1}`. Both inherit the constant-coin error radii:
//! the debiased observations still span width-1 ranges.

use crate::monitor::{check_delta, mode_eps, ConfidenceInterval, Mode, MonitorError};

/// Both verdicts of one additive-monitor step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditiveVerdict {
    /// Interval for the current bias `p_t`.
    pub current: ConfidenceInterval,
    /// Interval for the running average bias `(1/t)·Σ p_i`.
    pub bias: ConfidenceInterval,
}

/// Sequential monitor state for additive dynamics.
#[derive(Debug, Clone)]
pub struct AdditiveMonitor {
    beta0: f64,
    beta1: f64,
    mode: Mode,
    delta: f64,
    /// Running estimate of the starting bias `p_1`.
    r: f64,
    /// Accumulated shift `C_t = Σ β(x_i)`.
    c: f64,
    /// Shift before the latest observation, `C_{t-1}`; the current bias
    /// estimate is `R_t + C_{t-1}`.
    c_prev: f64,
    /// Accumulated average-shift numerator `A_t = Σ (t-i)·β(x_i)`.
    a: f64,
    t: u64,
}

impl AdditiveMonitor {
    pub fn new(beta0: f64, beta1: f64, mode: Mode, delta: f64) -> Result<Self, MonitorError> {
        check_delta(delta)?;
        Ok(Self {
            beta0,
            beta1,
            mode,
            delta,
            r: 0.0,
            c: 0.0,
            c_prev: 0.0,
            a: 0.0,
            t: 0,
        })
    }

    /// Register updates only, for callers that query the verdict later.
    pub fn observe(&mut self, x: u8) {
        debug_assert!(x <= 1);
        self.t += 1;
        self.c_prev = self.c;
        self.a += self.c_prev;
        self.r = (self.r * (self.t - 1) as f64 + (x as f64 - self.c_prev)) / self.t as f64;
        self.c = self.c_prev + if x == 1 { self.beta1 } else { self.beta0 };
    }

    /// Feeds one outcome and returns the current- and bias-fairness verdicts.
    pub fn step(&mut self, x: u8) -> AdditiveVerdict {
        self.observe(x);
        self.verdict()
    }

    /// The verdicts for the observations seen so far.
    pub fn verdict(&self) -> AdditiveVerdict {
        if self.t == 0 {
            let trivial = ConfidenceInterval::trivial(self.delta, self.mode);
            return AdditiveVerdict {
                current: trivial,
                bias: trivial,
            };
        }
        let eps = mode_eps(self.mode, self.t, self.delta);
        AdditiveVerdict {
            current: ConfidenceInterval::around(self.r + self.c_prev, eps, self.delta, self.mode),
            bias: ConfidenceInterval::around(
                self.r + self.a / self.t as f64,
                eps,
                self.delta,
                self.mode,
            ),
        }
    }

    /// Point estimate of the starting bias.
    pub fn initial_bias_estimate(&self) -> f64 {
        self.r
    }

    /// Accumulated shift `C_t`.
    pub fn accumulated_shift(&self) -> f64 {
        self.c
    }

    pub fn count(&self) -> u64 {
        self.t
    }
}
