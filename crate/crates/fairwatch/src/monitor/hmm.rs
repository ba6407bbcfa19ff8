//! Monitor for hidden Markov dynamics at infinite horizon.
//!
//! Coin labels are not observed. Assuming the induced chain is irreducible
//! and aperiodic, starts in its stationary distribution, and has a known
//! mixing-time bound `τ`, the stationary head rate equals the stationary
//! mean bias, so one estimator serves outcome, bias, and current fairness
//! at horizon ∞.
//!
//! The monitor averages a bounded window function `f: X^n -> [a,b]` over
//! the outcome stream; the default instance is the head indicator (`n = 1`,
//! `a = 0`, `b = 1`). The error radius accounts for the chain's memory
//! through the mixing time:
//!
//! `e_t = √( 9·t·n²·(b-a)²·τ / (2·(t-(n-1))²) · K )`
//!
//! with `K = ln(2/δ)` pointwise and `K = ln(π²t²/(3δ))` uniform.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;

use crate::monitor::{check_delta, ConfidenceInterval, Mode, MonitorError};

type WindowFn = Box<dyn Fn(&[u8]) -> f64 + Send + Sync>;

/// Sequential monitor state for hidden Markov dynamics.
pub struct HmmMonitor {
    f: WindowFn,
    arity: usize,
    lo: f64,
    hi: f64,
    tau: u64,
    delta: f64,
    mode: Mode,
    r: f64,
    t: u64,
    window: VecDeque<u8>,
}

impl fmt::Debug for HmmMonitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HmmMonitor")
            .field("arity", &self.arity)
            .field("range", &(self.lo, self.hi))
            .field("tau", &self.tau)
            .field("delta", &self.delta)
            .field("mode", &self.mode)
            .field("r", &self.r)
            .field("t", &self.t)
            .finish()
    }
}

impl HmmMonitor {
    /// General constructor for a window function `f: X^arity -> [lo, hi]`.
    pub fn new(
        f: impl Fn(&[u8]) -> f64 + Send + Sync + 'static,
        arity: usize,
        lo: f64,
        hi: f64,
        tau: u64,
        delta: f64,
        mode: Mode,
    ) -> Result<Self, MonitorError> {
        check_delta(delta)?;
        if arity == 0 || lo >= hi {
            return Err(MonitorError::BadWindowFunction);
        }
        Ok(Self {
            f: Box::new(f),
            arity,
            lo,
            hi,
            tau,
            delta,
            mode,
            r: 0.0,
            t: 0,
            window: VecDeque::with_capacity(arity),
        })
    }

    /// The default head-rate instance: `f = 1[x = 1]`, `n = 1`, range `[0,1]`.
    pub fn head_rate(tau: u64, delta: f64, mode: Mode) -> Result<Self, MonitorError> {
        Self::new(|w| w[0] as f64, 1, 0.0, 1.0, tau, delta, mode)
    }

    pub fn count(&self) -> u64 {
        self.t
    }

    pub fn mean(&self) -> f64 {
        self.r
    }

    /// Register update only, for callers that query the interval later.
    pub fn observe(&mut self, x: u8) {
        debug_assert!(x <= 1);
        self.t += 1;
        if self.window.len() == self.arity {
            self.window.pop_front();
        }
        self.window.push_back(x);
        let n = self.arity as u64;
        if self.t < n {
            return;
        }
        // First evaluation happens at t = n on the window (x_{t-n+1}..x_t).
        let value = (self.f)(self.window.make_contiguous());
        // R_t <- (R_{t-1}·(t-n) + f(window)) / (t-n+1)
        self.r = (self.r * (self.t - n) as f64 + value) / (self.t - n + 1) as f64;
    }

    /// Feeds one outcome and returns the verdict. Before the window fills
    /// (`t < n`) the verdict is the trivial interval.
    pub fn step(&mut self, x: u8) -> ConfidenceInterval {
        self.observe(x);
        self.current_interval()
    }

    /// The verdict for the observations seen so far.
    pub fn current_interval(&self) -> ConfidenceInterval {
        let n = self.arity as u64;
        if self.t < n {
            return ConfidenceInterval::trivial(self.delta, self.mode);
        }
        let e = self.error_radius(self.t);
        ConfidenceInterval::around(self.r, e, self.delta, self.mode)
    }

    /// The mixing-time-aware error radius at time `t`.
    pub fn error_radius(&self, t: u64) -> f64 {
        let tf = t as f64;
        let n = self.arity as f64;
        let span = self.hi - self.lo;
        let k = match self.mode {
            Mode::Pointwise => (2.0 / self.delta).ln(),
            Mode::Uniform => (PI * PI * tf * tf / (3.0 * self.delta)).ln(),
        };
        let denom = tf - (n - 1.0);
        (9.0 * tf * n * n * span * span * self.tau as f64 / (2.0 * denom * denom) * k).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_error_radius() {
        // n=1, a=0, b=1, tau=1, t=100, delta=0.05, pointwise.
        let m = HmmMonitor::head_rate(1, 0.05, Mode::Pointwise).unwrap();
        let e = m.error_radius(100);
        assert!((e - 0.407_430_454_722_185_85).abs() < 1e-12, "e = {e}");
    }

    #[test]
    fn radius_shrinks_like_inverse_sqrt_t() {
        let m = HmmMonitor::head_rate(1, 0.05, Mode::Pointwise).unwrap();
        let c = (4.5 * (2.0_f64 / 0.05).ln()).sqrt();
        for t in [1_000u64, 100_000, 10_000_000] {
            let e = m.error_radius(t);
            let asymptote = c / (t as f64).sqrt();
            assert!((e / asymptote - 1.0).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn register_is_running_mean_for_unit_window() {
        let mut m = HmmMonitor::head_rate(3, 0.05, Mode::Pointwise).unwrap();
        let mut heads = 0u64;
        for i in 0..500u64 {
            let x = ((i * 7) % 5 < 2) as u8;
            heads += x as u64;
            m.step(x);
            let exact = heads as f64 / (i + 1) as f64;
            assert!((m.mean() - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn window_fills_before_first_verdict() {
        let mut m = HmmMonitor::new(
            |w| (w[0] + w[1]) as f64 / 2.0,
            2,
            0.0,
            1.0,
            1,
            0.05,
            Mode::Pointwise,
        )
        .unwrap();
        let first = m.step(1);
        assert_eq!((first.lo, first.hi), (0.0, 1.0));
        m.step(1);
        // First evaluation sees exactly (x_1, x_2).
        assert_eq!(m.mean(), 1.0);
        // The bound eventually bites: after enough steps the interval is
        // strictly inside [0,1] around the window mean.
        let mut last = ConfidenceInterval::trivial(0.05, Mode::Pointwise);
        for i in 2..4000u64 {
            last = m.step((i % 2) as u8);
        }
        assert!(last.width() < 0.5, "width = {}", last.width());
        assert!((m.mean() - 0.5).abs() < 0.01);
    }

    #[test]
    fn uniform_radius_exceeds_pointwise() {
        let p = HmmMonitor::head_rate(4, 0.05, Mode::Pointwise).unwrap();
        let u = HmmMonitor::head_rate(4, 0.05, Mode::Uniform).unwrap();
        for t in [10u64, 100, 10_000] {
            assert!(u.error_radius(t) > p.error_radius(t));
        }
    }

    #[test]
    fn bad_window_function_rejected() {
        assert!(HmmMonitor::new(|_| 0.0, 0, 0.0, 1.0, 1, 0.05, Mode::Pointwise).is_err());
        assert!(HmmMonitor::new(|_| 0.0, 1, 1.0, 0.0, 1, 0.05, Mode::Pointwise).is_err());
    }
}
