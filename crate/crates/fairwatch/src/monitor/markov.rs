//! Monitor for observed finite Markov dynamics.
//!
//! The monitor sees the label of the current coin alongside the outcome.
//! It is given only the label alphabet `[n]`, never the numeric biases:
//! the bias of coin `k` is itself a transition probability of the induced
//! chain (coin `k` to the heads pair) and is estimated from data like any
//! other transition.
//!
//! Each monitored quantity — `n` coin biases plus `2n·n` kernel entries —
//! gets an equal share `δ/Q` of the error budget, so a union bound makes
//! all quantity intervals simultaneously valid with probability `≥ 1-δ`.
//! Fairness expressions over the chain (current fairness at horizon `h`,
//! bias fairness at horizon `h`) are then evaluated in interval arithmetic
//! over those quantity intervals, which preserves soundness: whenever every
//! quantity interval contains its true value, the evaluated interval
//! contains the true expression value.

use crate::monitor::{check_delta, mode_eps, ConfidenceInterval, Mode, MonitorError};

/// Exact expression evaluation enumerates chain paths; these caps keep it
/// respectable.
pub const MAX_EXPRESSION_HORIZON: u64 = 6;
pub const MAX_MONITOR_COINS: usize = 8;

/// One transition probability of the induced chain tracked by the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitoredQuantity {
    /// `M(coin k, (k, 1))`, i.e. the bias of coin `k`.
    CoinBias { coin: usize },
    /// `M((coin, outcome), next)`: one kernel entry.
    Kernel {
        coin: usize,
        outcome: u8,
        next: usize,
    },
}

/// Confidence interval for a single monitored transition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionInterval {
    pub quantity: MonitoredQuantity,
    pub lo: f64,
    pub hi: f64,
}

/// Verdict bundle: per-transition intervals plus the two derived fairness
/// intervals at the requested horizon.
#[derive(Debug, Clone)]
pub struct MarkovVerdict {
    pub transitions: Vec<TransitionInterval>,
    pub current: ConfidenceInterval,
    pub bias: ConfidenceInterval,
}

/// Unclamped nonnegative interval used during expression evaluation.
#[derive(Debug, Clone, Copy)]
struct Iv {
    lo: f64,
    hi: f64,
}

impl Iv {
    const ZERO: Iv = Iv { lo: 0.0, hi: 0.0 };

    fn add(self, other: Iv) -> Iv {
        Iv {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// Product of nonnegative intervals; endpoint-monotone, so this equals
    /// full path enumeration after distribution.
    fn mul(self, other: Iv) -> Iv {
        Iv {
            lo: self.lo * other.lo,
            hi: self.hi * other.hi,
        }
    }

    fn complement(self) -> Iv {
        Iv {
            lo: (1.0 - self.hi).max(0.0),
            hi: (1.0 - self.lo).min(1.0),
        }
    }

    fn scale(self, c: f64) -> Iv {
        Iv {
            lo: self.lo * c,
            hi: self.hi * c,
        }
    }
}

/// Sequential monitor state for observed Markov dynamics.
#[derive(Debug, Clone)]
pub struct MarkovMonitor {
    n: usize,
    mode: Mode,
    delta: f64,
    t: u64,
    /// Visits to coin `k` (each visit yields one outcome sample).
    coin_visits: Vec<u64>,
    /// Heads observed at coin `k`.
    coin_heads: Vec<u64>,
    /// Completed departures from pair `(k, x)`, flattened `k*2 + x`.
    pair_visits: Vec<u64>,
    /// Transition counts `(k, x) -> k'`, flattened `(k*2 + x)*n + k'`.
    transitions: Vec<u64>,
    last: Option<(usize, u8)>,
}

impl MarkovMonitor {
    pub fn new(n: usize, mode: Mode, delta: f64) -> Result<Self, MonitorError> {
        check_delta(delta)?;
        if n == 0 || n > MAX_MONITOR_COINS {
            return Err(MonitorError::TooManyCoins {
                n,
                max: MAX_MONITOR_COINS,
            });
        }
        Ok(Self {
            n,
            mode,
            delta,
            t: 0,
            coin_visits: vec![0; n],
            coin_heads: vec![0; n],
            pair_visits: vec![0; 2 * n],
            transitions: vec![0; 2 * n * n],
            last: None,
        })
    }

    /// Number of monitored quantities: `n` coin biases plus `2n·n` kernel
    /// entries.
    pub fn quantity_count(&self) -> u64 {
        (self.n + 2 * self.n * self.n) as u64
    }

    /// The equal per-quantity share of the error budget.
    pub fn per_quantity_delta(&self) -> f64 {
        self.delta / self.quantity_count() as f64
    }

    pub fn count(&self) -> u64 {
        self.t
    }

    pub fn last_observation(&self) -> Option<(usize, u8)> {
        self.last
    }

    /// Feeds one labelled observation `(coin label, outcome)`.
    pub fn step(&mut self, label: usize, x: u8) -> Result<(), MonitorError> {
        debug_assert!(x <= 1);
        if label >= self.n {
            return Err(MonitorError::UnknownLabel { label, n: self.n });
        }
        if let Some((pk, px)) = self.last {
            let from = pk * 2 + px as usize;
            self.pair_visits[from] += 1;
            self.transitions[from * self.n + label] += 1;
        }
        self.coin_visits[label] += 1;
        self.coin_heads[label] += x as u64;
        self.last = Some((label, x));
        self.t += 1;
        Ok(())
    }

    fn estimate(&self, hits: u64, total: u64) -> Iv {
        if total == 0 {
            // Unseen source state: trivial bounds.
            return Iv { lo: 0.0, hi: 1.0 };
        }
        let mean = hits as f64 / total as f64;
        let eps = mode_eps(self.mode, total, self.per_quantity_delta());
        Iv {
            lo: (mean - eps).max(0.0),
            hi: (mean + eps).min(1.0),
        }
    }

    fn coin_bias_iv(&self, k: usize) -> Iv {
        self.estimate(self.coin_heads[k], self.coin_visits[k])
    }

    fn kernel_iv(&self, k: usize, x: u8, next: usize) -> Iv {
        let from = k * 2 + x as usize;
        self.estimate(
            self.transitions[from * self.n + next],
            self.pair_visits[from],
        )
    }

    /// Interval for the bias of coin `k` as a clamped verdict.
    pub fn coin_bias_interval(&self, k: usize) -> ConfidenceInterval {
        let iv = self.coin_bias_iv(k);
        ConfidenceInterval::from_bounds(iv.lo, iv.hi, self.delta, self.mode)
    }

    /// Interval for one kernel entry `(k, x) -> k'`.
    pub fn kernel_interval(&self, k: usize, x: u8, next: usize) -> ConfidenceInterval {
        let iv = self.kernel_iv(k, x, next);
        ConfidenceInterval::from_bounds(iv.lo, iv.hi, self.delta, self.mode)
    }

    /// All per-transition intervals of the verdict bundle.
    pub fn transition_intervals(&self) -> Vec<TransitionInterval> {
        let mut out = Vec::with_capacity(self.quantity_count() as usize);
        for k in 0..self.n {
            let iv = self.coin_bias_iv(k);
            out.push(TransitionInterval {
                quantity: MonitoredQuantity::CoinBias { coin: k },
                lo: iv.lo,
                hi: iv.hi,
            });
        }
        for k in 0..self.n {
            for x in 0..2u8 {
                for next in 0..self.n {
                    let iv = self.kernel_iv(k, x, next);
                    out.push(TransitionInterval {
                        quantity: MonitoredQuantity::Kernel {
                            coin: k,
                            outcome: x,
                            next,
                        },
                        lo: iv.lo,
                        hi: iv.hi,
                    });
                }
            }
        }
        out
    }

    fn check_horizon(&self, h: u64) -> Result<(), MonitorError> {
        if h > MAX_EXPRESSION_HORIZON {
            return Err(MonitorError::HorizonTooLarge {
                h,
                max: MAX_EXPRESSION_HORIZON,
            });
        }
        Ok(())
    }

    /// Expected bias of the coin `j` steps after a visit to pair `(k, x)`
    /// (`j = 0` is the pair's own coin), in interval arithmetic.
    fn pair_expr(&self, k: usize, x: u8, j: u64) -> Iv {
        if j == 0 {
            return self.coin_bias_iv(k);
        }
        let mut acc = Iv::ZERO;
        for next in 0..self.n {
            acc = acc.add(self.kernel_iv(k, x, next).mul(self.coin_expr(next, j - 1)));
        }
        acc
    }

    /// Expected bias of the coin `j` steps after coin `k` is tossed.
    fn coin_expr(&self, k: usize, j: u64) -> Iv {
        if j == 0 {
            return self.coin_bias_iv(k);
        }
        let heads = self.coin_bias_iv(k);
        let tails = heads.complement();
        heads
            .mul(self.pair_expr(k, 1, j))
            .add(tails.mul(self.pair_expr(k, 0, j)))
    }

    /// Current fairness at horizon `h`: interval for `E(p_{t+h} | w_t)`.
    pub fn current_fairness_interval(&self, h: u64) -> Result<ConfidenceInterval, MonitorError> {
        self.check_horizon(h)?;
        let Some((k, x)) = self.last else {
            return Ok(ConfidenceInterval::trivial(self.delta, self.mode));
        };
        let iv = self.pair_expr(k, x, h);
        Ok(ConfidenceInterval::from_bounds(
            iv.lo, iv.hi, self.delta, self.mode,
        ))
    }

    /// Bias fairness at horizon `h`: realized visit counts weighted by the
    /// per-coin bias intervals, plus the expected biases of the next `h`
    /// coins, normalized by `t + h`.
    pub fn bias_fairness_interval(&self, h: u64) -> Result<ConfidenceInterval, MonitorError> {
        self.check_horizon(h)?;
        let Some((k, x)) = self.last else {
            return Ok(ConfidenceInterval::trivial(self.delta, self.mode));
        };
        let mut acc = Iv::ZERO;
        for coin in 0..self.n {
            acc = acc.add(self.coin_bias_iv(coin).scale(self.coin_visits[coin] as f64));
        }
        for j in 1..=h {
            acc = acc.add(self.pair_expr(k, x, j));
        }
        let scale = 1.0 / (self.t + h) as f64;
        Ok(ConfidenceInterval::from_bounds(
            acc.lo * scale,
            acc.hi * scale,
            self.delta,
            self.mode,
        ))
    }

    /// Feeds one observation and returns the full verdict bundle for the
    /// requested horizon.
    pub fn step_with_verdict(
        &mut self,
        label: usize,
        x: u8,
        h: u64,
    ) -> Result<MarkovVerdict, MonitorError> {
        self.step(label, x)?;
        Ok(MarkovVerdict {
            transitions: self.transition_intervals(),
            current: self.current_fairness_interval(h)?,
            bias: self.bias_fairness_interval(h)?,
        })
    }
}
