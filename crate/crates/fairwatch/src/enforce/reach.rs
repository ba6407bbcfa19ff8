//! Reach probabilities of the unenforced process and the probabilistic
//! δ-enforcer built on them.

use crate::enforce::{heads_ratio_in, EnforceError};
use crate::fairness::UnitInterval;

/// `P(t, h)`: probability that an unenforced coin of bias `p` lands its
/// head rate inside the target at time `T`, given `t` tosses with `h`
/// heads so far. Built by backward induction
/// `P(t,h) = p·P(t+1,h+1) + (1-p)·P(t+1,h)`.
#[derive(Debug, Clone)]
pub struct ReachTable {
    p: f64,
    window: u64,
    interval: UnitInterval,
    /// `rows[t][h]` for `0 ≤ h ≤ t ≤ T`.
    rows: Vec<Vec<f64>>,
}

impl ReachTable {
    pub fn build(p: f64, window: u64, interval: UnitInterval) -> Result<Self, EnforceError> {
        if window == 0 {
            return Err(EnforceError::EmptyWindow);
        }
        let t_len = window as usize;
        let mut rows: Vec<Vec<f64>> = (0..=t_len).map(|t| vec![0.0; t + 1]).collect();
        for h in 0..=t_len {
            rows[t_len][h] = f64::from(heads_ratio_in(&interval, h as u64, window));
        }
        for t in (0..t_len).rev() {
            for h in 0..=t {
                rows[t][h] = p * rows[t + 1][h + 1] + (1.0 - p) * rows[t + 1][h];
            }
        }
        Ok(Self {
            p,
            window,
            interval,
            rows,
        })
    }

    pub fn probability(&self, t: u64, h: u64) -> f64 {
        self.rows[t as usize][h as usize]
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn bias(&self) -> f64 {
        self.p
    }

    pub fn interval(&self) -> UnitInterval {
        self.interval
    }
}

/// Finite-window enforcer that intervenes only when the unenforced success
/// probability falls below `1-δ`.
///
/// Keeps a raw outcome `x` at state `(t, h)` when `P(t+1, h+x) ≥ 1-δ`;
/// otherwise emits the outcome maximizing the reach probability, breaking
/// ties toward heads. From any state with `P(t,h) > 0` the enforced process
/// succeeds with probability at least `1-δ`.
#[derive(Debug, Clone)]
pub struct DeltaEnforcer {
    table: ReachTable,
    delta: f64,
    t: u64,
    h: u64,
}

impl DeltaEnforcer {
    pub fn new(table: ReachTable, delta: f64) -> Result<Self, EnforceError> {
        if delta <= 0.0 || delta >= 1.0 {
            return Err(EnforceError::InvalidDelta(delta));
        }
        Ok(Self {
            table,
            delta,
            t: 0,
            h: 0,
        })
    }

    /// The enforcement rule as a pure function of the state `(t, h)` and
    /// the raw outcome: keep when the post-toss state still reaches the
    /// target with probability `≥ 1-δ`, otherwise emit the
    /// probability-maximizing outcome (ties toward heads).
    pub fn decide(table: &ReachTable, delta: f64, t: u64, h: u64, raw: u8) -> u8 {
        let keep_prob = table.probability(t + 1, h + raw as u64);
        if keep_prob >= 1.0 - delta {
            return raw;
        }
        let heads = table.probability(t + 1, h + 1);
        let tails = table.probability(t + 1, h);
        u8::from(heads >= tails)
    }

    /// Feeds one raw outcome; errors once the window is exhausted.
    pub fn step(&mut self, raw: u8) -> Result<u8, EnforceError> {
        debug_assert!(raw <= 1);
        if self.t >= self.table.window() {
            return Err(EnforceError::WindowOver {
                t: self.t,
                window: self.table.window(),
            });
        }
        let enforced = Self::decide(&self.table, self.delta, self.t, self.h, raw);
        self.t += 1;
        self.h += enforced as u64;
        Ok(enforced)
    }

    pub fn state(&self) -> (u64, u64) {
        (self.t, self.h)
    }

    pub fn table(&self) -> &ReachTable {
        &self.table
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}
