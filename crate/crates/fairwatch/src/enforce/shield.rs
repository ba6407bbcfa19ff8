//! Shields: value-table driven outcome enforcers with almost-sure
//! guarantees.

use crate::enforce::value::{synthesize_value_table_counts, BiasMap, ValueTable};
use crate::enforce::{CostModel, EnforceError};
use crate::fairness::{BiasOutcomePair, UnitInterval};
use crate::sim::Dynamics;

/// Result of one shield step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShieldStep {
    pub pair: BiasOutcomePair,
    /// Cost incurred by this step (0 on non-intervention).
    pub cost: f64,
    pub intervened: bool,
}

/// The one-step rule shared by the finite and periodic shields: keep the
/// raw outcome `x` exactly when `v(t+1, h+x) ≤ c(p, x, 1-x) + v(t+1,
/// h+1-x)`, ties preferring non-intervention.
fn decide_flip(
    table: &ValueTable,
    p: f64,
    t: u64,
    h: u64,
    raw: BiasOutcomePair,
) -> Result<ShieldStep, EnforceError> {
    debug_assert!(raw.outcome <= 1);
    let x = raw.outcome;
    let flipped = 1 - x;
    let flip_cost = table.cost_model().flip_cost(p, x, flipped);
    let keep_v = table.value(t + 1, h + x as u64);
    let flip_v = table.value(t + 1, h + flipped as u64);
    if !keep_v.is_finite() && !flip_v.is_finite() {
        return Err(EnforceError::InfeasibleState { t, h });
    }
    let keep = keep_v <= flip_cost + flip_v;
    let (outcome, cost) = if keep { (x, 0.0) } else { (flipped, flip_cost) };
    Ok(ShieldStep {
        pair: BiasOutcomePair {
            bias: raw.bias,
            outcome,
        },
        cost,
        intervened: !keep,
    })
}

/// Cost-optimal finite-window shield.
///
/// Keeps the raw outcome `x` exactly when
/// `v(t+1, h+x) ≤ c(p, x, 1-x) + v(t+1, h+1-x)`; ties prefer
/// non-intervention. When the table is feasible at the start, every
/// enforced trace satisfies the window target and the expected incurred
/// cost equals `v(0, 0)`. Steps past the window pass through unmodified.
#[derive(Debug, Clone)]
pub struct Shield {
    table: ValueTable,
    t: u64,
    h: u64,
}

impl Shield {
    pub fn new(table: ValueTable) -> Self {
        Self { table, t: 0, h: 0 }
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn state(&self) -> (u64, u64) {
        (self.t, self.h)
    }

    /// Feeds one raw pair and returns the enforced pair plus the incurred
    /// cost.
    pub fn step(&mut self, raw: BiasOutcomePair) -> Result<ShieldStep, EnforceError> {
        if self.t >= self.table.window() {
            // Beyond the window there is nothing left to enforce.
            return Ok(ShieldStep {
                pair: raw,
                cost: 0.0,
                intervened: false,
            });
        }
        let p = self.table.bias_map().eval(self.t, self.h);
        let step = decide_flip(&self.table, p, self.t, self.h, raw)?;
        self.t += 1;
        self.h += step.pair.outcome as u64;
        Ok(step)
    }
}

/// Builds a shield directly from count-determined dynamics: the bias is a
/// function of (steps, enforced heads), so the finite-window DP applies
/// unchanged. Constant and additive dynamics qualify; Markov and scripted
/// dynamics do not.
pub fn dynamic_shield(
    dynamics: &Dynamics,
    window: u64,
    interval: UnitInterval,
    cost: CostModel,
) -> Result<Shield, EnforceError> {
    let bias_map = count_determined_bias_map(dynamics)?;
    let table = super::value::synthesize_value_table(bias_map, window, interval, cost)?;
    Ok(Shield::new(table))
}

fn count_determined_bias_map(dynamics: &Dynamics) -> Result<BiasMap, EnforceError> {
    match dynamics {
        Dynamics::Constant { p } => Ok(BiasMap::Constant(*p)),
        Dynamics::Additive { p1, beta0, beta1 } => Ok(BiasMap::Additive {
            p1: *p1,
            beta0: *beta0,
            beta1: *beta1,
        }),
        Dynamics::Markov(_) => Err(EnforceError::UnsupportedDynamics("Markov kernel")),
        Dynamics::Scripted { .. } => Err(EnforceError::UnsupportedDynamics("scripted biases")),
    }
}

/// What to do when a periodic window has no achievable head-count target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasiblePolicy {
    /// Fail the step (the guarantee is gone).
    HardError,
    /// Steer toward the nearest achievable count and record the event;
    /// outside the almost-sure guarantee.
    BestEffort,
}

/// Periodic-window shield for a known constant coin: the same target
/// interval recurs every `T` steps over the whole run, so each window gets
/// a fresh value table conditioned on the heads accumulated so far.
#[derive(Debug, Clone)]
pub struct PeriodicShield {
    p: f64,
    window: u64,
    interval: UnitInterval,
    cost: CostModel,
    policy: InfeasiblePolicy,
    table: ValueTable,
    /// Steps taken inside the current window.
    pos: u64,
    /// Enforced heads inside the current window.
    window_heads: u64,
    /// Enforced heads over the whole run.
    total_heads: u64,
    /// Completed windows.
    completed: u64,
    /// Indices of windows that had no achievable target (best-effort mode).
    infeasible_windows: Vec<u64>,
}

impl PeriodicShield {
    pub fn new(
        p: f64,
        window: u64,
        interval: UnitInterval,
        cost: CostModel,
        policy: InfeasiblePolicy,
    ) -> Result<Self, EnforceError> {
        if window == 0 {
            return Err(EnforceError::EmptyWindow);
        }
        let (table, saturated) = window_table(p, window, interval, cost, 0, 0, policy)?;
        let mut infeasible_windows = Vec::new();
        if saturated {
            infeasible_windows.push(0);
        }
        Ok(Self {
            p,
            window,
            interval,
            cost,
            policy,
            table,
            pos: 0,
            window_heads: 0,
            total_heads: 0,
            completed: 0,
            infeasible_windows,
        })
    }

    /// Feeds one raw pair; recomputes the window table at each boundary.
    pub fn step(&mut self, raw: BiasOutcomePair) -> Result<ShieldStep, EnforceError> {
        if self.pos == self.window {
            self.completed += 1;
            self.pos = 0;
            self.window_heads = 0;
            let (table, saturated) = window_table(
                self.p,
                self.window,
                self.interval,
                self.cost,
                self.completed,
                self.total_heads,
                self.policy,
            )?;
            self.table = table;
            if saturated {
                self.infeasible_windows.push(self.completed);
            }
        }
        let step = decide_flip(&self.table, self.p, self.pos, self.window_heads, raw)?;
        self.pos += 1;
        self.window_heads += step.pair.outcome as u64;
        self.total_heads += step.pair.outcome as u64;
        Ok(step)
    }

    pub fn total_heads(&self) -> u64 {
        self.total_heads
    }

    pub fn steps_taken(&self) -> u64 {
        self.completed * self.window + self.pos
    }

    /// Head-count target of the current window, as `(min, max)`.
    pub fn current_target(&self) -> (u64, u64) {
        match self.table.target() {
            crate::enforce::TargetSpec::HeadCount { min, max } => (min, max),
            crate::enforce::TargetSpec::Ratio(_) => unreachable!("periodic tables use counts"),
        }
    }

    /// Windows that fell back to best-effort saturation.
    pub fn infeasible_windows(&self) -> &[u64] {
        &self.infeasible_windows
    }
}

/// Smallest `h` with `h/total ≥ lo` and largest `h` with `h/total ≤ hi`,
/// using the same double-precision ratio test as the table terminals.
pub(crate) fn global_heads_range(interval: &UnitInterval, total: u64) -> Option<(u64, u64)> {
    // Binary search: h/total - lo is monotone in h.
    let ratio_ge_lo = |h: u64| h as f64 / total as f64 >= interval.lo();
    let ratio_le_hi = |h: u64| h as f64 / total as f64 <= interval.hi();
    let min = partition_point(0, total + 1, |h| !ratio_ge_lo(h));
    if min > total {
        return None;
    }
    let max = partition_point(0, total + 1, ratio_le_hi).saturating_sub(1);
    (min <= max).then_some((min, max))
}

/// First index in `[lo, hi)` where `pred` flips from true to false.
fn partition_point(lo: u64, hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Builds the table for the upcoming window; the boolean reports whether
/// the target had to be saturated (best-effort mode only).
fn window_table(
    p: f64,
    window: u64,
    interval: UnitInterval,
    cost: CostModel,
    completed: u64,
    total_heads: u64,
    policy: InfeasiblePolicy,
) -> Result<(ValueTable, bool), EnforceError> {
    let horizon_total = (completed + 1) * window;
    let range = global_heads_range(&interval, horizon_total);
    let window_range = range.and_then(|(gmin, gmax)| {
        let min = gmin.saturating_sub(total_heads);
        if total_heads > gmax || min > window {
            return None;
        }
        let max = (gmax - total_heads).min(window);
        Some((min, max))
    });
    match window_range {
        Some((min, max)) => {
            let table =
                synthesize_value_table_counts(BiasMap::Constant(p), window, min, max, cost)?;
            Ok((table, false))
        }
        None => match policy {
            InfeasiblePolicy::HardError => Err(EnforceError::InfeasibleWindow { index: completed }),
            InfeasiblePolicy::BestEffort => {
                // Steer toward the achievable count nearest the target.
                let desired = match range {
                    Some((gmin, _)) if gmin > total_heads => window,
                    Some(_) => 0,
                    None => {
                        let mid = interval.midpoint() * horizon_total as f64;
                        let g = (mid.round() as u64).min(horizon_total);
                        g.saturating_sub(total_heads).min(window)
                    }
                };
                let table = synthesize_value_table_counts(
                    BiasMap::Constant(p),
                    window,
                    desired,
                    desired,
                    cost,
                )?;
                Ok((table, true))
            }
        },
    }
}
