//! Value tables: expected minimal enforcement cost by dynamic programming
//! over (tosses seen, heads seen).
//!
//! `v(t, h)` is the expected cost of the cheapest sound outcome enforcer
//! from a state with `t` tosses and `h` enforced heads; `+∞` marks states
//! from which no enforcer can guarantee the target. The terminal row pins
//! `v(T, h) = 0` exactly when the head count is admissible, and interior
//! states satisfy
//!
//! `v(t,h) = p·min(v(t+1,h+1), c(p,1,0)+v(t+1,h))
//!         + (1-p)·min(v(t+1,h), c(p,0,1)+v(t+1,h+1))`
//!
//! with `p = bias_map(t, h)`. Collapsing histories onto `(t, h)` is valid
//! because both the bias and the target depend on the history only through
//! the head count; the exhaustive oracle cross-checks this.

use crate::enforce::{heads_ratio_in, weight, CostModel, EnforceError};
use crate::fairness::UnitInterval;

/// Bias of the next coin as a function of (tosses seen, heads seen).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasMap {
    /// A fixed coin.
    Constant(f64),
    /// Additive outcome drift: `clamp(p1 + h·beta1 + (t-h)·beta0)`.
    Additive { p1: f64, beta0: f64, beta1: f64 },
}

impl BiasMap {
    pub fn eval(&self, t: u64, h: u64) -> f64 {
        match self {
            Self::Constant(p) => *p,
            Self::Additive { p1, beta0, beta1 } => {
                (p1 + h as f64 * beta1 + (t - h) as f64 * beta0).clamp(0.0, 1.0)
            }
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::Constant(p) => format!("constant,{}", fmt_f64(*p)),
            Self::Additive { p1, beta0, beta1 } => {
                format!(
                    "additive,{},{},{}",
                    fmt_f64(*p1),
                    fmt_f64(*beta0),
                    fmt_f64(*beta1)
                )
            }
        }
    }
}

/// What the terminal row of a value table demands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    /// Head rate `h/T` inside a fairness interval.
    Ratio(UnitInterval),
    /// Head count inside an inclusive range.
    HeadCount { min: u64, max: u64 },
}

impl TargetSpec {
    fn admits(&self, h: u64, window: u64) -> bool {
        match self {
            Self::Ratio(interval) => heads_ratio_in(interval, h, window),
            Self::HeadCount { min, max } => (*min..=*max).contains(&h),
        }
    }
}

/// Finite-horizon DP table of expected minimal enforcement cost.
#[derive(Debug, Clone)]
pub struct ValueTable {
    window: u64,
    bias_map: BiasMap,
    cost: CostModel,
    target: TargetSpec,
    /// `rows[t][h]` for `0 ≤ h ≤ t ≤ T`; `+∞` marks infeasible states.
    rows: Vec<Vec<f64>>,
}

/// Synthesizes the cost-optimal value table for a ratio target `I_T`.
pub fn synthesize_value_table(
    bias_map: BiasMap,
    window: u64,
    interval: UnitInterval,
    cost: CostModel,
) -> Result<ValueTable, EnforceError> {
    synthesize(bias_map, window, TargetSpec::Ratio(interval), cost)
}

/// Synthesizes a value table whose terminal condition is a head-count
/// range (used per window by the periodic shield).
pub fn synthesize_value_table_counts(
    bias_map: BiasMap,
    window: u64,
    min_heads: u64,
    max_heads: u64,
    cost: CostModel,
) -> Result<ValueTable, EnforceError> {
    synthesize(
        bias_map,
        window,
        TargetSpec::HeadCount {
            min: min_heads,
            max: max_heads,
        },
        cost,
    )
}

fn synthesize(
    bias_map: BiasMap,
    window: u64,
    target: TargetSpec,
    cost: CostModel,
) -> Result<ValueTable, EnforceError> {
    if window == 0 {
        return Err(EnforceError::EmptyWindow);
    }
    let t_len = window as usize;
    let mut rows: Vec<Vec<f64>> = (0..=t_len).map(|t| vec![0.0; t + 1]).collect();
    for h in 0..=t_len {
        rows[t_len][h] = if target.admits(h as u64, window) {
            0.0
        } else {
            f64::INFINITY
        };
    }
    for t in (0..t_len).rev() {
        for h in 0..=t {
            let p = bias_map.eval(t as u64, h as u64);
            let keep_heads = rows[t + 1][h + 1];
            let flip_heads = cost.flip_cost(p, 1, 0) + rows[t + 1][h];
            let keep_tails = rows[t + 1][h];
            let flip_tails = cost.flip_cost(p, 0, 1) + rows[t + 1][h + 1];
            rows[t][h] =
                weight(p, keep_heads.min(flip_heads)) + weight(1.0 - p, keep_tails.min(flip_tails));
        }
    }
    Ok(ValueTable {
        window,
        bias_map,
        cost,
        target,
        rows,
    })
}

impl ValueTable {
    pub fn value(&self, t: u64, h: u64) -> f64 {
        self.rows[t as usize][h as usize]
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn bias_map(&self) -> BiasMap {
        self.bias_map
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost
    }

    pub fn target(&self) -> TargetSpec {
        self.target
    }

    /// Whether a sound enforcer exists from the initial state.
    pub fn is_feasible(&self) -> bool {
        self.rows[0][0].is_finite()
    }

    /// Serializes to the versioned CSV layout: a header describing the
    /// instance, then one `(t, h, v)` row per state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fairwatch-value-table,v1\n");
        out.push_str(&format!("window,{}\n", self.window));
        match self.target {
            TargetSpec::Ratio(interval) => {
                out.push_str(&format!(
                    "target,ratio,{},{}\n",
                    fmt_f64(interval.lo()),
                    fmt_f64(interval.hi())
                ));
            }
            TargetSpec::HeadCount { min, max } => {
                out.push_str(&format!("target,count,{min},{max}\n"));
            }
        }
        out.push_str(&format!("bias,{}\n", self.bias_map.descriptor()));
        out.push_str(&format!("cost,{}\n", self.cost.descriptor()));
        out.push_str("t,h,v\n");
        for (t, row) in self.rows.iter().enumerate() {
            for (h, v) in row.iter().enumerate() {
                let value = if v.is_finite() {
                    fmt_f64(*v)
                } else {
                    "inf".to_string()
                };
                out.push_str(&format!("{t},{h},{value}\n"));
            }
        }
        out
    }

    /// Parses the CSV layout produced by [`ValueTable::to_csv`]. Leading
    /// `#` comment lines (e.g. a config-hash preamble) are skipped.
    pub fn from_csv(text: &str) -> Result<Self, EnforceError> {
        let bad = |msg: &str| EnforceError::BadTableFormat(msg.to_string());
        let mut lines = text.lines().filter(|line| !line.starts_with('#'));
        if lines.next() != Some("fairwatch-value-table,v1") {
            return Err(bad("missing version header"));
        }
        let window: u64 = field(lines.next(), "window")?
            .parse()
            .map_err(|_| bad("bad window"))?;
        let target_line = field(lines.next(), "target")?;
        let target_parts: Vec<&str> = target_line.split(',').collect();
        let target = match target_parts.as_slice() {
            ["ratio", lo, hi] => {
                let lo: f64 = lo.parse().map_err(|_| bad("bad target lo"))?;
                let hi: f64 = hi.parse().map_err(|_| bad("bad target hi"))?;
                TargetSpec::Ratio(
                    UnitInterval::new(lo, hi).map_err(|_| bad("target outside [0,1]"))?,
                )
            }
            ["count", min, max] => TargetSpec::HeadCount {
                min: min.parse().map_err(|_| bad("bad target min"))?,
                max: max.parse().map_err(|_| bad("bad target max"))?,
            },
            _ => return Err(bad("unknown target spec")),
        };
        let bias_line = field(lines.next(), "bias")?;
        let bias_parts: Vec<&str> = bias_line.split(',').collect();
        let bias_map = match bias_parts.as_slice() {
            ["constant", p] => BiasMap::Constant(p.parse().map_err(|_| bad("bad bias"))?),
            ["additive", p1, b0, b1] => BiasMap::Additive {
                p1: p1.parse().map_err(|_| bad("bad p1"))?,
                beta0: b0.parse().map_err(|_| bad("bad beta0"))?,
                beta1: b1.parse().map_err(|_| bad("bad beta1"))?,
            },
            _ => return Err(bad("unknown bias map")),
        };
        let cost_line = field(lines.next(), "cost")?;
        let cost = CostModel::from_descriptor(&cost_line).ok_or_else(|| bad("unknown cost"))?;
        if lines.next() != Some("t,h,v") {
            return Err(bad("missing column header"));
        }
        let t_len = window as usize;
        let mut rows: Vec<Vec<f64>> = (0..=t_len).map(|t| vec![f64::NAN; t + 1]).collect();
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            let [t, h, v] = parts.as_slice() else {
                return Err(bad("bad row"));
            };
            let t: usize = t.parse().map_err(|_| bad("bad t"))?;
            let h: usize = h.parse().map_err(|_| bad("bad h"))?;
            let v = if *v == "inf" {
                f64::INFINITY
            } else {
                v.parse().map_err(|_| bad("bad value"))?
            };
            if t > t_len || h > t {
                return Err(bad("row outside table"));
            }
            rows[t][h] = v;
        }
        if rows.iter().any(|row| row.iter().any(|v| v.is_nan())) {
            return Err(bad("missing rows"));
        }
        Ok(Self {
            window,
            bias_map,
            cost,
            target,
            rows,
        })
    }
}

fn field(line: Option<&str>, key: &str) -> Result<String, EnforceError> {
    let line = line.ok_or_else(|| EnforceError::BadTableFormat(format!("missing {key}")))?;
    line.strip_prefix(&format!("{key},"))
        .map(str::to_string)
        .ok_or_else(|| EnforceError::BadTableFormat(format!("expected {key} line")))
}

/// 17-significant-digit rendering that round-trips `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
