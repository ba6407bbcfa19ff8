//! Concentration bounds shared by the register monitors.
//!
//! Two error radii around a running mean of `[0,1]`-valued observations:
//!
//! - pointwise (Hoeffding): `ε_t = √(ln(2/δ) / 2t)`, a fixed-time
//!   confidence interval;
//! - uniform (stitched): `ε_t = √(1.1·(2·ln(π·ln t / √6) + ln(2/δ)) / t)`,
//!   a confidence sequence valid at all `t ≥ 2` simultaneously.
//!
//! The stitching constants are taken as given; they are not re-derived
//! here. For `t < 2` the uniform radius is `+∞`, which clamps to the
//! trivial verdict `[0,1]`.

use std::f64::consts::PI;
use std::fmt;

/// Domain errors for the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundError {
    DeltaOutOfRange(f64),
    ZeroCount,
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DeltaOutOfRange(d) => write!(f, "delta {d} outside (0,1)"),
            Self::ZeroCount => write!(f, "bound undefined for t = 0"),
        }
    }
}

impl std::error::Error for BoundError {}

fn check(t: u64, delta: f64) -> Result<(), BoundError> {
    if delta <= 0.0 || delta >= 1.0 {
        return Err(BoundError::DeltaOutOfRange(delta));
    }
    if t == 0 {
        return Err(BoundError::ZeroCount);
    }
    Ok(())
}

/// Pointwise radius `√(ln(2/δ) / 2t)`.
pub fn hoeffding_pointwise_eps(t: u64, delta: f64) -> Result<f64, BoundError> {
    check(t, delta)?;
    Ok(((2.0 / delta).ln() / (2.0 * t as f64)).sqrt())
}

/// Uniform (time-stitched) radius
/// `√(1.1·(2·ln(π·ln t / √6) + ln(2/δ)) / t)`.
///
/// Returns `+∞` for `t < 2`, where `ln ln t` is not usable; callers clamp
/// to the trivial interval.
pub fn stitched_uniform_eps(t: u64, delta: f64) -> Result<f64, BoundError> {
    if delta <= 0.0 || delta >= 1.0 {
        return Err(BoundError::DeltaOutOfRange(delta));
    }
    if t < 2 {
        return Ok(f64::INFINITY);
    }
    let tf = t as f64;
    let inner = 2.0 * (PI * tf.ln() / 6.0_f64.sqrt()).ln() + (2.0 / delta).ln();
    Ok((1.1 * inner / tf).sqrt())
}
