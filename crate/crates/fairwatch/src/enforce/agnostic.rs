//! Process-agnostic enforcers: no knowledge of the dynamics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::enforce::EnforceError;
use crate::fairness::{BiasOutcomePair, TargetIntervalSchedule};

/// Bias-fairness enforcer that overwrites every coin with a fixed bias
/// `p∩` from the intersection of the target intervals, making the average
/// bias exactly `p∩` at every time.
#[derive(Debug, Clone, Copy)]
pub struct ConstantBiasEnforcer {
    p_cap: f64,
}

impl ConstantBiasEnforcer {
    /// Picks the midpoint of `∩_t I_t`; errors when the schedule is
    /// infeasible.
    pub fn new(schedule: &TargetIntervalSchedule) -> Result<Self, EnforceError> {
        let cap = schedule
            .intersection()
            .ok_or(EnforceError::EmptyIntersection)?;
        Ok(Self {
            p_cap: cap.midpoint(),
        })
    }

    pub fn p_cap(&self) -> f64 {
        self.p_cap
    }

    /// Overwrites the bias; the outcome is redrawn under the new bias so it
    /// stays consistent with the coin actually tossed.
    pub fn step(&self, _raw: BiasOutcomePair, rng: &mut ChaCha8Rng) -> BiasOutcomePair {
        BiasOutcomePair {
            bias: self.p_cap,
            outcome: u8::from(rng.gen::<f64>() < self.p_cap),
        }
    }
}

/// Outcome-fairness enforcer around a threshold `p`: emit heads when the
/// running head rate (including the raw toss) is at or below `p`, tails
/// otherwise. Keeps `φ_O` inside `[max(0, p-1/t), min(1, p+1/t)]` at every
/// step, deterministically.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdOutcomeEnforcer {
    p: f64,
    heads: u64,
    t: u64,
}

impl ThresholdOutcomeEnforcer {
    /// Validates that the `±1/t` band around `p` sits inside every
    /// scheduled target interval.
    pub fn new(p: f64, schedule: &TargetIntervalSchedule) -> Result<Self, EnforceError> {
        for (t, interval) in schedule.overrides() {
            if t == 0 {
                continue;
            }
            let band_lo = (p - 1.0 / t as f64).max(0.0);
            let band_hi = (p + 1.0 / t as f64).min(1.0);
            if band_lo < interval.lo() || band_hi > interval.hi() {
                return Err(EnforceError::BandOutsideSchedule { t });
            }
        }
        Ok(Self { p, heads: 0, t: 0 })
    }

    /// Threshold enforcement with no scheduled constraints.
    pub fn free(p: f64) -> Self {
        Self { p, heads: 0, t: 0 }
    }

    /// Feeds one raw outcome and returns the enforced outcome.
    pub fn step(&mut self, raw: u8) -> u8 {
        debug_assert!(raw <= 1);
        self.t += 1;
        let rate_with_raw = (self.heads + raw as u64) as f64 / self.t as f64;
        let enforced = u8::from(rate_with_raw <= self.p);
        self.heads += enforced as u64;
        enforced
    }

    /// Head rate of the enforced stream so far.
    pub fn enforced_rate(&self) -> Option<f64> {
        (self.t > 0).then(|| self.heads as f64 / self.t as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::UnitInterval;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn constant_bias_picks_midpoint_of_intersection() {
        let schedule = TargetIntervalSchedule::trivial()
            .with_override(1, UnitInterval::new(0.3, 0.6).unwrap())
            .with_override(2, UnitInterval::new(0.4, 0.7).unwrap());
        let enforcer = ConstantBiasEnforcer::new(&schedule).unwrap();
        assert!((enforcer.p_cap() - 0.5).abs() < 1e-15);

        let uniform = TargetIntervalSchedule::trivial()
            .with_override(3, UnitInterval::new(0.4, 0.6).unwrap());
        assert!((ConstantBiasEnforcer::new(&uniform).unwrap().p_cap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disjoint_schedule_is_a_construction_error() {
        let schedule = TargetIntervalSchedule::trivial()
            .with_override(1, UnitInterval::new(0.1, 0.2).unwrap())
            .with_override(2, UnitInterval::new(0.8, 0.9).unwrap());
        assert_eq!(
            ConstantBiasEnforcer::new(&schedule).err(),
            Some(EnforceError::EmptyIntersection)
        );
    }

    #[test]
    fn constant_bias_output_is_always_p_cap() {
        let schedule = TargetIntervalSchedule::trivial()
            .with_override(5, UnitInterval::new(0.4, 0.6).unwrap());
        let enforcer = ConstantBiasEnforcer::new(&schedule).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let raw = BiasOutcomePair {
                bias: 0.99,
                outcome: 1,
            };
            let out = enforcer.step(raw, &mut rng);
            assert_eq!(out.bias, 0.5);
            assert!(out.outcome <= 1);
        }
    }

    #[test]
    fn threshold_step_through_all_tails() {
        let mut e = ThresholdOutcomeEnforcer::free(0.5);
        let enforced: Vec<u8> = [0, 0, 0, 0].iter().map(|&x| e.step(x)).collect();
        assert_eq!(enforced, vec![1, 1, 0, 1]);
    }

    #[test]
    fn threshold_keeps_compliant_extremes() {
        let mut ones = ThresholdOutcomeEnforcer::free(1.0);
        for _ in 0..10 {
            assert_eq!(ones.step(1), 1);
        }
        assert_eq!(ones.enforced_rate(), Some(1.0));
    }

    #[test]
    fn threshold_band_holds_on_random_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for p in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let mut e = ThresholdOutcomeEnforcer::free(p);
            let mut heads = 0u64;
            for t in 1..=200u64 {
                let raw = u8::from(rng.gen::<f64>() < 0.5);
                heads += e.step(raw) as u64;
                let rate = heads as f64 / t as f64;
                let lo = (p - 1.0 / t as f64).max(0.0);
                let hi = (p + 1.0 / t as f64).min(1.0);
                assert!(rate >= lo && rate <= hi, "p={p} t={t} rate={rate}");
            }
        }
    }

    #[test]
    fn band_feasibility_checked_against_schedule() {
        let tight = TargetIntervalSchedule::trivial()
            .with_override(2, UnitInterval::new(0.45, 0.55).unwrap());
        assert_eq!(
            ThresholdOutcomeEnforcer::new(0.5, &tight).err(),
            Some(EnforceError::BandOutsideSchedule { t: 2 })
        );
        let loose = TargetIntervalSchedule::trivial()
            .with_override(100, UnitInterval::new(0.45, 0.55).unwrap());
        assert!(ThresholdOutcomeEnforcer::new(0.5, &loose).is_ok());
    }
}
