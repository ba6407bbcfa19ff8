//! Process dynamics and trace simulation.
//!
//! The bias of the next coin is drawn from a dynamics function applied to
//! the history, and the outcome is then Bernoulli in that bias. Four
//! dynamics classes are supported: a constant coin, a finite Markov kernel
//! over labelled coins, additive outcome-driven drift, and a scripted bias
//! sequence for deterministic replay.
//!
//! All randomness flows through a seeded ChaCha8 generator so that equal
//! `(dynamics, horizon, seed)` triples reproduce traces bitwise. Parallel
//! trials derive independent streams with `seed_i = base_seed + trial_index`.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fairness::{BiasOutcomePair, Trace};

const PROB_SUM_TOL: f64 = 1e-9;

/// Errors from dynamics construction and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A probability vector had a negative entry or did not sum to 1.
    BadDistribution { what: &'static str, sum: f64 },
    /// Kernel/initial dimensions disagree with the number of coins.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// Markov coin biases must be distinct so labels are recoverable.
    DuplicateBias(f64),
    /// A bias fell outside `[0,1]`.
    InvalidBias(f64),
    /// A scripted dynamics ran out of biases.
    ScriptExhausted { have: usize, needed: usize },
    /// A trace bias does not match any coin of the kernel.
    UnknownBias(f64),
    /// The operation requires the Markov variant.
    NotMarkov,
    /// The chain has more than one closed communicating class.
    ReducibleChain,
    /// Power iteration failed to converge (periodic chain or cap too low).
    NoConvergence { iterations: u64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadDistribution { what, sum } => {
                write!(f, "{what} is not a probability vector (sum = {sum})")
            }
            Self::DimensionMismatch {
                what,
                expected,
                got,
            } => {
                write!(f, "{what}: expected {expected} entries, got {got}")
            }
            Self::DuplicateBias(p) => write!(f, "duplicate coin bias {p}"),
            Self::InvalidBias(p) => write!(f, "bias {p} outside [0,1]"),
            Self::ScriptExhausted { have, needed } => {
                write!(
                    f,
                    "scripted dynamics has {have} biases, step {needed} requested"
                )
            }
            Self::UnknownBias(p) => write!(f, "bias {p} does not match any coin label"),
            Self::NotMarkov => write!(f, "operation requires Markov dynamics"),
            Self::ReducibleChain => {
                write!(f, "chain is reducible: no unique stationary distribution")
            }
            Self::NoConvergence { iterations } => {
                write!(
                    f,
                    "no convergence after {iterations} iterations (chain periodic?)"
                )
            }
        }
    }
}

impl std::error::Error for SimError {}

fn check_distribution(what: &'static str, v: &[f64]) -> Result<(), SimError> {
    if v.iter().any(|&q| q < 0.0) {
        return Err(SimError::BadDistribution {
            what,
            sum: f64::NAN,
        });
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(SimError::BadDistribution { what, sum });
    }
    Ok(())
}

/// Finite Markov dynamics: `n` labelled coins and a kernel mapping the
/// current (coin, outcome) pair to a distribution over the next coin.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovDynamics {
    biases: Vec<f64>,
    /// Row-major `[k][x][k']`, flattened to `n * 2 * n`.
    kernel: Vec<f64>,
    initial: Vec<f64>,
}

impl MarkovDynamics {
    /// `kernel_rows[k][x]` is the distribution of the next coin after
    /// observing coin `k` with outcome `x`.
    pub fn new(
        biases: Vec<f64>,
        kernel_rows: Vec<[Vec<f64>; 2]>,
        initial: Vec<f64>,
    ) -> Result<Self, SimError> {
        let n = biases.len();
        if n == 0 {
            return Err(SimError::DimensionMismatch {
                what: "biases",
                expected: 1,
                got: 0,
            });
        }
        for (i, &p) in biases.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidBias(p));
            }
            if biases[..i].contains(&p) {
                return Err(SimError::DuplicateBias(p));
            }
        }
        if kernel_rows.len() != n {
            return Err(SimError::DimensionMismatch {
                what: "kernel rows",
                expected: n,
                got: kernel_rows.len(),
            });
        }
        if initial.len() != n {
            return Err(SimError::DimensionMismatch {
                what: "initial distribution",
                expected: n,
                got: initial.len(),
            });
        }
        check_distribution("initial distribution", &initial)?;
        let mut kernel = Vec::with_capacity(n * 2 * n);
        for rows in &kernel_rows {
            for row in rows {
                if row.len() != n {
                    return Err(SimError::DimensionMismatch {
                        what: "kernel row",
                        expected: n,
                        got: row.len(),
                    });
                }
                check_distribution("kernel row", row)?;
                kernel.extend_from_slice(row);
            }
        }
        Ok(Self {
            biases,
            kernel,
            initial,
        })
    }

    pub fn coin_count(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Distribution over the next coin after seeing coin `k` with outcome `x`.
    pub fn row(&self, k: usize, x: u8) -> &[f64] {
        let n = self.biases.len();
        let base = (k * 2 + x as usize) * n;
        &self.kernel[base..base + n]
    }

    /// Recovers the label of a coin from its bias (biases are distinct).
    pub fn label_of(&self, bias: f64) -> Result<usize, SimError> {
        self.biases
            .iter()
            .position(|&p| p == bias)
            .ok_or(SimError::UnknownBias(bias))
    }

    /// Labels of every pair in a trace produced by these dynamics.
    pub fn labels_for(&self, trace: &Trace) -> Result<Vec<usize>, SimError> {
        trace.iter().map(|w| self.label_of(w.bias)).collect()
    }

    /// Replaces the initial coin distribution (used to start runs in the
    /// chain's stationary coin marginal).
    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self, SimError> {
        if initial.len() != self.biases.len() {
            return Err(SimError::DimensionMismatch {
                what: "initial distribution",
                expected: self.biases.len(),
                got: initial.len(),
            });
        }
        check_distribution("initial distribution", &initial)?;
        self.initial = initial;
        Ok(self)
    }
}

/// The process law: how the next coin's bias depends on the history.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// One fixed unknown coin.
    Constant { p: f64 },
    /// Finite labelled Markov kernel.
    Markov(MarkovDynamics),
    /// `p_{t+1} = clamp(p_t + β(x_t))` with `β(0) = beta0`, `β(1) = beta1`.
    Additive { p1: f64, beta0: f64, beta1: f64 },
    /// Explicit bias sequence.
    Scripted { biases: Vec<f64> },
}

impl Dynamics {
    pub fn constant(p: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::InvalidBias(p));
        }
        Ok(Self::Constant { p })
    }

    pub fn additive(p1: f64, beta0: f64, beta1: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(SimError::InvalidBias(p1));
        }
        Ok(Self::Additive { p1, beta0, beta1 })
    }

    pub fn scripted(biases: Vec<f64>) -> Result<Self, SimError> {
        if let Some(&p) = biases.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(SimError::InvalidBias(p));
        }
        Ok(Self::Scripted { biases })
    }

    pub fn as_markov(&self) -> Result<&MarkovDynamics, SimError> {
        match self {
            Self::Markov(mk) => Ok(mk),
            _ => Err(SimError::NotMarkov),
        }
    }

    /// The bias of the next coin given the history, when it is determined
    /// (all variants except Markov, which randomizes over labels).
    fn next_bias(&self, history: &Trace, rng: &mut ChaCha8Rng) -> Result<f64, SimError> {
        match self {
            Self::Constant { p } => Ok(*p),
            Self::Additive { p1, beta0, beta1 } => match history.last() {
                None => Ok(*p1),
                Some(w) => {
                    let step = if w.is_heads() { *beta1 } else { *beta0 };
                    Ok((w.bias + step).clamp(0.0, 1.0))
                }
            },
            Self::Scripted { biases } => {
                let t = history.len();
                biases.get(t).copied().ok_or(SimError::ScriptExhausted {
                    have: biases.len(),
                    needed: t + 1,
                })
            }
            Self::Markov(mk) => {
                let dist = match history.last() {
                    None => mk.initial.as_slice(),
                    Some(w) => {
                        let k = mk.label_of(w.bias)?;
                        mk.row(k, w.outcome)
                    }
                };
                let label = sample_index(dist, rng);
                Ok(mk.biases[label])
            }
        }
    }
}

/// Draws an index from a finite distribution.
fn sample_index(dist: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &q) in dist.iter().enumerate() {
        acc += q;
        if u < acc {
            return i;
        }
    }
    dist.len() - 1
}

/// Draws the next bias from the dynamics and the outcome from the bias.
///
/// Deterministic given the generator state. Scripted dynamics error out
/// once their bias list is exhausted.
pub fn sample_next(
    dynamics: &Dynamics,
    history: &Trace,
    rng: &mut ChaCha8Rng,
) -> Result<BiasOutcomePair, SimError> {
    let bias = dynamics.next_bias(history, rng)?;
    let outcome = u8::from(rng.gen::<f64>() < bias);
    Ok(BiasOutcomePair { bias, outcome })
}

/// Simulates a length-`horizon` trace; bitwise reproducible for equal
/// `(dynamics, horizon, seed)`.
pub fn simulate(dynamics: &Dynamics, horizon: usize, seed: u64) -> Result<Trace, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::new();
    for _ in 0..horizon {
        let pair = sample_next(dynamics, &trace, &mut rng)?;
        trace.push(pair);
    }
    Ok(trace)
}

/// Simulates Markov dynamics, also returning the coin label at every step.
pub fn simulate_labeled(
    dynamics: &MarkovDynamics,
    horizon: usize,
    seed: u64,
) -> (Trace, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::new();
    let mut labels = Vec::with_capacity(horizon);
    let mut current: Option<(usize, u8)> = None;
    for _ in 0..horizon {
        let dist = match current {
            None => dynamics.initial.as_slice(),
            Some((k, x)) => dynamics.row(k, x),
        };
        let label = sample_index(dist, &mut rng);
        let bias = dynamics.biases[label];
        let outcome = u8::from(rng.gen::<f64>() < bias);
        trace.push(BiasOutcomePair { bias, outcome });
        labels.push(label);
        current = Some((label, outcome));
    }
    (trace, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::outcome_fairness;

    #[test]
    fn degenerate_coins() {
        let zero = Dynamics::constant(0.0).unwrap();
        let one = Dynamics::constant(1.0).unwrap();
        let t0 = simulate(&zero, 5, 3).unwrap();
        assert!(t0.iter().all(|w| w.outcome == 0 && w.bias == 0.0));
        let t1 = simulate(&one, 5, 3).unwrap();
        assert!(t1.iter().all(|w| w.outcome == 1));
    }

    #[test]
    fn additive_two_steps() {
        let dynamics = Dynamics::additive(0.5, -0.1, 0.1).unwrap();
        let mut history = Trace::new();
        history.push(BiasOutcomePair {
            bias: 0.5,
            outcome: 1,
        });
        history.push(BiasOutcomePair {
            bias: 0.6,
            outcome: 1,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = sample_next(&dynamics, &history, &mut rng).unwrap();
        assert!((next.bias - 0.7).abs() < 1e-15);
    }

    #[test]
    fn additive_clamps_at_bounds() {
        let dynamics = Dynamics::additive(0.95, -0.3, 0.3).unwrap();
        let trace = simulate(&dynamics, 200, 11).unwrap();
        // Replay: every step obeys p_{t+1} = clamp(p_t + beta(x_t)).
        for i in 1..trace.len() {
            let prev = trace.pairs()[i - 1];
            let step = if prev.is_heads() { 0.3 } else { -0.3 };
            let expected = (prev.bias + step).clamp(0.0, 1.0);
            assert_eq!(trace.pairs()[i].bias, expected);
        }
    }

    #[test]
    fn scripted_runs_out() {
        let dynamics = Dynamics::scripted(vec![0.1, 0.9]).unwrap();
        assert!(simulate(&dynamics, 2, 0).is_ok());
        assert_eq!(
            simulate(&dynamics, 3, 0).unwrap_err(),
            SimError::ScriptExhausted { have: 2, needed: 3 }
        );
    }

    #[test]
    fn empty_horizon_gives_empty_trace() {
        let dynamics = Dynamics::constant(0.5).unwrap();
        assert!(simulate(&dynamics, 0, 99).unwrap().is_empty());
    }

    #[test]
    fn simulation_is_reproducible() {
        let dynamics = Dynamics::additive(0.4, -0.05, 0.05).unwrap();
        let a = simulate(&dynamics, 500, 1234).unwrap();
        let b = simulate(&dynamics, 500, 1234).unwrap();
        assert_eq!(a, b);
        let c = simulate(&dynamics, 500, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn long_run_head_rate_near_bias() {
        let dynamics = Dynamics::constant(0.5).unwrap();
        let trace = simulate(&dynamics, 100_000, 7).unwrap();
        let rate = outcome_fairness(trace.pairs()).unwrap();
        assert!((rate - 0.5).abs() < 0.01, "rate = {rate}");
    }

    #[test]
    fn markov_validation() {
        // Row does not sum to 1.
        let bad = MarkovDynamics::new(
            vec![0.2, 0.8],
            vec![
                [vec![0.5, 0.4], vec![0.5, 0.5]],
                [vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
            vec![0.5, 0.5],
        );
        assert!(matches!(bad, Err(SimError::BadDistribution { .. })));

        let dup = MarkovDynamics::new(
            vec![0.2, 0.2],
            vec![
                [vec![0.5, 0.5], vec![0.5, 0.5]],
                [vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
            vec![0.5, 0.5],
        );
        assert!(matches!(dup, Err(SimError::DuplicateBias(_))));
    }

    #[test]
    fn point_mass_kernel_degenerates_to_constant() {
        // Every row is a point mass on coin 0, so the process never leaves
        // the first coin: biases are constant and outcomes Bernoulli(p_0).
        let mk = MarkovDynamics::new(
            vec![0.4, 0.9],
            vec![
                [vec![1.0, 0.0], vec![1.0, 0.0]],
                [vec![1.0, 0.0], vec![1.0, 0.0]],
            ],
            vec![1.0, 0.0],
        )
        .unwrap();
        let trace = simulate(&Dynamics::Markov(mk), 500, 13).unwrap();
        assert!(trace.iter().all(|w| w.bias == 0.4));
        let rate = outcome_fairness(trace.pairs()).unwrap();
        assert!((rate - 0.4).abs() < 0.08, "rate = {rate}");
    }

    #[test]
    fn labeled_simulation_matches_bias_lookup() {
        let mk = MarkovDynamics::new(
            vec![0.9, 0.1],
            vec![
                [vec![0.99, 0.01], vec![0.99, 0.01]],
                [vec![0.01, 0.99], vec![0.01, 0.99]],
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let (trace, labels) = simulate_labeled(&mk, 1000, 42);
        assert_eq!(trace.len(), labels.len());
        for (w, &k) in trace.iter().zip(&labels) {
            assert_eq!(w.bias, mk.biases()[k]);
        }
    }
}
