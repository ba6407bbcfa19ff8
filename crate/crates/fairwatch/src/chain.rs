//! Markov chain objects induced by finite labelled dynamics.
//!
//! A Markov dynamics over coins `p^(1..n)` encodes the bias-outcome process
//! as a two-phase chain: coin states `k` emit pair states `(k, x)` with
//! probability `η(p^(k), x) = p^x (1-p)^(1-x)`, and pair states select the
//! next coin through the kernel. Collapsing two phases into one yields the
//! pair-step chain over the `2n` pair states, which is what one simulated
//! time step traverses; stationary and mixing computations run on that
//! collapsed chain (the two-phase chain itself has period 2).

use crate::sim::{MarkovDynamics, SimError};

/// State of the two-phase induced chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainState {
    /// A coin about to be tossed.
    Coin(usize),
    /// A coin together with its toss outcome.
    Pair(usize, u8),
}

/// `η(p, x) = p^x (1-p)^(1-x)`: the probability of outcome `x` under bias `p`.
pub fn eta(p: f64, x: u8) -> f64 {
    if x == 1 {
        p
    } else {
        1.0 - p
    }
}

/// Default mixing-time tolerance.
pub const MIXING_TOL: f64 = 0.25;

const STATIONARY_CAP: u64 = 500_000;
const MIXING_CAP: u64 = 200_000;

/// The induced chain over `[n] ∪ [n]×{0,1}` with its transition matrix and
/// initial distribution.
#[derive(Debug, Clone)]
pub struct InducedChain {
    n: usize,
    biases: Vec<f64>,
    /// Row-major `(3n)×(3n)` over states ordered coins first, then pairs.
    matrix: Vec<f64>,
    initial: Vec<f64>,
}

/// Builds the induced chain of a Markov dynamics.
pub fn induced_chain(dynamics: &MarkovDynamics) -> InducedChain {
    let n = dynamics.coin_count();
    let s = 3 * n;
    let mut matrix = vec![0.0; s * s];
    // Coin k -> pair (k, x) with probability eta(p_k, x).
    for k in 0..n {
        let p = dynamics.biases()[k];
        for x in 0..2u8 {
            matrix[k * s + pair_index(n, k, x)] = eta(p, x);
        }
    }
    // Pair (k, x) -> coin k' through the kernel.
    for k in 0..n {
        for x in 0..2u8 {
            let row = dynamics.row(k, x);
            let from = pair_index(n, k, x);
            for (k2, &q) in row.iter().enumerate() {
                matrix[from * s + k2] = q;
            }
        }
    }
    let mut initial = vec![0.0; s];
    initial[..n].copy_from_slice(dynamics.initial());
    InducedChain {
        n,
        biases: dynamics.biases().to_vec(),
        matrix,
        initial,
    }
}

fn pair_index(n: usize, k: usize, x: u8) -> usize {
    n + 2 * k + x as usize
}

impl InducedChain {
    pub fn coin_count(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        3 * self.n
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn states(&self) -> Vec<ChainState> {
        let mut states: Vec<ChainState> = (0..self.n).map(ChainState::Coin).collect();
        for k in 0..self.n {
            states.push(ChainState::Pair(k, 0));
            states.push(ChainState::Pair(k, 1));
        }
        states
    }

    pub fn state_index(&self, state: ChainState) -> usize {
        match state {
            ChainState::Coin(k) => k,
            ChainState::Pair(k, x) => pair_index(self.n, k, x),
        }
    }

    pub fn transition(&self, from: ChainState, to: ChainState) -> f64 {
        let s = self.state_count();
        self.matrix[self.state_index(from) * s + self.state_index(to)]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn matrix_row(&self, from: ChainState) -> &[f64] {
        let s = self.state_count();
        let i = self.state_index(from);
        &self.matrix[i * s..(i + 1) * s]
    }

    /// One full time step restricted to pair states: the `2n×2n` matrix
    /// `M²` with rows/columns ordered `(0,0), (0,1), (1,0), (1,1), …`.
    pub fn pair_step_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let m = 2 * n;
        let mut step = vec![0.0; m * m];
        for k in 0..n {
            for x in 0..2u8 {
                let from_full = pair_index(n, k, x);
                let from = 2 * k + x as usize;
                for k2 in 0..n {
                    let to_coin = self.matrix[from_full * self.state_count() + k2];
                    for x2 in 0..2u8 {
                        let to = 2 * k2 + x2 as usize;
                        step[from * m + to] = to_coin * eta(self.biases[k2], x2);
                    }
                }
            }
        }
        step
    }

    /// Stationary distribution `π` over all `3n` states, `πM = π`, `Σπ = 1`.
    ///
    /// Computed by power iteration on the aperiodic pair-step chain and
    /// assembled back onto the two-phase state space (each phase carries
    /// half the mass). Reducible chains are rejected before iterating;
    /// periodic ones fail the iteration cap.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>, SimError> {
        let pair_pi = self.pair_stationary()?;
        let n = self.n;
        let mut pi = vec![0.0; 3 * n];
        for k in 0..n {
            for x in 0..2usize {
                let mass = pair_pi[2 * k + x];
                pi[pair_index(n, k, x as u8)] = 0.5 * mass;
                pi[k] += 0.5 * mass;
            }
        }
        // Verify the fixed point on the full matrix.
        let s = self.state_count();
        for j in 0..s {
            let image: f64 = (0..s).map(|i| pi[i] * self.matrix[i * s + j]).sum();
            if (image - pi[j]).abs() > 1e-10 {
                return Err(SimError::NoConvergence { iterations: 0 });
            }
        }
        Ok(pi)
    }

    /// Stationary distribution of the pair-step chain.
    pub fn pair_stationary(&self) -> Result<Vec<f64>, SimError> {
        let step = self.pair_step_matrix();
        let m = 2 * self.n;
        if closed_class_count(&step, m) != 1 {
            return Err(SimError::ReducibleChain);
        }
        let mut pi = vec![1.0 / m as f64; m];
        let mut next = vec![0.0; m];
        for iteration in 1..=STATIONARY_CAP {
            for item in next.iter_mut() {
                *item = 0.0;
            }
            for i in 0..m {
                let mass = pi[i];
                if mass == 0.0 {
                    continue;
                }
                for j in 0..m {
                    next[j] += mass * step[i * m + j];
                }
            }
            let diff: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if diff <= 1e-14 {
                let sum: f64 = pi.iter().sum();
                for q in pi.iter_mut() {
                    *q /= sum;
                }
                return Ok(pi);
            }
            if iteration == STATIONARY_CAP {
                return Err(SimError::NoConvergence {
                    iterations: STATIONARY_CAP,
                });
            }
        }
        unreachable!()
    }

    /// Stationary marginal over coin labels, suitable as an initial
    /// distribution for stationary-start runs.
    pub fn stationary_coin_marginal(&self) -> Result<Vec<f64>, SimError> {
        let pair_pi = self.pair_stationary()?;
        Ok((0..self.n)
            .map(|k| pair_pi[2 * k] + pair_pi[2 * k + 1])
            .collect())
    }

    /// Smallest `k` such that the pair-step chain satisfies
    /// `max_s TV(P^k(s,·), π) ≤ tol`. The default tolerance is [`MIXING_TOL`].
    ///
    /// Found by iterating matrix powers; total-variation distance to the
    /// stationary distribution is non-increasing in `k`, so the first hit
    /// is the minimum.
    pub fn estimate_mixing_time(&self, tol: f64) -> Result<u64, SimError> {
        assert!(tol > 0.0 && tol < 1.0, "tolerance must be in (0,1)");
        let pi = self.pair_stationary()?;
        let step = self.pair_step_matrix();
        let m = 2 * self.n;
        let mut power = step.clone();
        for k in 1..=MIXING_CAP {
            let worst = (0..m)
                .map(|s| {
                    0.5 * (0..m)
                        .map(|j| (power[s * m + j] - pi[j]).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            if worst <= tol {
                return Ok(k);
            }
            power = mat_mul(&power, &step, m);
        }
        Err(SimError::NoConvergence {
            iterations: MIXING_CAP,
        })
    }
}

fn mat_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    out
}

/// Number of closed communicating classes of a stochastic matrix.
///
/// A unique closed class (plus possibly transient states, e.g. pair states
/// whose outcome has probability zero) means a unique stationary
/// distribution exists.
fn closed_class_count(step: &[f64], m: usize) -> usize {
    // Reachability closure per state.
    let mut reach = vec![vec![false; m]; m];
    for (i, row) in reach.iter_mut().enumerate() {
        let mut stack = vec![i];
        row[i] = true;
        while let Some(s) = stack.pop() {
            for j in 0..m {
                if step[s * m + j] > 0.0 && !row[j] {
                    row[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    let mut representatives = Vec::new();
    for i in 0..m {
        // The communicating class of i is closed iff everything reachable
        // from i also reaches back.
        let closed = (0..m).all(|j| !reach[i][j] || reach[j][i]);
        if closed {
            let canon = (0..m).find(|&j| reach[i][j] && reach[j][i]).unwrap();
            if !representatives.contains(&canon) {
                representatives.push(canon);
            }
        }
    }
    representatives.len()
}
