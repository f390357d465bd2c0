//! Cooperative games over players `0..n` and their Shapley values.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{in_blocks, sample_rng, RunningStats};
use crate::pagerank::PprMatrix;
use crate::{Error, Result};

/// A coalition as a bitmask: bit `i` set means player `i` is in.
pub type Coalition = u64;

/// Exact Shapley values tabulate all `2^n` coalitions.
pub const MAX_EXACT_PLAYERS: usize = 10;
/// Largest game a bitmask coalition can describe.
pub const MAX_PLAYERS: usize = 64;
/// Largest game [`TabularGame`] will store.
pub const MAX_TABLE_PLAYERS: usize = 20;

pub trait CharacteristicFunction: Sync {
    fn players(&self) -> usize;
    fn value(&self, coalition: Coalition) -> f64;
}

/// A game backed by a closure.
pub struct FnGame<F> {
    n: usize,
    f: F,
}

impl<F: Fn(Coalition) -> f64 + Sync> FnGame<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(Coalition) -> f64 + Sync> CharacteristicFunction for FnGame<F> {
    fn players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: Coalition) -> f64 {
        (self.f)(coalition)
    }
}

/// A game stored as a table indexed by coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularGame {
    n: usize,
    values: Vec<f64>,
}

impl TabularGame {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_TABLE_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_TABLE_PLAYERS });
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: values.len() });
        }
        Ok(Self { n, values })
    }

    pub fn tabulate(game: &impl CharacteristicFunction) -> Result<Self> {
        let n = game.players();
        if n > MAX_TABLE_PLAYERS {
            return Err(Error::TooManyPlayers { n, max: MAX_TABLE_PLAYERS });
        }
        Ok(Self { n, values: (0..1u64 << n).map(|s| game.value(s)).collect() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl CharacteristicFunction for TabularGame {
    fn players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: Coalition) -> f64 {
        self.values[coalition as usize]
    }
}

/// Glove game: `τ(S) = min(|S ∩ left|, |S ∩ right|)`.
pub fn glove_game(n: usize, left: Coalition, right: Coalition) -> Result<TabularGame> {
    if left & right != 0 {
        return Err(Error::InvalidParameter("a player cannot hold both gloves".into()));
    }
    if n > MAX_TABLE_PLAYERS || (n < 64 && (left | right) >> n != 0) {
        return Err(Error::InvalidParameter(format!("glove holders outside 0..{n}")));
    }
    let values = (0..1u64 << n)
        .map(|s| (s & left).count_ones().min((s & right).count_ones()) as f64)
        .collect();
    TabularGame::new(n, values)
}

/// `τ(S) = Σ_{u,v∈S} PPR[u, v]`.
pub fn pagerank_utility_game(ppr: &PprMatrix) -> Result<FnGame<impl Fn(Coalition) -> f64 + Sync + '_>> {
    let n = ppr.n();
    if n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
    }
    Ok(FnGame::new(n, move |s| {
        let members: Vec<usize> = (0..n).filter(|&i| s >> i & 1 == 1).collect();
        let mut total = 0.0;
        for &u in &members {
            for &v in &members {
                total += ppr.get(u, v);
            }
        }
        total
    }))
}

/// `|S|! (n−|S|−1)! / n!` written as `1 / (n · C(n−1, |S|))`.
fn subset_weights(n: usize) -> Vec<f64> {
    let mut binom = 1.0;
    (0..n)
        .map(|s| {
            if s > 0 {
                binom = binom * (n - s) as f64 / s as f64;
            }
            1.0 / (n as f64 * binom)
        })
        .collect()
}

/// Exact Shapley values via the subset formula
/// `φ_i = Σ_{S ∌ i} |S|!(n−|S|−1)!/n! · (τ(S ∪ i) − τ(S))`.
pub fn shapley_exact(game: &impl CharacteristicFunction) -> Result<Vec<f64>> {
    let n = game.players();
    if n > MAX_EXACT_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_EXACT_PLAYERS });
    }
    let table = TabularGame::tabulate(game)?;
    let weights = subset_weights(n);
    let phi = (0..n)
        .map(|i| {
            let bit = 1u64 << i;
            let mut total = 0.0;
            for s in (0..1u64 << n).filter(|s| s & bit == 0) {
                let marginal = table.value(s | bit) - table.value(s);
                if marginal != 0.0 {
                    total += weights[s.count_ones() as usize] * marginal;
                }
            }
            total
        })
        .collect();
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapleyEstimate {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// Permutation-sampling estimate. Each sample draws one uniform arrival
/// order and records every player's marginal contribution. The raw mean is
/// reported; no rescaling to enforce efficiency.
pub fn shapley_monte_carlo(
    game: &impl CharacteristicFunction,
    samples: u64,
    seed: u64,
) -> Result<ShapleyEstimate> {
    let n = game.players();
    if n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers { n, max: MAX_PLAYERS });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let blocks = in_blocks(samples, |range| {
        let mut stats = vec![RunningStats::default(); n];
        let mut order: Vec<usize> = (0..n).collect();
        for i in range {
            let mut rng = sample_rng(seed, i);
            order.sort_unstable();
            order.shuffle(&mut rng);
            let mut coalition: Coalition = 0;
            let mut before = game.value(0);
            for &p in &order {
                coalition |= 1 << p;
                let after = game.value(coalition);
                stats[p].push(after - before);
                before = after;
            }
        }
        stats
    });
    let mut stats = vec![RunningStats::default(); n];
    for block in &blocks {
        for (total, part) in stats.iter_mut().zip(block) {
            total.merge(part);
        }
    }
    Ok(ShapleyEstimate {
        values: stats.iter().map(RunningStats::mean).collect(),
        std_errors: stats.iter().map(RunningStats::std_error).collect(),
        samples,
        seed,
    })
}
