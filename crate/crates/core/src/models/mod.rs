//! Preference, cooperative, incentive and influence network models, each with
//! a Markov chain whose column sums equal the model's own centrality.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub mod incentive;
pub mod influence;
pub mod preference;
pub mod shapley;

pub use incentive::{incentive_chain, IncentiveNetwork};
pub use influence::{
    ic_sample, influence_chain, influence_spread_exact, influence_spread_mc, spread_game, InfluenceChain,
    InfluenceInstance, InfluenceMode, SpreadEstimate,
};
pub use preference::{
    borda_weights, pagerank_preferences, preference_centrality, preference_chain,
    OrderedPartition, PreferenceProfile, WeightVector, DEFAULT_TIE_TOL,
};
pub use shapley::{
    glove_game, pagerank_utility_game, shapley_exact, shapley_monte_carlo, CharacteristicFunction,
    Coalition, FnGame,
    ShapleyEstimate, TabularGame,
};

/// Shapley values of a monotone game are non-negative; the subset sum can
/// still land a few ulps below zero, which a transition matrix rejects.
pub(crate) fn clear_rounding(m: &mut nalgebra::DMatrix<f64>) {
    for x in m.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
}

/// Samples are drawn in fixed-size blocks; blocks may run on any thread but
/// are merged in index order, so results do not depend on scheduling.
const BLOCK: u64 = 1024;

/// Generator for sample `i`: the seed picks the key, the sample index the
/// stream, so every sample is reproducible on its own.
pub(crate) fn sample_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

pub(crate) fn in_blocks<T, F>(samples: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(samples)))
        .collect()
}

/// Welford accumulator. A constant stream has an exact mean and zero
/// variance, which keeps estimates of deterministic games exact.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * (other.count as f64 / total as f64);
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64 / total as f64);
        self.count = total;
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean; zero for fewer than two samples.
    pub(crate) fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let variance = (self.m2 / (self.count - 1) as f64).max(0.0);
        (variance / self.count as f64).sqrt()
    }
}
