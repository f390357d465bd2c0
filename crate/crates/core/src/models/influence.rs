//! Independent cascade influence: spread, sampling and the social-influence
//! chain.
//!
//! A cascade's final set has the same law as the set reachable from the
//! seeds in a random "live-edge" world, where each edge is kept
//! independently with its probability. Exact quantities enumerate worlds;
//! Monte Carlo ones sample them.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::shapley::{shapley_exact, TabularGame, MAX_EXACT_PLAYERS};
use super::{clear_rounding, in_blocks, sample_rng, RunningStats};
use crate::graph::WeightedGraph;
use crate::markov::MarkovChain;
use crate::{ensure_dense, Error, Result};

/// Edges with `0 < p < 1` that exact enumeration accepts.
pub const MAX_UNCERTAIN_EDGES: usize = 20;
/// Node limit for the exact influence chain.
pub const MAX_EXACT_CHAIN_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceInstance {
    labels: Vec<String>,
    /// Out-edges `(target, p)` sorted by target; self-loops dropped.
    out: Vec<Vec<(usize, f64)>>,
}

impl InfluenceInstance {
    /// Reads edge weights as activation probabilities.
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        let mut out = vec![Vec::new(); g.n()];
        for (u, row) in out.iter_mut().enumerate() {
            for &(v, p) in g.neighbors(u) {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidProbability(p));
                }
                if u != v {
                    row.push((v, p));
                }
            }
        }
        Ok(Self { labels: g.labels().to_vec(), out })
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    fn uncertain_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges().filter(|&(_, _, p)| p > 0.0 && p < 1.0).collect()
    }

    fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(v, p)| (u, v, p)))
    }

    fn check_set(&self, set: &[usize]) -> Result<Vec<bool>> {
        let n = self.n();
        let mut active = vec![false; n];
        for &u in set {
            if u >= n {
                return Err(Error::NodeOutOfRange { index: u, n });
            }
            active[u] = true;
        }
        Ok(active)
    }

    /// Live-edge worlds with non-zero probability, each as a per-edge
    /// liveness mask over `edges()` order.
    fn worlds(&self) -> Result<Worlds> {
        let uncertain = self.uncertain_edges();
        if uncertain.len() > MAX_UNCERTAIN_EDGES {
            return Err(Error::TooManyEdges { edges: uncertain.len(), max: MAX_UNCERTAIN_EDGES });
        }
        let certain: Vec<(usize, usize)> =
            self.edges().filter(|&(_, _, p)| p >= 1.0).map(|(u, v, _)| (u, v)).collect();
        Ok(Worlds { n: self.n(), certain, uncertain })
    }
}

struct Worlds {
    n: usize,
    certain: Vec<(usize, usize)>,
    uncertain: Vec<(usize, usize, f64)>,
}

impl Worlds {
    /// Calls `f(probability, adjacency)` for every world in mask order.
    fn for_each(&self, mut f: impl FnMut(f64, &[Vec<usize>])) {
        let k = self.uncertain.len();
        let mut adj = vec![Vec::new(); self.n];
        for mask in 0..1u64 << k {
            adj.iter_mut().for_each(Vec::clear);
            for &(u, v) in &self.certain {
                adj[u].push(v);
            }
            let mut prob = 1.0;
            for (j, &(u, v, p)) in self.uncertain.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    prob *= p;
                    adj[u].push(v);
                } else {
                    prob *= 1.0 - p;
                }
            }
            f(prob, &adj);
        }
    }
}

/// Marks everything reachable from the already-marked nodes.
fn close_forward(adj: &[Vec<usize>], marked: &mut [bool]) {
    let mut queue: VecDeque<usize> = (0..marked.len()).filter(|&u| marked[u]).collect();
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !marked[v] {
                marked[v] = true;
                queue.push_back(v);
            }
        }
    }
}

fn cascade(inst: &InfluenceInstance, active: &mut [bool], rng: &mut ChaCha8Rng) {
    let mut frontier: Vec<usize> = (0..active.len()).filter(|&u| active[u]).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, p) in &inst.out[u] {
                if !active[v] && rng.random::<f64>() < p {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
}

/// One independent cascade from `set`: each newly active node gets a single
/// chance to activate each inactive out-neighbour. Returns the final set in
/// index order.
pub fn ic_sample(inst: &InfluenceInstance, set: &[usize], seed: u64) -> Result<Vec<usize>> {
    let mut active = inst.check_set(set)?;
    cascade(inst, &mut active, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..inst.n()).filter(|&u| active[u]).collect())
}

/// Expected final-set size by enumerating live-edge worlds.
pub fn influence_spread_exact(inst: &InfluenceInstance, set: &[usize]) -> Result<f64> {
    let seeds = inst.check_set(set)?;
    let worlds = inst.worlds()?;
    let mut spread = 0.0;
    worlds.for_each(|prob, adj| {
        if prob > 0.0 {
            let mut reached = seeds.clone();
            close_forward(adj, &mut reached);
            spread += prob * reached.iter().filter(|&&x| x).count() as f64;
        }
    });
    Ok(spread)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

pub fn influence_spread_mc(
    inst: &InfluenceInstance,
    set: &[usize],
    samples: u64,
    seed: u64,
) -> Result<SpreadEstimate> {
    let seeds = inst.check_set(set)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let blocks = in_blocks(samples, |range| {
        let mut stats = RunningStats::default();
        for i in range {
            let mut active = seeds.clone();
            cascade(inst, &mut active, &mut sample_rng(seed, i));
            stats.push(active.iter().filter(|&&x| x).count() as f64);
        }
        stats
    });
    let mut stats = RunningStats::default();
    blocks.iter().for_each(|b| stats.merge(b));
    Ok(SpreadEstimate { mean: stats.mean(), std_error: stats.std_error(), samples, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfluenceMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceChain {
    pub chain: MarkovChain,
    /// Shapley value of the spread game.
    pub centrality: Vec<f64>,
    /// Standard errors of the centrality; `None` in exact mode.
    pub std_errors: Option<Vec<f64>>,
}

/// Row `v` is the Shapley value of `σ_v(S) = P[v is activated from S]`.
///
/// Exact mode tabulates, for each `v`, the distribution of the set `R_v` of
/// nodes that reach `v` in a live-edge world; then `σ_v(S) = P[R_v ∩ S ≠ ∅]`.
/// Monte Carlo mode samples a world and an arrival order together: the
/// marginal contribution to `σ_v` falls entirely on the first arrival in
/// `R_v`.
pub fn influence_chain(inst: &InfluenceInstance, mode: InfluenceMode) -> Result<InfluenceChain> {
    match mode {
        InfluenceMode::Exact => chain_exact(inst),
        InfluenceMode::MonteCarlo { samples, seed } => chain_monte_carlo(inst, samples, seed),
    }
}

/// `σ_v(S)` for every node `v` and coalition `S`, via the distribution of
/// the set `R_v` of nodes that reach `v` in a live-edge world.
fn activation_tables(inst: &InfluenceInstance, max_nodes: usize) -> Result<Vec<Vec<f64>>> {
    let n = inst.n();
    if n > max_nodes {
        return Err(Error::TooLarge(format!(
            "{n} nodes exceeds the exact limit {max_nodes}; use Monte Carlo mode"
        )));
    }
    let worlds = inst.worlds().map_err(|e| Error::TooLarge(e.to_string()))?;
    let size = 1usize << n;
    // reach[v][R] = P[R_v = R]
    let mut reach = vec![vec![0.0; size]; n];
    worlds.for_each(|prob, adj| {
        if prob == 0.0 {
            return;
        }
        let mut sources = vec![0usize; n];
        for u in 0..n {
            let mut marked = vec![false; n];
            marked[u] = true;
            close_forward(adj, &mut marked);
            for v in (0..n).filter(|&v| marked[v]) {
                sources[v] |= 1 << u;
            }
        }
        for v in 0..n {
            reach[v][sources[v]] += prob;
        }
    });

    let full = size - 1;
    Ok(reach
        .into_iter()
        .map(|mut miss| {
            // subset sums turn P[R_v = R] into P[R_v ⊆ S]
            for bit in 0..n {
                for s in 0..size {
                    if s >> bit & 1 == 1 {
                        miss[s] += miss[s ^ (1 << bit)];
                    }
                }
            }
            let mut values: Vec<f64> = (0..size).map(|s| 1.0 - miss[full ^ s]).collect();
            values[0] = 0.0;
            values
        })
        .collect())
}

/// The influence-spread game `σ(S)` tabulated exactly.
pub fn spread_game(inst: &InfluenceInstance) -> Result<TabularGame> {
    let n = inst.n();
    let mut spread = vec![0.0; 1 << n];
    for values in activation_tables(inst, MAX_EXACT_PLAYERS)? {
        for (total, x) in spread.iter_mut().zip(&values) {
            *total += x;
        }
    }
    TabularGame::new(n, spread)
}

fn chain_exact(inst: &InfluenceInstance) -> Result<InfluenceChain> {
    let n = inst.n();
    let tables = activation_tables(inst, MAX_EXACT_CHAIN_NODES)?;
    let mut spread = vec![0.0; 1 << n];
    let mut m = DMatrix::zeros(n, n);
    for (v, values) in tables.into_iter().enumerate() {
        for (total, x) in spread.iter_mut().zip(&values) {
            *total += x;
        }
        let phi = shapley_exact(&TabularGame::new(n, values)?)?;
        for (u, x) in phi.into_iter().enumerate() {
            m[(v, u)] = x;
        }
    }
    clear_rounding(&mut m);
    let centrality = shapley_exact(&TabularGame::new(n, spread)?)?;
    Ok(InfluenceChain { chain: MarkovChain::new(m)?, centrality, std_errors: None })
}

fn chain_monte_carlo(inst: &InfluenceInstance, samples: u64, seed: u64) -> Result<InfluenceChain> {
    let n = inst.n();
    ensure_dense(n)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let edges: Vec<(usize, usize, f64)> = inst.edges().collect();
    let blocks = in_blocks(samples, |range| {
        let mut counts = vec![0u64; n * n];
        let mut stats = vec![RunningStats::default(); n];
        let mut order: Vec<usize> = (0..n).collect();
        let mut adj = vec![Vec::new(); n];
        let mut owner = vec![usize::MAX; n];
        let mut claimed = vec![0u64; n];
        for i in range {
            let mut rng = sample_rng(seed, i);
            adj.iter_mut().for_each(Vec::clear);
            for &(u, v, p) in &edges {
                if rng.random::<f64>() < p {
                    adj[u].push(v);
                }
            }
            order.sort_unstable();
            order.shuffle(&mut rng);
            owner.fill(usize::MAX);
            claimed.fill(0);
            // Each arrival claims every unclaimed node it reaches. A node
            // claimed earlier already had its descendants claimed, so the
            // search stops there.
            for &u in &order {
                if owner[u] != usize::MAX {
                    continue;
                }
                owner[u] = u;
                claimed[u] += 1;
                let mut stack = vec![u];
                while let Some(x) = stack.pop() {
                    for &y in &adj[x] {
                        if owner[y] == usize::MAX {
                            owner[y] = u;
                            claimed[u] += 1;
                            stack.push(y);
                        }
                    }
                }
            }
            for v in 0..n {
                counts[v * n + owner[v]] += 1;
            }
            for (s, &c) in stats.iter_mut().zip(&claimed) {
                s.push(c as f64);
            }
        }
        (counts, stats)
    });
    let mut counts = vec![0u64; n * n];
    let mut stats = vec![RunningStats::default(); n];
    for (c, s) in &blocks {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        stats.iter_mut().zip(s).for_each(|(a, b)| a.merge(b));
    }
    let m = DMatrix::from_fn(n, n, |v, u| counts[v * n + u] as f64 / samples as f64);
    let chain = MarkovChain::new(m)?;
    Ok(InfluenceChain {
        centrality: chain.column_sums(),
        std_errors: Some(stats.iter().map(RunningStats::std_error).collect()),
        chain,
    })
}
