//! Rankings with ties, positional weight vectors and the weighted preference
//! chain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;
use crate::markov::MarkovChain;
use crate::pagerank::ppr_matrix;
use crate::{Error, Result};

pub const DEFAULT_TIE_TOL: f64 = 1e-9;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A ranking of `0..n` as a sequence of tied blocks, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct OrderedPartition {
    blocks: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut rank = vec![usize::MAX; n];
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {i} is empty")));
            }
            for &v in block {
                if v >= n {
                    return Err(Error::InvalidPartition(format!(
                        "node {v} outside 0..{n}"
                    )));
                }
                if rank[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("node {v} appears twice")));
                }
                rank[v] = i + 1;
            }
        }
        Ok(Self { blocks, rank })
    }

    /// All-singleton ranking.
    pub fn strict(order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&v| vec![v]).collect())
    }

    pub fn n(&self) -> usize {
        self.rank.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// 1-based index of the block holding `v`.
    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub fn is_strict(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    /// Weight each node receives: the mean of the `w` entries spanned by its
    /// block.
    fn spread(&self, w: &WeightVector) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        let mut start = 0;
        for block in &self.blocks {
            let span = &w.0[start..start + block.len()];
            let share = if block.len() == 1 {
                span[0]
            } else {
                span.iter().sum::<f64>() / block.len() as f64
            };
            for &v in block {
                out[v] = share;
            }
            start += block.len();
        }
        out
    }
}

impl TryFrom<Vec<Vec<usize>>> for OrderedPartition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(blocks)
    }
}

impl From<OrderedPartition> for Vec<Vec<usize>> {
    fn from(p: OrderedPartition) -> Self {
        p.blocks
    }
}

/// One ranking per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<OrderedPartition>", into = "Vec<OrderedPartition>")]
pub struct PreferenceProfile(Vec<OrderedPartition>);

impl PreferenceProfile {
    pub fn new(rankings: Vec<OrderedPartition>) -> Result<Self> {
        let n = rankings.len();
        for r in &rankings {
            if r.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.n() });
            }
        }
        Ok(Self(rankings))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn rankings(&self) -> &[OrderedPartition] {
        &self.0
    }

    pub fn ranking(&self, u: usize) -> &OrderedPartition {
        &self.0[u]
    }
}

impl TryFrom<Vec<OrderedPartition>> for PreferenceProfile {
    type Error = Error;

    fn try_from(rankings: Vec<OrderedPartition>) -> Result<Self> {
        Self::new(rankings)
    }
}

impl From<PreferenceProfile> for Vec<OrderedPartition> {
    fn from(p: PreferenceProfile) -> Self {
        p.0
    }
}

/// Non-negative, non-increasing weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(i) = w.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeights(format!("entry {i} is {}", w[i])));
        }
        if let Some(i) = w.windows(2).position(|p| p[1] > p[0]) {
            return Err(Error::InvalidWeights(format!("entry {} exceeds entry {i}", i + 1)));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Normalized Borda count `[n, n−1, …, 1] / (n(n+1)/2)`.
pub fn borda_weights(n: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("borda weights need n >= 1".into()));
    }
    let total = (n * (n + 1)) as f64 / 2.0;
    Ok(WeightVector((1..=n).rev().map(|k| k as f64 / total).collect()))
}

fn check_sizes(profile: &PreferenceProfile, w: &WeightVector) -> Result<()> {
    if profile.n() != w.len() {
        return Err(Error::DimensionMismatch { expected: profile.n(), found: w.len() });
    }
    Ok(())
}

/// Row `u` places `w[k]` on the node `u` ranks `k`-th; tied blocks share the
/// mean of their positions.
pub fn preference_chain(profile: &PreferenceProfile, w: &WeightVector) -> Result<MarkovChain> {
    check_sizes(profile, w)?;
    let n = profile.n();
    let mut m = DMatrix::zeros(n, n);
    for (u, ranking) in profile.rankings().iter().enumerate() {
        for (v, x) in ranking.spread(w).into_iter().enumerate() {
            m[(u, v)] = x;
        }
    }
    MarkovChain::new(m)
}

/// `centrality[v] = Σ_u w[π_u(v)]`.
pub fn preference_centrality(profile: &PreferenceProfile, w: &WeightVector) -> Result<Vec<f64>> {
    check_sizes(profile, w)?;
    let mut c = vec![0.0; profile.n()];
    for ranking in profile.rankings() {
        for (v, x) in ranking.spread(w).into_iter().enumerate() {
            c[v] += x;
        }
    }
    Ok(c)
}

/// Each node ranks everyone by its personalized PageRank, descending.
/// A node joins the current block when its value is within `tie_tol` of the
/// block's first value.
pub fn pagerank_preferences(g: &WeightedGraph, alpha: f64, tie_tol: f64) -> Result<PreferenceProfile> {
    if tie_tol.is_nan() || tie_tol < 0.0 {
        return Err(Error::InvalidParameter(format!("tie tolerance {tie_tol}")));
    }
    let ppr = ppr_matrix(g, alpha)?;
    let n = g.n();
    let rankings = (0..n)
        .map(|u| {
            let row = ppr.row(u);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let mut blocks: Vec<Vec<usize>> = Vec::new();
            let mut head = f64::INFINITY;
            for v in order {
                match blocks.last_mut() {
                    Some(block) if head - row[v] <= tie_tol => block.push(v),
                    _ => {
                        head = row[v];
                        blocks.push(vec![v]);
                    }
                }
            }
            OrderedPartition::new(blocks)
        })
        .collect::<Result<Vec<_>>>()?;
    PreferenceProfile::new(rankings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strict_profile(orders: &[&[usize]]) -> PreferenceProfile {
        PreferenceProfile::new(orders.iter().map(|o| OrderedPartition::strict(o).unwrap()).collect())
            .unwrap()
    }

    #[test]
    fn borda_values() {
        assert_eq!(borda_weights(1).unwrap().as_slice(), &[1.0]);
        let w2 = borda_weights(2).unwrap();
        assert!((w2.as_slice()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w2.as_slice()[1] - 1.0 / 3.0).abs() < 1e-15);
        let w3 = borda_weights(3).unwrap();
        for (a, b) in w3.as_slice().iter().zip([0.5, 1.0 / 3.0, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(borda_weights(0).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.4, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.2, -0.2]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(OrderedPartition::new(vec![vec![0], vec![]]).is_err());
        assert!(OrderedPartition::new(vec![vec![0, 0]]).is_err());
        assert!(OrderedPartition::new(vec![vec![0, 2]]).is_err());
        let p = OrderedPartition::new(vec![vec![2], vec![0, 1]]).unwrap();
        assert_eq!((p.rank(2), p.rank(0), p.rank(1)), (1, 2, 2));
        assert!(!p.is_strict());
    }

    #[test]
    fn both_prefer_first() {
        let profile = strict_profile(&[&[0, 1], &[0, 1]]);
        let w = borda_weights(2).unwrap();
        let m = preference_chain(&profile, &w).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 2.0, 1.0]) / 3.0;
        assert!((m.matrix() - expected).amax() < 1e-15);
        let c = preference_centrality(&profile, &w).unwrap();
        assert!((c[0] - 4.0 / 3.0).abs() < 1e-15 && (c[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.column_sums(), c);
    }

    #[test]
    fn identity_orders_reproduce_w() {
        let profile = strict_profile(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]);
        let w = borda_weights(3).unwrap();
        let m = preference_chain(&profile, &w).unwrap();
        for u in 0..3 {
            assert_eq!(m.row(u), w.as_slice());
        }
    }

    #[test]
    fn tied_row_is_uniform() {
        let profile = PreferenceProfile::new(vec![
            OrderedPartition::strict(&[1, 0]).unwrap(),
            OrderedPartition::new(vec![vec![0, 1]]).unwrap(),
        ])
        .unwrap();
        let m = preference_chain(&profile, &borda_weights(2).unwrap()).unwrap();
        assert!((m.row(1)[0] - 0.5).abs() < 1e-15 && (m.row(1)[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn size_mismatch() {
        let profile = strict_profile(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            preference_chain(&profile, &borda_weights(3).unwrap()),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        assert!(PreferenceProfile::new(vec![OrderedPartition::strict(&[0, 1]).unwrap()]).is_err());
    }

    #[test]
    fn pagerank_preferences_examples() {
        let g = WeightedGraph::load_graph("a b 1\nb a 1").unwrap();
        let p = pagerank_preferences(&g, 0.5, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(p.ranking(0).blocks(), &[vec![0], vec![1]]);
        assert_eq!(p.ranking(1).blocks(), &[vec![1], vec![0]]);

        let path = WeightedGraph::load_graph("a b 1\nb a 1\nb c 1\nc b 1").unwrap();
        let p = pagerank_preferences(&path, 0.3, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(p.ranking(1).blocks(), &[vec![1], vec![0, 2]]);

        let k4 = WeightedGraph::load_graph(
            "a b 1\nb a 1\na c 1\nc a 1\na d 1\nd a 1\nb c 1\nc b 1\nb d 1\nd b 1\nc d 1\nd c 1",
        )
        .unwrap();
        let p = pagerank_preferences(&k4, 0.5, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(p.ranking(2).blocks(), &[vec![2], vec![0, 1, 3]]);
    }
}
