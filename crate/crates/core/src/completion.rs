//! The PageRank completion `W̄ = D_W · PPR` of a symmetric graph and checks
//! for each of its guarantees:
//!
//! 1. `W̄` is symmetric;
//! 2. every entry is positive when the input is connected;
//! 3. weighted degrees are unchanged;
//! 4. the random walk on `W̄` is stochastic with column sums equal to the
//!    PageRank centrality of the input;
//! 5. `𝓛_W` and `𝓛_W̄` share an eigenbasis;
//! 6. `G` and `W̄/(1−α)` are spectrally similar, with every Rayleigh ratio in
//!    `[1/(2−α), 1/α]`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::{symmetric_eigen, EIGEN_GAP_TOL};
use crate::graph::WeightedGraph;
use crate::pagerank::{pagerank_centrality, ppr_matrix};
use crate::{check_alpha, ensure_dense, Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-9;
pub const DEGREE_TOL: f64 = 1e-9;
pub const CONFORMING_TOL: f64 = 1e-8;
pub const DIAGONALIZATION_TOL: f64 = 1e-7;
pub const RATIO_TOL: f64 = 1e-8;

/// Eigenvalues of `𝓛_W` below this belong to the trivial eigenvector
/// `D^{1/2}·1`, on which both quadratic forms vanish.
const TRIVIAL_EIGENVALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    source: WeightedGraph,
    graph: WeightedGraph,
    alpha: f64,
}

/// Builds `W̄_α = D_W · PPR_{W,α}` for a connected symmetric graph.
///
/// The product is stored as computed, without re-symmetrizing, so that
/// [`verify_completion`] measures the real residuals.
pub fn pagerank_completion(g: &WeightedGraph, alpha: f64) -> Result<Completion> {
    check_alpha(alpha)?;
    if !g.is_symmetric() {
        return Err(Error::AsymmetricInput);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    ensure_dense(g.n())?;
    let ppr = ppr_matrix(g, alpha)?;
    let degrees = g.degrees();
    let n = g.n();
    let dense = DMatrix::from_fn(n, n, |u, v| degrees[u] * ppr.get(u, v));
    let graph = WeightedGraph::from_dense(Some(g.labels().to_vec()), &dense)?;
    Ok(Completion { source: g.clone(), graph, alpha })
}

impl Completion {
    /// Pairs an externally supplied `W̄` (e.g. re-read from disk) with its
    /// source graph so it can be verified.
    pub fn from_parts(source: WeightedGraph, graph: WeightedGraph, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !source.is_symmetric() {
            return Err(Error::AsymmetricInput);
        }
        if graph.n() != source.n() {
            return Err(Error::DimensionMismatch { expected: source.n(), found: graph.n() });
        }
        ensure_dense(source.n())?;
        Ok(Self { source, graph, alpha })
    }

    pub fn source(&self) -> &WeightedGraph {
        &self.source
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.graph.to_dense()
    }

    /// `𝓛_W̄ = I − D̄^{-1/2} W̄ D̄^{-1/2}` with round-off asymmetry averaged out.
    pub fn normalized_laplacian(&self) -> DMatrix<f64> {
        let n = self.graph.n();
        let d = self.graph.degrees();
        let w = self.matrix();
        let a = DMatrix::from_fn(n, n, |u, v| {
            let delta = if u == v { 1.0 } else { 0.0 };
            delta - w[(u, v)] / (d[u] * d[v]).sqrt()
        });
        (&a + a.transpose()) * 0.5
    }

    /// `L_W̄ = D̄ − W̄`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        self.graph.laplacian().into_matrix()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionReport {
    pub alpha: f64,
    pub conditions: Vec<ConditionCheck>,
}

impl CompletionReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, number: u8) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.condition == number)
    }
}

/// Checks conditions 1–4. PageRank is recomputed from the source graph, so a
/// tampered `W̄` is caught by both degree and conformance checks.
pub fn verify_completion(c: &Completion) -> CompletionReport {
    let n = c.graph.n();
    let w = c.matrix();

    let mut asymmetry: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    for u in 0..n {
        for v in 0..n {
            asymmetry = asymmetry.max((w[(u, v)] - w[(v, u)]).abs());
            min_entry = min_entry.min(w[(u, v)]);
        }
    }

    let source_degrees = c.source.degrees();
    let degrees = c.graph.degrees();
    let degree_residual = degrees
        .iter()
        .zip(&source_degrees)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let conforming_residual = match pagerank_centrality(&c.source, c.alpha) {
        Ok(pr) if degrees.iter().all(|&d| d > 0.0) => {
            let mut worst: f64 = 0.0;
            for u in 0..n {
                let row: f64 = (0..n).map(|v| w[(u, v)] / degrees[u]).sum();
                worst = worst.max((row - 1.0).abs());
            }
            for v in 0..n {
                let col: f64 = (0..n).map(|u| w[(u, v)] / degrees[u]).sum();
                worst = worst.max((col - pr[v]).abs());
            }
            worst
        }
        _ => f64::INFINITY,
    };

    let check = |condition, name, residual: f64, tolerance: f64| ConditionCheck {
        condition,
        name,
        passed: residual <= tolerance,
        residual,
        tolerance,
    };
    CompletionReport {
        alpha: c.alpha,
        conditions: vec![
            check(1, "symmetry preserving", asymmetry, SYMMETRY_TOL),
            ConditionCheck {
                condition: 2,
                name: "complete information",
                passed: min_entry > 0.0,
                residual: min_entry,
                tolerance: 0.0,
            },
            check(3, "degree and stationary preserving", degree_residual, DEGREE_TOL),
            check(4, "markovian and pagerank conforming", conforming_residual, CONFORMING_TOL),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub alpha: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Measured `xᵀ(L_W̄/(1−α))x / xᵀL_W x` for `x = D^{-1/2} u_i`, one per
    /// non-trivial eigenvector `u_i` of `D^{-1/2} W D^{-1/2}`.
    pub eigen_ratios: Vec<f64>,
    /// Closed form `1 / (1 − (1−α) λ_i)` for the same eigenvectors.
    pub predicted_ratios: Vec<f64>,
    /// The eigenvalues `λ_i` of `D^{-1/2} W D^{-1/2}`, trivial one excluded.
    pub eigenvalues: Vec<f64>,
    pub within_bounds: bool,
}

fn require_symmetric_source(c: &Completion) -> Result<()> {
    if !c.source.is_symmetric() {
        return Err(Error::AsymmetricInput);
    }
    if !c.source.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Rayleigh ratio `(xᵀ L̄ x / (1−α)) / xᵀ L x`, or `None` when `xᵀ L x` is
/// numerically zero.
fn rayleigh_ratio(l: &DMatrix<f64>, l_bar: &DMatrix<f64>, alpha: f64, x: &[f64]) -> Option<f64> {
    let quad = |m: &DMatrix<f64>| {
        let n = x.len();
        (0..n)
            .map(|i| x[i] * (0..n).map(|j| m[(i, j)] * x[j]).sum::<f64>())
            .sum::<f64>()
    };
    let den = quad(l);
    (den > 1e-12).then(|| quad(l_bar) / (1.0 - alpha) / den)
}

/// Rayleigh ratios over the eigenbasis of the source, which attain the
/// extreme ratios exactly.
pub fn spectral_similarity(c: &Completion) -> Result<SimilarityReport> {
    require_symmetric_source(c)?;
    let alpha = c.alpha;
    let normalized = c.source.normalized_laplacian()?;
    let eig = symmetric_eigen(normalized.matrix())?;
    let inv_sqrt = c.source.inv_sqrt_degrees()?;
    let l = c.source.laplacian().into_matrix();
    let l_bar = c.laplacian();

    let (mut eigen_ratios, mut predicted_ratios, mut eigenvalues) = (vec![], vec![], vec![]);
    for (j, &mu) in eig.values.iter().enumerate() {
        if mu < TRIVIAL_EIGENVALUE_TOL {
            continue;
        }
        let x: Vec<f64> = eig.vector(j).iter().zip(&inv_sqrt).map(|(u, s)| u * s).collect();
        let Some(ratio) = rayleigh_ratio(&l, &l_bar, alpha, &x) else {
            continue;
        };
        let lambda = 1.0 - mu;
        eigen_ratios.push(ratio);
        predicted_ratios.push(predicted_ratio(alpha, lambda));
        eigenvalues.push(lambda);
    }
    let (bound_lo, bound_hi) = similarity_bounds(alpha);
    let ratio_min = eigen_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = eigen_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let within_bounds = eigen_ratios
        .iter()
        .all(|&r| r >= bound_lo - RATIO_TOL && r <= bound_hi + RATIO_TOL);
    Ok(SimilarityReport {
        alpha,
        bound_lo,
        bound_hi,
        ratio_min,
        ratio_max,
        eigen_ratios,
        predicted_ratios,
        eigenvalues,
        within_bounds,
    })
}

/// `[1/(2−α), 1/α]`.
pub fn similarity_bounds(alpha: f64) -> (f64, f64) {
    (1.0 / (2.0 - alpha), 1.0 / alpha)
}

/// Rayleigh ratio on the eigenvector with eigenvalue `λ` of
/// `D^{-1/2} W D^{-1/2}`:
/// `(1/(1−α)) · (1 − α/(1 − (1−α)λ)) / (1 − λ)`, which simplifies to
/// `1/(1 − (1−α)λ)` and is evaluated in that stable form.
pub fn predicted_ratio(alpha: f64, lambda: f64) -> f64 {
    1.0 / (1.0 - (1.0 - alpha) * lambda)
}

/// Rayleigh ratios on `count` random vectors with entries uniform in
/// `[-1, 1]`; vectors with `xᵀ L x ≤ 1e-12` are skipped.
pub fn random_rayleigh_ratios(c: &Completion, count: usize, seed: u64) -> Result<Vec<f64>> {
    require_symmetric_source(c)?;
    let n = c.source.n();
    let l = c.source.laplacian().into_matrix();
    let l_bar = c.laplacian();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(count);
    for _ in 0..count {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Some(r) = rayleigh_ratio(&l, &l_bar, c.alpha, &x) {
            ratios.push(r);
        }
    }
    Ok(ratios)
}

/// Largest off-diagonal entry of `Uᵀ 𝓛_W̄ U`, where `U` diagonalizes `𝓛_W`.
/// Entries inside a repeated eigenspace are skipped: any orthonormal basis of
/// a shared eigenspace diagonalizes both matrices.
pub fn simultaneous_diagonalization_check(c: &Completion) -> Result<f64> {
    if !c.source.is_symmetric() {
        return Err(Error::AsymmetricInput);
    }
    let eig = symmetric_eigen(c.source.normalized_laplacian()?.matrix())?;
    let rotated = eig.vectors.transpose() * c.normalized_laplacian() * &eig.vectors;
    let n = rotated.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && (eig.values[i] - eig.values[j]).abs() > EIGEN_GAP_TOL {
                worst = worst.max(rotated[(i, j)].abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(pairs: &[(&str, &str)]) -> WeightedGraph {
        let mut text = String::new();
        for (a, b) in pairs {
            text.push_str(&format!("{a} {b} 1\n{b} {a} 1\n"));
        }
        WeightedGraph::load_graph(&text).unwrap()
    }

    fn two_cycle() -> WeightedGraph {
        undirected(&[("a", "b")])
    }

    fn triangle() -> WeightedGraph {
        undirected(&[("a", "b"), ("b", "c"), ("c", "a")])
    }

    #[test]
    fn two_cycle_completion() {
        let c = pagerank_completion(&two_cycle(), 0.5).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) / 3.0;
        assert!((c.matrix() - expected).amax() < 1e-14);
        let report = verify_completion(&c);
        assert!(report.all_passed(), "{report:?}");
        assert!(report.condition(4).unwrap().residual <= 1e-9);
    }

    #[test]
    fn triangle_completion() {
        let c = pagerank_completion(&triangle(), 0.5).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.2, 0.4, 0.4, 0.4, 1.2, 0.4, 0.4, 0.4, 1.2]);
        assert!((c.matrix() - expected).amax() < 1e-13);
    }

    #[test]
    fn completion_is_dense() {
        let path = undirected(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")]);
        let c = pagerank_completion(&path, 0.85).unwrap();
        assert!(c.matrix().iter().all(|&x| x > 0.0));
        assert_eq!(c.graph().edge_count(), 25);
    }

    #[test]
    fn preconditions() {
        let directed = WeightedGraph::load_graph("a b 1\nb a 2").unwrap();
        assert_eq!(pagerank_completion(&directed, 0.5), Err(Error::AsymmetricInput));
        let split = undirected(&[("a", "b"), ("c", "d")]);
        assert_eq!(pagerank_completion(&split, 0.5), Err(Error::Disconnected));
        assert_eq!(pagerank_completion(&triangle(), 1.2), Err(Error::AlphaOutOfRange(1.2)));
    }

    #[test]
    fn perturbed_entry_fails_degree_check() {
        let g = undirected(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]);
        let c = pagerank_completion(&g, 0.3).unwrap();
        let mut w = c.matrix();
        w[(1, 2)] += 1e-3;
        let tampered =
            WeightedGraph::from_dense(Some(g.labels().to_vec()), &w).unwrap();
        let report = verify_completion(&Completion::from_parts(g, tampered, 0.3).unwrap());
        let degree = report.condition(3).unwrap();
        assert!(!degree.passed);
        assert!((degree.residual - 1e-3).abs() < 1e-9);
        assert!(!report.condition(1).unwrap().passed);
        assert!(report.condition(2).unwrap().passed);
    }

    #[test]
    fn ratio_formula_values() {
        // λ = −1 (bipartite extreme): 1/(2−α)
        let long_form = |a: f64, l: f64| (1.0 / (1.0 - a)) * (1.0 - a / (1.0 - (1.0 - a) * l)) / (1.0 - l);
        assert!((long_form(0.5, -1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((predicted_ratio(0.5, -1.0) - 2.0 / 3.0).abs() < 1e-15);
        // λ = 0
        assert!((long_form(0.5, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(predicted_ratio(0.5, 0.0), 1.0);
        // λ → 1⁻ approaches 1/α
        assert!((long_form(0.5, 1.0 - 1e-7) - 2.0).abs() < 1e-6);
        assert!((predicted_ratio(0.5, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn similarity_on_bipartite_graph() {
        // the 4-cycle has λ = −1, so the lower bound is attained
        let g = undirected(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        let c = pagerank_completion(&g, 0.5).unwrap();
        let report = spectral_similarity(&c).unwrap();
        assert!(report.within_bounds);
        assert!((report.ratio_min - 2.0 / 3.0).abs() < 1e-12);
        for (m, p) in report.eigen_ratios.iter().zip(&report.predicted_ratios) {
            assert!((m - p).abs() < 1e-12);
        }
        assert_eq!(report.eigen_ratios.len(), 3);
    }

    #[test]
    fn random_ratios_in_band() {
        let g = WeightedGraph::load_graph(
            "a b 2\nb a 2\nb c 1\nc b 1\nc d 3\nd c 3\nd a 0.5\na d 0.5\nb b 1\nd e 1\ne d 1",
        )
        .unwrap();
        for alpha in [0.1, 0.5, 0.9] {
            let c = pagerank_completion(&g, alpha).unwrap();
            let (lo, hi) = similarity_bounds(alpha);
            let ratios = random_rayleigh_ratios(&c, 100, 7).unwrap();
            assert_eq!(ratios.len(), 100);
            assert!(ratios.iter().all(|&r| r >= lo - RATIO_TOL && r <= hi + RATIO_TOL));
        }
    }

    #[test]
    fn diagonalization_small_cases() {
        let c = pagerank_completion(&two_cycle(), 0.5).unwrap();
        assert!(simultaneous_diagonalization_check(&c).unwrap() <= 1e-12);
        let c = pagerank_completion(&triangle(), 0.5).unwrap();
        assert!(simultaneous_diagonalization_check(&c).unwrap() <= 1e-9);
    }
}
