//! Spectral and PageRank-based clustering.
//!
//! The sweep orders nodes by a score vector (descending, ties by ascending
//! index) and returns the prefix of least conductance. Fiedler and Cheeger
//! vectors feed the global version; rows of the PPR matrix scaled by
//! `D^{-1}` feed the local one.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::completion::pagerank_completion;
use crate::graph::{cut_ratio, WeightedGraph};
use crate::pagerank::{personalized_pagerank, ppr_matrix, PprMatrix};
use crate::{check_alpha, ensure_dense, Error, Result};

/// Eigenvalues below this count as zero when testing connectivity.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-10;

/// Slack on both sides of the Cheeger band, absorbing eigensolver round-off
/// (the 4-cycle meets the lower bound with equality).
pub const CHEEGER_TOL: f64 = 1e-9;

/// Eigenvalues closer than this are treated as one eigenspace.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DMatrix<f64>,
}

impl EigenPairs {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    /// `max_j ‖A v_j − λ_j v_j‖∞`.
    pub fn max_residual(&self, a: &DMatrix<f64>) -> f64 {
        let av = a * &self.vectors;
        let mut worst: f64 = 0.0;
        for (j, &lambda) in self.values.iter().enumerate() {
            for i in 0..a.nrows() {
                worst = worst.max((av[(i, j)] - lambda * self.vectors[(i, j)]).abs());
            }
        }
        worst
    }

    /// `max |VᵀV − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.vectors.ncols();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).amax()
    }

    /// Number of eigenvalues within [`EIGEN_GAP_TOL`] of `values[j]`.
    pub fn multiplicity(&self, j: usize) -> usize {
        let target = self.values[j];
        self.values
            .iter()
            .filter(|&&v| (v - target).abs() <= EIGEN_GAP_TOL)
            .count()
    }
}

/// Dense symmetric eigensolver.
///
/// The output is deterministic: eigenpairs are sorted by ascending value
/// (stable on index) and each eigenvector is signed so that its first
/// largest-magnitude component is positive.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<EigenPairs> {
    if !a.is_square() {
        return Err(Error::InvalidMatrix(format!("{} x {} is not square", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    ensure_dense(n)?;
    if (a - a.transpose()).amax() > 1e-10 {
        return Err(Error::AsymmetricInput);
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let peak = col.amax();
        let pivot = col
            .iter()
            .find(|x| x.abs() >= peak * (1.0 - 1e-9))
            .copied()
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(dst, &(col * sign));
    }
    Ok(EigenPairs { values, vectors })
}

fn require_connected_symmetric(g: &WeightedGraph) -> Result<()> {
    if !g.is_symmetric() {
        return Err(Error::AsymmetricInput);
    }
    if g.n() < 2 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Unit eigenvector of `L = D − W` for its second smallest eigenvalue.
pub fn fiedler_vector(g: &WeightedGraph) -> Result<Vec<f64>> {
    require_connected_symmetric(g)?;
    let eig = symmetric_eigen(g.laplacian().matrix())?;
    if eig.values[1] < ZERO_EIGENVALUE_TOL {
        return Err(Error::Disconnected);
    }
    Ok(eig.vector(1))
}

/// `D^{-1/2} v₂` where `v₂` is the second eigenvector of `𝓛`, together with
/// the eigen-decomposition it came from.
fn cheeger_pair(g: &WeightedGraph) -> Result<(Vec<f64>, EigenPairs)> {
    require_connected_symmetric(g)?;
    let eig = symmetric_eigen(g.normalized_laplacian()?.matrix())?;
    if eig.values[1] < ZERO_EIGENVALUE_TOL {
        return Err(Error::Disconnected);
    }
    let inv_sqrt = g.inv_sqrt_degrees()?;
    let v = eig.vector(1).iter().zip(&inv_sqrt).map(|(x, s)| x * s).collect();
    Ok((v, eig))
}

pub fn cheeger_vector(g: &WeightedGraph) -> Result<Vec<f64>> {
    cheeger_pair(g).map(|(v, _)| v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Nodes sorted by descending score, ties by ascending index.
    pub ordering: Vec<usize>,
    /// Size of the best prefix, in `1..n`.
    pub best_k: usize,
    pub best_conductance: f64,
    /// `profile[k - 1]` is the conductance of the first `k` nodes,
    /// `k = 1..n-1`. Prefixes with an empty side are `+inf`.
    pub profile: Vec<f64>,
}

impl SweepResult {
    pub fn cluster(&self) -> &[usize] {
        &self.ordering[..self.best_k]
    }
}

pub fn sweep(g: &WeightedGraph, scores: &[f64]) -> Result<SweepResult> {
    if !g.is_symmetric() {
        return Err(Error::AsymmetricInput);
    }
    let n = g.n();
    if scores.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: scores.len() });
    }
    if n < 2 {
        return Err(Error::EmptyOrFullSet);
    }
    let mut ordering: Vec<usize> = (0..n).collect();
    ordering.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let degrees = g.degrees();
    let total: f64 = degrees.iter().sum();
    let mut inside = vec![false; n];
    let (mut cut, mut volume) = (0.0, 0.0);
    let mut profile = Vec::with_capacity(n - 1);
    for &u in &ordering[..n - 1] {
        // edges from u into S stop crossing; the rest of u's edges start
        let mut to_inside = 0.0;
        let mut self_loop = 0.0;
        for &(v, w) in g.neighbors(u) {
            if v == u {
                self_loop = w;
            } else if inside[v] {
                to_inside += w;
            }
        }
        cut += degrees[u] - self_loop - 2.0 * to_inside;
        volume += degrees[u];
        inside[u] = true;
        let denom = volume.min(total - volume);
        profile.push(if denom > 0.0 { cut / denom } else { f64::INFINITY });
    }
    let (best_idx, &best_conductance) = profile
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("n >= 2 gives a non-empty profile");
    Ok(SweepResult { ordering, best_k: best_idx + 1, best_conductance, profile })
}

/// Sweep over `D^{-1} p_seed`, the personalized PageRank of `seed` scaled
/// by inverse degrees.
pub fn local_cluster(g: &WeightedGraph, alpha: f64, seed: usize) -> Result<SweepResult> {
    check_alpha(alpha)?;
    require_connected_symmetric(g)?;
    let n = g.n();
    if seed >= n {
        return Err(Error::NodeOutOfRange { index: seed, n });
    }
    let mut start = vec![0.0; n];
    start[seed] = 1.0;
    let p = personalized_pagerank(g, alpha, &start)?;
    let scores: Vec<f64> = p.iter().zip(g.degrees()).map(|(x, d)| x / d).collect();
    sweep(g, &scores)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub lambda2: f64,
    /// How many eigenvalues tie with `lambda2`; the sweep used the first
    /// eigenvector the solver returned for that eigenspace.
    pub lambda2_multiplicity: usize,
    pub conductance: f64,
    pub lower: f64,
    pub upper: f64,
    pub cluster: Vec<usize>,
    pub passed: bool,
    /// The same check driven by the Cheeger vector of the PageRank
    /// completion, when a restart constant was supplied.
    pub completion: Option<CompletionCheeger>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionCheeger {
    pub alpha: f64,
    /// Second smallest eigenvalue of the completion's normalized Laplacian.
    pub lambda2: f64,
    /// Conductance in the original graph of the sweep over the completion's
    /// Cheeger vector.
    pub conductance: f64,
    pub passed: bool,
}

fn within_band(phi: f64, lower: f64, upper: f64) -> bool {
    phi >= lower - CHEEGER_TOL && phi <= upper + CHEEGER_TOL
}

/// Checks `λ₂/2 ≤ φ(sweep over the Cheeger vector) ≤ √(2 λ₂)`.
pub fn cheeger_check(g: &WeightedGraph, alpha: Option<f64>) -> Result<CheegerReport> {
    let (v, eig) = cheeger_pair(g)?;
    let lambda2 = eig.values[1];
    let result = sweep(g, &v)?;
    let (lower, upper) = (lambda2 / 2.0, (2.0 * lambda2).sqrt());
    let conductance = result.best_conductance;

    let completion = match alpha {
        None => None,
        Some(alpha) => {
            let c = pagerank_completion(g, alpha)?;
            let normalized = c.normalized_laplacian();
            let ceig = symmetric_eigen(&normalized)?;
            let inv_sqrt = g.inv_sqrt_degrees()?;
            let cv: Vec<f64> = ceig.vector(1).iter().zip(&inv_sqrt).map(|(x, s)| x * s).collect();
            let phi = sweep(g, &cv)?.best_conductance;
            Some(CompletionCheeger {
                alpha,
                lambda2: ceig.values[1],
                conductance: phi,
                passed: within_band(phi, lower, upper),
            })
        }
    };
    let passed = within_band(conductance, lower, upper)
        && completion.as_ref().is_none_or(|c| c.passed);
    Ok(CheegerReport {
        lambda2,
        lambda2_multiplicity: eig.multiplicity(1),
        conductance,
        lower,
        upper,
        cluster: result.cluster().to_vec(),
        passed,
        completion,
    })
}

/// Conductance of `set` measured in the PageRank completion `W̄`, self-loops
/// included in the volumes.
pub fn pagerank_conductance(g: &WeightedGraph, alpha: f64, set: &[usize]) -> Result<f64> {
    let members = g.membership(set)?;
    let c = pagerank_completion(g, alpha)?;
    let rows: Vec<Vec<(usize, f64)>> =
        (0..g.n()).map(|u| c.graph().neighbors(u).to_vec()).collect();
    cut_ratio(&rows, &members)
}

/// `Σ_{u,v ∈ S} PPR[u, v]`. Works on directed graphs; `S = V` is allowed.
pub fn pagerank_utility(g: &WeightedGraph, alpha: f64, set: &[usize]) -> Result<f64> {
    ppr_matrix(g, alpha)?.utility(set)
}

/// PageRank utility divided by `|S|`.
pub fn pagerank_clusterability(g: &WeightedGraph, alpha: f64, set: &[usize]) -> Result<f64> {
    ppr_matrix(g, alpha)?.clusterability(set)
}

impl PprMatrix {
    fn mask(&self, set: &[usize]) -> Result<Vec<bool>> {
        let n = self.n();
        let mut members = vec![false; n];
        for &u in set {
            if u >= n {
                return Err(Error::NodeOutOfRange { index: u, n });
            }
            members[u] = true;
        }
        if !members.contains(&true) {
            return Err(Error::EmptyOrFullSet);
        }
        Ok(members)
    }

    fn block_sum(&self, from: &[bool], to: &[bool]) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for u in (0..n).filter(|&u| from[u]) {
            for v in (0..n).filter(|&v| to[v]) {
                total += self.get(u, v);
            }
        }
        total
    }

    pub fn utility(&self, set: &[usize]) -> Result<f64> {
        let m = self.mask(set)?;
        Ok(self.block_sum(&m, &m))
    }

    pub fn clusterability(&self, set: &[usize]) -> Result<f64> {
        let m = self.mask(set)?;
        let size = m.iter().filter(|&&x| x).count();
        Ok(self.block_sum(&m, &m) / size as f64)
    }

    /// Rate of PageRank contribution from `S` to `T`:
    /// `Σ_{u∈S, v∈T} PPR[u, v] / |S|`.
    pub fn contribution_rate(&self, from: &[usize], to: &[usize]) -> Result<f64> {
        let s = self.mask(from)?;
        let n = self.n();
        let mut t = vec![false; n];
        for &v in to {
            if v >= n {
                return Err(Error::NodeOutOfRange { index: v, n });
            }
            t[v] = true;
        }
        let size = s.iter().filter(|&&x| x).count();
        Ok(self.block_sum(&s, &t) / size as f64)
    }
}
