//! Finite Markov chains: stationarity, detailed balance, canonical networks
//! and the Laplacian symmetrizations built from them.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::graph::{LaplacianMatrix, WeightedGraph};
use crate::pagerank::restart_series;
use crate::{ensure_dense, Error, Result};

/// Row-sum tolerance for a transition matrix.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// A row-stochastic transition matrix with a lazily solved stationary
/// distribution. The stationary vector is computed at most once, even under
/// concurrent first access.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    matrix: DMatrix<f64>,
    stationary: OnceLock<Result<Vec<f64>>>,
}

impl PartialEq for MarkovChain {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl MarkovChain {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "{} x {} transition matrix is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (u, row) in matrix.row_iter().enumerate() {
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidMatrix(format!("row {u} has entry {x}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMatrix(format!("row {u} sums to {sum}")));
            }
        }
        Ok(Self { matrix, stationary: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn row(&self, u: usize) -> Vec<f64> {
        self.matrix.row(u).iter().copied().collect()
    }

    /// `Mᵀ·1`.
    pub fn column_sums(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.sum()).collect()
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let support = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let w = if forward { self.matrix[(u, v)] } else { self.matrix[(v, u)] };
                    if w > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        n == 0 || (support(true) && support(false))
    }

    /// The stationary distribution `π` with `Mᵀπ = π` and `Σπ = 1`.
    ///
    /// Solved directly from the balance equations with one row replaced by
    /// the normalization, so periodic chains are handled exactly.
    pub fn stationary(&self) -> Result<&[f64]> {
        self.stationary
            .get_or_init(|| self.solve_stationary())
            .as_deref()
            .map_err(Clone::clone)
    }

    fn solve_stationary(&self) -> Result<Vec<f64>> {
        let n = self.n();
        ensure_dense(n)?;
        if !self.is_irreducible() {
            return Err(Error::Reducible);
        }
        let mut a = self.matrix.transpose() - DMatrix::identity(n, n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let pi = a.lu().solve(&b).ok_or(Error::Reducible)?;
        let mut pi: Vec<f64> = pi.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
        Ok(pi)
    }

    /// `max_{u,v} |π_u M_uv − π_v M_vu|`.
    pub fn detailed_balance_residual(&self) -> Result<f64> {
        let pi = self.stationary()?;
        let n = self.n();
        let mut worst: f64 = 0.0;
        for u in 0..n {
            for v in (u + 1)..n {
                let flow = pi[u] * self.matrix[(u, v)] - pi[v] * self.matrix[(v, u)];
                worst = worst.max(flow.abs());
            }
        }
        Ok(worst)
    }

    pub fn is_detailed_balanced(&self, tol: f64) -> Result<bool> {
        Ok(self.detailed_balance_residual()? <= tol)
    }

    /// `ΠM`, scaled row by row with the stationary distribution.
    fn pi_scaled(&self) -> Result<DMatrix<f64>> {
        let pi = self.stationary()?;
        let mut scaled = self.matrix.clone();
        for (u, mut row) in scaled.row_iter_mut().enumerate() {
            row *= pi[u];
        }
        Ok(scaled)
    }

    /// The canonical Markovian network `ΠM`: a weighted Eulerian digraph
    /// whose in- and out-degrees both equal `π`. It is symmetric exactly
    /// when the chain is detailed balanced.
    pub fn canonical_network(&self) -> Result<WeightedGraph> {
        WeightedGraph::from_dense(None, &self.pi_scaled()?)
    }

    /// `Π − (ΠM + MᵀΠ)/2`.
    pub fn markovian_symmetrization(&self) -> Result<LaplacianMatrix> {
        let pi = self.stationary()?.to_vec();
        let flow = self.pi_scaled()?;
        let sym = symmetric_part(&flow);
        LaplacianMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(pi)) - sym)
    }

    /// The two PageRank symmetrizations:
    ///
    /// * `Π − α Σ_k (1−α)^k (ΠM^k + (Mᵀ)^kΠ)/2`
    /// * `Π − α Σ_k (1−α)^k Π (Π^{-1} S)^k` with `S = (ΠM + MᵀΠ)/2`
    ///
    /// `alpha` may equal 1, in which case only the `k = 0` term survives and
    /// both Laplacians vanish.
    pub fn pagerank_markovian_symmetrization(
        &self,
        alpha: f64,
    ) -> Result<(LaplacianMatrix, LaplacianMatrix)> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let pi = self.stationary()?.to_vec();
        let n = self.n();
        let big_pi = DMatrix::from_diagonal(&DVector::from_vec(pi.clone()));

        let ppr = restart_series(&self.matrix, alpha);
        let first = &big_pi - symmetric_part(&(&big_pi * &ppr));

        let sym = symmetric_part(&self.pi_scaled()?);
        let walk = DMatrix::from_fn(n, n, |u, v| sym[(u, v)] / pi[u]);
        // Π(Π^{-1}S)^k is symmetric in exact arithmetic; average away round-off
        let second = &big_pi - symmetric_part(&(&big_pi * restart_series(&walk, alpha)));
        Ok((LaplacianMatrix::new(first)?, LaplacianMatrix::new(second)?))
    }
}

/// `M_W = D_out^{-1} W` for a graph without dangling nodes.
pub fn random_walk_chain(g: &WeightedGraph) -> Result<MarkovChain> {
    let n = g.n();
    ensure_dense(n)?;
    let degrees = g.degrees();
    let mut m = DMatrix::zeros(n, n);
    for (u, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            return Err(Error::DanglingNode(u));
        }
        for &(v, w) in g.neighbors(u) {
            m[(u, v)] = w / d;
        }
    }
    MarkovChain::new(m)
}

fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}
