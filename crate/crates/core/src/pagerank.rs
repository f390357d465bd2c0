//! Personalized PageRank vectors, the personalized PageRank matrix and
//! PageRank centrality.
//!
//! Two independent solvers are provided for every quantity: the truncated
//! power series `p_s = α Σ_k (1−α)^k (Wᵀ D_out^{-1})^k s` (the default, cost
//! `O(m)` per term) and a dense direct solve of `(I − (1−α) Mᵀ) p = α s`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::graph::WeightedGraph;
use crate::markov::MarkovChain;
use crate::{check_alpha, ensure_dense, Error, Result, SERIES_EPS};

/// Above this many series terms (tiny `alpha`) the direct solver is used.
pub const MAX_SERIES_TERMS: usize = 100_000;

/// Number of series terms needed before the tail mass `(1−α)^K` falls below
/// [`SERIES_EPS`].
pub fn series_terms(alpha: f64) -> usize {
    if alpha >= 1.0 {
        return 1;
    }
    (SERIES_EPS.ln() / (1.0 - alpha).ln()).ceil() as usize + 1
}

/// `α Σ_k (1−α)^k M^k` for a dense square matrix, truncated at [`SERIES_EPS`].
pub fn restart_series(m: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut term = DMatrix::identity(n, n) * alpha;
    let mut acc = term.clone();
    let mut tail = 1.0 - alpha;
    while tail >= SERIES_EPS {
        term = (&term * m) * (1.0 - alpha);
        acc += &term;
        tail *= 1.0 - alpha;
    }
    acc
}

/// The personalized PageRank matrix: row `u` is the PageRank vector
/// restarted at `u`. Rows sum to one and columns sum to PageRank centrality.
#[derive(Debug, Clone, PartialEq)]
pub struct PprMatrix {
    matrix: DMatrix<f64>,
    alpha: f64,
}

impl PprMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.matrix[(u, v)]
    }

    pub fn row(&self, u: usize) -> Vec<f64> {
        self.matrix.row(u).iter().copied().collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.sum()).collect()
    }

    /// The PPR matrix viewed as a transition matrix.
    pub fn to_chain(&self) -> Result<MarkovChain> {
        MarkovChain::new(self.matrix.clone())
    }
}

/// Row-normalized transitions `w(u, v) / d_u`, stored sparsely.
struct Walk {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Walk {
    fn new(g: &WeightedGraph) -> Result<Self> {
        let rows = g
            .degrees()
            .into_iter()
            .enumerate()
            .map(|(u, d)| {
                if d <= 0.0 {
                    return Err(Error::DanglingNode(u));
                }
                Ok(g.neighbors(u).iter().map(|&(v, w)| (v, w / d)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    /// `out = Mᵀ x`.
    fn push(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (u, row) in self.rows.iter().enumerate() {
            let mass = x[u];
            if mass == 0.0 {
                continue;
            }
            for &(v, p) in row {
                out[v] += mass * p;
            }
        }
    }

    fn series(&self, alpha: f64, start: &[f64]) -> Vec<f64> {
        let mut term: Vec<f64> = start.iter().map(|&s| alpha * s).collect();
        let mut acc = term.clone();
        let mut next = vec![0.0; term.len()];
        let mut tail = 1.0 - alpha;
        while tail >= SERIES_EPS {
            self.push(&term, &mut next);
            for (t, nx) in term.iter_mut().zip(&next) {
                *t = nx * (1.0 - alpha);
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            tail *= 1.0 - alpha;
        }
        acc
    }
}

fn check_distribution(n: usize, s: &[f64]) -> Result<()> {
    if s.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.len() });
    }
    if let Some(x) = s.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::NotADistribution(format!("entry {x} is negative or not finite")));
    }
    let total: f64 = s.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotADistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Personalized PageRank `p_s` with restart distribution `s`.
pub fn personalized_pagerank(g: &WeightedGraph, alpha: f64, s: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_distribution(g.n(), s)?;
    if series_terms(alpha) > MAX_SERIES_TERMS {
        return personalized_pagerank_direct(g, alpha, s);
    }
    Ok(Walk::new(g)?.series(alpha, s))
}

fn transition_matrix(g: &WeightedGraph) -> Result<DMatrix<f64>> {
    ensure_dense(g.n())?;
    let walk = Walk::new(g)?;
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for (u, row) in walk.rows.iter().enumerate() {
        for &(v, p) in row {
            m[(u, v)] = p;
        }
    }
    Ok(m)
}

/// Personalized PageRank by LU solve of `(I − (1−α) Mᵀ) p = α s`.
pub fn personalized_pagerank_direct(
    g: &WeightedGraph,
    alpha: f64,
    s: &[f64],
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_distribution(g.n(), s)?;
    let n = g.n();
    let m = transition_matrix(g)?;
    let system = DMatrix::identity(n, n) - m.transpose() * (1.0 - alpha);
    let rhs = DVector::from_iterator(n, s.iter().map(|&x| alpha * x));
    let p = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidMatrix("singular PageRank system".into()))?;
    Ok(p.iter().copied().collect())
}

/// The dense personalized PageRank matrix, one series per row (rows are
/// computed in parallel; output does not depend on scheduling).
pub fn ppr_matrix(g: &WeightedGraph, alpha: f64) -> Result<PprMatrix> {
    check_alpha(alpha)?;
    let n = g.n();
    ensure_dense(n)?;
    if series_terms(alpha) > MAX_SERIES_TERMS {
        return ppr_matrix_direct(g, alpha);
    }
    let walk = Walk::new(g)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut e = vec![0.0; n];
            e[u] = 1.0;
            walk.series(alpha, &e)
        })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |u, v| rows[u][v]);
    Ok(PprMatrix { matrix, alpha })
}

/// `α (I − (1−α) M)^{-1}` by dense inversion.
pub fn ppr_matrix_direct(g: &WeightedGraph, alpha: f64) -> Result<PprMatrix> {
    check_alpha(alpha)?;
    let n = g.n();
    let m = transition_matrix(g)?;
    let system = DMatrix::identity(n, n) - m * (1.0 - alpha);
    let inverse = system
        .try_inverse()
        .ok_or_else(|| Error::InvalidMatrix("singular PageRank system".into()))?;
    Ok(PprMatrix { matrix: inverse * alpha, alpha })
}

/// PageRank centrality, normalized to sum to `n`: `PR = PPRᵀ·1`.
pub fn pagerank_centrality(g: &WeightedGraph, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let n = g.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let uniform = vec![1.0 / n as f64; n];
    let p = personalized_pagerank(g, alpha, &uniform)?;
    Ok(p.into_iter().map(|x| x * n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> WeightedGraph {
        WeightedGraph::load_graph("a b 1\nb a 1").unwrap()
    }

    fn triangle() -> WeightedGraph {
        WeightedGraph::load_graph("a b 1\nb a 1\nb c 1\nc b 1\na c 1\nc a 1").unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn two_cycle_vector() {
        let p = personalized_pagerank(&two_cycle(), 0.5, &[1.0, 0.0]).unwrap();
        // even walk lengths stay home: α / (1 − (1−α)²)
        assert!(close(&p, &[2.0 / 3.0, 1.0 / 3.0], 1e-14), "{p:?}");
    }

    #[test]
    fn uniform_start_on_transitive_graph() {
        let p = personalized_pagerank(&triangle(), 0.3, &[1.0 / 3.0; 3]).unwrap();
        assert!(close(&p, &[1.0 / 3.0; 3], 1e-14));
    }

    #[test]
    fn restart_dominates_near_one() {
        let p = personalized_pagerank(&triangle(), 0.999999, &[0.2, 0.5, 0.3]).unwrap();
        assert!(close(&p, &[0.2, 0.5, 0.3], 1e-5));
    }

    #[test]
    fn fixed_point_residual() {
        let g = WeightedGraph::load_graph("a b 1\nb c 2\nc a 1\nc b 0.5\na a 0.2").unwrap();
        let s = [0.1, 0.6, 0.3];
        let alpha = 0.15;
        let p = personalized_pagerank(&g, alpha, &s).unwrap();
        let m = transition_matrix(&g).unwrap();
        let mp = m.transpose() * DVector::from_column_slice(&p);
        let residual: f64 = (0..3)
            .map(|i| (p[i] - alpha * s[i] - (1.0 - alpha) * mp[i]).abs())
            .sum();
        assert!(residual <= 1e-10, "{residual}");
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn input_validation() {
        let g = two_cycle();
        assert_eq!(personalized_pagerank(&g, 1.0, &[1.0, 0.0]), Err(Error::AlphaOutOfRange(1.0)));
        assert_eq!(personalized_pagerank(&g, 0.0, &[1.0, 0.0]), Err(Error::AlphaOutOfRange(0.0)));
        assert!(matches!(
            personalized_pagerank(&g, 0.5, &[0.7, 0.7]),
            Err(Error::NotADistribution(_))
        ));
        assert!(matches!(
            personalized_pagerank(&g, 0.5, &[1.5, -0.5]),
            Err(Error::NotADistribution(_))
        ));
        assert!(matches!(
            personalized_pagerank(&g, 0.5, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(ppr_matrix(&g, f64::NAN), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn matrix_examples() {
        let ppr = ppr_matrix(&two_cycle(), 0.5).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) / 3.0;
        assert!((ppr.matrix() - expected).amax() < 1e-14);

        let loops = WeightedGraph::load_graph("x x 1\ny y 1").unwrap();
        assert!((ppr_matrix(&loops, 0.4).unwrap().matrix() - DMatrix::identity(2, 2)).amax() < 1e-13);

        let ppr = ppr_matrix(&triangle(), 0.5).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                // symmetric fixed point: x = α + (1−α)y, y = (1−α)(x+y)/2
                let want = if u == v { 0.6 } else { 0.2 };
                assert!((ppr.get(u, v) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn matrix_rows_match_vectors() {
        let g = WeightedGraph::load_graph("a b 1\nb c 2\nc a 1\nc d 0.5\nd a 3").unwrap();
        let ppr = ppr_matrix(&g, 0.2).unwrap();
        for u in 0..g.n() {
            let mut e = vec![0.0; g.n()];
            e[u] = 1.0;
            let p = personalized_pagerank(&g, 0.2, &e).unwrap();
            assert!(close(&ppr.row(u), &p, 1e-9));
        }
    }

    #[test]
    fn centrality_examples() {
        assert!(close(&pagerank_centrality(&two_cycle(), 0.5).unwrap(), &[1.0, 1.0], 1e-13));
        assert!(close(&pagerank_centrality(&triangle(), 0.2).unwrap(), &[1.0; 3], 1e-13));
    }

    #[test]
    fn directed_chain_centrality() {
        // a -> b -> c, c repaired with a uniform row
        let g = WeightedGraph::load_graph("a b 1\nb c 1").unwrap();
        let alpha = 0.5;
        let pr = pagerank_centrality(&g, alpha).unwrap();

        // PR = α 1 + (1−α) Mᵀ PR, solved by hand-rolled elimination
        let m = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0 / 3.0; 3]];
        let mut a = [[0.0; 4]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = if i == j { 1.0 } else { 0.0 } - (1.0 - alpha) * m[j][i];
            }
            a[i][3] = alpha;
        }
        for col in 0..3 {
            let pivot = a[col][col];
            for k in col..4 {
                a[col][k] /= pivot;
            }
            for row in 0..3 {
                if row != col {
                    let f = a[row][col];
                    for k in col..4 {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        let oracle = [a[0][3], a[1][3], a[2][3]];
        assert!(close(&pr, &oracle, 1e-12), "{pr:?} vs {oracle:?}");
        assert!(pr[1] > pr[0]);
        assert!((pr.iter().sum::<f64>() - 3.0).abs() < 1e-12);

        let ppr = ppr_matrix(&g, alpha).unwrap();
        assert!(close(&ppr.column_sums(), &pr, 1e-12));
    }

    #[test]
    fn series_agrees_with_direct() {
        let g = WeightedGraph::load_graph("a b 1\nb c 2\nc a 1\nc d 0.5\nd a 3\nd d 1").unwrap();
        for alpha in [0.05, 0.15, 0.5, 0.9] {
            let a = ppr_matrix(&g, alpha).unwrap();
            let b = ppr_matrix_direct(&g, alpha).unwrap();
            assert!((a.matrix() - b.matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn tiny_alpha_falls_back_to_direct() {
        let g = two_cycle();
        assert!(series_terms(1e-9) > MAX_SERIES_TERMS);
        let p = personalized_pagerank(&g, 1e-9, &[1.0, 0.0]).unwrap();
        // the system has condition number ~1/α, so expect ~1e-7 accuracy
        assert!(close(&p, &[0.5, 0.5], 1e-6));
    }

    #[test]
    fn series_length() {
        assert!(series_terms(0.5) >= 45);
        assert!(0.5f64.powi(series_terms(0.5) as i32 - 1) < SERIES_EPS);
    }

    #[test]
    fn restart_series_of_identity_is_identity() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((restart_series(&i, 0.3) - &i).amax() < 1e-13);
    }
}
