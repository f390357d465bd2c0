//! Weighted graphs, edge-list ingestion, Laplacians and conductance.
//!
//! A [`WeightedGraph`] stores one sorted adjacency row per node. Only strictly
//! positive weights are kept, so `weight(u, v) > 0` exactly when `(u, v)` is
//! an edge. Self-loops are allowed and count toward degrees.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::{Error, Result, TOL_SYM};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
}

impl WeightedGraph {
    /// Builds a graph from `(from, to, weight)` triples over `n` nodes.
    ///
    /// Zero weights are accepted and dropped; a repeated `(from, to)` pair is
    /// rejected even when one of the copies has zero weight.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = labels.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (line, (u, v, w)) in edges.into_iter().enumerate() {
            for idx in [u, v] {
                if idx >= n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if !w.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite weight on edge {u} -> {v}")));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { line: line + 1, weight: w });
            }
            rows[u].push((v, w));
        }
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(v, _)| v);
            if let Some(pair) = row.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::DuplicateEdge {
                    line: 0,
                    from: labels[u].clone(),
                    to: labels[pair[0].0].clone(),
                });
            }
            row.retain(|&(_, w)| w > 0.0);
        }
        Ok(Self::from_rows(labels, rows))
    }

    /// Builds a graph from a dense non-negative square matrix.
    pub fn from_dense(labels: Option<Vec<String>>, weights: &DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "{} x {} is not square",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let n = weights.nrows();
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(Error::DimensionMismatch { expected: n, found: l.len() })
            }
            Some(l) => l,
            None => index_labels(n),
        };
        let mut rows = Vec::with_capacity(n);
        for u in 0..n {
            let mut row = Vec::new();
            for v in 0..n {
                let w = weights[(u, v)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({u}, {v}) = {w} is not a finite non-negative weight"
                    )));
                }
                if w > 0.0 {
                    row.push((v, w));
                }
            }
            rows.push(row);
        }
        Ok(Self::from_rows(labels, rows))
    }

    /// Rows must be sorted by column and hold strictly positive weights.
    fn from_rows(labels: Vec<String>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut g = Self { labels, rows, symmetric: false };
        g.symmetric = g.detect_symmetry();
        g
    }

    fn detect_symmetry(&self) -> bool {
        self.rows.iter().enumerate().all(|(u, row)| {
            row.iter()
                .all(|&(v, w)| (w - self.weight(v, u)).abs() <= TOL_SYM)
        })
    }

    /// Parses the raw edge list without touching dangling nodes.
    ///
    /// Each non-empty line is `u v w`; `#` starts a comment. Nodes are
    /// indexed in order of first appearance.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected 3 fields, found {}", tokens.len()),
                });
            }
            let weight: f64 = tokens[2].parse().map_err(|_| Error::MalformedLine {
                line,
                reason: format!("weight '{}' is not a number", tokens[2]),
            })?;
            if !weight.is_finite() {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("weight '{}' is not finite", tokens[2]),
                });
            }
            if weight < 0.0 {
                return Err(Error::NegativeWeight { line, weight });
            }
            let mut id = |label: &str| {
                *index.entry(label.to_owned()).or_insert_with(|| {
                    labels.push(label.to_owned());
                    labels.len() - 1
                })
            };
            let (u, v) = (id(tokens[0]), id(tokens[1]));
            if seen.insert((u, v), line).is_some() {
                return Err(Error::DuplicateEdge {
                    line,
                    from: tokens[0].to_owned(),
                    to: tokens[1].to_owned(),
                });
            }
            edges.push((u, v, weight));
        }
        Self::from_edges(labels, edges)
    }

    /// Parses an edge list and repairs dangling nodes.
    pub fn load_graph(text: &str) -> Result<Self> {
        let (g, repaired) = Self::parse_edge_list(text)?.repair_dangling();
        if !repaired.is_empty() {
            let names: Vec<&str> = repaired.iter().map(|&u| g.labels[u].as_str()).collect();
            log::warn!(
                "repaired {} dangling node(s) with uniform out-rows: {}",
                names.len(),
                names.join(", ")
            );
        }
        Ok(g)
    }

    /// Gives every zero out-degree node a uniform out-row of weight `1/n`
    /// (self included). Returns the repaired graph and the repaired nodes.
    pub fn repair_dangling(&self) -> (Self, Vec<usize>) {
        let n = self.n();
        let dangling = self.dangling_nodes();
        if dangling.is_empty() {
            return (self.clone(), dangling);
        }
        let mut rows = self.rows.clone();
        let w = 1.0 / n as f64;
        for &u in &dangling {
            rows[u] = (0..n).map(|v| (v, w)).collect();
        }
        (Self::from_rows(self.labels.clone(), rows), dangling)
    }

    /// Serializes to the edge-list format, one line per positive weight.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                let _ = writeln!(out, "{} {} {}", self.labels[u], self.labels[v], w);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownNode(label.to_owned()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Out-neighbors of `u` with their weights, sorted by target.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let row = &self.rows[u];
        row.binary_search_by_key(&v, |&(t, _)| t)
            .map(|i| row[i].1)
            .unwrap_or(0.0)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Out-degrees `d_u = Σ_v w(u, v)`.
    pub fn degrees(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn dangling_nodes(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d <= 0.0)
            .map(|(u, _)| u)
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                m[(u, v)] = w;
            }
        }
        m
    }

    /// Connectivity of the support, ignoring edge direction.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, _) in row {
                undirected[u].push(v);
                undirected[v].push(u);
            }
        }
        reachable_count(&undirected, 0) == n
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut forward: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut backward: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, _) in row {
                forward[u].push(v);
                backward[v].push(u);
            }
        }
        reachable_count(&forward, 0) == n && reachable_count(&backward, 0) == n
    }

    /// `L = D − W`.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let n = self.n();
        let mut l = DMatrix::zeros(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                l[(u, u)] += w;
                l[(u, v)] -= w;
            }
        }
        LaplacianMatrix(l)
    }

    /// `𝓛 = I − D^{-1/2} W D^{-1/2}`, defined for symmetric graphs only.
    pub fn normalized_laplacian(&self) -> Result<LaplacianMatrix> {
        if !self.symmetric {
            return Err(Error::AsymmetricInput);
        }
        let n = self.n();
        let inv_sqrt = self.inv_sqrt_degrees()?;
        let mut l = DMatrix::identity(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                l[(u, v)] -= inv_sqrt[u] * w * inv_sqrt[v];
            }
        }
        Ok(LaplacianMatrix(l))
    }

    pub(crate) fn inv_sqrt_degrees(&self) -> Result<Vec<f64>> {
        self.degrees()
            .into_iter()
            .enumerate()
            .map(|(u, d)| {
                if d > 0.0 {
                    Ok(1.0 / d.sqrt())
                } else {
                    Err(Error::DanglingNode(u))
                }
            })
            .collect()
    }

    /// `cut(S) / min(vol(S), vol(V \ S))` on a symmetric graph.
    pub fn conductance(&self, set: &[usize]) -> Result<f64> {
        if !self.symmetric {
            return Err(Error::AsymmetricInput);
        }
        let members = self.membership(set)?;
        cut_ratio(&self.rows, &members)
    }

    /// Membership mask for a proper, non-empty node subset.
    pub(crate) fn membership(&self, set: &[usize]) -> Result<Vec<bool>> {
        let n = self.n();
        let mut members = vec![false; n];
        for &u in set {
            if u >= n {
                return Err(Error::NodeOutOfRange { index: u, n });
            }
            members[u] = true;
        }
        let size = members.iter().filter(|&&m| m).count();
        if size == 0 || size == n {
            return Err(Error::EmptyOrFullSet);
        }
        Ok(members)
    }
}

/// Shared by ordinary and PageRank conductance: `Σ_{u∈S, v∉S} w / min(vol)`.
pub(crate) fn cut_ratio(rows: &[Vec<(usize, f64)>], members: &[bool]) -> Result<f64> {
    let (mut cut, mut vol_in, mut vol_out) = (0.0, 0.0, 0.0);
    for (u, row) in rows.iter().enumerate() {
        for &(v, w) in row {
            if members[u] {
                vol_in += w;
                if !members[v] {
                    cut += w;
                }
            } else {
                vol_out += w;
            }
        }
    }
    let denom = f64::min(vol_in, vol_out);
    if denom <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    Ok(cut / denom)
}

pub(crate) fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn reachable_count(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count
}

/// A symmetric matrix with zero row sums and non-positive off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(pub(crate) DMatrix<f64>);

impl LaplacianMatrix {
    /// Row-sum tolerance accepted by [`LaplacianMatrix::new`].
    pub const ROW_SUM_TOL: f64 = 1e-8;

    /// Wraps `matrix` after checking the Laplacian invariants.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let l = Self(matrix);
        let v = l.violations();
        if v.asymmetry > 1e-9 || v.max_row_sum > Self::ROW_SUM_TOL || v.max_positive_offdiag > 1e-12
        {
            return Err(Error::InvalidMatrix(format!(
                "not a Laplacian: asymmetry {:e}, row sum {:e}, positive off-diagonal {:e}",
                v.asymmetry, v.max_row_sum, v.max_positive_offdiag
            )));
        }
        Ok(l)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.0[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn violations(&self) -> LaplacianViolations {
        let m = &self.0;
        let n = m.nrows();
        let mut v = LaplacianViolations::default();
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                sum += m[(i, j)];
                if i != j {
                    v.asymmetry = v.asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
                    v.max_positive_offdiag = v.max_positive_offdiag.max(m[(i, j)]);
                }
            }
            v.max_row_sum = v.max_row_sum.max(sum.abs());
        }
        v
    }
}

/// Largest deviations from the Laplacian invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LaplacianViolations {
    pub asymmetry: f64,
    pub max_row_sum: f64,
    pub max_positive_offdiag: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn unit_triangle() -> WeightedGraph {
        WeightedGraph::load_graph("a b 1\nb a 1\nb c 1\nc b 1\na c 1\nc a 1").unwrap()
    }

    fn undirected(pairs: &[(&str, &str)]) -> WeightedGraph {
        let mut text = String::new();
        for (a, b) in pairs {
            text.push_str(&format!("{a} {b} 1\n{b} {a} 1\n"));
        }
        WeightedGraph::load_graph(&text).unwrap()
    }

    #[test]
    fn smallest_symmetric_graph() {
        let g = WeightedGraph::load_graph("a b 1\nb a 1").unwrap();
        assert_eq!(g.n(), 2);
        assert!(g.is_symmetric());
        assert_eq!(g.degrees(), vec![1.0, 1.0]);
        assert_eq!(g.labels(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(
            WeightedGraph::load_graph("a b -1"),
            Err(Error::NegativeWeight { line: 1, weight: -1.0 })
        );
        assert!(matches!(
            WeightedGraph::load_graph("a b 1\na b 2"),
            Err(Error::DuplicateEdge { line: 2, .. })
        ));
        assert!(matches!(
            WeightedGraph::load_graph("# header\na b"),
            Err(Error::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            WeightedGraph::load_graph("a b x"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = WeightedGraph::load_graph("# c\n\na b 2 # trailing\nb a 2\n").unwrap();
        assert_eq!(g.degrees(), vec![2.0, 2.0]);
    }

    #[test]
    fn triangle_degrees() {
        assert_eq!(unit_triangle().degrees(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn star_degrees_before_and_after_repair() {
        let g = WeightedGraph::parse_edge_list("c x 2\nc y 2\nc z 2").unwrap();
        assert_eq!(g.degrees(), vec![6.0, 0.0, 0.0, 0.0]);
        let (fixed, repaired) = g.repair_dangling();
        assert_eq!(repaired, vec![1, 2, 3]);
        let d = fixed.degrees();
        assert_eq!(d[0], 6.0);
        for &x in &d[1..] {
            assert!((x - 1.0).abs() < 1e-15);
        }
        assert_eq!(fixed.weight(1, 1), 0.25);
        assert!(fixed.dangling_nodes().is_empty());
    }

    #[test]
    fn self_loops_count_in_degrees() {
        let g = WeightedGraph::load_graph("a a 3\na b 1\nb a 1").unwrap();
        assert_eq!(g.degrees(), vec![4.0, 1.0]);
        assert!(g.is_symmetric());
    }

    #[test]
    fn single_edge_laplacian() {
        let g = WeightedGraph::load_graph("1 2 1\n2 1 1").unwrap();
        let l = g.laplacian();
        assert_eq!(l.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn laplacian_diagonal_is_degrees() {
        let g = WeightedGraph::load_graph("a b 2\nb c 3\nc a 0.5\na a 1").unwrap();
        assert_eq!(g.laplacian().diagonal(), {
            let mut d = g.degrees();
            // the self-loop cancels on the diagonal of D - W
            d[0] -= 1.0;
            d
        });
        let v = g.laplacian().violations();
        assert!(v.max_row_sum < 1e-12);
    }

    #[test]
    fn triangle_normalized_spectrum() {
        let l = unit_triangle().normalized_laplacian().unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(l.into_matrix()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.0, 1.5, 1.5]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn normalized_laplacian_needs_symmetry() {
        let g = WeightedGraph::load_graph("a b 1\nb a 2").unwrap();
        assert_eq!(g.normalized_laplacian(), Err(Error::AsymmetricInput));
    }

    #[test]
    fn conductance_examples() {
        let edge = undirected(&[("1", "2")]);
        assert_eq!(edge.conductance(&[0]).unwrap(), 1.0);

        let cycle = undirected(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        assert_eq!(cycle.conductance(&[0, 1]).unwrap(), 0.5);

        let bridged = undirected(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("d", "e"),
            ("e", "f"),
            ("f", "d"),
            ("c", "d"),
        ]);
        assert!((bridged.conductance(&[0, 1, 2]).unwrap() - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn conductance_errors() {
        let g = undirected(&[("a", "b"), ("b", "c")]);
        assert_eq!(g.conductance(&[]), Err(Error::EmptyOrFullSet));
        assert_eq!(g.conductance(&[0, 1, 2]), Err(Error::EmptyOrFullSet));
        assert!(matches!(g.conductance(&[7]), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn connectivity() {
        assert!(undirected(&[("a", "b"), ("b", "c")]).is_connected());
        assert!(!undirected(&[("a", "b"), ("c", "d")]).is_connected());
        let chain = WeightedGraph::load_graph("a b 1\nb c 1").unwrap();
        // c is repaired with a uniform row, which closes the cycle
        assert!(chain.is_strongly_connected());
        let raw = WeightedGraph::parse_edge_list("a b 1\nb c 1").unwrap();
        assert!(!raw.is_strongly_connected());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = WeightedGraph::load_graph("x y 0.1\ny x 0.1\ny z 3.25\nz y 3.25\nz z 1e-3").unwrap();
        let back = WeightedGraph::load_graph(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
    }
}
