//! Graph generators and brute-force oracles shared by the integration tests.
//! Oracles here avoid the library's own solvers on purpose.

#![allow(dead_code)]

use essence::WeightedGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in (0, 2].
pub fn weight(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * (1.0 - rng.random::<f64>())
}

fn build(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
    let labels = (0..n).map(|i| format!("n{i}")).collect();
    WeightedGraph::from_edges(labels, edges.iter().copied()).unwrap()
}

/// Random spanning tree plus about `n/2` extra edges, weights in (0, 2].
pub fn connected_symmetric(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mut pairs = std::collections::BTreeMap::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v), weight(rng));
    }
    for _ in 0..n / 2 + rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            pairs.entry((a.min(b), a.max(b))).or_insert_with(|| weight(rng));
        }
    }
    let edges: Vec<_> = pairs
        .into_iter()
        .flat_map(|((u, v), w)| [(u, v, w), (v, u, w)])
        .collect();
    build(n, &edges)
}

/// A directed Hamiltonian cycle in random order plus random one-way
/// extras. Reverse edges are never added, so the weight matrix is far from
/// symmetric.
pub fn strongly_connected_directed(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = std::collections::BTreeMap::new();
    for i in 0..n {
        pairs.insert((order[i], order[(i + 1) % n]), weight(rng));
    }
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !pairs.contains_key(&(b, a)) {
            pairs.entry((a, b)).or_insert_with(|| weight(rng));
        }
    }
    let edges: Vec<_> = pairs.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    build(n, &edges)
}

pub fn two_triangles_bridge() -> WeightedGraph {
    WeightedGraph::load_graph(
        "a b 1\nb a 1\nb c 1\nc b 1\na c 1\nc a 1\nc d 1\nd c 1\nd e 1\ne d 1\ne f 1\nf e 1\nd f 1\nf d 1",
    )
    .unwrap()
}

pub fn dense(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.n();
    (0..n).map(|u| (0..n).map(|v| g.weight(u, v)).collect()).collect()
}

/// Gauss–Jordan with partial pivoting; returns `A⁻¹ B`.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
        }
        for j in 0..m {
            b[col][j] /= p;
        }
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                }
                for j in 0..m {
                    b[i][j] -= f * b[col][j];
                }
            }
        }
    }
    b
}

/// `α (I − (1−α) M)⁻¹` with `M = D⁻¹ W`.
pub fn ppr_oracle(g: &WeightedGraph, alpha: f64) -> Vec<Vec<f64>> {
    let n = g.n();
    let w = dense(g);
    let d: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let a = (0..n)
        .map(|u| {
            (0..n)
                .map(|v| (u == v) as u8 as f64 - (1.0 - alpha) * w[u][v] / d[u])
                .collect()
        })
        .collect();
    let identity = (0..n)
        .map(|u| (0..n).map(|v| if u == v { alpha } else { 0.0 }).collect())
        .collect();
    solve(a, identity)
}

/// Minimum conductance over all `2^n − 2` proper cuts.
pub fn brute_min_conductance(g: &WeightedGraph) -> f64 {
    let n = g.n();
    assert!(n <= 20);
    let w = dense(g);
    let d: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let inside = |u: usize| mask >> u & 1 == 1;
        let mut cut = 0.0;
        let (mut vol_in, mut vol_out) = (0.0, 0.0);
        for u in 0..n {
            if inside(u) {
                vol_in += d[u];
                for v in (0..n).filter(|&v| !inside(v)) {
                    cut += w[u][v];
                }
            } else {
                vol_out += d[u];
            }
        }
        best = best.min(cut / f64::min(vol_in, vol_out));
    }
    best
}

/// Conductance of `set` computed directly from the definition.
pub fn conductance_oracle(g: &WeightedGraph, set: &[usize]) -> f64 {
    let n = g.n();
    let w = dense(g);
    let inside: Vec<bool> = (0..n).map(|u| set.contains(&u)).collect();
    let mut cut = 0.0;
    let (mut a, mut b) = (0.0, 0.0);
    for u in 0..n {
        let du: f64 = w[u].iter().sum();
        if inside[u] {
            a += du;
            cut += (0..n).filter(|&v| !inside[v]).map(|v| w[u][v]).sum::<f64>();
        } else {
            b += du;
        }
    }
    cut / a.min(b)
}

/// Shapley values by enumerating all `n!` arrival orders.
pub fn shapley_by_permutations(n: usize, value: impl Fn(u64) -> f64) -> Vec<f64> {
    fn permute(order: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
        if k == order.len() {
            visit(order);
            return;
        }
        for i in k..order.len() {
            order.swap(k, i);
            permute(order, k + 1, visit);
            order.swap(k, i);
        }
    }
    let mut total = vec![0.0; n];
    let mut count = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    permute(&mut order, 0, &mut |perm| {
        let mut s = 0u64;
        for &p in perm {
            let before = value(s);
            s |= 1 << p;
            total[p] += value(s) - before;
        }
        count += 1;
    });
    total.iter().map(|t| t / count as f64).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn quad(m: &[Vec<f64>], x: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| x[i] * (0..x.len()).map(|j| m[i][j] * x[j]).sum::<f64>())
        .sum()
}

/// `D − W` from a dense weight matrix.
pub fn laplacian_of(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    (0..n)
        .map(|u| {
            let d: f64 = w[u].iter().sum();
            (0..n).map(|v| if u == v { d - w[u][v] } else { -w[u][v] }).collect()
        })
        .collect()
}
