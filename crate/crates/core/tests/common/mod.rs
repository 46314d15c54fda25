//! Brute-force references and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use phlp::graph::Graph;
use phlp::labeling::EdgeWeights;
use phlp::model::MaPhlpModel;
use phlp::persistence::{Filtration, PersistenceDiagram, PersistencePair};
use phlp::subgraph::{Angle, EnclosingSubgraph};
use proptest::prelude::*;

pub const ORACLE_H0_MAX_NODES: usize = 64;

pub fn subgraph(n: usize, edges: &[(usize, usize)]) -> EnclosingSubgraph {
    EnclosingSubgraph {
        graph: Graph::from_edges(n, edges.iter().copied()).unwrap(),
        local_to_global: (0..n).collect(),
        target: (0, 1.min(n.saturating_sub(1))),
        angle: Angle::new(1, 1),
        has_target_link: false,
    }
}

/// Weighted subgraph with weights aligned to the graph's sorted edge list.
pub fn weighted(n: usize, edges: &[(usize, usize, f64)]) -> (EnclosingSubgraph, EdgeWeights) {
    let sub = subgraph(
        n,
        &edges.iter().map(|&(a, b, _)| (a, b)).collect::<Vec<_>>(),
    );
    let weights = sub
        .graph
        .edges()
        .iter()
        .map(|&(a, b)| {
            edges
                .iter()
                .find(|&&(x, y, _)| (x.min(y), x.max(y)) == (a, b))
                .unwrap()
                .2
        })
        .collect();
    (sub, EdgeWeights { weights })
}

/// Random simple graph on `1..=max_nodes` nodes with weights drawn from a small set (so ties
/// are common) or from a continuous range.
pub fn random_weighted<R: rand::Rng>(
    rng: &mut R,
    max_nodes: usize,
) -> (usize, Vec<(usize, usize, f64)>) {
    let n = rng.random_range(1..=max_nodes);
    let density = rng.random_range(0.0..0.8);
    let tied: bool = rng.random();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < density {
                let w = if tied {
                    rng.random_range(1..=4) as f64
                } else {
                    rng.random_range(1.0..10.0)
                };
                edges.push((a, b, w));
            }
        }
    }
    (n, edges)
}

pub fn weighted_graph(
    max_nodes: usize,
) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    any::<u64>().prop_map(move |seed| {
        use rand::SeedableRng;
        random_weighted(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), max_nodes)
    })
}

/// Connected components of the subgraph restricted to edges with weight `<= t`, by
/// repeated depth-first relabelling.
fn components_at(n: usize, edges: &[(usize, usize)], weights: &[f64], t: f64) -> usize {
    let mut adj = vec![Vec::new(); n];
    for (&(a, b), &w) in edges.iter().zip(weights) {
        if w <= t {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    count
}

/// Dimension-0 diagram from component counts at every distinct threshold.
pub fn oracle_h0(
    sub: &EnclosingSubgraph,
    weights: &EdgeWeights,
) -> Result<PersistenceDiagram, String> {
    let n = sub.num_nodes();
    if n > ORACLE_H0_MAX_NODES {
        return Err(format!(
            "oracle_h0 handles at most {ORACLE_H0_MAX_NODES} nodes, got {n}"
        ));
    }
    let edges = sub.graph.edges();
    let mut thresholds: Vec<f64> = weights.weights.clone();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let cap = thresholds.last().copied().unwrap_or(0.0);
    let mut pairs = Vec::new();
    let mut prev = n;
    for &t in &thresholds {
        let now = components_at(n, edges, &weights.weights, t);
        for _ in now..prev {
            pairs.push(PersistencePair {
                birth: 0.0,
                death: t,
                dim: 0,
                essential: false,
            });
        }
        prev = now;
    }
    for _ in 0..prev {
        pairs.push(PersistencePair {
            birth: 0.0,
            death: cap,
            dim: 0,
            essential: true,
        });
    }
    Ok(PersistenceDiagram::new(pairs, cap))
}

/// Textbook left-to-right column reduction over GF(2) on a dense matrix, no clearing.
pub fn naive_reduce(f: &Filtration) -> PersistenceDiagram {
    let s = &f.simplices;
    let n = s.len();
    let mut m = vec![vec![false; n]; n];
    for (j, sj) in s.iter().enumerate() {
        if sj.dim == 0 {
            continue;
        }
        let vj: BTreeSet<usize> = sj.vertices().iter().copied().collect();
        for (i, si) in s.iter().enumerate() {
            if si.dim + 1 == sj.dim && si.vertices().iter().all(|v| vj.contains(v)) {
                m[i][j] = true;
            }
        }
    }
    let low = |m: &Vec<Vec<bool>>, j: usize| (0..n).rev().find(|&i| m[i][j]);
    for j in 0..n {
        while let Some(l) = low(&m, j) {
            let Some(k) = (0..j).find(|&k| low(&m, k) == Some(l)) else {
                break;
            };
            for row in m.iter_mut() {
                row[j] ^= row[k];
            }
        }
    }
    let cap = f.max_value();
    let mut pairs = Vec::new();
    let mut killed = vec![false; n];
    for j in 0..n {
        if let Some(l) = low(&m, j) {
            killed[l] = true;
            pairs.push(PersistencePair {
                birth: s[l].value,
                death: s[j].value,
                dim: s[l].dim,
                essential: false,
            });
        }
    }
    for j in 0..n {
        if low(&m, j).is_none() && !killed[j] && s[j].dim < f.max_dim {
            pairs.push(PersistencePair {
                birth: s[j].value,
                death: cap,
                dim: s[j].dim,
                essential: true,
            });
        }
    }
    PersistenceDiagram::new(pairs, cap)
}

/// Rank over GF(2) of a set of columns given as row indices.
pub fn gf2_rank(columns: &[Vec<usize>], rows: usize) -> usize {
    let words = rows.div_ceil(64).max(1);
    let top = |v: &[u64]| (0..rows).rev().find(|&r| v[r / 64] >> (r % 64) & 1 == 1);
    // basis vector keyed by its highest set row
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; rows];
    let mut rank = 0;
    for col in columns {
        let mut v = vec![0u64; words];
        for &r in col {
            v[r / 64] ^= 1 << (r % 64);
        }
        while let Some(p) = top(&v) {
            match &basis[p] {
                Some(b) => v.iter_mut().zip(b).for_each(|(x, y)| *x ^= y),
                None => {
                    basis[p] = Some(v);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Betti numbers `(b0, b1, b2)` of the full 2-dimensional flag complex of `g`.
pub fn betti_flag(g: &Graph) -> (usize, usize, usize) {
    let n = g.num_nodes();
    let edges = g.edges();
    let mut triangles = Vec::new();
    for &(a, b) in edges {
        for c in b + 1..n {
            if g.has_edge(a, c) && g.has_edge(b, c) {
                triangles.push([a, b, c]);
            }
        }
    }
    let d1: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
    let edge_index = |a: usize, b: usize| edges.binary_search(&(a, b)).unwrap();
    let d2: Vec<Vec<usize>> = triangles
        .iter()
        .map(|&[a, b, c]| {
            let mut v = vec![edge_index(a, b), edge_index(a, c), edge_index(b, c)];
            v.sort_unstable();
            v
        })
        .collect();
    let r1 = gf2_rank(&d1, n);
    let r2 = gf2_rank(&d2, edges.len());
    (n - r1, edges.len() - r1 - r2, triangles.len() - r2)
}

/// Weights of a minimum spanning forest by Kruskal with naive component relabelling.
pub fn kruskal_msf(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| weights[i].total_cmp(&weights[j]));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for i in order {
        let (a, b) = edges[i];
        let (ca, cb) = (comp[a], comp[b]);
        if ca != cb {
            for c in comp.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
            out.push(weights[i]);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Weighted Gaussian mass over a rectangle by the midpoint rule on a `400 x 400` grid.
pub fn oracle_pi_cell(
    point: (f64, f64),
    weight: f64,
    cell: ((f64, f64), (f64, f64)),
    sigma: f64,
) -> f64 {
    const SUB: usize = 400;
    let ((x0, x1), (y0, y1)) = cell;
    let (hx, hy) = ((x1 - x0) / SUB as f64, (y1 - y0) / SUB as f64);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
    let gx: Vec<f64> = (0..SUB)
        .map(|i| {
            let x = x0 + (i as f64 + 0.5) * hx;
            (-(x - point.0).powi(2) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let mut total = 0.0;
    for j in 0..SUB {
        let y = y0 + (j as f64 + 0.5) * hy;
        let gy = (-(y - point.1).powi(2) / (2.0 * sigma * sigma)).exp();
        total += gy * gx.iter().sum::<f64>();
    }
    weight * norm * total * hx * hy
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting one half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut good = 0.0;
    let mut total = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            total += 1.0;
            if si > sj {
                good += 1.0;
            } else if si == sj {
                good += 0.5;
            }
        }
    }
    good / total
}

fn param(m: &mut MaPhlpModel, net: usize, layer: usize, which: usize, index: usize) -> &mut f64 {
    let l = &mut m.mlps[net].layers[layer];
    if which == 0 {
        &mut l.weights[index]
    } else {
        &mut l.bias[index]
    }
}

/// Largest relative deviation between analytic gradients and central differences of the
/// mixture loss, over every network parameter and every mixture logit.
pub fn gradient_deviation(
    model: &MaPhlpModel,
    inputs: &[ndarray::Array2<f64>],
    labels: &[bool],
    h: f64,
) -> (f64, f64) {
    let views: Vec<_> = inputs.iter().map(|m| m.view()).collect();
    let grad = model.loss_and_grad(&views, labels).unwrap();
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
    let loss_with = |m: &MaPhlpModel| m.loss(&views, labels).unwrap();

    let mut worst_mlp = 0.0f64;
    for (mi, g) in grad.mlps.iter().enumerate() {
        for (li, gl) in g.layers.iter().enumerate() {
            for which in 0..2 {
                let analytic = if which == 0 { &gl.weights } else { &gl.bias };
                for (pi, &a) in analytic.iter().enumerate() {
                    let mut plus = model.clone();
                    let mut minus = model.clone();
                    *param(&mut plus, mi, li, which, pi) += h;
                    *param(&mut minus, mi, li, which, pi) -= h;
                    let numeric = (loss_with(&plus) - loss_with(&minus)) / (2.0 * h);
                    worst_mlp = worst_mlp.max(rel(a, numeric));
                }
            }
        }
    }
    let mut worst_alpha = 0.0f64;
    for (i, &a) in grad.alpha.iter().enumerate() {
        let mut plus = model.clone();
        let mut minus = model.clone();
        plus.alpha[i] += h;
        minus.alpha[i] -= h;
        let numeric = (loss_with(&plus) - loss_with(&minus)) / (2.0 * h);
        worst_alpha = worst_alpha.max(rel(a, numeric));
    }
    (worst_mlp, worst_alpha)
}

/// A small connected-ish test graph shared by pipeline tests: two dense communities joined
/// by a few bridges.
pub fn two_communities(size: usize, seed: u64) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * size;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let same = (a < size) == (b < size);
            let p = if same { 0.25 } else { 0.02 };
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Random geometric graph in the unit square: strong triadic closure, so links are
/// predictable from local structure.
pub fn geometric(n: usize, radius: f64, seed: u64) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
            if dx * dx + dy * dy < radius * radius {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}
