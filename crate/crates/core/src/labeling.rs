//! Double-radius node labels (plain and degree-corrected) and the edge weights they induce.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subgraph::EnclosingSubgraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    Drnl,
    DegreeDrnl,
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drnl" => Ok(LabelScheme::Drnl),
            "degdrnl" | "degree_drnl" | "degree-drnl" => Ok(LabelScheme::DegreeDrnl),
            other => Err(Error::invalid(format!("unknown labeling scheme {other:?}"))),
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelScheme::Drnl => "drnl",
            LabelScheme::DegreeDrnl => "degdrnl",
        })
    }
}

/// Which subgraph nodes act as the two labeling centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterPolicy {
    /// The target pair itself.
    Target,
    /// Two distinct subgraph nodes drawn uniformly per subgraph.
    Random,
}

impl FromStr for CenterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(CenterPolicy::Target),
            "random" => Ok(CenterPolicy::Random),
            other => Err(Error::invalid(format!("unknown center policy {other:?}"))),
        }
    }
}

impl fmt::Display for CenterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterPolicy::Target => "target",
            CenterPolicy::Random => "random",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeLabeling {
    pub labels: Vec<f64>,
    pub scheme: LabelScheme,
    pub centers: (usize, usize),
}

/// Per-edge filtration values, aligned with `sub.graph.edges()`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights {
    pub weights: Vec<f64>,
}

impl EdgeWeights {
    pub fn max(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

fn check_centers(sub: &EnclosingSubgraph, a: usize, b: usize) -> Result<()> {
    if a == b {
        return Err(Error::invalid(format!(
            "labeling centers must differ, got {a} twice"
        )));
    }
    sub.graph.check_node(a)?;
    sub.graph.check_node(b)
}

fn drnl_of(da: usize, db: usize) -> usize {
    let sum = da + db;
    let (q, r) = (sum / 2, sum % 2);
    1 + da.min(db) + q * (q + r - 1)
}

/// DRNL with distances measured inside `sub`. Centers get label 1; nodes that cannot reach
/// both centers get one more than the largest finite label.
pub fn drnl(sub: &EnclosingSubgraph, a: usize, b: usize) -> Result<NodeLabeling> {
    check_centers(sub, a, b)?;
    let from_a = sub.graph.distances_from(a);
    let from_b = sub.graph.distances_from(b);

    let finite: Vec<Option<usize>> = (0..sub.num_nodes())
        .map(|w| {
            if w == a || w == b {
                return Some(1);
            }
            Some(drnl_of(from_a[w]?, from_b[w]?))
        })
        .collect();
    let sentinel = finite.iter().flatten().max().copied().unwrap_or(1) + 1;
    let labels = finite
        .into_iter()
        .map(|l| l.unwrap_or(sentinel) as f64)
        .collect();
    Ok(NodeLabeling {
        labels,
        scheme: LabelScheme::Drnl,
        centers: (a, b),
    })
}

/// DRNL plus `(M - deg(w)) / M`, with `M` the maximum degree of `sub` (no correction when
/// `sub` has no edges).
pub fn degree_drnl(sub: &EnclosingSubgraph, a: usize, b: usize) -> Result<NodeLabeling> {
    let mut labeling = drnl(sub, a, b)?;
    let max_degree = sub.graph.max_degree();
    if max_degree > 0 {
        let m = max_degree as f64;
        for (w, label) in labeling.labels.iter_mut().enumerate() {
            *label += (m - sub.graph.degree(w) as f64) / m;
        }
    }
    labeling.scheme = LabelScheme::DegreeDrnl;
    Ok(labeling)
}

pub fn label_nodes(
    sub: &EnclosingSubgraph,
    scheme: LabelScheme,
    centers: (usize, usize),
) -> Result<NodeLabeling> {
    match scheme {
        LabelScheme::Drnl => drnl(sub, centers.0, centers.1),
        LabelScheme::DegreeDrnl => degree_drnl(sub, centers.0, centers.1),
    }
}

/// Two distinct uniformly chosen local nodes of `sub`. Local ids follow global id order, so
/// the draw depends only on the node set and `seed`.
pub fn random_centers(sub: &EnclosingSubgraph, seed: u64) -> Result<(usize, usize)> {
    let n = sub.num_nodes();
    if n < 2 {
        return Err(Error::invalid("random centers need at least two nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, n, 2);
    Ok((picked.index(0), picked.index(1)))
}

/// `W(w,z) = max(f(w),f(z)) + min(f(w),f(z)) / max(f(w),f(z))` for every edge of `sub`.
pub fn edge_weights(sub: &EnclosingSubgraph, labels: &NodeLabeling) -> Result<EdgeWeights> {
    if labels.labels.len() != sub.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: sub.num_nodes(),
            actual: labels.labels.len(),
        });
    }
    if let Some(bad) = labels
        .labels
        .iter()
        .find(|l| !l.is_finite() || **l <= 0.0)
    {
        return Err(Error::invalid(format!(
            "node labels must be positive, found {bad}"
        )));
    }
    let weights = sub
        .graph
        .edges()
        .iter()
        .map(|&(w, z)| {
            let (fw, fz) = (labels.labels[w], labels.labels[z]);
            let (lo, hi) = if fw <= fz { (fw, fz) } else { (fz, fw) };
            hi + lo / hi
        })
        .collect();
    Ok(EdgeWeights { weights })
}
