//! (k,l)-angle-hop enclosing subgraphs around a target pair.
//!
//! The node set is `{ z : d(u,z) <= k or d(z,v) <= l }`, with distances taken in the
//! observed graph after removing the target edge. The induced edge set never contains the
//! target edge until [`add_target_link`] is applied.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, Graph, NodePair};

/// Hop radii around the first (`k`) and second (`l`) target node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Angle {
    pub k: usize,
    pub l: usize,
}

impl Angle {
    pub fn new(k: usize, l: usize) -> Self {
        Self { k, l }
    }

    pub fn swapped(self) -> Self {
        Self {
            k: self.l,
            l: self.k,
        }
    }

    pub fn is_symmetric(self) -> bool {
        self.k == self.l
    }

    /// Every angle `(k,l)` with `0 <= l <= k <= max_hop` and `k > 0`, ordered by `k` then `l`.
    pub fn menu(max_hop: usize) -> Vec<Angle> {
        (1..=max_hop)
            .flat_map(|k| (0..=k).map(move |l| Angle { k, l }))
            .collect()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnclosingSubgraph {
    pub graph: Graph,
    /// Local node `i` is global node `local_to_global[i]`; sorted ascending.
    pub local_to_global: Vec<usize>,
    /// Local ids of the target pair `(u, v)`, in the order they were requested.
    pub target: (usize, usize),
    pub angle: Angle,
    pub has_target_link: bool,
}

impl EnclosingSubgraph {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn global_to_local(&self, global: usize) -> Option<usize> {
        self.local_to_global.binary_search(&global).ok()
    }
}

/// Bounded BFS layers around both target nodes, computed once and reused for every angle
/// up to `max_hop`.
#[derive(Clone, Debug)]
pub struct TargetNeighborhood<'g> {
    obs: &'g Graph,
    u: usize,
    v: usize,
    from_u: Vec<(usize, usize)>,
    from_v: Vec<(usize, usize)>,
    max_hop: usize,
}

impl<'g> TargetNeighborhood<'g> {
    pub fn new(obs: &'g Graph, u: usize, v: usize, max_hop: usize) -> Result<Self> {
        obs.check_node(u)?;
        obs.check_node(v)?;
        if u == v {
            return Err(Error::invalid(format!(
                "target pair must be distinct, got ({u},{u})"
            )));
        }
        let skip = Some(canonical(u, v));
        Ok(Self {
            obs,
            u,
            v,
            from_u: obs.bfs_within(u, Some(max_hop), skip),
            from_v: obs.bfs_within(v, Some(max_hop), skip),
            max_hop,
        })
    }

    pub fn extract(&self, angle: Angle) -> Result<EnclosingSubgraph> {
        if angle.k == 0 && angle.l == 0 {
            return Err(Error::invalid("angle (0,0) is not an enclosing subgraph"));
        }
        if angle.k > self.max_hop || angle.l > self.max_hop {
            return Err(Error::invalid(format!(
                "angle {angle} exceeds the precomputed radius {}",
                self.max_hop
            )));
        }
        // BFS order is depth-sorted, so each side is a prefix.
        let mut nodes: Vec<usize> = self
            .from_u
            .iter()
            .take_while(|&&(_, d)| d <= angle.k)
            .chain(self.from_v.iter().take_while(|&&(_, d)| d <= angle.l))
            .map(|&(n, _)| n)
            .collect();
        nodes.sort_unstable();
        nodes.dedup();

        let local = |g: usize| nodes.binary_search(&g).ok();
        let target_edge = canonical(self.u, self.v);
        let mut edges = Vec::new();
        for (i, &z) in nodes.iter().enumerate() {
            for &w in self.obs.neighbors(z) {
                if w <= z || canonical(z, w) == target_edge {
                    continue;
                }
                if let Some(j) = local(w) {
                    edges.push((i, j));
                }
            }
        }
        let target = (local(self.u).unwrap(), local(self.v).unwrap());
        Ok(EnclosingSubgraph {
            graph: Graph::from_edges(nodes.len(), edges)?,
            local_to_global: nodes,
            target,
            angle,
            has_target_link: false,
        })
    }
}

/// The `(k,l)`-angle-hop enclosing subgraph of `(u, v)`, without the target link.
pub fn extract_angle_hop(
    obs: &Graph,
    u: usize,
    v: usize,
    k: usize,
    l: usize,
) -> Result<EnclosingSubgraph> {
    TargetNeighborhood::new(obs, u, v, k.max(l))?.extract(Angle::new(k, l))
}

/// Copy of `sub` with the target edge inserted.
pub fn add_target_link(sub: &EnclosingSubgraph) -> Result<EnclosingSubgraph> {
    if sub.has_target_link {
        return Err(Error::invalid("target link already present"));
    }
    let edges: Vec<NodePair> = sub
        .graph
        .edges()
        .iter()
        .copied()
        .chain(std::iter::once(sub.target))
        .collect();
    Ok(EnclosingSubgraph {
        graph: Graph::from_edges(sub.num_nodes(), edges)?,
        local_to_global: sub.local_to_global.clone(),
        target: sub.target,
        angle: sub.angle,
        has_target_link: true,
    })
}
