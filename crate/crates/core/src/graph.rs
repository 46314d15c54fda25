//! Undirected simple graphs, edge-list ingestion and bounded breadth-first search.
//!
//! Node ids are dense `0..n`. Files may use arbitrary whitespace-free tokens; they are
//! re-indexed in first-appearance order by [`load_edge_list`].

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Unordered node pair, stored smaller id first (see [`canonical`]).
pub type NodePair = (usize, usize);

pub fn canonical(u: usize, v: usize) -> NodePair {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<NodePair>,
}

impl Graph {
    /// Builds a graph on `num_nodes` nodes. Duplicate and reversed pairs collapse; self-loops
    /// are rejected since internal callers never produce them.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = NodePair>,
    {
        let mut canon = Vec::new();
        for (u, v) in edges {
            for id in [u, v] {
                if id >= num_nodes {
                    return Err(Error::NodeOutOfRange { id, num_nodes });
                }
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
            canon.push(canonical(u, v));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            adjacency,
            edges: canon,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Sorted canonical edge list.
    pub fn edges(&self) -> &[NodePair] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && v < self.num_nodes() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub(crate) fn check_node(&self, id: usize) -> Result<()> {
        if id < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                id,
                num_nodes: self.num_nodes(),
            })
        }
    }

    /// Nodes reachable from `source` within `max_depth` hops, in BFS order with their depth.
    /// `skip` names one undirected edge treated as absent.
    pub(crate) fn bfs_within(
        &self,
        source: usize,
        max_depth: Option<usize>,
        skip: Option<NodePair>,
    ) -> Vec<(usize, usize)> {
        let skip = skip.map(|(a, b)| canonical(a, b));
        let mut depth = vec![usize::MAX; self.num_nodes()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        depth[source] = 0;
        queue.push_back(source);
        while let Some(node) = queue.pop_front() {
            let d = depth[node];
            order.push((node, d));
            if max_depth.is_some_and(|limit| d >= limit) {
                continue;
            }
            for &next in &self.adjacency[node] {
                if depth[next] != usize::MAX || skip == Some(canonical(node, next)) {
                    continue;
                }
                depth[next] = d + 1;
                queue.push_back(next);
            }
        }
        order
    }

    /// Hop distances from `source` to every node, `None` where unreachable.
    pub(crate) fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; self.num_nodes()];
        for (node, d) in self.bfs_within(source, None, None) {
            out[node] = Some(d);
        }
        out
    }

    /// Writes one `u v` line per edge with `u < v`, sorted.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Exact hop counts from `source` for every node within `max_depth` (`None` = unlimited).
/// Absent keys are farther than `max_depth` or unreachable.
pub fn bounded_bfs(
    g: &Graph,
    source: usize,
    max_depth: Option<usize>,
) -> Result<HashMap<usize, usize>> {
    g.check_node(source)?;
    Ok(g.bfs_within(source, max_depth, None).into_iter().collect())
}

/// A graph read from an edge-list file, with the original node tokens and cleanup counts.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `tokens[i]` is the file token that became node `i`.
    pub tokens: Vec<String>,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
}

/// Parses a whitespace-separated edge list. Lines starting with `#` or `%` are comments;
/// any fields after the first two are ignored.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<LoadedGraph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut tokens = Vec::new();
    let mut raw = Vec::new();
    let mut self_loops = 0;

    let mut intern = |tok: &str, tokens: &mut Vec<String>| -> usize {
        match ids.entry(tok.to_owned()) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                tokens.push(tok.to_owned());
                *e.insert(tokens.len() - 1)
            }
        }
    };

    for (index, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: index + 1,
                message: format!("expected two node tokens, found {trimmed:?}"),
            });
        };
        let u = intern(a, &mut tokens);
        let v = intern(b, &mut tokens);
        if u == v {
            self_loops += 1;
            continue;
        }
        raw.push(canonical(u, v));
    }

    if tokens.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop line(s)");
    }
    let total = raw.len();
    let graph = Graph::from_edges(tokens.len(), raw)?;
    Ok(LoadedGraph {
        duplicates_collapsed: total - graph.num_edges(),
        graph,
        tokens,
        self_loops_dropped: self_loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> LoadedGraph {
        load_edge_list(text.as_bytes()).unwrap()
    }

    #[test]
    fn minimal_path() {
        let g = load("0 1\n1 2").graph;
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn dedup_and_self_loop() {
        let loaded = load("a b\nb a\na a");
        assert_eq!(loaded.graph.num_nodes(), 2);
        assert_eq!(loaded.graph.num_edges(), 1);
        assert_eq!(loaded.self_loops_dropped, 1);
        assert_eq!(loaded.duplicates_collapsed, 1);
        assert_eq!(loaded.tokens, vec!["a", "b"]);
    }

    #[test]
    fn comments_and_extra_columns() {
        let g = load("% pajek style\n# snap style\n\n5 7 1.0\n7 9\n").graph;
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = load_edge_list("0 1\n2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(
            load_edge_list("".as_bytes()),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(
            load_edge_list("# only\n".as_bytes()),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn degree_invariants() {
        let g = load("0 1\n1 2\n2 0\n2 3").graph;
        let total: usize = (0..g.num_nodes()).map(|n| g.degree(n)).sum();
        assert_eq!(total, 2 * g.num_edges());
        assert_eq!(g.max_degree(), 3);
        assert!(g.has_edge(3, 2) && g.has_edge(2, 3) && !g.has_edge(0, 3));
    }

    #[test]
    fn bfs_on_path() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let full = bounded_bfs(&g, 0, Some(2)).unwrap();
        assert_eq!(full, HashMap::from([(0, 0), (1, 1), (2, 2)]));
        let short = bounded_bfs(&g, 0, Some(1)).unwrap();
        assert_eq!(short, HashMap::from([(0, 0), (1, 1)]));
    }

    #[test]
    fn bfs_on_four_cycle() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        for s in 0..4 {
            let d = bounded_bfs(&g, s, None).unwrap();
            assert_eq!(d[&((s + 2) % 4)], 2);
            assert_eq!(d[&((s + 1) % 4)], 1);
        }
    }

    #[test]
    fn bfs_rejects_bad_source() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(matches!(
            bounded_bfs(&g, 2, None),
            Err(Error::NodeOutOfRange { id: 2, .. })
        ));
    }

    #[test]
    fn bfs_skip_edge() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let d: HashMap<_, _> = g.bfs_within(0, None, Some((2, 0))).into_iter().collect();
        assert_eq!(d[&2], 2);
    }

    #[test]
    fn export_is_sorted_canonical() {
        let g = load("c b\nb a\na c").graph;
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1\n0 2\n1 2\n");
    }
}
