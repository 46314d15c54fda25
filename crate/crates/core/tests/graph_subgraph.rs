mod common;

use std::io::Cursor;

use phlp::graph::{bounded_bfs, canonical, load_edge_list, Graph};
use phlp::subgraph::{add_target_link, extract_angle_hop, Angle, TargetNeighborhood};
use proptest::prelude::*;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    common::weighted_graph(max_nodes).prop_map(|(n, edges)| {
        Graph::from_edges(n, edges.into_iter().map(|(a, b, _)| (a, b))).unwrap()
    })
}

fn pair_in(g: &Graph, a: usize, b: usize) -> Option<(usize, usize)> {
    let n = g.num_nodes();
    if n < 2 {
        return None;
    }
    let (u, v) = (a % n, b % n);
    if u == v {
        Some((u, (u + 1) % n))
    } else {
        Some((u, v))
    }
}

proptest! {
    #[test]
    fn bfs_triangle_inequality(g in graph_strategy(14), s in 0usize..14, t in 0usize..14) {
        let n = g.num_nodes();
        let (s, t) = (s % n, t % n);
        let ds = bounded_bfs(&g, s, None).unwrap();
        let dt = bounded_bfs(&g, t, None).unwrap();
        if let Some(&st) = ds.get(&t) {
            for (w, &dsw) in &ds {
                if let Some(&dtw) = dt.get(w) {
                    prop_assert!(dsw <= st + dtw);
                }
            }
        }
        for &(a, b) in g.edges() {
            if let (Some(&da), Some(&db)) = (ds.get(&a), ds.get(&b)) {
                prop_assert!(da.abs_diff(db) <= 1);
            } else {
                prop_assert!(!ds.contains_key(&a) && !ds.contains_key(&b));
            }
        }
    }

    #[test]
    fn bounded_bfs_is_a_truncation(g in graph_strategy(14), s in 0usize..14, depth in 0usize..4) {
        let s = s % g.num_nodes();
        let full = bounded_bfs(&g, s, None).unwrap();
        let cut = bounded_bfs(&g, s, Some(depth)).unwrap();
        let expected: std::collections::HashMap<_, _> =
            full.into_iter().filter(|&(_, d)| d <= depth).collect();
        prop_assert_eq!(cut, expected);
    }

    #[test]
    fn swapping_target_mirrors_angle(g in graph_strategy(14), a in 0usize..14, b in 0usize..14, k in 0usize..4, l in 0usize..4) {
        prop_assume!(k + l > 0);
        let Some((u, v)) = pair_in(&g, a, b) else { return Ok(()) };
        let s1 = extract_angle_hop(&g, u, v, k, l).unwrap();
        let s2 = extract_angle_hop(&g, v, u, l, k).unwrap();
        prop_assert_eq!(&s1.local_to_global, &s2.local_to_global);
        prop_assert_eq!(s1.graph.edges(), s2.graph.edges());
        prop_assert_eq!(s1.target, (s2.target.1, s2.target.0));
    }

    #[test]
    fn monotone_in_both_radii(g in graph_strategy(14), a in 0usize..14, b in 0usize..14, k in 0usize..3, l in 0usize..3) {
        prop_assume!(k + l > 0);
        let Some((u, v)) = pair_in(&g, a, b) else { return Ok(()) };
        let base = extract_angle_hop(&g, u, v, k, l).unwrap();
        for bigger in [extract_angle_hop(&g, u, v, k + 1, l).unwrap(), extract_angle_hop(&g, u, v, k, l + 1).unwrap()] {
            for node in &base.local_to_global {
                prop_assert!(bigger.local_to_global.binary_search(node).is_ok());
            }
        }
    }

    #[test]
    fn target_edge_absent_until_added(g in graph_strategy(14), a in 0usize..14, b in 0usize..14, k in 1usize..4) {
        let Some((u, v)) = pair_in(&g, a, b) else { return Ok(()) };
        let sub = extract_angle_hop(&g, u, v, k, k).unwrap();
        let (lu, lv) = sub.target;
        prop_assert!(!sub.graph.has_edge(lu, lv));
        let plus = add_target_link(&sub).unwrap();
        prop_assert!(plus.graph.has_edge(lu, lv));
        prop_assert_eq!(plus.graph.num_edges(), sub.graph.num_edges() + 1);
        // every other observed edge between kept nodes is induced
        for &(x, y) in g.edges() {
            if canonical(x, y) == canonical(u, v) {
                continue;
            }
            if let (Some(i), Some(j)) = (sub.global_to_local(x), sub.global_to_local(y)) {
                prop_assert!(sub.graph.has_edge(i, j));
            }
        }
    }

    #[test]
    fn shared_neighborhood_matches_direct_extraction(g in graph_strategy(14), a in 0usize..14, b in 0usize..14) {
        let Some((u, v)) = pair_in(&g, a, b) else { return Ok(()) };
        let nbhd = TargetNeighborhood::new(&g, u, v, 3).unwrap();
        for angle in Angle::menu(3) {
            let direct = extract_angle_hop(&g, u, v, angle.k, angle.l).unwrap();
            prop_assert_eq!(nbhd.extract(angle).unwrap(), direct);
        }
    }
}

#[test]
fn loader_spec_cases() {
    let text = "# comment\n% other\n\na b\nb c extra\nc c\nb a\n";
    let loaded = load_edge_list(Cursor::new(text)).unwrap();
    assert_eq!(loaded.graph.num_nodes(), 3);
    assert_eq!(loaded.graph.num_edges(), 2);
    assert_eq!(loaded.self_loops_dropped, 1);
    assert_eq!(loaded.duplicates_collapsed, 1);
    assert!(load_edge_list(Cursor::new("1 2\n3\n")).is_err());
    assert!(load_edge_list(Cursor::new("# nothing\n")).is_err());
}

#[test]
fn path_distances() {
    let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let d = bounded_bfs(&g, 0, Some(2)).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d[&2], 2);
    assert!(bounded_bfs(&g, 7, None).is_err());
}
