//! Link prediction from persistent homology of enclosing subgraphs.
//!
//! The pipeline per candidate link: extract `(k,l)`-angle-hop subgraphs ([`subgraph`]), label
//! nodes by double-radius distance to two centers ([`labeling`]), run a flag filtration over the
//! induced edge weights ([`persistence`]), vectorize the diagrams with and without the target
//! link as persistence images ([`vectorize`]), and classify with a softmax mixture of per-angle
//! MLPs ([`model`]). [`experiment`] drives seeded repetitions end to end.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod labeling;
pub mod model;
pub mod persistence;
pub mod split;
pub mod subgraph;
pub mod vectorize;

pub use error::{Error, Result};
pub use graph::{bounded_bfs, load_edge_list, Graph};
pub use subgraph::{add_target_link, extract_angle_hop, Angle, EnclosingSubgraph};
