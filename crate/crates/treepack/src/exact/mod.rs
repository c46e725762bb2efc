//! Exact step: the finishers that turn the leftover graph into the last
//! pieces of every copy.

pub mod large;
pub mod orient;
pub mod paths;
pub mod small;

use crate::embed::digraph::JRes;
use crate::embed::EmbeddingState;
use crate::graph::Graph;
use crate::oracle::Decomposition;

pub use large::large_stars;
pub use orient::degree_target_orient;
pub use paths::paths_parity_and_reserve;
pub use small::small_stars;

/// Unused host edges.
pub fn free_graph(s: &EmbeddingState) -> Graph {
    let edges: Vec<(usize, usize)> = s.host.edges().into_iter().filter(|&(x, y)| !s.is_used(x, y)).collect();
    Graph::from_edges(s.n(), &edges).expect("subgraph of a valid graph")
}

/// `x ∈ N_{J_ex}(w)`. Hand-built states never ran DIGRAPH and allow every pair.
pub fn in_j_ex(s: &EmbeddingState, x: usize, w: usize) -> bool {
    match &s.dg {
        None => true,
        Some(dg) => dg.j_label(x, w) == Some(JRes::Ex),
    }
}

/// The finished copies, once every `φ_w` is total.
pub fn to_decomposition(s: &EmbeddingState) -> Option<Decomposition> {
    let copies: Option<Vec<Vec<usize>>> = s.phi.iter().map(|m| m.iter().copied().collect()).collect();
    Some(Decomposition { host: s.host.clone(), tree: s.tree.clone(), copies: copies? })
}
