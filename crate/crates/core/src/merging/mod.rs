//! Clique merging: the reduced clique graph strategy and two clique tree
//! strategies, plus clique tree recovery after graph merging.

mod graph;
mod tree_merge;
mod weights;

pub use graph::{
    build_reduced_clique_graph, clique_graph_merge, recover_clique_tree, MergeLogEntry, ReducedCliqueGraph,
};
pub use tree_merge::{parent_child_merge, sparsecolo_criterion, sparsecolo_merge};
pub use weights::{
    calibrate_estimated_weight, edge_weight, estimated_weight, fit_projection_model, measure_projection_times,
    nominal_weight, projection_cost, CALIBRATION_SIZES, DEFAULT_ESTIMATED,
};

use crate::chordal::CliqueTree;
use crate::error::Result;
use crate::model::MergeStrategy;

/// Applies a merge strategy and returns the new tree with the number of
/// pairwise merges performed.
pub fn merge_tree(tree: CliqueTree, strategy: &MergeStrategy) -> Result<(CliqueTree, usize)> {
    if tree.len() < 2 {
        return Ok((tree, 0));
    }
    match *strategy {
        MergeStrategy::None => Ok((tree, 0)),
        MergeStrategy::ParentChild { t_fill, t_size } => parent_child_merge(&tree, t_fill, t_size),
        MergeStrategy::SparseColo { sigma_merge } => sparsecolo_merge(&tree, sigma_merge),
        MergeStrategy::CliqueGraph(w) => {
            let mut g = build_reduced_clique_graph(&tree, w);
            let log = clique_graph_merge(&mut g);
            if log.is_empty() {
                return Ok((tree, 0));
            }
            Ok((recover_clique_tree(&g)?, log.len()))
        }
    }
}
