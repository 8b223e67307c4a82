//! Sparsity analysis of PSD blocks, chordal extension, clique trees, the
//! decomposition of a PSD block into clique blocks and PSD completion.

mod completion;
mod decompose;
mod pattern;
mod tree;

pub use completion::{clique_min_eigenvalues, psd_complete};
pub use decompose::{
    analyse_block, decompose, decompose_auto, BlockMap, Decomposition, DecompositionMap, MAX_DECOMPOSE_DENSITY,
    MIN_DECOMPOSE_SIDE,
};
pub use pattern::{
    aggregate_sparsity, chordal_extension, is_perfect_elimination_ordering, maximum_cardinality_search,
    mcs_is_chordal, SparsityPattern,
};
pub(crate) use tree::intersection_size;
pub use tree::{build_clique_tree, CliqueTree};
