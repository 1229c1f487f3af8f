//! Adaptive, multi-resolution graph coarsening driven by random-projection
//! hashing and a consistent-hashing merge ring.
//!
//! The pipeline hashes every node once, sorts the scores into a ring and
//! records a seeded sequence of rightward merges. Any coarsening ratio above
//! the schedule's floor is then a prefix of that sequence, so a whole family
//! of nested coarsened graphs costs one hashing pass. Heterogeneous graphs are
//! coarsened type by type, so no supernode ever mixes node types.
//!
//! | module | contents |
//! |---|---|
//! | [`graph`] | [`Graph`], Laplacian, heterophily factor |
//! | [`lsh`] | projections, scores, node order |
//! | [`schedule`] | merge schedule, [`CoarseningMatrix`] |
//! | [`coarsen`] | [`CoarsenedGraph`] assembly |
//! | [`pipeline`] | one-pass adaptive driver |
//! | [`hetero`] | type-isolated coarsening |
//! | [`spectral`] | REE, HE and reconstruction error |
//! | [`theory`] | analytic bounds and Monte-Carlo validators |
//!
//! ```
//! use hashcoarsen::{synth, AdaptiveCoarsener, CoarsenConfig};
//!
//! let g = synth::random_geometric(500, 8.0, 4, 7);
//! let coarsener = AdaptiveCoarsener::new(&g, &CoarsenConfig::default(), 0.1)?;
//! let half = coarsener.coarsen(&g, 0.5)?;
//! let tenth = coarsener.coarsen(&g, 0.1)?;
//! assert_eq!(half.num_supernodes(), 250);
//! assert!(half.coarsening().refines(tenth.coarsening()));
//! # Ok::<(), hashcoarsen::Error>(())
//! ```

pub mod bench;
pub mod coarsen;
pub mod error;
pub mod graph;
pub mod hetero;
pub mod io;
pub mod lsh;
pub mod matrix;
pub mod pipeline;
pub mod schedule;
pub mod spectral;
pub mod synth;
pub mod theory;
pub mod timing;

pub use coarsen::{coarsen_graph, CoarsenedGraph};
pub use error::{Error, Result};
pub use graph::{build_laplacian, heterophily_factor, Graph, Laplacian};
pub use lsh::{build_order, project_scores, sample_projections, Aggregate, NodeOrder, ProjectionSet, ScoreVector};
pub use matrix::{CsrMatrix, DenseMatrix};
pub use pipeline::{coarsen_at_ratios, AdaptiveCoarsener, AlphaMode, CoarsenConfig};
pub use schedule::{build_schedule, partition_at_ratio, CoarseningMatrix, MergeSchedule};

// The guide's chapters are compiled as doctests so their snippets stay in
// sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/hashing.md")]
    mod hashing {}
    #[doc = include_str!("../../../book/src/schedule.md")]
    mod schedule {}
    #[doc = include_str!("../../../book/src/coarsened-graphs.md")]
    mod coarsened_graphs {}
    #[doc = include_str!("../../../book/src/heterogeneous.md")]
    mod heterogeneous {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/guarantees.md")]
    mod guarantees {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
