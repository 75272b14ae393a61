//! Precision@k against a gold dictionary, nearest-neighbour tables and PCA
//! coordinates for plotting aligned spaces.

mod gold;
mod pca;
mod report;
mod table;

pub use gold::GoldDictionary;
pub use pca::{pca_project, LabeledPoints, PcaProjection, ProjectedPoint};
pub use report::{precision_at_k, EvalReport, QueryOutcome};
pub use table::{neighbor_table, NeighborColumn, NeighborTable};

/// Retrieval depths reported by default.
pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];
