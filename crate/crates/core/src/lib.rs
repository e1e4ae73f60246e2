//! Network homophily under the random coloring model.
//!
//! Given a simple graph and a vertex coloring, every coloring with the same
//! class sizes is treated as equally likely. This crate computes the exact
//! mean and covariance of the per-class homophilic edge counts, the graph
//! invariant `gamma` that fixes the sign of every cross-class covariance,
//! and a family of homophily indices obtained from one-sided Cantelli and
//! multivariate Chebyshev bounds. The [`oracle`] module checks all of it by
//! brute force on small instances.
//!
//! ```
//! use homophily_core::{families, Coloring, IndexOptions, IndexReport, MomentSummary};
//! use homophily_core::moments::covariance_structure;
//!
//! let g = families::path(4);
//! let f = Coloring::from_assignment(vec![0, 0, 1, 1]).unwrap();
//! let summary = g.summarize();
//! let ms = MomentSummary::compute(&summary, f.profile());
//! let cs = covariance_structure(&summary, f.profile(), &ms);
//! let report = IndexReport::compute(&g, &f, &summary, &ms, &cs, &IndexOptions::default());
//! assert!((report.a.value().unwrap() - 0.6).abs() < 1e-12);
//! ```

pub mod coloring;
pub mod families;
pub mod graph;
pub mod indices;
pub mod matrix;
pub mod moments;
pub mod oracle;

pub use coloring::{
    falling_factorial, homophilic_counts, load_coloring, parse_coloring, random_coloring,
    Coloring, ColoringError, ObservedOutcome, Profile,
};
pub use graph::{load_edge_list, parse_edge_list, Graph, GraphError, GraphSummary, LoadOptions};
pub use indices::{
    descriptive_ratio, index_a, index_h, index_j_theta, index_r, newman_modularity,
    weight_preset, z_scores, IndexOptions, IndexReport, Nu, Preset, Quantity, Undefined,
    WeightVector, ZScores,
};
pub use matrix::Matrix;
pub use moments::{covariance_structure, CovarianceStructure, MomentSummary};
pub use oracle::{ExactDistribution, OracleError, Side, Statistic, TailEstimate};
