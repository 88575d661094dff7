//! Treelets: a data-driven, local, multi-resolution orthonormal basis built
//! from a sequence of pairwise Jacobi rotations, together with the PCA and
//! hierarchical-clustering baselines it is usually compared against,
//! generators for block, global-factor and driver/modulator dependence, and
//! the evaluation harness (energy curves, merge purity, leaky vs clean
//! cross-validation).

pub mod baselines;
pub mod data;
pub mod dendrogram;
pub mod error;
pub mod eval;
pub mod rotation;
pub mod simgen;
pub mod treelet;

pub use baselines::{hc_fit, pca_fit, HcTree, Linkage, PcaModel};
pub use data::{
    global_normalize, load_csv, parse_csv, sample_correlation, sample_covariance, DataMatrix,
    Metric, Scale, SimilarityMatrix,
};
pub use dendrogram::{Dendrogram, MergeNode};
pub use error::{Error, Result};
pub use rotation::{jacobi_angle, PlaneRotation};
pub use simgen::log_transform;
pub use treelet::{
    most_similar_pair, treelet_fit, treelet_fit_inspect, CoarseRepresentation, JacobiRotation,
    Retention, TreeletBasis, TreeletConfig, TreeletFit,
};
