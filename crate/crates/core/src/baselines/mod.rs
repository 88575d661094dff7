//! Reference methods: global PCA and agglomerative hierarchical clustering.

mod hc;
mod pca;

pub use hc::{dissimilarity_from_similarity, hc_fit, HcMerge, HcTree, Linkage};
pub use pca::{pca_fit, PcaDocument, PcaModel, MAX_SWEEPS};
