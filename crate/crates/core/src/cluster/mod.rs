//! Static clustering of feature vectors: Euclidean distances, Ward's
//! agglomeration, dendrogram cuts and per-cluster summaries.

mod distance;
mod profile;
mod tree;
mod ward;

pub use distance::{euclidean_distances, DistanceMatrix};
pub use profile::{cluster_profiles, ClusterProfile};
pub use tree::{cut, Assignment, Dendrogram, Merge};
pub use ward::{total_sum_of_squares, ward_dendrogram, ward_dendrogram_points};
