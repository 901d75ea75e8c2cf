//! Feature-based clustering of micro-panel data.
//!
//! A micro-panel is a large set of objects, each observed only a handful of
//! times. Clustering proceeds in two steps:
//!
//! 1. every trajectory is summarised by seven dynamic characteristics
//!    ([`features`]),
//! 2. the characteristic vectors are clustered with Ward's agglomerative
//!    method on their Euclidean distances ([`cluster`]).
//!
//! The crate also ships the apparatus needed to validate the method: a
//! two-cluster linear mixed-effects data generator ([`simulate`]), four
//! cluster-validity indices ([`validity`]) and a replication / timing
//! harness ([`study`]).

pub mod cluster;
pub mod error;
pub mod features;
pub mod panel;
pub mod simulate;
pub mod study;
pub mod validity;

pub use cluster::{
    cluster_profiles, cut, euclidean_distances, ward_dendrogram, Assignment, ClusterProfile,
    Dendrogram, DistanceMatrix, Merge,
};
pub use error::{Error, Result};
pub use features::{extract_features, standardize, FeatureMatrix, FeatureVector, Scaling};
pub use panel::{parse_long_csv, validate, MicroPanel, RejectReason, Trajectory, ValidationReport};
pub use simulate::{builtin_scenario, generate, split_seed, MixedModelParams, ScenarioConfig};
pub use study::{run_study, run_timing, StudyConfig, StudySummary, TimingReport};
pub use validity::{adjusted_rand_index, dunn_index, rand_index, silhouette_mean, IndexReport};
