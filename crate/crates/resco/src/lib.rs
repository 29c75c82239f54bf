//! Unsupervised identification and scoring of key disinformation sentences.
//!
//! Each sentence of an article is embedded as a 3-D point of
//! relevance / smoothness / coherence features built from word and entity
//! vectors. The points are clustered with seeded K-Means (K picked by the
//! elbow rule) and the cluster nearest the document's feature centroid is
//! selected; its sentences are the key ones, either as binary membership or
//! as cosine scores to the cluster centroid. The crate also builds
//! reference-similarity gold standards from (hoax, refutation) article
//! pairs and evaluates methods against them with Pearson and NDCG under
//! seeded multi-iteration averaging.

pub mod cluster;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod gold;
pub mod pipeline;
pub mod report;
pub mod select;
pub mod store;
pub mod text;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use pipeline::Pipeline;

/// Version string embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
