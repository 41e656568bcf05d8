//! Word sense induction by clustering averaged word embeddings.
//!
//! Contexts of an ambiguous word are turned into *semantic fingerprints*
//! (frequency-weighted means of the embeddings of their distinct lemmas) and
//! grouped with Affinity Propagation. Affinity Propagation can either produce
//! the final sense clusters directly, or only decide how many senses there
//! are, leaving the split itself to K-Means or spectral clustering.
//! Predictions are scored with the Adjusted Rand Index.
//!
//! ```
//! use wsi::pipeline::{induce_senses, WsiSettings};
//! use wsi::synthetic::PlantedSenses;
//! use wsi::evaluation::evaluate;
//!
//! let corpus = PlantedSenses::default().generate();
//! let out = induce_senses(&corpus.dataset, &corpus.model, &WsiSettings::default()).unwrap();
//! let report = evaluate(&out.dataset.records).unwrap();
//! assert!(report.aggregate_weighted > 0.9);
//! ```
//!
//! The guide in `book/` walks through each stage; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod fingerprint;
pub mod linalg;
pub mod pipeline;
pub mod synthetic;

pub use cluster::{ClusterAssignment, Metric, SimilarityMatrix};
pub use corpus::{ContextRecord, Dataset};
pub use embedding::{EmbeddingModel, WeightKind, WeightScheme};
pub use fingerprint::{Fingerprint, FingerprintOptions};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fingerprints.md")]
    mod fingerprints {}
    #[doc = include_str!("../../../book/src/affinity-propagation.md")]
    mod affinity_propagation {}
    #[doc = include_str!("../../../book/src/two-stage.md")]
    mod two_stage {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
