//! Event clustering for timestamped short messages.
//!
//! Messages are compared by TF-IDF cosine similarity scaled by an
//! exponential decay in their time gap, grouped with affinity propagation,
//! and filtered by average internal affinity. The `gaps` module estimates
//! the decay constant from labeled data.

pub mod affinity;
pub mod ap;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod filter;
pub mod gaps;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod text;

pub use affinity::{cosine_matrix, decay_matrix, hadamard, AffinityKind, AffinityMatrix};
pub use ap::{affinity_propagation, ApParams, Clustering};
pub use config::{Bandwidth, Preference, RunConfig};
pub use corpus::{
    load_corpus, read_corpus, split_windows, write_corpus, Corpus, LoadOptions, Tweet,
};
pub use error::{Error, Result};
pub use eval::{
    cluster_quality, evaluate, link_clusters_to_events, precision_recall, sweep_delta, EvalResult,
    EventGroundTruth, SweepRow,
};
pub use filter::{remove_spam, FilterReport};
pub use gaps::{
    analyze_gaps, bucketize, calibrate_tp, extract_gaps, fit_loglinear, kde_density, DecayFit,
    GapAnalysis,
};
pub use pipeline::{ClusterRun, EventCluster, Pipeline};
pub use report::{write_report, Manifest};
pub use synth::{generate_synthetic, SyntheticSpec};
pub use text::{build_vocabulary, stem, tfidf, StopWords, TextCleaner};
