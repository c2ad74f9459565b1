//! Failure classification, per-configuration metrics and green/no-green
//! pair metrics over benchmark run records.

mod classify;
mod metrics;
mod record;
mod similarity;
pub mod targets;

pub use classify::{classify_document, classify_failure};
pub use metrics::{
    is_false_negative, is_false_positive, pair_green_nogreen, record_relevance, relevance_counts, relevance_score,
    round_half_up, summarize, summarize_pairs, MeanStd, MetricsSummary, PairSummary, PairedRecord,
};
pub use record::{format_temperature, FailureClass, RunRecord};
pub use similarity::{
    cosine, normalize_for_similarity, pair_similarity, similarity, EmbeddingProvider, EmbeddingSimilarity,
    SimilarityProvider, TrigramCosine,
};
