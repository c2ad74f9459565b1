//! Similarity between two routine documents.
//!
//! The default provider is offline and deterministic: cosine similarity of
//! character-trigram count vectors over canonicalized JSON. Embedding-based
//! scorers plug in through [`EmbeddingProvider`].

use std::collections::HashMap;

use super::record::RunRecord;
use crate::canonical::canonicalize_text;
use crate::error::AnalysisError;

/// Scores two texts in [0, 1].
pub trait SimilarityProvider: Send + Sync {
    fn score(&self, a: &str, b: &str) -> f64;

    fn name(&self) -> &str;
}

/// Maps a text to a fixed-length vector.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Vec<f64>;

    fn name(&self) -> &str;
}

/// Scores texts by the cosine of their embeddings, clamped to [0, 1].
pub struct EmbeddingSimilarity<E>(pub E);

impl<E: EmbeddingProvider> SimilarityProvider for EmbeddingSimilarity<E> {
    fn score(&self, a: &str, b: &str) -> f64 {
        cosine(&self.0.embed(a), &self.0.embed(b)).clamp(0.0, 1.0)
    }

    fn name(&self) -> &str {
        self.0.name()
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Canonical JSON when the text parses, otherwise the text with all
/// whitespace removed.
pub fn normalize_for_similarity(text: &str) -> String {
    canonicalize_text(text).unwrap_or_else(|| text.chars().filter(|c| !c.is_whitespace()).collect())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramCosine;

impl TrigramCosine {
    fn profile(text: &str) -> HashMap<&str, u32> {
        let mut counts = HashMap::new();
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        if bounds.len() <= 4 {
            if !text.is_empty() {
                counts.insert(text, 1);
            }
            return counts;
        }
        for w in bounds.windows(4) {
            *counts.entry(&text[w[0]..w[3]]).or_insert(0) += 1;
        }
        counts
    }
}

impl SimilarityProvider for TrigramCosine {
    fn score(&self, a: &str, b: &str) -> f64 {
        let a = normalize_for_similarity(a);
        let b = normalize_for_similarity(b);
        if a == b {
            return 1.0;
        }
        let pa = Self::profile(&a);
        let pb = Self::profile(&b);
        let dot: f64 = pa
            .iter()
            .filter_map(|(g, ca)| pb.get(g).map(|cb| f64::from(*ca) * f64::from(*cb)))
            .sum();
        let norm = |p: &HashMap<&str, u32>| p.values().map(|c| f64::from(*c).powi(2)).sum::<f64>().sqrt();
        let (na, nb) = (norm(&pa), norm(&pb));
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            (dot / (na * nb)).clamp(0.0, 1.0)
        }
    }

    fn name(&self) -> &str {
        "trigram-cosine"
    }
}

/// Similarity of two non-empty texts under `provider`.
pub fn similarity(a: &str, b: &str, provider: &dyn SimilarityProvider) -> Result<f64, AnalysisError> {
    if a.trim().is_empty() || b.trim().is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    Ok(provider.score(a, b))
}

/// Similarity of the routines in a green/no-green pair. When either side
/// produced no routine the raw outputs are compared instead.
pub fn pair_similarity(green: &RunRecord, plain: &RunRecord, provider: &dyn SimilarityProvider) -> f64 {
    let (a, b) = match (green.json.as_deref(), plain.json.as_deref()) {
        (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => (a, b),
        _ => (green.output.as_str(), plain.output.as_str()),
    };
    match similarity(a, b, provider) {
        Ok(s) => s,
        Err(_) if a.trim().is_empty() && b.trim().is_empty() => 1.0,
        Err(_) => 0.0,
    }
}
