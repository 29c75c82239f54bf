//! Per-sentence vectors and the 3-D relevance/smoothness/coherence embedding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::VectorStore;
use crate::text::{Document, Sentence};

/// Sentence vector: unweighted mean of the in-vocabulary token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVec {
    pub index: usize,
    pub v: Vec<f64>,
    /// Fraction of tokens missing from the word store; 1.0 when nothing hit
    /// (the vector is then all zeros).
    pub oov_ratio: f64,
}

/// A sentence's position in feature space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReScoPoint {
    pub index: usize,
    pub rel: f64,
    pub smo: f64,
    pub coh: f64,
}

impl ReScoPoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.rel, self.smo, self.coh]
    }
}

/// Fallback coherence for sentences mentioning fewer than two entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CohFallback {
    /// No measurable coherence scores as 0.
    #[default]
    Zero,
    /// Use the document mean of the measurable coherence values.
    DocMean,
}

/// Feature-embedding switches. Defaults follow the plain formulation: raw
/// features, zero coherence fallback.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureOptions {
    pub zscore: bool,
    pub coh_fallback: CohFallback,
}

/// Cosine similarity with the zero-vector convention: any comparison
/// involving a zero vector is 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// Averages the in-vocabulary token vectors; OOV tokens are skipped and an
/// all-OOV (or tokenless) sentence gets the zero vector.
pub fn sentence_vector(sentence: &Sentence, word_store: &VectorStore) -> SentenceVec {
    let dim = word_store.dimension();
    let mut sum = vec![0.0f64; dim];
    let mut hits = 0usize;
    for token in &sentence.tokens {
        if let Some(v) = word_store.lookup(token) {
            for (acc, x) in sum.iter_mut().zip(v) {
                *acc += f64::from(*x);
            }
            hits += 1;
        }
    }
    let oov_ratio = if sentence.tokens.is_empty() {
        1.0
    } else {
        1.0 - hits as f64 / sentence.tokens.len() as f64
    };
    if hits > 0 {
        for acc in &mut sum {
            *acc /= hits as f64;
        }
    }
    SentenceVec {
        index: sentence.index,
        v: sum,
        oov_ratio,
    }
}

/// Mean cosine similarity of sentence `i` to every other sentence.
pub fn relevance(doc_vectors: &[SentenceVec], i: usize) -> Result<f64> {
    let n = doc_vectors.len();
    if n < 2 {
        return Err(Error::DegenerateDocument {
            doc_id: String::new(),
        });
    }
    let sum: f64 = doc_vectors
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, other)| cosine(&doc_vectors[i].v, &other.v))
        .sum();
    Ok(sum / (n - 1) as f64)
}

/// Mean cosine similarity of sentence `i` to its immediate neighbours; the
/// first and last sentences have one neighbour each.
pub fn smoothness(doc_vectors: &[SentenceVec], i: usize) -> Result<f64> {
    let n = doc_vectors.len();
    if n < 2 {
        return Err(Error::DegenerateDocument {
            doc_id: String::new(),
        });
    }
    let cos = |a: usize, b: usize| cosine(&doc_vectors[a].v, &doc_vectors[b].v);
    Ok(if i == 0 {
        cos(0, 1)
    } else if i == n - 1 {
        cos(n - 2, n - 1)
    } else {
        0.5 * (cos(i - 1, i) + cos(i, i + 1))
    })
}

/// Mean pairwise cosine similarity between the entities mentioned in the
/// sentence. Entities missing from the store are dropped before pairing;
/// fewer than two remaining entities yields `fallback` (resolved by the
/// caller, [`embed_document`] handles the document-mean variant).
///
/// Returns `None` when the pair set is empty so callers can apply fallback.
pub fn coherence(sentence: &Sentence, entity_store: &VectorStore) -> Option<f64> {
    let vectors: Vec<Vec<f64>> = sentence
        .entities
        .iter()
        .filter_map(|key| {
            let v = entity_store.lookup(key);
            if v.is_none() {
                log::warn!(
                    "entity {key:?} in sentence {} missing from entity store; dropped",
                    sentence.index
                );
            }
            v.map(|v| v.iter().map(|x| f64::from(*x)).collect())
        })
        .collect();
    if vectors.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            sum += cosine(&vectors[a], &vectors[b]);
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

/// Computes the feature triple for every sentence of a document.
pub fn embed_document(
    doc: &Document,
    word_store: &VectorStore,
    entity_store: &VectorStore,
    options: FeatureOptions,
) -> Result<Vec<ReScoPoint>> {
    if doc.len() < 2 {
        return Err(Error::DegenerateDocument {
            doc_id: doc.id.clone(),
        });
    }
    let vectors: Vec<SentenceVec> = doc
        .sentences
        .iter()
        .map(|s| sentence_vector(s, word_store))
        .collect();

    let raw_coh: Vec<Option<f64>> = doc
        .sentences
        .iter()
        .map(|s| coherence(s, entity_store))
        .collect();
    let fallback = match options.coh_fallback {
        CohFallback::Zero => 0.0,
        CohFallback::DocMean => {
            let measured: Vec<f64> = raw_coh.iter().flatten().copied().collect();
            if measured.is_empty() {
                0.0
            } else {
                measured.iter().sum::<f64>() / measured.len() as f64
            }
        }
    };

    let mut points = Vec::with_capacity(doc.len());
    for (i, sentence) in doc.sentences.iter().enumerate() {
        points.push(ReScoPoint {
            index: sentence.index,
            rel: relevance(&vectors, i)?,
            smo: smoothness(&vectors, i)?,
            coh: raw_coh[i].unwrap_or(fallback),
        });
    }
    if options.zscore {
        standardize(&mut points);
    }
    Ok(points)
}

/// One `index,rel,smo,coh` line per sentence, for inspection.
pub fn features_csv(points: &[ReScoPoint]) -> String {
    let mut out = String::from("index,rel,smo,coh\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.index, p.rel, p.smo, p.coh));
    }
    out
}

fn standardize(points: &mut [ReScoPoint]) {
    let n = points.len() as f64;
    for select in [
        (|p: &mut ReScoPoint| &mut p.rel) as fn(&mut ReScoPoint) -> &mut f64,
        |p| &mut p.smo,
        |p| &mut p.coh,
    ] {
        let mean = points.iter_mut().map(|p| *select(p)).sum::<f64>() / n;
        let var = points
            .iter_mut()
            .map(|p| {
                let d = *select(p) - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        for p in points.iter_mut() {
            let v = select(p);
            *v = if std == 0.0 { 0.0 } else { (*v - mean) / std };
        }
    }
}
