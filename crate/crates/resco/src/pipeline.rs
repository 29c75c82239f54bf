//! Per-document pipeline: segment, embed, pick K, cluster, select, and
//! serialize the result.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{choose_k_elbow, kmeans_best_of, ElbowChoice};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::features::{embed_document, sentence_vector, ReScoPoint, SentenceVec};
use crate::select::{
    identify, rank_by_centroid, score, select_cohesive_cluster, CohesionSpace, Method, Mode,
    SelectionOutput,
};
use crate::store::VectorStore;
use crate::text::{attach_entities, segment, Document};
use crate::VERSION;

pub struct Pipeline {
    pub word_store: VectorStore,
    pub entity_store: VectorStore,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectResult {
    pub output: SelectionOutput,
    pub elbow: ElbowChoice,
    /// Present for the clustering methods only.
    pub assignment: Option<Vec<usize>>,
}

/// Everything one document run produced; `points` and `elbow` are absent on
/// the single-sentence path.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRun {
    pub output: SelectionOutput,
    pub selected: Vec<bool>,
    pub points: Option<Vec<ReScoPoint>>,
    pub elbow: Option<ElbowChoice>,
    pub k: Option<usize>,
    pub degenerate: bool,
}

impl Pipeline {
    pub fn new(word_store: VectorStore, entity_store: VectorStore, config: RunConfig) -> Self {
        Self {
            word_store,
            entity_store,
            config,
        }
    }

    /// Segments raw article text and marks entity mentions.
    pub fn prepare(&self, id: &str, raw: &str) -> Result<Document> {
        let mut doc = segment(id, raw, self.config.segmentation)?;
        attach_entities(&mut doc, &self.entity_store, self.config.max_span);
        Ok(doc)
    }

    pub fn embed(&self, doc: &Document) -> Result<Vec<ReScoPoint>> {
        embed_document(
            doc,
            &self.word_store,
            &self.entity_store,
            self.config.feature_options(),
        )
    }

    pub fn sentence_vectors(&self, doc: &Document) -> Vec<SentenceVec> {
        doc.sentences
            .iter()
            .map(|s| sentence_vector(s, &self.word_store))
            .collect()
    }

    /// Selection over pre-computed points. Also reports the K the elbow
    /// chose and, for the clustering methods, the assignment.
    pub fn select_points(
        &self,
        points: &[ReScoPoint],
        sentence_vectors: Option<&[SentenceVec]>,
        seed: u64,
        method: Method,
        mode: Mode,
    ) -> Result<SelectResult> {
        let params = self.config.kmeans_params();
        let n = points.len();
        let k_hi = self.config.k_max.min(n.saturating_sub(1)).max(1);
        let elbow = choose_k_elbow(points, self.config.k_min, k_hi, seed, &params)?;
        let (output, assignment) = match method {
            Method::RescoCc | Method::RescoCoh => {
                let clustering = kmeans_best_of(points, elbow.k, seed, &params)?;
                let output = match method {
                    Method::RescoCc => match mode {
                        Mode::Identification => identify(&clustering, points),
                        Mode::Scoring => score(&clustering, points),
                    },
                    Method::RescoCoh => {
                        let sv = if self.config.cohesion_space == CohesionSpace::Sentence {
                            sentence_vectors
                        } else {
                            None
                        };
                        select_cohesive_cluster(&clustering, points, mode, sv)
                    }
                    Method::RescoCen => unreachable!(),
                };
                (output, Some(clustering.assignment))
            }
            Method::RescoCen => (rank_by_centroid(points, mode, elbow.k, seed), None),
        };
        Ok(SelectResult {
            output,
            elbow,
            assignment,
        })
    }

    /// Full run on a prepared document with the configured method and mode.
    pub fn run_document(&self, doc: &Document, seed: u64) -> Result<DocRun> {
        if doc.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let method = self.config.method;
        let mode = self.config.mode;
        if doc.len() == 1 {
            // A lone sentence is trivially the key one; features need
            // neighbours, so skip them and say so.
            let output = SelectionOutput {
                doc_id: doc.id.clone(),
                method,
                mode,
                r: vec![1.0],
                chosen_cluster: None,
                seed,
                warnings: vec![
                    "single-sentence document: features skipped, sentence marked directly"
                        .to_string(),
                ],
            };
            return Ok(DocRun {
                output,
                selected: vec![true],
                points: None,
                elbow: None,
                k: None,
                degenerate: true,
            });
        }

        let points = self.embed(doc)?;
        let sv = if method == Method::RescoCoh
            && self.config.cohesion_space == CohesionSpace::Sentence
        {
            Some(self.sentence_vectors(doc))
        } else {
            None
        };
        let SelectResult {
            mut output,
            elbow,
            assignment,
        } = self.select_points(&points, sv.as_deref(), seed, method, mode)?;
        output.doc_id = doc.id.clone();

        // Cluster membership where there is one (a member whose score is
        // exactly 0.0 is still selected); otherwise the top-of-ranking cut.
        let selected = match (&assignment, output.chosen_cluster) {
            (Some(assign), Some(chosen)) => assign.iter().map(|&a| a == chosen).collect(),
            _ => match mode {
                Mode::Identification => output.r.iter().map(|&x| x == 1.0).collect(),
                Mode::Scoring => {
                    let cut = rank_by_centroid(&points, Mode::Identification, elbow.k, seed);
                    cut.r.iter().map(|&x| x == 1.0).collect()
                }
            },
        };

        Ok(DocRun {
            output,
            selected,
            points: Some(points),
            k: Some(elbow.k),
            elbow: Some(elbow),
            degenerate: false,
        })
    }
}

fn sentence_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub index: usize,
    pub text_hash: String,
    pub r: f64,
    pub selected: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub features: Option<[f64; 3]>,
}

/// One JSON document per article: the selection plus enough metadata to
/// replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub doc_id: String,
    pub method: Method,
    pub mode: Mode,
    pub seed: u64,
    pub k: Option<usize>,
    pub chosen_cluster: Option<usize>,
    pub n: usize,
    pub sentences: Vec<SentenceRecord>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<RunConfig>,
    pub version: String,
}

pub fn selection_record(doc: &Document, run: &DocRun, config: &RunConfig) -> SelectionRecord {
    let sentences = doc
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| SentenceRecord {
            index: s.index,
            text_hash: sentence_hash(&s.text),
            r: run.output.r[i],
            selected: run.selected[i],
            features: run.points.as_ref().map(|ps| ps[i].as_array()),
        })
        .collect();
    SelectionRecord {
        doc_id: run.output.doc_id.clone(),
        method: run.output.method,
        mode: run.output.mode,
        seed: run.output.seed,
        k: run.k,
        chosen_cluster: run.output.chosen_cluster,
        n: doc.len(),
        sentences,
        warnings: run.output.warnings.clone(),
        config: Some(config.clone()),
        version: VERSION.to_string(),
    }
}

pub fn record_json(record: &SelectionRecord) -> String {
    serde_json::to_string_pretty(record).expect("selection record serializes") + "\n"
}

pub fn write_selection_record(path: &Path, record: &SelectionRecord) -> Result<()> {
    std::fs::write(path, record_json(record)).map_err(|e| Error::io(path, e))
}

pub fn read_selection_record(path: &Path) -> Result<SelectionRecord> {
    let data = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&data).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Per-sentence scores in index order, for the generic evaluation reader.
pub fn scores_from_record(record: &SelectionRecord) -> (String, Vec<f64>) {
    let mut sentences = record.sentences.clone();
    sentences.sort_by_key(|s| s.index);
    (
        record.doc_id.clone(),
        sentences.iter().map(|s| s.r).collect(),
    )
}
