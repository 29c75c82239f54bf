//! Cluster selection and per-sentence output scores, plus the two
//! clustering-free / alternative-selection variants.

use serde::{Deserialize, Serialize};

use crate::cluster::ClusteringResult;
use crate::features::{cosine, ReScoPoint, SentenceVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    RescoCc,
    RescoCoh,
    RescoCen,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RescoCc => "resco-cc",
            Method::RescoCoh => "resco-coh",
            Method::RescoCen => "resco-cen",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "resco-cc" => Some(Method::RescoCc),
            "resco-coh" => Some(Method::RescoCoh),
            "resco-cen" => Some(Method::RescoCen),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Identification,
    Scoring,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Identification => "identification",
            Mode::Scoring => "scoring",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "identification" => Some(Mode::Identification),
            "scoring" => Some(Mode::Scoring),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which vectors feed the pairwise-cosine cluster cohesion measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CohesionSpace {
    /// Pairwise similarity between member feature triples.
    #[default]
    Feature,
    /// Pairwise similarity between member sentence embeddings.
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutput {
    pub doc_id: String,
    pub method: Method,
    pub mode: Mode,
    /// Per-sentence output; 0/1 valued in identification mode.
    pub r: Vec<f64>,
    /// None for the centroid-ranking method, which does not cluster.
    pub chosen_cluster: Option<usize>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

fn global_centroid(points: &[ReScoPoint]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0f64; 3];
    for p in points {
        mean[0] += p.rel;
        mean[1] += p.smo;
        mean[2] += p.coh;
    }
    for m in &mut mean {
        *m /= n;
    }
    mean
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Cluster whose centroid sits nearest (euclidean) to the mean of all
/// points; ties go to the lower cluster id.
pub fn select_central_cluster(clustering: &ClusteringResult, points: &[ReScoPoint]) -> usize {
    let g = global_centroid(points);
    let mut best = 0;
    let mut best_d = dist2(clustering.centroids[0], g);
    for (c, centroid) in clustering.centroids.iter().enumerate().skip(1) {
        let d = dist2(*centroid, g);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn membership_output(
    clustering: &ClusteringResult,
    chosen: usize,
    method: Method,
) -> SelectionOutput {
    let r = clustering
        .assignment
        .iter()
        .map(|&a| if a == chosen { 1.0 } else { 0.0 })
        .collect();
    SelectionOutput {
        doc_id: String::new(),
        method,
        mode: Mode::Identification,
        r,
        chosen_cluster: Some(chosen),
        seed: clustering.seed,
        warnings: Vec::new(),
    }
}

fn scored_output(
    clustering: &ClusteringResult,
    points: &[ReScoPoint],
    chosen: usize,
    method: Method,
) -> SelectionOutput {
    let centroid = clustering.centroids[chosen];
    let mut warnings = Vec::new();
    let r = clustering
        .assignment
        .iter()
        .zip(points)
        .map(|(&a, p)| {
            if a != chosen {
                return 0.0;
            }
            let arr = p.as_array();
            if arr == [0.0; 3] {
                warnings.push(format!(
                    "sentence {} is the zero point in feature space; score forced to 0.0",
                    p.index
                ));
                return 0.0;
            }
            cosine(&arr, &centroid)
        })
        .collect();
    SelectionOutput {
        doc_id: String::new(),
        method,
        mode: Mode::Scoring,
        r,
        chosen_cluster: Some(chosen),
        seed: clustering.seed,
        warnings,
    }
}

/// Binary membership of the central cluster.
pub fn identify(clustering: &ClusteringResult, points: &[ReScoPoint]) -> SelectionOutput {
    debug_assert_eq!(clustering.assignment.len(), points.len());
    let chosen = select_central_cluster(clustering, points);
    membership_output(clustering, chosen, Method::RescoCc)
}

/// Cosine of each member to the chosen centroid; exact 0.0 off-cluster.
pub fn score(clustering: &ClusteringResult, points: &[ReScoPoint]) -> SelectionOutput {
    debug_assert_eq!(clustering.assignment.len(), points.len());
    let chosen = select_central_cluster(clustering, points);
    scored_output(clustering, points, chosen, Method::RescoCc)
}

/// Mean pairwise cosine among the cluster's members; singletons count as
/// fully cohesive.
fn cluster_cohesion(member_vectors: &[&[f64]]) -> f64 {
    if member_vectors.len() < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..member_vectors.len() {
        for b in a + 1..member_vectors.len() {
            sum += cosine(member_vectors[a], member_vectors[b]);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Variant selection: take the most internally similar cluster instead of
/// the most central one. `sentence_vectors` switches the cohesion measure
/// to the original embedding space; scores still come from feature space.
pub fn select_cohesive_cluster(
    clustering: &ClusteringResult,
    points: &[ReScoPoint],
    mode: Mode,
    sentence_vectors: Option<&[SentenceVec]>,
) -> SelectionOutput {
    debug_assert_eq!(clustering.assignment.len(), points.len());
    if let Some(sv) = sentence_vectors {
        debug_assert_eq!(sv.len(), points.len());
    }
    let arrays: Vec<[f64; 3]> = points.iter().map(|p| p.as_array()).collect();
    let mut best = 0;
    let mut best_cohesion = f64::NEG_INFINITY;
    for c in 0..clustering.k {
        let members: Vec<&[f64]> = clustering
            .assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == c)
            .map(|(i, _)| match sentence_vectors {
                Some(sv) => sv[i].v.as_slice(),
                None => arrays[i].as_slice(),
            })
            .collect();
        let cohesion = cluster_cohesion(&members);
        if cohesion > best_cohesion {
            best_cohesion = cohesion;
            best = c;
        }
    }
    match mode {
        Mode::Identification => membership_output(clustering, best, Method::RescoCoh),
        Mode::Scoring => scored_output(clustering, points, best, Method::RescoCoh),
    }
}

/// Variant without clustering: every sentence is scored by cosine to the
/// global mean point. Identification marks the top ceil(n / k_bar) so the
/// binary output is size-comparable with a k_bar-cluster run.
pub fn rank_by_centroid(
    points: &[ReScoPoint],
    mode: Mode,
    k_bar: usize,
    seed: u64,
) -> SelectionOutput {
    debug_assert!(!points.is_empty());
    debug_assert!(k_bar >= 1);
    let g = global_centroid(points);
    let scores: Vec<f64> = points.iter().map(|p| cosine(&p.as_array(), &g)).collect();
    let r = match mode {
        Mode::Scoring => scores,
        Mode::Identification => {
            let n = points.len();
            let cut = n.div_ceil(k_bar);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let mut r = vec![0.0; n];
            for &i in idx.iter().take(cut) {
                r[i] = 1.0;
            }
            r
        }
    };
    SelectionOutput {
        doc_id: String::new(),
        method: Method::RescoCen,
        mode,
        r,
        chosen_cluster: None,
        seed,
        warnings: Vec::new(),
    }
}
