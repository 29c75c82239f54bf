//! Run configuration shared by the command-line tool and embedded into
//! every output artifact so runs can be replayed exactly.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cluster::{KmeansParams, DEFAULT_K_CAP};
use crate::features::{CohFallback, FeatureOptions};
use crate::select::{CohesionSpace, Method, Mode};
use crate::text::SegmentMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub word_vectors: Option<PathBuf>,
    pub entity_vectors: Option<PathBuf>,
    pub segmentation: SegmentMode,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub method: Method,
    pub mode: Mode,
    pub zscore: bool,
    pub coh_fallback: CohFallback,
    pub cohesion_space: CohesionSpace,
    pub max_span: usize,
    /// Correlate scored r instead of binary r in identification-mode
    /// evaluation.
    pub pearson_on_scores: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let kp = KmeansParams::default();
        Self {
            word_vectors: None,
            entity_vectors: None,
            segmentation: SegmentMode::Auto,
            k_min: 2,
            k_max: DEFAULT_K_CAP,
            restarts: kp.restarts,
            tol: kp.tol,
            max_iters: kp.max_iters,
            seed: 42,
            method: Method::RescoCc,
            mode: Mode::Identification,
            zscore: false,
            coh_fallback: CohFallback::Zero,
            cohesion_space: CohesionSpace::Feature,
            max_span: 4,
            pearson_on_scores: false,
        }
    }
}

impl RunConfig {
    pub fn kmeans_params(&self) -> KmeansParams {
        KmeansParams {
            max_iters: self.max_iters,
            tol: self.tol,
            restarts: self.restarts,
        }
    }

    pub fn feature_options(&self) -> FeatureOptions {
        FeatureOptions {
            zscore: self.zscore,
            coh_fallback: self.coh_fallback,
        }
    }
}
