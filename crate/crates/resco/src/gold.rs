//! Gold-standard construction from (hoax, refutation) article pairs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::features::{cosine, sentence_vector};
use crate::store::VectorStore;
use crate::text::Document;

/// Per-hoax-sentence reference similarity: the mean cosine between a hoax
/// sentence's vector and each refutation sentence's vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefSim {
    pub doc_id: String,
    pub n: usize,
    pub scores: Vec<f64>,
}

/// On-disk shape; metadata is optional so externally produced files with
/// just the scores still load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefSimFile {
    pub doc_id: String,
    pub n: usize,
    pub scores: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub version: Option<String>,
}

impl RefSimFile {
    pub fn into_refsim(self) -> RefSim {
        RefSim {
            doc_id: self.doc_id,
            n: self.n,
            scores: self.scores,
        }
    }
}

pub fn build_refsim(
    hoax: &Document,
    refutation: &Document,
    word_store: &VectorStore,
) -> Result<RefSim> {
    if hoax.is_empty() {
        return Err(Error::EmptyDocument);
    }
    if refutation.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let ref_vectors: Vec<Vec<f64>> = refutation
        .sentences
        .iter()
        .map(|s| sentence_vector(s, word_store).v)
        .collect();
    let m = ref_vectors.len() as f64;
    let scores = hoax
        .sentences
        .iter()
        .map(|s| {
            let hv = sentence_vector(s, word_store).v;
            // Summing the cosines in sorted order keeps the mean identical
            // under any permutation of the refutation.
            let mut sims: Vec<f64> = ref_vectors.iter().map(|rv| cosine(&hv, rv)).collect();
            sims.sort_by(f64::total_cmp);
            sims.iter().sum::<f64>() / m
        })
        .collect();
    Ok(RefSim {
        doc_id: hoax.id.clone(),
        n: hoax.len(),
        scores,
    })
}

/// Binary labels marking the `rho` highest-scoring sentences; boundary ties
/// go to the lower sentence index.
pub fn truncate_topk(refsim: &RefSim, rho: usize) -> Result<Vec<u8>> {
    let n = refsim.scores.len();
    if rho < 1 || rho > n {
        return Err(Error::RhoOutOfRange { rho, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| refsim.scores[b].total_cmp(&refsim.scores[a]).then(a.cmp(&b)));
    let mut labels = vec![0u8; n];
    for &i in idx.iter().take(rho) {
        labels[i] = 1;
    }
    Ok(labels)
}

/// Matched and orphaned article ids under a corpus root laid out as
/// `hoax/<id>.txt` and `refutation/<id>.txt`, with refsim files written to
/// `refsim/<id>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub root: PathBuf,
    pub matched: Vec<String>,
    pub orphan_hoaxes: Vec<String>,
    pub orphan_refutations: Vec<String>,
}

impl CorpusIndex {
    pub fn hoax_path(&self, id: &str) -> PathBuf {
        self.root.join("hoax").join(format!("{id}.txt"))
    }

    pub fn refutation_path(&self, id: &str) -> PathBuf {
        self.root.join("refutation").join(format!("{id}.txt"))
    }

    pub fn refsim_dir(&self) -> PathBuf {
        self.root.join("refsim")
    }

    pub fn refsim_path(&self, id: &str) -> PathBuf {
        self.refsim_dir().join(format!("{id}.json"))
    }
}

fn txt_ids(dir: &Path) -> Result<BTreeSet<String>> {
    let mut ids = BTreeSet::new();
    if !dir.is_dir() {
        return Ok(ids);
    }
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.insert(stem.to_string());
            }
        }
    }
    Ok(ids)
}

/// Pairs hoax and refutation files by id. Errors when nothing matches.
pub fn scan_corpus(root: &Path) -> Result<CorpusIndex> {
    let hoaxes = txt_ids(&root.join("hoax"))?;
    let refutations = txt_ids(&root.join("refutation"))?;
    let matched: Vec<String> = hoaxes.intersection(&refutations).cloned().collect();
    if matched.is_empty() {
        return Err(Error::NoMatchedPairs {
            root: root.to_path_buf(),
        });
    }
    Ok(CorpusIndex {
        root: root.to_path_buf(),
        matched,
        orphan_hoaxes: hoaxes.difference(&refutations).cloned().collect(),
        orphan_refutations: refutations.difference(&hoaxes).cloned().collect(),
    })
}

pub fn read_refsim(path: &Path) -> Result<RefSim> {
    let data = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: RefSimFile = serde_json::from_str(&data).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(file.into_refsim())
}

pub fn write_refsim(
    path: &Path,
    refsim: &RefSim,
    config: Option<&RunConfig>,
    version: &str,
) -> Result<()> {
    let file = RefSimFile {
        doc_id: refsim.doc_id.clone(),
        n: refsim.n,
        scores: refsim.scores.clone(),
        config: config.cloned(),
        version: Some(version.to_string()),
    };
    let json = serde_json::to_string_pretty(&file).expect("refsim serializes");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::StoreKind;
    use crate::text::{segment, SegmentMode};
    use proptest::prelude::*;

    fn store(pairs: &[(&str, &[f32])]) -> VectorStore {
        VectorStore::from_entries(
            StoreKind::Word,
            pairs[0].1.len(),
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    fn doc(id: &str, lines: &str) -> Document {
        segment(id, lines, SegmentMode::PreSegmented).unwrap()
    }

    #[test]
    fn identical_single_sentence_refutation_scores_one() {
        let ws = store(&[("apple", &[0.3, 0.4]), ("pie", &[0.1, 0.9])]);
        let hoax = doc("h", "apple pie\npie");
        let refutation = doc("r", "apple pie");
        let refsim = build_refsim(&hoax, &refutation, &ws).unwrap();
        assert!((refsim.scores[0] - 1.0).abs() < 1e-12);
        assert_eq!(refsim.n, 2);
    }

    #[test]
    fn all_oov_hoax_sentence_scores_zero() {
        let ws = store(&[("apple", &[0.3, 0.4])]);
        let hoax = doc("h", "qqq zzz\napple");
        let refutation = doc("r", "apple");
        let refsim = build_refsim(&hoax, &refutation, &ws).unwrap();
        assert_eq!(refsim.scores[0], 0.0);
        assert!((refsim.scores[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_by_two_pair_matches_double_loop() {
        let ws = store(&[
            ("a", &[1.0, 0.0, 0.0]),
            ("b", &[0.0, 1.0, 0.0]),
            ("c", &[0.0, 0.0, 1.0]),
            ("d", &[0.5, 0.5, 0.0]),
        ]);
        let hoax = doc("h", "a b\nb c\nd");
        let refutation = doc("r", "a\nc d");
        let refsim = build_refsim(&hoax, &refutation, &ws).unwrap();

        let hv: Vec<Vec<f64>> = hoax
            .sentences
            .iter()
            .map(|s| sentence_vector(s, &ws).v)
            .collect();
        let rv: Vec<Vec<f64>> = refutation
            .sentences
            .iter()
            .map(|s| sentence_vector(s, &ws).v)
            .collect();
        for (i, h) in hv.iter().enumerate() {
            let mut sum = 0.0;
            for r in &rv {
                sum += cosine(h, r);
            }
            assert!((refsim.scores[i] - sum / rv.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn refutation_permutation_is_exact() {
        let ws = store(&[
            ("a", &[1.0, 0.2]),
            ("b", &[0.3, 1.0]),
            ("c", &[0.7, 0.7]),
        ]);
        let hoax = doc("h", "a b\nc");
        let fwd = build_refsim(&hoax, &doc("r", "a\nb\nc a\nb c"), &ws).unwrap();
        let rev = build_refsim(&hoax, &doc("r", "b c\nc a\nb\na"), &ws).unwrap();
        assert_eq!(fwd.scores, rev.scores);
    }

    #[test]
    fn appending_identical_sentence_never_decreases() {
        let ws = store(&[
            ("a", &[1.0, 0.0]),
            ("b", &[0.0, 1.0]),
            ("c", &[0.6, 0.8]),
        ]);
        let hoax = doc("h", "a b\nc\nb");
        let before = build_refsim(&hoax, &doc("r", "a\nc b"), &ws).unwrap();
        for (i, sentence) in hoax.sentences.iter().enumerate() {
            let extended = doc("r", &format!("a\nc b\n{}", sentence.text));
            let after = build_refsim(&hoax, &extended, &ws).unwrap();
            assert!(
                after.scores[i] >= before.scores[i] - 1e-12,
                "sentence {i}: {} -> {}",
                before.scores[i],
                after.scores[i]
            );
        }
    }

    #[test]
    fn truncate_pattern_and_edges() {
        let refsim = RefSim {
            doc_id: "d".into(),
            n: 4,
            scores: vec![0.5, 0.66, 0.63, 0.52],
        };
        assert_eq!(truncate_topk(&refsim, 2).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(truncate_topk(&refsim, 4).unwrap(), vec![1, 1, 1, 1]);
        assert!(truncate_topk(&refsim, 0).is_err());
        assert!(truncate_topk(&refsim, 5).is_err());

        let flat = RefSim {
            doc_id: "d".into(),
            n: 3,
            scores: vec![0.4, 0.4, 0.4],
        };
        assert_eq!(truncate_topk(&flat, 1).unwrap(), vec![1, 0, 0]);
    }

    proptest! {
        #[test]
        fn truncate_has_exactly_rho_ones(scores in proptest::collection::vec(-1.0f64..1.0, 1..12), rho_raw in 1usize..12) {
            let n = scores.len();
            let rho = 1 + rho_raw % n;
            let refsim = RefSim { doc_id: "d".into(), n, scores };
            let labels = truncate_topk(&refsim, rho).unwrap();
            prop_assert_eq!(labels.iter().filter(|&&l| l == 1).count(), rho);
            // Every kept score is >= every dropped score.
            let kept_min = refsim.scores.iter().zip(&labels).filter(|(_, &l)| l == 1).map(|(s, _)| *s).fold(f64::INFINITY, f64::min);
            let dropped_max = refsim.scores.iter().zip(&labels).filter(|(_, &l)| l == 0).map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(kept_min >= dropped_max);
        }
    }

    #[test]
    fn corpus_scan_pairs_and_orphans() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        std::fs::create_dir_all(root.join("hoax")).unwrap();
        std::fs::create_dir_all(root.join("refutation")).unwrap();
        std::fs::write(root.join("hoax/a.txt"), "x").unwrap();
        std::fs::write(root.join("hoax/b.txt"), "x").unwrap();
        std::fs::write(root.join("hoax/c.txt"), "x").unwrap();
        std::fs::write(root.join("refutation/a.txt"), "x").unwrap();
        std::fs::write(root.join("refutation/b.txt"), "x").unwrap();
        std::fs::write(root.join("refutation/d.txt"), "x").unwrap();
        std::fs::write(root.join("hoax/notes.md"), "ignored").unwrap();

        let index = scan_corpus(root).unwrap();
        assert_eq!(index.matched, vec!["a", "b"]);
        assert_eq!(index.orphan_hoaxes, vec!["c"]);
        assert_eq!(index.orphan_refutations, vec!["d"]);
        assert_eq!(index.hoax_path("a"), root.join("hoax/a.txt"));
    }

    #[test]
    fn empty_corpus_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            scan_corpus(dir.path()),
            Err(Error::NoMatchedPairs { .. })
        ));
    }

    #[test]
    fn refsim_file_roundtrip_and_bare_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        let refsim = RefSim {
            doc_id: "x".into(),
            n: 3,
            scores: vec![0.25, -0.5, 1.0],
        };
        write_refsim(&path, &refsim, Some(&RunConfig::default()), "0.1.0").unwrap();
        assert_eq!(read_refsim(&path).unwrap(), refsim);

        // Minimal external shape without metadata.
        let bare = dir.path().join("bare.json");
        std::fs::write(&bare, r#"{"doc_id":"y","n":2,"scores":[0.1,0.2]}"#).unwrap();
        let got = read_refsim(&bare).unwrap();
        assert_eq!(got.scores, vec![0.1, 0.2]);
    }
}
