use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use resco::cluster::curve_csv;
use resco::config::RunConfig;
use resco::eval::{evaluate_corpus, per_doc_csv, report_json, EvalParams, EvalReport, Metric};
use resco::features::{features_csv, CohFallback};
use resco::gold::{build_refsim, read_refsim, scan_corpus, write_refsim, CorpusIndex, RefSim};
use resco::pipeline::{
    read_selection_record, record_json, selection_record, write_selection_record, DocRun,
    Pipeline,
};
use resco::report::render_html;
use resco::select::{CohesionSpace, Method, Mode};
use resco::store::{StoreKind, VectorStore};
use resco::text::{Document, SegmentMode};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "resco", version, about = "Key disinformation sentence scoring")]
struct Cli {
    #[command(flatten)]
    overrides: ConfigOverrides,

    /// Escalate degenerate-input warnings to exit code 3.
    #[arg(long, global = true)]
    strict: bool,

    /// Process corpus documents one at a time instead of in parallel.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

/// Flags mirroring the run configuration; unset flags fall back to the
/// config file and then to defaults.
#[derive(Args)]
struct ConfigOverrides {
    /// TOML config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Word vector file (.bin word2vec binary, anything else text).
    #[arg(long, global = true, env = "RESCO_WORD_VECTORS", value_name = "FILE")]
    word_vectors: Option<PathBuf>,

    /// Entity vector file with ENTITY/ keys.
    #[arg(long, global = true, env = "RESCO_ENTITY_VECTORS", value_name = "FILE")]
    entity_vectors: Option<PathBuf>,

    /// Force the vector file format instead of sniffing the extension.
    #[arg(long, global = true, value_enum)]
    vectors_format: Option<VectorsFormat>,

    #[arg(long, global = true, value_enum)]
    segmentation: Option<SegmentModeArg>,

    #[arg(long, global = true)]
    k_min: Option<usize>,

    #[arg(long, global = true)]
    k_max: Option<usize>,

    #[arg(long, global = true)]
    restarts: Option<usize>,

    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true)]
    max_iters: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// resco-cc, resco-coh, or resco-cen.
    #[arg(long, global = true)]
    method: Option<String>,

    /// Standardize each feature before clustering.
    #[arg(long, global = true)]
    zscore: bool,

    /// Coherence for sentences with under two entities: zero or doc-mean.
    #[arg(long, global = true)]
    coh_fallback: Option<String>,

    /// Space for the cohesive-cluster variant: feature or sentence.
    #[arg(long, global = true)]
    cohesion_space: Option<String>,

    /// Longest entity mention, in tokens.
    #[arg(long, global = true)]
    max_span: Option<usize>,

    /// Correlate scored output instead of binary output in
    /// identification-mode evaluation.
    #[arg(long, global = true)]
    pearson_on_scores: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VectorsFormat {
    Auto,
    Binary,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SegmentModeArg {
    Auto,
    PreSegmented,
}

#[derive(Subcommand)]
enum Command {
    /// Score an article's sentences (scoring mode).
    Score(ScoreArgs),
    /// Mark an article's key sentences (identification mode).
    Identify(ScoreArgs),
    /// Build gold-standard refsim files for a (hoax, refutation) corpus.
    GenGold {
        /// Corpus root containing hoax/ and refutation/.
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        /// Output directory (default <corpus>/refsim).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Evaluate methods against refsim gold standards.
    Evaluate {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        /// Comma-separated methods.
        #[arg(long, default_value = "resco-cc,resco-coh,resco-cen")]
        methods: String,
        /// Comma-separated metrics (pearson, ndcg).
        #[arg(long, default_value = "pearson")]
        metrics: String,
        /// Comma-separated gold truncation depths for ndcg.
        #[arg(long, default_value = "3,5,7")]
        rhos: String,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// identification or scoring (the correlation target).
        #[arg(long, default_value = "identification")]
        mode: String,
        /// Output directory (default <corpus>/eval).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Render a stored selection as HTML.
    Report {
        /// Selection JSON produced by score/identify.
        #[arg(long, value_name = "FILE")]
        selection: PathBuf,
        /// The article the selection was computed from.
        #[arg(long, value_name = "FILE")]
        article: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScoreArgs {
    /// Article file (plain text).
    #[arg(long, value_name = "FILE")]
    article: PathBuf,
    /// Where to write the selection JSON (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write an HTML rendering.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write the per-sentence feature triples as CSV.
    #[arg(long, value_name = "FILE")]
    feature_dump: Option<PathBuf>,
    /// Write the K sweep's (k, inertia) curve as CSV.
    #[arg(long, value_name = "FILE")]
    elbow_dump: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let config = match build_config(&cli.overrides) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match execute(&cli, config) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn parse_method(s: &str) -> anyhow::Result<Method> {
    Method::parse(s).ok_or_else(|| anyhow!("unknown method {s:?} (resco-cc, resco-coh, resco-cen)"))
}

fn parse_mode(s: &str) -> anyhow::Result<Mode> {
    Mode::parse(s).ok_or_else(|| anyhow!("unknown mode {s:?} (identification, scoring)"))
}

fn build_config(overrides: &ConfigOverrides) -> anyhow::Result<RunConfig> {
    let mut config = match &overrides.config {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&raw).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &overrides.word_vectors {
        config.word_vectors = Some(p.clone());
    }
    if let Some(p) = &overrides.entity_vectors {
        config.entity_vectors = Some(p.clone());
    }
    if let Some(mode) = overrides.segmentation {
        config.segmentation = match mode {
            SegmentModeArg::Auto => SegmentMode::Auto,
            SegmentModeArg::PreSegmented => SegmentMode::PreSegmented,
        };
    }
    if let Some(v) = overrides.k_min {
        config.k_min = v;
    }
    if let Some(v) = overrides.k_max {
        config.k_max = v;
    }
    if let Some(v) = overrides.restarts {
        config.restarts = v;
    }
    if let Some(v) = overrides.tol {
        config.tol = v;
    }
    if let Some(v) = overrides.max_iters {
        config.max_iters = v;
    }
    if let Some(v) = overrides.seed {
        config.seed = v;
    }
    if let Some(m) = &overrides.method {
        config.method = parse_method(m)?;
    }
    if overrides.zscore {
        config.zscore = true;
    }
    if let Some(f) = &overrides.coh_fallback {
        config.coh_fallback = match f.as_str() {
            "zero" => CohFallback::Zero,
            "doc-mean" => CohFallback::DocMean,
            other => bail!("unknown coherence fallback {other:?} (zero, doc-mean)"),
        };
    }
    if let Some(s) = &overrides.cohesion_space {
        config.cohesion_space = match s.as_str() {
            "feature" => CohesionSpace::Feature,
            "sentence" => CohesionSpace::Sentence,
            other => bail!("unknown cohesion space {other:?} (feature, sentence)"),
        };
    }
    if let Some(v) = overrides.max_span {
        config.max_span = v;
    }
    if overrides.pearson_on_scores {
        config.pearson_on_scores = true;
    }
    if config.k_min < 1 {
        bail!("k-min must be at least 1");
    }
    if config.k_max < config.k_min {
        bail!("k-max {} below k-min {}", config.k_max, config.k_min);
    }
    if config.max_span < 1 {
        bail!("max-span must be at least 1");
    }
    Ok(config)
}

fn load_store(
    path: &Path,
    kind: StoreKind,
    format: Option<VectorsFormat>,
) -> anyhow::Result<VectorStore> {
    let binary = match format {
        Some(VectorsFormat::Binary) => true,
        Some(VectorsFormat::Text) => false,
        Some(VectorsFormat::Auto) | None => {
            path.extension().and_then(|e| e.to_str()) == Some("bin")
        }
    };
    let store = if binary {
        VectorStore::load_binary(path, kind)?
    } else {
        VectorStore::load_text(path, kind)?
    };
    Ok(store)
}

fn build_pipeline(config: RunConfig, overrides: &ConfigOverrides) -> anyhow::Result<Pipeline> {
    let word_path = config.word_vectors.clone().ok_or_else(|| {
        anyhow!("word vectors required: --word-vectors, config word_vectors, or RESCO_WORD_VECTORS")
    })?;
    let word_store = load_store(&word_path, StoreKind::Word, overrides.vectors_format)
        .with_context(|| format!("loading word vectors {}", word_path.display()))?;
    let entity_store = match &config.entity_vectors {
        Some(path) => load_store(path, StoreKind::Entity, overrides.vectors_format)
            .with_context(|| format!("loading entity vectors {}", path.display()))?,
        None => {
            log::warn!("no entity vectors given; coherence falls back for every sentence");
            VectorStore::empty(StoreKind::Entity)
        }
    };
    Ok(Pipeline::new(word_store, entity_store, config))
}

fn read_article(pipeline: &Pipeline, path: &Path) -> anyhow::Result<Document> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading article {}", path.display()))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("article")
        .to_string();
    Ok(pipeline.prepare(&id, &raw)?)
}

fn execute(cli: &Cli, config: RunConfig) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Score(args) => {
            let config = RunConfig {
                mode: Mode::Scoring,
                ..config
            };
            cmd_score(cli, config, args)
        }
        Command::Identify(args) => {
            let config = RunConfig {
                mode: Mode::Identification,
                ..config
            };
            cmd_score(cli, config, args)
        }
        Command::GenGold { corpus, out } => cmd_gen_gold(cli, config, corpus, out.as_deref()),
        Command::Evaluate {
            corpus,
            methods,
            metrics,
            rhos,
            iterations,
            mode,
            out,
        } => cmd_evaluate(
            cli,
            config,
            corpus,
            methods,
            metrics,
            rhos,
            *iterations,
            mode,
            out.as_deref(),
        ),
        Command::Report {
            selection,
            article,
            out,
        } => cmd_report(config, selection, article, out),
    }
}

fn cmd_score(cli: &Cli, config: RunConfig, args: &ScoreArgs) -> anyhow::Result<u8> {
    let pipeline = build_pipeline(config, &cli.overrides)?;
    let doc = read_article(&pipeline, &args.article)?;
    let run: DocRun = pipeline.run_document(&doc, pipeline.config.seed)?;
    let record = selection_record(&doc, &run, &pipeline.config);

    match &args.out {
        Some(path) => {
            write_selection_record(path, &record)?;
            log::info!("wrote {}", path.display());
        }
        None => print!("{}", record_json(&record)),
    }
    if let Some(path) = &args.report {
        std::fs::write(path, render_html(&record, &doc))
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    if let Some(path) = &args.feature_dump {
        let csv = match &run.points {
            Some(points) => features_csv(points),
            None => String::from("index,rel,smo,coh\n"),
        };
        std::fs::write(path, csv)
            .with_context(|| format!("writing feature dump {}", path.display()))?;
    }
    if let Some(path) = &args.elbow_dump {
        let csv = match &run.elbow {
            Some(elbow) => curve_csv(&elbow.curve),
            None => String::from("k,inertia\n"),
        };
        std::fs::write(path, csv)
            .with_context(|| format!("writing elbow dump {}", path.display()))?;
    }
    for warning in &run.output.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(if run.degenerate && cli.strict {
        EXIT_DEGENERATE
    } else {
        0
    })
}

fn cmd_gen_gold(
    cli: &Cli,
    config: RunConfig,
    corpus: &Path,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let pipeline = build_pipeline(config, &cli.overrides)?;
    let index = scan_corpus(corpus)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| index.refsim_dir());
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let build_one = |id: &String| -> anyhow::Result<()> {
        let hoax_raw = std::fs::read_to_string(index.hoax_path(id))?;
        let ref_raw = std::fs::read_to_string(index.refutation_path(id))?;
        let hoax = pipeline.prepare(id, &hoax_raw)?;
        let refutation = pipeline.prepare(&format!("{id}-refutation"), &ref_raw)?;
        let refsim = build_refsim(&hoax, &refutation, &pipeline.word_store)?;
        write_refsim(
            &out_dir.join(format!("{id}.json")),
            &refsim,
            Some(&pipeline.config),
            resco::VERSION,
        )?;
        Ok(())
    };
    if cli.serial {
        for id in &index.matched {
            build_one(id).with_context(|| format!("pair {id}"))?;
        }
    } else {
        index
            .matched
            .par_iter()
            .map(|id| build_one(id).with_context(|| format!("pair {id}")))
            .collect::<anyhow::Result<()>>()?;
    }

    let manifest = serde_json::json!({
        "matched": index.matched,
        "orphan_hoaxes": index.orphan_hoaxes,
        "orphan_refutations": index.orphan_refutations,
        "config": pipeline.config,
        "version": resco::VERSION,
    });
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    println!(
        "{} refsim files, {} orphan hoaxes, {} orphan refutations -> {}",
        index.matched.len(),
        index.orphan_hoaxes.len(),
        index.orphan_refutations.len(),
        out_dir.display()
    );
    Ok(0)
}

fn parse_list<T>(
    raw: &str,
    what: &str,
    parse: impl Fn(&str) -> anyhow::Result<T>,
) -> anyhow::Result<Vec<T>> {
    let items: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<anyhow::Result<_>>()?;
    if items.is_empty() {
        bail!("empty {what} list");
    }
    Ok(items)
}

struct LoadedCorpus {
    docs: Vec<(Document, RefSim)>,
    missing_refsim: Vec<String>,
}

fn load_eval_corpus(pipeline: &Pipeline, index: &CorpusIndex) -> anyhow::Result<LoadedCorpus> {
    let mut docs = Vec::new();
    let mut missing = Vec::new();
    for id in &index.matched {
        let refsim_path = index.refsim_path(id);
        if !refsim_path.is_file() {
            missing.push(id.clone());
            continue;
        }
        let refsim = read_refsim(&refsim_path)?;
        let raw = std::fs::read_to_string(index.hoax_path(id))?;
        let doc = pipeline.prepare(id, &raw)?;
        docs.push((doc, refsim));
    }
    Ok(LoadedCorpus {
        docs,
        missing_refsim: missing,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    cli: &Cli,
    config: RunConfig,
    corpus: &Path,
    methods: &str,
    metrics: &str,
    rhos: &str,
    iterations: usize,
    mode: &str,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let methods = parse_list(methods, "method", parse_method)?;
    let metrics = parse_list(metrics, "metric", |s| {
        Metric::parse(s).ok_or_else(|| anyhow!("unknown metric {s:?} (pearson, ndcg)"))
    })?;
    let rhos: Vec<usize> = parse_list(rhos, "rho", |s| Ok(s.parse::<usize>()?))?;
    let mode = parse_mode(mode)?;

    let pipeline = build_pipeline(config, &cli.overrides)?;
    let index = scan_corpus(corpus)?;
    let loaded = load_eval_corpus(&pipeline, &index)?;
    for id in &loaded.missing_refsim {
        eprintln!("warning: no refsim for {id}; skipping (run gen-gold first)");
    }
    if loaded.docs.is_empty() {
        bail!("no documents with refsim files under {}", corpus.display());
    }

    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| corpus.join("eval"));
    std::fs::create_dir_all(&out_dir)?;

    let mut reports: Vec<EvalReport> = Vec::new();
    for &method in &methods {
        for &metric in &metrics {
            let rho_list: Vec<Option<usize>> = match metric {
                Metric::Pearson => vec![None],
                Metric::Ndcg => rhos.iter().map(|&r| Some(r)).collect(),
            };
            for rho in rho_list {
                let params = EvalParams {
                    method,
                    mode,
                    metric,
                    rho,
                    iterations,
                    base_seed: pipeline.config.seed,
                    parallel: !cli.serial,
                };
                let report = evaluate_corpus(&pipeline, &loaded.docs, &params)?;
                let stem = match rho {
                    Some(r) => format!("eval_{}_{}_rho{}", method, metric, r),
                    None => format!("eval_{}_{}", method, metric),
                };
                std::fs::write(out_dir.join(format!("{stem}.json")), report_json(&report))?;
                std::fs::write(out_dir.join(format!("{stem}.csv")), per_doc_csv(&report))?;
                reports.push(report);
            }
        }
    }

    let mut summary = String::from("method,metric,rho,mean,stddev,documents,skipped\n");
    for report in &reports {
        summary.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{}\n",
            report.method,
            report.metric,
            report.rho.map_or(String::from(""), |r| r.to_string()),
            report.mean,
            report.stddev,
            report.per_doc.len(),
            report.skipped.len(),
        ));
    }
    std::fs::write(out_dir.join("summary.csv"), &summary)?;
    print!("{summary}");

    let any_skipped = reports.iter().any(|r| !r.skipped.is_empty());
    Ok(if (any_skipped || !loaded.missing_refsim.is_empty()) && cli.strict {
        EXIT_DEGENERATE
    } else {
        0
    })
}

fn cmd_report(
    config: RunConfig,
    selection: &Path,
    article: &Path,
    out: &Path,
) -> anyhow::Result<u8> {
    let record = read_selection_record(selection)?;
    // Re-segment with the run's own settings so indices line up.
    let segmentation = record
        .config
        .as_ref()
        .map(|c| c.segmentation)
        .unwrap_or(config.segmentation);
    let raw = std::fs::read_to_string(article)
        .with_context(|| format!("reading article {}", article.display()))?;
    let doc = resco::text::segment(&record.doc_id, &raw, segmentation)?;
    if doc.len() != record.n {
        bail!(
            "article has {} sentences but the selection recorded {}",
            doc.len(),
            record.n
        );
    }
    std::fs::write(out, render_html(&record, &doc))
        .with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_overrides_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 7\nk_max = 6\nmethod = \"resco-coh\"\n").unwrap();
        let cli = Cli::try_parse_from([
            "resco",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "identify",
            "--article",
            "x.txt",
        ])
        .unwrap();
        let config = build_config(&cli.overrides).unwrap();
        assert_eq!(config.seed, 9, "flag beats file");
        assert_eq!(config.k_max, 6, "file beats default");
        assert_eq!(config.method, Method::RescoCoh);
    }

    #[test]
    fn bad_config_values_are_usage_errors() {
        let cli = Cli::try_parse_from([
            "resco",
            "--method",
            "nonsense",
            "identify",
            "--article",
            "x.txt",
        ])
        .unwrap();
        assert!(build_config(&cli.overrides).is_err());

        let cli =
            Cli::try_parse_from(["resco", "--k-max", "1", "identify", "--article", "x.txt"])
                .unwrap();
        assert!(build_config(&cli.overrides).is_err());
    }
}
