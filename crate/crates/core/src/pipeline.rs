//! The end-to-end stages behind the CLI subcommands: ingest, build,
//! decompose and evaluate. Each stage reads the previous stage's files and
//! writes its own, so any stage can be rerun on its own.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::decomp::{
    greedy_parafac, ncw_normalize, nmf_multiplicative, DecompError, FactorRecord, NmfConfig, ParafacConfig,
};
use crate::evalmetrics::{
    extract_cluster_tables, fraction_overlap, group_rankings, similarity_matrices, task_vectors, ClusterTable,
    EvalError, Factors, QueryVectors, Task1Formula,
};
use crate::exec::{self, Exec};
use crate::feedio::{read_corpus, read_feed_list, write_corpus, FeedError, SourceLoader};
use crate::matrixbuild::{build_char_matrix, read_tensor, to_adjacency_tensor, write_tensor, BuildError, CharMatrix};
use crate::textprep::{blogs_content, fetch_documents, SourceOutcome, StopWordSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Missing, unreadable or invalid input. Exit code 1.
    #[error("{0}")]
    Input(String),
    /// A numerical stage failed. Exit code 2.
    #[error("{0}")]
    Numerical(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 1,
            PipelineError::Numerical(_) => 2,
        }
    }
}

impl From<FeedError> for PipelineError {
    fn from(e: FeedError) -> Self {
        PipelineError::Input(e.to_string())
    }
}

impl From<BuildError> for PipelineError {
    fn from(e: BuildError) -> Self {
        PipelineError::Input(e.to_string())
    }
}

impl From<DecompError> for PipelineError {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::InvalidRank(_)
            | DecompError::InvalidTolerance(_)
            | DecompError::InvalidIterations
            | DecompError::InvalidTrials
            | DecompError::Format(_) => PipelineError::Input(e.to_string()),
            _ => PipelineError::Numerical(e.to_string()),
        }
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        PipelineError::Numerical(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    String::from_utf8(read_file(path)?).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Method {
    Parafac,
    Nmf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Parafac => "parafac",
            Method::Nmf => "nmf",
        }
    }
}

pub fn factor_path(cfg: &PipelineConfig, method: Method, rank: usize) -> PathBuf {
    cfg.paths.factors_dir.join(format!("{}_r{rank}.json", method.name()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub parsed: Vec<String>,
    pub skipped: Vec<(String, String)>,
}

/// Relative local locators are taken relative to the feed-list file.
fn resolve_locator(locator: &str, list_dir: &Path) -> String {
    let lower = locator.to_ascii_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") || Path::new(locator).is_absolute() {
        locator.to_string()
    } else {
        list_dir.join(locator).to_string_lossy().into_owned()
    }
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestSummary, PipelineError> {
    let list_path = &cfg.paths.feed_list;
    let mut list = read_feed_list(&read_text(list_path)?)?;
    if !cfg.paths.stop_words.is_file() {
        return Err(PipelineError::Input(format!(
            "stop-words file {} not found",
            cfg.paths.stop_words.display()
        )));
    }
    let list_dir = list_path.parent().unwrap_or(Path::new("."));
    let originals = list.entries.clone();
    list.entries = list.entries.iter().map(|l| resolve_locator(l, list_dir)).collect();

    let loader = SourceLoader::new(cfg.allow_network);
    let mut docs = Vec::new();
    let mut summary = IngestSummary {
        parsed: Vec::new(),
        skipped: Vec::new(),
    };
    for ((_, outcome), original) in fetch_documents(&list, &loader, Exec::default())
        .into_iter()
        .zip(originals)
    {
        match outcome {
            SourceOutcome::Parsed(doc) => {
                summary.parsed.push(original);
                docs.push(doc);
            }
            SourceOutcome::Skipped(e) => summary.skipped.push((original, e.to_string())),
        }
    }
    if docs.is_empty() {
        return Err(PipelineError::Input("no feed could be loaded (empty corpus)".into()));
    }
    write_file(&cfg.paths.corpus, &write_corpus(&docs)?)?;
    info!(
        "ingest: {} parsed, {} skipped -> {}",
        summary.parsed.len(),
        summary.skipped.len(),
        cfg.paths.corpus.display()
    );
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildSummary {
    pub blogs: usize,
    pub words: usize,
    pub nonzeros: usize,
}

pub fn cmd_build(cfg: &PipelineConfig) -> Result<BuildSummary, PipelineError> {
    let docs = read_corpus(&read_file(&cfg.paths.corpus)?)?;
    if docs.is_empty() {
        return Err(PipelineError::Input(format!(
            "corpus {} is empty",
            cfg.paths.corpus.display()
        )));
    }
    let stop = StopWordSet::from_text(&read_text(&cfg.paths.stop_words)?);
    let content = blogs_content(&docs, &stop, &cfg.weights);
    let cm = build_char_matrix(&content, &cfg.bounds, cfg.doc_frequency)?;
    let tensor = to_adjacency_tensor(&cm);

    let mut csv = Vec::new();
    cm.write_csv(&mut csv)?;
    write_file(&cfg.paths.matrix, &csv)?;
    let mut txt = Vec::new();
    write_tensor(&tensor, &mut txt).map_err(BuildError::from)?;
    write_file(&cfg.paths.tensor, &txt)?;

    let summary = BuildSummary {
        blogs: cm.n_blogs(),
        words: cm.n_words(),
        nonzeros: tensor.nnz(),
    };
    info!(
        "build: N = {}, M = {}, nnz = {}",
        summary.blogs, summary.words, summary.nonzeros
    );
    Ok(summary)
}

pub fn load_matrix(cfg: &PipelineConfig) -> Result<CharMatrix, PipelineError> {
    let file = fs::File::open(&cfg.paths.matrix)
        .map_err(|e| PipelineError::Input(format!("{}: {e}", cfg.paths.matrix.display())))?;
    Ok(CharMatrix::read_csv(BufReader::new(file))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeSummary {
    pub method: Method,
    pub rank: usize,
    pub path: PathBuf,
    pub seconds: f64,
    pub record: FactorRecord,
}

pub fn cmd_decompose(cfg: &PipelineConfig, methods: &[Method]) -> Result<Vec<DecomposeSummary>, PipelineError> {
    let mut out = Vec::new();
    for &method in methods {
        let runs: Vec<Result<(usize, FactorRecord, f64), PipelineError>> = match method {
            Method::Parafac => {
                let file = fs::File::open(&cfg.paths.tensor)
                    .map_err(|e| PipelineError::Input(format!("{}: {e}", cfg.paths.tensor.display())))?;
                let tensor = read_tensor(BufReader::new(file))?;
                exec::map_ordered(Exec::default(), &cfg.ranks, |&rank| {
                    let start = Instant::now();
                    let pc = ParafacConfig {
                        rank,
                        epsilon: cfg.parafac.epsilon,
                        max_iters: cfg.parafac.max_iters,
                        exec: Exec::default(),
                    };
                    let f = greedy_parafac(&tensor, &pc)?;
                    Ok((rank, FactorRecord::from(&f), start.elapsed().as_secs_f64()))
                })
            }
            Method::Nmf => {
                let cstar = ncw_normalize(&load_matrix(cfg)?.to_real())?;
                exec::map_ordered(Exec::default(), &cfg.ranks, |&rank| {
                    let start = Instant::now();
                    let nc = NmfConfig {
                        rank,
                        trials: cfg.nmf.trials,
                        max_iters: cfg.nmf.max_iters,
                        tol: cfg.nmf.tol,
                        exec: Exec::default(),
                    };
                    let f = nmf_multiplicative(&cstar, &nc)?;
                    Ok((rank, FactorRecord::from(&f), start.elapsed().as_secs_f64()))
                })
            }
        };
        for run in runs {
            let (rank, record, seconds) = run?;
            let path = factor_path(cfg, method, rank);
            let mut buf = Vec::new();
            record.write(&mut buf)?;
            write_file(&path, &buf)?;
            log_record(&record, seconds);
            out.push(DecomposeSummary {
                method,
                rank,
                path,
                seconds,
                record,
            });
        }
    }
    Ok(out)
}

fn log_record(record: &FactorRecord, seconds: f64) {
    match record {
        FactorRecord::Parafac { rank, psi, groups, .. } => {
            for (g, (lambda, trace)) in psi.iter().zip(groups).enumerate() {
                info!(
                    "parafac R={rank} group {}: lambda {lambda:.6}, {} iterations{}",
                    g + 1,
                    trace.iterations,
                    if trace.converged { "" } else { " (not converged)" }
                );
            }
            info!("parafac R={rank}: {seconds:.3}s");
        }
        FactorRecord::Nmf {
            rank,
            objective,
            trial_seed,
            iterations,
            ..
        } => {
            info!("nmf R={rank}: objective {objective:.6} (trial {trial_seed}, {iterations} iterations), {seconds:.3}s")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub method: &'static str,
    pub dataset: String,
    pub rank: usize,
    pub task: u8,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRow {
    pub method: &'static str,
    pub dataset: String,
    pub rank: usize,
    pub k: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub similarity: Vec<SimilarityRow>,
    pub overlap: Vec<OverlapRow>,
    pub tables: Vec<(Method, usize, Vec<ClusterTable>)>,
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>, PipelineError>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let run = |w: &mut csv::Writer<&mut Vec<u8>>| -> csv::Result<()> {
            w.write_record(header)?;
            fill(w)?;
            w.flush()?;
            Ok(())
        };
        run(&mut w).map_err(|e| PipelineError::Input(e.to_string()))?;
    }
    Ok(buf)
}

/// Table layout: one row per position, blog and word columns side by side.
pub fn cluster_tables_csv(tables: &[ClusterTable]) -> Result<Vec<u8>, PipelineError> {
    csv_bytes(
        &["group", "position", "blog", "blog_score", "word", "word_score"],
        |w| {
            for t in tables {
                for pos in 0..t.blogs.len().max(t.words.len()) {
                    let (blog, bscore) = t
                        .blogs
                        .get(pos)
                        .map_or((String::new(), String::new()), |(l, s)| (l.clone(), format!("{s:.5}")));
                    let (word, wscore) = t
                        .words
                        .get(pos)
                        .map_or((String::new(), String::new()), |(l, s)| (l.clone(), format!("{s:.5}")));
                    w.write_record([t.group.to_string(), (pos + 1).to_string(), blog, bscore, word, wscore])?;
                }
            }
            Ok(())
        },
    )
}

pub fn cmd_evaluate(cfg: &PipelineConfig, methods: &[Method]) -> Result<EvalSummary, PipelineError> {
    let cm = load_matrix(cfg)?;
    let c = cm.to_real();
    let sims = similarity_matrices(&c);
    let q = QueryVectors::all_ones(cm.n_blogs(), cm.n_words());
    let formula = if cfg.strict_paper {
        Task1Formula::Literal
    } else {
        Task1Formula::Consistent
    };

    let mut summary = EvalSummary {
        similarity: Vec::new(),
        overlap: Vec::new(),
        tables: Vec::new(),
    };
    for &method in methods {
        for &rank in &cfg.ranks {
            let path = factor_path(cfg, method, rank);
            if !path.is_file() {
                return Err(PipelineError::Input(format!("missing factor file {}", path.display())));
            }
            let record = FactorRecord::read(BufReader::new(
                fs::File::open(&path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?,
            ))?;
            let (blog, term) = record.blog_term_factors()?;
            let factors = Factors {
                blog: &blog,
                term: &term,
            };

            for task in 1..=4u8 {
                let res = task_vectors(task, &c, &sims, factors, &q, formula)?;
                summary.similarity.push(SimilarityRow {
                    method: method.name(),
                    dataset: cfg.dataset.clone(),
                    rank,
                    task,
                    similarity: res.similarity,
                });
            }

            if rank >= 2 {
                let rankings = group_rankings(&blog, &cm.blog_labels);
                for &k in &cfg.overlap_k {
                    if k > cm.n_blogs() {
                        log::warn!("skipping overlap k = {k}: only {} blogs", cm.n_blogs());
                        continue;
                    }
                    summary.overlap.push(OverlapRow {
                        method: method.name(),
                        dataset: cfg.dataset.clone(),
                        rank,
                        k,
                        overlap: fraction_overlap(&rankings, k, cfg.overlap_definition)?,
                    });
                }
            }

            let tables =
                extract_cluster_tables(factors, &cm.blog_labels, &cm.word_labels, cfg.top_blogs, cfg.top_words)?;
            let table_path = cfg
                .paths
                .reports_dir
                .join(format!("clusters_{}_r{rank}.csv", method.name()));
            write_file(&table_path, &cluster_tables_csv(&tables)?)?;
            summary.tables.push((method, rank, tables));
        }
    }

    let sim_csv = csv_bytes(&["method", "dataset", "R", "task", "similarity"], |w| {
        for r in &summary.similarity {
            w.write_record([
                r.method.to_string(),
                r.dataset.clone(),
                r.rank.to_string(),
                r.task.to_string(),
                format!("{:.6}", r.similarity),
            ])?;
        }
        Ok(())
    })?;
    write_file(&cfg.paths.reports_dir.join("similarity.csv"), &sim_csv)?;
    let overlap_csv = csv_bytes(&["method", "dataset", "R", "k", "overlap"], |w| {
        for r in &summary.overlap {
            w.write_record([
                r.method.to_string(),
                r.dataset.clone(),
                r.rank.to_string(),
                r.k.to_string(),
                format!("{:.6}", r.overlap),
            ])?;
        }
        Ok(())
    })?;
    write_file(&cfg.paths.reports_dir.join("overlap.csv"), &overlap_csv)?;
    info!(
        "evaluate: {} similarity rows, {} overlap rows -> {}",
        summary.similarity.len(),
        summary.overlap.len(),
        cfg.paths.reports_dir.display()
    );
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub ingest: IngestSummary,
    pub build: BuildSummary,
    pub decompose: Vec<DecomposeSummary>,
    pub evaluate: EvalSummary,
}

pub fn run_all(cfg: &PipelineConfig, methods: &[Method]) -> Result<RunSummary, PipelineError> {
    Ok(RunSummary {
        ingest: cmd_ingest(cfg)?,
        build: cmd_build(cfg)?,
        decompose: cmd_decompose(cfg, methods)?,
        evaluate: cmd_evaluate(cfg, methods)?,
    })
}
