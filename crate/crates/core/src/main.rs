use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blogtensor::evalmetrics::OverlapDefinition;
use blogtensor::pipeline::{self, Method, PipelineError};
use blogtensor::PipelineConfig;

#[derive(Parser)]
#[command(
    version,
    about = "Co-cluster weblogs and words with tensor and matrix factorizations"
)]
struct Cli {
    /// Pipeline configuration (TOML). Relative paths inside it are resolved
    /// against its directory.
    #[arg(long, short, global = true, default_value = "config.toml")]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Comma-separated ranks, replacing the configured list.
    #[arg(long, global = true, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Which factorization(s) to run or evaluate.
    #[arg(long, global = true, value_enum, default_value_t = MethodChoice::Both)]
    method: MethodChoice,
    /// Task 1 uses the literal blog-factor product (needs N = M = R).
    #[arg(long, global = true)]
    strict_paper: bool,
    #[arg(long, global = true, value_enum)]
    overlap_def: Option<OverlapDefinition>,
    /// Fetch http(s) locators (requires the `http` feature).
    #[arg(long, global = true)]
    allow_network: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodChoice {
    Parafac,
    Nmf,
    Both,
}

impl MethodChoice {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Parafac => vec![Method::Parafac],
            MethodChoice::Nmf => vec![Method::Nmf],
            MethodChoice::Both => vec![Method::Parafac, Method::Nmf],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse every feed in the feed list into the corpus file.
    Ingest,
    /// Build the characteristic matrix and adjacency tensor from the corpus.
    Build,
    /// Factorize for every configured rank and write factor files.
    Decompose,
    /// Compute similarity, overlap and cluster-table reports.
    Evaluate,
    /// All four stages in order.
    RunAll,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::load(&cli.config).map_err(PipelineError::Input)?;
    let o = &cli.overrides;
    if let Some(ranks) = &o.ranks {
        cfg.ranks = ranks.clone();
    }
    cfg.strict_paper |= o.strict_paper;
    cfg.allow_network |= o.allow_network;
    if let Some(def) = o.overlap_def {
        cfg.overlap_definition = def;
    }
    cfg.validate().map_err(PipelineError::Input)?;
    Ok(cfg)
}

fn print_ingest(s: &pipeline::IngestSummary) {
    println!("ingested {} feed(s), skipped {}", s.parsed.len(), s.skipped.len());
    for (locator, reason) in &s.skipped {
        println!("  skipped {locator}: {reason}");
    }
}

fn print_build(s: &pipeline::BuildSummary) {
    println!(
        "N = {} blogs, M = {} words, {} nonzero tensor entries",
        s.blogs, s.words, s.nonzeros
    );
}

fn print_decompose(runs: &[pipeline::DecomposeSummary]) {
    for r in runs {
        println!(
            "{} R={} -> {} ({:.3}s)",
            r.method.name(),
            r.rank,
            r.path.display(),
            r.seconds
        );
    }
}

fn print_evaluate(s: &pipeline::EvalSummary) {
    for r in &s.similarity {
        println!("{} R={} task {}: {:.4}", r.method, r.rank, r.task, r.similarity);
    }
    for r in &s.overlap {
        println!("{} R={} overlap@{}: {:.4}", r.method, r.rank, r.k, r.overlap);
    }
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = load_config(cli)?;
    let methods = cli.overrides.method.methods();
    match cli.command {
        Command::Ingest => print_ingest(&pipeline::cmd_ingest(&cfg)?),
        Command::Build => print_build(&pipeline::cmd_build(&cfg)?),
        Command::Decompose => print_decompose(&pipeline::cmd_decompose(&cfg, &methods)?),
        Command::Evaluate => print_evaluate(&pipeline::cmd_evaluate(&cfg, &methods)?),
        Command::RunAll => {
            let s = pipeline::run_all(&cfg, &methods)?;
            print_ingest(&s.ingest);
            print_build(&s.build);
            print_decompose(&s.decompose);
            print_evaluate(&s.evaluate);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
