//! `featnorm`: elicit, normalize and evaluate semantic feature norms.

mod commands;
mod config;
mod context;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use context::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "featnorm",
    version,
    about = "Elicit, normalize and evaluate semantic feature norms"
)]
struct Cli {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Query a completion backend for every concept over several runs.
    Elicit(ElicitArgs),
    /// Turn a raw corpus into a canonical norm and a rule report.
    Normalize(NormalizeArgs),
    /// Drop infrequent features, choosing k at the elbow if asked.
    Filter(FilterArgs),
    /// Print descriptive statistics of a norm.
    Stats(NormArgs),
    /// Cosine similarity matrix of a norm.
    Similarity(SimilarityArgs),
    /// Hierarchical clustering of a similarity matrix.
    Cluster(ClusterArgs),
    /// Within-minus-between category scores with bootstrap intervals.
    CategoryScore(CategoryArgs),
    /// Correlate a norm with word-pair benchmarks and a reference matrix.
    Evaluate(EvaluateArgs),
    /// Partition explained variance of a reference matrix across norms.
    Partition(PartitionArgs),
    /// Sample features for manual type labeling.
    SampleLabels(SampleArgs),
    /// Label proportions of a labeled sample with bootstrap intervals.
    LabelDist(LabelDistArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct NormArgs {
    /// Norm file: canonical TSV, or `preset:path` for a human norm layout (mcrae, cslb).
    #[arg(long)]
    pub norm: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ElicitArgs {
    /// Concept list TSV (id, name, disambiguator, categories).
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Norm supplying the priming examples (`preset:path` allowed).
    #[arg(long)]
    pub examples: Option<String>,
    #[arg(long)]
    pub runs: Option<u32>,
    #[arg(long, value_parser = ["live", "replay", "stub"])]
    pub backend: Option<String>,
    /// Recorded corpus (file or directory) for the replay backend.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// `name<TAB>answer` lines for the stub backend.
    #[arg(long)]
    pub stub_answers: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Requests per minute for the live backend.
    #[arg(long)]
    pub rate_limit: Option<f64>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub examples_per_prompt: Option<usize>,
    /// Features per priming answer.
    #[arg(long)]
    pub example_features: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct NormalizeArgs {
    /// Raw corpus: a JSONL file or a directory of run files.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Concept list; adds concepts that produced no response to the norm.
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    #[arg(long)]
    pub closed_class: Option<PathBuf>,
    #[arg(long)]
    pub synsets: Option<PathBuf>,
    /// Retry unknown words with a plural ending removed.
    #[arg(long)]
    pub plural_fold: Option<bool>,
    #[arg(long, value_parser = ["corpus", "concept"])]
    pub collapse_scope: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FilterArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// Minimum production frequency, or `auto` for the elbow point.
    #[arg(long)]
    pub k: Option<String>,
    /// Largest k on the unique-feature curve.
    #[arg(long)]
    pub k_max: Option<u32>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// Restrict to (and order by) the concepts of this list.
    #[arg(long)]
    pub concepts: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: SimilarityArgs,
    /// Precomputed similarity TSV instead of a norm.
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    #[arg(long, value_parser = ["average", "single", "complete"])]
    pub linkage: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CategoryArgs {
    #[command(flatten)]
    pub input: SimilarityArgs,
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    /// `concept_id<TAB>category` lines; defaults to the categories column of --concepts.
    #[arg(long)]
    pub categories: Option<PathBuf>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// Word-pair benchmark, `preset:path` (men, simlex) or a plain path; repeatable.
    #[arg(long)]
    pub benchmark: Vec<String>,
    /// Reference similarity matrix TSV.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Further norms; analyses are restricted to concepts shared by all norms.
    #[arg(long = "with")]
    pub with: Vec<String>,
    /// Concept list used to match benchmark words to concept names.
    #[arg(long)]
    pub concepts: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// One or two further predictor norms.
    #[arg(long = "with")]
    pub with: Vec<String>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SampleArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// Norms defining the inside stratum (concepts shared with all of them).
    #[arg(long = "with")]
    pub with: Vec<String>,
    /// Features per stratum.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LabelDistArgs {
    /// Labeled sample TSV (concept_id, feature, source, label).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match commands::run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
