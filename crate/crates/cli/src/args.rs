use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "misinfo",
    version,
    about = "Tweet misinformation corpus, annotation and classification toolkit"
)]
pub struct Cli {
    /// Seed for every random choice (overrides the config file's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file, or output directory for verbs that write several files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw corpus operations.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Labeled dataset operations.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Annotation service.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Train one classifier from the config and save it to --out.
    Train(TrainArgs),
    /// Run experiments described by the config.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Paired t-test between two score files.
    Compare(CompareArgs),
    /// Leaderboard over saved evaluation runs.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Keep (or drop) tweets containing any of the phrases.
    Filter(FilterArgs),
    /// Uniform sample without replacement.
    Sample(SampleArgs),
    /// Most frequent n-grams.
    Ngrams(NgramArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Include,
    Exclude,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Corpus file (JSON lines).
    #[arg(long)]
    pub input: PathBuf,
    /// Keyword or phrase; repeat for several.
    #[arg(long = "keyword", required_unless_present = "exclude_malay")]
    pub keywords: Vec<String>,
    #[arg(long, value_enum, default_value = "include")]
    pub mode: Mode,
    /// Also drop tweets matching the Malaysian-context phrases.
    #[arg(long)]
    pub exclude_malay: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct NgramArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Stratified train/val/test split into --out (a directory).
    Split(SplitArgs),
    /// Label distribution of a gold-label file.
    Stats(StatsArgs),
    /// Cohen's kappa between two annotators from exported annotation records.
    Kappa(KappaArgs),
    /// Join gold labels with the corpus into the final labeled dataset.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Labeled dataset (tweet_id,text,label CSV).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "0.6,0.2,0.2")]
    pub ratios: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Gold labels (tweet_id,label CSV).
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// Annotation records, one JSON object per line.
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub phase: String,
    /// Two annotator ids separated by a comma.
    #[arg(long)]
    pub annotators: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// Corpus file (JSON lines) holding the tweet texts.
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnnotateCommand {
    /// Start the HTTP annotation service and block until Ctrl-C.
    Serve(ServeArgs),
    /// Export stored annotations or gold labels from the log without serving.
    Export(AnnotateExportArgs),
}

#[derive(Debug, Args)]
pub struct StoreArgs {
    /// Tweets to annotate (JSON lines), served in file order.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Append-only annotation log.
    #[arg(long)]
    pub log: PathBuf,
    /// Registered annotator ids, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub annotators: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct AnnotateExportArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    /// Phase to export; omit together with --gold.
    #[arg(long, required_unless_present = "gold")]
    pub phase: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: RecordFormat,
    #[arg(long)]
    pub annotator: Option<String>,
    /// Export adjudicated gold labels instead of raw records.
    #[arg(long, conflicts_with = "phase")]
    pub gold: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Which `[[classifier]]` entry of the config to train.
    #[arg(long, default_value_t = 0)]
    pub classifier: usize,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Each configured classifier as a single 3-class model.
    Single,
    /// The two configured classifiers as a relevance -> misinformation cascade.
    TwoStage,
    /// Stratified k-fold F1 scores for each configured classifier.
    Kfold,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two score files written by `eval kfold`.
    #[arg(long, num_args = 2, required = true)]
    pub scores: Vec<PathBuf>,
    /// Welch's unpaired test instead of the paired test.
    #[arg(long)]
    pub unpaired: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run files written by `eval single` or `eval two-stage`.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
}
