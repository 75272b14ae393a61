//! `termalign`: preprocess → train → align → evaluate → export.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure. Logs are JSON lines on standard error; human
//! summaries go to standard output.

mod commands;
mod config;
mod logging;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::List;
use termalign::alignment::NormalizePolicy;
use termalign::embeddings::Mode;
use termalign::metrics::Metric;

#[derive(Parser, Debug)]
#[command(name = "termalign", version, about = "Align word embedding spaces trained on two unpaired corpora")]
struct Cli {
    /// off, error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split notes into sections and write one tokenized corpus per section group
    Preprocess(PreprocessArgs),
    /// Train skip-gram vectors on a corpus file
    Train(TrainArgs),
    /// Fit a map from the source space onto the target space
    Align(AlignArgs),
    /// Precision@k of an alignment against a gold dictionary
    Evaluate(EvaluateArgs),
    /// Nearest target words of source queries under an alignment
    Retrieve(RetrieveArgs),
    /// 2-D PCA coordinates of labelled terms from the aligned spaces
    ExportPca(ExportPcaArgs),
    /// Write a planted rotation pair with its gold dictionary
    Synth(SynthArgs),
    /// Run the reference profile end to end on a note collection
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Directory of notes (one per file) or a single file of delimited notes
    #[arg(long)]
    input: PathBuf,
    /// Section group, comma separated canonical names; repeat once per output
    #[arg(long, required = true)]
    sections: Vec<String>,
    /// Corpus file for the matching --sections group
    #[arg(long, required = true)]
    output: Vec<PathBuf>,
    /// Line separating notes inside a single input file
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long, overrides_with = "no_stem")]
    stem: bool,
    #[arg(long)]
    no_stem: bool,
    #[arg(long, overrides_with = "no_lowercase")]
    lowercase: bool,
    #[arg(long)]
    no_lowercase: bool,
    /// Stopword list file, or "english" (bundled) or "none"
    #[arg(long)]
    stopwords: Option<String>,
    /// Flat key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Vector file; a .bin extension selects the binary format
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    buckets: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// Source (professional) vector file
    #[arg(long)]
    src: PathBuf,
    /// Target (consumer) vector file
    #[arg(long)]
    tgt: PathBuf,
    /// raw, unit or center-unit
    #[arg(long)]
    normalize: Option<NormalizePolicy>,
    #[arg(long)]
    csls_k: Option<usize>,
    /// Most frequent words per side used for dictionary induction and CSLS
    #[arg(long)]
    vocab_cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    #[command(flatten)]
    spaces: SpaceArgs,
    /// Alignment file (text); a binary copy is written next to it with .bin appended
    #[arg(long)]
    output: PathBuf,
    /// procrustes or adversarial
    #[arg(long)]
    method: Option<commands::Method>,
    /// Procrustes solves including the first (1 = no refinement)
    #[arg(long)]
    refine_iters: Option<usize>,
    /// "auto" for identical strings, or a source<TAB>target file
    #[arg(long)]
    anchors: Option<String>,
    #[arg(long)]
    max_anchors: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    adv_epochs: Option<usize>,
    #[arg(long)]
    adv_steps: Option<usize>,
    #[arg(long)]
    adv_batch: Option<usize>,
    #[arg(long)]
    adv_lr_d: Option<f64>,
    #[arg(long)]
    adv_lr_g: Option<f64>,
    #[arg(long)]
    adv_dis_steps: Option<usize>,
    #[arg(long)]
    adv_smoothing: Option<f64>,
    #[arg(long)]
    adv_beta: Option<f64>,
    #[arg(long)]
    adv_hidden: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    spaces: SpaceArgs,
    /// Alignment file; identity when omitted
    #[arg(long)]
    map: Option<PathBuf>,
    /// source<TAB>target1|target2 file
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    k: Option<List<usize>>,
    #[arg(long)]
    metric: Option<Metric>,
    /// Lowercase and stem gold terms the way corpora are preprocessed
    #[arg(long)]
    normalize_gold: bool,
    /// JSON report path
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RetrieveArgs {
    #[command(flatten)]
    spaces: SpaceArgs,
    #[arg(long)]
    map: Option<PathBuf>,
    /// Comma separated source words
    #[arg(long, required = true)]
    query: Vec<List<String>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    metric: Option<Metric>,
    /// Lowercase and stem queries the way corpora are preprocessed
    #[arg(long)]
    normalize_query: bool,
    /// text, tsv or json
    #[arg(long, default_value = "text")]
    format: commands::TableFormat,
    /// Also write the table as TSV
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportPcaArgs {
    #[command(flatten)]
    spaces: SpaceArgs,
    #[arg(long)]
    map: Option<PathBuf>,
    /// Lines "src|tgt<TAB>word[<TAB>label]"
    #[arg(long)]
    terms: PathBuf,
    /// label<TAB>word<TAB>x<TAB>y output
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    words: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    anchor_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Directory of notes or a single delimited file
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Gold dictionary; evaluation is skipped without one
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the profile's epoch count (e.g. for a quick smoke run)
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = logging::init(&cli.log_level) {
        eprintln!("{msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Train(a) => commands::train(a),
        Command::Align(a) => commands::align(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Retrieve(a) => commands::retrieve(a),
        Command::ExportPca(a) => commands::export_pca(a),
        Command::Synth(a) => commands::synth(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            if log::max_level() < log::LevelFilter::Error {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
