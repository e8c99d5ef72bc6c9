//! `langqual`: corpus language-quality reports from a manifest.

mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use langqual::{Format, StemMode, Tier};

use run::{CorpusArgs, Globals, MatrixArgs, UsageError};

#[derive(Parser)]
#[command(name = "langqual", version, about = "Language-quality metrics for text corpora")]
struct Cli {
    /// TOML manifest describing the corpora and run settings.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory (overrides the manifest).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Split seed (overrides the manifest).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output formats, comma separated: markdown, csv, json.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Raw,
    Tagged,
    Parsed,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Raw => Tier::Raw,
            TierArg::Tagged => Tier::Tagged,
            TierArg::Parsed => Tier::Parsed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StemArg {
    None,
    PluralS,
}

#[derive(clap::Args)]
struct CorpusFlags {
    #[arg(long, value_enum, default_value = "raw")]
    tier: TierArg,
    /// Keep the original casing.
    #[arg(long)]
    no_lowercase: bool,
    /// Drop punctuation-only tokens.
    #[arg(long)]
    strip_punct: bool,
}

impl From<&CorpusFlags> for CorpusArgs {
    fn from(f: &CorpusFlags) -> CorpusArgs {
        CorpusArgs {
            tier: f.tier.into(),
            lowercase: !f.no_lowercase,
            strip_punct: f.strip_punct,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Per-corpus summary statistics for every manifest corpus.
    Analyze {
        /// Timestamp recorded in the reports; omitted by default so reruns
        /// are byte-identical.
        #[arg(long)]
        generated_at: Option<String>,
    },
    /// Cross-corpus perplexity matrix (rows test, columns train).
    PplMatrix {
        /// N-gram order (overrides the manifest).
        #[arg(long)]
        order: Option<usize>,
        /// Vocabulary frequency cutoff (overrides the manifest).
        #[arg(long)]
        cutoff: Option<u64>,
        /// Test sentences sampled per corpus (overrides the manifest).
        #[arg(long)]
        test_size: Option<usize>,
        /// Most trained models held in memory at once.
        #[arg(long)]
        max_resident: Option<usize>,
    },
    /// N/V/J/O distributions of the tagged and parsed corpora.
    PosDist,
    /// Object-mention statistics for dense annotations and captions.
    Bias {
        /// JSON-lines object annotations, one image per line.
        #[arg(long)]
        annotations: PathBuf,
        /// JSON-lines captions keyed by image id.
        #[arg(long)]
        captions: PathBuf,
        /// Label matching: exact, or also accept a trailing plural s.
        #[arg(long, value_enum, default_value = "none")]
        stem: StemArg,
    },
    /// Train an n-gram model and write it as a plain-text table.
    TrainLm {
        /// Training corpus.
        corpus: PathBuf,
        #[command(flatten)]
        flags: CorpusFlags,
        /// N-gram order.
        #[arg(long, default_value_t = 5)]
        order: usize,
        /// Minimum training frequency for a word to enter the vocabulary.
        #[arg(long, default_value_t = 3)]
        cutoff: u64,
        /// Where to write the model.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Perplexity of corpora under a saved model.
    Ppl {
        /// A model written by train-lm.
        #[arg(long)]
        model: PathBuf,
        /// Corpora to score.
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[command(flatten)]
        flags: CorpusFlags,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let globals = Globals {
        manifest: cli.manifest,
        out_dir: cli.out_dir,
        seed: cli.seed,
        formats: cli.format,
    };
    match &cli.command {
        Command::Analyze { generated_at } => run::analyze(&globals, generated_at.clone()),
        Command::PplMatrix {
            order,
            cutoff,
            test_size,
            max_resident,
        } => run::ppl_matrix(
            &globals,
            &MatrixArgs {
                order: *order,
                cutoff: *cutoff,
                test_size: *test_size,
                max_resident: *max_resident,
            },
        ),
        Command::PosDist => run::pos_dist(&globals),
        Command::Bias {
            annotations,
            captions,
            stem,
        } => {
            let stem = match stem {
                StemArg::None => StemMode::None,
                StemArg::PluralS => StemMode::PluralS,
            };
            run::bias(&globals, annotations, captions, stem)
        }
        Command::TrainLm {
            corpus,
            flags,
            order,
            cutoff,
            output,
        } => run::train_lm(corpus, &flags.into(), *order, *cutoff, output),
        Command::Ppl { model, corpora, flags } => run::ppl(model, corpora, &flags.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(run::EXIT_DATA)
            }
        }
    }
}
