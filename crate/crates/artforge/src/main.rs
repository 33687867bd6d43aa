use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use artforge::commands::{self, CliError};
use artforge::PipelineConfig;
use clap::{Args, Parser, Subcommand};

/// Address-Ring-Transaction graph pipeline: synthesize a ledger, label it,
/// extract per-transaction features, train and apply a random forest.
#[derive(Parser)]
#[command(name = "artforge", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Each flag overrides the config key of the same name.
#[derive(Args)]
struct Overrides {
    /// JSON pipeline config; every key is optional except `version`
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every stage seed is derived from it
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for feature extraction and forest training (0 = auto)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,
    #[arg(long, global = true)]
    positives: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    features: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long = "n-hops", global = true)]
    n_hops: Option<u32>,
    #[arg(long = "train-fraction", global = true)]
    train_fraction: Option<f64>,
    #[arg(long = "smote-k", global = true)]
    smote_k: Option<usize>,
    #[arg(long = "n-trees", global = true)]
    n_trees: Option<usize>,
    /// Number of negatives to sample
    #[arg(long, global = true)]
    count: Option<usize>,
    #[arg(long = "window-start", global = true)]
    window_start: Option<u64>,
    #[arg(long = "window-end", global = true)]
    window_end: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a chain with the planted pattern: snapshot, truth, positive labels
    Synth,
    /// Add uniformly sampled label-0 transactions to the positives
    SampleNegatives,
    /// Extract one feature row per labeled transaction
    Features,
    /// Train the forest and report held-out metrics
    Train,
    /// Score transactions with a trained model
    Classify {
        /// Transaction ids to score
        ids: Vec<String>,
        /// Also read ids, one per line, from this file ("-" for stdin)
        #[arg(long = "ids-file")]
        ids_file: Option<PathBuf>,
    },
    /// Print the edge-list export of one transaction's ART-graph
    Graph { tx_id: String },
}

impl Overrides {
    fn apply(self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($flag:ident => $($key:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($key).+ = v; })*
            };
        }
        macro_rules! set_some {
            ($($flag:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$flag = Some(v); })*
            };
        }
        set!(seed => seed, out => out, workers => workers, n_hops => n_hops,
             train_fraction => train_fraction, smote_k => smote_k,
             n_trees => forest.n_trees, count => negatives.count);
        set_some!(snapshot, positives, labels, features, model);
        if self.window_start.is_some() {
            cfg.negatives.window_start = self.window_start;
        }
        if self.window_end.is_some() {
            cfg.negatives.window_end = self.window_end;
        }
    }
}

fn read_ids(path: &PathBuf, ids: &mut Vec<String>) -> Result<(), CliError> {
    let err = |source| CliError::Io { path: path.clone(), source };
    let reader: Box<dyn BufRead> = if path.as_os_str() == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(io::BufReader::new(std::fs::File::open(path).map_err(err)?))
    };
    for line in reader.lines() {
        let line = line.map_err(|source| CliError::Io { path: path.clone(), source })?;
        let id = line.trim();
        if !id.is_empty() {
            ids.push(id.to_string());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut cfg = commands::load_config(cli.overrides.config.as_deref())?;
    cli.overrides.apply(&mut cfg);
    let stdout = io::stdout();
    match cli.command {
        Command::Synth => commands::cmd_synth(&cfg),
        Command::SampleNegatives => commands::cmd_sample_negatives(&cfg),
        Command::Features => commands::cmd_features(&cfg),
        Command::Train => commands::cmd_train(&cfg),
        Command::Classify { mut ids, ids_file } => {
            if let Some(p) = ids_file {
                read_ids(&p, &mut ids)?;
            }
            commands::cmd_classify(&cfg, &ids, stdout.lock())
        }
        Command::Graph { tx_id } => commands::cmd_graph(&cfg, &tx_id, stdout.lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Scoring output owns stdout, so summaries go to stderr for those commands.
    let to_stderr = matches!(cli.command, Command::Classify { .. } | Command::Graph { .. });
    match run(cli) {
        Ok(summary) => {
            if to_stderr {
                eprintln!("{summary}");
            } else {
                println!("{summary}");
            }
            io::stdout().flush().ok();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("artforge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
