use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use polarnet_cli::{run_pipeline, run_stage, PipelineConfig, Stage, StageError};

#[derive(Parser)]
#[command(name = "polarnet", version, about = "Stance classification and polarization metrics for tweet corpora")]
struct Cli {
    /// TOML config file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and canonicalize the corpus.
    Ingest,
    /// Build the hashtag co-occurrence graph.
    Hashtags,
    /// Propagate seed labels over the hashtag graph.
    Propagate,
    /// Classify users by stance.
    Classify,
    /// Build and export the communication networks.
    Networks,
    /// Echo-chamberness and influential accounts per group.
    Metrics,
    /// Word frequencies and topic models per group.
    Text,
    /// Bot-score sweep and news-source concentration.
    Annotations,
    /// Write the bundle manifest.
    Report,
    /// Run every stage.
    Run,
    /// Check the config and exit.
    Validate,
    /// Print the effective config as TOML.
    ShowConfig,
}

/// Flags that override config file values.
#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    /// Skip malformed corpus lines.
    #[arg(long, global = true)]
    lenient: bool,
    #[arg(long, global = true)]
    min_cooccurrence: Option<u64>,
    #[arg(long, global = true)]
    gamma: Option<u64>,
    #[arg(long, global = true)]
    max_passes: Option<u64>,
    /// Weight each distinct hashtag once per user.
    #[arg(long, global = true)]
    presence_weighting: bool,
    /// Ignore hashtags carried by retweets when classifying.
    #[arg(long, global = true)]
    exclude_retweet_hashtags: bool,
    /// Drop mention edges carried by retweets.
    #[arg(long, global = true)]
    exclude_retweet_mentions: bool,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true)]
    topics: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Keep hashtags as tokens in text reports.
    #[arg(long, global = true)]
    text_hashtags: bool,
    #[arg(long, global = true)]
    bot_scores: Option<PathBuf>,
    #[arg(long, global = true)]
    account_types: Option<PathBuf>,
    /// Sweep bot thresholds over all authors instead of per group.
    #[arg(long, global = true)]
    global_sweep: bool,
}

impl Overrides {
    fn apply(self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(corpus => corpus_path, seeds => seed_file, output_dir => output_dir,
             min_cooccurrence => min_cooccurrence, gamma => gamma, top_k => top_k, topics => topics,
             beta => beta, iterations => iterations, seed => rng_seed);
        if self.max_passes.is_some() {
            cfg.max_passes = self.max_passes;
        }
        if self.alpha.is_some() {
            cfg.alpha = self.alpha;
        }
        if self.stopwords.is_some() {
            cfg.stopword_file = self.stopwords;
        }
        if self.bot_scores.is_some() {
            cfg.bot_scores = self.bot_scores;
        }
        if self.account_types.is_some() {
            cfg.account_types = self.account_types;
        }
        cfg.lenient |= self.lenient;
        cfg.presence_weighting |= self.presence_weighting;
        cfg.include_retweet_hashtags &= !self.exclude_retweet_hashtags;
        cfg.mentions_in_retweets &= !self.exclude_retweet_mentions;
        cfg.text_hashtags |= self.text_hashtags;
        cfg.global_sweep |= self.global_sweep;
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.absolutize()?;
    let stage = match cli.command {
        Command::Run => return run_pipeline(&cfg),
        Command::Validate => return cfg.validate(),
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        Command::Ingest => Stage::Ingest,
        Command::Hashtags => Stage::Hashtags,
        Command::Propagate => Stage::Propagate,
        Command::Classify => Stage::Classify,
        Command::Networks => Stage::Networks,
        Command::Metrics => Stage::Metrics,
        Command::Text => Stage::Text,
        Command::Annotations => Stage::Annotations,
        Command::Report => Stage::Report,
    };
    run_stage(&cfg, stage)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<StageError>() {
                Some(se) => eprintln!("error: {se}"),
                None => eprintln!("error: [config] {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
