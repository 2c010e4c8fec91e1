//! Command-line front end for the convergence pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convergence_core::pipeline::{self, Overrides, PipelineConfig, PipelineError, Stage};
use convergence_core::synth::{self, ScenarioConfig};
use convergence_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "convergence",
    version,
    about = "Community maps, topics, bridges and convergence over tweet corpora"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Treat malformed tweet lines as fatal.
    #[arg(long)]
    strict: bool,
    /// Overrides `paths.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TopicArgs {
    #[command(flatten)]
    common: Common,
    /// Overrides `lda.k`.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter tweets and follows, then print a summary.
    Ingest(Common),
    /// Monthly map snapshots: clusters_<month>.json and map_<month>.svg.
    Map(Common),
    /// Topic model over the whole window: topics.json and theta.csv.
    Topics(TopicArgs),
    /// Weekly bridging scores: bridging.csv and topic_bridges.csv.
    Bridge(TopicArgs),
    /// Cluster-pair divergence: divergence.csv.
    Converge(TopicArgs),
    /// report.md.
    Report(TopicArgs),
    /// The whole pipeline with every artifact.
    Run(TopicArgs),
    /// Synthetic data generators.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Two communities converging on a shared vocabulary, with a pipeline config.
    Scenario {
        #[arg(long, default_value_t = 12)]
        weeks: usize,
        #[arg(long, default_value_t = 40)]
        community_size: usize,
        /// Constant mixing weight instead of the linear schedule.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stochastic block model follow graph: follows.csv and blocks.json.
    Sbm {
        /// Comma-separated block sizes.
        #[arg(long, value_delimiter = ',', default_value = "30,30,30")]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        p_in: f64,
        #[arg(long, default_value_t = 0.05)]
        p_out: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// LDA corpus with planted topics: corpus.jsonl and planted.json.
    Corpus {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        vocab: usize,
        #[arg(long, default_value_t = 500)]
        docs: usize,
        #[arg(long, default_value_t = 100)]
        doc_len: usize,
        #[arg(long, default_value_t = 0.1)]
        concentration: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Config(Error),
    Stage(PipelineError),
    Synth(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => Stage::Config.exit_code() as u8,
            Failure::Stage(e) => e.stage.exit_code() as u8,
            Failure::Synth(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config: {e}"),
            Failure::Stage(e) => write!(f, "{e}"),
            Failure::Synth(e) => write!(f, "synth: {e}"),
        }
    }
}

fn load(common: &Common, k: Option<usize>) -> Result<PipelineConfig, Failure> {
    let mut config = PipelineConfig::from_file(&common.config).map_err(Failure::Config)?;
    config.apply(&Overrides {
        rng_seed: common.seed,
        strict: common.strict.then_some(true),
        k,
        output_dir: common.out.clone(),
    });
    config.validate().map_err(Failure::Config)?;
    Ok(config)
}

fn run_stages(args: &TopicArgs, stages: &[Stage]) -> Result<(), Failure> {
    let config = load(&args.common, args.k)?;
    let out = pipeline::run_stages(&config, stages).map_err(Failure::Stage)?;
    for path in &out.written {
        println!("{}", path.display());
    }
    Ok(())
}

fn ingest(common: &Common) -> Result<(), Failure> {
    let config = load(common, None)?;
    let a = pipeline::analyze(&config, Stage::Ingest).map_err(Failure::Stage)?;
    let s = &a.ingest;
    println!("tweets parsed:       {}", s.lines_parsed);
    println!("lines skipped:       {}", s.lines_skipped);
    println!("after language:      {}", s.after_language);
    println!("after deduplication: {}", s.after_dedupe);
    println!("in window:           {}", s.in_window);
    println!("follow edges:        {}", s.follow_edges);
    Ok(())
}

fn write(dir: &Path, name: &str, body: String) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    println!("{}", path.display());
    Ok(())
}

fn synth(cmd: &SynthCommand) -> Result<()> {
    match cmd {
        SynthCommand::Scenario {
            weeks,
            community_size,
            lambda,
            seed,
            out,
        } => {
            let config = match lambda {
                Some(l) => ScenarioConfig::constant(*weeks, *community_size, *l, *seed),
                None => ScenarioConfig::linear(*weeks, *community_size, *seed),
            };
            let scenario = synth::gen_convergence_scenario(&config)?;
            scenario.write_to_dir(out)?;
            for name in [
                "tweets.jsonl",
                "follows.csv",
                "ground_truth.json",
                "pipeline.toml",
            ] {
                println!("{}", out.join(name).display());
            }
        }
        SynthCommand::Sbm {
            blocks,
            p_in,
            p_out,
            seed,
            out,
        } => {
            let (edges, partition) = synth::gen_sbm_graph(blocks, *p_in, *p_out, *seed)?;
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            write(
                out,
                "follows.csv",
                convergence_core::netmap::follows_csv(&edges),
            )?;
            write(
                out,
                "blocks.json",
                serde_json::to_string_pretty(&partition).expect("serializable") + "\n",
            )?;
        }
        SynthCommand::Corpus {
            k,
            vocab,
            docs,
            doc_len,
            concentration,
            seed,
            out,
        } => {
            let (documents, planted) =
                synth::gen_lda_corpus(*k, *vocab, *docs, *doc_len, *concentration, *seed)?;
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            let lines: String = documents
                .iter()
                .map(|d| {
                    serde_json::json!({ "doc": d.account_id, "terms": d.term_counts }).to_string()
                        + "\n"
                })
                .collect();
            write(out, "corpus.jsonl", lines)?;
            write(
                out,
                "planted.json",
                serde_json::to_string_pretty(&planted).expect("serializable") + "\n",
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Ingest(c) => ingest(c),
        Command::Map(c) => run_stages(
            &TopicArgs {
                common: c.clone(),
                k: None,
            },
            &[Stage::Map],
        ),
        Command::Topics(a) => run_stages(a, &[Stage::Topics]),
        Command::Bridge(a) => run_stages(a, &[Stage::Bridge]),
        Command::Converge(a) => run_stages(a, &[Stage::Converge]),
        Command::Report(a) => run_stages(a, &[Stage::Report]),
        Command::Run(a) => run_stages(
            a,
            &[
                Stage::Map,
                Stage::Topics,
                Stage::Bridge,
                Stage::Converge,
                Stage::Report,
            ],
        ),
        Command::Synth(s) => synth(s).map_err(Failure::Synth),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
