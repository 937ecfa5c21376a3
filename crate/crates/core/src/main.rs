use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use claimwise::evaluation;
use claimwise::pipeline::{self, Pipeline, PipelineConfig, PipelineError, Stage};

#[derive(Parser)]
#[command(name = "claimwise", version, about = "Explainable claim verification pipeline")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Summarization backend id.
    #[arg(long, global = true)]
    summarizer: Option<String>,
    /// Text-to-text classification backend id.
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// NLI backend id.
    #[arg(long, global = true)]
    nli: Option<String>,
    /// Use only the first N corpus records.
    #[arg(long, global = true)]
    limit: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, label-map and clean the corpus; print statistics.
    Ingest,
    /// Print statistics of the cleaned corpus.
    Stats,
    /// Partition the cleaned corpus into train, validation and test.
    Split,
    /// Summarize evidence into rationales.
    Rationales,
    /// Fine-tune the verdict classifier.
    Train,
    /// Predict verdicts for every split.
    Predict,
    /// Assemble natural-language explanations.
    Nle,
    /// Shapley attributions of evidence features on the test split.
    Explain,
    /// Macro-F1 per split.
    EvalF1,
    /// NLI audit of the test explanations.
    EvalNli,
    /// Export a seeded sample of explanations for manual rating.
    AnnotateExport {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Aggregate filled-in annotation files.
    AnnotateAggregate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write the combined report, optionally folding in annotation files.
    Report {
        #[arg(long = "annotations")]
        annotations: Vec<PathBuf>,
    },
    /// Run one stage, or ingest plus every stage when none is given.
    Run {
        #[arg(long)]
        stage: Option<Stage>,
    },
}

fn load_pipeline(g: &GlobalArgs) -> Result<Pipeline, PipelineError> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| PipelineError::Config("--config is required for this command".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.split.seed = seed;
        cfg.train.seed = seed;
        cfg.explain.seed = seed;
        cfg.annotation.seed = seed;
    }
    if let Some(s) = &g.summarizer {
        cfg.backends.summarizer = s.clone();
    }
    if let Some(s) = &g.classifier {
        cfg.backends.classifier = s.clone();
    }
    if let Some(s) = &g.nli {
        cfg.backends.nli = s.clone();
    }
    if g.limit.is_some() {
        cfg.limit = g.limit;
    }
    Pipeline::new(cfg)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if let Command::AnnotateAggregate { files } = &cli.command {
        let summary = evaluation::aggregate_annotations(files)?;
        print!("{}", pipeline::render_annotation_summary(&summary));
        return Ok(());
    }
    let p = load_pipeline(&cli.global)?;
    match cli.command {
        Command::Ingest => print!("{}", p.ingest()?.0.message),
        Command::Stats => {
            let s = p.stats()?;
            println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
        }
        Command::Split => println!("{}", p.split()?.message),
        Command::Rationales => println!("{}", p.rationales()?.message),
        Command::Train => println!("{}", p.train()?.message),
        Command::Predict => println!("{}", p.predict()?.message),
        Command::Nle => println!("{}", p.nle()?.message),
        Command::Explain => println!("{}", p.explain()?.message),
        Command::EvalF1 => {
            for (split, f1) in p.eval_f1()? {
                println!("macro-F1 {split:<10} {f1:.4}");
            }
        }
        Command::EvalNli => {
            let (report, _) = p.eval_nli()?;
            let wrapped = evaluation::EvalReport { macro_f1: Default::default(), nli: Some(report), annotations: None };
            print!("{}", pipeline::render_eval_report(&wrapped));
        }
        Command::AnnotateExport { n, out } => {
            let a = &p.config().annotation;
            println!("{}", p.annotate_export(n.unwrap_or(a.n), a.seed, out.as_deref())?.message);
        }
        Command::Report { annotations } => print!("{}", pipeline::render_eval_report(&p.report(&annotations)?)),
        Command::Run { stage: Some(stage) } => println!("{}", p.run_stage(stage)?.message.trim_end()),
        Command::Run { stage: None } => {
            for o in p.run_all()? {
                println!("[{}] {}", o.stage, o.message.trim_end());
            }
        }
        Command::AnnotateAggregate { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
