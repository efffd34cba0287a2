use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use smerc::eval::{default_delta_grid, evaluate, sweep_run, write_sweep, EventGroundTruth};
use smerc::gaps::{write_density, write_gap_curve};
use smerc::report::{dump_affinity, ensure_dir, write_json};
use smerc::{
    analyze_gaps, generate_synthetic, load_corpus, write_corpus, write_report, Bandwidth, Corpus,
    Error, Manifest, Pipeline, Preference, RunConfig, SyntheticSpec,
};

#[derive(Parser)]
#[command(
    name = "smerc",
    version,
    about = "Cluster timestamped short messages into events"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a corpus and write the cluster table and run summary.
    Cluster(Input),
    /// Fit the relatedness decay of a labeled corpus.
    AnalyzeGaps(Input),
    /// Cluster a labeled corpus and score it against the labels.
    Evaluate {
        #[command(flatten)]
        input: Input,
        /// Comma-separated cohesion thresholds for the sweep table.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Write a seeded synthetic corpus with planted events.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Input {
    /// JSON Lines corpus.
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// key=value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "tp")]
    t_p: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    no_decay: bool,
    /// A number or `median`.
    #[arg(long)]
    preference: Option<Preference>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long = "max-iter")]
    max_iterations: Option<usize>,
    #[arg(long = "stable-iter")]
    stable_iterations: Option<usize>,
    /// Cluster each window of this many seconds separately.
    #[arg(long = "window")]
    window_seconds: Option<u64>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    #[arg(long = "spam-threshold")]
    spam_duplicate_threshold: Option<usize>,
    #[arg(long)]
    bucket_width: Option<f64>,
    #[arg(long)]
    max_gap: Option<f64>,
    #[arg(long = "min-pairs")]
    min_pairs_per_bucket: Option<usize>,
    /// `scott` or a bandwidth in seconds.
    #[arg(long = "bandwidth")]
    kde_bandwidth: Option<Bandwidth>,
    #[arg(long)]
    purity_floor: Option<f64>,
    #[arg(long = "seed")]
    rng_seed: Option<u64>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    dump_affinity: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        apply!(
            t_p,
            delta,
            preference,
            damping,
            max_iterations,
            stable_iterations,
            min_cluster_size,
            spam_duplicate_threshold,
            bucket_width,
            max_gap,
            min_pairs_per_bucket,
            kde_bandwidth,
            purity_floor,
            rng_seed
        );
        if self.no_decay {
            cfg.no_decay = true;
        }
        if self.window_seconds.is_some() {
            cfg.window_seconds = self.window_seconds;
        }
        if self.stopwords.is_some() {
            cfg.stopwords = self.stopwords.clone();
        }
        if self.dump_affinity.is_some() {
            cfg.dump_affinity = self.dump_affinity.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    events: usize,
    #[arg(long, default_value_t = 100)]
    tweets_per_event: usize,
    /// Fraction of each event's words shared by all events.
    #[arg(long, default_value_t = 0.0)]
    overlap: f64,
    /// Seconds between consecutive events.
    #[arg(long, default_value_t = 3600)]
    spacing: u64,
    /// Background tweets per second.
    #[arg(long, default_value_t = 0.0)]
    background_rate: f64,
    /// Response rate per second.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// Seconds before the first event and after the last.
    #[arg(long, default_value_t = 600)]
    margin: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    pool_size: usize,
    #[arg(long, default_value_t = 5)]
    min_words: usize,
    #[arg(long, default_value_t = 12)]
    max_words: usize,
}

struct Failure {
    stage: &'static str,
    error: Error,
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for Result<T, Error> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

fn load(path: &Path) -> Result<Corpus, Failure> {
    let corpus = load_corpus(path).stage("load")?;
    eprintln!("loaded {} tweets from {}", corpus.len(), path.display());
    Ok(corpus)
}

fn cluster(input: &Input) -> Result<PathBuf, Failure> {
    let cfg = input.run.resolve().stage("config")?;
    let corpus = load(&input.input)?;
    let pipeline = Pipeline::new(cfg).stage("config")?;
    let run = pipeline.run(&corpus).stage("cluster")?;
    eprintln!(
        "{} windows, {} clusters, {} kept",
        run.windows.len(),
        run.clusters_before(),
        run.clusters.len()
    );
    let mut manifest = write_report(&run, &corpus, &input.out).stage("report")?;
    if let Some(path) = &run.config.dump_affinity {
        manifest
            .files
            .extend(dump_affinity(&run, path).stage("dump-affinity")?);
    }
    manifest.write(&input.out).stage("report")
}

fn gaps(input: &Input) -> Result<PathBuf, Failure> {
    let cfg = input.run.resolve().stage("config")?;
    let corpus = load(&input.input)?;
    let analysis = analyze_gaps(&corpus, &cfg).stage("gap analysis")?;
    let out = &input.out;
    ensure_dir(out).stage("report")?;
    let mut manifest = Manifest::default();

    let path = out.join("gap_curve.csv");
    write_gap_curve(&analysis.curve, &path).stage("report")?;
    manifest.push(path);

    let path = out.join("density.csv");
    write_density(
        analysis.related_density.as_ref().ok(),
        analysis.unrelated_density.as_ref().ok(),
        cfg.max_gap,
        &path,
    )
    .stage("report")?;
    manifest.push(path);

    let fit = &analysis.fit;
    let warning = match analysis.recommended_t_p {
        Some(t_p) => {
            eprintln!("recommended T_p = {t_p:.3} s (slope {:.6})", fit.slope);
            None
        }
        None => {
            let msg = Error::NoDecay { slope: fit.slope }.to_string();
            eprintln!("warning: {msg}");
            Some(msg)
        }
    };
    for (name, d) in [
        ("related", &analysis.related_density),
        ("unrelated", &analysis.unrelated_density),
    ] {
        if let Err(e) = d {
            eprintln!("warning: no {name} density: {e}");
        }
    }
    let s = &analysis.sample;
    let value = json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "buckets_used": fit.buckets_used,
        "zero_probability_buckets": fit.zero_probability_buckets,
        "recommended_t_p": analysis.recommended_t_p,
        "warning": warning,
        "related_pairs": s.related_gaps.len(),
        "unrelated_pairs": s.unrelated_gaps.len(),
        "excluded_unlabeled": s.excluded_unlabeled,
        "excluded_cross_event": s.excluded_cross_event,
        "beyond_max_gap": s.beyond_max_gap,
        "related_bandwidth": analysis.related_density.as_ref().ok().map(|d| d.bandwidth),
        "unrelated_bandwidth": analysis.unrelated_density.as_ref().ok().map(|d| d.bandwidth),
        "config": cfg,
    });
    let path = out.join("fit.json");
    write_json(&path, &value).stage("report")?;
    manifest.push(path);
    manifest.write(out).stage("report")
}

fn evaluate_cmd(input: &Input, deltas: Option<&[f64]>) -> Result<PathBuf, Failure> {
    let cfg = input.run.resolve().stage("config")?;
    let corpus = load(&input.input)?;
    let truth = EventGroundTruth::from_corpus(&corpus);
    if truth.is_empty() {
        return Err(Error::NoLabels).stage("evaluate");
    }
    let deltas = deltas
        .map(<[f64]>::to_vec)
        .unwrap_or_else(default_delta_grid);
    if let Some(d) = deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::Config {
            field: "deltas".into(),
            message: format!("{d} outside [0, 1]"),
        })
        .stage("config");
    }
    let run = Pipeline::new(cfg)
        .stage("config")?
        .run(&corpus)
        .stage("cluster")?;
    let mut manifest = write_report(&run, &corpus, &input.out).stage("report")?;
    let result = evaluate(&run, &corpus).stage("evaluate")?;
    eprintln!(
        "precision {:.3}, recall {:.3}, F1 {:.3}",
        result.precision, result.recall, result.f1
    );

    let path = input.out.join("eval.json");
    write_json(
        &path,
        &json!({ "result": result, "events": truth.len(), "config": run.config }),
    )
    .stage("report")?;
    manifest.push(path);

    let path = input.out.join("sweep.csv");
    write_sweep(&sweep_run(&run, &truth, &deltas), &path).stage("report")?;
    manifest.push(path);
    manifest.write(&input.out).stage("report")
}

fn synth(args: &SynthArgs) -> Result<PathBuf, Failure> {
    let spec = SyntheticSpec {
        events: args.events,
        tweets_per_event: args.tweets_per_event,
        overlap: args.overlap,
        spacing: args.spacing,
        background_rate: args.background_rate,
        lambda: args.lambda,
        margin: args.margin,
        seed: args.seed,
        pool_size: args.pool_size,
        min_words: args.min_words,
        max_words: args.max_words,
    };
    let corpus = generate_synthetic(&spec).stage("synth")?;
    ensure_dir(&args.out).stage("report")?;
    let path = args.out.join("corpus.jsonl");
    write_corpus(&corpus, &path).stage("report")?;
    eprintln!("wrote {} tweets", corpus.len());
    let mut manifest = Manifest::default();
    manifest.push(path);
    manifest.write(&args.out).stage("report")
}

fn run(cli: Cli) -> Result<PathBuf, Failure> {
    match &cli.command {
        Command::Cluster(input) => cluster(input),
        Command::AnalyzeGaps(input) => gaps(input),
        Command::Evaluate { input, deltas } => evaluate_cmd(input, deltas.as_deref()),
        Command::Synth(args) => synth(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(manifest)) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Ok(Err(f)) => {
            eprintln!("error: {}: {}", f.stage, f.error);
            ExitCode::from(if f.error.is_input_error() { 1 } else { 2 })
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(2)
        }
    }
}
