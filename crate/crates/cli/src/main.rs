//! `trident` — KPI anomaly detection from the command line.
//!
//! Subcommands: `detect` (batch), `stream` (point-by-point over pipes),
//! `eval` (windowed precision/recall/F1), `synth` (labelled synthetic
//! data), and `entropy` (permutation-entropy overlay).

mod commands;
mod config;
mod failure;
mod stream;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{OutputFormat, RunConfig};
use crate::failure::CliResult;

#[derive(Parser)]
#[command(
    name = "trident",
    version,
    about = "Ensemble KPI anomaly detection with extreme-value thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit on a training CSV and detect anomalies over a test CSV.
    Detect {
        #[command(flatten)]
        common: CommonArgs,
        /// Training CSV (may hold several KPIs).
        #[arg(long)]
        train: PathBuf,
        /// Test CSV; KPI ids must match the training file.
        #[arg(long)]
        test: PathBuf,
        /// Detections file to write.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured output format.
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Stream JSON-lines points from stdin or a file, emitting one
    /// detection per line; supports checkpoint and resume.
    Stream {
        #[command(flatten)]
        common: CommonArgs,
        /// Training CSV to fit from (single KPI unless --kpi is given).
        #[arg(long, conflicts_with = "resume")]
        train: Option<PathBuf>,
        /// KPI id to select from the training file.
        #[arg(long)]
        kpi: Option<String>,
        /// Resume from a checkpoint document instead of fitting.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Input stream: a file path, or `-` for stdin (default).
        #[arg(long, default_value = "-")]
        input: String,
        /// Write a checkpoint here at end of stream and on SIGINT.
        #[arg(long)]
        checkpoint_out: Option<PathBuf>,
    },
    /// Score a detections file against labelled ground truth.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Detections file produced by `detect` or `stream` (JSON lines).
        #[arg(long)]
        detections: PathBuf,
        /// Labelled CSV with ground-truth anomalies.
        #[arg(long)]
        labels: PathBuf,
        /// Matching window T in steps (overrides config).
        #[arg(long)]
        t_window: Option<usize>,
        /// Also score each learner's verdicts alone.
        #[arg(long)]
        ablation: bool,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labelled synthetic sine series.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8)]
        periods: usize,
        #[arg(long, default_value_t = 1440)]
        period_len: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_sigma: f64,
        /// Injected anomalies as `index:magnitude,index:magnitude,...`
        #[arg(long, default_value = "")]
        anomalies: String,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also split at this index into train/test files.
        #[arg(long, requires = "train_out", requires = "test_out")]
        split_at: Option<usize>,
        #[arg(long)]
        train_out: Option<PathBuf>,
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Permutation-entropy overlay for a series.
    Entropy {
        #[command(flatten)]
        common: CommonArgs,
        /// Input CSV.
        #[arg(long)]
        input: PathBuf,
        /// KPI id to select when the file holds several.
        #[arg(long)]
        kpi: Option<String>,
        #[arg(long, default_value_t = 60)]
        window: usize,
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Overlay CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Detect {
            common,
            train,
            test,
            out,
            format,
        } => {
            let mut cfg = common.load()?;
            if let Some(f) = format {
                cfg.format = f;
            }
            commands::detect(&cfg, &train, &test, &out)
        }
        Command::Stream {
            common,
            train,
            kpi,
            resume,
            input,
            checkpoint_out,
        } => {
            let cfg = common.load()?;
            stream::stream(
                &cfg,
                train.as_deref(),
                kpi.as_deref(),
                resume.as_deref(),
                &input,
                checkpoint_out.as_deref(),
            )
        }
        Command::Eval {
            common,
            detections,
            labels,
            t_window,
            ablation,
            out,
        } => {
            let mut cfg = common.load()?;
            if let Some(t) = t_window {
                cfg.t_window = t;
            }
            commands::eval(&cfg, &detections, &labels, ablation, out.as_deref())
        }
        Command::Synth {
            common,
            periods,
            period_len,
            noise_sigma,
            anomalies,
            out,
            split_at,
            train_out,
            test_out,
        } => {
            let cfg = common.load()?;
            commands::synth(
                &cfg,
                periods,
                period_len,
                noise_sigma,
                &anomalies,
                &out,
                split_at,
                train_out.as_deref(),
                test_out.as_deref(),
            )
        }
        Command::Entropy {
            common,
            input,
            kpi,
            window,
            order,
            out,
        } => {
            let cfg = common.load()?;
            commands::entropy(&cfg, &input, kpi.as_deref(), window, order, &out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {f}");
            std::process::exit(f.exit_code());
        }
    }
}
