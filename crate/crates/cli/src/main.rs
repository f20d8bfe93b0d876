//! Command-line pipeline for hybrid MI/SSVEP EEG decoding: synthesize data,
//! train and evaluate the two-stream network, sweep architecture choices,
//! and analyze fusion-layer weights.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, TrainFlags};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Io(String),
    Lib(tscnn::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl<E> From<E> for CliError
where
    E: Into<tscnn::Error>,
{
    fn from(e: E) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    /// 0 success, 2 config error, 3 data error, 4 numerical failure.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Lib(e) => match e.class() {
                tscnn::ErrorClass::Config => 2,
                tscnn::ErrorClass::Data => 3,
                tscnn::ErrorClass::Numerical => 4,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tscnn",
    about = "Hybrid MI/SSVEP EEG decoding with a two-stream convolutional network",
    version
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for everything random.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports and artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic EEG dataset mirroring the acquisition protocol
    /// (per subject: 50 MI trials per class, 25 SSVEP trials per class).
    Synth {
        /// Number of subjects.
        #[arg(long)]
        subjects: Option<usize>,
    },
    /// Train a model: preprocessing, strategy training set, subject split,
    /// optional k-fold CV, checkpoint + history + reports.
    Train {
        /// Dataset file (EEGD format).
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Evaluate a checkpoint on a dataset in MI, SSVEP, and hybrid modes.
    /// With --train-subjects the held-out complement of that split is
    /// evaluated; otherwise the whole dataset is.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Train one model per grid cell and report per-cell CV metrics plus
    /// pairwise t-tests.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        /// Dropout grid, comma-separated (e.g. 0,0.25,0.5).
        #[arg(long, value_delimiter = ',')]
        grid_dropout: Option<Vec<f64>>,
        /// Activation grid, comma-separated (e.g. relu,elu).
        #[arg(long, value_delimiter = ',')]
        grid_activation: Option<Vec<String>>,
        /// Hidden FC width grid, comma-separated (e.g. 0,16).
        #[arg(long, value_delimiter = ',')]
        grid_fc_dim: Option<Vec<usize>>,
        /// Kernel-count grid, semicolon-separated pairs (e.g. "1,1;2,2;8,8").
        #[arg(long)]
        grid_kernels: Option<String>,
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Fusion-layer connection-weight counts per threshold.
    Interpret {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Thresholds, comma-separated (default 0.0025,0.005,0.0075,0.01,0.0125).
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Dump one layer's activations per trial for external embedding tools.
    DumpFeatures {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Layer tag (mi_input, mi_spatial, mi_temporal, ssvep_input,
        /// ssvep_spatial, ssvep_temporal, fusion_fc).
        #[arg(long)]
        layer: String,
        /// Which evaluation samples to run: mi | ssvep | hybrid.
        #[arg(long, default_value = "hybrid")]
        mode: String,
        #[command(flatten)]
        flags: TrainFlags,
    },
    /// Print the designed bandpass filter's coefficients and response table.
    FilterCheck {
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(long, default_value_t = 8.0)]
        low: f64,
        #[arg(long, default_value_t = 30.0)]
        high: f64,
        #[arg(long, default_value_t = 1000.0)]
        fs: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed;
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Synth { subjects } => {
            let mut cfg = config::resolve(&file, seed, out, None)?;
            if let Some(n) = subjects {
                cfg.synth_subjects = *n;
            }
            commands::cmd_synth(&cfg)
        }
        Cmd::Train { data, flags } => {
            let cfg = config::resolve(&file, seed, out, Some(flags))?;
            commands::cmd_train(&cfg, data)
        }
        Cmd::Eval { checkpoint, data, flags } => {
            let cfg = config::resolve(&file, seed, out, Some(flags))?;
            commands::cmd_eval(&cfg, checkpoint, data)
        }
        Cmd::Sweep { data, grid_dropout, grid_activation, grid_fc_dim, grid_kernels, flags } => {
            let cfg = config::resolve(&file, seed, out, Some(flags))?;
            let activation = match grid_activation {
                None => vec![cfg.train.activation],
                Some(names) => names
                    .iter()
                    .map(|s| {
                        tscnn::nn::Activation::parse(s)
                            .ok_or_else(|| CliError::Config(format!("unknown activation '{s}'")))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let kernels = match grid_kernels {
                None => vec![(cfg.train.spatial_kernels, cfg.train.temporal_kernels)],
                Some(text) => text
                    .split(';')
                    .map(|pair| config::parse_kernels(pair).map_err(CliError::Config))
                    .collect::<Result<_, _>>()?,
            };
            let grid = commands::SweepGrid {
                dropout: grid_dropout.clone().unwrap_or_else(|| vec![cfg.train.dropout_rate]),
                activation,
                fc_dim: grid_fc_dim.clone().unwrap_or_else(|| vec![cfg.train.fc_dim]),
                kernels,
            };
            if grid.dropout.is_empty() || grid.fc_dim.is_empty() {
                return Err(CliError::Config("sweep grid is empty".into()));
            }
            commands::cmd_sweep(&cfg, data, &grid)
        }
        Cmd::Interpret { checkpoint, thresholds } => {
            let cfg = config::resolve(&file, seed, out, None)?;
            commands::cmd_interpret(&cfg, checkpoint, thresholds.clone())
        }
        Cmd::DumpFeatures { checkpoint, data, layer, mode, flags } => {
            let cfg = config::resolve(&file, seed, out, Some(flags))?;
            commands::cmd_dump_features(&cfg, checkpoint, data, layer, mode)
        }
        Cmd::FilterCheck { order, low, high, fs } => {
            let cfg = config::resolve(&file, seed, out, None)?;
            commands::cmd_filter_check(&cfg.out, *order, *low, *high, *fs)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TSCNN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
