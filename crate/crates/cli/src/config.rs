//! Run configuration: TOML file plus command-line overrides (flags win).
//!
//! Schema (all keys optional):
//!
//! ```toml
//! seed = 7
//! out = "out"
//!
//! [synth]
//! subjects = 8
//! fs_hz = 250.0
//! duration_s = 4.0
//! ssvep_freq_left = 8.57
//! ssvep_freq_right = 6.67
//! ssvep_amplitude = 4.0
//! erd_depth = 0.5
//! noise_scale = 1.0
//!
//! [preprocess]
//! filter_mi = true        # 8-30 Hz zero-phase bandpass on the MI stream
//! filter_ssvep = false    # same filter on the SSVEP stream
//! eval_zero_streams = false  # zero the absent stream in single-mode eval
//!
//! [train]
//! strategy = "tscnn2"     # tscnn1 | tscnn2 | scnn-mi | scnn-ssvep
//! lr = 0.00025
//! batch_size = 64
//! dropout = 0.5
//! init_std = 0.1
//! epochs = 200
//! patience = 40
//! kernels = [1, 1]
//! fc_dim = 16
//! activation = "relu"     # relu | elu | softplus | leakyrelu
//! conv_bias = true
//! train_subjects = 40
//! folds = 0               # 0 = single split, k >= 2 = k-fold CV
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tscnn::data::SynthConfig;
use tscnn::nn::Activation;
use tscnn::train::{Strategy, TrainConfig};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub subjects: Option<usize>,
    pub fs_hz: Option<f64>,
    pub duration_s: Option<f64>,
    pub ssvep_freq_left: Option<f64>,
    pub ssvep_freq_right: Option<f64>,
    pub ssvep_amplitude: Option<f64>,
    pub erd_depth: Option<f64>,
    pub noise_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    pub filter_mi: Option<bool>,
    pub filter_ssvep: Option<bool>,
    pub eval_zero_streams: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub strategy: Option<String>,
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub dropout: Option<f64>,
    pub init_std: Option<f64>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub kernels: Option<[usize; 2]>,
    pub fc_dim: Option<usize>,
    pub activation: Option<String>,
    pub conv_bias: Option<bool>,
    pub train_subjects: Option<usize>,
    pub folds: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// Shared flag overrides for training-style commands.
#[derive(Debug, Clone, clap::Args)]
pub struct TrainFlags {
    /// Training strategy: tscnn1 | tscnn2 | scnn-mi | scnn-ssvep.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Maximum training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Early-stopping patience in epochs.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Dropout rate in [0, 1).
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Weight-init standard deviation.
    #[arg(long)]
    pub init_std: Option<f64>,
    /// Convolution kernel counts as I,J.
    #[arg(long, value_parser = parse_kernels)]
    pub kernels: Option<(usize, usize)>,
    /// Hidden FC width; 0 removes the hidden layer.
    #[arg(long)]
    pub fc_dim: Option<usize>,
    /// Activation: relu | elu | softplus | leakyrelu.
    #[arg(long)]
    pub activation: Option<String>,
    /// Disable convolution bias terms.
    #[arg(long)]
    pub no_conv_bias: bool,
    /// Number of subjects assigned to the training split.
    #[arg(long)]
    pub train_subjects: Option<usize>,
    /// Cross-validation folds (0 = single split).
    #[arg(long)]
    pub folds: Option<usize>,
    /// Apply the 8-30 Hz bandpass to the SSVEP stream: on | off.
    #[arg(long, value_parser = parse_on_off)]
    pub filter_ssvep: Option<bool>,
    /// Apply the 8-30 Hz bandpass to the MI stream: on | off.
    #[arg(long, value_parser = parse_on_off)]
    pub filter_mi: Option<bool>,
    /// Replace the absent stream with zeros in single-mode evaluation.
    #[arg(long)]
    pub eval_zero_streams: bool,
}

pub fn parse_kernels(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected I,J (e.g. 1,1), got '{s}'"));
    }
    let i = parts[0].trim().parse().map_err(|_| format!("bad kernel count '{}'", parts[0]))?;
    let j = parts[1].trim().parse().map_err(|_| format!("bad kernel count '{}'", parts[1]))?;
    Ok((i, j))
}

pub fn parse_on_off(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on|off, got '{s}'")),
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub out: PathBuf,
    pub synth_subjects: usize,
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub train_subjects: usize,
    /// `train_subjects` before the default of 40 is applied; commands that
    /// only want a holdout when one was configured check this.
    pub train_subjects_explicit: Option<usize>,
    pub folds: usize,
    pub filter_mi: bool,
    pub filter_ssvep: bool,
    pub eval_zero_streams: bool,
}

pub fn resolve(
    file: &FileConfig,
    seed_flag: Option<u64>,
    out_flag: Option<&Path>,
    flags: Option<&TrainFlags>,
) -> Result<Resolved, CliError> {
    let seed = seed_flag.or(file.seed).unwrap_or(0);
    let out = out_flag
        .map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let base_synth = SynthConfig::default();
    let synth = SynthConfig {
        fs_hz: file.synth.fs_hz.unwrap_or(base_synth.fs_hz),
        duration_s: file.synth.duration_s.unwrap_or(base_synth.duration_s),
        ssvep_freq_left: file.synth.ssvep_freq_left.unwrap_or(base_synth.ssvep_freq_left),
        ssvep_freq_right: file.synth.ssvep_freq_right.unwrap_or(base_synth.ssvep_freq_right),
        ssvep_amplitude: file.synth.ssvep_amplitude.unwrap_or(base_synth.ssvep_amplitude),
        erd_depth: file.synth.erd_depth.unwrap_or(base_synth.erd_depth),
        noise_scale: file.synth.noise_scale.unwrap_or(base_synth.noise_scale),
        seed,
    };

    let defaults = TrainConfig::default();
    let strategy_name = flags
        .and_then(|f| f.strategy.clone())
        .or_else(|| file.train.strategy.clone());
    let strategy = match &strategy_name {
        None => defaults.strategy,
        Some(s) => Strategy::parse(s)
            .ok_or_else(|| CliError::Config(format!("unknown strategy '{s}'")))?,
    };
    let activation_name = flags
        .and_then(|f| f.activation.clone())
        .or_else(|| file.train.activation.clone());
    let activation = match &activation_name {
        None => defaults.activation,
        Some(s) => Activation::parse(s)
            .ok_or_else(|| CliError::Config(format!("unknown activation '{s}'")))?,
    };
    let kernels = flags
        .and_then(|f| f.kernels)
        .or_else(|| file.train.kernels.map(|[i, j]| (i, j)))
        .unwrap_or((defaults.spatial_kernels, defaults.temporal_kernels));
    let conv_bias = if flags.is_some_and(|f| f.no_conv_bias) {
        false
    } else {
        file.train.conv_bias.unwrap_or(defaults.conv_bias)
    };
    let train = TrainConfig {
        strategy,
        lr: flags.and_then(|f| f.lr).or(file.train.lr).unwrap_or(defaults.lr),
        batch_size: flags
            .and_then(|f| f.batch_size)
            .or(file.train.batch_size)
            .unwrap_or(defaults.batch_size),
        dropout_rate: flags
            .and_then(|f| f.dropout)
            .or(file.train.dropout)
            .unwrap_or(defaults.dropout_rate),
        init_std: flags
            .and_then(|f| f.init_std)
            .or(file.train.init_std)
            .unwrap_or(defaults.init_std),
        max_epochs: flags
            .and_then(|f| f.epochs)
            .or(file.train.epochs)
            .unwrap_or(defaults.max_epochs),
        early_stop_patience: flags
            .and_then(|f| f.patience)
            .or(file.train.patience)
            .unwrap_or(defaults.early_stop_patience),
        seed,
        spatial_kernels: kernels.0,
        temporal_kernels: kernels.1,
        fc_dim: flags.and_then(|f| f.fc_dim).or(file.train.fc_dim).unwrap_or(defaults.fc_dim),
        activation,
        conv_bias,
    };

    Ok(Resolved {
        seed,
        out,
        synth_subjects: file.synth.subjects.unwrap_or(8),
        synth,
        train,
        train_subjects: flags
            .and_then(|f| f.train_subjects)
            .or(file.train.train_subjects)
            .unwrap_or(40),
        train_subjects_explicit: flags
            .and_then(|f| f.train_subjects)
            .or(file.train.train_subjects),
        folds: flags.and_then(|f| f.folds).or(file.train.folds).unwrap_or(0),
        filter_mi: flags
            .and_then(|f| f.filter_mi)
            .or(file.preprocess.filter_mi)
            .unwrap_or(true),
        filter_ssvep: flags
            .and_then(|f| f.filter_ssvep)
            .or(file.preprocess.filter_ssvep)
            .unwrap_or(false),
        eval_zero_streams: flags.is_some_and(|f| f.eval_zero_streams)
            || file.preprocess.eval_zero_streams.unwrap_or(false),
    })
}
