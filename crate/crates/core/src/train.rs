//! Loss, optimizer, initialization, training-set construction for the four
//! strategies, the training loop, and the cross-validation driver.

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::data::{
    kfold_labels, select_streams, ChannelMontage, DataError, Dataset, Mode, StreamPair, Trial,
};
use crate::dsp::{design_butterworth_bandpass, filter_zero_phase, FilterSpec, IirCoefficients};
use crate::eval::{classify, compute_metrics, EvalError, Metrics};
use crate::nn::{
    batch_forward, model_backward, model_forward, Activation, ModelConfig, ModelParams, NnError,
    Streams,
};
use crate::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("batch size {batch} exceeds training set size {size}")]
    BatchTooLarge { batch: usize, size: usize },
    #[error("dataset lacks {0}-mode trials required by this strategy")]
    MissingMode(Mode),
    #[error("non-finite gradient at epoch {epoch}, batch {batch}")]
    NonFiniteGradient { epoch: usize, batch: usize },
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl TrainError {
    pub fn class(&self) -> ErrorClass {
        match self {
            TrainError::InvalidConfig(_) | TrainError::BatchTooLarge { .. } => ErrorClass::Config,
            TrainError::EmptyTrainingSet | TrainError::MissingMode(_) => ErrorClass::Data,
            TrainError::NonFiniteGradient { .. } | TrainError::Diverged { .. } => {
                ErrorClass::Numerical
            }
            TrainError::Data(e) => e.class(),
            TrainError::Dsp(e) => e.class(),
            TrainError::Nn(e) => e.class(),
            TrainError::Eval(e) => e.class(),
        }
    }
}

/// Training strategy: which samples the model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Hybrid pairs only.
    Tscnn1,
    /// Hybrid pairs plus MI-only samples with a zeroed SSVEP stream.
    Tscnn2,
    /// Single-stream baseline on the motor channels.
    ScnnMi,
    /// Single-stream baseline on the occipital channels.
    ScnnSsvep,
}

impl Strategy {
    pub fn streams(self) -> Streams {
        match self {
            Strategy::Tscnn1 | Strategy::Tscnn2 => Streams::Both,
            Strategy::ScnnMi => Streams::MiOnly,
            Strategy::ScnnSsvep => Streams::SsvepOnly,
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s.to_ascii_lowercase().as_str() {
            "tscnn1" => Some(Strategy::Tscnn1),
            "tscnn2" => Some(Strategy::Tscnn2),
            "scnn-mi" | "scnn_mi" => Some(Strategy::ScnnMi),
            "scnn-ssvep" | "scnn_ssvep" => Some(Strategy::ScnnSsvep),
            _ => None,
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Strategy::Tscnn1 => "tscnn1",
            Strategy::Tscnn2 => "tscnn2",
            Strategy::ScnnMi => "scnn-mi",
            Strategy::ScnnSsvep => "scnn-ssvep",
        };
        write!(f, "{s}")
    }
}

/// Hyperparameters and architecture selection for one training run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub lr: f64,
    pub batch_size: usize,
    pub dropout_rate: f64,
    /// Standard deviation of the Gaussian weight initialization. The N(0, 0.01)
    /// initialization reads as variance 0.01, i.e. std 0.1.
    pub init_std: f64,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub seed: u64,
    pub spatial_kernels: usize,
    pub temporal_kernels: usize,
    pub fc_dim: usize,
    pub activation: Activation,
    pub conv_bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            strategy: Strategy::Tscnn2,
            lr: 2.5e-4,
            batch_size: 64,
            dropout_rate: 0.5,
            init_std: 0.1,
            max_epochs: 200,
            early_stop_patience: 40,
            seed: 0,
            spatial_kernels: 1,
            temporal_kernels: 1,
            fc_dim: 16,
            activation: Activation::Relu,
            conv_bias: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.lr < 0.0 || !self.lr.is_finite() {
            return Err(TrainError::InvalidConfig(format!("lr {} must be >= 0", self.lr)));
        }
        if self.batch_size < 2 {
            return Err(TrainError::InvalidConfig(
                "batch_size must be >= 2 (batch norm constraint)".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(TrainError::InvalidConfig(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.init_std <= 0.0 || self.max_epochs == 0 {
            return Err(TrainError::InvalidConfig(
                "init_std must be positive and max_epochs >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn model_config(&self, n_t: usize) -> ModelConfig {
        ModelConfig {
            n_t,
            mi_channels: 20,
            ssvep_channels: 10,
            spatial_kernels: self.spatial_kernels,
            temporal_kernels: self.temporal_kernels,
            fc_dim: self.fc_dim,
            activation: self.activation,
            conv_bias: self.conv_bias,
            streams: self.strategy.streams(),
        }
    }
}

/// Adam optimizer state over the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Binary cross-entropy of one prediction, with the probability clamped to
/// `[1e-12, 1 − 1e-12]` so perfect predictions stay finite.
pub fn bce_loss(y: u8, yhat: f64) -> f64 {
    let p = yhat.clamp(1e-12, 1.0 - 1e-12);
    -(f64::from(y) * p.ln() + (1.0 - f64::from(y)) * (1.0 - p).ln())
}

/// Mean BCE over a batch.
pub fn mean_bce(yhat: &[f64], labels: &[u8]) -> f64 {
    yhat.iter().zip(labels.iter()).map(|(&p, &y)| bce_loss(y, p)).sum::<f64>() / yhat.len() as f64
}

/// One Adam update over flat parameter/gradient slices:
/// `m ← β₁m + (1−β₁)g`, `v ← β₂v + (1−β₂)g²`,
/// `θ ← θ − lr·m̂/(√v̂ + ε)` with bias-corrected `m̂`, `v̂`.
pub fn adam_update(
    theta: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainError> {
    assert_eq!(theta.len(), grads.len(), "gradient/parameter length mismatch");
    assert_eq!(theta.len(), state.m.len(), "optimizer state length mismatch");
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(TrainError::NonFiniteGradient { epoch: 0, batch: 0 });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for ((th, &g), (m, v)) in theta
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *th -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

/// Applies one Adam step to the model parameters.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainError> {
    let mut theta = params.to_flat();
    let g = grads.to_flat();
    adam_update(&mut theta, &g, state, lr)?;
    params.assign_flat(&theta);
    Ok(())
}

/// Draws every weight i.i.d. from N(0, init_std²); biases start at zero and
/// batch norm at the identity.
pub fn init_params(
    config: &TrainConfig,
    n_t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ModelParams, TrainError> {
    config.validate()?;
    let model_config = config.model_config(n_t);
    let mut params = ModelParams::zeros(model_config)?;
    let normal = Normal::new(0.0, config.init_std)
        .map_err(|e| TrainError::InvalidConfig(e.to_string()))?;
    let mut fill = |arr: &mut [f64]| {
        for v in arr.iter_mut() {
            *v = normal.sample(rng);
        }
    };
    for block in [&mut params.mi_block, &mut params.ssvep_block].into_iter().flatten() {
        fill(block.spatial_weights.as_slice_mut().unwrap());
        fill(block.temporal_weights.as_slice_mut().unwrap());
    }
    if let Some(fc) = &mut params.fc_hidden {
        fill(fc.weights.as_slice_mut().unwrap());
    }
    fill(params.fc_out_weights.as_slice_mut().unwrap());
    Ok(params)
}

/// Trial → stream-pair conversion: montage selection plus the configured
/// per-stream bandpass filtering.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub montage: ChannelMontage,
    pub mi_filter: Option<IirCoefficients>,
    pub ssvep_filter: Option<IirCoefficients>,
}

impl Preprocessor {
    /// Standard montage with the 8–30 Hz bandpass on the MI stream only.
    pub fn standard(fs_hz: f64) -> Result<Self, TrainError> {
        Self::new(ChannelMontage::standard(), fs_hz, true, false)
    }

    pub fn new(
        montage: ChannelMontage,
        fs_hz: f64,
        filter_mi: bool,
        filter_ssvep: bool,
    ) -> Result<Self, TrainError> {
        montage.validate()?;
        let coeffs = if filter_mi || filter_ssvep {
            Some(design_butterworth_bandpass(&FilterSpec::mi_default(fs_hz))?)
        } else {
            None
        };
        Ok(Preprocessor {
            montage,
            mi_filter: filter_mi.then(|| coeffs.clone().unwrap()),
            ssvep_filter: filter_ssvep.then(|| coeffs.unwrap()),
        })
    }

    pub fn apply(&self, trial: &Trial, channel_names: &[String]) -> Result<StreamPair, TrainError> {
        let mut pair = select_streams(trial, &self.montage, channel_names)?;
        if let Some(coeffs) = &self.mi_filter {
            pair.x_m = filter_zero_phase(&pair.x_m, coeffs)?;
        }
        if let Some(coeffs) = &self.ssvep_filter {
            pair.x_s = filter_zero_phase(&pair.x_s, coeffs)?;
        }
        Ok(pair)
    }
}

fn zero_stream(rows: usize, n_t: usize) -> Array2<f64> {
    Array2::zeros((rows, n_t))
}

/// Hybrid sample construction: native hybrid trials are used directly; the
/// single-mode recordings are paired index-by-index within (subject, class),
/// the i-th MI trial with the i-th SSVEP trial.
fn hybrid_pairs(
    ds: &Dataset,
    pre: &Preprocessor,
    subject: u16,
    class: u8,
) -> Result<(Vec<StreamPair>, Vec<usize>), TrainError> {
    let mut pairs = Vec::new();
    let mut used_mi = Vec::new();
    for t in ds.trials.iter().filter(|t| {
        t.subject_id == subject && t.label == class && t.mode == Mode::Hybrid
    }) {
        pairs.push(pre.apply(t, &ds.channel_names)?);
    }
    let mi_idx: Vec<usize> = (0..ds.trials.len())
        .filter(|&i| {
            let t = &ds.trials[i];
            t.subject_id == subject && t.label == class && t.mode == Mode::Mi
        })
        .collect();
    let ssvep_idx: Vec<usize> = (0..ds.trials.len())
        .filter(|&i| {
            let t = &ds.trials[i];
            t.subject_id == subject && t.label == class && t.mode == Mode::Ssvep
        })
        .collect();
    for (&mi, &sv) in mi_idx.iter().zip(ssvep_idx.iter()) {
        let mi_pair = pre.apply(&ds.trials[mi], &ds.channel_names)?;
        let sv_pair = pre.apply(&ds.trials[sv], &ds.channel_names)?;
        pairs.push(StreamPair { x_m: mi_pair.x_m, x_s: sv_pair.x_s, label: class });
        used_mi.push(mi);
    }
    Ok((pairs, used_mi))
}

/// Builds the training samples for a strategy.
///
/// Per subject and class: TSCNN₁ takes the hybrid pairs; TSCNN₂ adds one
/// MI-only sample (zero SSVEP stream) for every MI trial not consumed by the
/// pairing, so all MI trials appear exactly once across the two halves. The
/// SCNN strategies take every trial of their own mode with the other stream
/// zeroed.
pub fn build_training_set(
    strategy: Strategy,
    ds: &Dataset,
    pre: &Preprocessor,
) -> Result<Vec<StreamPair>, TrainError> {
    let n_t = ds.n_t();
    let mut out = Vec::new();
    match strategy {
        Strategy::Tscnn1 | Strategy::Tscnn2 => {
            for &subject in &ds.subject_ids() {
                for class in [0u8, 1] {
                    let (pairs, used_mi) = hybrid_pairs(ds, pre, subject, class)?;
                    out.extend(pairs);
                    if strategy == Strategy::Tscnn2 {
                        for (i, t) in ds.trials.iter().enumerate() {
                            if t.subject_id == subject
                                && t.label == class
                                && t.mode == Mode::Mi
                                && !used_mi.contains(&i)
                            {
                                let p = pre.apply(t, &ds.channel_names)?;
                                out.push(StreamPair {
                                    x_m: p.x_m,
                                    x_s: zero_stream(pre.montage.occipital.len(), n_t),
                                    label: class,
                                });
                            }
                        }
                    }
                }
            }
            if out.is_empty() {
                return Err(TrainError::MissingMode(Mode::Hybrid));
            }
        }
        Strategy::ScnnMi => {
            for t in ds.trials.iter().filter(|t| t.mode == Mode::Mi) {
                let p = pre.apply(t, &ds.channel_names)?;
                out.push(StreamPair {
                    x_m: p.x_m,
                    x_s: zero_stream(pre.montage.occipital.len(), n_t),
                    label: t.label,
                });
            }
            if out.is_empty() {
                return Err(TrainError::MissingMode(Mode::Mi));
            }
        }
        Strategy::ScnnSsvep => {
            for t in ds.trials.iter().filter(|t| t.mode == Mode::Ssvep) {
                let p = pre.apply(t, &ds.channel_names)?;
                out.push(StreamPair {
                    x_m: zero_stream(pre.montage.motor.len(), n_t),
                    x_s: p.x_s,
                    label: t.label,
                });
            }
            if out.is_empty() {
                return Err(TrainError::MissingMode(Mode::Ssvep));
            }
        }
    }
    Ok(out)
}

/// Test samples per evaluation mode: MI-task trials, SSVEP-task trials, and
/// hybrid pairs.
#[derive(Debug, Default)]
pub struct EvalSets {
    pub mi: Vec<StreamPair>,
    pub ssvep: Vec<StreamPair>,
    pub hybrid: Vec<StreamPair>,
}

/// Builds the three evaluation sets.
///
/// Every trial is a full-scalp recording, so by default a single-mode test
/// sample carries both streams of its own trial: an MI-task sample's SSVEP
/// stream is the occipital background of that recording (no flicker), and an
/// SSVEP-task sample's MI stream is the resting motor cortex. With
/// `zero_streams` the absent-paradigm stream is replaced by a zero matrix
/// instead.
pub fn build_eval_sets(
    ds: &Dataset,
    pre: &Preprocessor,
    zero_streams: bool,
) -> Result<EvalSets, TrainError> {
    let n_t = ds.n_t();
    let mut sets = EvalSets::default();
    for t in &ds.trials {
        match t.mode {
            Mode::Mi => {
                let p = pre.apply(t, &ds.channel_names)?;
                let x_s = if zero_streams {
                    zero_stream(pre.montage.occipital.len(), n_t)
                } else {
                    p.x_s
                };
                sets.mi.push(StreamPair { x_m: p.x_m, x_s, label: t.label });
            }
            Mode::Ssvep => {
                let p = pre.apply(t, &ds.channel_names)?;
                let x_m = if zero_streams {
                    zero_stream(pre.montage.motor.len(), n_t)
                } else {
                    p.x_m
                };
                sets.ssvep.push(StreamPair { x_m, x_s: p.x_s, label: t.label });
            }
            Mode::Hybrid => {}
        }
    }
    for &subject in &ds.subject_ids() {
        for class in [0u8, 1] {
            let (pairs, _) = hybrid_pairs(ds, pre, subject, class)?;
            sets.hybrid.extend(pairs);
        }
    }
    Ok(sets)
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// Epoch (0-based) whose parameters were returned.
    pub chosen_epoch: usize,
}

/// Inference-mode predictions over a sample list.
pub fn predict(params: &ModelParams, samples: &[StreamPair]) -> Result<Vec<f64>, NnError> {
    samples.par_iter().map(|s| model_forward(s, params)).collect()
}

/// Evaluates inference metrics on a labelled sample list.
pub fn evaluate(params: &ModelParams, samples: &[StreamPair]) -> Result<Metrics, TrainError> {
    let probs = predict(params, samples)?;
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let preds = classify(&probs, 0.5)?;
    Ok(compute_metrics(&preds, &labels, &probs)?)
}

/// Mini-batch Adam training with per-epoch seeded shuffling and early
/// stopping on validation loss (best-epoch parameters are restored).
///
/// Deterministic end to end: the master seed splits into independent
/// initialization, shuffling, and dropout streams, and every reduction runs
/// in a fixed order.
pub fn train(
    config: &TrainConfig,
    train_set: &[StreamPair],
    val_set: &[StreamPair],
) -> Result<(ModelParams, TrainHistory), TrainError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if config.batch_size > train_set.len() {
        return Err(TrainError::BatchTooLarge {
            batch: config.batch_size,
            size: train_set.len(),
        });
    }
    let n_t = train_set[0].n_t();

    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut init_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(master.next_u64());

    let mut params = init_params(config, n_t, &mut init_rng)?;
    let mut adam = AdamState::new(params.n_learnable());

    let val_labels: Vec<u8> = val_set.iter().map(|s| s.label).collect();
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        val_accuracy: Vec::new(),
        chosen_epoch: 0,
    };
    let mut best: Option<(f64, ModelParams, usize)> = None;
    let mut patience_left = config.early_stop_patience;

    let mut indices: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..config.max_epochs {
        use rand::seq::SliceRandom;
        indices.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for (batch_no, chunk) in indices.chunks(config.batch_size).enumerate() {
            if chunk.len() < 2 {
                continue; // batch norm needs at least two samples
            }
            let batch: Vec<&StreamPair> = chunk.iter().map(|&i| &train_set[i]).collect();
            let labels: Vec<u8> = chunk.iter().map(|&i| train_set[i].label).collect();
            let (yhat, cache) =
                batch_forward(&batch, &mut params, config.dropout_rate, &mut dropout_rng)?;
            let batch_loss = mean_bce(&yhat, &labels);
            if !batch_loss.is_finite() {
                return Err(TrainError::Diverged { epoch, batch: batch_no });
            }
            loss_sum += batch_loss * yhat.len() as f64;
            loss_count += yhat.len();
            let grads = model_backward(&cache, &yhat, &labels, &params)?;
            adam_step(&mut params, &grads, &mut adam, config.lr).map_err(|e| match e {
                TrainError::NonFiniteGradient { .. } => {
                    TrainError::NonFiniteGradient { epoch, batch: batch_no }
                }
                other => other,
            })?;
        }
        history.train_loss.push(loss_sum / loss_count.max(1) as f64);

        if !val_set.is_empty() {
            let probs = predict(&params, val_set)?;
            let val_loss = mean_bce(&probs, &val_labels);
            let preds = classify(&probs, 0.5)?;
            let correct =
                preds.iter().zip(val_labels.iter()).filter(|(p, y)| p == y).count();
            history.val_loss.push(val_loss);
            history.val_accuracy.push(correct as f64 / val_labels.len() as f64);

            let improved = best.as_ref().is_none_or(|(b, _, _)| val_loss < *b);
            if improved {
                best = Some((val_loss, params.clone(), epoch));
                patience_left = config.early_stop_patience;
            } else {
                if patience_left == 0 {
                    break;
                }
                patience_left -= 1;
            }
        }
    }

    let (final_params, chosen) = match best {
        Some((_, p, e)) => (p, e),
        None => {
            let last = history.train_loss.len().saturating_sub(1);
            (params, last)
        }
    };
    history.chosen_epoch = chosen;
    Ok((final_params, history))
}

/// Per-fold metrics of a k-fold cross-validation.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub per_fold: Vec<Metrics>,
    pub fold_histories: Vec<TrainHistory>,
}

impl CvReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.per_fold.iter().map(|m| m.accuracy).collect()
    }
}

/// Stratified k-fold cross-validation over the prepared samples: trains one
/// model per fold complement and evaluates it on the held-out fold. Folds
/// run in parallel; fold f trains under seed `seed + f`.
pub fn cross_validate(
    config: &TrainConfig,
    samples: &[StreamPair],
    k: usize,
) -> Result<CvReport, TrainError> {
    config.validate()?;
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let folds = kfold_labels(&labels, k, config.seed)?;
    let results: Vec<Result<(Metrics, TrainHistory), TrainError>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, (train_idx, val_idx))| {
            let train_samples: Vec<StreamPair> =
                train_idx.iter().map(|&i| samples[i].clone()).collect();
            let val_samples: Vec<StreamPair> =
                val_idx.iter().map(|&i| samples[i].clone()).collect();
            let mut fold_config = *config;
            fold_config.seed = config.seed.wrapping_add(f as u64);
            fold_config.batch_size = fold_config.batch_size.min(train_samples.len());
            let (params, hist) = train(&fold_config, &train_samples, &val_samples)?;
            let metrics = evaluate(&params, &val_samples)?;
            Ok((metrics, hist))
        })
        .collect();
    let mut per_fold = Vec::with_capacity(k);
    let mut fold_histories = Vec::with_capacity(k);
    for r in results {
        let (m, h) = r?;
        per_fold.push(m);
        fold_histories.push(h);
    }
    Ok(CvReport { per_fold, fold_histories })
}
