//! The two-stream network: parameter containers, layer forward/backward
//! passes, the full-model forward, and checkpoints.
//!
//! Per stream the pipeline is spatial convolution (one kernel column spanning
//! all channels) → activation → temporal convolution (width-10 kernels over
//! all spatial maps) → activation. The flattened feature maps of both streams
//! are concatenated and fed to the classification head: optional hidden FC →
//! activation → batch norm → dropout, then the output FC and a sigmoid.
//! Single-stream (SCNN) configurations route one stream's features straight
//! into the same head.

mod backward;
mod checkpoint;
mod forward;

pub use backward::{model_backward, ModelGrads};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use forward::{batch_forward, model_forward, model_forward_traced, ForwardCache, InferenceTrace};

use ndarray::{Array1, Array2, Array3};
use rand::Rng;

use crate::ErrorClass;

/// Width of every temporal convolution kernel.
pub const TEMPORAL_KERNEL_WIDTH: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch in {what}: expected {expected}, got {actual}")]
    ShapeMismatch { what: &'static str, expected: String, actual: String },
    #[error("temporal convolution needs N_t >= {TEMPORAL_KERNEL_WIDTH}, got {0}")]
    TemporalTooShort(usize),
    #[error("batch normalization in training mode needs a batch of >= 2, got {0}")]
    BatchTooSmall(usize),
    #[error("dropout rate must lie in [0, 1), got {0}")]
    InvalidDropoutRate(f64),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("forward cache does not match this call: {0}")]
    CacheMismatch(String),
    #[error("checkpoint i/o: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("checkpoint parse: {0}")]
    CheckpointParse(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),
    #[error("checkpoint inconsistent with its architecture config: {0}")]
    CheckpointShape(String),
}

impl NnError {
    pub fn class(&self) -> ErrorClass {
        match self {
            NnError::InvalidDropoutRate(_) | NnError::InvalidConfig(_) | NnError::BatchTooSmall(_) => {
                ErrorClass::Config
            }
            _ => ErrorClass::Data,
        }
    }
}

/// Elementwise nonlinearity applied after each convolution and the hidden FC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Elu,
    Softplus,
    LeakyRelu,
}

pub const LEAKY_RELU_SLOPE: f64 = 0.01;

impl Activation {
    pub const ALL: [Activation; 4] =
        [Activation::Relu, Activation::Elu, Activation::Softplus, Activation::LeakyRelu];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp() - 1.0
                }
            }
            Activation::Softplus => {
                // ln(1 + e^x) without overflow at either tail
                if x > 30.0 {
                    x
                } else if x < -30.0 {
                    x.exp()
                } else {
                    x.exp().ln_1p()
                }
            }
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_RELU_SLOPE * x
                }
            }
        }
    }

    /// Derivative as a function of the pre-activation value.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if x > 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
            Activation::Softplus => sigmoid(x),
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_RELU_SLOPE
                }
            }
        }
    }

    pub fn parse(s: &str) -> Option<Activation> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Some(Activation::Relu),
            "elu" => Some(Activation::Elu),
            "softplus" => Some(Activation::Softplus),
            "leakyrelu" | "leaky-relu" | "leaky_relu" => Some(Activation::LeakyRelu),
            _ => None,
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
            Activation::Softplus => "softplus",
            Activation::LeakyRelu => "leakyrelu",
        };
        write!(f, "{s}")
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Which streams the model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Streams {
    Both,
    MiOnly,
    SsvepOnly,
}

/// Architecture description; every dimension of a [`ModelParams`] follows
/// from it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub n_t: usize,
    pub mi_channels: usize,
    pub ssvep_channels: usize,
    /// Number of spatial kernels per block (`i`).
    pub spatial_kernels: usize,
    /// Number of temporal kernels per block (`j`).
    pub temporal_kernels: usize,
    /// Hidden FC width (`d`); 0 removes the hidden layer, batch norm, and
    /// dropout entirely.
    pub fc_dim: usize,
    pub activation: Activation,
    /// When false the convolution layers carry no bias terms, so an all-zero
    /// stream contributes exactly nothing to the fusion head.
    pub conv_bias: bool,
    pub streams: Streams,
}

impl ModelConfig {
    pub fn two_stream(n_t: usize) -> Self {
        ModelConfig {
            n_t,
            mi_channels: 20,
            ssvep_channels: 10,
            spatial_kernels: 1,
            temporal_kernels: 1,
            fc_dim: 16,
            activation: Activation::Relu,
            conv_bias: true,
            streams: Streams::Both,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.n_t < TEMPORAL_KERNEL_WIDTH {
            return Err(NnError::TemporalTooShort(self.n_t));
        }
        if self.spatial_kernels == 0 || self.temporal_kernels == 0 {
            return Err(NnError::InvalidConfig("kernel counts must be >= 1".into()));
        }
        if (self.streams != Streams::SsvepOnly && self.mi_channels == 0)
            || (self.streams != Streams::MiOnly && self.ssvep_channels == 0)
        {
            return Err(NnError::InvalidConfig("stream channel counts must be >= 1".into()));
        }
        Ok(())
    }

    /// Flattened length of one stream's feature maps: `j · (N_t − 9)`.
    pub fn feature_len(&self) -> usize {
        self.temporal_kernels * (self.n_t - TEMPORAL_KERNEL_WIDTH + 1)
    }

    pub fn uses_mi(&self) -> bool {
        matches!(self.streams, Streams::Both | Streams::MiOnly)
    }

    pub fn uses_ssvep(&self) -> bool {
        matches!(self.streams, Streams::Both | Streams::SsvepOnly)
    }

    /// Length of the fusion concatenation feeding the head.
    pub fn concat_len(&self) -> usize {
        let streams = self.uses_mi() as usize + self.uses_ssvep() as usize;
        streams * self.feature_len()
    }

    /// Input width of the output FC layer.
    pub fn head_in(&self) -> usize {
        if self.fc_dim > 0 {
            self.fc_dim
        } else {
            self.concat_len()
        }
    }
}

/// Parameters of one stream block: `i` spatial kernels spanning all channels
/// and `j` temporal kernels spanning all spatial maps.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvBlockParams {
    /// i × n_ch.
    pub spatial_weights: Array2<f64>,
    /// i.
    pub spatial_bias: Array1<f64>,
    /// j × i × 10.
    pub temporal_weights: Array3<f64>,
    /// j.
    pub temporal_bias: Array1<f64>,
}

impl ConvBlockParams {
    pub fn zeros(n_ch: usize, spatial: usize, temporal: usize) -> Self {
        ConvBlockParams {
            spatial_weights: Array2::zeros((spatial, n_ch)),
            spatial_bias: Array1::zeros(spatial),
            temporal_weights: Array3::zeros((temporal, spatial, TEMPORAL_KERNEL_WIDTH)),
            temporal_bias: Array1::zeros(temporal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BatchNormParams {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub eps: f64,
    pub momentum: f64,
}

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

impl BatchNormParams {
    pub fn identity(d: usize) -> Self {
        BatchNormParams {
            gamma: Array1::ones(d),
            beta: Array1::zeros(d),
            running_mean: Array1::zeros(d),
            running_var: Array1::ones(d),
            eps: BN_EPS,
            momentum: BN_MOMENTUM,
        }
    }
}

/// Hidden fully-connected layer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DenseParams {
    /// in_features × out_features.
    pub weights: Array2<f64>,
    /// out_features.
    pub bias: Array1<f64>,
}

/// All learnable parameters plus batch-norm running statistics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub mi_block: Option<ConvBlockParams>,
    pub ssvep_block: Option<ConvBlockParams>,
    /// concat_len × d, present iff `fc_dim > 0`.
    pub fc_hidden: Option<DenseParams>,
    pub bn: Option<BatchNormParams>,
    /// head_in.
    pub fc_out_weights: Array1<f64>,
    pub fc_out_bias: f64,
}

impl ModelParams {
    /// All-zero parameters (identity batch norm) for the given architecture.
    pub fn zeros(config: ModelConfig) -> Result<Self, NnError> {
        config.validate()?;
        let block = |n_ch: usize| {
            ConvBlockParams::zeros(n_ch, config.spatial_kernels, config.temporal_kernels)
        };
        Ok(ModelParams {
            mi_block: config.uses_mi().then(|| block(config.mi_channels)),
            ssvep_block: config.uses_ssvep().then(|| block(config.ssvep_channels)),
            fc_hidden: (config.fc_dim > 0).then(|| DenseParams {
                weights: Array2::zeros((config.concat_len(), config.fc_dim)),
                bias: Array1::zeros(config.fc_dim),
            }),
            bn: (config.fc_dim > 0).then(|| BatchNormParams::identity(config.fc_dim)),
            fc_out_weights: Array1::zeros(config.head_in()),
            fc_out_bias: 0.0,
            config,
        })
    }

    /// Applies `f` to every learnable array, in the fixed flattening order.
    /// Conv biases are skipped when `conv_bias` is off.
    fn visit_learnables<'a>(&'a self, mut f: impl FnMut(&'a [f64])) {
        let conv_bias = self.config.conv_bias;
        for block in [&self.mi_block, &self.ssvep_block].into_iter().flatten() {
            f(block.spatial_weights.as_slice().unwrap());
            if conv_bias {
                f(block.spatial_bias.as_slice().unwrap());
            }
            f(block.temporal_weights.as_slice().unwrap());
            if conv_bias {
                f(block.temporal_bias.as_slice().unwrap());
            }
        }
        if let Some(fc) = &self.fc_hidden {
            f(fc.weights.as_slice().unwrap());
            f(fc.bias.as_slice().unwrap());
        }
        if let Some(bn) = &self.bn {
            f(bn.gamma.as_slice().unwrap());
            f(bn.beta.as_slice().unwrap());
        }
        f(self.fc_out_weights.as_slice().unwrap());
        f(std::slice::from_ref(&self.fc_out_bias));
    }

    fn visit_learnables_mut(&mut self, mut f: impl FnMut(&mut [f64])) {
        let conv_bias = self.config.conv_bias;
        for block in [&mut self.mi_block, &mut self.ssvep_block].into_iter().flatten() {
            f(block.spatial_weights.as_slice_mut().unwrap());
            if conv_bias {
                f(block.spatial_bias.as_slice_mut().unwrap());
            }
            f(block.temporal_weights.as_slice_mut().unwrap());
            if conv_bias {
                f(block.temporal_bias.as_slice_mut().unwrap());
            }
        }
        if let Some(fc) = &mut self.fc_hidden {
            f(fc.weights.as_slice_mut().unwrap());
            f(fc.bias.as_slice_mut().unwrap());
        }
        if let Some(bn) = &mut self.bn {
            f(bn.gamma.as_slice_mut().unwrap());
            f(bn.beta.as_slice_mut().unwrap());
        }
        f(self.fc_out_weights.as_slice_mut().unwrap());
        f(std::slice::from_mut(&mut self.fc_out_bias));
    }

    /// Flattens the learnable parameters in a fixed order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_learnables(|s| out.extend_from_slice(s));
        out
    }

    /// Writes back a flat vector produced by [`ModelParams::to_flat`].
    pub fn assign_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        self.visit_learnables_mut(|s| {
            s.copy_from_slice(&flat[pos..pos + s.len()]);
            pos += s.len();
        });
        assert_eq!(pos, flat.len(), "flat parameter vector length mismatch");
    }

    pub fn n_learnable(&self) -> usize {
        let mut n = 0;
        self.visit_learnables(|s| n += s.len());
        n
    }
}

/// Spatial convolution: each kernel spans every channel, producing one map
/// per kernel with the input's full width.
///
/// `out[k, t] = Σ_c w[k, c] · x[c, t] + b[k]`
pub fn spatial_conv_forward(
    x: &Array2<f64>,
    weights: &Array2<f64>,
    bias: &Array1<f64>,
) -> Result<Array2<f64>, NnError> {
    let (n_ch, n_t) = x.dim();
    let (n_kernels, kernel_span) = weights.dim();
    if kernel_span != n_ch || bias.len() != n_kernels {
        return Err(NnError::ShapeMismatch {
            what: "spatial convolution",
            expected: format!("kernels k×{n_ch}, bias k"),
            actual: format!("kernels {n_kernels}×{kernel_span}, bias {}", bias.len()),
        });
    }
    let mut out = Array2::zeros((n_kernels, n_t));
    for (k, mut row_out) in out.outer_iter_mut().enumerate() {
        let dst = row_out.as_slice_mut().unwrap();
        dst.fill(bias[k]);
        for c in 0..n_ch {
            let w = weights[[k, c]];
            let src = x.row(c);
            let src = src.as_slice().unwrap();
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += w * s;
            }
        }
    }
    Ok(out)
}

/// Temporal convolution: valid cross-correlation with width-10 kernels that
/// span all input maps, shrinking the width to `N_t − 9`.
///
/// `out[k, t] = Σ_m Σ_τ w[k, m, τ] · maps[m, t + τ] + b[k]`
pub fn temporal_conv_forward(
    maps: &Array2<f64>,
    weights: &Array3<f64>,
    bias: &Array1<f64>,
) -> Result<Array2<f64>, NnError> {
    let (n_maps, n_t) = maps.dim();
    if n_t < TEMPORAL_KERNEL_WIDTH {
        return Err(NnError::TemporalTooShort(n_t));
    }
    let (n_kernels, kernel_maps, width) = weights.dim();
    if kernel_maps != n_maps || width != TEMPORAL_KERNEL_WIDTH || bias.len() != n_kernels {
        return Err(NnError::ShapeMismatch {
            what: "temporal convolution",
            expected: format!("kernels k×{n_maps}×{TEMPORAL_KERNEL_WIDTH}, bias k"),
            actual: format!("kernels {n_kernels}×{kernel_maps}×{width}, bias {}", bias.len()),
        });
    }
    let out_len = n_t - TEMPORAL_KERNEL_WIDTH + 1;
    let mut out = Array2::zeros((n_kernels, out_len));
    for (k, mut row_out) in out.outer_iter_mut().enumerate() {
        let dst = row_out.as_slice_mut().unwrap();
        dst.fill(bias[k]);
        for m in 0..n_maps {
            let src = maps.row(m);
            let src = src.as_slice().unwrap();
            for tau in 0..TEMPORAL_KERNEL_WIDTH {
                let w = weights[[k, m, tau]];
                for (d, s) in dst.iter_mut().zip(src[tau..tau + out_len].iter()) {
                    *d += w * s;
                }
            }
        }
    }
    Ok(out)
}

/// Elementwise activation.
pub fn activation_forward(x: &Array2<f64>, kind: Activation) -> Array2<f64> {
    x.mapv(|v| kind.apply(v))
}

/// Per-feature batch statistics retained for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    /// B × d normalized values.
    pub xhat: Array2<f64>,
    /// d.
    pub inv_std: Array1<f64>,
}

/// Batch normalization over a B × d batch.
///
/// Training mode normalizes by the batch statistics and folds them into the
/// running estimates (`running ← (1−m)·running + m·batch`, unbiased variance
/// in the running estimate). Inference mode normalizes by the running
/// statistics alone and never needs a minimum batch.
pub fn batchnorm_forward(
    batch: &Array2<f64>,
    params: &mut BatchNormParams,
    training: bool,
) -> Result<(Array2<f64>, Option<BnCache>), NnError> {
    let (b, d) = batch.dim();
    if d != params.gamma.len() {
        return Err(NnError::ShapeMismatch {
            what: "batch norm",
            expected: format!("{} features", params.gamma.len()),
            actual: format!("{d} features"),
        });
    }
    if !training {
        let mut out = Array2::zeros((b, d));
        for j in 0..d {
            let denom = (params.running_var[j] + params.eps).sqrt();
            for i in 0..b {
                out[[i, j]] = params.gamma[j] * (batch[[i, j]] - params.running_mean[j]) / denom
                    + params.beta[j];
            }
        }
        return Ok((out, None));
    }
    if b < 2 {
        return Err(NnError::BatchTooSmall(b));
    }
    let bf = b as f64;
    let mut out = Array2::zeros((b, d));
    let mut xhat = Array2::zeros((b, d));
    let mut inv_std = Array1::zeros(d);
    for j in 0..d {
        let mut mean = 0.0;
        for i in 0..b {
            mean += batch[[i, j]];
        }
        mean /= bf;
        let mut var = 0.0;
        for i in 0..b {
            let c = batch[[i, j]] - mean;
            var += c * c;
        }
        var /= bf;
        let istd = 1.0 / (var + params.eps).sqrt();
        inv_std[j] = istd;
        for i in 0..b {
            let xh = (batch[[i, j]] - mean) * istd;
            xhat[[i, j]] = xh;
            out[[i, j]] = params.gamma[j] * xh + params.beta[j];
        }
        let m = params.momentum;
        params.running_mean[j] = (1.0 - m) * params.running_mean[j] + m * mean;
        params.running_var[j] = (1.0 - m) * params.running_var[j] + m * var * bf / (bf - 1.0);
    }
    Ok((out, Some(BnCache { xhat, inv_std })))
}

/// Inverted dropout: zeroes each element with probability `rate` and scales
/// survivors by `1/(1−rate)`. Inference mode is the identity. The returned
/// mask holds 0/1 survival indicators.
pub fn dropout_forward(
    x: &Array2<f64>,
    rate: f64,
    training: bool,
    rng: &mut impl Rng,
) -> Result<(Array2<f64>, Array2<f64>), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::InvalidDropoutRate(rate));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), Array2::ones(x.raw_dim())));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut mask = Array2::ones(x.raw_dim());
    let mut out = x.clone();
    for (m, o) in mask.iter_mut().zip(out.iter_mut()) {
        if rng.gen::<f64>() < rate {
            *m = 0.0;
            *o = 0.0;
        } else {
            *o *= scale;
        }
    }
    Ok((out, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spatial_selector_kernel_copies_a_channel() {
        let x = Array2::from_shape_fn((20, 50), |(c, t)| (c * 100 + t) as f64);
        let mut w = Array2::zeros((1, 20));
        w[[0, 3]] = 1.0;
        let out = spatial_conv_forward(&x, &w, &Array1::zeros(1)).unwrap();
        assert_eq!(out.dim(), (1, 50));
        assert_eq!(out.row(0).to_vec(), x.row(3).to_vec());
    }

    #[test]
    fn spatial_zero_kernel_emits_bias() {
        let x = Array2::from_elem((4, 7), 2.5);
        let w = Array2::zeros((2, 4));
        let b = Array1::from_vec(vec![5.0, -1.0]);
        let out = spatial_conv_forward(&x, &w, &b).unwrap();
        assert!(out.row(0).iter().all(|&v| v == 5.0));
        assert!(out.row(1).iter().all(|&v| v == -1.0));
    }

    #[test]
    fn spatial_conv_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        use rand::Rng;
        let x = Array2::from_shape_fn((20, 50), |_| rng.gen_range(-1.0..1.0));
        let w = Array2::from_shape_fn((3, 20), |_| rng.gen_range(-1.0..1.0));
        let b = Array1::from_shape_fn(3, |_| rng.gen_range(-1.0..1.0));
        let out = spatial_conv_forward(&x, &w, &b).unwrap();
        for k in 0..3 {
            for t in 0..50 {
                let mut acc = b[k];
                for c in 0..20 {
                    acc += w[[k, c]] * x[[c, t]];
                }
                assert!((out[[k, t]] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spatial_conv_rejects_mismatched_kernel() {
        let x = Array2::zeros((5, 10));
        let w = Array2::zeros((1, 4));
        assert!(spatial_conv_forward(&x, &w, &Array1::zeros(1)).is_err());
    }

    #[test]
    fn temporal_output_width() {
        let maps = Array2::zeros((1, 4000));
        let w = Array3::zeros((1, 1, 10));
        let out = temporal_conv_forward(&maps, &w, &Array1::zeros(1)).unwrap();
        assert_eq!(out.dim(), (1, 3991));
    }

    #[test]
    fn temporal_delta_kernel_is_identity_on_valid_range() {
        let maps = Array2::from_shape_fn((1, 30), |(_, t)| t as f64 * 0.5 - 3.0);
        let mut w = Array3::zeros((1, 1, 10));
        w[[0, 0, 0]] = 1.0;
        let out = temporal_conv_forward(&maps, &w, &Array1::zeros(1)).unwrap();
        assert_eq!(out.dim(), (1, 21));
        for t in 0..21 {
            assert_eq!(out[[0, t]], maps[[0, t]]);
        }
    }

    #[test]
    fn temporal_moving_average_of_constant() {
        let maps = Array2::from_elem((1, 25), 3.25);
        let w = Array3::from_elem((1, 1, 10), 0.1);
        let out = temporal_conv_forward(&maps, &w, &Array1::zeros(1)).unwrap();
        for v in out.iter() {
            assert!((v - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn temporal_rejects_short_input() {
        let maps = Array2::zeros((1, 9));
        let w = Array3::zeros((1, 1, 10));
        match temporal_conv_forward(&maps, &w, &Array1::zeros(1)) {
            Err(NnError::TemporalTooShort(9)) => {}
            other => panic!("expected TemporalTooShort, got {other:?}"),
        }
    }

    #[test]
    fn temporal_conv_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        use rand::Rng;
        let maps = Array2::from_shape_fn((3, 40), |_| rng.gen_range(-1.0..1.0));
        let w = Array3::from_shape_fn((2, 3, 10), |_| rng.gen_range(-1.0..1.0));
        let b = Array1::from_shape_fn(2, |_| rng.gen_range(-1.0..1.0));
        let out = temporal_conv_forward(&maps, &w, &b).unwrap();
        for k in 0..2 {
            for t in 0..31 {
                let mut acc = b[k];
                for m in 0..3 {
                    for tau in 0..10 {
                        acc += w[[k, m, tau]] * maps[[m, t + tau]];
                    }
                }
                assert!((out[[k, t]] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn activation_analytic_values() {
        assert_eq!(Activation::Relu.apply(-2.0), 0.0);
        assert_eq!(Activation::Relu.apply(3.0), 3.0);
        assert!((Activation::Softplus.apply(0.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((Activation::Elu.apply(-700.0) - (-1.0)).abs() < 1e-12);
        assert_eq!(Activation::LeakyRelu.apply(-1.0), -0.01);
    }

    #[test]
    fn batchnorm_training_standardizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        let batch = Array2::from_shape_fn((32, 4), |_| rng.gen_range(-5.0..5.0) + 2.0);
        let mut params = BatchNormParams::identity(4);
        let (out, cache) = batchnorm_forward(&batch, &mut params, true).unwrap();
        assert!(cache.is_some());
        for j in 0..4 {
            let mean: f64 = out.column(j).sum() / 32.0;
            let var: f64 = out.column(j).iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 32.0;
            assert!(mean.abs() < 1e-9, "feature {j} mean {mean}");
            assert!((var - 1.0).abs() < 1e-4, "feature {j} var {var}");
        }
    }

    #[test]
    fn batchnorm_affine_shift() {
        let batch = Array2::from_shape_vec((4, 1), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut base = BatchNormParams::identity(1);
        let (plain, _) = batchnorm_forward(&batch, &mut base, true).unwrap();
        let mut scaled = BatchNormParams::identity(1);
        scaled.gamma[0] = 2.0;
        scaled.beta[0] = 3.0;
        let (affine, _) = batchnorm_forward(&batch, &mut scaled, true).unwrap();
        for i in 0..4 {
            assert!((affine[[i, 0]] - (3.0 + 2.0 * plain[[i, 0]])).abs() < 1e-12);
        }
    }

    #[test]
    fn batchnorm_inference_identity_stats() {
        let batch = Array2::from_shape_vec((3, 2), vec![0.5, -1.0, 2.0, 0.0, -0.25, 1.5]).unwrap();
        let mut params = BatchNormParams::identity(2);
        let (out, cache) = batchnorm_forward(&batch, &mut params, false).unwrap();
        assert!(cache.is_none());
        for (o, b) in out.iter().zip(batch.iter()) {
            assert!((o - b).abs() < 1e-5);
        }
    }

    #[test]
    fn batchnorm_rejects_tiny_training_batch() {
        let batch = Array2::zeros((1, 4));
        let mut params = BatchNormParams::identity(4);
        match batchnorm_forward(&batch, &mut params, true) {
            Err(NnError::BatchTooSmall(1)) => {}
            other => panic!("expected BatchTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn dropout_zero_rate_is_identity() {
        let x = Array2::from_elem((3, 5), 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (out, mask) = dropout_forward(&x, 0.0, true, &mut rng).unwrap();
        assert_eq!(out, x);
        assert!(mask.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dropout_inference_is_identity() {
        let x = Array2::from_elem((3, 5), -0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (out, _) = dropout_forward(&x, 0.9, false, &mut rng).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn dropout_rejects_rate_one() {
        let x = Array2::zeros((1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(dropout_forward(&x, 1.0, true, &mut rng).is_err());
    }

    #[test]
    fn dropout_survivor_statistics() {
        let x = Array2::from_elem((100, 1000), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (out, mask) = dropout_forward(&x, 0.5, true, &mut rng).unwrap();
        let survivors = mask.iter().filter(|&&m| m == 1.0).count() as f64 / mask.len() as f64;
        assert!((0.49..=0.51).contains(&survivors), "survivor fraction {survivors}");
        let mean = out.sum() / out.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "E[out] {mean}");
    }

    #[test]
    fn flat_round_trip() {
        let mut config = ModelConfig::two_stream(20);
        config.fc_dim = 3;
        let mut params = ModelParams::zeros(config).unwrap();
        let n = params.n_learnable();
        let flat: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        params.assign_flat(&flat);
        assert_eq!(params.to_flat(), flat);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn dimension_algebra(
            n_t in 10usize..200,
            i in 1usize..4,
            j in 1usize..4,
        ) {
            let x = Array2::zeros((20, n_t));
            let w = Array2::zeros((i, 20));
            let spatial = spatial_conv_forward(&x, &w, &Array1::zeros(i)).unwrap();
            prop_assert_eq!(spatial.dim(), (i, n_t));
            let tw = Array3::zeros((j, i, TEMPORAL_KERNEL_WIDTH));
            let temporal = temporal_conv_forward(&spatial, &tw, &Array1::zeros(j)).unwrap();
            prop_assert_eq!(temporal.dim(), (j, n_t - 9));
            let mut config = ModelConfig::two_stream(n_t);
            config.spatial_kernels = i;
            config.temporal_kernels = j;
            prop_assert_eq!(config.concat_len(), 2 * j * (n_t - 9));
        }
    }
}
