//! Model forward passes: a cached batch-level pass for training and a pure
//! single-sample pass for inference.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;

use crate::data::StreamPair;

use super::{
    activation_forward, batchnorm_forward, dropout_forward, sigmoid, spatial_conv_forward,
    temporal_conv_forward, Activation, BnCache, ConvBlockParams, ModelParams, NnError,
};

/// Per-stream intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StreamCache {
    pub input: Array2<f64>,
    pub spatial_pre: Array2<f64>,
    pub spatial_post: Array2<f64>,
    pub temporal_pre: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct SampleCache {
    pub mi: Option<StreamCache>,
    pub ssvep: Option<StreamCache>,
}

/// Everything the backward pass needs from a training-mode forward.
#[derive(Debug)]
pub struct ForwardCache {
    pub samples: Vec<SampleCache>,
    /// B × concat_len post-activation fused features.
    pub concat: Array2<f64>,
    /// B × d hidden pre-activations (absent when `fc_dim == 0`).
    pub hidden_pre: Option<Array2<f64>>,
    pub bn: Option<BnCache>,
    /// B × d survival indicators.
    pub dropout_mask: Option<Array2<f64>>,
    pub dropout_rate: f64,
    /// B × head_in input to the output layer.
    pub head_input: Array2<f64>,
}

fn check_stream_shape(
    x: &Array2<f64>,
    n_ch: usize,
    n_t: usize,
    what: &'static str,
) -> Result<(), NnError> {
    if x.dim() != (n_ch, n_t) {
        return Err(NnError::ShapeMismatch {
            what,
            expected: format!("{n_ch}×{n_t}"),
            actual: format!("{}×{}", x.nrows(), x.ncols()),
        });
    }
    Ok(())
}

fn stream_forward(
    x: &Array2<f64>,
    block: &ConvBlockParams,
    act: Activation,
) -> Result<(StreamCache, Array2<f64>), NnError> {
    let spatial_pre = spatial_conv_forward(x, &block.spatial_weights, &block.spatial_bias)?;
    let spatial_post = activation_forward(&spatial_pre, act);
    let temporal_pre =
        temporal_conv_forward(&spatial_post, &block.temporal_weights, &block.temporal_bias)?;
    let temporal_post = activation_forward(&temporal_pre, act);
    let cache = StreamCache { input: x.clone(), spatial_pre, spatial_post, temporal_pre };
    Ok((cache, temporal_post))
}

fn sample_features(
    pair: &StreamPair,
    params: &ModelParams,
) -> Result<(SampleCache, Vec<f64>), NnError> {
    let cfg = &params.config;
    let mut features = Vec::with_capacity(cfg.concat_len());
    let mut cache = SampleCache { mi: None, ssvep: None };
    if let Some(block) = &params.mi_block {
        check_stream_shape(&pair.x_m, cfg.mi_channels, cfg.n_t, "MI stream input")?;
        let (sc, post) = stream_forward(&pair.x_m, block, cfg.activation)?;
        features.extend(post.iter().copied());
        cache.mi = Some(sc);
    }
    if let Some(block) = &params.ssvep_block {
        check_stream_shape(&pair.x_s, cfg.ssvep_channels, cfg.n_t, "SSVEP stream input")?;
        let (sc, post) = stream_forward(&pair.x_s, block, cfg.activation)?;
        features.extend(post.iter().copied());
        cache.ssvep = Some(sc);
    }
    Ok((cache, features))
}

/// Hidden FC: `out[b] = concat[b] · W + bias`, summation running over the
/// concat index in a fixed order.
fn dense_forward(concat: &Array2<f64>, weights: &Array2<f64>, bias: &Array1<f64>) -> Array2<f64> {
    let (b_sz, in_len) = concat.dim();
    let d = bias.len();
    let mut out = Array2::zeros((b_sz, d));
    let w = weights.as_slice().unwrap();
    for (row_in, mut row_out) in concat.outer_iter().zip(out.outer_iter_mut()) {
        let src = row_in.as_slice().unwrap();
        let dst = row_out.as_slice_mut().unwrap();
        dst.copy_from_slice(bias.as_slice().unwrap());
        for k in 0..in_len {
            let c = src[k];
            let wrow = &w[k * d..(k + 1) * d];
            for (o, wv) in dst.iter_mut().zip(wrow.iter()) {
                *o += c * wv;
            }
        }
    }
    out
}

fn output_logit(head_row: &[f64], params: &ModelParams) -> f64 {
    let w = params.fc_out_weights.as_slice().unwrap();
    let mut acc = params.fc_out_bias;
    for (h, wv) in head_row.iter().zip(w.iter()) {
        acc += h * wv;
    }
    acc
}

/// Training-mode forward over a mini-batch. Batch normalization uses the
/// batch statistics (updating the running estimates inside `params`), and
/// dropout consumes the supplied rng. Returns the predicted probabilities
/// and the cache consumed by [`super::model_backward`].
pub fn batch_forward(
    pairs: &[&StreamPair],
    params: &mut ModelParams,
    dropout_rate: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, ForwardCache), NnError> {
    let b_sz = pairs.len();
    let cfg = params.config;
    // thread fan-out only pays off for real batches
    let per_sample: Vec<(SampleCache, Vec<f64>)> = {
        let shared: &ModelParams = params;
        if b_sz < 8 {
            pairs.iter().map(|pair| sample_features(pair, shared)).collect::<Result<_, _>>()?
        } else {
            pairs
                .par_iter()
                .map(|pair| sample_features(pair, shared))
                .collect::<Result<_, _>>()?
        }
    };
    let mut samples = Vec::with_capacity(b_sz);
    let mut concat = Array2::zeros((b_sz, cfg.concat_len()));
    for (i, (cache, features)) in per_sample.into_iter().enumerate() {
        concat.row_mut(i).assign(&Array1::from_vec(features));
        samples.push(cache);
    }

    let (head_input, hidden_pre, bn_cache, dropout_mask) = if cfg.fc_dim > 0 {
        let fc = params.fc_hidden.as_ref().expect("fc_dim > 0 implies hidden layer");
        let pre = dense_forward(&concat, &fc.weights, &fc.bias);
        let post = activation_forward(&pre, cfg.activation);
        let bn = params.bn.as_mut().expect("fc_dim > 0 implies batch norm");
        let (normed, bn_cache) = batchnorm_forward(&post, bn, true)?;
        let (dropped, mask) = dropout_forward(&normed, dropout_rate, true, rng)?;
        (dropped, Some(pre), bn_cache, Some(mask))
    } else {
        (concat.clone(), None, None, None)
    };

    let yhat: Vec<f64> = head_input
        .outer_iter()
        .map(|row| sigmoid(output_logit(row.as_slice().unwrap(), params)))
        .collect();

    let cache = ForwardCache {
        samples,
        concat,
        hidden_pre,
        bn: bn_cache,
        dropout_mask,
        dropout_rate,
        head_input,
    };
    Ok((yhat, cache))
}

/// Post-activation intermediates of an inference forward, for feature dumps.
#[derive(Debug, Clone)]
pub struct InferenceTrace {
    pub mi_spatial: Option<Array2<f64>>,
    pub mi_temporal: Option<Array2<f64>>,
    pub ssvep_spatial: Option<Array2<f64>>,
    pub ssvep_temporal: Option<Array2<f64>>,
    /// Hidden layer output after activation and batch norm (absent when
    /// `fc_dim == 0`).
    pub fusion_hidden: Option<Array1<f64>>,
    pub yhat: f64,
}

/// Inference-mode forward for one sample: batch norm runs off the stored
/// running statistics and dropout is inactive, so the result is a pure
/// function of the inputs and parameters.
pub fn model_forward(pair: &StreamPair, params: &ModelParams) -> Result<f64, NnError> {
    Ok(model_forward_traced(pair, params)?.yhat)
}

/// [`model_forward`] that also returns each layer's activations.
pub fn model_forward_traced(
    pair: &StreamPair,
    params: &ModelParams,
) -> Result<InferenceTrace, NnError> {
    let cfg = &params.config;
    let mut trace = InferenceTrace {
        mi_spatial: None,
        mi_temporal: None,
        ssvep_spatial: None,
        ssvep_temporal: None,
        fusion_hidden: None,
        yhat: 0.0,
    };
    let mut features = Vec::with_capacity(cfg.concat_len());
    if let Some(block) = &params.mi_block {
        check_stream_shape(&pair.x_m, cfg.mi_channels, cfg.n_t, "MI stream input")?;
        let (cache, post) = stream_forward(&pair.x_m, block, cfg.activation)?;
        features.extend(post.iter().copied());
        trace.mi_spatial = Some(cache.spatial_post);
        trace.mi_temporal = Some(post);
    }
    if let Some(block) = &params.ssvep_block {
        check_stream_shape(&pair.x_s, cfg.ssvep_channels, cfg.n_t, "SSVEP stream input")?;
        let (cache, post) = stream_forward(&pair.x_s, block, cfg.activation)?;
        features.extend(post.iter().copied());
        trace.ssvep_spatial = Some(cache.spatial_post);
        trace.ssvep_temporal = Some(post);
    }

    let head: Vec<f64> = if cfg.fc_dim > 0 {
        let fc = params.fc_hidden.as_ref().expect("fc_dim > 0 implies hidden layer");
        let bn = params.bn.as_ref().expect("fc_dim > 0 implies batch norm");
        let concat = Array2::from_shape_vec((1, features.len()), features)
            .expect("feature vector length is concat_len");
        let pre = dense_forward(&concat, &fc.weights, &fc.bias);
        let post = activation_forward(&pre, cfg.activation);
        // running-stat normalization, without touching params
        let mut out = Vec::with_capacity(cfg.fc_dim);
        for j in 0..cfg.fc_dim {
            let denom = (bn.running_var[j] + bn.eps).sqrt();
            out.push(bn.gamma[j] * (post[[0, j]] - bn.running_mean[j]) / denom + bn.beta[j]);
        }
        trace.fusion_hidden = Some(Array1::from_vec(out.clone()));
        out
    } else {
        features
    };

    trace.yhat = sigmoid(output_logit(&head, params));
    Ok(trace)
}
