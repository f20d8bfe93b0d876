//! Backpropagation of the mean binary cross-entropy over a training batch.

use ndarray::{Array1, Array2, Array3};
use rayon::prelude::*;

use super::forward::{ForwardCache, StreamCache};
use super::{Activation, ConvBlockParams, ModelParams, NnError, TEMPORAL_KERNEL_WIDTH};

/// Gradients share the parameter container: every learnable array holds the
/// corresponding `∂(mean BCE)/∂θ`, and batch-norm running statistics are
/// left at zero.
pub type ModelGrads = ModelParams;

fn grad_container(params: &ModelParams) -> ModelGrads {
    let mut g = ModelParams::zeros(params.config).expect("params config already validated");
    if let Some(bn) = &mut g.bn {
        bn.gamma.fill(0.0);
        bn.running_var.fill(0.0);
    }
    g
}

struct StreamGrads {
    spatial_weights: Array2<f64>,
    spatial_bias: Array1<f64>,
    temporal_weights: Array3<f64>,
    temporal_bias: Array1<f64>,
}

/// Backward through one stream for one sample: from the gradient on the
/// post-activation temporal maps down to the conv parameter gradients.
fn stream_backward(
    cache: &StreamCache,
    block: &ConvBlockParams,
    act: Activation,
    d_temporal_post: &[f64],
) -> StreamGrads {
    let (n_maps, n_t) = cache.spatial_post.dim();
    let n_temporal = block.temporal_bias.len();
    let out_len = n_t - TEMPORAL_KERNEL_WIDTH + 1;

    // activation backward on the temporal pre-activations
    let mut d_tp = Array2::zeros((n_temporal, out_len));
    for k in 0..n_temporal {
        let pre_row = cache.temporal_pre.row(k);
        let pre = pre_row.as_slice().unwrap();
        let upstream = &d_temporal_post[k * out_len..(k + 1) * out_len];
        let mut row = d_tp.row_mut(k);
        let dst = row.as_slice_mut().unwrap();
        for ((d, &u), &p) in dst.iter_mut().zip(upstream.iter()).zip(pre.iter()) {
            *d = u * act.derivative(p);
        }
    }

    // temporal conv: weight/bias gradients and gradient on spatial_post
    let mut g_tw = Array3::zeros((n_temporal, n_maps, TEMPORAL_KERNEL_WIDTH));
    let mut g_tb = Array1::zeros(n_temporal);
    let mut d_spatial_post = Array2::zeros((n_maps, n_t));
    for k in 0..n_temporal {
        let dk_row = d_tp.row(k);
        let dk = dk_row.as_slice().unwrap();
        g_tb[k] = dk.iter().sum();
        for m in 0..n_maps {
            let sp_row = cache.spatial_post.row(m);
            let sp = sp_row.as_slice().unwrap();
            let mut dsp_row = d_spatial_post.row_mut(m);
            let dsp = dsp_row.as_slice_mut().unwrap();
            for tau in 0..TEMPORAL_KERNEL_WIDTH {
                let mut acc = 0.0;
                for (d, s) in dk.iter().zip(sp[tau..tau + out_len].iter()) {
                    acc += d * s;
                }
                g_tw[[k, m, tau]] = acc;
                let w = block.temporal_weights[[k, m, tau]];
                for (dst, d) in dsp[tau..tau + out_len].iter_mut().zip(dk.iter()) {
                    *dst += w * d;
                }
            }
        }
    }

    // activation backward on the spatial pre-activations
    let mut d_sp = d_spatial_post;
    for (d, &p) in d_sp.iter_mut().zip(cache.spatial_pre.iter()) {
        *d *= act.derivative(p);
    }

    // spatial conv: weight/bias gradients
    let n_ch = cache.input.nrows();
    let n_spatial = block.spatial_bias.len();
    let mut g_sw = Array2::zeros((n_spatial, n_ch));
    let mut g_sb = Array1::zeros(n_spatial);
    for k in 0..n_spatial {
        let dk_row = d_sp.row(k);
        let dk = dk_row.as_slice().unwrap();
        g_sb[k] = dk.iter().sum();
        for c in 0..n_ch {
            let x_row = cache.input.row(c);
            let x = x_row.as_slice().unwrap();
            let mut acc = 0.0;
            for (d, s) in dk.iter().zip(x.iter()) {
                acc += d * s;
            }
            g_sw[[k, c]] = acc;
        }
    }

    StreamGrads { spatial_weights: g_sw, spatial_bias: g_sb, temporal_weights: g_tw, temporal_bias: g_tb }
}

fn accumulate(into: &mut ConvBlockParams, from: &StreamGrads) {
    into.spatial_weights += &from.spatial_weights;
    into.spatial_bias += &from.spatial_bias;
    into.temporal_weights += &from.temporal_weights;
    into.temporal_bias += &from.temporal_bias;
}

/// Gradients of the mean BCE over the batch that produced `cache`.
///
/// `yhat` must be the probabilities returned by the matching
/// [`super::batch_forward`] call; dropout and batch-norm backward use the
/// mask and batch statistics stored in the cache.
pub fn model_backward(
    cache: &ForwardCache,
    yhat: &[f64],
    labels: &[u8],
    params: &ModelParams,
) -> Result<ModelGrads, NnError> {
    let b_sz = cache.samples.len();
    if yhat.len() != b_sz || labels.len() != b_sz {
        return Err(NnError::CacheMismatch(format!(
            "cache holds {b_sz} samples, got {} predictions / {} labels",
            yhat.len(),
            labels.len()
        )));
    }
    let cfg = &params.config;
    if cache.head_input.dim() != (b_sz, cfg.head_in()) {
        return Err(NnError::CacheMismatch(format!(
            "head input is {:?}, model expects {}×{}",
            cache.head_input.dim(),
            b_sz,
            cfg.head_in()
        )));
    }
    if cfg.fc_dim > 0 && (cache.hidden_pre.is_none() || cache.bn.is_none()) {
        return Err(NnError::CacheMismatch(
            "cache lacks hidden-layer intermediates required by this model".into(),
        ));
    }
    let mut grads = grad_container(params);
    let bf = b_sz as f64;

    // mean BCE through the sigmoid: ∂L/∂logit_b = (ŷ_b − y_b) / B
    let d_logit: Vec<f64> = yhat
        .iter()
        .zip(labels.iter())
        .map(|(&p, &y)| (p - f64::from(y)) / bf)
        .collect();

    // output layer
    let head_in = cfg.head_in();
    let mut g_out_w = Array1::zeros(head_in);
    let mut g_out_b = 0.0;
    for (b, &dl) in d_logit.iter().enumerate() {
        g_out_b += dl;
        let row = cache.head_input.row(b);
        let row = row.as_slice().unwrap();
        for (g, h) in g_out_w.iter_mut().zip(row.iter()) {
            *g += dl * h;
        }
    }
    // gradient flowing into the head input
    let mut d_head = Array2::zeros((b_sz, head_in));
    let w_out = params.fc_out_weights.as_slice().unwrap();
    for (b, &dl) in d_logit.iter().enumerate() {
        let mut row = d_head.row_mut(b);
        let dst = row.as_slice_mut().unwrap();
        for (d, w) in dst.iter_mut().zip(w_out.iter()) {
            *d = dl * w;
        }
    }
    grads.fc_out_weights = g_out_w;
    grads.fc_out_bias = g_out_b;

    let d_concat: Array2<f64> = if cfg.fc_dim > 0 {
        let d = cfg.fc_dim;
        // dropout backward: zeroed units pass nothing, survivors keep scale
        let mask = cache
            .dropout_mask
            .as_ref()
            .ok_or_else(|| NnError::CacheMismatch("missing dropout mask".into()))?;
        let scale = 1.0 / (1.0 - cache.dropout_rate);
        let mut d_bn_out = d_head;
        for (dv, m) in d_bn_out.iter_mut().zip(mask.iter()) {
            *dv *= m * scale;
        }

        // batch norm backward over batch statistics
        let bn_cache = cache.bn.as_ref().expect("checked above");
        let bn = params.bn.as_ref().expect("fc_dim > 0 implies batch norm");
        let mut d_post = Array2::zeros((b_sz, d));
        for j in 0..d {
            let mut g_gamma = 0.0;
            let mut g_beta = 0.0;
            for b in 0..b_sz {
                g_gamma += d_bn_out[[b, j]] * bn_cache.xhat[[b, j]];
                g_beta += d_bn_out[[b, j]];
            }
            let bn_grads = grads.bn.as_mut().expect("grad container mirrors params");
            bn_grads.gamma[j] = g_gamma;
            bn_grads.beta[j] = g_beta;
            let mean_dxhat = g_beta * bn.gamma[j] / bf;
            let mean_dxhat_xhat = g_gamma * bn.gamma[j] / bf;
            for b in 0..b_sz {
                let dxhat = d_bn_out[[b, j]] * bn.gamma[j];
                d_post[[b, j]] = bn_cache.inv_std[j]
                    * (dxhat - mean_dxhat - bn_cache.xhat[[b, j]] * mean_dxhat_xhat);
            }
        }

        // activation backward on hidden pre-activations
        let hidden_pre = cache.hidden_pre.as_ref().expect("checked above");
        let mut d_hidden_pre = d_post;
        for (dv, &p) in d_hidden_pre.iter_mut().zip(hidden_pre.iter()) {
            *dv *= cfg.activation.derivative(p);
        }

        // hidden FC gradients and gradient on the concatenation
        let fc = params.fc_hidden.as_ref().expect("fc_dim > 0 implies hidden layer");
        let concat_len = cfg.concat_len();
        let g_fc = grads.fc_hidden.as_mut().expect("grad container mirrors params");
        let gw = g_fc.weights.as_slice_mut().unwrap();
        let w = fc.weights.as_slice().unwrap();
        let mut d_concat = Array2::zeros((b_sz, concat_len));
        for b in 0..b_sz {
            let dh_row = d_hidden_pre.row(b);
            let dh = dh_row.as_slice().unwrap();
            for (g, d) in g_fc.bias.iter_mut().zip(dh.iter()) {
                *g += d;
            }
            let c_row = cache.concat.row(b);
            let c = c_row.as_slice().unwrap();
            let mut dc_row = d_concat.row_mut(b);
            let dc = dc_row.as_slice_mut().unwrap();
            for k in 0..concat_len {
                let ck = c[k];
                let wrow = &w[k * d..(k + 1) * d];
                let grow = &mut gw[k * d..(k + 1) * d];
                let mut acc = 0.0;
                for ((g, &wv), &dv) in grow.iter_mut().zip(wrow.iter()).zip(dh.iter()) {
                    *g += ck * dv;
                    acc += wv * dv;
                }
                dc[k] = acc;
            }
        }
        d_concat
    } else {
        d_head
    };

    // split the concat gradient per stream and push through the conv stacks;
    // per-sample work is parallel, reduction order fixed by sample index
    let feat = cfg.feature_len();
    let per_sample_one = |(b, sample): (usize, &super::forward::SampleCache)| {
        let row = d_concat.row(b);
        let row = row.as_slice().unwrap();
        let mut offset = 0;
        let mi = sample.mi.as_ref().map(|sc| {
            let block = params.mi_block.as_ref().expect("cache matches params");
            let g = stream_backward(sc, block, cfg.activation, &row[..feat]);
            offset += feat;
            g
        });
        let ssvep = sample.ssvep.as_ref().map(|sc| {
            let block = params.ssvep_block.as_ref().expect("cache matches params");
            stream_backward(sc, block, cfg.activation, &row[offset..offset + feat])
        });
        (mi, ssvep)
    };
    let per_sample: Vec<(Option<StreamGrads>, Option<StreamGrads>)> = if b_sz < 8 {
        cache.samples.iter().enumerate().map(per_sample_one).collect()
    } else {
        cache.samples.par_iter().enumerate().map(per_sample_one).collect()
    };
    for (mi, ssvep) in &per_sample {
        if let (Some(g), Some(into)) = (mi, grads.mi_block.as_mut()) {
            accumulate(into, g);
        }
        if let (Some(g), Some(into)) = (ssvep, grads.ssvep_block.as_mut()) {
            accumulate(into, g);
        }
    }

    Ok(grads)
}
