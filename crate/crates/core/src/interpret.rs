//! Connection-weight interpretation and per-layer feature extraction.
//!
//! The fusion concatenation is laid out MI half first, SSVEP half second, so
//! the hidden FC weight matrix splits row-wise into the weights fed by each
//! stream. Counting entries above a threshold per half (N_M, N_S) and taking
//! their ratio quantifies how strongly each stream is represented.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array1;

use crate::data::StreamPair;
use crate::nn::{model_forward_traced, ModelParams, NnError, Streams};
use crate::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum InterpretError {
    #[error("model has no fusion FC layer (fc_dim = 0); weight-ratio analysis needs one")]
    NoFusionLayer,
    #[error("weight-ratio analysis needs a two-stream model, this one is single-stream")]
    SingleStreamModel,
    #[error("invalid layer tag '{given}'; valid tags: {valid}")]
    InvalidTag { given: String, valid: String },
    #[error("layer '{tag}' does not exist in this model: {reason}")]
    TagUnavailable { tag: LayerTag, reason: String },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("feature dump i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature dump file malformed: {0}")]
    Malformed(String),
}

impl InterpretError {
    pub fn class(&self) -> ErrorClass {
        match self {
            InterpretError::Io(_) | InterpretError::Malformed(_) => ErrorClass::Data,
            InterpretError::Nn(e) => e.class(),
            _ => ErrorClass::Config,
        }
    }
}

/// Thresholds used in the reference analysis.
pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.0025, 0.005, 0.0075, 0.01, 0.0125];

/// Counts for one threshold; `ratio` is absent when `n_s` is zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThresholdCounts {
    pub threshold: f64,
    pub n_m: usize,
    pub n_s: usize,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightRatioReport {
    pub rows: Vec<ThresholdCounts>,
}

impl WeightRatioReport {
    /// Plain-text table: threshold, N_M, N_S, ratio.
    pub fn to_table(&self) -> String {
        let mut out = String::from("threshold      N_M      N_S    ratio\n");
        for r in &self.rows {
            let ratio = r.ratio.map_or("   n/a".to_string(), |v| format!("{v:8.3}"));
            out.push_str(&format!("{:9.4} {:8} {:8} {ratio}\n", r.threshold, r.n_m, r.n_s));
        }
        out.push_str(&format!("ratio trend across thresholds: {}\n", self.trend()));
        out
    }

    /// Direction of the ratio over increasing thresholds ("rising",
    /// "falling", "flat", or "n/a" when fewer than two ratios exist). A
    /// rising trend means large fusion weights increasingly favor the MI
    /// half.
    pub fn trend(&self) -> &'static str {
        let defined: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        if defined.len() < 2 {
            return "n/a";
        }
        let (first, last) = (defined[0], defined[defined.len() - 1]);
        if last > first * 1.001 {
            "rising"
        } else if last < first * 0.999 {
            "falling"
        } else {
            "flat"
        }
    }
}

/// Counts hidden-FC input weights with `|w| > θ`, split by the stream half
/// that feeds them.
pub fn weight_ratio(
    params: &ModelParams,
    thresholds: &[f64],
) -> Result<WeightRatioReport, InterpretError> {
    let cfg = &params.config;
    if cfg.streams != Streams::Both {
        return Err(InterpretError::SingleStreamModel);
    }
    let fc = params.fc_hidden.as_ref().ok_or(InterpretError::NoFusionLayer)?;
    let feat = cfg.feature_len();
    let mi_half = fc.weights.slice(ndarray::s![..feat, ..]);
    let ssvep_half = fc.weights.slice(ndarray::s![feat.., ..]);
    let rows = thresholds
        .iter()
        .map(|&threshold| {
            let n_m = mi_half.iter().filter(|w| w.abs() > threshold).count();
            let n_s = ssvep_half.iter().filter(|w| w.abs() > threshold).count();
            let ratio = (n_s > 0).then(|| n_m as f64 / n_s as f64);
            ThresholdCounts { threshold, n_m, n_s, ratio }
        })
        .collect();
    Ok(WeightRatioReport { rows })
}

/// Layers whose activations can be dumped for external embedding tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerTag {
    MiInput,
    MiSpatial,
    MiTemporal,
    SsvepInput,
    SsvepSpatial,
    SsvepTemporal,
    FusionFc,
}

impl LayerTag {
    pub const ALL: [LayerTag; 7] = [
        LayerTag::MiInput,
        LayerTag::MiSpatial,
        LayerTag::MiTemporal,
        LayerTag::SsvepInput,
        LayerTag::SsvepSpatial,
        LayerTag::SsvepTemporal,
        LayerTag::FusionFc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayerTag::MiInput => "mi_input",
            LayerTag::MiSpatial => "mi_spatial",
            LayerTag::MiTemporal => "mi_temporal",
            LayerTag::SsvepInput => "ssvep_input",
            LayerTag::SsvepSpatial => "ssvep_spatial",
            LayerTag::SsvepTemporal => "ssvep_temporal",
            LayerTag::FusionFc => "fusion_fc",
        }
    }

    pub fn parse(s: &str) -> Result<LayerTag, InterpretError> {
        Self::ALL
            .iter()
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| InterpretError::InvalidTag {
                given: s.to_string(),
                valid: Self::ALL.map(|t| t.as_str()).join(", "),
            })
    }
}

impl std::fmt::Display for LayerTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// One layer's features for every trial, plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDump {
    pub layer: LayerTag,
    pub dim: usize,
    /// Per trial: (label, flattened feature vector).
    pub features: Vec<(u8, Vec<f32>)>,
}

fn extract_features(
    pair: &StreamPair,
    params: &ModelParams,
    tag: LayerTag,
) -> Result<Vec<f32>, InterpretError> {
    let unavailable = |reason: &str| InterpretError::TagUnavailable {
        tag,
        reason: reason.to_string(),
    };
    let to_f32 = |v: &f64| *v as f32;
    match tag {
        LayerTag::MiInput => {
            if params.mi_block.is_none() {
                return Err(unavailable("model has no MI block"));
            }
            Ok(pair.x_m.iter().map(to_f32).collect())
        }
        LayerTag::SsvepInput => {
            if params.ssvep_block.is_none() {
                return Err(unavailable("model has no SSVEP block"));
            }
            Ok(pair.x_s.iter().map(to_f32).collect())
        }
        _ => {
            let trace = model_forward_traced(pair, params)?;
            let arr2 = |a: Option<ndarray::Array2<f64>>, reason: &str| {
                a.map(|m| m.iter().map(to_f32).collect::<Vec<f32>>())
                    .ok_or_else(|| unavailable(reason))
            };
            let arr1 = |a: Option<Array1<f64>>, reason: &str| {
                a.map(|m| m.iter().map(to_f32).collect::<Vec<f32>>())
                    .ok_or_else(|| unavailable(reason))
            };
            match tag {
                LayerTag::MiSpatial => arr2(trace.mi_spatial, "model has no MI block"),
                LayerTag::MiTemporal => arr2(trace.mi_temporal, "model has no MI block"),
                LayerTag::SsvepSpatial => arr2(trace.ssvep_spatial, "model has no SSVEP block"),
                LayerTag::SsvepTemporal => arr2(trace.ssvep_temporal, "model has no SSVEP block"),
                LayerTag::FusionFc => arr1(trace.fusion_hidden, "model has no hidden FC layer"),
                _ => unreachable!("input tags handled above"),
            }
        }
    }
}

/// Runs inference-mode forwards over the samples and captures the named
/// layer's activations per trial.
pub fn dump_features(
    params: &ModelParams,
    samples: &[StreamPair],
    tag: LayerTag,
) -> Result<FeatureDump, InterpretError> {
    let mut features = Vec::with_capacity(samples.len());
    let mut dim = None;
    for pair in samples {
        let v = extract_features(pair, params, tag)?;
        match dim {
            None => dim = Some(v.len()),
            Some(d) => {
                if v.len() != d {
                    return Err(InterpretError::Malformed(format!(
                        "inconsistent feature dimension: {d} vs {}",
                        v.len()
                    )));
                }
            }
        }
        features.push((pair.label, v));
    }
    Ok(FeatureDump { layer: tag, dim: dim.unwrap_or(0), features })
}

const FEAT_MAGIC: [u8; 4] = *b"FEAT";
const FEAT_VERSION: u32 = 1;

/// Writes a dump: magic "FEAT", version u32, tag string (u8 length + UTF-8),
/// n_trials u32, dim u32, then per trial a label byte and `dim` f32 values.
/// Little-endian throughout.
pub fn save_feature_dump(dump: &FeatureDump, path: &Path) -> Result<(), InterpretError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&FEAT_MAGIC)?;
    w.write_all(&FEAT_VERSION.to_le_bytes())?;
    let tag = dump.layer.as_str().as_bytes();
    w.write_all(&[tag.len() as u8])?;
    w.write_all(tag)?;
    w.write_all(&(dump.features.len() as u32).to_le_bytes())?;
    w.write_all(&(dump.dim as u32).to_le_bytes())?;
    for (label, v) in &dump.features {
        w.write_all(&[*label])?;
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_feature_dump(path: &Path) -> Result<FeatureDump, InterpretError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 4];
    r.read_exact(&mut head).map_err(|_| InterpretError::Malformed("short magic".into()))?;
    if head != FEAT_MAGIC {
        return Err(InterpretError::Malformed(format!("bad magic {head:?}")));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf).map_err(|_| InterpretError::Malformed("short version".into()))?;
    let version = u32::from_le_bytes(u32buf);
    if version != FEAT_VERSION {
        return Err(InterpretError::Malformed(format!("unsupported version {version}")));
    }
    let mut len = [0u8; 1];
    r.read_exact(&mut len).map_err(|_| InterpretError::Malformed("short tag".into()))?;
    let mut tag_bytes = vec![0u8; len[0] as usize];
    r.read_exact(&mut tag_bytes).map_err(|_| InterpretError::Malformed("short tag".into()))?;
    let tag_str = String::from_utf8(tag_bytes)
        .map_err(|_| InterpretError::Malformed("tag not UTF-8".into()))?;
    let layer = LayerTag::parse(&tag_str)?;
    r.read_exact(&mut u32buf).map_err(|_| InterpretError::Malformed("short count".into()))?;
    let n = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf).map_err(|_| InterpretError::Malformed("short dim".into()))?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    let mut features = Vec::with_capacity(n);
    let mut buf = vec![0u8; dim * 4];
    for i in 0..n {
        let mut label = [0u8; 1];
        r.read_exact(&mut label)
            .map_err(|_| InterpretError::Malformed(format!("short trial {i}")))?;
        r.read_exact(&mut buf)
            .map_err(|_| InterpretError::Malformed(format!("short trial {i}")))?;
        let v = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        features.push((label[0], v));
    }
    Ok(FeatureDump { layer, dim, features })
}
