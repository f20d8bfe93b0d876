//! Dataset model, channel montages, splitting, synthetic EEG, and the
//! `EEGD` on-disk format.

mod io;
mod synth;

pub use io::{load_dataset, save_dataset};
pub use synth::{synth_dataset, synth_trial, SynthConfig};

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("channel '{0}' not found in dataset channel names")]
    MissingChannel(String),
    #[error("dataset has {available} distinct subjects, need at least {requested}")]
    TooFewSubjects { requested: usize, available: usize },
    #[error("k-fold requires 2 <= k <= trial count, got k={k} with {trials} trials")]
    BadFoldCount { k: usize, trials: usize },
    #[error("invalid synthesis config: {0}")]
    InvalidSynthConfig(String),
    #[error("trial {index} violates dataset invariants: {reason}")]
    InconsistentTrial { index: usize, reason: String },
    #[error("montage invalid: {0}")]
    InvalidMontage(String),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes: expected \"EEGD\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated dataset file: {0}")]
    Truncated(String),
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),
    #[error("invalid field value in dataset file: {0}")]
    InvalidField(String),
}

impl DataError {
    pub fn class(&self) -> ErrorClass {
        match self {
            DataError::TooFewSubjects { .. }
            | DataError::BadFoldCount { .. }
            | DataError::InvalidSynthConfig(_)
            | DataError::InvalidMontage(_) => ErrorClass::Config,
            DataError::Dsp(e) => e.class(),
            _ => ErrorClass::Data,
        }
    }
}

/// Recording paradigm for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    Mi,
    Ssvep,
    Hybrid,
}

impl Mode {
    pub fn to_u8(self) -> u8 {
        match self {
            Mode::Mi => 0,
            Mode::Ssvep => 1,
            Mode::Hybrid => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Mode> {
        match v {
            0 => Some(Mode::Mi),
            1 => Some(Mode::Ssvep),
            2 => Some(Mode::Hybrid),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Mi => write!(f, "MI"),
            Mode::Ssvep => write!(f, "SSVEP"),
            Mode::Hybrid => write!(f, "Hybrid"),
        }
    }
}

/// One epoch: channels × time, with its class label (0 = left, 1 = right).
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// channels × N_t, microvolts.
    pub data: Array2<f32>,
    pub label: u8,
    pub subject_id: u16,
    pub mode: Mode,
}

/// Ordered trial collection sharing a sampling rate and montage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trials: Vec<Trial>,
    pub fs_hz: f32,
    pub channel_names: Vec<String>,
}

impl Dataset {
    pub fn new(trials: Vec<Trial>, fs_hz: f32, channel_names: Vec<String>) -> Result<Self, DataError> {
        let ds = Dataset { trials, fs_hz, channel_names };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let n_ch = self.channel_names.len();
        let n_t = self.trials.first().map(|t| t.data.ncols());
        for (i, t) in self.trials.iter().enumerate() {
            if t.data.nrows() != n_ch {
                return Err(DataError::InconsistentTrial {
                    index: i,
                    reason: format!("{} channels, dataset has {}", t.data.nrows(), n_ch),
                });
            }
            if Some(t.data.ncols()) != n_t {
                return Err(DataError::InconsistentTrial {
                    index: i,
                    reason: format!("{} samples, first trial has {}", t.data.ncols(), n_t.unwrap()),
                });
            }
            if t.label > 1 {
                return Err(DataError::InconsistentTrial {
                    index: i,
                    reason: format!("label {} not in {{0,1}}", t.label),
                });
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(DataError::InconsistentTrial {
                    index: i,
                    reason: "non-finite sample value".into(),
                });
            }
        }
        Ok(())
    }

    /// Samples per trial, 0 for an empty dataset.
    pub fn n_t(&self) -> usize {
        self.trials.first().map_or(0, |t| t.data.ncols())
    }

    /// Distinct subject ids in ascending order.
    pub fn subject_ids(&self) -> Vec<u16> {
        let set: BTreeSet<u16> = self.trials.iter().map(|t| t.subject_id).collect();
        set.into_iter().collect()
    }
}

/// The electrode subsets feeding the two network streams.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelMontage {
    pub motor: Vec<String>,
    pub occipital: Vec<String>,
}

impl ChannelMontage {
    /// 20 motor-cortex electrodes and 10 occipital electrodes.
    pub fn standard() -> Self {
        let motor = [
            "FC5", "FC3", "FC1", "FC2", "FC4", "FC6", "C5", "C3", "C1", "Cz", "C2", "C4", "C6",
            "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
        ];
        let occipital = ["P7", "P3", "Pz", "P4", "P8", "PO9", "PO10", "O1", "Oz", "O2"];
        ChannelMontage {
            motor: motor.iter().map(|s| s.to_string()).collect(),
            occipital: occipital.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.motor.len() != 20 {
            return Err(DataError::InvalidMontage(format!(
                "motor montage has {} channels, expected 20",
                self.motor.len()
            )));
        }
        if self.occipital.len() != 10 {
            return Err(DataError::InvalidMontage(format!(
                "occipital montage has {} channels, expected 10",
                self.occipital.len()
            )));
        }
        for m in &self.motor {
            if self.occipital.contains(m) {
                return Err(DataError::InvalidMontage(format!(
                    "channel '{m}' appears in both motor and occipital sets"
                )));
            }
        }
        Ok(())
    }
}

/// One two-stream network input: the MI-channel matrix, the SSVEP-channel
/// matrix, and the class label.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamPair {
    /// 20 × N_t motor-channel stream.
    pub x_m: Array2<f64>,
    /// 10 × N_t occipital-channel stream.
    pub x_s: Array2<f64>,
    pub label: u8,
}

impl StreamPair {
    pub fn n_t(&self) -> usize {
        self.x_m.ncols()
    }
}

/// Extracts the montage channels of a trial into the two stream matrices,
/// in montage order. Values are copied unchanged.
pub fn select_streams(
    trial: &Trial,
    montage: &ChannelMontage,
    channel_names: &[String],
) -> Result<StreamPair, DataError> {
    let lookup = |label: &String| -> Result<usize, DataError> {
        channel_names
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| DataError::MissingChannel(label.clone()))
    };
    let n_t = trial.data.ncols();
    let mut x_m = Array2::zeros((montage.motor.len(), n_t));
    for (row, label) in montage.motor.iter().enumerate() {
        let src = lookup(label)?;
        for (dst, v) in x_m.row_mut(row).iter_mut().zip(trial.data.row(src).iter()) {
            *dst = f64::from(*v);
        }
    }
    let mut x_s = Array2::zeros((montage.occipital.len(), n_t));
    for (row, label) in montage.occipital.iter().enumerate() {
        let src = lookup(label)?;
        for (dst, v) in x_s.row_mut(row).iter_mut().zip(trial.data.row(src).iter()) {
            *dst = f64::from(*v);
        }
    }
    Ok(StreamPair { x_m, x_s, label: trial.label })
}

/// Partitions trials into train/test by subject. Subjects are shuffled under
/// the seed and the first `train_subjects` go to the training set.
pub fn split_by_subject(
    ds: &Dataset,
    train_subjects: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let subjects = ds.subject_ids();
    if subjects.len() < train_subjects {
        return Err(DataError::TooFewSubjects {
            requested: train_subjects,
            available: subjects.len(),
        });
    }
    let mut shuffled = subjects;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let train_ids: BTreeSet<u16> = shuffled[..train_subjects].iter().copied().collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for t in &ds.trials {
        if train_ids.contains(&t.subject_id) {
            train.push(t.clone());
        } else {
            test.push(t.clone());
        }
    }
    Ok((
        Dataset { trials: train, fs_hz: ds.fs_hz, channel_names: ds.channel_names.clone() },
        Dataset { trials: test, fs_hz: ds.fs_hz, channel_names: ds.channel_names.clone() },
    ))
}

/// Per-fold index sets: (train indices, validation indices).
pub type FoldIndices = Vec<(Vec<usize>, Vec<usize>)>;

/// Stratified k-fold split over trial indices: folds are disjoint,
/// exhaustive, sized within one trial of each other, and each fold's class
/// counts match the global ratio within one trial.
pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldIndices, DataError> {
    kfold_labels(&ds.trials.iter().map(|t| t.label).collect::<Vec<_>>(), k, seed)
}

/// [`kfold`] on a bare label list; used for index sets over sample
/// collections that are not `Dataset`s.
pub fn kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<FoldIndices, DataError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(DataError::BadFoldCount { k, trials: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Deal each class round-robin; the starting fold advances across classes
    // so remainders don't pile onto fold 0.
    let mut next_fold = 0usize;
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next_fold].push(i);
            next_fold = (next_fold + 1) % k;
        }
    }
    let mut out = Vec::with_capacity(k);
    for fold in &folds {
        let mut val = fold.clone();
        val.sort_unstable();
        let mut train: Vec<usize> = (0..n).collect();
        train.retain(|i| val.binary_search(i).is_err());
        out.push((train, val));
    }
    Ok(out)
}
