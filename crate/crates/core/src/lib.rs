//! Hybrid brain-computer-interface decoding with a two-stream convolutional
//! network (TSCNN).
//!
//! The crate covers the full offline pipeline for binary left/right decoding
//! from EEG recorded under motor-imagery (MI), steady-state visual evoked
//! potential (SSVEP), and hybrid paradigms:
//!
//! * [`dsp`] — Butterworth bandpass design, zero-phase filtering, epoching.
//! * [`data`] — dataset model, channel montages, splitting, a synthetic EEG
//!   generator, and the `EEGD` on-disk format.
//! * [`nn`] — the two-stream network itself: forward and backward passes over
//!   spatial/temporal convolutions and the fusion head, plus checkpoints.
//! * [`train`] — BCE loss, Adam, training-set construction for the TSCNN and
//!   SCNN strategies, the training loop, and cross-validation.
//! * [`eval`] — accuracy/sensitivity/specificity/MSE and paired t-tests.
//! * [`interpret`] — fusion-layer connection-weight analysis and per-layer
//!   feature dumps for external embedding tools.
//!
//! Everything is deterministic under a fixed seed: the same configuration
//! produces bit-identical parameters, metrics, and files across runs.

pub mod data;
pub mod dsp;
pub mod eval;
pub mod interpret;
pub mod nn;
pub mod train;

/// Crate-wide error type aggregating every module's failure modes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dsp(#[from] dsp::DspError),
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Nn(#[from] nn::NnError),
    #[error(transparent)]
    Train(#[from] train::TrainError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Interpret(#[from] interpret::InterpretError),
}

/// Coarse classification of an error, used by the CLI to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid configuration or arguments.
    Config,
    /// Missing, malformed, or incompatible data.
    Data,
    /// Numerical failure (divergence, non-finite values).
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Dsp(e) => e.class(),
            Error::Data(e) => e.class(),
            Error::Nn(e) => e.class(),
            Error::Train(e) => e.class(),
            Error::Eval(e) => e.class(),
            Error::Interpret(_) => ErrorClass::Config,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
