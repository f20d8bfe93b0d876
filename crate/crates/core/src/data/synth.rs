//! Synthetic EEG generator for desk-scale experiments.
//!
//! Every channel carries pink (1/f) background noise. SSVEP-bearing trials
//! add a class-frequency sinusoid plus a half-amplitude second harmonic on
//! the occipital channels. MI-bearing trials attenuate the mu-band (8–13 Hz)
//! component of the contralateral motor channels, mimicking event-related
//! desynchronization. With `erd_depth = 0` and `ssvep_amplitude = 0` a trial
//! is pure noise.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset, Mode, Trial};
use crate::dsp::{design_butterworth_bandpass, filter_zero_phase, FilterSpec};

/// Mu band attenuated by the synthetic ERD effect.
const MU_BAND_HZ: (f64, f64) = (8.0, 13.0);

/// RMS of the resting mu rhythm on motor channels, relative to
/// `noise_scale`. Motor cortex at rest shows a mu-band bump over the 1/f
/// background; event-related desynchronization suppresses it.
const MU_REST_RMS: f64 = 1.25;

/// Log-std of the per-trial, per-hemisphere mu amplitude: the rhythm waxes
/// and wanes between trials, which keeps single-trial MI decoding well below
/// ceiling.
const MU_AMP_LOG_STD: f64 = 0.35;

/// Left-hemisphere motor channels (attenuated during right-hand imagery).
const LEFT_MOTOR: [&str; 9] = ["FC5", "FC3", "FC1", "C5", "C3", "C1", "CP5", "CP3", "CP1"];
/// Right-hemisphere motor channels (attenuated during left-hand imagery).
const RIGHT_MOTOR: [&str; 9] = ["FC2", "FC4", "FC6", "C2", "C4", "C6", "CP2", "CP4", "CP6"];

/// The 62-electrode layout emitted by the generator.
pub const DEFAULT_CHANNELS: [&str; 62] = [
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2", "FC6", "T7", "C3", "Cz",
    "C4", "T8", "TP9", "CP5", "CP1", "CP2", "CP6", "TP10", "P7", "P3", "Pz", "P4", "P8", "PO9",
    "O1", "Oz", "O2", "PO10", "FC3", "FC4", "C5", "C1", "C2", "C6", "CP3", "CPz", "CP4", "P1",
    "P2", "POz", "FT9", "FT10", "TP7", "TP8", "TPP9h", "TPP10h", "FTT9h", "FTT10h", "TPP7h",
    "TPP8h", "F9", "F10", "AF7", "AF3", "AF4", "AF8", "PO3", "PO4",
];

pub fn default_channel_names() -> Vec<String> {
    DEFAULT_CHANNELS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub fs_hz: f64,
    pub duration_s: f64,
    /// Stimulus frequency for the left class (label 0).
    pub ssvep_freq_left: f64,
    /// Stimulus frequency for the right class (label 1).
    pub ssvep_freq_right: f64,
    /// Amplitude of the occipital stimulus response, microvolts.
    pub ssvep_amplitude: f64,
    /// Fractional mu-band attenuation on contralateral motor channels.
    pub erd_depth: f64,
    /// Pink-noise RMS, microvolts.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            fs_hz: 250.0,
            duration_s: 4.0,
            ssvep_freq_left: 8.57,
            ssvep_freq_right: 6.67,
            ssvep_amplitude: 4.0,
            erd_depth: 0.5,
            noise_scale: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let nyquist = self.fs_hz / 2.0;
        if self.fs_hz <= 0.0 || self.duration_s <= 0.0 {
            return Err(DataError::InvalidSynthConfig(
                "fs_hz and duration_s must be positive".into(),
            ));
        }
        if self.ssvep_freq_left <= 0.0
            || self.ssvep_freq_right <= 0.0
            || 2.0 * self.ssvep_freq_left >= nyquist
            || 2.0 * self.ssvep_freq_right >= nyquist
        {
            return Err(DataError::InvalidSynthConfig(format!(
                "stimulus frequencies (and second harmonics) must lie below Nyquist ({nyquist} Hz)"
            )));
        }
        if !(0.0..=1.0).contains(&self.erd_depth) {
            return Err(DataError::InvalidSynthConfig(format!(
                "erd_depth {} outside [0, 1]",
                self.erd_depth
            )));
        }
        if MU_BAND_HZ.1 >= nyquist {
            return Err(DataError::InvalidSynthConfig(format!(
                "sampling rate {} Hz too low for the {}-{} Hz mu band",
                self.fs_hz, MU_BAND_HZ.0, MU_BAND_HZ.1
            )));
        }
        if self.ssvep_amplitude < 0.0 || self.noise_scale < 0.0 {
            return Err(DataError::InvalidSynthConfig(
                "amplitudes must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn n_t(&self) -> usize {
        (self.duration_s * self.fs_hz).round() as usize
    }
}

/// Kellet pink-noise filter state. Unit-variance white input yields roughly
/// unit-RMS output after the fixed normalization.
struct PinkNoise {
    b: [f64; 7],
}

impl PinkNoise {
    const NORM: f64 = 1.0 / 3.039;

    fn new() -> Self {
        PinkNoise { b: [0.0; 7] }
    }

    fn next(&mut self, white: f64) -> f64 {
        let b = &mut self.b;
        b[0] = 0.99886 * b[0] + white * 0.0555179;
        b[1] = 0.99332 * b[1] + white * 0.0750759;
        b[2] = 0.96900 * b[2] + white * 0.1538520;
        b[3] = 0.86650 * b[3] + white * 0.3104856;
        b[4] = 0.55000 * b[4] + white * 0.5329522;
        b[5] = -0.7616 * b[5] - white * 0.0168980;
        let pink = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + white * 0.5362;
        b[6] = white * 0.115926;
        pink * Self::NORM
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

/// RMS gain of zero-phase filtering applied to unit-variance white noise:
/// the power spectrum picks up |H|⁴, so the gain is
/// `sqrt(mean over [0, Nyquist] of |H(f)|⁴)`.
fn white_noise_rms_gain(coeffs: &crate::dsp::IirCoefficients, fs_hz: f64) -> f64 {
    let n = 1024;
    let nyquist = fs_hz / 2.0;
    let mut acc = 0.0;
    for k in 0..n {
        let f = (k as f64 + 0.5) * nyquist / n as f64;
        let h = crate::dsp::frequency_response(coeffs, f, fs_hz)
            .expect("grid frequencies lie below Nyquist")
            .norm();
        acc += h.powi(4);
    }
    (acc / n as f64).sqrt()
}

/// Generates one 62-channel trial.
///
/// Pass a dedicated random stream per call; [`synth_dataset`] derives one
/// from `(seed, trial counter)` so outputs are reproducible trial by trial.
pub fn synth_trial(
    cfg: &SynthConfig,
    mode: Mode,
    label: u8,
    rng: &mut ChaCha8Rng,
) -> Result<Trial, DataError> {
    cfg.validate()?;
    let n_t = cfg.n_t();
    let n_ch = DEFAULT_CHANNELS.len();
    let mut data = Array2::<f64>::zeros((n_ch, n_t));

    for mut row in data.outer_iter_mut() {
        let mut pink = PinkNoise::new();
        // settle the filter before taking samples
        for _ in 0..200 {
            pink.next(gaussian(rng));
        }
        for v in row.iter_mut() {
            *v = cfg.noise_scale * pink.next(gaussian(rng));
        }
    }

    if matches!(mode, Mode::Ssvep | Mode::Hybrid) && cfg.ssvep_amplitude > 0.0 {
        let f = if label == 0 { cfg.ssvep_freq_left } else { cfg.ssvep_freq_right };
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        // the second harmonic is phase-locked to the fundamental, so the
        // waveform shape is the same on every trial up to a time shift
        let wave: Vec<f64> = (0..n_t)
            .map(|i| {
                let t = i as f64 / cfg.fs_hz;
                cfg.ssvep_amplitude * (std::f64::consts::TAU * f * t + phase).sin()
                    + 0.5 * cfg.ssvep_amplitude
                        * (std::f64::consts::TAU * 2.0 * f * t + 2.0 * phase).sin()
            })
            .collect();
        for name in super::ChannelMontage::standard().occipital {
            let row = channel_index(&name);
            for (v, w) in data.row_mut(row).iter_mut().zip(wave.iter()) {
                *v += w;
            }
        }
    }

    // Resting mu rhythm: band-limited (8-13 Hz) noise on every motor channel,
    // independent of class and mode. Drawn for all modes so a trial's
    // background statistics do not leak the paradigm.
    if cfg.noise_scale > 0.0 {
        let left_amp = (MU_AMP_LOG_STD * gaussian(rng)).exp();
        let right_amp = (MU_AMP_LOG_STD * gaussian(rng)).exp();
        let spec = FilterSpec::new(2, MU_BAND_HZ.0, MU_BAND_HZ.1, cfg.fs_hz)?;
        let coeffs = design_butterworth_bandpass(&spec)?;
        let gain = white_noise_rms_gain(&coeffs, cfg.fs_hz);
        let montage = super::ChannelMontage::standard();
        let mut white = Array2::zeros((montage.motor.len(), n_t));
        for mut row in white.outer_iter_mut() {
            for v in row.iter_mut() {
                *v = gaussian(rng);
            }
        }
        let mu = filter_zero_phase(&white, &coeffs)?;
        let scale = MU_REST_RMS * cfg.noise_scale / gain;
        for (src, name) in montage.motor.iter().enumerate() {
            let dst = channel_index(name);
            let hemi = if LEFT_MOTOR.contains(&name.as_str()) {
                left_amp
            } else if RIGHT_MOTOR.contains(&name.as_str()) {
                right_amp
            } else {
                (left_amp * right_amp).sqrt()
            };
            for (v, m) in data.row_mut(dst).iter_mut().zip(mu.row(src).iter()) {
                *v += scale * hemi * m;
            }
        }
    }

    if matches!(mode, Mode::Mi | Mode::Hybrid) && cfg.erd_depth > 0.0 {
        // Contralateral desynchronization: right-hand imagery suppresses the
        // left hemisphere and vice versa.
        let channels: &[&str] = if label == 1 { &LEFT_MOTOR } else { &RIGHT_MOTOR };
        let spec = FilterSpec::new(2, MU_BAND_HZ.0, MU_BAND_HZ.1, cfg.fs_hz)?;
        let coeffs = design_butterworth_bandpass(&spec)?;
        let rows: Vec<usize> = channels.iter().map(|c| channel_index(c)).collect();
        let mut block = Array2::zeros((rows.len(), n_t));
        for (dst, &src) in rows.iter().enumerate() {
            block.row_mut(dst).assign(&data.row(src));
        }
        let mu = filter_zero_phase(&block, &coeffs)?;
        for (src, &dst) in rows.iter().enumerate() {
            let component = mu.row(src);
            for (v, m) in data.row_mut(dst).iter_mut().zip(component.iter()) {
                *v -= cfg.erd_depth * m;
            }
        }
    }

    Ok(Trial {
        data: data.mapv(|v| v as f32),
        label,
        subject_id: 0,
        mode,
    })
}

fn channel_index(name: &str) -> usize {
    DEFAULT_CHANNELS
        .iter()
        .position(|c| *c == name)
        .expect("montage channel missing from default layout")
}

/// Generates a full dataset mirroring the source acquisition protocol:
/// per subject, 50 MI trials per class plus 25 SSVEP trials per class
/// frequency. Trial order is MI (left block, right block) then SSVEP
/// (left block, right block), subjects in ascending id order.
pub fn synth_dataset(cfg: &SynthConfig, n_subjects: usize) -> Result<Dataset, DataError> {
    cfg.validate()?;
    let mut trials = Vec::with_capacity(n_subjects * 150);
    let mut counter = 0u64;
    for subject in 0..n_subjects {
        let mut emit = |mode: Mode, label: u8, count: usize, trials: &mut Vec<Trial>| -> Result<(), DataError> {
            for _ in 0..count {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(counter);
                counter += 1;
                let mut t = synth_trial(cfg, mode, label, &mut rng)?;
                t.subject_id = subject as u16;
                trials.push(t);
            }
            Ok(())
        };
        emit(Mode::Mi, 0, 50, &mut trials)?;
        emit(Mode::Mi, 1, 50, &mut trials)?;
        emit(Mode::Ssvep, 0, 25, &mut trials)?;
        emit(Mode::Ssvep, 1, 25, &mut trials)?;
    }
    Dataset::new(trials, cfg.fs_hz as f32, default_channel_names())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct periodogram power at integer DFT bins (test oracle, no FFT).
    fn bin_power(x: &[f64], fs: f64, bin: usize) -> f64 {
        let n = x.len() as f64;
        let f = bin as f64 * fs / n;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let w = std::f64::consts::TAU * f * i as f64 / fs;
            re += v * w.cos();
            im -= v * w.sin();
        }
        (re * re + im * im) / n
    }

    fn band_power(x: &[f64], fs: f64, lo: f64, hi: f64) -> f64 {
        let n = x.len() as f64;
        let df = fs / n;
        let lo_bin = (lo / df).ceil() as usize;
        let hi_bin = (hi / df).floor() as usize;
        (lo_bin..=hi_bin).map(|b| bin_power(x, fs, b)).sum()
    }

    fn row_f64(t: &Trial, idx: usize) -> Vec<f64> {
        t.data.row(idx).iter().map(|&v| f64::from(v)).collect()
    }

    #[test]
    fn determinism_bit_identical() {
        let cfg = SynthConfig::default();
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let a = synth_trial(&cfg, Mode::Hybrid, 1, &mut r1).unwrap();
        let b = synth_trial(&cfg, Mode::Hybrid, 1, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ssvep_spectrum_peaks_at_class_frequency() {
        let cfg = SynthConfig { ssvep_amplitude: 20.0, ..SynthConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = synth_trial(&cfg, Mode::Ssvep, 1, &mut rng).unwrap();
        let oz = row_f64(&t, channel_index("Oz"));
        let df = cfg.fs_hz / oz.len() as f64;
        let peak_bin = (4..(20.0 / df) as usize)
            .max_by(|&a, &b| bin_power(&oz, cfg.fs_hz, a).total_cmp(&bin_power(&oz, cfg.fs_hz, b)))
            .unwrap();
        let peak_hz = peak_bin as f64 * df;
        assert!((peak_hz - 6.67).abs() < 0.3, "peak at {peak_hz} Hz");

        let t0 = synth_trial(&cfg, Mode::Ssvep, 0, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let oz0 = row_f64(&t0, channel_index("Oz"));
        let peak_bin0 = (4..(20.0 / df) as usize)
            .max_by(|&a, &b| bin_power(&oz0, cfg.fs_hz, a).total_cmp(&bin_power(&oz0, cfg.fs_hz, b)))
            .unwrap();
        let peak_hz0 = peak_bin0 as f64 * df;
        assert!((peak_hz0 - 8.57).abs() < 0.3, "peak at {peak_hz0} Hz");
    }

    #[test]
    fn erd_suppresses_contralateral_mu_power() {
        let cfg = SynthConfig { erd_depth: 0.8, ..SynthConfig::default() };
        // average over several trials to beat noise fluctuations
        let (mut left_p, mut right_p) = (0.0, 0.0);
        for s in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
            let t = synth_trial(&cfg, Mode::Mi, 1, &mut rng).unwrap();
            for c in LEFT_MOTOR {
                left_p += band_power(&row_f64(&t, channel_index(c)), cfg.fs_hz, 8.0, 13.0);
            }
            for c in RIGHT_MOTOR {
                right_p += band_power(&row_f64(&t, channel_index(c)), cfg.fs_hz, 8.0, 13.0);
            }
        }
        assert!(
            left_p < 0.5 * right_p,
            "left {left_p} should be well below right {right_p} for right-hand imagery"
        );
    }

    #[test]
    fn null_config_is_pure_noise() {
        let cfg = SynthConfig { erd_depth: 0.0, ssvep_amplitude: 0.0, ..SynthConfig::default() };
        // class-conditional mu-band means should be statistically indistinguishable
        let stat = |label: u8, base: u64| -> f64 {
            let mut acc = 0.0;
            for s in 0..6 {
                let mut rng = ChaCha8Rng::seed_from_u64(base + s);
                let t = synth_trial(&cfg, Mode::Mi, label, &mut rng).unwrap();
                for c in LEFT_MOTOR {
                    acc += band_power(&row_f64(&t, channel_index(c)), cfg.fs_hz, 8.0, 13.0);
                }
            }
            acc / 6.0
        };
        let a = stat(0, 300);
        let b = stat(1, 300); // same seeds, different label: identical trials
        assert_eq!(a, b, "labels must not influence a null-signal trial");
    }

    #[test]
    fn zero_subjects_yield_valid_empty_dataset() {
        let cfg = SynthConfig { duration_s: 0.4, ..SynthConfig::default() };
        let ds = synth_dataset(&cfg, 0).unwrap();
        assert!(ds.trials.is_empty());
        assert_eq!(ds.channel_names.len(), 62);
    }

    #[test]
    fn dataset_counts_follow_protocol() {
        let cfg = SynthConfig { duration_s: 0.4, ..SynthConfig::default() };
        let ds = synth_dataset(&cfg, 2).unwrap();
        assert_eq!(ds.trials.len(), 300);
        assert_eq!(ds.channel_names.len(), 62);
        let mi = ds.trials.iter().filter(|t| t.mode == Mode::Mi).count();
        let ssvep = ds.trials.iter().filter(|t| t.mode == Mode::Ssvep).count();
        assert_eq!(mi, 200);
        assert_eq!(ssvep, 100);
        for label in [0, 1] {
            let n = ds
                .trials
                .iter()
                .filter(|t| t.mode == Mode::Mi && t.label == label && t.subject_id == 0)
                .count();
            assert_eq!(n, 50);
            let n = ds
                .trials
                .iter()
                .filter(|t| t.mode == Mode::Ssvep && t.label == label && t.subject_id == 1)
                .count();
            assert_eq!(n, 25);
        }
    }

    #[test]
    fn default_layout_contains_full_montage() {
        let names = default_channel_names();
        assert_eq!(names.len(), 62);
        let m = super::super::ChannelMontage::standard();
        for c in m.motor.iter().chain(m.occipital.iter()) {
            assert!(names.contains(c), "missing {c}");
        }
        let unique: std::collections::BTreeSet<&String> = names.iter().collect();
        assert_eq!(unique.len(), 62, "duplicate channel names");
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad_fs = SynthConfig { fs_hz: 20.0, ..SynthConfig::default() };
        assert!(bad_fs.validate().is_err());
        let bad_erd = SynthConfig { erd_depth: 1.5, ..SynthConfig::default() };
        assert!(bad_erd.validate().is_err());
    }
}
