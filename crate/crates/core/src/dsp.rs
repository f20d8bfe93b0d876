//! Digital filter design, zero-phase filtering, and epoch segmentation.
//!
//! The bandpass used throughout the pipeline is a Butterworth design realized
//! as a cascade of second-order sections: the analog lowpass prototype is
//! transformed to a bandpass, frequencies are prewarped, and the bilinear
//! transform maps the result onto the unit circle. Application is
//! forward-backward per channel, so the net phase is zero and the effective
//! magnitude response is squared (band edges sit at −6.02 dB after both
//! passes).

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

use crate::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("invalid band edges: require 0 < low ({low} Hz) < high ({high} Hz) < Nyquist ({nyquist} Hz)")]
    InvalidBandEdges { low: f64, high: f64, nyquist: f64 },
    #[error("filter order must be >= 1, got {0}")]
    InvalidOrder(usize),
    #[error("frequency {f_hz} Hz outside [0, {nyquist}] Hz")]
    FrequencyOutOfRange { f_hz: f64, nyquist: f64 },
    #[error("signal too short for zero-phase filtering: {actual} samples, need at least {required}")]
    SignalTooShort { actual: usize, required: usize },
    #[error("epoch window [{onset}, {end}) exceeds recording length {total}")]
    EpochOutOfRange { onset: usize, end: usize, total: usize },
    #[error("recording has {rows} data rows but {names} channel names")]
    ChannelCountMismatch { rows: usize, names: usize },
}

impl DspError {
    pub fn class(&self) -> ErrorClass {
        match self {
            DspError::InvalidBandEdges { .. } | DspError::InvalidOrder(_) => ErrorClass::Config,
            _ => ErrorClass::Data,
        }
    }
}

/// Bandpass design request: `order` is the lowpass prototype order, so the
/// realized bandpass has `2 * order` poles.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterSpec {
    pub order: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub fs_hz: f64,
}

impl FilterSpec {
    pub fn new(order: usize, low_hz: f64, high_hz: f64, fs_hz: f64) -> Result<Self, DspError> {
        let spec = FilterSpec { order, low_hz, high_hz, fs_hz };
        spec.validate()?;
        Ok(spec)
    }

    /// The 8–30 Hz order-5 bandpass applied to the MI stream.
    pub fn mi_default(fs_hz: f64) -> Self {
        FilterSpec { order: 5, low_hz: 8.0, high_hz: 30.0, fs_hz }
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if self.order < 1 {
            return Err(DspError::InvalidOrder(self.order));
        }
        let nyquist = self.fs_hz / 2.0;
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < nyquist) {
            return Err(DspError::InvalidBandEdges {
                low: self.low_hz,
                high: self.high_hz,
                nyquist,
            });
        }
        Ok(())
    }
}

/// One second-order section with `a0` normalized to 1.
///
/// Difference equation: `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SosSection {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl SosSection {
    /// Poles strictly inside the unit circle (the real-coefficient triangle test).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = Complex64::new(self.b0, 0.0) + self.b1 * z_inv + self.b2 * z_inv * z_inv;
        let den = Complex64::new(1.0, 0.0) + self.a1 * z_inv + self.a2 * z_inv * z_inv;
        num / den
    }

    /// Steady-state DC gain of this section alone.
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }
}

/// A digital IIR filter as a gain plus a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IirCoefficients {
    pub sections: Vec<SosSection>,
    pub overall_gain: f64,
}

impl IirCoefficients {
    /// A pass-through filter (single section b0 = 1).
    pub fn identity() -> Self {
        IirCoefficients {
            sections: vec![SosSection { b0: 1.0, b1: 0.0, b2: 0.0, a1: 0.0, a2: 0.0 }],
            overall_gain: 1.0,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(SosSection::is_stable)
    }

    /// Expands the cascade into numerator/denominator polynomials in `z^-1`
    /// (including the overall gain). Used for cross-checking against
    /// reference designs.
    pub fn to_transfer_function(&self) -> (Vec<f64>, Vec<f64>) {
        let mut num = vec![self.overall_gain];
        let mut den = vec![1.0];
        for s in &self.sections {
            num = poly_mul(&num, &[s.b0, s.b1, s.b2]);
            den = poly_mul(&den, &[1.0, s.a1, s.a2]);
        }
        (num, den)
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// A raw multichannel recording prior to epoching.
#[derive(Debug, Clone)]
pub struct ContinuousRecording {
    /// channels × samples, microvolts.
    pub data: Array2<f64>,
    pub fs_hz: f64,
    pub channel_names: Vec<String>,
}

impl ContinuousRecording {
    pub fn new(data: Array2<f64>, fs_hz: f64, channel_names: Vec<String>) -> Result<Self, DspError> {
        if data.nrows() != channel_names.len() {
            return Err(DspError::ChannelCountMismatch {
                rows: data.nrows(),
                names: channel_names.len(),
            });
        }
        Ok(ContinuousRecording { data, fs_hz, channel_names })
    }
}

/// Designs a Butterworth bandpass as second-order sections.
///
/// Pipeline: analog lowpass prototype poles → lowpass-to-bandpass transform
/// at the prewarped band edges → bilinear transform → conjugate poles paired
/// into sections, one (z−1)(z+1) zero pair per section.
pub fn design_butterworth_bandpass(spec: &FilterSpec) -> Result<IirCoefficients, DspError> {
    spec.validate()?;
    let n = spec.order;

    // Band edges as a fraction of Nyquist, prewarped for the bilinear
    // transform at internal rate fs = 2.
    let wn_low = spec.low_hz / (spec.fs_hz / 2.0);
    let wn_high = spec.high_hz / (spec.fs_hz / 2.0);
    let fs = 2.0;
    let warped_low = 2.0 * fs * (std::f64::consts::PI * wn_low / fs).tan();
    let warped_high = 2.0 * fs * (std::f64::consts::PI * wn_high / fs).tan();
    let bw = warped_high - warped_low;
    let wo = (warped_low * warped_high).sqrt();

    // Analog Butterworth prototype: poles evenly spaced on the left-half unit
    // circle, no zeros, unit gain.
    let mut proto_poles = Vec::with_capacity(n);
    let mut m = -(n as i64) + 1;
    while m < n as i64 {
        let theta = std::f64::consts::PI * m as f64 / (2.0 * n as f64);
        proto_poles.push(-Complex64::new(0.0, theta).exp());
        m += 2;
    }

    // Lowpass → bandpass: each pole splits into a pair at ±sqrt(p² − wo²)
    // around p·bw/2; N zeros appear at the origin; gain scales by bw^N.
    let mut poles = Vec::with_capacity(2 * n);
    for p in &proto_poles {
        let scaled = p * bw / 2.0;
        let disc = (scaled * scaled - wo * wo).sqrt();
        poles.push(scaled + disc);
        poles.push(scaled - disc);
    }
    let gain_analog = bw.powi(n as i32);

    // Bilinear transform (fs2 = 2·fs). Zeros: N at the origin map to z = +1,
    // N at infinity map to z = −1.
    let fs2 = 2.0 * fs;
    let mut digital_poles = Vec::with_capacity(2 * n);
    let mut den_prod = Complex64::new(1.0, 0.0);
    for p in &poles {
        digital_poles.push((fs2 + p) / (fs2 - p));
        den_prod *= fs2 - p;
    }
    // Numerator product over the N zeros at the origin: (fs2 - 0)^N.
    let num_prod = Complex64::new(fs2.powi(n as i32), 0.0);
    let overall_gain = gain_analog * (num_prod / den_prod).re;

    // Pair poles into real-coefficient sections. Complex poles are matched
    // with their conjugates; real poles (wideband designs) are paired among
    // themselves.
    let mut complex_upper: Vec<Complex64> =
        digital_poles.iter().copied().filter(|p| p.im > POLE_IM_TOL).collect();
    let mut reals: Vec<f64> = digital_poles
        .iter()
        .copied()
        .filter(|p| p.im.abs() <= POLE_IM_TOL)
        .map(|p| p.re)
        .collect();
    complex_upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));
    reals.sort_by(|a, b| a.total_cmp(b));

    let mut sections = Vec::with_capacity(n);
    for p in complex_upper {
        sections.push(SosSection {
            b0: 1.0,
            b1: 0.0,
            b2: -1.0,
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
        });
    }
    while reals.len() >= 2 {
        let p2 = reals.pop().unwrap();
        let p1 = reals.pop().unwrap();
        sections.push(SosSection {
            b0: 1.0,
            b1: 0.0,
            b2: -1.0,
            a1: -(p1 + p2),
            a2: p1 * p2,
        });
    }
    debug_assert!(reals.is_empty(), "odd real pole count in bandpass design");
    debug_assert_eq!(sections.len(), n);
    // Least resonant first, so intermediate signals stay bounded.
    sections.sort_by(|a, b| a.a2.total_cmp(&b.a2));

    Ok(IirCoefficients { sections, overall_gain })
}

const POLE_IM_TOL: f64 = 1e-12;

/// Evaluates `H(e^{j 2π f / fs})` as the product of section responses times
/// the overall gain.
pub fn frequency_response(
    coeffs: &IirCoefficients,
    f_hz: f64,
    fs_hz: f64,
) -> Result<Complex64, DspError> {
    let nyquist = fs_hz / 2.0;
    if !(0.0..=nyquist).contains(&f_hz) {
        return Err(DspError::FrequencyOutOfRange { f_hz, nyquist });
    }
    let omega = 2.0 * std::f64::consts::PI * f_hz / fs_hz;
    let z_inv = Complex64::new(0.0, -omega).exp();
    let mut h = Complex64::new(coeffs.overall_gain, 0.0);
    for s in &coeffs.sections {
        h *= s.response(z_inv);
    }
    Ok(h)
}

/// Single forward pass of the cascade over one channel, starting from the
/// given per-section states (direct form II transposed).
fn sos_filter_inplace(x: &mut [f64], coeffs: &IirCoefficients, zi: &mut [[f64; 2]]) {
    for v in x.iter_mut() {
        *v *= coeffs.overall_gain;
    }
    for (s, state) in coeffs.sections.iter().zip(zi.iter_mut()) {
        let (mut z0, mut z1) = (state[0], state[1]);
        for v in x.iter_mut() {
            let xin = *v;
            let y = s.b0 * xin + z0;
            z0 = s.b1 * xin - s.a1 * y + z1;
            z1 = s.b2 * xin - s.a2 * y;
            *v = y;
        }
        state[0] = z0;
        state[1] = z1;
    }
}

/// Per-section steady-state unit-step states, scaled through the cascade.
/// Starting from these (times the first input sample) suppresses the startup
/// transient of each pass.
fn steady_state_init(coeffs: &IirCoefficients, x0: f64) -> Vec<[f64; 2]> {
    let mut states = Vec::with_capacity(coeffs.sections.len());
    let mut level = x0 * coeffs.overall_gain;
    for s in &coeffs.sections {
        let y_ss = s.dc_gain();
        states.push([(y_ss - s.b0) * level, (s.b2 - s.a2 * y_ss) * level]);
        level *= y_ss;
    }
    states
}

/// Applies the filter forward then backward along each row (zero net phase,
/// squared magnitude response).
///
/// Edge transients are handled by odd-symmetric extension of
/// `3 × n_sections × 2` samples on each side, trimmed after filtering.
pub fn filter_zero_phase(
    signal: &Array2<f64>,
    coeffs: &IirCoefficients,
) -> Result<Array2<f64>, DspError> {
    let ext = 3 * coeffs.sections.len() * 2;
    let n = signal.ncols();
    if n < ext + 1 {
        return Err(DspError::SignalTooShort { actual: n, required: ext + 1 });
    }
    let mut out = Array2::zeros(signal.raw_dim());
    for (row_in, mut row_out) in signal.outer_iter().zip(out.outer_iter_mut()) {
        let mut buf = odd_extend(row_in, ext);
        let mut zi = steady_state_init(coeffs, buf[0]);
        sos_filter_inplace(&mut buf, coeffs, &mut zi);
        buf.reverse();
        let mut zi = steady_state_init(coeffs, buf[0]);
        sos_filter_inplace(&mut buf, coeffs, &mut zi);
        buf.reverse();
        for (o, v) in row_out.iter_mut().zip(buf[ext..ext + n].iter()) {
            *o = *v;
        }
    }
    Ok(out)
}

/// Odd-symmetric extension about the first and last samples.
fn odd_extend(x: ArrayView1<f64>, ext: usize) -> Vec<f64> {
    let n = x.len();
    let mut buf = Vec::with_capacity(n + 2 * ext);
    for i in (1..=ext).rev() {
        buf.push(2.0 * x[0] - x[i]);
    }
    buf.extend(x.iter().copied());
    for i in (n - 1 - ext..n - 1).rev() {
        buf.push(2.0 * x[n - 1] - x[i]);
    }
    buf
}

/// Extracts the contiguous slice `[onset, onset + round(duration_s · fs))`.
pub fn segment_epoch(
    rec: &ContinuousRecording,
    onset_sample: usize,
    duration_s: f64,
) -> Result<Array2<f64>, DspError> {
    let n_t = (duration_s * rec.fs_hz).round() as usize;
    let end = onset_sample + n_t;
    let total = rec.data.ncols();
    if end > total {
        return Err(DspError::EpochOutOfRange { onset: onset_sample, end, total });
    }
    Ok(rec.data.slice(ndarray::s![.., onset_sample..end]).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use proptest::prelude::*;

    /// Reference design from an independent filter-design tool, run once:
    /// order-5 Butterworth bandpass, 8–30 Hz at fs = 1000, as expanded
    /// numerator/denominator polynomials in z^-1.
    const REF_B: [f64; 11] = [
        1.2708485333015106e-06,
        0.0,
        -6.354242666507554e-06,
        0.0,
        1.2708485333015107e-05,
        0.0,
        -1.2708485333015107e-05,
        0.0,
        6.354242666507554e-06,
        0.0,
        -1.2708485333015106e-06,
    ];
    const REF_A: [f64; 11] = [
        1.0,
        -9.507489530025781,
        40.7279232961201,
        -103.52014490992268,
        172.89347449989305,
        -198.25725999753573,
        158.07835027758142,
        -86.53980069903325,
        31.13059692088533,
        -6.644706092744031,
        0.6390562348428604,
    ];

    fn mi_filter() -> IirCoefficients {
        design_butterworth_bandpass(&FilterSpec::mi_default(1000.0)).unwrap()
    }

    #[test]
    fn matches_reference_design() {
        let coeffs = mi_filter();
        assert_eq!(coeffs.sections.len(), 5);
        let (b, a) = coeffs.to_transfer_function();
        assert_eq!(b.len(), 11);
        assert_eq!(a.len(), 11);
        for (got, want) in b.iter().zip(REF_B.iter()) {
            if *want == 0.0 {
                assert!(got.abs() < 1e-18, "expected exact zero, got {got}");
            } else {
                assert!(((got - want) / want).abs() < 1e-8, "b: {got} vs {want}");
            }
        }
        for (got, want) in a.iter().zip(REF_A.iter()) {
            assert!(((got - want) / want).abs() < 1e-8, "a: {got} vs {want}");
        }
    }

    #[test]
    fn band_edges_at_minus_3db() {
        let coeffs = mi_filter();
        for f in [8.0, 30.0] {
            let h = frequency_response(&coeffs, f, 1000.0).unwrap().norm();
            let db = 20.0 * h.log10();
            assert!((-3.5..=-2.5).contains(&db), "{f} Hz: {db} dB");
        }
    }

    #[test]
    fn dc_gain_is_exactly_zero() {
        let coeffs = mi_filter();
        let h = frequency_response(&coeffs, 0.0, 1000.0).unwrap();
        assert_eq!(h.norm(), 0.0);
    }

    #[test]
    fn passband_center_near_unity_and_stopband_attenuated() {
        let coeffs = mi_filter();
        let h15 = frequency_response(&coeffs, 15.0, 1000.0).unwrap().norm();
        assert!((0.98..=1.02).contains(&h15), "15 Hz: {h15}");
        let h2 = frequency_response(&coeffs, 2.0, 1000.0).unwrap().norm();
        assert!(h2 < 0.01, "2 Hz: {h2}");
    }

    #[test]
    fn identity_filter_response_is_one() {
        let id = IirCoefficients::identity();
        for f in [0.0, 7.3, 100.0, 500.0] {
            let h = frequency_response(&id, f, 1000.0).unwrap();
            assert!((h - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn response_rejects_out_of_range_frequency() {
        let id = IirCoefficients::identity();
        assert!(frequency_response(&id, 501.0, 1000.0).is_err());
        assert!(frequency_response(&id, -1.0, 1000.0).is_err());
    }

    #[test]
    fn rejects_invalid_band_edges() {
        assert!(FilterSpec::new(5, 30.0, 8.0, 1000.0).is_err());
        assert!(FilterSpec::new(5, 8.0, 500.0, 1000.0).is_err());
        assert!(FilterSpec::new(5, 0.0, 30.0, 1000.0).is_err());
        assert!(FilterSpec::new(0, 8.0, 30.0, 1000.0).is_err());
    }

    fn sinusoid(f: f64, fs: f64, n: usize, amp: f64, phase: f64) -> Array1<f64> {
        Array1::from_iter(
            (0..n).map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / fs + phase).sin()),
        )
    }

    /// Least-squares fit of `a sin + b cos` at frequency `f`, returning
    /// (amplitude, phase in degrees).
    fn fit_sinusoid(y: &[f64], f: f64, fs: f64, offset: usize) -> (f64, f64) {
        let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &v) in y.iter().enumerate() {
            let t = (i + offset) as f64 / fs;
            let s = (2.0 * std::f64::consts::PI * f * t).sin();
            let c = (2.0 * std::f64::consts::PI * f * t).cos();
            ss += s * s;
            sc += s * c;
            cc += c * c;
            ys += v * s;
            yc += v * c;
        }
        let det = ss * cc - sc * sc;
        let a = (ys * cc - yc * sc) / det;
        let b = (ss * yc - sc * ys) / det;
        (a.hypot(b), b.atan2(a).to_degrees())
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let coeffs = mi_filter();
        let x = Array2::zeros((3, 500));
        let y = filter_zero_phase(&x, &coeffs).unwrap();
        assert!(y.iter().all(|v| *v == 0.0));
        assert_eq!(y.dim(), x.dim());
    }

    #[test]
    fn passband_sinusoid_preserved_zero_phase() {
        let coeffs = mi_filter();
        let n = 4000;
        let x = sinusoid(15.0, 1000.0, n, 1.0, 0.3);
        let xm = x.clone().insert_axis(ndarray::Axis(0));
        let y = filter_zero_phase(&xm, &coeffs).unwrap();
        let lo = n / 10;
        let hi = n - n / 10;
        let interior: Vec<f64> = y.row(0).iter().copied().skip(lo).take(hi - lo).collect();
        let (amp, phase) = fit_sinusoid(&interior, 15.0, 1000.0, lo);
        assert!((0.96..=1.04).contains(&amp), "amplitude ratio {amp}");
        let phase_shift = (phase - 0.3f64.to_degrees()).abs();
        assert!(phase_shift < 1.0, "phase shift {phase_shift} deg");
    }

    #[test]
    fn stopband_sinusoid_rejected() {
        let coeffs = mi_filter();
        let n = 4000;
        let x = sinusoid(2.0, 1000.0, n, 1.0, 0.0).insert_axis(ndarray::Axis(0));
        let y = filter_zero_phase(&x, &coeffs).unwrap();
        let lo = n / 10;
        let max_interior = y.row(0).iter().skip(lo).take(n - 2 * lo).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_interior < 1e-3, "interior leakage {max_interior}");
    }

    #[test]
    fn cross_correlation_peak_at_zero_lag() {
        let coeffs = mi_filter();
        let n = 4000;
        let x = sinusoid(15.0, 1000.0, n, 1.0, 0.0);
        let y = filter_zero_phase(&x.clone().insert_axis(ndarray::Axis(0)), &coeffs).unwrap();
        let y = y.row(0);
        let max_lag = 25i64;
        let mut best = (0i64, f64::MIN);
        for lag in -max_lag..=max_lag {
            let mut acc = 0.0;
            for i in 0..n {
                let j = i as i64 + lag;
                if j >= 0 && (j as usize) < n {
                    acc += x[i] * y[j as usize];
                }
            }
            if acc > best.1 {
                best = (lag, acc);
            }
        }
        assert_eq!(best.0, 0, "peak lag {}", best.0);
    }

    #[test]
    fn filtering_is_linear() {
        use rand::{Rng, SeedableRng};
        let coeffs = mi_filter();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 600;
        let x = Array2::from_shape_fn((2, n), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((2, n), |_| rng.gen_range(-1.0..1.0));
        let (a, b) = (1.7, -0.4);
        let combined = filter_zero_phase(&(a * &x + b * &y), &coeffs).unwrap();
        let separate = a * &filter_zero_phase(&x, &coeffs).unwrap()
            + b * &filter_zero_phase(&y, &coeffs).unwrap();
        let scale = combined.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for (u, v) in combined.iter().zip(separate.iter()) {
            assert!((u - v).abs() / scale < 1e-9);
        }
    }

    #[test]
    fn too_short_signal_is_rejected() {
        let coeffs = mi_filter();
        let x = Array2::zeros((1, 30));
        match filter_zero_phase(&x, &coeffs) {
            Err(DspError::SignalTooShort { required, .. }) => assert_eq!(required, 31),
            other => panic!("expected SignalTooShort, got {other:?}"),
        }
    }

    #[test]
    fn segment_epoch_lengths() {
        let rec = ContinuousRecording::new(Array2::zeros((2, 5000)), 1000.0, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(segment_epoch(&rec, 0, 4.0).unwrap().ncols(), 4000);
        let rec250 = ContinuousRecording::new(Array2::zeros((2, 1200)), 250.0, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(segment_epoch(&rec250, 0, 4.0).unwrap().ncols(), 1000);
        assert!(segment_epoch(&rec, 4500, 4.0).is_err());
    }

    #[test]
    fn segment_epoch_is_a_plain_slice() {
        let data = Array2::from_shape_fn((2, 100), |(c, t)| (c * 1000 + t) as f64);
        let rec = ContinuousRecording::new(data, 100.0, vec!["a".into(), "b".into()]).unwrap();
        let ep = segment_epoch(&rec, 10, 0.2).unwrap();
        assert_eq!(ep.dim(), (2, 20));
        assert_eq!(ep[[0, 0]], 10.0);
        assert_eq!(ep[[1, 19]], 1029.0);
    }

    proptest! {
        #[test]
        fn designed_filters_are_stable(
            order in 1usize..=8,
            low in 0.5f64..40.0,
            width in 1.0f64..60.0,
            fs in 120.0f64..2000.0,
        ) {
            prop_assume!(low + width < fs / 2.0 - 1.0);
            let spec = FilterSpec::new(order, low, low + width, fs).unwrap();
            let coeffs = design_butterworth_bandpass(&spec).unwrap();
            prop_assert!(coeffs.is_stable());
            prop_assert_eq!(coeffs.sections.len(), order);
        }

        #[test]
        fn output_shape_equals_input_shape(rows in 1usize..4, cols in 100usize..300) {
            let coeffs = mi_filter();
            let x = Array2::from_elem((rows, cols), 0.25);
            let y = filter_zero_phase(&x, &coeffs).unwrap();
            prop_assert_eq!(y.dim(), (rows, cols));
        }
    }
}
