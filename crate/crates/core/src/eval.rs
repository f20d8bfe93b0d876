//! Classification metrics and the paired-sample t-test used for model
//! comparisons.

use crate::ErrorClass;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("input lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate input: paired differences have zero variance")]
    DegenerateInput,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("t-test needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
}

impl EvalError {
    pub fn class(&self) -> ErrorClass {
        match self {
            EvalError::DegenerateInput => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}

/// Raw confusion counts with label 1 ("right") as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Headline metrics for one evaluation.
///
/// `sensitivity`/`specificity` are `None` when the respective class is
/// absent from the labels; they are never silently reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    /// Mean squared error of the predicted probability against the 0/1 label.
    pub mse: f64,
}

/// Thresholds probabilities into hard predictions; exactly `threshold` maps
/// to class 0 (the decision is `prob > threshold`).
pub fn classify(probs: &[f64], threshold: f64) -> Result<Vec<u8>, EvalError> {
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvalError::ProbabilityOutOfRange(p));
        }
    }
    Ok(probs.iter().map(|&p| u8::from(p > threshold)).collect())
}

pub fn compute_metrics(preds: &[u8], labels: &[u8], probs: &[f64]) -> Result<Metrics, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::LengthMismatch { a: preds.len(), b: labels.len() });
    }
    if probs.len() != labels.len() {
        return Err(EvalError::LengthMismatch { a: probs.len(), b: labels.len() });
    }
    if preds.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut c = Confusion { true_pos: 0, false_pos: 0, true_neg: 0, false_neg: 0 };
    for (&p, &y) in preds.iter().zip(labels.iter()) {
        match (p > 0, y > 0) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
            (false, true) => c.false_neg += 1,
        }
    }
    let accuracy = (c.true_pos + c.true_neg) as f64 / c.total() as f64;
    let positives = c.true_pos + c.false_neg;
    let negatives = c.true_neg + c.false_pos;
    let sensitivity = (positives > 0).then(|| c.true_pos as f64 / positives as f64);
    let specificity = (negatives > 0).then(|| c.true_neg as f64 / negatives as f64);
    let mse = probs
        .iter()
        .zip(labels.iter())
        .map(|(&p, &y)| (p - f64::from(y)).powi(2))
        .sum::<f64>()
        / probs.len() as f64;
    Ok(Metrics { confusion: c, accuracy, sensitivity, specificity, mse })
}

/// Result of a two-tailed paired-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Paired-sample t-test of `a` against `b` (null hypothesis: equal means).
///
/// `t = mean(d) / (sd(d)/√n)` with the sample standard deviation
/// (n−1 denominator); the two-tailed p-value comes from the Student-t CDF
/// evaluated through the regularized incomplete beta function.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFewPairs(n));
    }
    let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Err(EvalError::DegenerateInput);
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dof = n - 1;
    Ok(TTestResult { t_statistic: t, dof, p_value: t_two_tailed_p(t, dof) })
}

/// Two-tailed p-value of the Student-t distribution:
/// `p = I_{ν/(ν+t²)}(ν/2, 1/2)`.
pub fn t_two_tailed_p(t: f64, dof: usize) -> f64 {
    let nu = dof as f64;
    regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t))
}

/// ln Γ(z) for z > 0 by the Lanczos approximation.
fn ln_gamma(z: f64) -> f64 {
    const C: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, c) in C.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

const BETA_CF_TOL: f64 = 1e-10;
const BETA_CF_MAX_ITER: usize = 500;

/// Regularized incomplete beta I_x(a, b) via the continued-fraction
/// expansion (modified Lentz), switched through the symmetry relation to
/// stay in the fast-converging region.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-30;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < BETA_CF_TOL {
            break;
        }
    }
    h
}

/// Mean and sample standard deviation (n−1), the `mean±std` convention used
/// in the reports.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
