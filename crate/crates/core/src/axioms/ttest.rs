//! Welch's two-sample t-test with Satterthwaite degrees of freedom.
//!
//! The p-value comes from the Student-t tail via the regularized incomplete
//! beta function, evaluated with Lentz's continued fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel statistic for the degenerate zero-variance case with unequal
/// means: a very large finite value rather than an infinity, so downstream
/// arithmetic stays finite.
pub const DEGENERATE_STATISTIC: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Satterthwaite degrees of freedom.
    pub df: f64,
    pub n_trials: usize,
}

/// Welch's t-test of `mean(a) - mean(b)`.
///
/// Both samples need at least two values. When both sample variances are
/// exactly zero the test is degenerate: equal means give `(0, 1)`,
/// different means give the signed [`DEGENERATE_STATISTIC`] with p = 0.
pub fn welch_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<TTestResult> {
    let (na, nb) = (sample_a.len(), sample_b.len());
    if na < 2 || nb < 2 {
        return Err(Error::InvalidParam(format!(
            "welch t-test needs two values per sample, got {na} and {nb}"
        )));
    }
    let (naf, nbf) = (na as f64, nb as f64);
    let mean_a = sample_a.iter().sum::<f64>() / naf;
    let mean_b = sample_b.iter().sum::<f64>() / nbf;
    let var_a = sample_a.iter().map(|x| (x - mean_a) * (x - mean_a)).sum::<f64>() / (naf - 1.0);
    let var_b = sample_b.iter().map(|x| (x - mean_b) * (x - mean_b)).sum::<f64>() / (nbf - 1.0);
    let n_trials = na.min(nb);

    if var_a == 0.0 && var_b == 0.0 {
        let df = (naf + nbf - 2.0).max(1.0);
        return Ok(if mean_a == mean_b {
            TTestResult { statistic: 0.0, p_value: 1.0, df, n_trials }
        } else {
            TTestResult {
                statistic: DEGENERATE_STATISTIC.copysign(mean_a - mean_b),
                p_value: 0.0,
                df,
                n_trials,
            }
        });
    }

    let se_a = var_a / naf;
    let se_b = var_b / nbf;
    let statistic = (mean_a - mean_b) / (se_a + se_b).sqrt();
    let df = (se_a + se_b) * (se_a + se_b)
        / (se_a * se_a / (naf - 1.0) + se_b * se_b / (nbf - 1.0));
    let p_value = student_t_two_sided_p(statistic, df);
    Ok(TTestResult { statistic, p_value, df, n_trials })
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front =
        (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    // Continued fraction converges fast for x below the split point; use the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) above it.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Lentz's algorithm for the continued fraction of the incomplete beta.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0f64;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
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
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation of ln Γ(z) for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut sum = 1.000_000_000_190_015;
    for (i, c) in COEFFS.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.506_628_274_631_000_5 * sum / z).ln()
}
