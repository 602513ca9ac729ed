//! Residual diagnostics: the periodic-correlation statistic `S`, its chi-squared
//! reference distribution, and the Ljung-Box portmanteau test.
//!
//! `S = sum_m N_m r_m(1)^2`, where `r_m(k)` is the lag-`k` correlation between
//! residuals of period `m` and the residuals `k` steps earlier, and `N_m` is the
//! number of such pairs. Under an adequate model `S` is approximately chi-squared
//! on `s` degrees of freedom.

use serde::Serialize;

use crate::error::{Error, Result};

/// Portmanteau test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LjungBox {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Result of the residual periodic-correlation test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub s: usize,
    /// `r_m(1)` for `m = 1..=s`.
    pub r1: Vec<f64>,
    /// Pair counts `N_m` behind each `r_m(1)`.
    pub n_years_eff: Vec<usize>,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ljung_box: Option<LjungBox>,
}

/// Residual periodic autocorrelations at lag `k`, indexed by `m - 1`.
///
/// Residuals are in time order with the last one at period `s`; a shorter first
/// year (from differencing) is allowed. Residuals are not re-centered.
pub fn residual_periodic_acf(residuals: &[f64], s: usize, k: usize) -> Result<Vec<f64>> {
    Ok(residual_periodic_acf_counts(residuals, s, k)?.0)
}

fn residual_periodic_acf_counts(residuals: &[f64], s: usize, k: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    if s == 0 || k == 0 {
        return Err(Error::InvalidArgument("period count and lag must be positive".into()));
    }
    let n = residuals.len();
    if n < 2 * s || n <= k {
        return Err(Error::TooShort(format!("{n} residuals for s = {s}, lag {k}")));
    }
    // Linear time of residuals[0], so that residuals[n - 1] falls on period s.
    let offset = (s - n % s) % s;
    let mut num = vec![0.0; s];
    let mut den_now = vec![0.0; s];
    let mut den_lag = vec![0.0; s];
    let mut count = vec![0usize; s];
    for i in k..n {
        let m = (offset + i) % s;
        let (a, b) = (residuals[i], residuals[i - k]);
        num[m] += a * b;
        den_now[m] += a * a;
        den_lag[m] += b * b;
        count[m] += 1;
    }
    let mut r = vec![0.0; s];
    for m in 0..s {
        let den = (den_now[m] * den_lag[m]).sqrt();
        if !(den > 0.0) {
            return Err(Error::DegenerateVariance { period: m + 1 });
        }
        r[m] = num[m] / den;
    }
    Ok((r, count))
}

/// The periodic-correlation statistic `S` on lag-1 residual periodic autocorrelations.
pub fn s_statistic(residuals: &[f64], s: usize) -> Result<DiagnosticReport> {
    let (r1, n_years_eff) = residual_periodic_acf_counts(residuals, s, 1)?;
    let statistic: f64 = r1.iter().zip(&n_years_eff).map(|(r, &n)| n as f64 * r * r).sum();
    Ok(DiagnosticReport { s, r1, n_years_eff, statistic, df: s, p_value: chi2_upper_tail(statistic, s), ljung_box: None })
}

/// Modified portmanteau statistic `n(n+2) sum_k r_k^2 / (n - k)` on `max_lag - fitted_params` df.
pub fn ljung_box(residuals: &[f64], max_lag: usize, fitted_params: usize) -> Result<LjungBox> {
    if max_lag <= fitted_params {
        return Err(Error::InsufficientLags { max_lag, fitted: fitted_params });
    }
    let n = residuals.len();
    if n <= max_lag {
        return Err(Error::TooShort(format!("{n} residuals for {max_lag} lags")));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = residuals.iter().map(|a| a - mean).collect();
    let c0: f64 = centered.iter().map(|a| a * a).sum();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateVariance { period: 1 });
    }
    let mut q = 0.0;
    for k in 1..=max_lag {
        let ck: f64 = centered[k..].iter().zip(&centered).map(|(a, b)| a * b).sum();
        let rk = ck / c0;
        q += rk * rk / (n - k) as f64;
    }
    let statistic = n as f64 * (n as f64 + 2.0) * q;
    let df = max_lag - fitted_params;
    Ok(LjungBox { statistic, df, p_value: chi2_upper_tail(statistic, df) })
}

/// `P(X > x)` for `X ~ chi-squared(df)`.
pub fn chi2_upper_tail(x: f64, df: usize) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    regularized_gamma_q(df as f64 / 2.0, x / 2.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(a)` for `a > 0` (Lanczos approximation).
pub fn ln_gamma(a: f64) -> f64 {
    if a < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let a = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (a + i as f64);
    }
    let t = a + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (a + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized upper incomplete gamma `Q(a, x)`: series for `x < a + 1`,
/// continued fraction otherwise.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        1.0 - (log_prefix.exp() * lower_series(a, x)).min(1.0)
    } else {
        (log_prefix.exp() * upper_continued_fraction(a, x)).min(1.0)
    }
}

const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 10_000;

/// `sum_n x^n / (a (a+1) ... (a+n))`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..MAX_TERMS {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for `Gamma(a, x) e^x x^-a`.
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
