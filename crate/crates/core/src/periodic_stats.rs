//! Sample periodic moments: means, autocovariances, autocorrelations and the
//! periodic partial autocorrelation function used to identify PAR orders.
//!
//! Lagged observations are resolved through linear time: the partner of
//! `(r, m)` at lag `l` is `t' = s(r - 1) + m - l`, which may fall in an earlier
//! year. Only years where `t' >= 1` contribute, and each autocovariance is
//! divided by the number of contributing pairs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::series::{period_of, SeasonalSeries};

/// Sample periodic autocovariances and autocorrelations.
///
/// Tables are indexed `[m - 1][lag]`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicAcf {
    pub s: usize,
    pub max_lag: usize,
    pub gamma: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub n_pairs: Vec<Vec<usize>>,
}

impl PeriodicAcf {
    /// `gamma_m(lag)` with 1-based period.
    pub fn gamma(&self, period: usize, lag: usize) -> f64 {
        self.gamma[period - 1][lag]
    }

    /// `rho_m(lag)` with 1-based period.
    pub fn rho(&self, period: usize, lag: usize) -> f64 {
        self.rho[period - 1][lag]
    }

    /// Covariance between the observations `i` and `j` steps before a time in `period`.
    fn cov_back(&self, period: usize, i: usize, j: usize) -> f64 {
        let (near, far) = if i <= j { (i, j) } else { (j, i) };
        let p = period_of(period as i64 - near as i64, self.s);
        self.gamma[p - 1][far - near]
    }
}

/// Periodic partial autocorrelations, indexed `[m - 1][k - 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicPacf {
    pub s: usize,
    pub max_order: usize,
    pub pacf: Vec<Vec<f64>>,
    /// 1.96 / sqrt(N), the approximate 95% white-noise band.
    pub band: f64,
    pub n_years: usize,
}

impl PeriodicPacf {
    pub fn get(&self, period: usize, order: usize) -> f64 {
        self.pacf[period - 1][order - 1]
    }
}

/// Per-period sample means `mu[m - 1]`.
pub fn periodic_mean(series: &SeasonalSeries) -> Vec<f64> {
    periodic_mean_flat(series.as_slice(), series.s())
}

/// [`periodic_mean`] on raw t-ordered values; `s = 1` gives the overall mean.
pub fn periodic_mean_flat(values: &[f64], s: usize) -> Vec<f64> {
    let n_years = values.len() / s;
    let mut mu = vec![0.0; s];
    for row in values.chunks_exact(s) {
        for (acc, &v) in mu.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n_years as f64);
    mu
}

/// Sample periodic autocovariance and autocorrelation up to `max_lag`.
pub fn periodic_autocovariance(series: &SeasonalSeries, max_lag: usize) -> Result<PeriodicAcf> {
    periodic_autocovariance_flat(series.as_slice(), series.s(), max_lag)
}

/// [`periodic_autocovariance`] on raw t-ordered values of complete years.
///
/// With `s = 1` this is the ordinary sample autocovariance with divisor `n - lag`.
///
/// `rho` is the correlation of the paired, period-mean-centered samples. When every
/// year contributes a pair it equals `gamma_m(l) / sqrt(gamma_m(0) gamma_m'(0))`
/// exactly; otherwise the normalizing sums run over the same years as the
/// numerator, which keeps `|rho| <= 1`.
pub fn periodic_autocovariance_flat(values: &[f64], s: usize, max_lag: usize) -> Result<PeriodicAcf> {
    if s == 0 || values.is_empty() || values.len() % s != 0 {
        return Err(Error::IncompleteYear(format!("{} values with s = {s}", values.len())));
    }
    let n_years = values.len() / s;
    if max_lag > s * (n_years - 1) {
        return Err(Error::TooShort(format!(
            "max lag {max_lag} leaves some period without pairs (limit {})",
            s * (n_years - 1)
        )));
    }
    let mu = periodic_mean_flat(values, s);
    let centered: Vec<f64> = values.iter().enumerate().map(|(i, &v)| v - mu[i % s]).collect();

    let mut gamma = vec![vec![0.0; max_lag + 1]; s];
    let mut rho = vec![vec![0.0; max_lag + 1]; s];
    let mut n_pairs = vec![vec![0usize; max_lag + 1]; s];
    for m in 1..=s {
        for lag in 0..=max_lag {
            let (mut sxy, mut sxx, mut syy, mut n) = (0.0, 0.0, 0.0, 0usize);
            for r in 0..n_years {
                let t = s * r + m;
                if t <= lag {
                    continue;
                }
                let x = centered[t - 1];
                let y = centered[t - lag - 1];
                sxy += x * y;
                sxx += x * x;
                syy += y * y;
                n += 1;
            }
            gamma[m - 1][lag] = sxy / n as f64;
            n_pairs[m - 1][lag] = n;
            rho[m - 1][lag] = if lag == 0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
        }
        if gamma[m - 1][0] <= 0.0 {
            return Err(Error::DegenerateVariance { period: m });
        }
    }
    for m in 1..=s {
        for lag in 1..=max_lag {
            if !rho[m - 1][lag].is_finite() {
                return Err(Error::DegenerateVariance { period: period_of(m as i64 - lag as i64, s) });
            }
        }
    }
    Ok(PeriodicAcf { s, max_lag, gamma, rho, mu, n_pairs })
}

/// Periodic partial autocorrelation function up to `max_order`.
pub fn periodic_pacf(series: &SeasonalSeries, max_order: usize) -> Result<PeriodicPacf> {
    periodic_pacf_flat(series.as_slice(), series.s(), max_order)
}

/// [`periodic_pacf`] on raw t-ordered values.
///
/// `pacf[m][k]` is the partial correlation between a period-`m` value and the value
/// `k` steps earlier, given the `k - 1` values in between. Everything is computed
/// from the sample periodic autocovariances, so for `s = 1` this is the
/// Durbin-Levinson PACF of the sample autocovariance sequence. A zero conditional
/// variance, or sample moments that do not form a valid covariance matrix, is
/// reported as `SingularFit`.
pub fn periodic_pacf_flat(values: &[f64], s: usize, max_order: usize) -> Result<PeriodicPacf> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("max order must be at least 1".into()));
    }
    let n_years = values.len() / s.max(1);
    if max_order >= n_years {
        return Err(Error::TooShort(format!("max order {max_order} needs more than {n_years} years")));
    }
    let acf = periodic_autocovariance_flat(values, s, max_order)?;
    let mut pacf = vec![vec![0.0; max_order]; s];
    for m in 1..=s {
        for k in 1..=max_order {
            pacf[m - 1][k - 1] = partial_correlation(&acf, m, k).ok_or(Error::SingularFit { period: m, order: k })?;
        }
    }
    Ok(PeriodicPacf { s, max_order, pacf, band: 1.96 / (n_years as f64).sqrt(), n_years })
}

/// Correlation of the values 0 and `k` steps before a period-`m` time after
/// removing their projections on the values 1..k-1 steps before.
fn partial_correlation(acf: &PeriodicAcf, m: usize, k: usize) -> Option<f64> {
    let ends = [0, k];
    let mut cond = DMatrix::from_fn(2, 2, |i, j| acf.cov_back(m, ends[i], ends[j]));
    if k > 1 {
        let inner = DMatrix::from_fn(k - 1, k - 1, |i, j| acf.cov_back(m, i + 1, j + 1));
        let cross = DMatrix::from_fn(k - 1, 2, |i, j| acf.cov_back(m, i + 1, ends[j]));
        for j in 0..2 {
            let coef = linalg::solve(inner.clone(), &cross.column(j).into_owned())?;
            for i in 0..2 {
                cond[(i, j)] -= cross.column(i).dot(&coef);
            }
        }
    }
    let (v0, vk) = (cond[(0, 0)], cond[(1, 1)]);
    let tol = linalg::SINGULAR_TOL;
    if v0 <= tol * acf.cov_back(m, 0, 0) || vk <= tol * acf.cov_back(m, k, k) {
        return None;
    }
    let r = cond[(0, 1)] / (v0 * vk).sqrt();
    (r.abs() <= 1.0 + 1e-10).then_some(r.clamp(-1.0, 1.0))
}
