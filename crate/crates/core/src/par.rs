//! Periodic autoregression.
//!
//! For period `m` the model is
//! `z_t - mu_m = sum_j phi_{m,j} (z_{t-j} - mu_{m-j}) + a_t`, `a_t ~ N(0, sigma2_m)`,
//! with `t = s(r - 1) + m` and lags crossing year boundaries through linear time.
//! Estimation is conditional least squares, period by period.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::periodic_stats::{periodic_mean, periodic_pacf};
use crate::rng::rng_from_seed;
use crate::series::{period_of, SeasonalSeries};

/// Simulated values beyond this magnitude count as divergence.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// Fitted or user-specified periodic autoregression.
///
/// Per-period vectors are indexed by `m - 1`; `phi[m - 1][j - 1]` is the lag-`j` coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParModel {
    pub s: usize,
    pub orders: Vec<usize>,
    pub phi: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// Included lags for subset models; `None` means all lags up to the order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<Vec<bool>>>,
    /// Usable years per period in the fit; empty for hand-built models.
    #[serde(default)]
    pub n_obs: Vec<usize>,
    /// OLS standard errors of `phi`, zero for excluded lags; empty for hand-built models.
    #[serde(default)]
    pub std_err: Vec<Vec<f64>>,
}

impl ParModel {
    /// Builds a model from known parameters, checking shapes.
    pub fn new(phi: Vec<Vec<f64>>, mu: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        let s = mu.len();
        if s < 1 || phi.len() != s || sigma2.len() != s {
            return Err(Error::InvalidArgument("phi, mu and sigma2 must have one entry per period".into()));
        }
        if sigma2.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("innovation variances must be finite and >= 0".into()));
        }
        let orders = phi.iter().map(Vec::len).collect();
        Ok(ParModel { s, orders, phi, mu, sigma2, mask: None, n_obs: Vec::new(), std_err: Vec::new() })
    }

    pub fn max_order(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Whether lag `j` (1-based) of `period` is a free parameter.
    pub fn includes(&self, period: usize, lag: usize) -> bool {
        lag <= self.orders[period - 1] && self.mask.as_ref().is_none_or(|mask| mask[period - 1][lag - 1])
    }

    /// Number of free AR coefficients across all periods.
    pub fn parameter_count(&self) -> usize {
        (1..=self.s).map(|m| (1..=self.orders[m - 1]).filter(|&j| self.includes(m, j)).count()).sum()
    }

    /// Conditional mean of the value following `history`, whose first element is at period 1.
    pub fn one_step(&self, history: &[f64]) -> Result<f64> {
        let t = history.len() + 1;
        let m = period_of(t as i64, self.s);
        let p = self.orders[m - 1];
        if history.len() < p {
            return Err(Error::TooShort(format!("period {m} needs {p} previous values, have {}", history.len())));
        }
        let mut pred = self.mu[m - 1];
        for j in 1..=p {
            let lagged_period = period_of(t as i64 - j as i64, self.s);
            pred += self.phi[m - 1][j - 1] * (history[t - j - 1] - self.mu[lagged_period - 1]);
        }
        Ok(pred)
    }

    fn validate_against(&self, series: &SeasonalSeries) -> Result<()> {
        if self.s != series.s() {
            return Err(Error::InvalidArgument(format!("model has s = {}, series has s = {}", self.s, series.s())));
        }
        Ok(())
    }
}

/// Lagged design for one period: rows are the years with a full window of `p` predecessors.
fn period_design(centered: &[f64], s: usize, m: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
    let targets: Vec<usize> = (0..centered.len() / s).map(|r| s * r + m).filter(|&t| t > p).collect();
    let x = DMatrix::from_fn(targets.len(), p, |i, j| centered[targets[i] - j - 2]);
    let y = DVector::from_iterator(targets.len(), targets.iter().map(|&t| centered[t - 1]));
    (x, y)
}

fn centered_values(series: &SeasonalSeries, mu: &[f64]) -> Vec<f64> {
    let s = series.s();
    series.as_slice().iter().enumerate().map(|(i, &v)| v - mu[i % s]).collect()
}

fn select_columns(x: &DMatrix<f64>, lags: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), lags.len(), |i, j| x[(i, lags[j] - 1)])
}

/// Innovation variances are floored so that information criteria stay finite on exact data.
fn floor_variance(v: f64) -> f64 {
    v.max(f64::MIN_POSITIVE)
}

struct PeriodFit {
    phi: Vec<f64>,
    sigma2: f64,
    n: usize,
    std_err: Vec<f64>,
}

fn fit_period(centered: &[f64], s: usize, m: usize, p: usize, included: &[bool]) -> Result<PeriodFit> {
    let (x_full, y) = period_design(centered, s, m, p);
    let lags: Vec<usize> = (1..=p).filter(|&j| included[j - 1]).collect();
    let n = y.len();
    if n < p + 2 {
        return Err(Error::TooShort(format!("period {m} has {n} usable years for order {p}")));
    }
    let x = select_columns(&x_full, &lags);
    let (beta, rss) = linalg::ols(&x, &y).ok_or(Error::SingularFit { period: m, order: p })?;
    let sigma2 = floor_variance(rss / n as f64);
    let dof = n.saturating_sub(lags.len()).max(1) as f64;
    let inv_diag = if lags.is_empty() { Vec::new() } else { linalg::xtx_inv_diag(&x).unwrap_or_default() };
    let mut phi = vec![0.0; p];
    let mut std_err = vec![0.0; p];
    for (i, &lag) in lags.iter().enumerate() {
        phi[lag - 1] = beta[i];
        std_err[lag - 1] = inv_diag.get(i).map_or(f64::NAN, |d| (rss / dof * d).sqrt());
    }
    Ok(PeriodFit { phi, sigma2, n, std_err })
}

/// Fits a PAR model with per-period orders and an optional lag mask.
///
/// `mask[m - 1]` must have `orders[m - 1]` entries.
pub fn fit_par(series: &SeasonalSeries, orders: &[usize], mask: Option<&[Vec<bool>]>) -> Result<ParModel> {
    let s = series.s();
    if orders.len() != s {
        return Err(Error::InvalidArgument(format!("expected {s} orders, got {}", orders.len())));
    }
    if let Some(mask) = mask {
        if mask.len() != s || mask.iter().zip(orders).any(|(mk, &p)| mk.len() != p) {
            return Err(Error::InvalidArgument("mask shape must match orders".into()));
        }
    }
    let mu = periodic_mean(series);
    let centered = centered_values(series, &mu);
    let full: Vec<Vec<bool>> = orders.iter().map(|&p| vec![true; p]).collect();
    let masks = mask.unwrap_or(&full);

    let fits: Vec<PeriodFit> = (1..=s)
        .into_par_iter()
        .map(|m| fit_period(&centered, s, m, orders[m - 1], &masks[m - 1]))
        .collect::<Result<_>>()?;

    Ok(ParModel {
        s,
        orders: orders.to_vec(),
        phi: fits.iter().map(|f| f.phi.clone()).collect(),
        mu,
        sigma2: fits.iter().map(|f| f.sigma2).collect(),
        mask: mask.map(<[Vec<bool>]>::to_vec),
        n_obs: fits.iter().map(|f| f.n).collect(),
        std_err: fits.into_iter().map(|f| f.std_err).collect(),
    })
}

/// One-step residuals `a_t` for `t = max_order + 1 ..= N s`, in time order.
///
/// The sequence ends with the last observation, so period labels follow from the series end.
pub fn residuals_par(model: &ParModel, series: &SeasonalSeries) -> Result<Vec<f64>> {
    model.validate_against(series)?;
    let z = series.as_slice();
    let start = model.max_order();
    if start >= z.len() {
        return Err(Error::TooShort("series shorter than the model order".into()));
    }
    (start..z.len()).map(|i| Ok(z[i] - model.one_step(&z[..i])?)).collect()
}

/// Orders from the cut-off of the periodic PACF: for each period, the largest lag whose
/// partial autocorrelation lies outside the `alpha`-level band `z_{1-alpha/2} / sqrt(N)`.
pub fn select_orders_minimal(series: &SeasonalSeries, p_max: usize, alpha: f64) -> Result<Vec<usize>> {
    if p_max < 1 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let pacf = periodic_pacf(series, p_max)?;
    let band = normal_quantile(1.0 - alpha / 2.0) / (series.n_years() as f64).sqrt();
    Ok(pacf
        .pacf
        .iter()
        .map(|row| row.iter().rposition(|v| v.abs() > band).map_or(0, |k| k + 1))
        .collect())
}

fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}

/// Information criterion used to rank subset models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    /// `n ln(sigma2) + penalty(k)` with `n` usable years and `k` free coefficients.
    pub fn score(self, sigma2: f64, n: usize, k: usize) -> f64 {
        let n_f = n as f64;
        let penalty = match self {
            Criterion::Aic => 2.0 * k as f64,
            Criterion::Bic => k as f64 * n_f.ln(),
        };
        n_f * floor_variance(sigma2).ln() + penalty
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            other => Err(Error::InvalidArgument(format!("unknown criterion {other}"))),
        }
    }
}

/// Outcome of the exhaustive subset search.
#[derive(Debug, Clone)]
pub struct SubsetSearch {
    pub model: ParModel,
    /// Criterion value of the selected subset, per period.
    pub scores: Vec<f64>,
    /// Number of lag subsets fitted, per period.
    pub masks_evaluated: Vec<usize>,
}

/// Largest `p_max` accepted by the subset search; the search fits `2^p_max` models per period.
pub const SUBSET_P_MAX_LIMIT: usize = 14;

/// Exhaustive search over lag subsets of `1..=p_max` for every period.
///
/// All subsets of a period are fitted on the same years (those with a full `p_max`
/// window), so their criteria are comparable. Ties go to fewer coefficients, then to
/// the lexicographically smaller list of included lags.
pub fn subset_search(series: &SeasonalSeries, p_max: usize, criterion: Criterion) -> Result<SubsetSearch> {
    if p_max > SUBSET_P_MAX_LIMIT {
        return Err(Error::InvalidArgument(format!("p_max {p_max} exceeds the limit {SUBSET_P_MAX_LIMIT}")));
    }
    let s = series.s();
    let mu = periodic_mean(series);
    let centered = centered_values(series, &mu);

    let per_period: Vec<(Vec<bool>, f64, usize)> = (1..=s)
        .into_par_iter()
        .map(|m| best_subset(&centered, s, m, p_max, criterion))
        .collect::<Result<_>>()?;

    let masks: Vec<Vec<bool>> = per_period.iter().map(|(mask, _, _)| mask.clone()).collect();
    let model = fit_par(series, &vec![p_max; s], Some(&masks))?;
    Ok(SubsetSearch {
        model,
        scores: per_period.iter().map(|(_, score, _)| *score).collect(),
        masks_evaluated: per_period.iter().map(|(_, _, n)| *n).collect(),
    })
}

/// Subset PAR selected by AIC or BIC. See [`subset_search`].
pub fn select_orders_subset(series: &SeasonalSeries, p_max: usize, criterion: Criterion) -> Result<ParModel> {
    Ok(subset_search(series, p_max, criterion)?.model)
}

fn best_subset(centered: &[f64], s: usize, m: usize, p_max: usize, criterion: Criterion) -> Result<(Vec<bool>, f64, usize)> {
    let (x_full, y) = period_design(centered, s, m, p_max);
    let n = y.len();
    if n < p_max + 2 {
        return Err(Error::TooShort(format!("period {m} has {n} usable years for order {p_max}")));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    for bits in 0u32..(1u32 << p_max) {
        let lags: Vec<usize> = (1..=p_max).filter(|&j| bits & (1 << (j - 1)) != 0).collect();
        evaluated += 1;
        let Some((_, rss)) = linalg::ols(&select_columns(&x_full, &lags), &y) else {
            continue;
        };
        let score = criterion.score(rss / n as f64, n, lags.len());
        let better = match &best {
            None => true,
            Some((best_score, best_lags)) => {
                let tol = 1e-12 * best_score.abs().max(1.0);
                if (score - best_score).abs() <= tol {
                    (lags.len(), &lags) < (best_lags.len(), best_lags)
                } else {
                    score < *best_score
                }
            }
        };
        if better {
            best = Some((score, lags));
        }
    }
    let (score, lags) = best.ok_or(Error::SingularFit { period: m, order: p_max })?;
    let mut mask = vec![false; p_max];
    lags.iter().for_each(|&j| mask[j - 1] = true);
    Ok((mask, score, evaluated))
}

/// Simulates `n_years` of the model with Gaussian innovations after discarding
/// `burn_in` years started from the periodic means.
pub fn simulate_par(model: &ParModel, n_years: usize, seed: u64, burn_in: usize) -> Result<SeasonalSeries> {
    let s = model.s;
    let total = (n_years + burn_in) * s;
    let mut rng = rng_from_seed(seed);
    let sd: Vec<f64> = model.sigma2.iter().map(|v| v.sqrt()).collect();
    let mut dev = vec![0.0; total];
    for i in 0..total {
        let m = i % s;
        let mut x = 0.0;
        for (j, &phi) in model.phi[m].iter().enumerate() {
            if i > j {
                x += phi * dev[i - j - 1];
            }
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        x += sd[m] * eps;
        if !x.is_finite() || (x + model.mu[m]).abs() > DIVERGENCE_LIMIT {
            return Err(Error::Unstable { t: i + 1 });
        }
        dev[i] = x;
    }
    let values: Vec<f64> = dev[burn_in * s..].iter().enumerate().map(|(i, &x)| x + model.mu[i % s]).collect();
    SeasonalSeries::from_flat(&values, s)
}

/// Forecasts the `horizon` values following `series`, feeding earlier forecasts back
/// in place of unknown observations.
pub fn forecast_par(model: &ParModel, series: &SeasonalSeries, horizon: usize) -> Result<Vec<f64>> {
    model.validate_against(series)?;
    let mut history = series.as_slice().to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = model.one_step(&history)?;
        history.push(next);
        out.push(next);
    }
    Ok(out)
}
