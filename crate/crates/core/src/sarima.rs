//! Multiplicative seasonal ARMA, `(p, d, q)(P, D, Q)_s`.
//!
//! Polynomials follow the Box-Jenkins sign convention:
//!
//! ```text
//! Phi(B^s) phi(B) (1 - B^s)^D (1 - B)^d (Z_t - mean) = Theta(B^s) theta(B) a_t
//! phi(B) = 1 - phi_1 B - ... - phi_p B^p        theta(B) = 1 - theta_1 B - ... - theta_q B^q
//! ```
//!
//! and likewise for the seasonal polynomials in `B^s`. The mean applies to the
//! differenced series. Estimation minimizes the conditional sum of squares.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, Minimum, NelderMeadOptions};
use crate::rng::rng_from_seed;
use crate::series::SeasonalSeries;

/// Largest order accepted for any single polynomial.
pub const MAX_ORDER: usize = 5;

/// Companion eigenvalues must stay this far inside the unit circle.
const ROOT_TOL: f64 = 1e-6;

const DIVERGENCE_LIMIT: f64 = 1e12;

/// Number of optimizer starts in [`fit_sarima`]: the origin plus jittered copies.
pub const RESTARTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SarimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub s: usize,
    pub include_mean: bool,
}

impl SarimaSpec {
    /// Builds a spec; the mean is included only when there is no differencing.
    pub fn new(order: (usize, usize, usize), seasonal: (usize, usize, usize), s: usize) -> Result<Self> {
        let (p, d, q) = order;
        let (seasonal_p, seasonal_d, seasonal_q) = seasonal;
        if [p, d, q, seasonal_p, seasonal_d, seasonal_q].iter().any(|&o| o > MAX_ORDER) {
            return Err(Error::InvalidArgument(format!("orders are limited to {MAX_ORDER}")));
        }
        if s < 1 {
            return Err(Error::InvalidArgument("seasonal period must be positive".into()));
        }
        Ok(SarimaSpec { p, d, q, seasonal_p, seasonal_d, seasonal_q, s, include_mean: d + seasonal_d == 0 })
    }

    pub fn with_mean(mut self, include_mean: bool) -> Self {
        self.include_mean = include_mean;
        self
    }

    /// Number of ARMA coefficients, excluding the mean.
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Length of the free parameter vector.
    pub fn n_params(&self) -> usize {
        self.n_coefficients() + usize::from(self.include_mean)
    }

    /// Degree of the expanded autoregressive polynomial `phi(B) Phi(B^s)`.
    pub fn ar_degree(&self) -> usize {
        self.p + self.s * self.seasonal_p
    }

    /// Observations lost to differencing.
    pub fn diff_loss(&self) -> usize {
        self.d + self.s * self.seasonal_d
    }
}

impl std::fmt::Display for SarimaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{},{})({},{},{})_{}",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.s
        )
    }
}

/// Model coefficients in Box-Jenkins sign convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SarimaParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    pub mean: f64,
}

impl SarimaParams {
    /// Unpacks `[phi, theta, Phi, Theta, mean?]`.
    pub fn from_vector(spec: &SarimaSpec, v: &[f64]) -> Result<Self> {
        if v.len() != spec.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters for {spec}, got {}",
                spec.n_params(),
                v.len()
            )));
        }
        let mut it = v.iter().copied();
        let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<f64>>();
        let phi = take(spec.p);
        let theta = take(spec.q);
        let seasonal_phi = take(spec.seasonal_p);
        let seasonal_theta = take(spec.seasonal_q);
        let mean = if spec.include_mean { take(1)[0] } else { 0.0 };
        Ok(SarimaParams { phi, theta, seasonal_phi, seasonal_theta, mean })
    }

    pub fn to_vector(&self, spec: &SarimaSpec) -> Vec<f64> {
        let mut v = Vec::with_capacity(spec.n_params());
        v.extend(&self.phi);
        v.extend(&self.theta);
        v.extend(&self.seasonal_phi);
        v.extend(&self.seasonal_theta);
        if spec.include_mean {
            v.push(self.mean);
        }
        v
    }

    fn check_shape(&self, spec: &SarimaSpec) -> Result<()> {
        let shape = [self.phi.len(), self.theta.len(), self.seasonal_phi.len(), self.seasonal_theta.len()];
        if shape != [spec.p, spec.q, spec.seasonal_p, spec.seasonal_q] {
            return Err(Error::InvalidArgument(format!("parameter shape {shape:?} does not match {spec}")));
        }
        Ok(())
    }

    /// All four polynomials have their roots outside the unit circle.
    pub fn is_admissible(&self) -> bool {
        [&self.phi, &self.theta, &self.seasonal_phi, &self.seasonal_theta]
            .iter()
            .all(|c| roots_outside_unit_circle(c))
    }
}

/// Whether `1 - c_1 x - ... - c_k x^k` has every root strictly outside the unit circle,
/// judged from the moduli of its companion-matrix eigenvalues.
pub fn roots_outside_unit_circle(coefs: &[f64]) -> bool {
    let k = coefs.len();
    let limit = 1.0 - ROOT_TOL;
    match k {
        0 => true,
        1 => coefs[0].abs() < limit,
        _ => {
            if coefs.iter().any(|c| !c.is_finite()) {
                return false;
            }
            let companion = DMatrix::from_fn(k, k, |i, j| if i == 0 { coefs[j] } else if i == j + 1 { 1.0 } else { 0.0 });
            companion.complex_eigenvalues().iter().all(|z| z.norm() < limit)
        }
    }
}

/// Coefficients `[1, -c_1, ..., -c_k]` of a Box-Jenkins polynomial in `B^spacing`.
fn bj_poly(coefs: &[f64], spacing: usize) -> Vec<f64> {
    let mut out = vec![0.0; coefs.len() * spacing + 1];
    out[0] = 1.0;
    for (i, &c) in coefs.iter().enumerate() {
        out[(i + 1) * spacing] = -c;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Expanded `phi(B) Phi(B^s)` and `theta(B) Theta(B^s)`, each with leading 1.
fn expanded_polys(params: &SarimaParams, s: usize) -> (Vec<f64>, Vec<f64>) {
    let ar = poly_mul(&bj_poly(&params.phi, 1), &bj_poly(&params.seasonal_phi, s));
    let ma = poly_mul(&bj_poly(&params.theta, 1), &bj_poly(&params.seasonal_theta, s));
    (ar, ma)
}

/// `(1 - B)^d (1 - B^s)^D` as coefficients with leading 1.
fn diff_poly(d: usize, seasonal_d: usize, s: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..d {
        out = poly_mul(&out, &[1.0, -1.0]);
    }
    for _ in 0..seasonal_d {
        out = poly_mul(&out, &bj_poly(&[1.0], s));
    }
    out
}

/// Applies `(1 - B)^d (1 - B^s)^D` to a t-ordered sequence.
pub fn difference_flat(values: &[f64], d: usize, seasonal_d: usize, s: usize) -> Result<Vec<f64>> {
    let loss = d + s * seasonal_d;
    if values.len() <= loss {
        return Err(Error::TooShort(format!("{} values cannot absorb {loss} differences", values.len())));
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    for _ in 0..seasonal_d {
        out = (s..out.len()).map(|i| out[i] - out[i - s]).collect();
    }
    Ok(out)
}

/// Seasonal and non-seasonal differencing of a series.
pub fn difference(series: &SeasonalSeries, d: usize, seasonal_d: usize) -> Result<Vec<f64>> {
    difference_flat(series.as_slice(), d, seasonal_d, series.s())
}

/// Innovation recursion on the differenced scale.
///
/// Residuals before the autoregressive window is complete are zero; so are pre-sample
/// residuals. Returns the residual sequence (same length as `diffed`).
fn innovations(ar: &[f64], ma: &[f64], diffed: &[f64], mean: f64) -> Vec<f64> {
    let n = diffed.len();
    let start = ar.len() - 1;
    let mut a = vec![0.0; n];
    for t in start..n {
        let mut v = 0.0;
        for (j, &c) in ar.iter().enumerate() {
            v += c * (diffed[t - j] - mean);
        }
        for (j, &e) in ma.iter().enumerate().skip(1) {
            if j > t {
                break;
            }
            v -= e * a[t - j];
        }
        a[t] = v;
    }
    a
}

/// Conditional sum of squares of `diffed` under the parameter vector `[phi, theta, Phi, Theta, mean?]`.
///
/// Sums squared innovations over the times where the full autoregressive window is
/// available. Non-finite intermediate values yield `+inf`.
pub fn css(params: &[f64], diffed: &[f64], spec: &SarimaSpec) -> Result<f64> {
    let params = SarimaParams::from_vector(spec, params)?;
    Ok(css_of(&params, diffed, spec))
}

fn css_of(params: &SarimaParams, diffed: &[f64], spec: &SarimaSpec) -> f64 {
    let (ar, ma) = expanded_polys(params, spec.s);
    if ar.len() > diffed.len() {
        return f64::INFINITY;
    }
    let total: f64 = innovations(&ar, &ma, diffed, params.mean).iter().map(|a| a * a).sum();
    if total.is_finite() {
        total
    } else {
        f64::INFINITY
    }
}

/// Fitted seasonal ARMA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaFit {
    pub spec: SarimaSpec,
    pub params: SarimaParams,
    pub sigma2: f64,
    /// Innovations on the differenced scale; the last entry belongs to the last observation.
    pub residuals: Vec<f64>,
    pub css: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SarimaFit {
    /// Evaluates fixed parameters on a series: residuals, conditional sum of squares and variance.
    pub fn from_params(spec: SarimaSpec, params: SarimaParams, series: &SeasonalSeries) -> Result<Self> {
        params.check_shape(&spec)?;
        let diffed = difference(series, spec.d, spec.seasonal_d)?;
        let (ar, ma) = expanded_polys(&params, spec.s);
        if ar.len() > diffed.len() {
            return Err(Error::TooShort(format!("{} differenced values for AR degree {}", diffed.len(), ar.len() - 1)));
        }
        let residuals = innovations(&ar, &ma, &diffed, params.mean);
        let css: f64 = residuals.iter().map(|a| a * a).sum();
        Ok(SarimaFit {
            spec,
            params,
            sigma2: css / residuals.len() as f64,
            residuals,
            css,
            converged: true,
            iterations: 0,
        })
    }

    /// One-step forecasts of `values[t]` for every `t >= first`, each conditioned on the
    /// actual observations before `t`, with the parameters held fixed.
    pub fn one_step_forecasts(&self, values: &[f64], first: usize) -> Result<Vec<f64>> {
        let spec = &self.spec;
        let diffed = difference_flat(values, spec.d, spec.seasonal_d, spec.s)?;
        let (ar, ma) = expanded_polys(&self.params, spec.s);
        let loss = spec.diff_loss();
        if first < loss + ar.len() - 1 {
            return Err(Error::TooShort(format!(
                "forecasts need {} observations of history, asked from {first}",
                loss + ar.len() - 1
            )));
        }
        let a = innovations(&ar, &ma, &diffed, self.params.mean);
        // The one-step error of the recursion is the innovation itself.
        Ok((first..values.len()).map(|t| values[t] - a[t - loss]).collect())
    }
}

fn sample_mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Fits the model by minimizing the conditional sum of squares with Nelder-Mead.
///
/// Starts from the origin (mean at the sample mean of the differenced series) and
/// from [`RESTARTS`]` - 1` jittered copies, keeps the best, and polishes it with a
/// fresh simplex. Non-stationary or non-invertible points score `+inf`.
pub fn fit_sarima(series: &SeasonalSeries, spec: &SarimaSpec) -> Result<SarimaFit> {
    fit_sarima_flat(series.as_slice(), spec)
}

/// [`fit_sarima`] on raw t-ordered values.
pub fn fit_sarima_flat(values: &[f64], spec: &SarimaSpec) -> Result<SarimaFit> {
    let diffed = difference_flat(values, spec.d, spec.seasonal_d, spec.s)?;
    let k = spec.n_params();
    if diffed.len() < 10 * (k + 1) || diffed.len() <= spec.ar_degree() {
        return Err(Error::TooShort(format!("{} differenced values for {k} parameters", diffed.len())));
    }
    let (w_mean, w_var) = sample_mean_var(&diffed);
    let mean_step = if w_var > 0.0 { 0.1 * w_var.sqrt() } else { 0.1 };

    let objective = |v: &[f64]| -> f64 {
        match SarimaParams::from_vector(spec, v) {
            Ok(p) if p.is_admissible() => css_of(&p, &diffed, spec),
            _ => f64::INFINITY,
        }
    };

    let mut origin = vec![0.0; k];
    if spec.include_mean {
        origin[k - 1] = w_mean;
    }
    let mut steps = vec![0.1; k];
    if spec.include_mean {
        steps[k - 1] = mean_step;
    }
    let opts = NelderMeadOptions::default();

    let mut rng = rng_from_seed(0x5EA5_0A1);
    let mut best: Option<Minimum> = None;
    let mut total_iter = 0;
    let mut any_converged = false;
    for restart in 0..RESTARTS {
        let mut start = origin.clone();
        if restart > 0 {
            for (i, x) in start.iter_mut().enumerate() {
                let u: f64 = rng.random_range(-0.3..0.3);
                *x += if spec.include_mean && i == k - 1 { u * 10.0 * mean_step } else { u };
            }
            if !objective(&start).is_finite() {
                start.clone_from(&origin);
            }
        }
        let run = nelder_mead(objective, &start, &steps, &opts);
        total_iter += run.iterations;
        any_converged |= run.converged;
        if best.as_ref().is_none_or(|b| run.f < b.f) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    let polish_steps: Vec<f64> = steps.iter().map(|s| s * 0.1).collect();
    let polished = nelder_mead(objective, &best.x, &polish_steps, &opts);
    total_iter += polished.iterations;
    any_converged |= polished.converged;
    if polished.f <= best.f {
        best = Minimum { converged: polished.converged || best.converged, ..polished };
    }
    if !any_converged {
        return Err(Error::NoConvergence { iterations: opts.max_iter });
    }
    if !best.f.is_finite() {
        return Err(Error::NoConvergence { iterations: total_iter });
    }

    let params = SarimaParams::from_vector(spec, &best.x)?;
    let (ar, ma) = expanded_polys(&params, spec.s);
    let residuals = innovations(&ar, &ma, &diffed, params.mean);
    let css: f64 = residuals.iter().map(|a| a * a).sum();
    Ok(SarimaFit {
        spec: *spec,
        params,
        sigma2: css / residuals.len() as f64,
        residuals,
        css,
        converged: best.converged,
        iterations: total_iter,
    })
}

/// Forecasts the `horizon` values after the end of `series` with future innovations set to zero.
pub fn forecast_sarima(fit: &SarimaFit, series: &SeasonalSeries, horizon: usize) -> Result<Vec<f64>> {
    let spec = &fit.spec;
    let z = series.as_slice();
    let diffed = difference_flat(z, spec.d, spec.seasonal_d, spec.s)?;
    let (ar, ma) = expanded_polys(&fit.params, spec.s);
    if ar.len() > diffed.len() {
        return Err(Error::TooShort("series shorter than the autoregressive window".into()));
    }
    let mean = fit.params.mean;
    let mut w: Vec<f64> = diffed.iter().map(|v| v - mean).collect();
    let mut a = innovations(&ar, &ma, &diffed, mean);
    let mut z_ext = z.to_vec();
    let dpoly = diff_poly(spec.d, spec.seasonal_d, spec.s);
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let t = w.len();
        let mut next = 0.0;
        for (j, &c) in ar.iter().enumerate().skip(1) {
            if j <= t {
                next -= c * w[t - j];
            }
        }
        for (j, &e) in ma.iter().enumerate().skip(1) {
            if j <= t {
                next += e * a[t - j];
            }
        }
        w.push(next);
        a.push(0.0);
        let tz = z_ext.len();
        let mut z_next = next + mean;
        for (j, &c) in dpoly.iter().enumerate().skip(1) {
            z_next -= c * z_ext[tz - j];
        }
        z_ext.push(z_next);
        out.push(z_next);
    }
    Ok(out)
}

/// Simulates `n_years` of the model with `N(0, sigma2)` innovations.
///
/// The differenced process is simulated with zero pre-sample values, the first
/// `burn_in` years are discarded, and differencing is inverted by cumulation from zero.
pub fn simulate_sarima(
    spec: &SarimaSpec,
    params: &SarimaParams,
    sigma2: f64,
    n_years: usize,
    seed: u64,
    burn_in: usize,
) -> Result<SeasonalSeries> {
    params.check_shape(spec)?;
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("innovation variance must be >= 0".into()));
    }
    let s = spec.s;
    let total = (n_years + burn_in) * s;
    let (ar, ma) = expanded_polys(params, s);
    let sd = sigma2.sqrt();
    let mut rng = rng_from_seed(seed);
    let mut a = vec![0.0; total];
    let mut w = vec![0.0; total];
    for t in 0..total {
        let eps: f64 = StandardNormal.sample(&mut rng);
        a[t] = sd * eps;
        let mut v = a[t];
        for (j, &c) in ar.iter().enumerate().skip(1) {
            if j <= t {
                v -= c * w[t - j];
            }
        }
        for (j, &e) in ma.iter().enumerate().skip(1) {
            if j <= t {
                v += e * a[t - j];
            }
        }
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Unstable { t: t + 1 });
        }
        w[t] = v;
    }
    let dpoly = diff_poly(spec.d, spec.seasonal_d, s);
    let mut z = vec![0.0; total];
    for t in 0..total {
        let mut v = w[t] + params.mean;
        for (j, &c) in dpoly.iter().enumerate().skip(1) {
            if j <= t {
                v -= c * z[t - j];
            }
        }
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Unstable { t: t + 1 });
        }
        z[t] = v;
    }
    SeasonalSeries::from_flat(&z[burn_in * s..], s)
}
