//! Reproducible studies: the Monte Carlo size study of `S`, hold-out forecast
//! backtests, and forecast combination.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{chi2_upper_tail, s_statistic};
use crate::error::{Error, Result};
use crate::par::{fit_par, select_orders_minimal, select_orders_subset, Criterion, ParModel};
use crate::rng::derive_seed;
use crate::sarima::{fit_sarima, simulate_sarima, SarimaFit, SarimaParams, SarimaSpec};
use crate::series::SeasonalSeries;

/// Forecasts scored against the realized values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastEval {
    pub label: String,
    pub forecasts: Vec<f64>,
    pub actuals: Vec<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
}

impl ForecastEval {
    pub fn new(label: impl Into<String>, forecasts: Vec<f64>, actuals: Vec<f64>) -> Result<Self> {
        if forecasts.len() != actuals.len() || forecasts.is_empty() {
            return Err(Error::MisalignedEvals(format!(
                "{} forecasts for {} actuals",
                forecasts.len(),
                actuals.len()
            )));
        }
        let n = forecasts.len();
        let (sse, sae) = forecasts.iter().zip(&actuals).fold((0.0, 0.0), |(sse, sae), (f, a)| {
            let e = a - f;
            (sse + e * e, sae + e.abs())
        });
        Ok(ForecastEval {
            label: label.into(),
            forecasts,
            actuals,
            rmse: (sse / n as f64).sqrt(),
            mae: sae / n as f64,
            n,
        })
    }

    pub fn mse(&self) -> f64 {
        self.rmse * self.rmse
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.actuals.iter().zip(&self.forecasts).map(|(a, f)| a - f)
    }
}

/// Empirical distribution of `S` under a fitted AR(1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub phi1: f64,
    pub n_years: usize,
    pub s: usize,
    pub n_reps: usize,
    pub mean_s: f64,
    pub var_s: f64,
    /// Fraction of replicates with `S > critical`.
    pub empirical_level: f64,
    pub critical: f64,
    pub seed: u64,
    /// Replicates whose fit failed and were drawn again.
    pub redraws: usize,
}

/// Upper `alpha` point of chi-squared on `df` degrees of freedom, by bisection.
pub fn chi2_critical(alpha: f64, df: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, df as f64 + 100.0 * (df as f64).sqrt() + 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_upper_tail(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fit attempts per replicate before the study gives up.
const MAX_ATTEMPTS: u64 = 20;

/// Burn-in years for the simulated AR(1) panels.
const BURN_IN_YEARS: usize = 10;

/// Size study of `S`: simulate a `(1,0,0)(0,0,0)_s` process with coefficient `phi1`
/// and unit innovations, fit the same model with a mean by conditional least
/// squares, and tally `S` of the residuals against the nominal 5% point.
///
/// Replicate `i` draws from seeds derived from `(seed, i, attempt)`, so the result
/// does not depend on scheduling.
pub fn table1_experiment(phi1: f64, n_years: usize, s: usize, n_reps: usize, seed: u64) -> Result<MonteCarloSummary> {
    if !(phi1.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("|phi1| must be < 1, got {phi1}")));
    }
    if n_reps == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let spec = SarimaSpec::new((1, 0, 0), (0, 0, 0), s)?.with_mean(true);
    let truth = SarimaParams { phi: vec![phi1], ..Default::default() };
    let critical = chi2_critical(0.05, s);

    let outcomes: Vec<(f64, usize)> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, rep);
            for attempt in 0..MAX_ATTEMPTS {
                let z = simulate_sarima(&spec, &truth, 1.0, n_years, derive_seed(rep_seed, attempt), BURN_IN_YEARS)?;
                let fitted = fit_sarima(&z, &spec).and_then(|fit| s_statistic(&fit.residuals, s));
                match fitted {
                    Ok(report) => return Ok((report.statistic, attempt as usize)),
                    Err(Error::NoConvergence { .. } | Error::DegenerateVariance { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoConvergence { iterations: 0 })
        })
        .collect::<Result<_>>()?;

    let n = n_reps as f64;
    let mean_s = outcomes.iter().map(|(v, _)| v).sum::<f64>() / n;
    let var_s = if n_reps > 1 {
        outcomes.iter().map(|(v, _)| (v - mean_s).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let exceed = outcomes.iter().filter(|(v, _)| *v > critical).count();
    Ok(MonteCarloSummary {
        phi1,
        n_years,
        s,
        n_reps,
        mean_s,
        var_s,
        empirical_level: exceed as f64 / n,
        critical,
        seed,
        redraws: outcomes.iter().map(|(_, r)| r).sum(),
    })
}

/// One-step-ahead predictor with frozen parameters.
pub trait Forecaster {
    /// Forecast of the value following `history` (which starts at period 1).
    fn one_step(&self, history: &[f64]) -> Result<f64>;

    /// Forecasts of `values[t]` for `t >= first`, each conditioned on `values[..t]`.
    fn one_step_range(&self, values: &[f64], first: usize) -> Result<Vec<f64>> {
        (first..values.len()).map(|t| self.one_step(&values[..t])).collect()
    }
}

impl Forecaster for ParModel {
    fn one_step(&self, history: &[f64]) -> Result<f64> {
        ParModel::one_step(self, history)
    }
}

impl Forecaster for SarimaFit {
    fn one_step(&self, history: &[f64]) -> Result<f64> {
        let mut extended = history.to_vec();
        extended.push(0.0);
        // The forecast of the appended slot does not depend on its value.
        Ok(self.one_step_forecasts(&extended, history.len())?[0])
    }

    fn one_step_range(&self, values: &[f64], first: usize) -> Result<Vec<f64>> {
        self.one_step_forecasts(values, first)
    }
}

/// Forecasts the training-sample mean.
#[derive(Debug, Clone, Copy)]
pub struct MeanForecaster(pub f64);

impl Forecaster for MeanForecaster {
    fn one_step(&self, _history: &[f64]) -> Result<f64> {
        Ok(self.0)
    }
}

/// Model families compared in hold-out backtests.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Overall training-sample mean.
    Mean,
    /// PAR with orders from the periodic PACF cut-off.
    ParMinimal { p_max: usize, alpha: f64 },
    /// Subset PAR chosen by AIC or BIC.
    ParSubset { p_max: usize, criterion: Criterion },
    Sarima(SarimaSpec),
}

impl ModelKind {
    pub fn label(&self) -> String {
        match self {
            ModelKind::Mean => "mean".into(),
            ModelKind::ParMinimal { .. } => "par-minimal".into(),
            ModelKind::ParSubset { criterion, .. } => format!("par-subset-{}", format!("{criterion:?}").to_lowercase()),
            ModelKind::Sarima(spec) => format!("sarima{spec}"),
        }
    }

    /// Fits the model to a training sample.
    pub fn fit(&self, train: &SeasonalSeries) -> Result<Box<dyn Forecaster + Send + Sync>> {
        Ok(match self {
            ModelKind::Mean => {
                let v = train.as_slice();
                Box::new(MeanForecaster(v.iter().sum::<f64>() / v.len() as f64))
            }
            ModelKind::ParMinimal { p_max, alpha } => {
                let orders = select_orders_minimal(train, *p_max, *alpha)?;
                Box::new(fit_par(train, &orders, None)?)
            }
            ModelKind::ParSubset { p_max, criterion } => Box::new(select_orders_subset(train, *p_max, *criterion)?),
            ModelKind::Sarima(spec) => Box::new(fit_sarima(train, spec)?),
        })
    }
}

/// Scores frozen-parameter one-step forecasts over the last `holdout_years` years.
pub fn backtest_forecaster(
    series: &SeasonalSeries,
    forecaster: &dyn Forecaster,
    holdout_years: usize,
    label: &str,
) -> Result<ForecastEval> {
    if holdout_years == 0 || holdout_years >= series.n_years() {
        return Err(Error::InvalidArgument(format!(
            "hold-out of {holdout_years} years from a {}-year series",
            series.n_years()
        )));
    }
    let first = (series.n_years() - holdout_years) * series.s();
    let values = series.as_slice();
    let forecasts = forecaster.one_step_range(values, first)?;
    ForecastEval::new(label, forecasts, values[first..].to_vec())
}

/// Fits `kind` on all but the last `holdout_years` years and scores one-step forecasts
/// over the hold-out, conditioning each forecast on every earlier actual.
pub fn backtest(series: &SeasonalSeries, kind: &ModelKind, holdout_years: usize) -> Result<ForecastEval> {
    if holdout_years >= series.n_years() {
        return Err(Error::InvalidArgument("hold-out leaves no training data".into()));
    }
    let train = series.truncate_years(series.n_years() - holdout_years)?;
    let model = kind.fit(&train)?;
    backtest_forecaster(series, model.as_ref(), holdout_years, &kind.label())
}

/// How forecasts are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    SimpleAverage,
    /// Weights proportional to `1 / MSE` over the trailing `window` errors; equal
    /// weights until `window` errors are available.
    InverseMse { window: usize },
}

impl Combination {
    pub fn label(&self) -> String {
        match self {
            Combination::SimpleAverage => "average".into(),
            Combination::InverseMse { window } => format!("inverse-mse-{window}"),
        }
    }
}

/// Pools aligned forecasts into a single evaluation.
pub fn combine_forecasts(evals: &[ForecastEval], method: Combination) -> Result<ForecastEval> {
    if evals.len() < 2 {
        return Err(Error::InvalidArgument("need at least two forecasts to combine".into()));
    }
    let actuals = &evals[0].actuals;
    if let Some(bad) = evals.iter().find(|e| &e.actuals != actuals) {
        return Err(Error::MisalignedEvals(format!("'{}' has different actuals from '{}'", bad.label, evals[0].label)));
    }
    let k = evals.len();
    let n = actuals.len();
    let combined: Vec<f64> = match method {
        Combination::SimpleAverage => (0..n).map(|t| pooled(evals, t, &vec![1.0; k])).collect(),
        Combination::InverseMse { window } => {
            if window == 0 {
                return Err(Error::InvalidArgument("window must be positive".into()));
            }
            (0..n)
                .map(|t| {
                    let weights = if t < window {
                        vec![1.0; k]
                    } else {
                        inverse_mse_weights(evals, t - window, t)
                    };
                    pooled(evals, t, &weights)
                })
                .collect()
        }
    };
    let label = format!("{}({})", method.label(), evals.iter().map(|e| e.label.as_str()).collect::<Vec<_>>().join(","));
    ForecastEval::new(label, combined, actuals.clone())
}

/// Weighted mean of the forecasts at `t`, written as an offset from the first so
/// that identical inputs pool to exactly the same value.
fn pooled(evals: &[ForecastEval], t: usize, weights: &[f64]) -> f64 {
    let base = evals[0].forecasts[t];
    let total: f64 = weights.iter().sum();
    base + evals.iter().zip(weights).map(|(e, w)| w * (e.forecasts[t] - base)).sum::<f64>() / total
}

fn inverse_mse_weights(evals: &[ForecastEval], from: usize, to: usize) -> Vec<f64> {
    let mses: Vec<f64> = evals
        .iter()
        .map(|e| (from..to).map(|t| (e.actuals[t] - e.forecasts[t]).powi(2)).sum::<f64>() / (to - from) as f64)
        .collect();
    if mses.iter().any(|&m| m == 0.0) {
        // Perfect recent forecasts share the weight.
        return mses.iter().map(|&m| if m == 0.0 { 1.0 } else { 0.0 }).collect();
    }
    mses.iter().map(|m| 1.0 / m).collect()
}

/// Number of datasets on which `a` has strictly smaller MSE than `b`.
pub fn compare_pairwise(a: &[ForecastEval], b: &[ForecastEval]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::MisalignedEvals(format!("{} evaluations against {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x.mse() < y.mse()).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::simulate_par;

    struct Oracle(Vec<f64>);

    impl Forecaster for Oracle {
        fn one_step(&self, history: &[f64]) -> Result<f64> {
            Ok(self.0[history.len()])
        }
    }

    fn white_noise(n_years: usize, seed: u64) -> SeasonalSeries {
        let model = ParModel::new(vec![vec![]; 12], vec![0.0; 12], vec![1.0; 12]).unwrap();
        simulate_par(&model, n_years, seed, 0).unwrap()
    }

    #[test]
    fn metrics() {
        let e = ForecastEval::new("x", vec![1.0, 2.0], vec![2.0, 0.0]).unwrap();
        assert!((e.rmse - (2.5f64).sqrt()).abs() < 1e-15);
        assert!((e.mae - 1.5).abs() < 1e-15);
        assert!((e.mse() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_foresight_has_zero_rmse() {
        let z = white_noise(10, 1);
        let eval = backtest_forecaster(&z, &Oracle(z.as_slice().to_vec()), 3, "oracle").unwrap();
        assert_eq!(eval.n, 36);
        assert_eq!(eval.rmse, 0.0);
    }

    #[test]
    fn mean_forecast_rmse_is_innovation_sd() {
        let mut sq = 0.0;
        let mut n = 0;
        for seed in 0..100 {
            let eval = backtest(&white_noise(20, seed), &ModelKind::Mean, 3).unwrap();
            sq += eval.mse() * eval.n as f64;
            n += eval.n;
        }
        let rmse = (sq / n as f64).sqrt();
        assert!((rmse - 1.0).abs() < 0.1, "{rmse}");
    }

    #[test]
    fn combining_with_itself_is_identity() {
        let e = ForecastEval::new("a", vec![1.0, 2.0, 3.0], vec![1.5, 1.0, 3.5]).unwrap();
        for method in [Combination::SimpleAverage, Combination::InverseMse { window: 2 }] {
            let c = combine_forecasts(&[e.clone(), e.clone()], method).unwrap();
            assert_eq!(c.forecasts, e.forecasts);
            assert_eq!(c.rmse, e.rmse);
        }
    }

    #[test]
    fn symmetric_errors_cancel() {
        let y = vec![1.0, -2.0, 3.0, 0.5];
        let e: Vec<f64> = vec![0.3, -0.7, 1.1, 0.2];
        let up = ForecastEval::new("up", y.iter().zip(&e).map(|(a, b)| a + b).collect(), y.clone()).unwrap();
        let down = ForecastEval::new("down", y.iter().zip(&e).map(|(a, b)| a - b).collect(), y.clone()).unwrap();
        let c = combine_forecasts(&[up, down], Combination::SimpleAverage).unwrap();
        assert!(c.rmse < 1e-15);
    }

    #[test]
    fn averaging_independent_errors_shrinks_rmse() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::rng_from_seed(5);
        let y: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut noisy = |y: &[f64]| -> Vec<f64> {
            y.iter()
                .map(|v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + e
                })
                .collect()
        };
        let a = ForecastEval::new("a", noisy(&y), y.clone()).unwrap();
        let b = ForecastEval::new("b", noisy(&y), y.clone()).unwrap();
        let c = combine_forecasts(&[a.clone(), b.clone()], Combination::SimpleAverage).unwrap();
        let expected = ((a.mse() + b.mse()) / 2.0).sqrt() / 2f64.sqrt();
        assert!((c.rmse / expected - 1.0).abs() < 0.1);
    }

    #[test]
    fn inverse_mse_favours_the_accurate_forecast() {
        let y = vec![0.0; 20];
        let good = ForecastEval::new("good", vec![0.1; 20], y.clone()).unwrap();
        let bad = ForecastEval::new("bad", vec![1.0; 20], y.clone()).unwrap();
        let c = combine_forecasts(&[good, bad], Combination::InverseMse { window: 5 }).unwrap();
        assert!((c.forecasts[0] - 0.55).abs() < 1e-12);
        // Weights 100 : 1 after the window fills.
        assert!((c.forecasts[10] - (0.1 * 100.0 + 1.0) / 101.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned_actuals_are_rejected() {
        let a = ForecastEval::new("a", vec![1.0], vec![1.0]).unwrap();
        let b = ForecastEval::new("b", vec![1.0], vec![2.0]).unwrap();
        assert!(matches!(combine_forecasts(&[a, b], Combination::SimpleAverage), Err(Error::MisalignedEvals(_))));
    }

    #[test]
    fn pairwise_counts() {
        let y = vec![0.0, 0.0];
        let near = ForecastEval::new("near", vec![0.1, 0.1], y.clone()).unwrap();
        let far = ForecastEval::new("far", vec![1.0, 1.0], y.clone()).unwrap();
        let list = vec![near.clone(), near.clone(), near.clone()];
        assert_eq!(compare_pairwise(&list, &list).unwrap(), 0);
        assert_eq!(compare_pairwise(&list, &vec![far; 3]).unwrap(), 3);
        assert!(compare_pairwise(&list, &list[..2]).is_err());
    }

    #[test]
    fn critical_value_matches_nominal_point() {
        assert!((chi2_critical(0.05, 12) - 21.0261).abs() < 1e-4);
    }

    #[test]
    fn table1_is_deterministic() {
        let a = table1_experiment(0.6, 17, 12, 20, 7).unwrap();
        let b = table1_experiment(0.6, 17, 12, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(table1_experiment(1.0, 17, 12, 20, 7).is_err());
    }

    #[test]
    fn holdout_must_leave_training_data() {
        assert!(backtest(&white_noise(5, 1), &ModelKind::Mean, 5).is_err());
    }
}
