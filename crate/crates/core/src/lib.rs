//! Periodically correlated seasonal time series: periodic autoregression,
//! multiplicative seasonal ARMA, and a diagnostic for periodic correlation left in
//! seasonal ARMA residuals, with the Monte Carlo and forecast-comparison studies
//! built on them.

pub mod diagnostics;
pub mod error;
pub mod experiments;
mod linalg;
pub mod optimize;
pub mod par;
pub mod periodic_stats;
pub mod rng;
pub mod sarima;
pub mod series;

pub use diagnostics::{chi2_upper_tail, ljung_box, residual_periodic_acf, s_statistic, DiagnosticReport, LjungBox};
pub use error::{Error, Result};
pub use experiments::{backtest, combine_forecasts, compare_pairwise, table1_experiment, Combination, ForecastEval, ModelKind, MonteCarloSummary};
pub use par::{fit_par, forecast_par, residuals_par, select_orders_minimal, select_orders_subset, simulate_par, Criterion, ParModel};
pub use periodic_stats::{periodic_autocovariance, periodic_mean, periodic_pacf, PeriodicAcf, PeriodicPacf};
pub use sarima::{css, difference, fit_sarima, forecast_sarima, simulate_sarima, SarimaFit, SarimaParams, SarimaSpec};
pub use series::{read_csv, read_values, write_csv, Layout, LinearTime, SeasonalSeries, Transform};
