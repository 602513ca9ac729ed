//! Python bindings: series, PAR and seasonal ARMA fitting, the S test and the studies.

use periodiag_core as core;
use periodiag_core::experiments::{ForecastEval, ModelKind};
use periodiag_core::series::Layout;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(periodiag, PeriodiagError, PyValueError);

fn err(e: core::Error) -> PyErr {
    PeriodiagError::new_err(format!("{}: {e}", e.kind()))
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

#[pyclass(name = "SeasonalSeries", module = "periodiag", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeries(core::SeasonalSeries);

#[pymethods]
impl PySeries {
    #[new]
    #[pyo3(signature = (values, s, label = None))]
    fn new(values: Vec<f64>, s: usize, label: Option<String>) -> PyResult<Self> {
        let z = core::SeasonalSeries::from_flat(&values, s).py_err()?;
        Ok(PySeries(match label {
            Some(l) => z.with_label(l),
            None => z,
        }))
    }

    /// Reads a CSV; `layout` is "flat" or "year_by_period".
    #[staticmethod]
    #[pyo3(signature = (path, s, layout = "flat"))]
    fn from_csv(path: &str, s: usize, layout: &str) -> PyResult<Self> {
        let layout = match layout {
            "flat" => Layout::FlatColumn,
            "year_by_period" => Layout::YearByPeriod,
            other => return Err(PyValueError::new_err(format!("unknown layout '{other}'"))),
        };
        Ok(PySeries(core::read_csv(path, layout, s).py_err()?))
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        core::write_csv(&self.0, path, Layout::FlatColumn).py_err()
    }

    fn log_transform(&self) -> PyResult<Self> {
        Ok(PySeries(self.0.log_transform().py_err()?))
    }

    fn log_plus_c(&self, c: f64) -> PyResult<Self> {
        Ok(PySeries(self.0.log_plus_c(c).py_err()?))
    }

    fn truncate_years(&self, n_years: usize) -> PyResult<Self> {
        Ok(PySeries(self.0.truncate_years(n_years).py_err()?))
    }

    /// Value at 1-based year and period.
    fn get(&self, year: usize, period: usize) -> PyResult<f64> {
        if year == 0 || year > self.0.n_years() || period == 0 || period > self.0.s() {
            return Err(PyValueError::new_err("year or period out of range"));
        }
        Ok(self.0.get(year, period))
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    #[getter]
    fn s(&self) -> usize {
        self.0.s()
    }

    #[getter]
    fn n_years(&self) -> usize {
        self.0.n_years()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("SeasonalSeries(label={:?}, s={}, n_years={})", self.0.label, self.0.s(), self.0.n_years())
    }
}

#[pyclass(name = "ParModel", module = "periodiag", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParModel(core::ParModel);

#[pymethods]
impl PyParModel {
    #[new]
    fn new(phi: Vec<Vec<f64>>, mu: Vec<f64>, sigma2: Vec<f64>) -> PyResult<Self> {
        Ok(PyParModel(core::ParModel::new(phi, mu, sigma2).py_err()?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyParModel).map_err(|e| PeriodiagError::new_err(format!("ParseError: {e}")))
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("model serializes")
    }

    #[getter]
    fn s(&self) -> usize {
        self.0.s
    }

    #[getter]
    fn orders(&self) -> Vec<usize> {
        self.0.orders.clone()
    }

    #[getter]
    fn phi(&self) -> Vec<Vec<f64>> {
        self.0.phi.clone()
    }

    #[getter]
    fn mu(&self) -> Vec<f64> {
        self.0.mu.clone()
    }

    #[getter]
    fn sigma2(&self) -> Vec<f64> {
        self.0.sigma2.clone()
    }

    #[getter]
    fn std_err(&self) -> Vec<Vec<f64>> {
        self.0.std_err.clone()
    }

    #[getter]
    fn mask(&self) -> Option<Vec<Vec<bool>>> {
        self.0.mask.clone()
    }

    /// Forecast of the value after `history`, which starts at period 1.
    fn one_step(&self, history: Vec<f64>) -> PyResult<f64> {
        self.0.one_step(&history).py_err()
    }

    fn forecast(&self, series: &PySeries, horizon: usize) -> PyResult<Vec<f64>> {
        core::forecast_par(&self.0, &series.0, horizon).py_err()
    }

    fn residuals(&self, series: &PySeries) -> PyResult<Vec<f64>> {
        core::residuals_par(&self.0, &series.0).py_err()
    }

    #[pyo3(signature = (n_years, seed, burn_in = 50))]
    fn simulate(&self, n_years: usize, seed: u64, burn_in: usize) -> PyResult<PySeries> {
        Ok(PySeries(core::simulate_par(&self.0, n_years, seed, burn_in).py_err()?))
    }

    fn __repr__(&self) -> String {
        format!("ParModel(s={}, orders={:?})", self.0.s, self.0.orders)
    }
}

#[pyclass(name = "SarimaFit", module = "periodiag", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySarimaFit(core::SarimaFit);

#[pymethods]
impl PySarimaFit {
    #[getter]
    fn spec(&self) -> String {
        self.0.spec.to_string()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.params.phi.clone()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.0.params.theta.clone()
    }

    #[getter]
    fn seasonal_phi(&self) -> Vec<f64> {
        self.0.params.seasonal_phi.clone()
    }

    #[getter]
    fn seasonal_theta(&self) -> Vec<f64> {
        self.0.params.seasonal_theta.clone()
    }

    #[getter]
    fn mean(&self) -> Option<f64> {
        self.0.spec.include_mean.then_some(self.0.params.mean)
    }

    #[getter]
    fn sigma2(&self) -> f64 {
        self.0.sigma2
    }

    #[getter]
    fn css(&self) -> f64 {
        self.0.css
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.0.residuals.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    fn forecast(&self, series: &PySeries, horizon: usize) -> PyResult<Vec<f64>> {
        core::forecast_sarima(&self.0, &series.0, horizon).py_err()
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("fit serializes")
    }

    fn __repr__(&self) -> String {
        format!("SarimaFit({}, css={:.6})", self.0.spec, self.0.css)
    }
}

fn sarima_spec(order: (usize, usize, usize), seasonal: (usize, usize, usize), s: usize, mean: Option<bool>) -> PyResult<core::SarimaSpec> {
    let spec = core::SarimaSpec::new(order, seasonal, s).py_err()?;
    Ok(match mean {
        Some(m) => spec.with_mean(m),
        None => spec,
    })
}

fn criterion(name: &str) -> PyResult<core::Criterion> {
    name.parse().py_err()
}

#[pyfunction]
fn periodic_autocovariance<'py>(py: Python<'py>, series: &PySeries, max_lag: usize) -> PyResult<Bound<'py, PyDict>> {
    let acf = core::periodic_autocovariance(&series.0, max_lag).py_err()?;
    let d = PyDict::new(py);
    d.set_item("gamma", acf.gamma)?;
    d.set_item("rho", acf.rho)?;
    d.set_item("mu", acf.mu)?;
    d.set_item("n_pairs", acf.n_pairs)?;
    Ok(d)
}

#[pyfunction]
fn periodic_pacf<'py>(py: Python<'py>, series: &PySeries, max_order: usize) -> PyResult<Bound<'py, PyDict>> {
    let pacf = core::periodic_pacf(&series.0, max_order).py_err()?;
    let d = PyDict::new(py);
    d.set_item("pacf", pacf.pacf)?;
    d.set_item("band", pacf.band)?;
    d.set_item("n_years", pacf.n_years)?;
    Ok(d)
}

#[pyfunction]
fn fit_par(series: &PySeries, orders: Vec<usize>) -> PyResult<PyParModel> {
    Ok(PyParModel(core::fit_par(&series.0, &orders, None).py_err()?))
}

#[pyfunction]
#[pyo3(signature = (series, p_max, alpha = 0.05))]
fn select_orders_minimal(series: &PySeries, p_max: usize, alpha: f64) -> PyResult<Vec<usize>> {
    core::select_orders_minimal(&series.0, p_max, alpha).py_err()
}

#[pyfunction]
#[pyo3(signature = (series, p_max, criterion = "bic"))]
fn select_orders_subset(series: &PySeries, p_max: usize, criterion: &str) -> PyResult<PyParModel> {
    Ok(PyParModel(core::select_orders_subset(&series.0, p_max, self::criterion(criterion)?).py_err()?))
}

#[pyfunction]
#[pyo3(signature = (series, order, seasonal = (0, 0, 0), mean = None))]
fn fit_sarima(series: &PySeries, order: (usize, usize, usize), seasonal: (usize, usize, usize), mean: Option<bool>) -> PyResult<PySarimaFit> {
    let spec = sarima_spec(order, seasonal, series.0.s(), mean)?;
    Ok(PySarimaFit(core::fit_sarima(&series.0, &spec).py_err()?))
}

#[pyfunction]
#[pyo3(signature = (order, seasonal, s, n_years, seed, phi = vec![], theta = vec![], seasonal_phi = vec![], seasonal_theta = vec![], mean = 0.0, sigma2 = 1.0, burn_in = 10))]
#[allow(clippy::too_many_arguments)]
fn simulate_sarima(
    order: (usize, usize, usize),
    seasonal: (usize, usize, usize),
    s: usize,
    n_years: usize,
    seed: u64,
    phi: Vec<f64>,
    theta: Vec<f64>,
    seasonal_phi: Vec<f64>,
    seasonal_theta: Vec<f64>,
    mean: f64,
    sigma2: f64,
    burn_in: usize,
) -> PyResult<PySeries> {
    let spec = sarima_spec(order, seasonal, s, Some(mean != 0.0))?;
    let params = core::SarimaParams { phi, theta, seasonal_phi, seasonal_theta, mean };
    Ok(PySeries(core::simulate_sarima(&spec, &params, sigma2, n_years, seed, burn_in).py_err()?))
}

/// Residual periodic correlation test.
#[pyfunction]
fn s_statistic<'py>(py: Python<'py>, residuals: Vec<f64>, s: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = core::s_statistic(&residuals, s).py_err()?;
    let d = PyDict::new(py);
    d.set_item("r1", r.r1)?;
    d.set_item("n_years_eff", r.n_years_eff)?;
    d.set_item("statistic", r.statistic)?;
    d.set_item("df", r.df)?;
    d.set_item("p_value", r.p_value)?;
    Ok(d)
}

#[pyfunction]
fn residual_periodic_acf(residuals: Vec<f64>, s: usize, k: usize) -> PyResult<Vec<f64>> {
    core::residual_periodic_acf(&residuals, s, k).py_err()
}

/// Returns `(statistic, df, p_value)`.
#[pyfunction]
#[pyo3(signature = (residuals, max_lag, fitted_params = 0))]
fn ljung_box(residuals: Vec<f64>, max_lag: usize, fitted_params: usize) -> PyResult<(f64, usize, f64)> {
    let lb = core::ljung_box(&residuals, max_lag, fitted_params).py_err()?;
    Ok((lb.statistic, lb.df, lb.p_value))
}

#[pyfunction]
fn chi2_upper_tail(x: f64, df: usize) -> f64 {
    core::chi2_upper_tail(x, df)
}

#[pyfunction]
#[pyo3(signature = (phi1, n_years = 17, s = 12, n_reps = 1000, seed = 42))]
fn table1_experiment<'py>(py: Python<'py>, phi1: f64, n_years: usize, s: usize, n_reps: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| core::table1_experiment(phi1, n_years, s, n_reps, seed)).py_err()?;
    let d = PyDict::new(py);
    d.set_item("phi1", r.phi1)?;
    d.set_item("n_reps", r.n_reps)?;
    d.set_item("mean_s", r.mean_s)?;
    d.set_item("var_s", r.var_s)?;
    d.set_item("empirical_level", r.empirical_level)?;
    d.set_item("critical", r.critical)?;
    d.set_item("seed", r.seed)?;
    d.set_item("redraws", r.redraws)?;
    Ok(d)
}

fn eval_dict<'py>(py: Python<'py>, e: &ForecastEval) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", &e.label)?;
    d.set_item("forecasts", &e.forecasts)?;
    d.set_item("actuals", &e.actuals)?;
    d.set_item("rmse", e.rmse)?;
    d.set_item("mae", e.mae)?;
    d.set_item("n", e.n)?;
    Ok(d)
}

fn eval_from_dict(d: &Bound<'_, PyDict>) -> PyResult<ForecastEval> {
    let get = |k: &str| d.get_item(k)?.ok_or_else(|| PyValueError::new_err(format!("missing '{k}'")));
    let label: String = get("label")?.extract()?;
    ForecastEval::new(label, get("forecasts")?.extract()?, get("actuals")?.extract()?).py_err()
}

/// Hold-out one-step backtest. `model` is "mean", "par_minimal", "par_subset" or "sarima".
#[pyfunction]
#[pyo3(signature = (series, model, holdout_years = 3, p_max = 3, alpha = 0.05, criterion = "bic", order = (1, 0, 1), seasonal = (0, 1, 1)))]
#[allow(clippy::too_many_arguments)]
fn backtest<'py>(
    py: Python<'py>,
    series: &PySeries,
    model: &str,
    holdout_years: usize,
    p_max: usize,
    alpha: f64,
    criterion: &str,
    order: (usize, usize, usize),
    seasonal: (usize, usize, usize),
) -> PyResult<Bound<'py, PyDict>> {
    let kind = match model {
        "mean" => ModelKind::Mean,
        "par_minimal" => ModelKind::ParMinimal { p_max, alpha },
        "par_subset" => ModelKind::ParSubset { p_max, criterion: self::criterion(criterion)? },
        "sarima" => ModelKind::Sarima(sarima_spec(order, seasonal, series.0.s(), None)?),
        other => return Err(PyValueError::new_err(format!("unknown model '{other}'"))),
    };
    let eval = core::backtest(&series.0, &kind, holdout_years).py_err()?;
    eval_dict(py, &eval)
}

/// Pools backtest results; `method` is "average" or "inverse_mse".
#[pyfunction]
#[pyo3(signature = (evals, method = "average", window = 12))]
fn combine_forecasts<'py>(py: Python<'py>, evals: Vec<Bound<'py, PyDict>>, method: &str, window: usize) -> PyResult<Bound<'py, PyDict>> {
    let evals: Vec<ForecastEval> = evals.iter().map(eval_from_dict).collect::<PyResult<_>>()?;
    let method = match method {
        "average" => core::Combination::SimpleAverage,
        "inverse_mse" => core::Combination::InverseMse { window },
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    eval_dict(py, &core::combine_forecasts(&evals, method).py_err()?)
}

#[pymodule]
fn periodiag(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PeriodiagError", m.py().get_type::<PeriodiagError>())?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyParModel>()?;
    m.add_class::<PySarimaFit>()?;
    m.add_function(wrap_pyfunction!(periodic_autocovariance, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_pacf, m)?)?;
    m.add_function(wrap_pyfunction!(fit_par, m)?)?;
    m.add_function(wrap_pyfunction!(select_orders_minimal, m)?)?;
    m.add_function(wrap_pyfunction!(select_orders_subset, m)?)?;
    m.add_function(wrap_pyfunction!(fit_sarima, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sarima, m)?)?;
    m.add_function(wrap_pyfunction!(s_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(residual_periodic_acf, m)?)?;
    m.add_function(wrap_pyfunction!(ljung_box, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_upper_tail, m)?)?;
    m.add_function(wrap_pyfunction!(table1_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(backtest, m)?)?;
    m.add_function(wrap_pyfunction!(combine_forecasts, m)?)?;
    Ok(())
}
