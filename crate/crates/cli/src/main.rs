//! `periodiag`: periodic correlation diagnostics for seasonal time series.

mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use periodiag_core::experiments::{backtest_forecaster, ForecastEval};
use periodiag_core::sarima::MAX_ORDER;
use periodiag_core::series::{fmt_f64, LinearTime};
use periodiag_core::*;

use output::{Cell, Format, Report};

#[derive(Parser)]
#[command(name = "periodiag", version, about = "Periodic autoregression, seasonal ARMA and residual periodic-correlation diagnostics")]
struct Cli {
    /// Write results here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic autocovariances, autocorrelations or partial autocorrelations.
    Stats {
        #[command(flatten)]
        input: SeriesArgs,
        /// Largest lag (or PACF order); defaults to s.
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long, value_enum, default_value = "rho")]
        table: StatsTable,
    },
    /// Periodic autoregression.
    #[command(subcommand)]
    Par(ParCommand),
    /// Multiplicative seasonal ARMA.
    #[command(subcommand)]
    Sarima(SarimaCommand),
    /// Residual diagnostics.
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Simulation and forecasting studies.
    #[command(subcommand)]
    Exp(ExpCommand),
    /// Fit a seasonal ARMA and run the portmanteau and periodic-correlation checks.
    Analyze {
        #[command(flatten)]
        input: SeriesArgs,
        #[command(flatten)]
        model: SarimaArgs,
        /// Ljung-Box lags; defaults to 2s.
        #[arg(long)]
        ljung_box_lags: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ParCommand {
    /// Fit given per-period orders by least squares; prints the model as JSON.
    Fit {
        #[command(flatten)]
        input: SeriesArgs,
        /// One order for all periods, or one per period, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<usize>,
        /// Also write the residuals as a flat CSV.
        #[arg(long)]
        residuals_out: Option<PathBuf>,
    },
    /// Choose orders and fit; prints the model as JSON.
    Select {
        #[command(flatten)]
        input: SeriesArgs,
        #[command(flatten)]
        select: SelectArgs,
    },
    /// One-step forecasts over a hold-out, or multi-step forecasts past the end.
    Forecast {
        #[command(flatten)]
        input: SeriesArgs,
        /// Use this saved model (JSON) instead of selecting one.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        select: SelectArgs,
        /// Fit on all but the last K years and forecast them one step at a time.
        #[arg(long, conflicts_with = "horizon")]
        holdout_years: Option<usize>,
        /// Forecast this many steps past the end of the data.
        #[arg(long)]
        horizon: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SarimaCommand {
    /// Fit by conditional least squares; prints the fit as JSON.
    Fit {
        #[command(flatten)]
        input: SeriesArgs,
        #[command(flatten)]
        model: SarimaArgs,
        /// Also write the residuals as a flat CSV.
        #[arg(long)]
        residuals_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Test residuals for periodic lag-one correlation.
    STest {
        /// Flat CSV of residuals; the last value belongs to period s.
        residuals: PathBuf,
        #[arg(long, default_value_t = 12)]
        s: usize,
        /// Also report a Ljung-Box test with this many lags.
        #[arg(long)]
        ljung_box: Option<usize>,
        /// Fitted ARMA parameters subtracted from the Ljung-Box degrees of freedom.
        #[arg(long, default_value_t = 0)]
        fitted_params: usize,
    },
}

#[derive(Subcommand)]
enum ExpCommand {
    /// Monte Carlo size study of S under a fitted AR(1).
    Table1 {
        /// AR coefficients, comma separated; defaults to -0.9,-0.6,...,0.9.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phi: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 17)]
        n_years: usize,
        #[arg(long, default_value_t = 12)]
        s: usize,
    },
    /// Hold-out one-step forecasts with parameters frozen at the training fit.
    Backtest {
        #[command(flatten)]
        input: SeriesArgs,
        #[arg(long, value_enum)]
        model: ModelChoice,
        /// Years held out at the end.
        #[arg(long, default_value_t = 3)]
        holdout: usize,
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        sarima: SarimaArgs,
    },
    /// Pool forecast tables written by `exp backtest`.
    Combine {
        /// Forecast tables with `forecast` and `actual` columns.
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "average")]
        method: CombineMethod,
        /// Trailing window for inverse-MSE weights.
        #[arg(long, default_value_t = 12)]
        window: usize,
    },
}

#[derive(Args)]
struct SeriesArgs {
    /// Input CSV.
    data: PathBuf,
    /// Periods per year.
    #[arg(long, default_value_t = 12)]
    s: usize,
    #[arg(long, value_enum, default_value = "flat")]
    layout: LayoutChoice,
    /// Take natural logs first.
    #[arg(long, conflicts_with = "log_plus_c")]
    log: bool,
    /// Take ln(x + C) first.
    #[arg(long, value_name = "C", allow_hyphen_values = true)]
    log_plus_c: Option<f64>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, value_enum, default_value = "minimal")]
    method: SelectMethod,
    #[arg(long, value_enum, default_value = "bic")]
    criterion: CriterionChoice,
    #[arg(long, default_value_t = 3)]
    p_max: usize,
    /// Significance level of the PACF cut-off.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SarimaArgs {
    /// Non-seasonal p,d,q.
    #[arg(long, value_parser = parse_triple, default_value = "0,0,0")]
    order: (usize, usize, usize),
    /// Seasonal P,D,Q.
    #[arg(long, value_parser = parse_triple, default_value = "0,0,0")]
    seasonal: (usize, usize, usize),
    /// Estimate a mean (the default without differencing).
    #[arg(long, conflicts_with = "no_mean")]
    mean: bool,
    #[arg(long)]
    no_mean: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsTable {
    Gamma,
    Rho,
    Pacf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutChoice {
    Flat,
    YearByPeriod,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectMethod {
    Minimal,
    Subset,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionChoice {
    Aic,
    Bic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Mean,
    ParMinimal,
    ParSubset,
    Sarima,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineMethod {
    Average,
    InverseMse,
}

fn parse_triple(text: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("'{p}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [a, b, c] if parts.iter().all(|&o| o <= MAX_ORDER) => Ok((a, b, c)),
        [_, _, _] => Err(format!("orders are limited to {MAX_ORDER}")),
        _ => Err(format!("expected three comma-separated integers, got '{text}'")),
    }
}

impl SeriesArgs {
    fn load(&self) -> Result<SeasonalSeries> {
        let layout = match self.layout {
            LayoutChoice::Flat => Layout::FlatColumn,
            LayoutChoice::YearByPeriod => Layout::YearByPeriod,
        };
        let series = read_csv(&self.data, layout, self.s)?;
        match (self.log, self.log_plus_c) {
            (true, _) => series.log_transform(),
            (false, Some(c)) => series.log_plus_c(c),
            (false, None) => Ok(series),
        }
    }
}

impl SelectArgs {
    fn criterion(&self) -> Criterion {
        match self.criterion {
            CriterionChoice::Aic => Criterion::Aic,
            CriterionChoice::Bic => Criterion::Bic,
        }
    }

    fn fit(&self, series: &SeasonalSeries) -> Result<ParModel> {
        match self.method {
            SelectMethod::Minimal => {
                let orders = select_orders_minimal(series, self.p_max, self.alpha)?;
                fit_par(series, &orders, None)
            }
            SelectMethod::Subset => select_orders_subset(series, self.p_max, self.criterion()),
        }
    }
}

impl SarimaArgs {
    fn spec(&self, s: usize) -> Result<SarimaSpec> {
        let spec = SarimaSpec::new(self.order, self.seasonal, s)?;
        Ok(if self.mean {
            spec.with_mean(true)
        } else if self.no_mean {
            spec.with_mean(false)
        } else {
            spec
        })
    }
}

/// Where results go: a file when `--output` is given, otherwise standard output.
struct Sink {
    out: Box<dyn Write>,
    format: Format,
}

impl Sink {
    fn open(path: Option<&Path>, format: Format) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
            None => Box::new(BufWriter::new(std::io::stdout())),
        };
        Ok(Sink { out, format })
    }

    fn report(&mut self, report: &Report) -> Result<()> {
        report.write(&mut self.out, self.format)?;
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(self.out)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    for &v in values {
        writeln!(out, "{}", fmt_f64(v))?;
    }
    out.flush()?;
    Ok(())
}

fn stats(input: &SeriesArgs, max_lag: Option<usize>, table: StatsTable) -> Result<Report> {
    let series = input.load()?;
    let s = series.s();
    let max_lag = max_lag.unwrap_or(s);
    let mut report = Report::new(&["m", "lag", "value", "n_pairs", "band"]);
    match table {
        StatsTable::Gamma | StatsTable::Rho => {
            let acf = periodic_autocovariance(&series, max_lag)?;
            for m in 1..=s {
                for lag in 0..=max_lag {
                    let pairs = acf.n_pairs[m - 1][lag];
                    let (value, band) = match table {
                        StatsTable::Gamma => (acf.gamma(m, lag), Cell::from("")),
                        _ => (acf.rho(m, lag), Cell::from(1.96 / (pairs as f64).sqrt())),
                    };
                    report.row(vec![m.into(), lag.into(), value.into(), pairs.into(), band]);
                }
            }
        }
        StatsTable::Pacf => {
            let pacf = periodic_pacf(&series, max_lag)?;
            for m in 1..=s {
                for k in 1..=max_lag {
                    report.row(vec![m.into(), k.into(), pacf.get(m, k).into(), pacf.n_years.into(), pacf.band.into()]);
                }
            }
        }
    }
    Ok(report)
}

fn forecast_table(eval: &ForecastEval, first_t: usize, s: usize) -> Report {
    let mut report = Report::new(&["t", "year", "period", "forecast", "actual"]);
    for (i, (f, a)) in eval.forecasts.iter().zip(&eval.actuals).enumerate() {
        let lt = LinearTime::from_t(first_t + i, s);
        report.row(vec![lt.t.into(), lt.year.into(), lt.period.into(), (*f).into(), (*a).into()]);
    }
    report.note("model", eval.label.as_str());
    report.note("n", eval.n);
    report.note("rmse", eval.rmse);
    report.note("mae", eval.mae);
    report
}

fn par_forecast(
    input: &SeriesArgs,
    model_path: Option<&Path>,
    select: &SelectArgs,
    holdout_years: Option<usize>,
    horizon: Option<usize>,
) -> Result<Report> {
    let series = input.load()?;
    let s = series.s();
    let saved = match model_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            Some(serde_json::from_str::<ParModel>(&text).map_err(|e| Error::Parse { line: e.line() as u64, message: e.to_string() })?)
        }
        None => None,
    };
    if let Some(k) = holdout_years {
        let model = match saved {
            Some(m) => m,
            None => {
                if k >= series.n_years() {
                    return Err(Error::InvalidArgument("hold-out leaves no training data".into()));
                }
                select.fit(&series.truncate_years(series.n_years() - k)?)?
            }
        };
        let eval = backtest_forecaster(&series, &model, k, "par")?;
        return Ok(forecast_table(&eval, (series.n_years() - k) * s + 1, s));
    }
    let horizon = horizon.unwrap_or(s);
    let model = match saved {
        Some(m) => m,
        None => select.fit(&series)?,
    };
    let forecasts = forecast_par(&model, &series, horizon)?;
    let mut report = Report::new(&["t", "year", "period", "forecast"]);
    for (i, f) in forecasts.into_iter().enumerate() {
        let lt = LinearTime::from_t(series.len() + 1 + i, s);
        report.row(vec![lt.t.into(), lt.year.into(), lt.period.into(), f.into()]);
    }
    Ok(report)
}

fn s_test_report(residuals: &[f64], s: usize, ljung: Option<(usize, usize)>) -> Result<Report> {
    let mut diag = s_statistic(residuals, s)?;
    if let Some((lags, fitted)) = ljung {
        diag.ljung_box = Some(ljung_box(residuals, lags, fitted)?);
    }
    let mut report = Report::new(&["m", "r1", "n_m"]);
    for m in 0..s {
        report.row(vec![(m + 1).into(), diag.r1[m].into(), diag.n_years_eff[m].into()]);
    }
    report.note("S", diag.statistic);
    report.note("df", diag.df);
    report.note("p_value", diag.p_value);
    if let Some(lb) = diag.ljung_box {
        report.note("ljung_box", lb.statistic);
        report.note("ljung_box_df", lb.df);
        report.note("ljung_box_p_value", lb.p_value);
    }
    Ok(report)
}

fn table1(phi: &[f64], reps: usize, seed: u64, n_years: usize, s: usize) -> Result<Report> {
    let grid = if phi.is_empty() { vec![-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9] } else { phi.to_vec() };
    let mut report = Report::new(&[
        "phi1", "n_years", "s", "n_reps", "mean_s", "var_s", "empirical_level", "critical", "seed", "redraws",
    ]);
    let mut below = 0;
    for &p in &grid {
        let r = table1_experiment(p, n_years, s, reps, seed)?;
        below += usize::from(r.empirical_level < 0.05);
        report.row(vec![
            r.phi1.into(),
            r.n_years.into(),
            r.s.into(),
            r.n_reps.into(),
            r.mean_s.into(),
            r.var_s.into(),
            r.empirical_level.into(),
            r.critical.into(),
            r.seed.into(),
            r.redraws.into(),
        ]);
    }
    report.note("levels below 0.05", format!("{below} of {}", grid.len()));
    report.note("chi-squared reference", format!("mean {s}, variance {}", 2 * s));
    Ok(report)
}

fn exp_backtest(input: &SeriesArgs, model: ModelChoice, holdout: usize, select: &SelectArgs, sarima: &SarimaArgs) -> Result<Report> {
    let series = input.load()?;
    let kind = match model {
        ModelChoice::Mean => ModelKind::Mean,
        ModelChoice::ParMinimal => ModelKind::ParMinimal { p_max: select.p_max, alpha: select.alpha },
        ModelChoice::ParSubset => ModelKind::ParSubset { p_max: select.p_max, criterion: select.criterion() },
        ModelChoice::Sarima => ModelKind::Sarima(sarima.spec(series.s())?),
    };
    let eval = backtest(&series, &kind, holdout)?;
    Ok(forecast_table(&eval, (series.n_years() - holdout) * series.s() + 1, series.s()))
}

/// A forecast table read back from disk, with its leading key columns.
struct ForecastFile {
    eval: ForecastEval,
    keys: Vec<Vec<String>>,
    key_names: Vec<String>,
}

fn read_forecast_file(path: &Path) -> Result<ForecastFile> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let parse_err = |e: csv::Error| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() };
    let headers = rdr.headers().map_err(parse_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("{}: no '{name}' column", path.display())))
    };
    let (fi, ai) = (column("forecast")?, column("actual")?);
    let key_cols: Vec<usize> = (0..headers.len()).filter(|&j| j != fi && j != ai).collect();
    let (mut forecasts, mut actuals, mut keys) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |j: usize| {
            record[j].parse::<f64>().map_err(|e| Error::Parse { line, message: format!("'{}': {e}", &record[j]) })
        };
        forecasts.push(num(fi)?);
        actuals.push(num(ai)?);
        keys.push(key_cols.iter().map(|&j| record[j].to_string()).collect());
    }
    let label = path.file_stem().map(|p| p.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(ForecastFile {
        eval: ForecastEval::new(label, forecasts, actuals)?,
        keys,
        key_names: key_cols.iter().map(|&j| headers[j].to_string()).collect(),
    })
}

fn exp_combine(inputs: &[PathBuf], method: CombineMethod, window: usize) -> Result<Report> {
    let files: Vec<ForecastFile> = inputs.iter().map(|p| read_forecast_file(p)).collect::<Result<_>>()?;
    let evals: Vec<ForecastEval> = files.iter().map(|f| f.eval.clone()).collect();
    let method = match method {
        CombineMethod::Average => Combination::SimpleAverage,
        CombineMethod::InverseMse => Combination::InverseMse { window },
    };
    let combined = combine_forecasts(&evals, method)?;
    // Key columns come from the first table; only t/year/period are recognised.
    let first = &files[0];
    let known: Vec<(usize, &'static str)> = ["t", "year", "period"]
        .into_iter()
        .filter_map(|name| first.key_names.iter().position(|k| k == name).map(|j| (j, name)))
        .collect();
    let mut header: Vec<&'static str> = known.iter().map(|(_, n)| *n).collect();
    header.extend(["forecast", "actual"]);
    let mut report = Report::new(&header);
    for (i, (f, a)) in combined.forecasts.iter().zip(&combined.actuals).enumerate() {
        let mut row: Vec<Cell> = known.iter().map(|(j, _)| Cell::Text(first.keys[i][*j].clone())).collect();
        row.extend([(*f).into(), (*a).into()]);
        report.row(row);
    }
    report.note("model", combined.label.as_str());
    report.note("n", combined.n);
    report.note("rmse", combined.rmse);
    report.note("mae", combined.mae);
    for e in &evals {
        report.note(format!("rmse {}", e.label), e.rmse);
        let wins = compare_pairwise(std::slice::from_ref(&combined), std::slice::from_ref(e))?;
        report.note(format!("combined beats {}", e.label), if wins == 1 { "yes" } else { "no" });
    }
    Ok(report)
}

fn analyze(input: &SeriesArgs, model: &SarimaArgs, ljung_box_lags: Option<usize>, sink: &mut Sink) -> Result<()> {
    let series = input.load()?;
    let s = series.s();
    let spec = model.spec(s)?;
    let fit = fit_sarima(&series, &spec)?;
    let lags = ljung_box_lags.unwrap_or(2 * s);
    let mut report = s_test_report(&fit.residuals, s, Some((lags, spec.n_coefficients())))?;
    let mut head = Report::default();
    head.note("series", series.label.as_str());
    head.note("years", series.n_years());
    head.note("model", spec.to_string());
    for (name, values) in [
        ("phi", &fit.params.phi),
        ("theta", &fit.params.theta),
        ("seasonal_phi", &fit.params.seasonal_phi),
        ("seasonal_theta", &fit.params.seasonal_theta),
    ] {
        for (i, v) in values.iter().enumerate() {
            head.note(format!("{name}_{}", i + 1), *v);
        }
    }
    if spec.include_mean {
        head.note("mean", fit.params.mean);
    }
    head.note("sigma2", fit.sigma2);
    head.note("css", fit.css);
    head.note("converged", if fit.converged { "yes" } else { "no" });
    sink.report(&head)?;
    if sink.format == Format::Pretty {
        writeln!(sink.out)?;
    }
    let verdict = if report.summary.iter().any(|(k, v)| k == "p_value" && matches!(v, Cell::Num(p) if *p < 0.05)) {
        "periodic correlation remains in the residuals at the 5% level"
    } else {
        "no periodic correlation detected at the 5% level"
    };
    report.note("verdict", verdict);
    sink.report(&report)
}

fn run(cli: Cli) -> Result<()> {
    let mut sink = Sink::open(cli.output.as_deref(), cli.format)?;
    match cli.command {
        Command::Stats { input, max_lag, table } => sink.report(&stats(&input, max_lag, table)?)?,
        Command::Par(ParCommand::Fit { input, orders, residuals_out }) => {
            let series = input.load()?;
            let orders = if orders.len() == 1 { vec![orders[0]; series.s()] } else { orders };
            let model = fit_par(&series, &orders, None)?;
            if let Some(path) = residuals_out {
                write_values(&path, &residuals_par(&model, &series)?)?;
            }
            sink.json(&model)?;
        }
        Command::Par(ParCommand::Select { input, select }) => {
            let series = input.load()?;
            let model = select.fit(&series)?;
            sink.json(&model)?;
        }
        Command::Par(ParCommand::Forecast { input, model, select, holdout_years, horizon }) => {
            sink.report(&par_forecast(&input, model.as_deref(), &select, holdout_years, horizon)?)?;
        }
        Command::Sarima(SarimaCommand::Fit { input, model, residuals_out }) => {
            let series = input.load()?;
            let fit = fit_sarima(&series, &model.spec(series.s())?)?;
            if let Some(path) = residuals_out {
                write_values(&path, &fit.residuals)?;
            }
            sink.json(&fit)?;
        }
        Command::Diag(DiagCommand::STest { residuals, s, ljung_box, fitted_params }) => {
            let values = read_values(&residuals)?;
            sink.report(&s_test_report(&values, s, ljung_box.map(|k| (k, fitted_params)))?)?;
        }
        Command::Exp(ExpCommand::Table1 { phi, reps, seed, n_years, s }) => sink.report(&table1(&phi, reps, seed, n_years, s)?)?,
        Command::Exp(ExpCommand::Backtest { input, model, holdout, select, sarima }) => {
            sink.report(&exp_backtest(&input, model, holdout, &select, &sarima)?)?;
        }
        Command::Exp(ExpCommand::Combine { inputs, method, window }) => sink.report(&exp_combine(&inputs, method, window)?)?,
        Command::Analyze { input, model, ljung_box_lags } => analyze(&input, &model, ljung_box_lags, &mut sink)?,
    }
    sink.finish()
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(text) = std::env::var("PERIODIAG_THREADS") else {
        return Ok(());
    };
    let threads: usize = text.trim().parse().map_err(|_| format!("PERIODIAG_THREADS must be a positive integer, got '{text}'"))?;
    if threads == 0 {
        return Err("PERIODIAG_THREADS must be a positive integer, got '0'".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: InvalidArgument: {message}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {message}", e.kind());
            ExitCode::from(1)
        }
    }
}
