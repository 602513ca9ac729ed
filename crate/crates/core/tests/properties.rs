//! Property checks over random inputs.

use periodiag_core::experiments::{combine_forecasts, Combination, ForecastEval};
use periodiag_core::series::{read_csv, write_csv, Layout, LinearTime};
use periodiag_core::*;
use proptest::prelude::*;

fn panel(s: usize, years: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, s * years)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn from_flat_round_trips(values in panel(4, 5)) {
        let z = SeasonalSeries::from_flat(&values, 4).unwrap();
        prop_assert_eq!(z.as_slice(), &values[..]);
        for (t, v) in values.iter().enumerate() {
            let lt = LinearTime::from_t(t + 1, 4);
            prop_assert_eq!(z.get(lt.year, lt.period), *v);
        }
    }

    #[test]
    fn log_then_exp_round_trips(values in prop::collection::vec(1e-6..1e6f64, 24)) {
        let z = SeasonalSeries::from_flat(&values, 12).unwrap().log_transform().unwrap();
        for (v, l) in values.iter().zip(z.as_slice()) {
            prop_assert!(((l.exp() - v) / v).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 12)) {
        let z = SeasonalSeries::from_flat(&values, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.csv");
        write_csv(&z, &path, Layout::FlatColumn).unwrap();
        let back = read_csv(&path, Layout::FlatColumn, 3).unwrap();
        prop_assert_eq!(back.as_slice(), z.as_slice());
        write_csv(&z, &path, Layout::YearByPeriod).unwrap();
        let back = read_csv(&path, Layout::YearByPeriod, 3).unwrap();
        prop_assert_eq!(back.as_slice(), z.as_slice());
    }

    #[test]
    fn periodic_correlations_are_bounded(values in panel(3, 8)) {
        let z = SeasonalSeries::from_flat(&values, 3).unwrap();
        let acf = periodic_autocovariance(&z, 6);
        prop_assume!(acf.is_ok());
        let acf = acf.unwrap();
        for m in 1..=3 {
            prop_assert!((acf.rho(m, 0) - 1.0).abs() < 1e-12);
            prop_assert!(acf.gamma(m, 0) >= 0.0);
            for l in 0..=6 {
                prop_assert!(acf.rho(m, l).abs() <= 1.0 + 1e-10);
            }
        }
        if let Ok(pacf) = periodic_pacf(&z, 2) {
            for m in 1..=3 {
                for k in 1..=2 {
                    prop_assert!(pacf.get(m, k).abs() <= 1.0 + 1e-10);
                }
            }
        }
    }

    #[test]
    fn s_is_nonnegative_and_scale_invariant(values in panel(4, 6), c in 1e-3..1e3f64) {
        let a = s_statistic(&values, 4).unwrap();
        prop_assert!(a.statistic >= 0.0);
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let b = s_statistic(&scaled, 4).unwrap();
        for (x, y) in a.r1.iter().zip(&b.r1) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.statistic - b.statistic).abs() < 1e-12 * a.statistic.max(1.0));
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn averaging_identical_forecasts_changes_nothing(f in prop::collection::vec(-10.0..10.0f64, 5), y in prop::collection::vec(-10.0..10.0f64, 5)) {
        let e = ForecastEval::new("x", f, y).unwrap();
        let c = combine_forecasts(&[e.clone(), e.clone()], Combination::SimpleAverage).unwrap();
        prop_assert!(c.rmse <= e.rmse + 1e-12);
        prop_assert_eq!(&c.forecasts, &e.forecasts);
    }
}

#[test]
fn s_is_zero_exactly_when_correlations_vanish() {
    // Period 1 is always 1 and period 2 alternates, so both sets of lag-one products cancel.
    let r = [1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 0.0];
    let rep = s_statistic(&r, 2).unwrap();
    assert!(rep.r1.iter().all(|&v| v == 0.0), "{:?}", rep.r1);
    assert_eq!(rep.statistic, 0.0);
}
