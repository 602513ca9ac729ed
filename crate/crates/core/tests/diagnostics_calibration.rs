//! Null calibration and power of the residual diagnostics.

use periodiag_core::rng::rng_from_seed;
use periodiag_core::sarima::fit_sarima_flat;
use periodiag_core::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let e = noise(n + 100, seed);
    let mut x = vec![0.0; n + 100];
    for t in 1..x.len() {
        x[t] = phi * x[t - 1] + e[t];
    }
    x.split_off(100)
}

#[test]
fn white_noise_periodic_correlations_stay_within_band() {
    let (n, s) = (50, 12);
    let (mut inside, mut cells) = (0, 0);
    for rep in 0..300 {
        let r = residual_periodic_acf(&noise(n * s, rep), s, 1).unwrap();
        inside += r.iter().filter(|v| v.abs() < 3.0 / (n as f64).sqrt()).count();
        cells += s;
    }
    let rate = inside as f64 / cells as f64;
    assert!(rate >= 0.98, "rate {rate}");
}

#[test]
fn null_s_has_chi_squared_percentile() {
    let mut stats: Vec<f64> = (0..10_000).map(|rep| s_statistic(&noise(600, 50_000 + rep), 12).unwrap().statistic).collect();
    stats.sort_by(f64::total_cmp);
    let p95 = stats[9500];
    assert!((p95 - 21.0).abs() < 0.4, "95th percentile {p95}");
}

#[test]
fn null_p_values_are_uniform_on_average() {
    let mean = (0..1000).map(|rep| ljung_box(&noise(500, rep), 20, 0).unwrap().p_value).sum::<f64>() / 1000.0;
    assert!((mean - 0.5).abs() < 0.05, "mean p {mean}");
}

#[test]
fn ljung_box_on_adequate_fit_has_nominal_size() {
    let spec = SarimaSpec::new((1, 0, 0), (0, 0, 0), 1).unwrap().with_mean(false);
    let mut rejections = 0;
    for rep in 0..1000 {
        let x = ar1(300, 0.5, 10_000 + rep);
        let fit = fit_sarima_flat(&x, &spec).unwrap();
        let lb = ljung_box(&fit.residuals[1..], 20, 1).unwrap();
        rejections += usize::from(lb.p_value < 0.05);
    }
    let rate = rejections as f64 / 1000.0;
    assert!(rate > 0.02 && rate < 0.08, "rate {rate}");
}

#[test]
fn ljung_box_detects_unmodeled_autocorrelation() {
    let rejections = (0..1000).filter(|&rep| ljung_box(&ar1(200, 0.8, rep), 20, 0).unwrap().p_value < 0.05).count();
    assert!(rejections > 950, "{rejections}");
}

#[test]
fn s_detects_periodic_correlation_missed_by_seasonal_arma() {
    let s = 12;
    let phi: Vec<Vec<f64>> = (0..s).map(|m| vec![if m % 2 == 0 { 0.8 } else { -0.6 }]).collect();
    let model = ParModel::new(phi, vec![0.0; s], vec![1.0; s]).unwrap();
    let spec = SarimaSpec::new((1, 0, 0), (0, 0, 0), s).unwrap();
    let mut rejections = 0;
    for rep in 0..50 {
        let z = simulate_par(&model, 30, 600 + rep, 20).unwrap();
        let fit = fit_sarima(&z, &spec).unwrap();
        rejections += usize::from(s_statistic(&fit.residuals, s).unwrap().p_value < 0.05);
    }
    assert!(rejections >= 45, "{rejections}/50");
}
