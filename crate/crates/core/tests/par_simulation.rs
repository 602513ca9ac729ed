//! Simulation checks for PAR fitting, order selection and forecasting.

use periodiag_core::experiments::backtest_forecaster;
use periodiag_core::par::subset_search;
use periodiag_core::rng::rng_from_seed;
use periodiag_core::*;
use rand::Rng;

const S: usize = 12;

fn random_par1(seed: u64, lo: f64, hi: f64) -> ParModel {
    let mut rng = rng_from_seed(seed);
    let phi = (0..S)
        .map(|_| {
            let v: f64 = rng.random_range(lo..hi);
            vec![if rng.random_bool(0.5) { v } else { -v }]
        })
        .collect();
    ParModel::new(phi, vec![0.0; S], vec![1.0; S]).unwrap()
}

fn white_noise_model() -> ParModel {
    ParModel::new(vec![vec![]; S], vec![0.0; S], vec![1.0; S]).unwrap()
}

#[test]
fn coefficients_fall_within_three_standard_errors() {
    let (reps, mut inside, mut cells) = (100, 0, 0);
    for rep in 0..reps {
        let model = random_par1(rep, 0.0, 0.8);
        let z = simulate_par(&model, 1000, 500 + rep, 50).unwrap();
        let fit = fit_par(&z, &[1; S], None).unwrap();
        for m in 0..S {
            cells += 1;
            if (fit.phi[m][0] - model.phi[m][0]).abs() <= 3.0 * fit.std_err[m][0] {
                inside += 1;
            }
        }
    }
    let rate = inside as f64 / cells as f64;
    assert!(rate >= 0.99, "coverage {rate}");
}

/// Stationary periodic variances of a PAR(1) by iterating gamma_m(0) = phi_m^2 gamma_{m-1}(0) + sigma2_m.
fn par1_population_rho1(phi: &[f64], sigma2: &[f64]) -> Vec<f64> {
    let s = phi.len();
    let mut g0 = vec![1.0; s];
    for _ in 0..10_000 {
        for m in 0..s {
            let prev = g0[(m + s - 1) % s];
            g0[m] = phi[m] * phi[m] * prev + sigma2[m];
        }
    }
    (0..s).map(|m| phi[m] * (g0[(m + s - 1) % s] / g0[m]).sqrt()).collect()
}

#[test]
fn lag_one_periodic_correlation_matches_recursion() {
    let phi: Vec<f64> = (0..S).map(|m| 0.9 * (2.0 * std::f64::consts::PI * m as f64 / S as f64).cos()).collect();
    let sigma2: Vec<f64> = (0..S).map(|m| 0.5 + m as f64 / 10.0).collect();
    let model = ParModel::new(phi.iter().map(|&p| vec![p]).collect(), vec![1.0; S], sigma2.clone()).unwrap();
    let n = 2000;
    let z = simulate_par(&model, n, 3, 100).unwrap();
    let acf = periodic_autocovariance(&z, 1).unwrap();
    let truth = par1_population_rho1(&phi, &sigma2);
    for m in 1..=S {
        let r = truth[m - 1];
        let se = (1.0 - r * r) / (n as f64).sqrt();
        assert!((acf.rho(m, 1) - r).abs() < 3.0 * se, "period {m}: {} vs {r}", acf.rho(m, 1));
    }
}

#[test]
fn constant_coefficient_par1_has_lag_one_correlation_phi() {
    let model = ParModel::new(vec![vec![0.6]; S], vec![0.0; S], vec![1.0; S]).unwrap();
    let n = 2000;
    let z = simulate_par(&model, n, 11, 50).unwrap();
    let acf = periodic_autocovariance(&z, 1).unwrap();
    let se = (1.0 - 0.36) / (n as f64).sqrt();
    for m in 1..=S {
        assert!((acf.rho(m, 1) - 0.6).abs() < 3.0 * se, "period {m}: {}", acf.rho(m, 1));
    }
}

#[test]
fn pacf_of_par1_cuts_off_after_lag_one() {
    let model = random_par1(1, 0.5, 0.8);
    let (reps, mut lag1, mut beyond, mut beyond_cells) = (500, 0, 0, 0);
    for rep in 0..reps {
        let z = simulate_par(&model, 200, 7000 + rep, 50).unwrap();
        let pacf = periodic_pacf(&z, 3).unwrap();
        for m in 1..=S {
            lag1 += usize::from(pacf.get(m, 1).abs() > pacf.band);
            for k in 2..=3 {
                beyond_cells += 1;
                beyond += usize::from(pacf.get(m, k).abs() > pacf.band);
            }
        }
    }
    assert_eq!(lag1, reps as usize * S);
    let rate = beyond as f64 / beyond_cells as f64;
    assert!((0.03..0.08).contains(&rate), "rate {rate}");
}

#[test]
fn minimal_orders_on_white_noise_are_mostly_zero() {
    let (mut zero, mut cells) = (0, 0);
    for rep in 0..100 {
        let z = simulate_par(&white_noise_model(), 200, 900 + rep, 0).unwrap();
        let orders = select_orders_minimal(&z, 2, 0.05).unwrap();
        zero += orders.iter().filter(|&&p| p == 0).count();
        cells += S;
    }
    let rate = zero as f64 / cells as f64;
    // False selection per period is bounded by about alpha * p_max.
    assert!(rate >= 0.85, "rate {rate}");
}

#[test]
fn minimal_orders_recover_mixed_orders() {
    let mut phi: Vec<Vec<f64>> = (0..S).map(|m| vec![if m % 2 == 0 { 0.6 } else { -0.5 }]).collect();
    phi[2] = vec![0.4, 0.4];
    let model = ParModel::new(phi, vec![0.0; S], vec![1.0; S]).unwrap();
    let truth = model.orders.clone();
    let (reps, mut exact, mut period3) = (40, 0, 0);
    for rep in 0..reps {
        let z = simulate_par(&model, 1000, 40 + rep, 50).unwrap();
        let orders = select_orders_minimal(&z, 3, 0.01).unwrap();
        exact += orders.iter().zip(&truth).filter(|(a, b)| a == b).count();
        period3 += usize::from(orders[2] == 2);
    }
    assert_eq!(period3, reps as usize);
    let rate = exact as f64 / (reps as usize * S) as f64;
    assert!(rate >= 0.95, "rate {rate}");
}

#[test]
fn bic_subset_on_white_noise_is_mostly_empty() {
    let (mut empty, mut cells) = (0, 0);
    for rep in 0..50 {
        let z = simulate_par(&white_noise_model(), 200, 300 + rep, 0).unwrap();
        let fit = select_orders_subset(&z, 3, Criterion::Bic).unwrap();
        let mask = fit.mask.as_ref().unwrap();
        empty += mask.iter().filter(|m| m.iter().all(|&b| !b)).count();
        cells += S;
    }
    let rate = empty as f64 / cells as f64;
    assert!(rate >= 0.9, "rate {rate}");
}

#[test]
fn bic_subset_finds_isolated_lag_two() {
    let mut phi = vec![vec![]; S];
    phi[0] = vec![0.0, 0.6];
    let model = ParModel::new(phi, vec![0.0; S], vec![1.0; S]).unwrap();
    let mut hits = 0;
    for rep in 0..20 {
        let z = simulate_par(&model, 1000, 60 + rep, 20).unwrap();
        let search = subset_search(&z, 2, Criterion::Bic).unwrap();
        assert_eq!(search.masks_evaluated, vec![4; S]);
        hits += usize::from(search.model.mask.as_ref().unwrap()[0] == [false, true]);
    }
    assert!(hits >= 18, "hits {hits}");
}

#[test]
fn estimation_error_shrinks_like_root_n() {
    let rms = |n: usize| {
        let mut sq = 0.0;
        let mut cells = 0;
        for rep in 0..60 {
            let model = random_par1(100 + rep, 0.2, 0.8);
            let z = simulate_par(&model, n, 20_000 + rep, 50).unwrap();
            let fit = fit_par(&z, &[1; S], None).unwrap();
            for m in 0..S {
                sq += (fit.phi[m][0] - model.phi[m][0]).powi(2);
                cells += 1;
            }
        }
        (sq / cells as f64).sqrt()
    };
    let ratio = rms(800) / rms(200);
    assert!(ratio > 0.3 && ratio < 0.8, "ratio {ratio}");
}

#[test]
fn one_step_forecast_error_matches_innovation_variance() {
    let sigma2: Vec<f64> = (0..S).map(|m| 0.5 + 0.1 * m as f64).collect();
    let phi: Vec<Vec<f64>> = (0..S).map(|m| vec![0.7 - 0.1 * (m % 5) as f64]).collect();
    let model = ParModel::new(phi, (0..S).map(|m| m as f64).collect(), sigma2.clone()).unwrap();
    let z = simulate_par(&model, 2000, 8, 50).unwrap();
    let fit = fit_par(&z.truncate_years(1000).unwrap(), &[1; S], None).unwrap();
    let eval = backtest_forecaster(&z, &fit, 1000, "par").unwrap();
    let errors: Vec<f64> = eval.errors().collect();
    for m in 0..S {
        let mse = errors.iter().skip(m).step_by(S).map(|e| e * e).sum::<f64>() / 1000.0;
        assert!((mse / sigma2[m] - 1.0).abs() < 0.15, "period {}: {mse} vs {}", m + 1, sigma2[m]);
    }
}

#[test]
fn forecast_matches_one_step_recursion() {
    let model = random_par1(5, 0.2, 0.8);
    let z = simulate_par(&model, 30, 2, 10).unwrap();
    let fit = fit_par(&z, &[1; S], None).unwrap();
    let f = forecast_par(&fit, &z, 3).unwrap();
    let mut hist = z.as_slice().to_vec();
    for expected in f {
        let next = fit.one_step(&hist).unwrap();
        assert!((next - expected).abs() < 1e-12);
        hist.push(next);
    }
}
