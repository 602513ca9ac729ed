//! Reproducibility and replication checks for the studies.

use periodiag_core::experiments::{backtest, combine_forecasts, compare_pairwise, table1_experiment, Combination, ModelKind};
use periodiag_core::*;

#[test]
fn more_replicates_move_the_mean_little() {
    let small = table1_experiment(0.3, 17, 12, 1000, 9).unwrap();
    let large = table1_experiment(0.3, 17, 12, 4000, 9).unwrap();
    let limit = 2.0 * (small.var_s / 1000.0).sqrt();
    assert!((large.mean_s - small.mean_s).abs() < limit, "{} vs {}", small.mean_s, large.mean_s);
    let cap = 0.05 + 3.0 * (0.05f64 * 0.95 / 4000.0).sqrt();
    assert!((0.005..=cap).contains(&large.empirical_level), "{}", large.empirical_level);
}

#[test]
fn table1_does_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| table1_experiment(-0.6, 17, 12, 200, 5).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn combined_forecasts_rarely_beat_par_on_par_data() {
    let s = 12;
    let phi: Vec<Vec<f64>> = (0..s).map(|m| vec![0.8 * (2.0 * std::f64::consts::PI * m as f64 / s as f64).sin()]).collect();
    let model = ParModel::new(phi, (0..s).map(|m| (m % 4) as f64).collect(), vec![0.5; s]).unwrap();
    let par = ModelKind::ParMinimal { p_max: 3, alpha: 0.05 };
    let sarma = ModelKind::Sarima(SarimaSpec::new((1, 0, 1), (0, 1, 1), s).unwrap());
    let (mut par_evals, mut combined) = (Vec::new(), Vec::new());
    for i in 0..30 {
        let z = simulate_par(&model, 30, 77 + i, 50).unwrap();
        let p = backtest(&z, &par, 3).unwrap();
        let q = backtest(&z, &sarma, 3).unwrap();
        combined.push(combine_forecasts(&[p.clone(), q], Combination::SimpleAverage).unwrap());
        par_evals.push(p);
    }
    let wins = compare_pairwise(&par_evals, &combined).unwrap();
    println!("PAR beats the average of PAR and seasonal ARMA on {wins} of 30 series");
    assert!(wins <= 30);
}
