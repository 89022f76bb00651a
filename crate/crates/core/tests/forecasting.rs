use foukit::estimate::{fit, FitConfig};
use foukit::filters::binomial_filter;
use foukit::forecast::{
    durbin_levinson, mae, naive_predictions, one_step_predictions, predictions_with_gammas, ForecastTask,
};
use foukit::model::{stationary_variance, AutocovarianceGrid};
use foukit::simulate::{path_standardize, simulate_fou, SimulationPlan};
use foukit::{FouSpec, Path};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[test]
fn model_beats_last_value_on_well_specified_series() {
    // σ chosen so the stationary variance is 1, which makes the
    // unit-sigma model on standardized data well specified
    let base = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
    let spec = base.with_sigma(1.0 / stationary_variance(&base).unwrap().sqrt()).unwrap();
    let (n, m) = (400, 30);
    let mut wins = 0;
    for r in 0..100 {
        let raw = simulate_fou(&SimulationPlan::new(spec.clone(), n, 0.25, 500 + r).unwrap()).unwrap();
        let report = fit(&raw, &FitConfig::new(binomial_filter(2), 2).standardized()).unwrap();
        let Some(spec_hat) = report.spec_hat else { continue };
        let path = path_standardize(&raw).unwrap();
        let task = ForecastTask::new(spec_hat, path.clone(), m).unwrap();
        let model = mae(&task.actuals(), &one_step_predictions(&task).unwrap()).unwrap();
        let naive = mae(&task.actuals(), &naive_predictions(&path, m).unwrap()).unwrap();
        if model < naive {
            wins += 1;
        }
    }
    assert!(wins >= 70, "model won {wins} of 100");
}

#[test]
fn ou_prediction_is_markov() {
    let (lambda, delta) = (1.3, 0.1);
    let spec = FouSpec::single(lambda, 1, 0.7, 0.5).unwrap();
    let path = simulate_fou(&SimulationPlan::new(spec.clone(), 60, delta, 8).unwrap()).unwrap();
    let task = ForecastTask::new(spec, path.clone(), 59).unwrap();
    let pred = one_step_predictions(&task).unwrap();
    for (i, p) in pred.iter().enumerate() {
        assert!((p - (-lambda * delta).exp() * path.values()[i]).abs() < 1e-6);
    }
}

#[test]
fn two_points_one_prediction() {
    let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
    let path = Path::new(vec![0.9, -0.1], 0.5).unwrap();
    let grid = AutocovarianceGrid::new(&spec, 0.5, 1).unwrap();
    let g = grid.values();
    let pred = one_step_predictions(&ForecastTask::new(spec, path, 1).unwrap()).unwrap();
    assert_eq!(pred.len(), 1);
    assert!((pred[0] - g[1] / g[0] * 0.9).abs() < 1e-12);
}

#[test]
fn fast_decay_predicts_zero() {
    let spec = FouSpec::single(400.0, 1, 1.0, 0.5).unwrap();
    let path = Path::new(vec![1.0, -2.0, 0.5, 3.0, 1.0], 1.0).unwrap();
    let pred = one_step_predictions(&ForecastTask::new(spec, path, 3).unwrap()).unwrap();
    assert!(pred.iter().all(|p| p.abs() < 1e-12));
}

#[test]
fn task_bounds() {
    let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
    let path = Path::new(vec![1.0, 2.0, 3.0], 1.0).unwrap();
    assert!(ForecastTask::new(spec.clone(), path.clone(), 0).is_err());
    assert!(ForecastTask::new(spec, path, 3).is_err());
}

#[test]
fn raw_mae_is_sd_times_standardized_mae() {
    let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
    let raw = simulate_fou(&SimulationPlan::new(spec.clone(), 200, 0.25, 2).unwrap())
        .unwrap()
        .map(|x| 4.0 + 3.0 * x);
    let z = path_standardize(&raw).unwrap();
    let sd = z.standardization().unwrap().sd;
    let grid = AutocovarianceGrid::new(&spec, 0.25, 199).unwrap();
    let m = 30;
    let raw_pred = predictions_with_gammas(grid.values(), &z, m).unwrap();
    let raw_actual = &raw.values()[200 - m..];
    let bare = Path::new(z.values().to_vec(), z.delta()).unwrap();
    let std_pred = predictions_with_gammas(grid.values(), &bare, m).unwrap();
    let std_actual = &z.values()[200 - m..];
    let lhs = mae(raw_actual, &raw_pred).unwrap();
    let rhs = sd * mae(std_actual, &std_pred).unwrap();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
}

fn dense(gammas: &[f64], xs: &[f64]) -> f64 {
    let n = xs.len();
    let a = DMatrix::from_fn(n, n, |i, j| gammas[i.abs_diff(j)]);
    let b = DVector::from_fn(n, |i, _| gammas[i + 1]);
    let phi = a.lu().solve(&b).unwrap();
    (0..n).map(|i| phi[i] * xs[n - 1 - i]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn markov_autocovariance_gives_rho_times_last(rho in -0.95f64..0.95, xs in prop::collection::vec(-3.0f64..3.0, 1..40)) {
        let gammas: Vec<f64> = (0..=xs.len()).map(|k| rho.powi(k as i32)).collect();
        let pred = durbin_levinson(&gammas, &xs).unwrap();
        prop_assert!((pred - rho * xs[xs.len() - 1]).abs() < 1e-10);
    }

    #[test]
    fn matches_dense_solve(h in 0.2f64..0.8, lambda in 0.3f64..2.0, delta in 0.3f64..1.0,
                           xs in prop::collection::vec(-3.0f64..3.0, 2..120)) {
        let spec = FouSpec::single(lambda, 1, 1.0, h).unwrap();
        let grid = AutocovarianceGrid::new(&spec, delta, xs.len()).unwrap();
        let a = durbin_levinson(grid.values(), &xs).unwrap();
        let b = dense(grid.values(), &xs);
        prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
    }

    #[test]
    fn predictions_are_linear(xs in prop::collection::vec(-3.0f64..3.0, 5..60), c in -10.0f64..10.0) {
        let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let grid = AutocovarianceGrid::new(&spec, 0.5, xs.len()).unwrap();
        let x = Path::new(xs.clone(), 0.5).unwrap();
        let y = x.map(|v| c * v);
        let m = xs.len() / 2;
        let px = predictions_with_gammas(grid.values(), &x, m).unwrap();
        let py = predictions_with_gammas(grid.values(), &y, m).unwrap();
        for (a, b) in px.iter().zip(&py) {
            prop_assert!((c * a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }
}
