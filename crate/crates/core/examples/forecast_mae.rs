// Fit on a standardized series, predict the last 30 and 60 points one step
// ahead and compare the MAE with the last-value predictor.

use foukit::estimate::{fit, FitConfig};
use foukit::filters::binomial_filter;
use foukit::forecast::{mae, naive_predictions, one_step_predictions, ForecastTask};
use foukit::model::stationary_variance;
use foukit::simulate::{path_standardize, simulate_fou, SimulationPlan};
use foukit::FouSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // unit stationary variance, so a unit-sigma fit on standardized data matches
    let base = FouSpec::single(0.8, 2, 1.0, 0.7)?;
    let truth = base.with_sigma(1.0 / stationary_variance(&base)?.sqrt())?;
    let raw = simulate_fou(&SimulationPlan::new(truth, 300, 0.25, 4)?)?.map(|x| 3.0 + 2.0 * x);
    let report = fit(&raw, &FitConfig::new(binomial_filter(2), 2).standardized())?;
    let spec = report.spec_hat.clone().ok_or("H estimate out of range")?;
    let path = path_standardize(&raw)?;

    for m in [30, 60] {
        let task = ForecastTask::new(spec.clone(), path.clone(), m)?;
        let predicted = one_step_predictions(&task)?;
        let actual = task.actuals();
        println!(
            "m = {m}: model MAE {:.4}, last-value MAE {:.4}",
            mae(&actual, &predicted)?,
            mae(&actual, &naive_predictions(&path, m)?)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
