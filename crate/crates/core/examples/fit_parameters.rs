// Fit H, sigma and the plug-in lambda to a simulated path, then the same in
// the standardized, unit-sigma mode.

use foukit::estimate::{fit, FitConfig};
use foukit::filters::binomial_filter;
use foukit::simulate::{simulate_fou, SimulationPlan};
use foukit::FouSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = FouSpec::single(0.8, 2, 1.0, 0.7)?;
    let path = simulate_fou(&SimulationPlan::over_horizon(truth, 100.0, 5000, 2)?)?;

    let report = fit(&path, &FitConfig::new(binomial_filter(2), 2))?;
    println!(
        "raw scale:    H = {:.4}  sigma = {:.4}  mu2 = {:.4}  lambda = {:.4}",
        report.h_hat, report.sigma_hat, report.mu2_hat, report.lambda_plugin
    );

    let std_report = fit(&path, &FitConfig::new(binomial_filter(2), 2).standardized())?;
    println!(
        "standardized: H = {:.4}  sigma fixed to 1  lambda = {:.4}",
        std_report.h_hat, std_report.lambda_plugin
    );
    println!("{}", serde_json::to_string_pretty(&report.diagnostics)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
