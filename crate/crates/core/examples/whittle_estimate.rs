// Whittle estimate of lambda next to the plug-in estimate.

use foukit::estimate::{fit, whittle_contrast, FitConfig, WhittleFixed, WhittleSettings};
use foukit::filters::binomial_filter;
use foukit::simulate::{simulate_fou, SimulationPlan};
use foukit::FouSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = FouSpec::single(0.8, 2, 1.0, 0.7)?;
    let path = simulate_fou(&SimulationPlan::over_horizon(truth, 100.0, 2000, 9)?)?;

    let cfg = FitConfig::new(binomial_filter(2), 2).with_whittle(WhittleSettings::default());
    let report = fit(&path, &cfg)?;
    println!(
        "plug-in {:.4}, Whittle {:.4}",
        report.lambda_plugin,
        report.lambda_whittle.unwrap_or(f64::NAN)
    );

    let grid = WhittleSettings::default().resolve(path.horizon(), path.delta())?;
    let fixed = WhittleFixed {
        hurst: report.h_hat,
        sigma: report.sigma_hat,
        p: 2,
    };
    for lambda in [0.3, 0.8, 2.0] {
        println!("  U_T({lambda}) = {:.4}", whittle_contrast(&path, lambda, fixed, &grid)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
