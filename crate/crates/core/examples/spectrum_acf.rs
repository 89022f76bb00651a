// Spectral density and autocovariance of a fitted model; the lag-0 value
// matches the closed-form variance.

use foukit::model::{spectral_density, spectral_integral_variance, stationary_variance, AutocovarianceGrid};
use foukit::FouSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = FouSpec::single(0.8, 2, 2.3044, 0.7)?;
    println!("{:>6}  {:>10}", "x", "f(x)");
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        println!("{x:>6}  {:>10.6}", spectral_density(&spec, x)?);
    }
    let acov = AutocovarianceGrid::new(&spec, 0.5, 10)?;
    let g = acov.values();
    for (k, gk) in g.iter().enumerate().step_by(2) {
        println!("lag {:4.1}: acov {gk:.5}  acf {:.5}", k as f64 * acov.delta(), gk / g[0]);
    }
    println!(
        "variance: closed form {:.6}, spectral integral {:.6}",
        stationary_variance(&spec)?,
        spectral_integral_variance(&spec)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
