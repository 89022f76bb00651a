// Simulate a stationary FOU(0.8^(2), 1, 0.7) path and compare its sample
// variance with the closed form.

use foukit::model::stationary_variance;
use foukit::simulate::{simulate_fou, SimulationPlan};
use foukit::FouSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = FouSpec::single(0.8, 2, 1.0, 0.7)?;
    let plan = SimulationPlan::over_horizon(spec.clone(), 200.0, 4000, 11)?;
    let path = simulate_fou(&plan)?;

    let n = path.len() as f64;
    let mean = path.values().iter().sum::<f64>() / n;
    let var = path.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    println!("n = {}, delta = {}, burn-in steps = {}", path.len(), path.delta(), plan.burn_in_steps());
    println!("sample variance {var:.4}, model variance {:.4}", stationary_variance(&spec)?);
    for (i, x) in path.values().iter().take(5).enumerate() {
        println!("  t = {:5.2}  x = {x:+.5}", (i + 1) as f64 * path.delta());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
