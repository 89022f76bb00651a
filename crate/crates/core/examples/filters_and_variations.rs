// Filters, their orders, and the H estimate from dilated quadratic
// variations of fractional Brownian motion.

use foukit::estimate::estimate_h;
use foukit::fbm::simulate_fbm;
use foukit::filters::{binomial_filter, daubechies2_filter, dilate, quadratic_variation, Filter};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let filters = [binomial_filter(2), binomial_filter(26), daubechies2_filter(), "1,-3,3,-1".parse::<Filter>()?];
    for f in &filters {
        println!("{f:>20}: order {}, {} taps", f.order(), f.coeffs().len());
    }
    let path = simulate_fbm(10_000, 0.01, 1.0, 0.7, 8)?;
    let a = binomial_filter(2);
    println!(
        "V_a = {:.4e}, V_a2 = {:.4e}, H = {:.4}",
        quadratic_variation(&path, &a)?,
        quadratic_variation(&path, &dilate(&a))?,
        estimate_h(&path, &a)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
