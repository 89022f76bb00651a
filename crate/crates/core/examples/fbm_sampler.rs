// Exact fractional Gaussian noise by circulant embedding, checked against
// the theoretical autocovariance.

use foukit::fbm::{fgn_autocovariance, simulate_fbm, simulate_fgn, FgnGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4096;
    for hurst in [0.3, 0.5, 0.7] {
        let noise = simulate_fgn(&FgnGrid::new(n, hurst, 5)?)?;
        print!("H = {hurst}:");
        for lag in 0..4 {
            let sample: f64 = noise.iter().zip(&noise[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            print!("  lag {lag}: {sample:+.3} ({:+.3})", fgn_autocovariance(hurst, lag));
        }
        println!();
    }
    let fbm = simulate_fbm(1000, 0.01, 1.0, 0.7, 5)?;
    println!("fBm on [0, 10]: B(10) = {:.4}", fbm.values()[1000]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
