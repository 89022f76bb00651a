// A small replicated study over a (T, n) grid, printed as tables.

use foukit::montecarlo::{run_experiment, table_emit, McGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid: McGrid = serde_json::from_str(
        r#"{
            "spec": {"lambdas": [{"value": 0.8, "multiplicity": 2}], "sigma": 1.0, "hurst": 0.7},
            "horizons": [50, 100],
            "sizes": [1000, 2000],
            "replications": 24,
            "estimators": ["plugin"],
            "master_seed": 2024
        }"#,
    )?;
    let reports = grid
        .cells()?
        .iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>, _>>()?;
    let tables = table_emit(&reports)?;
    print!("{}\n{}", tables.estimates_text, tables.pvalues_text);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
