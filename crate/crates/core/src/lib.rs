//! Simulation, estimation and forecasting for iterated fractional
//! Ornstein–Uhlenbeck processes, FOU(p).

pub mod cli;
pub mod error;
pub mod estimate;
pub mod fbm;
pub mod filters;
pub mod forecast;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{FouSpec, RateComponent};
pub use path::{Path, Standardization};
