pub mod error;
pub mod greens;
pub mod integrator;
pub mod noise;
pub mod regularity;
pub mod report;
pub mod spectral;
pub mod stats;

pub use error::{ConfigError, Error, Result};
