//! Heavy-tailed distribution fitting and scaling analysis for high-frequency
//! return series.

pub mod numerics;
pub mod distributions;
pub mod ingest;
pub mod estimation;
pub mod gof;
pub mod tailfit;
pub mod scaling;
pub mod cli;
pub mod error;

pub use error::{Error, Result};
