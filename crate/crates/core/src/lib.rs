pub mod anomaly;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod plot;
pub mod reservoir;
pub mod rng;
pub mod thomas_fiering;

pub use error::{Error, Result};
