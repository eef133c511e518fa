pub mod barrier;
pub mod curve;
pub mod error;
pub mod experiment;
pub mod gasket;
pub mod geometry;
pub mod paths;
pub mod rng;
pub mod stats;
pub mod tip;

pub use error::{Error, Result};
pub use rng::RngStream;
