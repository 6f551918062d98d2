pub mod baselines;
pub mod certificates;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod registry;
pub mod solver;

pub use error::{Error, Result};
