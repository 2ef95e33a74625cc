pub mod cli;
pub mod error;
pub mod evaluator;
pub mod lp;
pub mod model;
pub mod planner;
pub mod seed;
pub mod simulator;
pub mod uncertainty;

pub use error::{Error, Result};
