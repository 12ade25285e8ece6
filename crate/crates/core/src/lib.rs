pub mod classify;
pub mod cli;
pub mod config;
pub mod error;
pub mod ordering;
pub mod plot;
pub mod polyalg;
pub mod process;
pub mod stats;
pub mod stein;
pub mod sums;

pub use error::{Error, Result};
