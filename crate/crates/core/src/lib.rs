pub mod anisotropy;
pub mod config;
pub mod counterexample;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod pairing;
pub mod run;
pub mod solver;

pub use error::{Error, Result};
