//! Equilibrium reinsurance and investment under rough volatility and
//! power-law Hawkes catastrophe arrivals.

pub mod catalog;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod hawkes;
pub mod io;
pub mod kernels;
pub mod mc;
pub mod volterra;
pub mod welfare;

pub use error::{Error, Result};
pub use grid::TimeGrid;
