//! Heat semigroups (classical, Hermite, Laguerre), Weyl fractional
//! derivatives, Littlewood–Paley square functions and area integrals,
//! spectral expansions, and finite-dimensional Banach-geometry probes,
//! with an experiment-runner CLI on top.

pub mod banach;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod lpfun;
pub mod frac;
pub mod kernels;
pub mod orthobasis;
pub mod spectral;

pub use error::{Error, Result};
