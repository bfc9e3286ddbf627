//! Numerical analysis on ℓ² under product Gaussian measures.
//!
//! Everything is reduced to a finite truncation dimension. Exact oracles
//! (Gaussian moments, incomplete moments, polynomial algebra) are used
//! wherever they exist; Monte Carlo estimates carry standard errors and are
//! reproducible for a given seed regardless of the rayon worker count.
//!
//! Coordinates are indexed from 0 throughout the crate.

pub mod ck;
pub mod cutoff;
pub mod dbar;
pub mod error;
pub mod measure;
pub mod numerics;
pub mod sobolev;
pub mod surface;

pub use error::{Error, Result};
