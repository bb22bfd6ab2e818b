//! Quasi-locally averaged fundamental solutions of the Laplace operator
//! `A_n = −Δ` in ℝⁿ, together with brute-force oracles that check every
//! closed form.

pub mod error;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub mod greens;
pub mod sphere_kernel;
pub mod averaging;
pub mod oracles;
pub mod case_studies;
