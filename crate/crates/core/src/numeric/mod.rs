//! Numerical building blocks shared by the closed forms and the oracle.

mod quadrature;
mod sum;

pub use quadrature::{GaussKronrod, Integral};
pub use sum::{compensated_sum, CompensatedSum};
