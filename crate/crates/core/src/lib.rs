//! Exact combinatorial probabilities: generalized birthday coincidences, dice
//! sums and waiting times, Doppelkopf deal censuses, and products of uniform
//! random variables, with a seeded Monte Carlo harness.

pub mod birthday;
pub mod dice;
pub mod doppelkopf;
pub mod products;
pub mod error;
pub mod exact;
pub mod montecarlo;

pub use error::{Error, Result};
pub use exact::{BigReal, ExactInt, ExactRat, Precision};
