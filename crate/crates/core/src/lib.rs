//! Simulation core for conformal loop ensembles and their discrete models.
//!
//! The crate is `no_std` and needs only `alloc`. All randomness flows through
//! [`rng::SimRng`] seeded from a `u64`, so every sampler is reproducible.

#![no_std]

extern crate alloc;

pub mod cle;
pub mod hexgrid;
pub mod loewner;
pub mod loops;
pub mod onmodel;
pub mod rng;
pub mod stats;
pub mod stochastic;

pub use num_complex::Complex64;
