//! Beam training for symmetric 2×2 hybrid-MIMO mmWave links.
//!
//! The crate generates polarized cluster/ray channels, applies Gaussian
//! codebook beams at both ends, evaluates the per-subcarrier MIMO rate and
//! compares three beam selection strategies:
//!
//! * exhaustive search over all `ℓ^{2N}` beam combinations,
//! * the SISO sector sweep, training the two direct links independently,
//! * two-stage K-Best: beam-to-omni received powers per PAA, then full MIMO
//!   rate evaluation of the `K` combinations with the largest score product.
//!
//! ```
//! use beamtrain::harness::ExperimentConfig;
//!
//! let cfg = ExperimentConfig { n_realizations: 1, ..ExperimentConfig::fast() };
//! let out = beamtrain::harness::run_experiment(&cfg).unwrap();
//! assert!(out.records.iter().all(|r| r.rate_rel_to_es.unwrap() <= 1.0));
//! ```

pub mod antenna;
pub mod channel;
pub mod effective;
pub mod error;
pub mod harness;
pub mod mat2;
pub mod rate;
pub mod training;

pub use error::{Error, Result};
