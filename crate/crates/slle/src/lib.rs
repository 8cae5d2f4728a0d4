//! Dimensionality reduction through one latent-variable lens: the stochastic
//! (EM-based) linear reconstruction step of locally linear embedding,
//! factor analysis, and probabilistic PCA, plus the deterministic LLE
//! baseline they are compared against.
//!
//! The crate is library-first; see the `examples/` directory for one
//! runnable example per capability, and the `slle` binary for the
//! command-line front end.
//!
//! Every operation is a pure function of its inputs and every fitted result
//! is an immutable value, so calls are safe from any number of threads.
//! Samplers take explicit seeds (ChaCha8 throughout) and fixed seeds
//! reproduce results bit for bit.

pub mod classic;
pub mod cli;
pub mod data;
pub mod error;
pub mod gaussian;
pub mod latent;
pub mod neighborhood;
pub mod numerics;
pub mod stochastic;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{Matrix, Vector};
