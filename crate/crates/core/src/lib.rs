//! Spectral edges, supports and outlier transitions of Gaussian random
//! matrices X = A0 + Σ A_i g_i, computed from their free models.

pub mod apps;
pub mod block;
pub mod error;
pub mod free;
pub mod harness;
pub mod iso;
pub mod lanczos;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod rng;

pub use error::{Error, Result};
