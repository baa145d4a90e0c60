//! Model builders and thresholds for the applications: graph decoding,
//! tensor PCA, block-profile spike detection, the contextual block model
//! and sample covariance.

pub mod csbm;
pub mod decode;
pub mod kikuchi;
pub mod scov;
pub mod spiked;

pub use csbm::{csbm_build, csbm_estimate, csbm_overlap, csbm_sample, csbm_snr, CsbmEstimate, CsbmInstance, CsbmMatrices, CsbmOperator, CsbmSnr};
pub use decode::{decode_build, decode_round, flip_probability, label_overlap, theta_prime, DecodeModel, GraphDecodingInstance, RegularGraph};
pub use kikuchi::{binomial, kikuchi_matrix, kikuchi_matrix_with, kikuchi_params, kikuchi_test, KikuchiParams, KikuchiTest, SparseSym, TensorPcaInstance};
pub use scov::{scov_closed_forms, scov_pi_forms, scov_sample, scov_variational, spiked_spectrum, ScovParams, ScovValues};
pub use spiked::{snr_delta, spiked_block_build, spiked_block_spec, SpikedBlock};
