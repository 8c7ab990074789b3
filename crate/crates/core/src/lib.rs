//! Compressed sensing of grayscale images in orthogonal wavelet domains.
//!
//! The pipeline: a periodized orthogonal wavelet transform ([`wavelet`])
//! sparsifies the image; the two coarsest detail scales are projected by
//! random sphere matrices ([`sensing`]); the decoder recovers them with
//! row-wise shrinkage sweeps ([`solver`]). [`codec`] ties these together and
//! [`format`] stores the result.

pub mod codec;
pub mod error;
pub mod exec;
pub mod format;
pub mod image_io;
pub mod metrics;
pub mod sensing;
pub mod solver;
pub mod stats;
pub mod wavelet;

pub use codec::{decode, encode, CsPayload, Decoded, EncodeParams};
pub use error::{Error, Result};
pub use exec::Execution;
pub use solver::ThresholdSchedule;
pub use wavelet::{Family, WaveletFilter, WaveletName};
