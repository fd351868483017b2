//! Unipolar optical OFDM for intensity-modulated, directly-detected links.
//!
//! The crate contains everything needed to compare ACO-OFDM and Flip-OFDM
//! on equal terms:
//!
//! - [`dsp`]: radix-2 FFT, Gray-coded square QAM and Hermitian subcarrier framing.
//! - [`modem`]: the two transmitter/receiver chains and transform accounting.
//! - [`channel`]: diffuse tapped-delay-line channels, convolution and AWGN.
//! - [`sim`]: seeded Monte Carlo BER sweeps and analytic reference curves.
//!
//! All transforms use the forward-unscaled / inverse-`1/N` convention.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dsp;
mod error;
pub mod modem;
pub mod sim;

pub use error::{Error, Result};

/// Complex baseband value used throughout the pipeline.
pub type ComplexSample = num_complex::Complex64;
