//! Transforms, constellations and subcarrier framing shared by both modems.

pub mod fft;
pub mod frame;
pub mod qam;

pub use fft::{fft, ifft, Fft};
pub use frame::{extract_data, hermitian_frame, SpectrumFrame, TimeFrame};
pub use qam::{qam_demodulate, qam_modulate, Constellation};
