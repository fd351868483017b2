//! Hermitian-symmetric subcarrier framing.

use crate::dsp::fft::{check_size, Fft};
use crate::{ComplexSample, Error, Result};

/// Largest tolerated `max |imag| / rms` after inverting a Hermitian spectrum.
pub const IMAG_RESIDUE_BOUND: f64 = 1e-9;

/// One OFDM symbol in the frequency domain, `bins[n]` is subcarrier `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    pub bins: Vec<ComplexSample>,
}

/// One real OFDM symbol in the time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame {
    pub samples: Vec<f64>,
}

impl SpectrumFrame {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Inverse transform, checks the result is real to within
    /// [`IMAG_RESIDUE_BOUND`] of its RMS, then drops the imaginary parts.
    pub fn to_time(&self, plan: &Fft) -> Result<TimeFrame> {
        let mut buf = self.bins.clone();
        plan.inverse(&mut buf)?;
        let rms = (buf.iter().map(|v| v.re * v.re).sum::<f64>() / buf.len() as f64).sqrt();
        let residue = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let bound = IMAG_RESIDUE_BOUND * rms;
        if residue > bound {
            return Err(Error::ImaginaryResidue { residue, bound });
        }
        Ok(TimeFrame {
            samples: buf.into_iter().map(|v| v.re).collect(),
        })
    }
}

impl TimeFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Forward transform of the real samples.
    pub fn to_spectrum(&self, plan: &Fft) -> Result<SpectrumFrame> {
        let mut buf: Vec<_> = self
            .samples
            .iter()
            .map(|&v| ComplexSample::new(v, 0.0))
            .collect();
        plan.forward(&mut buf)?;
        Ok(SpectrumFrame { bins: buf })
    }
}

/// Places `data` on subcarriers `1..N/2` and their conjugates on `N-n`.
/// DC and Nyquist bins stay zero.
pub fn hermitian_frame(data: &[ComplexSample], n: usize) -> Result<SpectrumFrame> {
    check_size(n)?;
    if n < 4 {
        return Err(Error::config(format!("hermitian frame needs N >= 4, got {n}")));
    }
    if data.len() != n / 2 - 1 {
        return Err(Error::framing("hermitian_frame", n / 2 - 1, data.len()));
    }
    let mut bins = vec![ComplexSample::new(0.0, 0.0); n];
    for (i, &d) in data.iter().enumerate() {
        bins[i + 1] = d;
        bins[n - i - 1] = d.conj();
    }
    Ok(SpectrumFrame { bins })
}

/// Returns subcarriers `1..N/2`, the inverse of [`hermitian_frame`].
pub fn extract_data(spectrum: &SpectrumFrame) -> Vec<ComplexSample> {
    let n = spectrum.len();
    if n < 4 {
        return Vec::new();
    }
    spectrum.bins[1..n / 2].to_vec()
}
