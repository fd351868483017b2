//! Iterative radix-2 decimation-in-time FFT.
//!
//! Forward transform is unscaled, `X[n] = sum_k x[k] exp(-j 2 pi n k / N)`.
//! Inverse transform carries the `1/N`, so `ifft(fft(x)) == x`.

use std::f64::consts::PI;

use crate::{ComplexSample, Error, Result};

/// Smallest transform size accepted by [`check_size`].
pub const MIN_SIZE: usize = 2;

/// Rejects sizes the radix-2 kernel cannot handle.
pub fn check_size(n: usize) -> Result<()> {
    if n < MIN_SIZE || !n.is_power_of_two() {
        return Err(Error::config(format!(
            "transform size {n} is not a power of two >= {MIN_SIZE}"
        )));
    }
    Ok(())
}

/// Precomputed twiddles and bit-reversal permutation for one size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<ComplexSample>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        check_size(n)?;
        let step = -2.0 * PI / n as f64;
        let twiddles = (0..n / 2)
            .map(|k| ComplexSample::from_polar(1.0, k as f64 * step))
            .collect();
        let shift = usize::BITS - n.trailing_zeros();
        let bitrev = (0..n).map(|i| i.reverse_bits() >> shift).collect();
        Ok(Self {
            n,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform, no scaling.
    pub fn forward(&self, buf: &mut [ComplexSample]) -> Result<()> {
        self.check_len(buf.len())?;
        self.butterflies(buf, false);
        Ok(())
    }

    /// In-place inverse transform, scaled by `1/N`.
    pub fn inverse(&self, buf: &mut [ComplexSample]) -> Result<()> {
        self.check_len(buf.len())?;
        self.butterflies(buf, true);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::framing("fft", self.n, len));
        }
        Ok(())
    }

    fn butterflies(&self, buf: &mut [ComplexSample], inverse: bool) {
        for (i, &j) in self.bitrev.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let stride = self.n / len;
            for block in buf.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
    }
}

/// Out-of-place forward transform of a length-`n` vector.
pub fn fft(x: &[ComplexSample], n: usize) -> Result<Vec<ComplexSample>> {
    let plan = Fft::new(n)?;
    let mut out = x.to_vec();
    plan.forward(&mut out)?;
    Ok(out)
}

/// Out-of-place inverse transform of a length-`n` vector.
pub fn ifft(x: &[ComplexSample], n: usize) -> Result<Vec<ComplexSample>> {
    let plan = Fft::new(n)?;
    let mut out = x.to_vec();
    plan.inverse(&mut out)?;
    Ok(out)
}
