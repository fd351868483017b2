//! Gray-coded square QAM with unit average symbol energy.
//!
//! Each symbol's bits split in half: the leading half selects the in-phase
//! level, the trailing half the quadrature level. Within an axis a zero bit
//! pattern sits at the most positive level, so QPSK maps `(b1, b0)` to
//! `((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2)`.

use crate::{ComplexSample, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_axis: usize,
    levels: usize,
    scale: f64,
}

impl Constellation {
    /// Square constellation of order `m` (4, 16, 64, ...).
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() || !m.trailing_zeros().is_multiple_of(2) {
            return Err(Error::config(format!(
                "constellation order {m} is not a square power of two >= 4"
            )));
        }
        let bits_per_axis = m.trailing_zeros() as usize / 2;
        let levels = 1 << bits_per_axis;
        Ok(Self {
            order: m,
            bits_per_axis,
            levels,
            scale: (1.5 / (m as f64 - 1.0)).sqrt(),
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("QPSK is a valid order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    /// All points indexed by their bit label read MSB first.
    pub fn points(&self) -> Vec<ComplexSample> {
        let k = self.bits_per_symbol();
        (0..self.order)
            .map(|label| {
                let bits: Vec<u8> = (0..k).rev().map(|i| ((label >> i) & 1) as u8).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }

    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<ComplexSample>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::framing(
                "qam_modulate",
                bits.len().next_multiple_of(k),
                bits.len(),
            ));
        }
        Ok(bits.chunks_exact(k).map(|s| self.map_symbol(s)).collect())
    }

    /// Minimum-distance hard decisions; always returns `bits_per_symbol` bits per input.
    pub fn demodulate(&self, symbols: &[ComplexSample]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for s in symbols {
            self.push_axis_bits(s.re, &mut out);
            self.push_axis_bits(s.im, &mut out);
        }
        out
    }

    fn map_symbol(&self, bits: &[u8]) -> ComplexSample {
        let (i_bits, q_bits) = bits.split_at(self.bits_per_axis);
        ComplexSample::new(self.axis_level(i_bits), self.axis_level(q_bits)) * self.scale
    }

    fn axis_level(&self, bits: &[u8]) -> f64 {
        let gray = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        let index = gray_to_binary(gray);
        (self.levels - 1) as f64 - 2.0 * index as f64
    }

    fn push_axis_bits(&self, value: f64, out: &mut Vec<u8>) {
        let top = (self.levels - 1) as f64;
        let raw = ((top - value / self.scale) / 2.0).round();
        let index = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, top) } as usize;
        let gray = index ^ (index >> 1);
        for i in (0..self.bits_per_axis).rev() {
            out.push(((gray >> i) & 1) as u8);
        }
    }
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

pub fn qam_modulate(bits: &[u8], m: usize) -> Result<Vec<ComplexSample>> {
    Constellation::new(m)?.modulate(bits)
}

pub fn qam_demodulate(symbols: &[ComplexSample], m: usize) -> Result<Vec<u8>> {
    Ok(Constellation::new(m)?.demodulate(symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn qpsk_gray_labels() {
        let s = qam_modulate(&[0, 0, 1, 1, 0, 1, 1, 0], 4).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((s[0] - ComplexSample::new(h, h)).norm() < 1e-15);
        assert!((s[1] - ComplexSample::new(-h, -h)).norm() < 1e-15);
        assert!((s[2] - ComplexSample::new(h, -h)).norm() < 1e-15);
        assert!((s[3] - ComplexSample::new(-h, h)).norm() < 1e-15);
        for p in &s {
            assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nearest_point_decision() {
        let bits = qam_demodulate(&[ComplexSample::new(0.9, 0.8)], 4).unwrap();
        assert_eq!(bits, vec![0, 0]);
    }

    #[test]
    fn rejects_ragged_bits() {
        assert!(matches!(qam_modulate(&[0, 1, 0], 4), Err(Error::Framing { .. })));
        assert!(matches!(qam_modulate(&[0; 4], 8), Err(Error::Config(_))));
        assert!(matches!(qam_modulate(&[0; 4], 2), Err(Error::Config(_))));
    }

    #[test]
    fn unit_average_energy() {
        for m in [4, 16, 64, 256] {
            let pts = Constellation::new(m).unwrap().points();
            let e: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        for m in [4, 16, 64] {
            let c = Constellation::new(m).unwrap();
            let pts = c.points();
            let dmin = 2.0 * c.scale;
            for (a, pa) in pts.iter().enumerate() {
                for (b, pb) in pts.iter().enumerate() {
                    if ((pa - pb).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "m = {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_points_round_trip() {
        for m in [4, 16, 64, 256] {
            let c = Constellation::new(m).unwrap();
            let k = c.bits_per_symbol();
            for (label, p) in c.points().into_iter().enumerate() {
                let bits = c.demodulate(&[p]);
                let back = bits.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
                assert_eq!(back, label, "m = {m}, k = {k}");
            }
        }
    }

    #[test]
    fn awgn_ber_matches_q_function() {
        // Q(sqrt(2 * 10^0.7)), evaluated independently with scipy.stats.norm.sf.
        const EXPECTED: f64 = 7.726748153784446e-4;
        let ebn0 = 10f64.powf(0.7);
        // Es = 1 and Eb = 1/2, so per-dimension variance N0/2 = 1 / (4 Eb/N0).
        let sigma = (1.0 / (4.0 * ebn0)).sqrt();
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n_sym = 100_000;
        let bits: Vec<u8> = (0..2 * n_sym).map(|_| rng.random_range(0..2u8)).collect();
        let tx = qam_modulate(&bits, 4).unwrap();
        let rx: Vec<_> = tx
            .iter()
            .map(|s| s + ComplexSample::new(noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        let out = qam_demodulate(&rx, 4).unwrap();
        let errors = bits.iter().zip(&out).filter(|(a, b)| a != b).count();
        let ber = errors as f64 / bits.len() as f64;
        let se = (EXPECTED * (1.0 - EXPECTED) / bits.len() as f64).sqrt();
        assert!((ber - EXPECTED).abs() <= 3.0 * se, "ber {ber} vs {EXPECTED}");
    }

    proptest! {
        #[test]
        fn round_trip_any_bits(raw in proptest::collection::vec(0u8..2, 0..96), order in prop::sample::select(vec![4usize, 16, 64])) {
            let c = Constellation::new(order).unwrap();
            let k = c.bits_per_symbol();
            let bits = &raw[..raw.len() / k * k];
            let syms = c.modulate(bits).unwrap();
            prop_assert_eq!(c.demodulate(&syms), bits.to_vec());
        }
    }
}
