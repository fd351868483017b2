//! Transform-count accounting per frame-pair window.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FftOpCounter, Modem, OfdmConfig, Scheme};
use crate::Result;

/// Seed for the bit stream driven through the chains when counting.
const COUNTING_SEED: u64 = 0x5eed_c0de;

/// Transform counts of both schemes over the same number of windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub n: usize,
    pub windows: u64,
    pub aco: FftOpCounter,
    pub flip: FftOpCounter,
}

impl ComplexityReport {
    pub fn from_counters(aco: FftOpCounter, flip: FftOpCounter) -> Self {
        Self {
            n: aco.size.max(flip.size),
            windows: aco.windows.min(flip.windows),
            aco,
            flip,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.aco.windows == 0 || self.flip.windows == 0
    }

    /// `N log2 N`, the cost unit of one full transform.
    pub fn unit_cost(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.n as f64 * (self.n as f64).log2()
    }

    fn per_window(count: u64, windows: u64) -> f64 {
        if windows == 0 {
            0.0
        } else {
            count as f64 / windows as f64
        }
    }

    pub fn tx_per_window(&self, scheme: Scheme) -> f64 {
        let c = self.counter(scheme);
        Self::per_window(c.tx_transforms, c.windows)
    }

    pub fn rx_per_window(&self, scheme: Scheme) -> f64 {
        let c = self.counter(scheme);
        Self::per_window(c.rx_transforms, c.windows)
    }

    fn counter(&self, scheme: Scheme) -> &FftOpCounter {
        match scheme {
            Scheme::Aco => &self.aco,
            Scheme::Flip => &self.flip,
        }
    }

    /// TX cost per window. With `optimized`, an inverse transform whose even
    /// subcarriers are all zero is credited at half a full transform.
    pub fn tx_cost(&self, scheme: Scheme, optimized: bool) -> f64 {
        let c = self.counter(scheme);
        if c.windows == 0 {
            return 0.0;
        }
        let half = if optimized { c.tx_half_loaded } else { 0 };
        let full = c.tx_transforms - half;
        (full as f64 + 0.5 * half as f64) * self.unit_cost() / c.windows as f64
    }

    pub fn rx_cost(&self, scheme: Scheme) -> f64 {
        self.rx_per_window(scheme) * self.unit_cost()
    }

    /// `RX(ACO) / RX(Flip)` transform-count ratio, `None` when undefined.
    pub fn rx_ratio(&self) -> Option<f64> {
        let flip = self.rx_per_window(Scheme::Flip);
        if self.is_empty() || flip == 0.0 {
            return None;
        }
        Some(self.rx_per_window(Scheme::Aco) / flip)
    }

    /// Fraction of receiver cost Flip saves relative to ACO.
    pub fn rx_savings(&self) -> Option<f64> {
        let aco = self.rx_cost(Scheme::Aco);
        if self.is_empty() || aco == 0.0 {
            return None;
        }
        Some(1.0 - self.rx_cost(Scheme::Flip) / aco)
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "transform complexity, N = {}, {} frame-pair windows", self.n, self.windows)?;
        if self.is_empty() {
            return writeln!(f, "(empty report: no windows processed)");
        }
        let u = self.unit_cost();
        writeln!(f, "unit cost N*log2(N) = {u}")?;
        writeln!(f, "{:<24}{:>12}{:>12}", "per window", "ACO", "Flip")?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "TX inverse transforms",
            self.tx_per_window(Scheme::Aco),
            self.tx_per_window(Scheme::Flip)
        )?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "  of which half-loaded",
            Self::per_window(self.aco.tx_half_loaded, self.aco.windows),
            Self::per_window(self.flip.tx_half_loaded, self.flip.windows)
        )?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "RX forward transforms",
            self.rx_per_window(Scheme::Aco),
            self.rx_per_window(Scheme::Flip)
        )?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "TX cost (unoptimized)",
            self.tx_cost(Scheme::Aco, false),
            self.tx_cost(Scheme::Flip, false)
        )?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "TX cost (optimized)",
            self.tx_cost(Scheme::Aco, true),
            self.tx_cost(Scheme::Flip, true)
        )?;
        writeln!(
            f,
            "{:<24}{:>12}{:>12}",
            "RX cost",
            self.rx_cost(Scheme::Aco),
            self.rx_cost(Scheme::Flip)
        )?;
        if let Some(r) = self.rx_ratio() {
            writeln!(f, "RX transform ratio ACO:Flip = {r}:1")?;
        }
        if let Some(s) = self.rx_savings() {
            writeln!(f, "RX savings of Flip over ACO = {:.1}%", 100.0 * s)?;
        }
        Ok(())
    }
}

/// Drives `windows` random frame pairs of each scheme through a noiseless
/// identity channel and reports the transforms counted along the way.
pub fn complexity_report(cfg: &OfdmConfig, windows: u64) -> Result<ComplexityReport> {
    let mut counters = [FftOpCounter::new(cfg.n), FftOpCounter::new(cfg.n)];
    let flat = vec![crate::ComplexSample::new(1.0, 0.0); cfg.n];
    for (scheme, counter) in Scheme::ALL.into_iter().zip(counters.iter_mut()) {
        let modem = Modem::new(cfg.with_scheme(scheme))?;
        let mut rng = ChaCha8Rng::seed_from_u64(COUNTING_SEED);
        let mut bits = vec![0u8; cfg.bits_per_window()];
        for _ in 0..windows {
            bits.iter_mut().for_each(|b| *b = rng.random_range(0..2));
            let frame = modem.transmit(&bits, counter)?;
            modem.receive(&frame.samples, &flat, counter)?;
        }
    }
    let [aco, flip] = counters;
    Ok(ComplexityReport::from_counters(aco, flip))
}
