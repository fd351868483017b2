//! ACO-OFDM and Flip-OFDM transmitter and receiver chains.
//!
//! Both schemes are framed over the same *frame-pair window* of
//! `2 (N + cp)` samples:
//!
//! ```text
//! Flip: | CP | x+ (N) | CP | -x- (N) |
//! ACO:  | CP | sym A  | CP | sym B   |
//! ```
//!
//! Flip carries one Hermitian frame with `N/2 - 1` data subcarriers split by
//! polarity over the two subframes. ACO sends two independent symbols with
//! data on odd subcarriers only; the second symbol leaves its highest odd
//! subcarrier empty so that both schemes carry `(N/2 - 1) log2(M)` bits per
//! window. Every subframe carries a cyclic prefix of its own tail.

mod complexity;

pub use complexity::{complexity_report, ComplexityReport};

use crate::dsp::fft::Fft;
use crate::dsp::frame::{hermitian_frame, SpectrumFrame, TimeFrame};
use crate::dsp::qam::Constellation;
use crate::{ComplexSample, Error, Result};

/// Default sampling time and tap spacing, 0.75 ns.
pub const DEFAULT_SAMPLE_TIME: f64 = 0.75e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Aco,
    Flip,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Aco, Scheme::Flip];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Aco => "aco",
            Scheme::Flip => "flip",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aco" | "aco-ofdm" => Ok(Scheme::Aco),
            "flip" | "flip-ofdm" => Ok(Scheme::Flip),
            other => Err(Error::config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    /// FFT/IFFT size `N`.
    pub n: usize,
    /// Constellation order `M`.
    pub m: usize,
    /// Cyclic prefix length in samples.
    pub cp_len: usize,
    pub scheme: Scheme,
    /// Sampling time `Ts` in seconds.
    pub sample_time: f64,
}

impl OfdmConfig {
    /// Reference diffuse-link parameters:
    /// N = 256, QPSK, Ts = 0.75 ns, CP = 65 samples.
    pub fn reference_diffused(scheme: Scheme) -> Self {
        Self {
            n: 256,
            m: 4,
            cp_len: 65,
            scheme,
            sample_time: DEFAULT_SAMPLE_TIME,
        }
    }

    /// Reference LOS / AWGN parameters: as the diffuse case but CP = 10 samples.
    pub fn reference_los(scheme: Scheme) -> Self {
        Self {
            cp_len: 10,
            ..Self::reference_diffused(scheme)
        }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::config(format!(
                "FFT size {} must be a power of two >= 8",
                self.n
            )));
        }
        Constellation::new(self.m)?;
        if self.cp_len >= self.n {
            return Err(Error::config(format!(
                "cyclic prefix {} must be shorter than N = {}",
                self.cp_len, self.n
            )));
        }
        if !(self.sample_time > 0.0) || !self.sample_time.is_finite() {
            return Err(Error::config(format!(
                "sample time {} must be positive",
                self.sample_time
            )));
        }
        Ok(())
    }

    /// Checks that the cyclic prefix covers a channel with `taps` taps.
    pub fn validate_for_channel(&self, taps: usize) -> Result<()> {
        self.validate()?;
        if taps == 0 || taps > self.n {
            return Err(Error::config(format!(
                "channel with {taps} taps does not fit N = {}",
                self.n
            )));
        }
        if self.cp_len + 1 < taps {
            return Err(Error::config(format!(
                "cyclic prefix {} is shorter than channel spread of {} taps (needs >= {})",
                self.cp_len,
                taps,
                taps - 1
            )));
        }
        Ok(())
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    /// Samples in one subframe including its prefix.
    pub fn subframe_len(&self) -> usize {
        self.n + self.cp_len
    }

    /// Samples in one frame-pair window.
    pub fn window_len(&self) -> usize {
        2 * self.subframe_len()
    }

    /// QAM symbols per frame-pair window, the same for both schemes.
    pub fn symbols_per_window(&self) -> usize {
        self.n / 2 - 1
    }

    pub fn bits_per_window(&self) -> usize {
        self.symbols_per_window() * self.bits_per_symbol()
    }

    /// Data subcarriers used by each of the two ACO symbols in a window.
    pub fn aco_bins(&self) -> [Vec<usize>; 2] {
        let odd: Vec<usize> = (1..self.n / 2).step_by(2).collect();
        let second = odd[..odd.len() - 1].to_vec();
        [odd, second]
    }
}

/// Nonnegative transmit samples for one frame-pair window.
#[derive(Debug, Clone, PartialEq)]
pub struct UnipolarFrame {
    pub samples: Vec<f64>,
}

impl UnipolarFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Mean of squared samples, the electrical transmit power.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }
}

/// Transform counts accumulated by one worker.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FftOpCounter {
    /// Transform size used by every counted operation.
    pub size: usize,
    pub windows: u64,
    pub tx_transforms: u64,
    /// TX inverse transforms whose even subcarriers were all zero.
    pub tx_half_loaded: u64,
    pub rx_transforms: u64,
}

impl FftOpCounter {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            ..Self::default()
        }
    }

    pub fn merge(&mut self, other: &FftOpCounter) {
        if self.size == 0 {
            self.size = other.size;
        }
        self.windows += other.windows;
        self.tx_transforms += other.tx_transforms;
        self.tx_half_loaded += other.tx_half_loaded;
        self.rx_transforms += other.rx_transforms;
    }
}

/// Splits a bipolar frame into its positive and negative parts.
pub fn split_polarity(x: &TimeFrame) -> (TimeFrame, TimeFrame) {
    let pos = x.samples.iter().map(|&v| if v >= 0.0 { v } else { 0.0 }).collect();
    let neg = x.samples.iter().map(|&v| if v < 0.0 { v } else { 0.0 }).collect();
    (TimeFrame { samples: pos }, TimeFrame { samples: neg })
}

fn push_with_prefix(out: &mut Vec<f64>, body: &[f64], cp_len: usize) {
    out.extend_from_slice(&body[body.len() - cp_len..]);
    out.extend_from_slice(body);
}

/// A configured transceiver: transform plan, constellation and framing.
#[derive(Debug, Clone)]
pub struct Modem {
    cfg: OfdmConfig,
    plan: Fft,
    constellation: Constellation,
}

impl Modem {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            plan: Fft::new(cfg.n)?,
            constellation: Constellation::new(cfg.m)?,
            cfg,
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    pub fn plan(&self) -> &Fft {
        &self.plan
    }

    pub fn new_counter(&self) -> FftOpCounter {
        FftOpCounter::new(self.cfg.n)
    }

    /// Runs the transmitter selected by the configured scheme.
    pub fn transmit(&self, bits: &[u8], counter: &mut FftOpCounter) -> Result<UnipolarFrame> {
        match self.cfg.scheme {
            Scheme::Aco => self.aco_tx(bits, counter),
            Scheme::Flip => self.flip_tx(bits, counter),
        }
    }

    /// Runs the receiver selected by the configured scheme.
    pub fn receive(
        &self,
        y: &[f64],
        h: &[ComplexSample],
        counter: &mut FftOpCounter,
    ) -> Result<Vec<u8>> {
        match self.cfg.scheme {
            Scheme::Aco => self.aco_rx(y, h, counter),
            Scheme::Flip => self.flip_rx(y, h, counter),
        }
    }

    fn check_bits(&self, what: &'static str, bits: &[u8]) -> Result<()> {
        let expected = self.cfg.bits_per_window();
        if bits.len() != expected {
            return Err(Error::framing(what, expected, bits.len()));
        }
        Ok(())
    }

    fn check_rx(&self, what: &'static str, y: &[f64], h: &[ComplexSample]) -> Result<()> {
        if y.len() != self.cfg.window_len() {
            return Err(Error::framing(what, self.cfg.window_len(), y.len()));
        }
        if h.len() != self.cfg.n {
            return Err(Error::framing("channel response", self.cfg.n, h.len()));
        }
        Ok(())
    }

    /// Bipolar time frame for one window of bits, before polarity splitting.
    pub fn flip_bipolar(&self, bits: &[u8], counter: &mut FftOpCounter) -> Result<TimeFrame> {
        self.check_bits("flip_tx", bits)?;
        let data = self.constellation.modulate(bits)?;
        let frame = hermitian_frame(&data, self.cfg.n)?.to_time(&self.plan)?;
        counter.tx_transforms += 1;
        Ok(frame)
    }

    pub fn flip_tx(&self, bits: &[u8], counter: &mut FftOpCounter) -> Result<UnipolarFrame> {
        let x = self.flip_bipolar(bits, counter)?;
        let (pos, neg) = split_polarity(&x);
        let flipped: Vec<f64> = neg.samples.iter().map(|v| 0.0 - v).collect();
        let mut samples = Vec::with_capacity(self.cfg.window_len());
        push_with_prefix(&mut samples, &pos.samples, self.cfg.cp_len);
        push_with_prefix(&mut samples, &flipped, self.cfg.cp_len);
        counter.windows += 1;
        Ok(UnipolarFrame { samples })
    }

    fn subframe<'a>(&self, y: &'a [f64], index: usize) -> &'a [f64] {
        let start = index * self.cfg.subframe_len() + self.cfg.cp_len;
        &y[start..start + self.cfg.n]
    }

    /// Strips both prefixes and subtracts the second subframe from the first.
    pub fn flip_recombine(&self, y: &[f64]) -> Result<TimeFrame> {
        if y.len() != self.cfg.window_len() {
            return Err(Error::framing("flip_rx", self.cfg.window_len(), y.len()));
        }
        let samples = self
            .subframe(y, 0)
            .iter()
            .zip(self.subframe(y, 1))
            .map(|(p, m)| p - m)
            .collect();
        Ok(TimeFrame { samples })
    }

    /// Recombined received spectrum before equalization.
    pub fn flip_spectrum(&self, y: &[f64], counter: &mut FftOpCounter) -> Result<SpectrumFrame> {
        let spec = self.flip_recombine(y)?.to_spectrum(&self.plan)?;
        counter.rx_transforms += 1;
        Ok(spec)
    }

    /// Zero-forced data symbols on subcarriers `1..N/2`.
    pub fn flip_equalized(
        &self,
        y: &[f64],
        h: &[ComplexSample],
        counter: &mut FftOpCounter,
    ) -> Result<Vec<ComplexSample>> {
        self.check_rx("flip_rx", y, h)?;
        let spec = self.flip_spectrum(y, counter)?;
        (1..self.cfg.n / 2)
            .map(|bin| equalize(spec.bins[bin], h[bin], bin))
            .collect()
    }

    pub fn flip_rx(
        &self,
        y: &[f64],
        h: &[ComplexSample],
        counter: &mut FftOpCounter,
    ) -> Result<Vec<u8>> {
        let symbols = self.flip_equalized(y, h, counter)?;
        Ok(self.constellation.demodulate(&symbols))
    }

    /// Unclipped bipolar ACO symbols for one window of bits.
    pub fn aco_unclipped(&self, bits: &[u8], counter: &mut FftOpCounter) -> Result<[TimeFrame; 2]> {
        self.check_bits("aco_tx", bits)?;
        let data = self.constellation.modulate(bits)?;
        let [first, second] = self.cfg.aco_bins();
        let (a, b) = data.split_at(first.len());
        Ok([
            self.aco_symbol(a, &first, counter)?,
            self.aco_symbol(b, &second, counter)?,
        ])
    }

    fn aco_symbol(
        &self,
        data: &[ComplexSample],
        bins: &[usize],
        counter: &mut FftOpCounter,
    ) -> Result<TimeFrame> {
        let n = self.cfg.n;
        let mut spec = SpectrumFrame {
            bins: vec![ComplexSample::new(0.0, 0.0); n],
        };
        for (&bin, &d) in bins.iter().zip(data) {
            spec.bins[bin] = d;
            spec.bins[n - bin] = d.conj();
        }
        let frame = spec.to_time(&self.plan)?;
        counter.tx_transforms += 1;
        counter.tx_half_loaded += 1;
        Ok(frame)
    }

    pub fn aco_tx(&self, bits: &[u8], counter: &mut FftOpCounter) -> Result<UnipolarFrame> {
        let symbols = self.aco_unclipped(bits, counter)?;
        let mut samples = Vec::with_capacity(self.cfg.window_len());
        for sym in &symbols {
            let clipped: Vec<f64> = sym.samples.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
            push_with_prefix(&mut samples, &clipped, self.cfg.cp_len);
        }
        counter.windows += 1;
        Ok(UnipolarFrame { samples })
    }

    /// Received spectra of both ACO symbols before equalization.
    pub fn aco_spectra(&self, y: &[f64], counter: &mut FftOpCounter) -> Result<[SpectrumFrame; 2]> {
        if y.len() != self.cfg.window_len() {
            return Err(Error::framing("aco_rx", self.cfg.window_len(), y.len()));
        }
        let spectrum = |i| {
            TimeFrame {
                samples: self.subframe(y, i).to_vec(),
            }
            .to_spectrum(&self.plan)
        };
        let spectra = [spectrum(0)?, spectrum(1)?];
        counter.rx_transforms += 2;
        Ok(spectra)
    }

    /// Data symbols of both ACO symbols: odd bins doubled, then zero-forced.
    pub fn aco_equalized(
        &self,
        y: &[f64],
        h: &[ComplexSample],
        counter: &mut FftOpCounter,
    ) -> Result<Vec<ComplexSample>> {
        self.check_rx("aco_rx", y, h)?;
        let spectra = self.aco_spectra(y, counter)?;
        let mut out = Vec::with_capacity(self.cfg.symbols_per_window());
        for (spec, bins) in spectra.iter().zip(self.cfg.aco_bins()) {
            for bin in bins {
                out.push(equalize(2.0 * spec.bins[bin], h[bin], bin)?);
            }
        }
        Ok(out)
    }

    pub fn aco_rx(
        &self,
        y: &[f64],
        h: &[ComplexSample],
        counter: &mut FftOpCounter,
    ) -> Result<Vec<u8>> {
        let symbols = self.aco_equalized(y, h, counter)?;
        Ok(self.constellation.demodulate(&symbols))
    }
}

fn equalize(y: ComplexSample, h: ComplexSample, bin: usize) -> Result<ComplexSample> {
    if h.norm_sqr() == 0.0 {
        return Err(Error::Singularity { bin });
    }
    Ok(y / h)
}

/// One-shot Flip transmitter.
pub fn flip_tx(bits: &[u8], cfg: &OfdmConfig) -> Result<UnipolarFrame> {
    let modem = Modem::new(cfg.with_scheme(Scheme::Flip))?;
    modem.flip_tx(bits, &mut modem.new_counter())
}

/// One-shot Flip receiver.
pub fn flip_rx(y: &[f64], h: &[ComplexSample], cfg: &OfdmConfig) -> Result<Vec<u8>> {
    let modem = Modem::new(cfg.with_scheme(Scheme::Flip))?;
    modem.flip_rx(y, h, &mut modem.new_counter())
}

/// One-shot ACO transmitter.
pub fn aco_tx(bits: &[u8], cfg: &OfdmConfig) -> Result<UnipolarFrame> {
    let modem = Modem::new(cfg.with_scheme(Scheme::Aco))?;
    modem.aco_tx(bits, &mut modem.new_counter())
}

/// One-shot ACO receiver.
pub fn aco_rx(y: &[f64], h: &[ComplexSample], cfg: &OfdmConfig) -> Result<Vec<u8>> {
    let modem = Modem::new(cfg.with_scheme(Scheme::Aco))?;
    modem.aco_rx(y, h, &mut modem.new_counter())
}
