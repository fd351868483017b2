//! Diffuse indoor optical channels as tapped delay lines.
//!
//! A realization is a set of nonnegative tap gains at a fixed spacing,
//! normalized to unit energy. Half of the taps (chosen at random) draw
//! their gain uniformly below the ceiling-bounce envelope, the rest below
//! the exponential-decay envelope.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dsp::fft::Fft;
use crate::{ComplexSample, Error, Result};

/// Relative tolerance when comparing sample time against tap spacing.
const SPACING_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TapModel {
    CeilingBounce,
    ExponentialDecay,
}

impl TapModel {
    fn code(self) -> char {
        match self {
            TapModel::CeilingBounce => 'C',
            TapModel::ExponentialDecay => 'E',
        }
    }

    fn from_code(c: char) -> Option<Self> {
        match c {
            'C' => Some(TapModel::CeilingBounce),
            'E' => Some(TapModel::ExponentialDecay),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    /// Tap gains `h_n`, all nonnegative.
    pub taps: Vec<f64>,
    /// Spacing between taps in seconds.
    pub tap_spacing: f64,
    /// Envelope each tap was drawn from; empty for deterministic channels.
    pub models: Vec<TapModel>,
}

impl ImpulseResponse {
    /// Single unit tap: the LOS / pure AWGN case.
    pub fn identity(tap_spacing: f64) -> Self {
        Self {
            taps: vec![1.0],
            tap_spacing,
            models: Vec::new(),
        }
    }

    pub fn from_taps(taps: Vec<f64>, tap_spacing: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::config("impulse response needs at least one tap"));
        }
        if let Some(bad) = taps.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::config(format!("tap gain {bad} is not a finite nonnegative value")));
        }
        if !(tap_spacing > 0.0) {
            return Err(Error::config(format!("tap spacing {tap_spacing} must be positive")));
        }
        Ok(Self {
            taps,
            tap_spacing,
            models: Vec::new(),
        })
    }

    pub fn tap_count(&self) -> usize {
        self.taps.len()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h * h).sum()
    }

    /// Delay of the last tap in seconds.
    pub fn span(&self) -> f64 {
        (self.tap_count() - 1) as f64 * self.tap_spacing
    }

    /// Scales the taps to unit energy.
    pub fn normalize(&mut self) -> Result<()> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::config("cannot normalize an all-zero impulse response"));
        }
        let s = e.sqrt().recip();
        self.taps.iter_mut().for_each(|h| *h *= s);
        Ok(())
    }

    /// RMS delay spread in seconds, weighting each tap by its power gain `h_n`.
    pub fn rms_delay(&self) -> f64 {
        let total: f64 = self.taps.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let delay = |i: usize| i as f64 * self.tap_spacing;
        let mean = self.taps.iter().enumerate().map(|(i, h)| delay(i) * h).sum::<f64>() / total;
        let var = self
            .taps
            .iter()
            .enumerate()
            .map(|(i, h)| (delay(i) - mean).powi(2) * h)
            .sum::<f64>()
            / total;
        var.sqrt()
    }
}

/// Signal-independent white Gaussian noise added per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0) {
            return Err(Error::config(format!("noise variance {variance} must be >= 0")));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }
}

fn check_delay_spread(d: f64) -> Result<()> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::config(format!("rms delay spread {d} must be positive")));
    }
    Ok(())
}

/// Exponential-decay envelope `(1/D) exp(-t/D) u(t)`.
pub fn exp_decay_envelope(t: f64, d: f64) -> Result<f64> {
    check_delay_spread(d)?;
    Ok(if t < 0.0 { 0.0 } else { (-t / d).exp() / d })
}

/// Ceiling-bounce shape parameter `a = 12 sqrt(11/13) D`.
pub fn ceiling_bounce_a(d: f64) -> f64 {
    12.0 * (11.0f64 / 13.0).sqrt() * d
}

/// Ceiling-bounce envelope `6 a^6 / (t + a)^7 u(t)`.
pub fn ceiling_bounce_envelope(t: f64, d: f64) -> Result<f64> {
    check_delay_spread(d)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    let a = ceiling_bounce_a(d);
    // 6 a^6 / (t+a)^7 written as (6/(t+a)) (a/(t+a))^6 to stay in range.
    let r = a / (t + a);
    Ok(6.0 / (t + a) * r.powi(6))
}

/// Draws one normalized diffuse realization with `taps` taps at `dtau` spacing.
pub fn random_diffuse_ir<R: Rng + ?Sized>(
    d: f64,
    dtau: f64,
    taps: usize,
    rng: &mut R,
) -> Result<ImpulseResponse> {
    check_delay_spread(d)?;
    if !(dtau > 0.0) || !dtau.is_finite() {
        return Err(Error::config(format!("tap spacing {dtau} must be positive")));
    }
    if taps == 0 {
        return Err(Error::config("diffuse channel needs at least one tap"));
    }
    if taps == 1 {
        return Ok(ImpulseResponse {
            taps: vec![1.0],
            tap_spacing: dtau,
            models: vec![TapModel::ExponentialDecay],
        });
    }

    let mut order: Vec<usize> = (0..taps).collect();
    order.shuffle(rng);
    let mut models = vec![TapModel::ExponentialDecay; taps];
    for &i in &order[..taps / 2] {
        models[i] = TapModel::CeilingBounce;
    }

    let mut gains = Vec::with_capacity(taps);
    for (i, model) in models.iter().enumerate() {
        let t = i as f64 * dtau;
        let ceiling = match model {
            TapModel::CeilingBounce => ceiling_bounce_envelope(t, d)?,
            TapModel::ExponentialDecay => exp_decay_envelope(t, d)?,
        };
        gains.push(rng.random::<f64>() * ceiling);
    }

    let mut ir = ImpulseResponse {
        taps: gains,
        tap_spacing: dtau,
        models,
    };
    ir.normalize()?;
    Ok(ir)
}

/// Linear convolution of `x` with `taps`, truncated to `x.len()` samples.
pub fn convolve_truncated(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (k, y) in out.iter_mut().enumerate() {
        let reach = taps.len().min(k + 1);
        *y = (0..reach).map(|m| taps[m] * x[k - m]).sum();
    }
    out
}

/// `y = x * h + n`: convolution truncated to the input length plus i.i.d. noise.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[f64],
    sample_time: f64,
    h: &ImpulseResponse,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if ((sample_time - h.tap_spacing) / h.tap_spacing).abs() > SPACING_RTOL {
        return Err(Error::config(format!(
            "sample time {sample_time:e} s does not match tap spacing {:e} s",
            h.tap_spacing
        )));
    }
    let mut y = if h.taps.len() == 1 {
        x.iter().map(|v| v * h.taps[0]).collect()
    } else {
        convolve_truncated(x, &h.taps)
    };
    if noise.variance > 0.0 {
        let sigma = noise.variance.sqrt();
        for v in y.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += sigma * z;
        }
    }
    Ok(y)
}

/// Per-subcarrier response, the size-`n` transform of the zero-padded taps.
pub fn channel_frequency_response(h: &ImpulseResponse, n: usize) -> Result<Vec<ComplexSample>> {
    let plan = Fft::new(n)?;
    frequency_response_with(h, &plan)
}

pub(crate) fn frequency_response_with(h: &ImpulseResponse, plan: &Fft) -> Result<Vec<ComplexSample>> {
    let n = plan.len();
    if h.tap_count() > n {
        return Err(Error::config(format!(
            "{} taps exceed transform size {n}",
            h.tap_count()
        )));
    }
    let mut buf = vec![ComplexSample::new(0.0, 0.0); n];
    for (b, &t) in buf.iter_mut().zip(&h.taps) {
        b.re = t;
    }
    plan.forward(&mut buf)?;
    Ok(buf)
}

/// A channel realization together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDump {
    pub rms_delay_spread: f64,
    pub seed: u64,
    pub ir: ImpulseResponse,
}

impl ChannelDump {
    /// Plain-text tap table: `#` header lines, then `index delay_ns amplitude` rows.
    pub fn to_text(&self) -> String {
        let partition: String = self.ir.models.iter().map(|m| m.code()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "# diffuse optical channel impulse response");
        let _ = writeln!(s, "# rms_delay_spread_ns = {}", self.rms_delay_spread * 1e9);
        let _ = writeln!(s, "# tap_spacing_ns = {}", self.ir.tap_spacing * 1e9);
        let _ = writeln!(s, "# seed = {}", self.seed);
        let _ = writeln!(s, "# partition = {partition}");
        let _ = writeln!(s, "# index delay_ns amplitude");
        for (i, h) in self.ir.taps.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.4} {h:e}", i as f64 * self.ir.tap_spacing * 1e9);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rms = None;
        let mut spacing = None;
        let mut seed = None;
        let mut models = Vec::new();
        let mut taps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let bad = |what: &str| Error::config(format!("line {}: {what}", lineno + 1));
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((key, value)) = rest.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "rms_delay_spread_ns" => {
                        rms = Some(value.parse::<f64>().map_err(|_| bad("bad delay spread"))? * 1e-9)
                    }
                    "tap_spacing_ns" => {
                        spacing = Some(value.parse::<f64>().map_err(|_| bad("bad tap spacing"))? * 1e-9)
                    }
                    "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("bad seed"))?),
                    "partition" => {
                        models = value
                            .chars()
                            .map(|c| TapModel::from_code(c).ok_or_else(|| bad("bad partition code")))
                            .collect::<Result<_>>()?
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad("expected `index delay_ns amplitude`"));
            }
            let index: usize = fields[0].parse().map_err(|_| bad("bad tap index"))?;
            if index != taps.len() {
                return Err(bad("tap indices must be consecutive from 0"));
            }
            taps.push(fields[2].parse::<f64>().map_err(|_| bad("bad amplitude"))?);
        }
        let spacing = spacing.ok_or_else(|| Error::config("missing tap_spacing_ns header"))?;
        let mut ir = ImpulseResponse::from_taps(taps, spacing)?;
        if !models.is_empty() && models.len() != ir.tap_count() {
            return Err(Error::config("partition length does not match tap count"));
        }
        ir.models = models;
        Ok(Self {
            rms_delay_spread: rms.ok_or_else(|| Error::config("missing rms_delay_spread_ns header"))?,
            seed: seed.ok_or_else(|| Error::config("missing seed header"))?,
            ir,
        })
    }
}
