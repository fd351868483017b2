//! Seeded Monte Carlo BER sweeps and the metrics that go with them.
//!
//! The SNR axis is the electrical SNR `E[x_t^2] / sigma^2`, where the
//! transmit power is measured per scheme on a dedicated calibration stream.
//! Work is split into fixed-size batches of frame-pair windows. Every batch
//! draws from its own ChaCha stream keyed by (scheme, SNR point, batch), and
//! batches are merged strictly in index order, so a sweep is bit-for-bit
//! reproducible from its configuration regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    apply_channel, frequency_response_with, random_diffuse_ir, ImpulseResponse, NoiseSpec,
};
use crate::dsp::qam::Constellation;
use crate::modem::{FftOpCounter, Modem, OfdmConfig, Scheme, DEFAULT_SAMPLE_TIME};
use crate::{ComplexSample, Error, Result};

/// Batches evaluated concurrently before the stopping rule is checked.
const BATCHES_PER_ROUND: u64 = 16;
/// Stream index reserved for transmit power calibration.
const CALIBRATION_POINT: u64 = 0xffff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelMode {
    /// Directed line-of-sight link: identity channel plus AWGN.
    LosAwgn,
    /// Diffuse link: a fresh random impulse response per frame-pair window.
    Diffused,
}

impl ChannelMode {
    pub fn name(self) -> &'static str {
        match self {
            ChannelMode::LosAwgn => "los",
            ChannelMode::Diffused => "diffused",
        }
    }
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "los" | "awgn" | "los_awgn" => Ok(ChannelMode::LosAwgn),
            "diffused" | "diffuse" => Ok(ChannelMode::Diffused),
            other => Err(Error::config(format!("unknown channel mode `{other}`"))),
        }
    }
}

/// Diffuse channel generator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// RMS delay spread `D` in seconds.
    pub rms_delay_spread: f64,
    /// Tap spacing in seconds.
    pub tap_spacing: f64,
    pub taps: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            rms_delay_spread: 8e-9,
            tap_spacing: DEFAULT_SAMPLE_TIME,
            taps: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub snr_grid_db: Vec<f64>,
    pub channel_mode: ChannelMode,
    /// A point stops once this many bit errors are seen...
    pub min_bit_errors: u64,
    /// ...or once this many bits have been simulated.
    pub max_bits: u64,
    pub master_seed: u64,
    /// Transform/framing parameters; the scheme field is overridden per curve.
    pub ofdm: OfdmConfig,
    pub channel: ChannelParams,
    /// Frame-pair windows per work unit.
    pub batch_windows: usize,
    /// Windows used to measure each scheme's transmit power.
    pub calibration_windows: usize,
}

impl SweepConfig {
    /// Reference parameter set for `mode` with an empty SNR grid.
    pub fn reference(mode: ChannelMode) -> Self {
        let ofdm = match mode {
            ChannelMode::LosAwgn => OfdmConfig::reference_los(Scheme::Flip),
            ChannelMode::Diffused => OfdmConfig::reference_diffused(Scheme::Flip),
        };
        Self {
            schemes: Scheme::ALL.to_vec(),
            snr_grid_db: Vec::new(),
            channel_mode: mode,
            min_bit_errors: 300,
            max_bits: 10_000_000,
            master_seed: 1,
            ofdm,
            channel: ChannelParams::default(),
            batch_windows: 32,
            calibration_windows: 4096,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::config("no schemes selected"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("SNR grid is empty"));
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::config(format!("invalid SNR grid value {bad}")));
        }
        if self.max_bits == 0 {
            return Err(Error::config("max_bits must be positive"));
        }
        if self.batch_windows == 0 || self.calibration_windows == 0 {
            return Err(Error::config("batch and calibration window counts must be positive"));
        }
        if self.channel_mode == ChannelMode::Diffused {
            let ch = &self.channel;
            if !(ch.rms_delay_spread > 0.0) || !(ch.tap_spacing > 0.0) {
                return Err(Error::config("delay spread and tap spacing must be positive"));
            }
            if ((ch.tap_spacing - self.ofdm.sample_time) / self.ofdm.sample_time).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "tap spacing {:e} s differs from sample time {:e} s",
                    ch.tap_spacing, self.ofdm.sample_time
                )));
            }
            self.ofdm.validate_for_channel(ch.taps)?;
        }
        Ok(())
    }

    fn max_windows(&self) -> u64 {
        self.max_bits.div_ceil(self.ofdm.bits_per_window() as u64)
    }
}

/// Error statistics at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Monte Carlo standard error of `ber`.
    pub stderr: f64,
}

impl BerPoint {
    /// Point with the binomial standard error `sqrt(p (1 - p) / bits)`,
    /// valid when bit errors are independent.
    pub fn new(snr_db: f64, bits: u64, bit_errors: u64) -> Self {
        let ber = if bits == 0 {
            0.0
        } else {
            bit_errors as f64 / bits as f64
        };
        let stderr = if bits == 0 {
            0.0
        } else {
            (ber * (1.0 - ber) / bits as f64).sqrt()
        };
        Self {
            snr_db,
            bits,
            bit_errors,
            ber,
            stderr,
        }
    }

    /// Point whose standard error treats each frame-pair window as one
    /// independent sample, since errors inside a window share a channel draw.
    /// Reduces to the binomial value when bit errors are independent.
    pub fn from_windows(
        snr_db: f64,
        windows: u64,
        bits_per_window: u64,
        bit_errors: u64,
        sum_sq_window_errors: f64,
    ) -> Self {
        let mut point = Self::new(snr_db, windows * bits_per_window, bit_errors);
        if windows >= 2 {
            let w = windows as f64;
            let mean = bit_errors as f64 / w;
            let var = ((sum_sq_window_errors - w * mean * mean) / (w - 1.0)).max(0.0);
            point.stderr = (var / w).sqrt() / bits_per_window as f64;
        }
        point
    }
}

/// One scheme's BER curve plus its merged transform counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCurve {
    pub scheme: Scheme,
    /// Measured mean squared transmit sample.
    pub signal_power: f64,
    pub points: Vec<BerPoint>,
    pub counter: FftOpCounter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub curves: Vec<SchemeCurve>,
}

impl SweepResult {
    pub fn curve(&self, scheme: Scheme) -> Option<&SchemeCurve> {
        self.curves.iter().find(|c| c.scheme == scheme)
    }
}

/// `E[x_t^2] / sigma^2`. Returns infinity for a noiseless channel.
pub fn electrical_snr(signal: &[f64], sigma2: f64) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::config("electrical SNR of an empty signal"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::config(format!("noise variance {sigma2} must be >= 0")));
    }
    let power = signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64;
    Ok(if sigma2 == 0.0 {
        f64::INFINITY
    } else {
        power / sigma2
    })
}

/// Noise variance giving `snr_db` for a signal of mean square `signal_power`.
pub fn noise_variance_for_snr(snr_db: f64, signal_power: f64) -> Result<f64> {
    if !(signal_power > 0.0) {
        return Err(Error::config(format!("signal power {signal_power} must be positive")));
    }
    Ok(signal_power / 10f64.powf(snr_db / 10.0))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Information bits per second per hertz, `log2(M) / 4` for either scheme.
pub fn spectral_efficiency(scheme: Scheme, m: usize) -> Result<f64> {
    let c = Constellation::new(m)?;
    let quarter = c.bits_per_symbol() as f64 / 4.0;
    Ok(match scheme {
        // Odd subcarriers of a Hermitian frame: a quarter of N per symbol.
        Scheme::Aco => quarter,
        // Half of N per frame, but two subframes per frame.
        Scheme::Flip => quarter,
    })
}

/// Gaussian tail `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Gray-coded QPSK over AWGN: `Q(sqrt(2 Eb/N0))`.
pub fn analytic_qpsk_ber(ebn0_linear: f64) -> f64 {
    q_function((2.0 * ebn0_linear.max(0.0)).sqrt())
}

/// Keyed substream of the master seed.
pub fn substream(master_seed: u64, scheme: Scheme, point: u64, batch: u64) -> ChaCha8Rng {
    let scheme_key = match scheme {
        Scheme::Aco => 1u64,
        Scheme::Flip => 2u64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((scheme_key << 56) | ((point & 0xffff) << 40) | (batch & 0xff_ffff_ffff));
    rng
}

fn fill_bits(rng: &mut impl Rng, bits: &mut [u8]) {
    bits.iter_mut().for_each(|b| *b = rng.random_range(0..2));
}

/// Mean squared transmit sample over `windows` random frame pairs.
pub fn measure_signal_power(modem: &Modem, windows: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut bits = vec![0u8; modem.config().bits_per_window()];
    let mut counter = modem.new_counter();
    let mut energy = 0.0;
    let mut samples = 0usize;
    for _ in 0..windows {
        fill_bits(rng, &mut bits);
        let frame = modem.transmit(&bits, &mut counter)?;
        energy += frame.energy();
        samples += frame.len();
    }
    Ok(energy / samples as f64)
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchStats {
    windows: u64,
    bits: u64,
    errors: u64,
    sq_errors: f64,
    counter: FftOpCounter,
}

struct PointJob<'a> {
    cfg: &'a SweepConfig,
    modem: &'a Modem,
    flat: &'a [ComplexSample],
    noise: NoiseSpec,
    point: u64,
}

impl PointJob<'_> {
    fn run_batch(&self, batch: u64, windows: u64) -> Result<BatchStats> {
        let cfg = self.cfg;
        let ofdm = self.modem.config();
        let mut rng = substream(cfg.master_seed, ofdm.scheme, self.point, batch);
        let mut stats = BatchStats {
            counter: self.modem.new_counter(),
            ..Default::default()
        };
        let mut bits = vec![0u8; ofdm.bits_per_window()];
        let identity = ImpulseResponse::identity(ofdm.sample_time);
        for _ in 0..windows {
            fill_bits(&mut rng, &mut bits);
            let frame = self.modem.transmit(&bits, &mut stats.counter)?;
            let (ir, response) = match cfg.channel_mode {
                ChannelMode::LosAwgn => (identity.clone(), self.flat.to_vec()),
                ChannelMode::Diffused => {
                    let ch = &cfg.channel;
                    let ir = random_diffuse_ir(ch.rms_delay_spread, ch.tap_spacing, ch.taps, &mut rng)?;
                    let response = frequency_response_with(&ir, self.modem.plan())?;
                    (ir, response)
                }
            };
            let y = apply_channel(&frame.samples, ofdm.sample_time, &ir, &self.noise, &mut rng)?;
            let decided = self.modem.receive(&y, &response, &mut stats.counter)?;
            let errors = bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
            stats.windows += 1;
            stats.bits += bits.len() as u64;
            stats.errors += errors;
            stats.sq_errors += (errors * errors) as f64;
        }
        Ok(stats)
    }

    fn run(&self) -> Result<(BerPoint, FftOpCounter)> {
        let cfg = self.cfg;
        let batch = cfg.batch_windows as u64;
        let max_windows = cfg.max_windows();
        let n_batches = max_windows.div_ceil(batch);
        let mut total = BatchStats {
            counter: self.modem.new_counter(),
            ..Default::default()
        };
        let mut next = 0u64;
        'rounds: while next < n_batches {
            let end = (next + BATCHES_PER_ROUND).min(n_batches);
            let results: Vec<BatchStats> = (next..end)
                .into_par_iter()
                .map(|b| {
                    let windows = batch.min(max_windows - b * batch);
                    self.run_batch(b, windows)
                })
                .collect::<Result<_>>()?;
            for r in results {
                total.windows += r.windows;
                total.bits += r.bits;
                total.errors += r.errors;
                total.sq_errors += r.sq_errors;
                total.counter.merge(&r.counter);
                if total.errors >= cfg.min_bit_errors && cfg.min_bit_errors > 0 {
                    break 'rounds;
                }
            }
            next = end;
        }
        let snr_db = cfg.snr_grid_db[self.point as usize];
        let point = BerPoint::from_windows(
            snr_db,
            total.windows,
            self.modem.config().bits_per_window() as u64,
            total.errors,
            total.sq_errors,
        );
        Ok((point, total.counter))
    }
}

/// Runs every (scheme, SNR) point of the sweep.
pub fn run_ber_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let flat = vec![ComplexSample::new(1.0, 0.0); cfg.ofdm.n];
    let mut curves = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let modem = Modem::new(cfg.ofdm.with_scheme(scheme))?;
        let mut cal = substream(cfg.master_seed, scheme, CALIBRATION_POINT, 0);
        let signal_power = measure_signal_power(&modem, cfg.calibration_windows, &mut cal)?;
        let mut counter = modem.new_counter();
        let mut points = Vec::with_capacity(cfg.snr_grid_db.len());
        for (i, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
            let job = PointJob {
                cfg,
                modem: &modem,
                flat: &flat,
                noise: NoiseSpec::new(noise_variance_for_snr(snr_db, signal_power)?)?,
                point: i as u64,
            };
            let (point, c) = job.run()?;
            counter.merge(&c);
            points.push(point);
        }
        curves.push(SchemeCurve {
            scheme,
            signal_power,
            points,
            counter,
        });
    }
    Ok(SweepResult {
        config: cfg.clone(),
        curves,
    })
}
