//! Flat `key = value` run configuration.
//!
//! ```text
//! # diffuse link, reference parameters
//! channel = diffused
//! fft_size = 256
//! cyclic_prefix = 65
//! snr_db = 8, 14, 20, 26, 32, 40
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use uofdm::modem::{OfdmConfig, Scheme};
use uofdm::sim::{ChannelMode, ChannelParams, SweepConfig};

use crate::CliError;

/// Recognized keys, in the order they are written back out.
pub const KEYS: &[(&str, &str)] = &[
    ("channel", "diffused | los"),
    ("fft_size", "FFT/IFFT size N, power of two >= 8"),
    ("constellation", "square QAM order M (4 = QPSK)"),
    ("cyclic_prefix", "cyclic prefix length in samples"),
    ("sample_time_ns", "sampling time Ts in ns"),
    ("tap_spacing_ns", "channel tap spacing in ns"),
    ("rms_delay_spread_ns", "RMS delay spread D in ns"),
    ("channel_taps", "number of channel taps"),
    ("schemes", "comma-separated subset of aco, flip"),
    ("snr_db", "comma-separated electrical SNR grid in dB"),
    ("min_bit_errors", "stop a point after this many bit errors"),
    ("max_bits", "stop a point after this many bits"),
    ("seed", "master RNG seed"),
    ("batch_windows", "frame-pair windows per work unit"),
    ("calibration_windows", "windows used to measure transmit power"),
];

pub const DIFFUSED_SNR_GRID: [f64; 6] = [8.0, 14.0, 20.0, 26.0, 32.0, 40.0];
pub const LOS_SNR_GRID: [f64; 6] = [2.0, 4.0, 6.0, 8.0, 10.0, 11.5];

/// Raw key/value pairs with the line each came from (0 = command line).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    origin: String,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig {
            entries: BTreeMap::new(),
            origin: origin.to_string(),
        };
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(raw.error_at(lineno, format!("expected `key = value`, got `{line}`")));
            };
            raw.insert(key.trim(), value.trim(), lineno)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, lineno: usize) -> Result<(), CliError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(self.error_at(lineno, format!("unknown key `{key}`")));
        }
        if lineno > 0 {
            if let Some((_, prev)) = self.entries.get(key) {
                if *prev > 0 {
                    return Err(self.error_at(lineno, format!("duplicate key `{key}` (first on line {prev})")));
                }
            }
        }
        self.entries.insert(key.to_string(), (value.to_string(), lineno));
        Ok(())
    }

    /// Applies a `key=value` command-line override.
    pub fn set_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::Validation(format!(
                "override `{assignment}` is not of the form key=value"
            )));
        };
        self.insert(key.trim(), value.trim(), 0)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn error_at(&self, lineno: usize, msg: String) -> CliError {
        if lineno == 0 {
            CliError::Validation(format!("command line: {msg}"))
        } else {
            CliError::Validation(format!("{}:{lineno}: {msg}", self.origin))
        }
    }

    fn error_for(&self, key: &str, msg: String) -> CliError {
        match self.entries.get(key) {
            Some((_, line)) => self.error_at(*line, msg),
            None => CliError::Validation(format!("{}: {msg}", self.origin)),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, _)) => value
                .parse()
                .map(Some)
                .map_err(|_| self.error_for(key, format!("`{key}`: cannot parse `{value}`"))),
        }
    }

    fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, _)) => value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| self.error_for(key, format!("`{key}`: cannot parse `{s}`")))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Resolves defaults and checks every invariant before any computation.
    pub fn resolve(&self) -> Result<SweepConfig, CliError> {
        let mode = self.get::<ChannelMode>("channel")?.unwrap_or(ChannelMode::Diffused);
        let mut cfg = SweepConfig::reference(mode);
        cfg.snr_grid_db = match mode {
            ChannelMode::Diffused => DIFFUSED_SNR_GRID.to_vec(),
            ChannelMode::LosAwgn => LOS_SNR_GRID.to_vec(),
        };

        let ofdm = &mut cfg.ofdm;
        if let Some(n) = self.get("fft_size")? {
            ofdm.n = n;
        }
        if let Some(m) = self.get("constellation")? {
            ofdm.m = m;
        }
        if let Some(cp) = self.get("cyclic_prefix")? {
            ofdm.cp_len = cp;
        }
        if let Some(ts) = self.get::<f64>("sample_time_ns")? {
            ofdm.sample_time = ts / 1e9;
        }
        let mut channel = ChannelParams {
            tap_spacing: ofdm.sample_time,
            ..ChannelParams::default()
        };
        if let Some(v) = self.get::<f64>("tap_spacing_ns")? {
            channel.tap_spacing = v / 1e9;
        }
        if let Some(v) = self.get::<f64>("rms_delay_spread_ns")? {
            channel.rms_delay_spread = v / 1e9;
        }
        if let Some(v) = self.get("channel_taps")? {
            channel.taps = v;
        }
        cfg.channel = channel;
        if let Some(s) = self.get_list::<Scheme>("schemes")? {
            cfg.schemes = s;
        }
        if let Some(g) = self.get_list::<f64>("snr_db")? {
            cfg.snr_grid_db = g;
        }
        if let Some(v) = self.get("min_bit_errors")? {
            cfg.min_bit_errors = v;
        }
        if let Some(v) = self.get("max_bits")? {
            cfg.max_bits = v;
        }
        if let Some(v) = self.get("seed")? {
            cfg.master_seed = v;
        }
        if let Some(v) = self.get("batch_windows")? {
            cfg.batch_windows = v;
        }
        if let Some(v) = self.get("calibration_windows")? {
            cfg.calibration_windows = v;
        }

        self.check(&cfg)?;
        Ok(cfg)
    }

    fn check(&self, cfg: &SweepConfig) -> Result<(), CliError> {
        let o: &OfdmConfig = &cfg.ofdm;
        if o.n < 8 || !o.n.is_power_of_two() {
            return Err(self.error_for("fft_size", format!("fft_size {} is not a power of two >= 8", o.n)));
        }
        if o.cp_len >= o.n {
            return Err(self.error_for(
                "cyclic_prefix",
                format!("cyclic_prefix {} must be shorter than fft_size {}", o.cp_len, o.n),
            ));
        }
        if cfg.channel_mode == ChannelMode::Diffused && o.cp_len + 1 < cfg.channel.taps {
            return Err(self.error_for(
                "cyclic_prefix",
                format!(
                    "cyclic_prefix {} is too short for {} channel taps (needs >= {})",
                    o.cp_len,
                    cfg.channel.taps,
                    cfg.channel.taps - 1
                ),
            ));
        }
        if cfg.snr_grid_db.is_empty() {
            return Err(self.error_for("snr_db", "snr_db grid is empty".into()));
        }
        if cfg.schemes.is_empty() {
            return Err(self.error_for("schemes", "no schemes selected".into()));
        }
        cfg.validate()
            .map_err(|e| CliError::Validation(format!("{}: {e}", self.origin)))
    }
}

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Seconds as a short nanosecond string that parses back to the same value.
fn ns(seconds: f64) -> String {
    let s = format!("{:.9}", seconds * 1e9);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Every key with its resolved value, in `KEYS` order.
pub fn resolved_values(cfg: &SweepConfig) -> Vec<(&'static str, String)> {
    let o = &cfg.ofdm;
    let values = [
        cfg.channel_mode.to_string(),
        o.n.to_string(),
        o.m.to_string(),
        o.cp_len.to_string(),
        ns(o.sample_time),
        ns(cfg.channel.tap_spacing),
        ns(cfg.channel.rms_delay_spread),
        cfg.channel.taps.to_string(),
        list(&cfg.schemes),
        list(&cfg.snr_grid_db),
        cfg.min_bit_errors.to_string(),
        cfg.max_bits.to_string(),
        cfg.master_seed.to_string(),
        cfg.batch_windows.to_string(),
        cfg.calibration_windows.to_string(),
    ];
    KEYS.iter().map(|(k, _)| *k).zip(values).collect()
}

/// Writes a fully resolved configuration back in the same format.
pub fn render(cfg: &SweepConfig) -> String {
    let mut s = String::from("# resolved uofdm run configuration\n");
    for ((_, help), (key, value)) in KEYS.iter().zip(resolved_values(cfg)) {
        let _ = writeln!(s, "# {help}\n{key} = {value}");
    }
    s
}
