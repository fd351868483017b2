//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if any failed.
//!
//! cargo test -p uofdm-core --release --test acceptance -- --nocapture

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use uofdm::channel::{apply_channel, channel_frequency_response, random_diffuse_ir, ImpulseResponse, NoiseSpec};
use uofdm::dsp::{extract_data, fft, hermitian_frame, ifft, Constellation, Fft, TimeFrame};
use uofdm::modem::{complexity_report, Modem, OfdmConfig, Scheme};
use uofdm::sim::{analytic_qpsk_ber, db_to_linear, run_ber_sweep, spectral_efficiency, ChannelMode, SweepConfig};
use uofdm::ComplexSample as C;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn equivalence(mode: ChannelMode, grid: &[f64]) -> Outcome {
    let mut cfg = SweepConfig::reference(mode);
    cfg.snr_grid_db = grid.to_vec();
    cfg.min_bit_errors = 400;
    cfg.max_bits = 200_000_000;
    cfg.master_seed = 2024;
    let result = run_ber_sweep(&cfg).map_err(|e| e.to_string())?;
    let aco = result.curve(Scheme::Aco).ok_or("missing ACO curve")?;
    let flip = result.curve(Scheme::Flip).ok_or("missing Flip curve")?;

    let mut worst_z: f64 = 0.0;
    let mut fewest = u64::MAX;
    let mut failures = Vec::new();
    for (a, f) in aco.points.iter().zip(&flip.points) {
        let se = (a.stderr.powi(2) + f.stderr.powi(2)).sqrt();
        let z = (a.ber - f.ber).abs() / se;
        println!(
            "    {mode:<9} {:>5} dB  ACO {:.3e} ± {:.1e} ({:>5} err)  Flip {:.3e} ± {:.1e} ({:>5} err)  z = {z:.2}",
            a.snr_db, a.ber, a.stderr, a.bit_errors, f.ber, f.stderr, f.bit_errors
        );
        worst_z = worst_z.max(z);
        fewest = fewest.min(a.bit_errors).min(f.bit_errors);
        if z.is_nan() || z > 3.0 {
            failures.push(format!("{} dB: z = {z:.2}", a.snr_db));
        }
    }
    if fewest < 300 {
        failures.push(format!("only {fewest} bit errors at some point"));
    }
    let hi = aco.points.first().map_or(0.0, |p| p.ber);
    let lo = aco.points.last().map_or(1.0, |p| p.ber);
    if !(hi > 2e-2 && lo < 5e-4) {
        failures.push(format!("grid spans BER {hi:.1e}..{lo:.1e}, not about 1e-1..1e-4"));
    }
    let detail = format!(
        "{mode}: {} points, max z = {worst_z:.2}, min errors = {fewest}, BER {hi:.1e}..{lo:.1e}",
        grid.len()
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn c1_ber_equivalence() -> Outcome {
    let diffused = equivalence(ChannelMode::Diffused, &[8.0, 14.0, 20.0, 26.0, 32.0, 40.0]);
    let los = equivalence(ChannelMode::LosAwgn, &[2.0, 4.0, 6.0, 8.0, 10.0, 11.5]);
    match (diffused, los) {
        (Ok(d), Ok(l)) => Ok(format!("{d} | {l}")),
        (d, l) => Err(format!("{} | {}", d.unwrap_or_else(|e| e), l.unwrap_or_else(|e| e))),
    }
}

/// Plain bipolar OFDM over AWGN: Hermitian frame, real IFFT, noise, FFT, hard decisions.
fn c2_reference_chain() -> Outcome {
    let n = 256;
    let plan = Fft::new(n).map_err(|e| e.to_string())?;
    let qpsk = Constellation::qpsk();
    let bits_per_frame = 2 * (n / 2 - 1);
    let frames = 12_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for ebn0_db in [0.0, 2.0, 4.0, 6.0, 7.0, 8.0] {
        let ebn0 = db_to_linear(ebn0_db);
        // Unit-energy symbols give Eb = 1/2; per-bin noise variance is N times the sample variance.
        let sigma = (1.0 / (2.0 * n as f64 * ebn0)).sqrt();
        let mut errors = 0u64;
        for _ in 0..frames {
            let bits = random_bits(&mut rng, bits_per_frame);
            let data = qpsk.modulate(&bits).map_err(|e| e.to_string())?;
            let x = hermitian_frame(&data, n)
                .and_then(|s| s.to_time(&plan))
                .map_err(|e| e.to_string())?;
            let y = TimeFrame {
                samples: x
                    .samples
                    .iter()
                    .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            };
            let spectrum = y.to_spectrum(&plan).map_err(|e| e.to_string())?;
            let decided = qpsk.demodulate(&extract_data(&spectrum));
            errors += decided.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
        }
        let total = (frames * bits_per_frame) as f64;
        let ber = errors as f64 / total;
        let expected = analytic_qpsk_ber(ebn0);
        let se = (expected * (1.0 - expected) / total).sqrt();
        let z = (ber - expected).abs() / se;
        println!("    Eb/N0 {ebn0_db:>4} dB  BER {ber:.4e}  analytic {expected:.4e}  z = {z:.2}");
        if expected >= 1e-4 {
            worst_z = worst_z.max(z);
            if z > 3.0 {
                failures.push(format!("{ebn0_db} dB: z = {z:.2}"));
            }
        }
    }
    let detail = format!("6 points, {frames} frames each, max z = {worst_z:.2}");
    check(failures.is_empty(), format!("{detail} {}", failures.join("; ")))
}

fn c3_aco_halving() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [8, 64, 256] {
        let cfg = OfdmConfig {
            n,
            cp_len: 4,
            ..OfdmConfig::reference_diffused(Scheme::Aco)
        };
        let modem = Modem::new(cfg).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 + 1000);
        for _ in 0..100 {
            let bits = random_bits(&mut rng, cfg.bits_per_window());
            let symbols = modem.aco_unclipped(&bits, &mut modem.new_counter()).map_err(|e| e.to_string())?;
            for sym in &symbols {
                let clipped = TimeFrame {
                    samples: sym.samples.iter().map(|v| v.max(0.0)).collect(),
                };
                let full = sym.to_spectrum(modem.plan()).map_err(|e| e.to_string())?;
                let half = clipped.to_spectrum(modem.plan()).map_err(|e| e.to_string())?;
                let (mut err, mut scale) = (0.0f64, 0.0f64);
                for bin in (1..n).step_by(2) {
                    err = err.max((half.bins[bin] - 0.5 * full.bins[bin]).norm());
                    scale = scale.max((0.5 * full.bins[bin]).norm());
                }
                worst = worst.max(err / scale);
            }
        }
    }
    check(worst <= 1e-10, format!("N in {{8, 64, 256}} x 100 frames, max relative error {worst:.2e}"))
}

fn c4_noiseless() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut report = Vec::new();
    let mut ok = true;
    for scheme in Scheme::ALL {
        let cfg = OfdmConfig::reference_diffused(scheme);
        let modem = Modem::new(cfg).map_err(|e| e.to_string())?;
        let windows = 100_000usize.div_ceil(cfg.bits_per_window());
        for dispersive in [false, true] {
            let mut errors = 0usize;
            for _ in 0..windows {
                let h = if dispersive {
                    random_diffuse_ir(8e-9, cfg.sample_time, 64, &mut rng).map_err(|e| e.to_string())?
                } else {
                    ImpulseResponse::identity(cfg.sample_time)
                };
                let hf = channel_frequency_response(&h, cfg.n).map_err(|e| e.to_string())?;
                let bits = random_bits(&mut rng, cfg.bits_per_window());
                let tx = modem.transmit(&bits, &mut modem.new_counter()).map_err(|e| e.to_string())?;
                let y = apply_channel(&tx.samples, cfg.sample_time, &h, &NoiseSpec::noiseless(), &mut rng)
                    .map_err(|e| e.to_string())?;
                let rx = modem.receive(&y, &hf, &mut modem.new_counter()).map_err(|e| e.to_string())?;
                errors += rx.iter().zip(&bits).filter(|(a, b)| a != b).count();
            }
            ok &= errors == 0;
            let channel = if dispersive { "64-tap diffuse" } else { "identity" };
            report.push(format!("{scheme}/{channel}: {errors} errors in {} bits", windows * cfg.bits_per_window()));
        }
    }
    check(ok, report.join(", "))
}

fn c5_noise_doubling() -> Outcome {
    let cfg = OfdmConfig::reference_diffused(Scheme::Flip);
    let modem = Modem::new(cfg).map_err(|e| e.to_string())?;
    let id = ImpulseResponse::identity(cfg.sample_time);
    let noise = NoiseSpec::new(1e-3).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let zero = vec![0.0; cfg.window_len()];
    let (sub, n, cp) = (cfg.subframe_len(), cfg.n, cfg.cp_len);
    let (mut single, mut combined, mut count) = (0.0, 0.0, 0usize);
    for _ in 0..10_000 {
        let y = apply_channel(&zero, cfg.sample_time, &id, &noise, &mut rng).map_err(|e| e.to_string())?;
        let first = TimeFrame {
            samples: y[cp..sub].to_vec(),
        };
        let s1 = first.to_spectrum(modem.plan()).map_err(|e| e.to_string())?;
        let s = modem.flip_spectrum(&y, &mut modem.new_counter()).map_err(|e| e.to_string())?;
        for bin in 1..n / 2 {
            single += s1.bins[bin].norm_sqr();
            combined += s.bins[bin].norm_sqr();
            count += 1;
        }
    }
    let ratio = combined / single;
    check(
        (ratio / 2.0 - 1.0).abs() <= 0.05,
        format!(
            "10000 frames, single {:.4e}, recombined {:.4e}, ratio {ratio:.4}",
            single / count as f64,
            combined / count as f64
        ),
    )
}

fn c6_complexity() -> Outcome {
    let report = complexity_report(&OfdmConfig::reference_diffused(Scheme::Flip), 100).map_err(|e| e.to_string())?;
    let ratio = report.rx_ratio();
    let shown = report.to_string();
    let savings_line = shown.lines().find(|l| l.contains("savings")).unwrap_or("").trim().to_string();
    check(
        ratio == Some(2.0)
            && report.rx_per_window(Scheme::Aco) == 2.0
            && report.rx_per_window(Scheme::Flip) == 1.0
            && shown.contains("50.0%"),
        format!("RX transforms per window ACO {} : Flip {}; {savings_line}", report.rx_per_window(Scheme::Aco), report.rx_per_window(Scheme::Flip)),
    )
}

fn c7_spectral_efficiency() -> Outcome {
    let mut ok = true;
    for m in [4usize, 16, 64, 256] {
        let a = spectral_efficiency(Scheme::Aco, m).map_err(|e| e.to_string())?;
        let f = spectral_efficiency(Scheme::Flip, m).map_err(|e| e.to_string())?;
        ok &= a == f && a == (m as f64).log2() / 4.0;
    }
    for n in [8usize, 64, 256, 1024] {
        for m in [4usize, 16] {
            let base = OfdmConfig {
                n,
                m,
                cp_len: 4,
                ..OfdmConfig::reference_diffused(Scheme::Aco)
            };
            let aco = base.bits_per_window();
            let flip = base.with_scheme(Scheme::Flip).bits_per_window();
            ok &= aco == flip && aco == (n / 2 - 1) * (m as f64).log2() as usize;
            ok &= base.window_len() == base.with_scheme(Scheme::Flip).window_len();
        }
    }
    let cfg = OfdmConfig::reference_diffused(Scheme::Aco);
    check(
        ok,
        format!(
            "eta = log2(M)/4 for both (QPSK: {}), {} bits per {}-sample window for both",
            spectral_efficiency(Scheme::Aco, 4).unwrap_or(f64::NAN),
            cfg.bits_per_window(),
            cfg.window_len()
        ),
    )
}

fn dft(x: &[C]) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * C::from_polar(1.0, -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn c8_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rand_c = |len: usize, rng: &mut ChaCha8Rng| -> Vec<C> {
        (0..len).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    };

    let mut fft_err: f64 = 0.0;
    for n in [2usize, 4, 8, 16, 32, 64] {
        for _ in 0..20 {
            let x = rand_c(n, &mut rng);
            let got = fft(&x, n).map_err(|e| e.to_string())?;
            let want = dft(&x);
            let back = ifft(&got, n).map_err(|e| e.to_string())?;
            for k in 0..n {
                fft_err = fft_err.max((got[k] - want[k]).norm()).max((back[k] - x[k]).norm());
            }
        }
    }

    let mut conv_err: f64 = 0.0;
    for _ in 0..200 {
        let len = rng.random_range(1..300);
        let taps_len = rng.random_range(1..80);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let taps: Vec<f64> = (0..taps_len).map(|_| rng.random_range(0.0..1.0)).collect();
        let h = ImpulseResponse::from_taps(taps.clone(), 1.0).map_err(|e| e.to_string())?;
        let got = apply_channel(&x, 1.0, &h, &NoiseSpec::noiseless(), &mut rng).map_err(|e| e.to_string())?;
        for k in 0..len {
            let mut want = 0.0;
            for (m, t) in taps.iter().enumerate() {
                if m <= k {
                    want += t * x[k - m];
                }
            }
            conv_err = conv_err.max((got[k] - want).abs());
        }
    }

    let mut parseval_err: f64 = 0.0;
    for n in [8usize, 64, 256, 1024, 4096] {
        let x = rand_c(n, &mut rng);
        let spectrum = fft(&x, n).map_err(|e| e.to_string())?;
        let time: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let freq: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        parseval_err = parseval_err.max((time - freq).abs() / time);
    }

    let mut energy_err: f64 = 0.0;
    for d_ns in [2.0, 8.0, 12.0] {
        for _ in 0..100 {
            let h = random_diffuse_ir(d_ns * 1e-9, 0.75e-9, 64, &mut rng).map_err(|e| e.to_string())?;
            energy_err = energy_err.max((h.energy() - 1.0).abs());
        }
    }

    check(
        fft_err <= 1e-12 && conv_err <= 1e-12 && parseval_err <= 1e-10 && energy_err <= 1e-12,
        format!(
            "FFT vs DFT {fft_err:.1e}, convolution {conv_err:.1e}, Parseval {parseval_err:.1e}, channel energy {energy_err:.1e}"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 BER equivalence ACO vs Flip", c1_ber_equivalence),
        ("2 bipolar reference chain vs analytic QPSK", c2_reference_chain),
        ("3 ACO clipping halves odd subcarriers", c3_aco_halving),
        ("4 noiseless reconstruction", c4_noiseless),
        ("5 Flip recombination doubles noise", c5_noise_doubling),
        ("6 RX transform ratio and savings", c6_complexity),
        ("7 equal spectral efficiency", c7_spectral_efficiency),
        ("8 numerical substrate", c8_numerics),
    ];
    let mut lines = Vec::new();
    for (name, run) in criteria {
        println!("criterion {name}");
        let outcome = run();
        let line = match &outcome {
            Ok(d) => format!("PASS criterion {name}: {d}"),
            Err(d) => format!("FAIL criterion {name}: {d}"),
        };
        println!("{line}");
        lines.push((outcome.is_ok(), line));
    }
    println!("\nsummary");
    for (_, line) in &lines {
        println!("{line}");
    }
    let failed = lines.iter().filter(|(ok, _)| !ok).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
