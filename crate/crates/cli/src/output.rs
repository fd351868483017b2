//! Result files: `ber.csv`, `manifest.json` and the plotting script.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use uofdm::sim::{SweepConfig, SweepResult};

use crate::config::resolved_values;

pub const CSV_HEADER: &str = "scheme,channel_mode,snr_db,bits,errors,ber,stderr";

pub fn ber_csv(result: &SweepResult) -> String {
    let mode = result.config.channel_mode;
    let mut s = format!("{CSV_HEADER}\n");
    for curve in &result.curves {
        for p in &curve.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.6e},{:.6e}",
                curve.scheme.name(),
                mode.name(),
                p.snr_db,
                p.bits,
                p.bit_errors,
                p.ber,
                p.stderr
            );
        }
    }
    s
}

pub fn manifest(config_path: Option<&Path>, cfg: &SweepConfig, files: &[&str]) -> String {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let resolved: Map<String, Value> = resolved_values(cfg)
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    let doc = json!({
        "tool": "uofdm",
        "version": env!("CARGO_PKG_VERSION"),
        "config_path": config_path.map(|p| p.display().to_string()),
        "seed": cfg.master_seed,
        "timestamp_unix": timestamp,
        "resolved_config": resolved,
        "files": files,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scheme: String,
    pub channel_mode: String,
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub stderr: f64,
}

pub fn parse_ber_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(format!("line 1: expected header `{CSV_HEADER}`, found `{}`", h.trim())),
        None => return Err("empty file, expected a header line".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| format!("line {}: {m}", i + 1);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        fn num<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, String> {
            field.trim().parse().map_err(|_| format!("bad {name} `{field}`"))
        }
        rows.push(CsvRow {
            scheme: f[0].trim().to_string(),
            channel_mode: f[1].trim().to_string(),
            snr_db: num(f[2], "snr_db").map_err(err)?,
            bits: num(f[3], "bits").map_err(err)?,
            errors: num(f[4], "errors").map_err(err)?,
            ber: num(f[5], "ber").map_err(err)?,
            stderr: num(f[6], "stderr").map_err(err)?,
        });
    }
    Ok(rows)
}

fn py_float(x: f64) -> String {
    if x.is_nan() {
        "float(\"nan\")".into()
    } else if x.is_infinite() {
        if x > 0.0 { "float(\"inf\")" } else { "float(\"-inf\")" }.into()
    } else {
        format!("{x:?}")
    }
}

fn py_str(s: &str) -> String {
    format!("{:?}", s)
}

/// Self-contained matplotlib script; writes `ber.png` next to where it runs.
pub fn plot_script(rows: &[CsvRow], source: &str) -> String {
    let mut groups: Vec<((String, String), Vec<&CsvRow>)> = Vec::new();
    for r in rows {
        let key = (r.scheme.clone(), r.channel_mode.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }

    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    let _ = writeln!(s, "# BER curves from {source}, generated by uofdm plot-script.");
    if rows.is_empty() {
        s.push_str("# WARNING: the CSV had no data rows; the plot will be empty.\n");
    }
    s.push_str("import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("# label -> (snr_db, ber, stderr)\nCURVES = {\n");
    for ((scheme, mode), pts) in &groups {
        let col = |f: fn(&CsvRow) -> f64| pts.iter().map(|r| py_float(f(r))).collect::<Vec<_>>().join(", ");
        let _ = writeln!(
            s,
            "    {}: (\n        [{}],\n        [{}],\n        [{}],\n    ),",
            py_str(&format!("{scheme} ({mode})")),
            col(|r| r.snr_db),
            col(|r| r.ber),
            col(|r| r.stderr)
        );
    }
    s.push_str("}\n\n");
    s.push_str(
        r#"fig, ax = plt.subplots(figsize=(6, 4.5))
for label, (snr, ber, err) in CURVES.items():
    pts = [(x, y, e) for x, y, e in zip(snr, ber, err) if y > 0 and x != float("inf")]
    if not pts:
        continue
    x, y, e = zip(*pts)
    ax.errorbar(x, y, yerr=e, marker="o", capsize=3, label=label)
ax.set_yscale("log")
ax.set_xlabel("Electrical SNR (dB)")
ax.set_ylabel("BER")
ax.grid(True, which="both", alpha=0.3)
if CURVES:
    ax.legend()
fig.tight_layout()
fig.savefig("ber.png", dpi=150)
print("wrote ber.png")
"#,
    );
    s
}
