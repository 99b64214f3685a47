//! On-disk artifact plumbing: JSON read/write, the CSV formats, and the
//! per-run manifest.
//!
//! Every format here is deterministic byte-for-byte given the same data:
//! JSON goes through serde_json (shortest-round-trip floats), CSV floats use
//! Rust's shortest-round-trip `Display`, and nothing embeds timestamps,
//! hostnames, or thread counts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use q3p_core::emulator::{LandscapeScan, SampleHistogram};

/// What a run needs to be replayed: the subcommand, every parameter after
/// defaults were applied, and the file paths it read and wrote. Deliberately
/// free of timestamps and machine details so reruns are byte-identical.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, seed: Option<u64>, parameters: serde_json::Value) -> Self {
        Self {
            tool: "q3p",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Write the manifest itself (recorded as its own last output).
    pub fn write(mut self, path: &Path) -> Result<()> {
        self.outputs.push(path.display().to_string());
        write_json(&self, path)
    }
}

/// Manifest path for a single-output command: `out.json` → `out.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Manifest path for a multi-output command with an `--out-prefix`.
pub fn manifest_path_for_prefix(prefix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.manifest.json"))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {what} from {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} in {}", path.display()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing artifact")?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `bitstring,count` rows, most-sampled first, ties in display order.
pub fn write_histogram_csv(histogram: &SampleHistogram, path: &Path) -> Result<()> {
    let mut text = String::from("bitstring,count\n");
    for (bits, count) in histogram.sorted_entries() {
        let _ = writeln!(text, "{bits},{count}");
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn read_histogram_csv(path: &Path) -> Result<Vec<(String, u64)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading histogram from {}", path.display()))?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "bitstring,count" {
                bail!(
                    "{}:1: expected header 'bitstring,count', got '{line}'",
                    path.display()
                );
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (bits, count) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected 'bitstring,count'", path.display(), lineno + 1))?;
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            bail!("{}:{}: '{bits}' is not a bitstring", path.display(), lineno + 1);
        }
        let count: u64 = count
            .trim()
            .parse()
            .with_context(|| format!("{}:{}: bad count '{count}'", path.display(), lineno + 1))?;
        entries.push((bits.to_string(), count));
    }
    Ok(entries)
}

/// Two header rows carry the axes, then one matrix row per detuning:
///
/// ```text
/// deltas,<Δ_0>,…,<Δ_{R−1}>
/// durations,<T_0>,…,<T_{C−1}>
/// v[0][0],…,v[0][C−1]
/// ⋮
/// ```
pub fn write_landscape_csv(scan: &LandscapeScan, path: &Path) -> Result<()> {
    let mut text = String::from("deltas");
    for d in &scan.deltas {
        let _ = write!(text, ",{d}");
    }
    text.push_str("\ndurations");
    for t in &scan.durations {
        let _ = write!(text, ",{t}");
    }
    text.push('\n');
    for row in &scan.values {
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            let _ = write!(text, "{v}");
            first = false;
        }
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub struct LandscapeData {
    pub deltas: Vec<f64>,
    pub durations: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn read_landscape_csv(path: &Path) -> Result<LandscapeData> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading landscape from {}", path.display()))?;
    let mut lines = text.lines().enumerate();

    let parse_axis = |expected: &str, entry: Option<(usize, &str)>| -> Result<Vec<f64>> {
        let (lineno, line) =
            entry.with_context(|| format!("{}: missing '{expected}' row", path.display()))?;
        let mut parts = line.split(',');
        let label = parts.next().unwrap_or_default();
        if label != expected {
            bail!(
                "{}:{}: expected '{expected}' row, got '{label}'",
                path.display(),
                lineno + 1
            );
        }
        parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}:{}: bad value '{p}'", path.display(), lineno + 1))
            })
            .collect()
    };

    let deltas = parse_axis("deltas", lines.next())?;
    let durations = parse_axis("durations", lines.next())?;
    let mut values = Vec::with_capacity(deltas.len());
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}:{}: bad value '{p}'", path.display(), lineno + 1))
            })
            .collect::<Result<_>>()?;
        if row.len() != durations.len() {
            bail!(
                "{}:{}: {} values in a {}-column matrix",
                path.display(),
                lineno + 1,
                row.len(),
                durations.len()
            );
        }
        values.push(row);
    }
    if values.len() != deltas.len() {
        bail!(
            "{}: {} matrix rows for {} deltas",
            path.display(),
            values.len(),
            deltas.len()
        );
    }
    Ok(LandscapeData {
        deltas,
        durations,
        values,
    })
}
