//! File formats: sampled grids as flat binary plus JSON header (or CSV
//! for small grids), profiles as two-column CSV, sweeps as CSV rows.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeForm};
use crate::profile::RadialProfile;
use crate::rearrange::SampledFunction;

#[derive(Debug, Serialize, Deserialize)]
struct GridHeader {
    dim: usize,
    side: usize,
    cell_side: f64,
}

/// Write a grid as `<base>.hdr` (JSON) plus `<base>.bin` (little-endian
/// doubles, row-major).
pub fn write_sampled_binary(f: &SampledFunction, base: &Path) -> Result<()> {
    let header = GridHeader {
        dim: f.dim(),
        side: f.side(),
        cell_side: f.cell_side(),
    };
    let hdr = serde_json::to_string_pretty(&header).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(base.with_extension("hdr"), hdr)?;
    let mut w = BufWriter::new(fs::File::create(base.with_extension("bin"))?);
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sampled_binary(base: &Path) -> Result<SampledFunction> {
    let hdr = fs::read_to_string(base.with_extension("hdr"))?;
    let header: GridHeader =
        serde_json::from_str(&hdr).map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = fs::read(base.with_extension("bin"))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse("binary payload is not a whole number of doubles".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SampledFunction::new(header.dim, header.side, header.cell_side, values)
}

/// CSV form for small grids: a comment header row, then one value per line.
pub fn write_sampled_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# dim={} side={} cell_side={}", f.dim(), f.side(), f.cell_side())?;
    for v in f.values() {
        writeln!(w, "{v:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sampled_csv(path: &Path) -> Result<SampledFunction> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptyGrid)?;
    let mut dim = None;
    let mut side = None;
    let mut cell = None;
    for token in header.trim_start_matches('#').split_whitespace() {
        if let Some((key, val)) = token.split_once('=') {
            match key {
                "dim" => dim = val.parse().ok(),
                "side" => side = val.parse().ok(),
                "cell_side" => cell = val.parse().ok(),
                _ => {}
            }
        }
    }
    let (dim, side, cell) = match (dim, side, cell) {
        (Some(d), Some(s), Some(c)) => (d, s, c),
        _ => return Err(Error::Parse("grid CSV header must carry dim, side, cell_side".into())),
    };
    let values: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
        .collect::<Result<_>>()?;
    SampledFunction::new(dim, side, cell, values)
}

fn gauge_label(g: &Gauge) -> String {
    match g.form() {
        GaugeForm::PNorm { p } => {
            if p.is_infinite() {
                format!("pnorm p=inf n={}", g.dim())
            } else {
                format!("pnorm p={} n={}", p, g.dim())
            }
        }
        GaugeForm::Ellipsoid { .. } => format!("ellipsoid n={}", g.dim()),
        GaugeForm::Generic { .. } => format!("generic n={}", g.dim()),
    }
}

/// Two-column CSV (r, u(r)) with a header naming the gauge.
pub fn write_profile_csv(u: &RadialProfile, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# gauge: {}", gauge_label(u.gauge()))?;
    writeln!(w, "r,u")?;
    for (r, v) in u.radii().iter().zip(u.values()) {
        writeln!(w, "{r:.17e},{v:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a profile CSV; the caller supplies the gauge the profile is
/// radial with respect to (the header label is informational).
pub fn read_profile_csv(path: &Path, gauge: Gauge) -> Result<RadialProfile> {
    let text = fs::read_to_string(path)?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('r') {
            continue;
        }
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad profile row: {t}")))?;
        radii.push(a.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        values.push(b.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
    }
    RadialProfile::from_nodes(radii, values, gauge)
}

/// One evaluated point of a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub labels: Vec<(String, f64)>,
    pub value: f64,
    pub log_value: f64,
    pub saturated: bool,
    pub error_estimate: f64,
}

/// Emit sweep rows as CSV: parameter columns first, then the value
/// columns. All rows must carry the same parameter names in order.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    if let Some(first) = rows.first() {
        let mut header: Vec<String> = first.labels.iter().map(|(k, _)| k.clone()).collect();
        header.extend(
            ["value", "log_value", "saturated", "error_estimate"]
                .iter()
                .map(|s| s.to_string()),
        );
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            if row.labels.len() != first.labels.len()
                || row.labels.iter().zip(&first.labels).any(|(a, b)| a.0 != b.0)
            {
                return Err(Error::GridMismatch("sweep rows carry differing labels".into()));
            }
            let mut cells: Vec<String> = row.labels.iter().map(|(_, v)| format!("{v:.12e}")).collect();
            cells.push(format!("{:.12e}", row.value));
            cells.push(format!("{:.12e}", row.log_value));
            cells.push(format!("{}", row.saturated));
            cells.push(format!("{:.3e}", row.error_estimate));
            writeln!(w, "{}", cells.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}
