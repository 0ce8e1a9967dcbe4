//! Report envelopes, CSV series and binary field snapshots.
//!
//! Reports are JSON documents `{ metadata, report }`. Everything
//! run-dependent but physically irrelevant (timestamps, thread counts,
//! version strings) lives under `metadata`, so two runs with the same
//! configuration and seed produce byte-identical `report` sections and the
//! comparison `report == report` is meaningful at the byte level.

use crate::field::{Field2D, Field3D};
use crate::grid::{SlabGrid, TorusGrid};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Run-dependent bookkeeping excluded from determinism comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub timestamp_unix_ms: u64,
    pub threads: usize,
}

impl Metadata {
    pub fn now(tool: &str, threads: usize) -> Self {
        let timestamp_unix_ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Metadata {
            tool: tool.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_ms,
            threads,
        }
    }
}

/// JSON report wrapper; `report` is the deterministic payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEnvelope<T> {
    pub metadata: Metadata,
    pub report: T,
}

impl<T: Serialize> ReportEnvelope<T> {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// The payload alone, serialized deterministically (this is the byte
    /// string determinism tests compare).
    pub fn report_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec_pretty(&self.report)?)
    }
}

pub fn read_envelope<T: DeserializeOwned>(path: &Path) -> Result<ReportEnvelope<T>> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// CSV writer with locale-independent '.' decimals and 17 significant digits
/// (lossless round-trip of f64).
pub struct CsvWriter {
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter {
            out,
            columns: header.len(),
        })
    }

    pub fn write_row(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.columns {
            return Err(Error::ShapeMismatch(format!(
                "CSV row has {} values for {} columns",
                values.len(),
                self.columns
            )));
        }
        let row: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(self.out, "{}", row.join(","))?;
        Ok(())
    }

    /// Mixed row: leading labels (already formatted) then numeric columns.
    pub fn write_tagged_row(&mut self, tags: &[&str], values: &[f64]) -> Result<()> {
        if tags.len() + values.len() != self.columns {
            return Err(Error::ShapeMismatch(format!(
                "CSV row has {} fields for {} columns",
                tags.len() + values.len(),
                self.columns
            )));
        }
        let mut row: Vec<String> = tags.iter().map(|t| t.to_string()).collect();
        row.extend(values.iter().map(|v| format!("{v:.16e}")));
        writeln!(self.out, "{}", row.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Shape/layout sidecar for a binary snapshot of complex samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSidecar {
    /// `[n, n]` for torus fields, `[nz, n, n]` for slab fields (slowest
    /// dimension first, matching the in-memory layout).
    pub shape: Vec<usize>,
    /// Sample ordering description.
    pub layout: String,
    /// Always little-endian f64 (re, im) pairs.
    pub dtype: String,
    /// L² norm at write time, as a quick integrity check.
    pub l2_norm: f64,
}

fn write_complex_bin(path: &Path, values: &[Complex64]) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    for v in values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_complex_bin(path: &Path, len: usize) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != len * 16 {
        return Err(Error::ShapeMismatch(format!(
            "snapshot {} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            len * 16
        )));
    }
    let mut values = Vec::with_capacity(len);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    Ok(values)
}

fn sidecar_path(bin_path: &Path) -> std::path::PathBuf {
    bin_path.with_extension("json")
}

/// Writes `<stem>.bin` (raw little-endian complex pairs, physical samples)
/// plus `<stem>.json` describing the shape.
pub fn write_field_2d(bin_path: &Path, field: &Field2D) -> Result<()> {
    write_complex_bin(bin_path, field.values())?;
    let sidecar = FieldSidecar {
        shape: vec![field.grid().n(), field.grid().n()],
        layout: "values[j1*n + j2] at x_j = -pi + 2*pi*j/n".into(),
        dtype: "complex128-le".into(),
        l2_norm: field.l2_norm(),
    };
    let file = File::create(sidecar_path(bin_path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_field_2d(bin_path: &Path, grid: TorusGrid) -> Result<Field2D> {
    let values = read_complex_bin(bin_path, grid.len())?;
    Field2D::new(grid, values)
}

pub fn write_field_3d(bin_path: &Path, field: &Field3D) -> Result<()> {
    write_complex_bin(bin_path, field.values())?;
    let g = field.grid();
    let sidecar = FieldSidecar {
        shape: vec![g.nz(), g.nx(), g.nx()],
        layout: "values[jz*n*n + j1*n + j2]; z_j = -pi/2 + (jz+1)*pi/(nz+1)".into(),
        dtype: "complex128-le".into(),
        l2_norm: field.l2_norm(),
    };
    let file = File::create(sidecar_path(bin_path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_field_3d(bin_path: &Path, grid: SlabGrid) -> Result<Field3D> {
    let values = read_complex_bin(bin_path, grid.len())?;
    Field3D::new(grid, values)
}
