//! Diagnostics CSV and binary checkpoints.
//!
//! Checkpoint layout (all little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 5 | magic `IVBK1` |
//! | 1 | format version `0x01` |
//! | 4 | `n` as `u32` |
//! | 8 | time as `f64` |
//! | 12 · 8n³ | `u₁ u₂ u₃ F₁₁ F₁₂ F₁₃ F₂₁ … F₃₃` as `f64`, `x` fastest |
//!
//! `F_kj` is component `j` of column `k`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{DeformationGradient, State};
use crate::monitor::DiagnosticsRecord;
use crate::spectral::{Grid, ScalarField, VectorField};

pub const CSV_HEADER: &str = "time,energy,sup_div_u,sup_div_f,sup_w,sup_r1,sup_r2,sup_r3,l2_w,l2_r1,l2_r2,l2_r3,h3_u,h3_f1,h3_f2,h3_f3,bkm_m,gronwall_y,kato_lhs,kato_bracket,det_min,det_max,tail_energy_fraction";

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"IVBK1";
pub const CHECKPOINT_VERSION: u8 = 1;
const HEADER_LEN: usize = 5 + 1 + 4 + 8;

/// Byte length of a checkpoint for `n` points per dimension.
pub fn checkpoint_len(n: usize) -> usize {
    HEADER_LEN + 12 * 8 * n.pow(3)
}

fn format_row(r: &DiagnosticsRecord) -> String {
    r.csv_values()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the header and one row per record; values carry 17 significant
/// digits.
pub fn write_diagnostics(path: impl AsRef<Path>, records: &[DiagnosticsRecord]) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    if let Some(pair) = records.windows(2).find(|p| p[1].time <= p[0].time) {
        return Err(Error::InvalidArgument(format!(
            "record times must increase ({} then {})",
            pair[0].time, pair[1].time
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in records {
            writeln!(out, "{}", format_row(r))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Appends rows to an existing diagnostics file.
pub(crate) fn append_diagnostics(path: &Path, records: &[DiagnosticsRecord], with_header: bool) -> Result<()> {
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        if with_header {
            writeln!(out, "{CSV_HEADER}")?;
        }
        for r in records {
            writeln!(out, "{}", format_row(r))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn read_diagnostics(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::MalformedCsv(format!(
                "unexpected header {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let values: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedCsv(format!("row {}: {e}", i + 1)))?;
            let values: [f64; 23] = values
                .try_into()
                .map_err(|v: Vec<f64>| Error::MalformedCsv(format!("row {}: {} columns", i + 1, v.len())))?;
            Ok(DiagnosticsRecord::from_csv_values(&values))
        })
        .collect()
}

fn state_fields(state: &State) -> impl Iterator<Item = &ScalarField> {
    state
        .u
        .components()
        .iter()
        .chain(state.f.columns().iter().flat_map(|c| c.components().iter()))
}

/// Appends the checkpoint encoding of `state` to `bytes`.
pub fn encode_checkpoint(state: &State, bytes: &mut Vec<u8>) {
    let n = state.grid().n();
    bytes.reserve(checkpoint_len(n));
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.push(CHECKPOINT_VERSION);
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&state.time.to_le_bytes());
    for field in state_fields(state) {
        for v in field.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn write_checkpoint(state: &State, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    encode_checkpoint(state, &mut bytes);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<State> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<State> {
    if bytes.len() < 5 {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if &bytes[..5] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic(bytes[..5].to_vec()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[5] != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: bytes[5],
            expected: CHECKPOINT_VERSION,
        });
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    let time = f64::from_le_bytes(bytes[10..18].try_into().expect("8 bytes"));
    let grid = Grid::new(n)?;
    let expected = checkpoint_len(n);
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::InvalidArgument(format!(
            "checkpoint has {} trailing bytes",
            bytes.len() - expected
        )));
    }
    let len = grid.len();
    let mut fields = bytes[HEADER_LEN..].chunks_exact(8 * len).map(|chunk| {
        let values = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        ScalarField::from_values(&grid, values).expect("length matches grid")
    });
    let mut vector = || -> Result<VectorField> {
        let a = fields.next().expect("12 fields");
        let b = fields.next().expect("12 fields");
        let c = fields.next().expect("12 fields");
        VectorField::new([a, b, c])
    };
    let u = vector()?;
    let f = DeformationGradient::new([vector()?, vector()?, vector()?])?;
    let state = State::new(time, u, f)?;
    if let Some(name) = state.first_non_finite() {
        return Err(Error::NonFinite(format!("checkpoint field {name}")));
    }
    Ok(state)
}
