//! On-disk coefficient format.
//!
//! Little-endian: magic `PPFC`, `u32` version (1), `u32` channels, `u32` taps,
//! `f64` beta, then `channels * taps` `f32` values in storage order.

use std::io::{Read, Write};

use crate::coeffgen::FilterCoefficients;
use crate::error::{PpfError, Result};

pub const MAGIC: [u8; 4] = *b"PPFC";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 4 + 4 + 4 + 4 + 8;

/// Coefficients as loaded from disk, with the window parameter they were
/// designed with.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFile {
    pub beta: f64,
    pub coefficients: FilterCoefficients,
}

pub fn write_coefficients<W: Write>(
    coeffs: &FilterCoefficients,
    beta: f64,
    mut out: W,
) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_BYTES + coeffs.len() * 4);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(coeffs.n_channels() as u32).to_le_bytes());
    buf.extend_from_slice(&(coeffs.n_taps() as u32).to_le_bytes());
    buf.extend_from_slice(&beta.to_le_bytes());
    for &v in coeffs.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// One coefficient per line, in storage order, at `f32` precision.
pub fn write_coefficients_text<W: Write>(coeffs: &FilterCoefficients, mut out: W) -> Result<()> {
    let mut text = String::with_capacity(coeffs.len() * 16);
    for &v in coeffs.values() {
        text.push_str(&format!("{}\n", v as f32));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_coefficients<R: Read>(mut input: R) -> Result<CoefficientFile> {
    let mut header = [0u8; HEADER_BYTES];
    input
        .read_exact(&mut header)
        .map_err(|_| PpfError::Format("file shorter than the header".into()))?;
    if header[..4] != MAGIC {
        return Err(PpfError::Format("bad magic, expected \"PPFC\"".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(PpfError::Format(format!("unsupported version {version}")));
    }
    let n_channels = word(8) as usize;
    let n_taps = word(12) as usize;
    let beta = f64::from_le_bytes(header[16..24].try_into().unwrap());
    if n_channels == 0 || n_taps == 0 {
        return Err(PpfError::Format("zero channel or tap count".into()));
    }

    let count = n_channels
        .checked_mul(n_taps)
        .ok_or_else(|| PpfError::Format("coefficient count overflows".into()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != count * 4 {
        return Err(PpfError::Format(format!(
            "expected {} coefficient bytes, found {}",
            count * 4,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let coefficients = FilterCoefficients::from_values(n_channels, n_taps, values)
        .map_err(|e| PpfError::Format(e.to_string()))?;
    Ok(CoefficientFile { beta, coefficients })
}
