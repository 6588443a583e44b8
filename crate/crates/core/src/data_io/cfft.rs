//! `CFFT` sample files: a 16-byte little-endian header followed by raw
//! little-endian samples.
//!
//! ```text
//! offset  size  field
//!      0     4  magic  b"CFFT"
//!      4     2  version (u16, currently 1)
//!      6     2  precision (u16: 32 = f32 samples, 64 = f64 samples)
//!      8     8  sample count (u64)
//!     16     -  samples
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::Precision;

const MAGIC: &[u8; 4] = b"CFFT";
const HEADER_LEN: usize = 16;
pub const CFFT_VERSION: u16 = 1;

fn precision_code(p: Precision) -> u16 {
    match p {
        Precision::Single => 32,
        Precision::Double => 64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub precision: Precision,
    /// Samples widened to `f64`; exact for both stored precisions.
    pub samples: Vec<f64>,
}

/// Serializes `samples`, narrowing to `f32` for single precision.
pub fn encode_samples(samples: &[f64], precision: Precision) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + samples.len() * precision.real_bytes());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CFFT_VERSION.to_le_bytes());
    out.extend_from_slice(&precision_code(precision).to_le_bytes());
    out.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    match precision {
        Precision::Single => samples
            .iter()
            .for_each(|&s| out.extend_from_slice(&(s as f32).to_le_bytes())),
        Precision::Double => samples
            .iter()
            .for_each(|&s| out.extend_from_slice(&s.to_le_bytes())),
    }
    out
}

pub fn decode_samples(bytes: &[u8]) -> Result<SampleFile> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CFFT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let precision = match u16::from_le_bytes([bytes[6], bytes[7]]) {
        32 => Precision::Single,
        64 => Precision::Double,
        other => return Err(Error::UnknownPrecision(other)),
    };
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let payload = &bytes[HEADER_LEN..];
    let expected = count.checked_mul(precision.real_bytes() as u64);
    if expected != Some(payload.len() as u64) {
        return Err(Error::Truncated {
            expected: expected.unwrap_or(u64::MAX),
            actual: payload.len() as u64,
        });
    }
    let samples = match precision {
        Precision::Single => payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4-byte chunk")) as f64)
            .collect(),
        Precision::Double => payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect(),
    };
    Ok(SampleFile { precision, samples })
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[f64], precision: Precision) -> Result<()> {
    fs::write(path, encode_samples(samples, precision))?;
    Ok(())
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<SampleFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    decode_samples(&bytes)
}
