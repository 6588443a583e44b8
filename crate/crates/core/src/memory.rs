//! On-chip memory accounting for a chunk configuration.
//!
//! The footprint model holds two in-place work buffers of `2C` complex
//! samples (input chunk and filter chunk; the spectral product and inverse
//! transform reuse them) plus a `C`-entry twiddle table, so a chunk of `C`
//! samples costs `5C` complex words. Accumulators, filter-spectrum caches and
//! the full input live off-chip and are not counted.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sample::Precision;

/// How `K`/`M`/`G` suffixes are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByteUnits {
    /// `1 MB = 10^6` bytes.
    #[default]
    Decimal,
    /// `1 MB = 2^20` bytes.
    Binary,
}

/// Byte capacity standing in for accelerator block RAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoryBudget {
    capacity_bytes: u64,
}

impl MemoryBudget {
    /// 2.8 MB of block RAM on an Alveo U200, read as decimal megabytes.
    pub const ALVEO_U200: MemoryBudget = MemoryBudget {
        capacity_bytes: 2_800_000,
    };

    pub fn new(capacity_bytes: u64) -> Result<Self> {
        if capacity_bytes == 0 {
            return Err(Error::budget("memory budget must be positive"));
        }
        Ok(MemoryBudget { capacity_bytes })
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    /// Parses `"327680"`, `"2.8MB"`, `"512 KiB"` and similar. `KiB`/`MiB`/`GiB`
    /// are always binary; `K`/`KB`/`M`/`MB`/`G`/`GB` follow `units`.
    pub fn parse_with(s: &str, units: ByteUnits) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(s.len());
        let (num, suffix) = s.split_at(split);
        let value: f64 = num
            .parse()
            .map_err(|_| Error::budget(format!("cannot parse budget {s:?}")))?;
        let base = match units {
            ByteUnits::Decimal => 1000f64,
            ByteUnits::Binary => 1024f64,
        };
        let scale = match suffix.trim().to_ascii_lowercase().as_str() {
            "" | "b" => 1.0,
            "k" | "kb" => base,
            "m" | "mb" => base.powi(2),
            "g" | "gb" => base.powi(3),
            "kib" => 1024f64,
            "mib" => 1024f64.powi(2),
            "gib" => 1024f64.powi(3),
            other => return Err(Error::budget(format!("unknown byte suffix {other:?}"))),
        };
        let bytes = (value * scale).floor();
        if !bytes.is_finite() || bytes < 1.0 || bytes > u64::MAX as f64 {
            return Err(Error::budget(format!("budget {s:?} is out of range")));
        }
        Self::new(bytes as u64)
    }
}

impl FromStr for MemoryBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, ByteUnits::Decimal)
    }
}

impl fmt::Display for MemoryBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bytes", self.capacity_bytes)
    }
}

/// Modeled on-chip bytes for one chunk size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryFootprint {
    pub chunk_size: usize,
    pub precision: Precision,
    pub input_buffer_bytes: u64,
    pub filter_buffer_bytes: u64,
    pub twiddle_bytes: u64,
    pub total_bytes: u64,
}

impl MemoryFootprint {
    pub fn fits(&self, budget: &MemoryBudget) -> bool {
        self.total_bytes <= budget.capacity_bytes
    }
}

pub fn footprint(chunk_size: usize, precision: Precision) -> Result<MemoryFootprint> {
    if chunk_size < 2 || !chunk_size.is_power_of_two() {
        return Err(Error::shape(format!(
            "chunk size must be a power of two >= 2, got {chunk_size}"
        )));
    }
    let word = precision.complex_bytes() as u64;
    let c = chunk_size as u64;
    let work = 2 * c * word;
    let twiddle_bytes = c * word;
    Ok(MemoryFootprint {
        chunk_size,
        precision,
        input_buffer_bytes: work,
        filter_buffer_bytes: work,
        twiddle_bytes,
        total_bytes: 2 * work + twiddle_bytes,
    })
}

/// Answer of [`max_chunk_size`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkLimit {
    /// Largest power-of-two chunk whose footprint fits the budget.
    pub unclamped: usize,
    /// `unclamped`, limited by the engine's chunk cap.
    pub chunk_size: usize,
    /// Whether the cap was the binding constraint.
    pub clamped: bool,
}

/// Largest power-of-two chunk size whose footprint fits `budget`, then
/// limited to `cap` when one is given.
pub fn max_chunk_size(
    budget: &MemoryBudget,
    precision: Precision,
    cap: Option<usize>,
) -> Result<ChunkLimit> {
    let smallest = footprint(2, precision)?;
    if !smallest.fits(budget) {
        return Err(Error::budget(format!(
            "{budget} cannot hold the smallest chunk ({} bytes)",
            smallest.total_bytes
        )));
    }
    let mut c = 2usize;
    while let Some(next) = c.checked_mul(2) {
        match footprint(next, precision) {
            Ok(fp) if fp.fits(budget) => c = next,
            _ => break,
        }
    }
    let chunk_size = match cap {
        Some(cap) if cap < c => cap,
        _ => c,
    };
    Ok(ChunkLimit {
        unclamped: c,
        chunk_size,
        clamped: chunk_size < c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MAX_CHUNK_SIZE;

    #[test]
    fn footprint_examples() {
        let fp = footprint(8192, Precision::Single).unwrap();
        assert_eq!(fp.total_bytes, 327_680);
        assert!(fp.fits(&MemoryBudget::ALVEO_U200));
        assert_eq!(
            fp.total_bytes,
            fp.input_buffer_bytes + fp.filter_buffer_bytes + fp.twiddle_bytes
        );

        assert_eq!(footprint(2, Precision::Single).unwrap().total_bytes, 80);
        assert_eq!(footprint(8192, Precision::Double).unwrap().total_bytes, 655_360);
    }

    #[test]
    fn footprint_rejects_invalid_chunks() {
        for c in [0, 1, 3, 3000] {
            assert!(matches!(footprint(c, Precision::Single), Err(Error::Shape(_))));
        }
    }

    #[test]
    fn max_chunk_examples() {
        let mib = MemoryBudget::new(1_048_576).unwrap();
        let lim = max_chunk_size(&mib, Precision::Single, None).unwrap();
        assert_eq!(lim.chunk_size, 16_384);

        let tiny = MemoryBudget::new(80).unwrap();
        let lim = max_chunk_size(&tiny, Precision::Single, Some(MAX_CHUNK_SIZE)).unwrap();
        assert_eq!((lim.unclamped, lim.chunk_size, lim.clamped), (2, 2, false));

        let u200 = MemoryBudget::ALVEO_U200;
        let lim = max_chunk_size(&u200, Precision::Single, Some(MAX_CHUNK_SIZE)).unwrap();
        assert_eq!(lim.unclamped, 65_536);
        assert_eq!(lim.chunk_size, 8_192);
        assert!(lim.clamped);

        let lim = max_chunk_size(&u200, Precision::Double, None).unwrap();
        assert_eq!(lim.unclamped, 32_768);
    }

    #[test]
    fn budget_below_smallest_chunk() {
        let b = MemoryBudget::new(79).unwrap();
        assert!(max_chunk_size(&b, Precision::Single, None)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn parse_budgets() {
        assert_eq!("2.8MB".parse::<MemoryBudget>().unwrap().capacity_bytes(), 2_800_000);
        assert_eq!("80".parse::<MemoryBudget>().unwrap().capacity_bytes(), 80);
        assert_eq!(
            MemoryBudget::parse_with("2.8MB", ByteUnits::Binary)
                .unwrap()
                .capacity_bytes(),
            2_936_012
        );
        assert_eq!("1 MiB".parse::<MemoryBudget>().unwrap().capacity_bytes(), 1_048_576);
        assert_eq!("320k".parse::<MemoryBudget>().unwrap().capacity_bytes(), 320_000);
        assert!("".parse::<MemoryBudget>().is_err());
        assert!("0".parse::<MemoryBudget>().is_err());
        assert!("12 parsecs".parse::<MemoryBudget>().is_err());
    }

    #[test]
    fn both_megabyte_readings_clamp_to_the_same_chunk() {
        for units in [ByteUnits::Decimal, ByteUnits::Binary] {
            let b = MemoryBudget::parse_with("2.8MB", units).unwrap();
            let lim = max_chunk_size(&b, Precision::Single, Some(MAX_CHUNK_SIZE)).unwrap();
            assert_eq!(lim.chunk_size, 8192);
        }
    }
}
