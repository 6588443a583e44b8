use std::str::FromStr;

use crate::error::{Error, Result};

/// SplitMix64: 64-bit state, Weyl increment `0x9E3779B97F4A7C15`, mixed with
/// multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB` and shifts
/// 30/27/31. Pure integer arithmetic, so the stream is identical everywhere.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterDistribution {
    /// Uniform on `[-1, 1)`.
    #[default]
    Uniform,
    /// Standard normal via Box–Muller. Uses `ln`/`cos`, so the last bit may
    /// differ between math libraries; the uniform stream does not.
    Gaussian,
}

impl FromStr for FilterDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(FilterDistribution::Uniform),
            "gaussian" | "normal" => Ok(FilterDistribution::Gaussian),
            other => Err(format!("unknown filter distribution {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSpec {
    pub length: usize,
    pub seed: u64,
    pub distribution: FilterDistribution,
}

impl FilterSpec {
    pub fn uniform(length: usize, seed: u64) -> Self {
        FilterSpec {
            length,
            seed,
            distribution: FilterDistribution::Uniform,
        }
    }
}

/// Seeded filter taps; the same spec always yields the same bits.
pub fn generate_filter(spec: &FilterSpec) -> Result<Vec<f64>> {
    if spec.length == 0 {
        return Err(Error::shape("filter length must be at least 1"));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let taps = match spec.distribution {
        FilterDistribution::Uniform => (0..spec.length)
            .map(|_| 2.0 * rng.next_unit() - 1.0)
            .collect(),
        FilterDistribution::Gaussian => (0..spec.length)
            .map(|_| {
                let u1 = 1.0 - rng.next_unit();
                let u2 = rng.next_unit();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect(),
    };
    Ok(taps)
}
