//! Chunk planning, per-pair frequency-domain convolution and overlap-add.
//!
//! An input of `n_x` samples and a filter of `n_h` samples are cut into
//! `m_x = ceil(n_x / C)` and `m_h = ceil(n_h / C)` chunks of `C` samples (the
//! last one zero-padded). Chunk pair `(i, j)` is convolved with a `2C`-point
//! transform and its first `2C - 1` samples are added into the output at
//! offset `(i + j)·C`.

use std::ops::AddAssign;

use num_complex::Complex;
use num_traits::Zero;

use crate::engine::{self, Untimed};
use crate::error::{Error, Result};
use crate::fft::{forward_unchecked, inverse_unchecked, ComplexBuffer, TwiddleTable};
use crate::memory::{footprint, MemoryBudget};
use crate::sample::{Precision, Sample};
use crate::MAX_CHUNK_SIZE;

/// Engine settings for one convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionConfig {
    /// Samples per chunk; a power of two in `2..=max_chunk`.
    pub chunk_size: usize,
    /// Keep only the first `n_x` output samples.
    pub causal: bool,
    pub precision: Precision,
    /// Transform each filter chunk once and reuse its spectrum for every pair.
    pub cache_filter_ffts: bool,
    /// Worker count for the pair loop; `1` runs sequentially. Values above 1
    /// only take effect with the `parallel` feature.
    pub parallel_pairs: usize,
    /// Largest accepted chunk size.
    pub max_chunk: usize,
    /// When set, chunk sizes whose footprint exceeds the budget are rejected.
    pub budget: Option<MemoryBudget>,
}

impl ConvolutionConfig {
    pub fn new(chunk_size: usize) -> Self {
        ConvolutionConfig {
            chunk_size,
            ..Default::default()
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_budget(mut self, budget: MemoryBudget) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn causal(mut self, causal: bool) -> Self {
        self.causal = causal;
        self
    }

    pub fn cache_filter_ffts(mut self, cache: bool) -> Self {
        self.cache_filter_ffts = cache;
        self
    }

    pub fn parallel_pairs(mut self, workers: usize) -> Self {
        self.parallel_pairs = workers;
        self
    }
}

impl Default for ConvolutionConfig {
    fn default() -> Self {
        ConvolutionConfig {
            chunk_size: MAX_CHUNK_SIZE,
            causal: false,
            precision: Precision::Single,
            cache_filter_ffts: false,
            parallel_pairs: 1,
            max_chunk: MAX_CHUNK_SIZE,
            budget: None,
        }
    }
}

/// Partitioning of one convolution into chunk pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    pub n_x: usize,
    pub n_h: usize,
    pub chunk_size: usize,
    pub m_x: usize,
    pub m_h: usize,
    /// Transform length per pair, `2·chunk_size`.
    pub fft_len: usize,
    /// Full linear convolution length, `n_x + n_h - 1`.
    pub n_y: usize,
    pub pair_count: usize,
}

impl ChunkPlan {
    /// Output offset of pair `(i, j)`.
    pub fn pair_offset(&self, i: usize, j: usize) -> usize {
        (i + j) * self.chunk_size
    }

    /// Samples each pair deposits into the accumulator.
    pub fn pair_output_len(&self) -> usize {
        self.fft_len - 1
    }

    /// Accumulator length that holds the last pair's full deposit.
    pub fn accumulator_len(&self) -> usize {
        self.pair_offset(self.m_x - 1, self.m_h - 1) + self.pair_output_len()
    }

    /// Chunk indices of linear pair index `p`, input-major.
    pub fn pair_indices(&self, p: usize) -> (usize, usize) {
        (p / self.m_h, p % self.m_h)
    }

    /// Output length after optional causal truncation.
    pub fn output_len(&self, causal: bool) -> usize {
        if causal {
            self.n_x
        } else {
            self.n_y
        }
    }
}

pub fn plan_chunks(n_x: usize, n_h: usize, cfg: &ConvolutionConfig) -> Result<ChunkPlan> {
    if n_x == 0 || n_h == 0 {
        return Err(Error::shape(format!(
            "input and filter must be nonempty (n_x = {n_x}, n_h = {n_h})"
        )));
    }
    let c = cfg.chunk_size;
    if c < 2 || !c.is_power_of_two() {
        return Err(Error::shape(format!(
            "chunk size must be a power of two >= 2, got {c}"
        )));
    }
    if c > cfg.max_chunk {
        return Err(Error::budget(format!(
            "chunk size {c} exceeds the engine maximum of {}",
            cfg.max_chunk
        )));
    }
    if let Some(budget) = &cfg.budget {
        let fp = footprint(c, cfg.precision)?;
        if !fp.fits(budget) {
            return Err(Error::budget(format!(
                "chunk size {c} needs {} bytes, over the {budget} budget",
                fp.total_bytes
            )));
        }
    }
    let m_x = n_x.div_ceil(c);
    let m_h = n_h.div_ceil(c);
    Ok(ChunkPlan {
        n_x,
        n_h,
        chunk_size: c,
        m_x,
        m_h,
        fft_len: 2 * c,
        n_y: n_x + n_h - 1,
        pair_count: m_x * m_h,
    })
}

/// `y[n] = Σ_k x[k]·h[n-k]` by direct summation in double precision. O(n_x·n_h).
pub fn direct_convolve(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() || h.is_empty() {
        return Err(Error::shape("direct convolution needs nonempty operands"));
    }
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (k, &xk) in x.iter().enumerate() {
        for (out, &hj) in y[k..].iter_mut().zip(h) {
            *out += xk * hj;
        }
    }
    Ok(y)
}

/// Pointwise spectrum product, written into `acc`.
#[inline]
pub(crate) fn multiply_spectra<T: Sample>(acc: &mut [Complex<T>], other: &[Complex<T>]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a = *a * *b;
    }
}

/// Circular convolution of two zero-padded chunks of length `tw.len()`.
///
/// Each chunk must carry data only in its lower half, so the first
/// `len - 1` output samples are the linear convolution of the two chunks.
pub fn convolve_chunk_pair<T: Sample>(
    x_chunk: &[Complex<T>],
    h_chunk: &[Complex<T>],
    tw: &TwiddleTable<T>,
) -> Result<ComplexBuffer<T>> {
    let n = tw.len();
    for (name, chunk) in [("input", x_chunk), ("filter", h_chunk)] {
        if chunk.len() != n {
            return Err(Error::shape(format!(
                "{name} chunk has length {}, transform length is {n}",
                chunk.len()
            )));
        }
        if chunk[n / 2..].iter().any(|v| !v.is_zero()) {
            return Err(Error::shape(format!(
                "{name} chunk is not zero-padded in its upper half"
            )));
        }
    }
    let mut xs = x_chunk.to_vec();
    let mut hs = h_chunk.to_vec();
    forward_unchecked(&mut xs, tw);
    forward_unchecked(&mut hs, tw);
    multiply_spectra(&mut xs, &hs);
    inverse_unchecked(&mut xs, tw);
    Ok(xs.into())
}

/// Adds `Re(y_ij[n])` into `acc[offset + n]` for all but the last sample of
/// `y_ij`, which is zero for a `2C`-point pair result.
pub fn overlap_add<T: Sample>(acc: &mut [f64], y_ij: &[Complex<T>], offset: usize) -> Result<()> {
    let len = y_ij.len().saturating_sub(1);
    let capacity = acc.len();
    let dst = offset
        .checked_add(len)
        .and_then(|end| acc.get_mut(offset..end))
        .ok_or(Error::Bounds {
            offset,
            len,
            capacity,
        })?;
    for (a, v) in dst.iter_mut().zip(y_ij) {
        *a += v.re.widen();
    }
    Ok(())
}

/// First `n_x` samples of `y`.
pub fn causal_truncate(mut y: Vec<f64>, n_x: usize) -> Result<Vec<f64>> {
    if y.len() < n_x {
        return Err(Error::shape(format!(
            "cannot keep {n_x} causal samples of a length-{} output",
            y.len()
        )));
    }
    y.truncate(n_x);
    Ok(y)
}

/// Counters from one chunked convolution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecStats {
    pub pairs_executed: u64,
    pub forward_ffts: u64,
    pub inverse_ffts: u64,
    /// Per-pair kernel calls plus standalone filter transforms when cached.
    pub kernel_invocations: u64,
    /// Bytes written into complex work buffers plus real samples read back.
    pub bytes_staged: u64,
}

impl AddAssign for ExecStats {
    fn add_assign(&mut self, rhs: Self) {
        self.pairs_executed += rhs.pairs_executed;
        self.forward_ffts += rhs.forward_ffts;
        self.inverse_ffts += rhs.inverse_ffts;
        self.kernel_invocations += rhs.kernel_invocations;
        self.bytes_staged += rhs.bytes_staged;
    }
}

/// Linear convolution of `x` and `h` through chunked FFTs and overlap-add.
///
/// Returns `n_x + n_h - 1` samples, or `n_x` when `cfg.causal` is set.
pub fn chunked_convolve(x: &[f64], h: &[f64], cfg: &ConvolutionConfig) -> Result<Vec<f64>> {
    chunked_convolve_with_stats(x, h, cfg).map(|(y, _)| y)
}

pub fn chunked_convolve_with_stats(
    x: &[f64],
    h: &[f64],
    cfg: &ConvolutionConfig,
) -> Result<(Vec<f64>, ExecStats)> {
    let run = engine::execute::<Untimed>(x, h, cfg)?;
    Ok((run.y, run.stats))
}
