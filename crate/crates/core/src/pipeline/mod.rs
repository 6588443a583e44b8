//! Instrumented runs and chunk-size sweeps.
//!
//! Wall time is split the way an accelerator host program would see it:
//! *compute* is the per-pair transform work (the kernel), *staging* is chunk
//! extraction, padding and result read-back (the host/device transfer
//! analog), and *host* is overlap-add accumulation and truncation. Throughput
//! is reported in MFLOPS under the operation count of [`flop_count`].

mod table;

use std::fmt;
use std::time::Instant;

use crate::conv::{direct_convolve, plan_chunks, ChunkPlan, ConvolutionConfig, ExecStats};
use crate::engine::{self, PhaseClock};
use crate::error::{Error, Result};
use crate::sample::Precision;

pub use table::{chunk_label, size_label};

/// Output size above which the O(n²) oracle check is skipped.
pub const DEFAULT_ORACLE_LIMIT: usize = 1 << 20;

/// Seconds spent per phase of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub compute_s: f64,
    pub staging_s: f64,
    pub host_s: f64,
    /// Whole run, including planning and allocation that no phase claims.
    pub total_s: f64,
}

impl PhaseTimings {
    pub fn attributed_s(&self) -> f64 {
        self.compute_s + self.staging_s + self.host_s
    }
}

/// Phase shares as percentages of the attributed time: `(compute, staging, host)`.
pub fn breakdown_percentages(t: &PhaseTimings) -> Result<(f64, f64, f64)> {
    let sum = t.attributed_s();
    if t.total_s.is_nan() || sum.is_nan() || t.total_s <= 0.0 || sum <= 0.0 {
        return Err(Error::Arithmetic(
            "phase breakdown of a zero-length run".to_string(),
        ));
    }
    Ok((
        100.0 * t.compute_s / sum,
        100.0 * t.staging_s / sum,
        100.0 * t.host_s / sum,
    ))
}

/// Real floating-point operations for a plan.
///
/// Each `N`-point transform counts `5·N·log2(N)`, each spectral product
/// `6·N`, and overlap-add `2C - 1` additions per pair. Without caching every
/// pair does two forward and one inverse transform; with caching the filter
/// chunks are transformed once up front and each pair does one forward and
/// one inverse.
pub fn flop_count(plan: &ChunkPlan, cache_filter_ffts: bool) -> u64 {
    let n = plan.fft_len as u64;
    let fft = 5 * n * u64::from(plan.fft_len.trailing_zeros());
    let pairs = plan.pair_count as u64;
    let product = 6 * n;
    let accumulate = pairs * (n - 1);
    let transforms = if cache_filter_ffts {
        (plan.m_h as u64 + pairs) * fft + pairs * fft
    } else {
        pairs * 3 * fft
    };
    transforms + pairs * product + accumulate
}

/// Options for [`run_instrumented`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Compare against [`direct_convolve`] after the timed run.
    pub check_oracle: bool,
    /// Skip the oracle when the full output is longer than this.
    pub oracle_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            check_oracle: false,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

impl RunOptions {
    pub fn with_oracle() -> Self {
        RunOptions {
            check_oracle: true,
            ..Default::default()
        }
    }
}

/// Measurements for one convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionReport {
    pub plan: ChunkPlan,
    pub precision: Precision,
    pub cache_filter_ffts: bool,
    pub workers: usize,
    pub timings: PhaseTimings,
    pub flops: u64,
    /// `flops / (total_s · 10⁶)`.
    pub mflops: f64,
    pub bytes_staged: u64,
    /// `bytes_staged / staging_s`, in 10⁹ bytes per second.
    pub bandwidth_gbs: f64,
    pub stats: ExecStats,
    /// Largest absolute deviation from the direct-summation oracle, when checked.
    pub max_abs_error: Option<f64>,
    /// Relative L2 deviation from the oracle, when checked.
    pub rel_l2_error: Option<f64>,
}

impl ConvolutionReport {
    pub fn breakdown(&self) -> Result<(f64, f64, f64)> {
        breakdown_percentages(&self.timings)
    }
}

impl fmt::Display for ConvolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.plan;
        write!(
            f,
            "n_x={} n_h={} C={} pairs={} n_y={} {} {:.6}s {:.3} MFLOPS",
            p.n_x,
            p.n_h,
            p.chunk_size,
            p.pair_count,
            p.n_y,
            self.precision,
            self.timings.total_s,
            self.mflops
        )?;
        if let Ok((c, s, h)) = self.breakdown() {
            write!(f, " compute/staging/host={c:.1}/{s:.1}/{h:.1}%")?;
        }
        write!(f, " staged={}B {:.3}GB/s", self.bytes_staged, self.bandwidth_gbs)?;
        if let Some(e) = self.max_abs_error {
            write!(f, " max_abs_err={e:.3e}")?;
        }
        Ok(())
    }
}

/// Relative L2 distance `‖a - b‖ / ‖b‖`, falling back to the absolute norm when `b` is zero.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    let norm: f64 = b.iter().map(|q| q * q).sum();
    if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        diff.sqrt()
    }
}

/// Runs [`crate::chunked_convolve`] with per-phase timing and returns its output plus a report.
pub fn run_instrumented(
    x: &[f64],
    h: &[f64],
    cfg: &ConvolutionConfig,
    opts: &RunOptions,
) -> Result<(Vec<f64>, ConvolutionReport)> {
    let start = Instant::now();
    let exec = engine::execute::<PhaseClock>(x, h, cfg)?;
    let total_s = start.elapsed().as_secs_f64();

    let [compute, staging, host] = exec.phase_nanos.map(|n| n as f64 * 1e-9);
    let timings = PhaseTimings {
        compute_s: compute,
        staging_s: staging,
        host_s: host,
        total_s,
    };
    let flops = flop_count(&exec.plan, cfg.cache_filter_ffts);
    let mflops = flops as f64 / (total_s * 1e6);
    let bandwidth_gbs = if staging > 0.0 {
        exec.stats.bytes_staged as f64 / staging / 1e9
    } else {
        0.0
    };

    let (max_abs_error, rel_l2_error) = if opts.check_oracle && exec.plan.n_y <= opts.oracle_limit {
        let mut reference = direct_convolve(x, h)?;
        reference.truncate(exec.y.len());
        let max_abs = exec
            .y
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (Some(max_abs), Some(relative_l2(&exec.y, &reference)))
    } else {
        (None, None)
    };

    let report = ConvolutionReport {
        plan: exec.plan,
        precision: cfg.precision,
        cache_filter_ffts: cfg.cache_filter_ffts,
        workers: exec.workers,
        timings,
        flops,
        mflops,
        bytes_staged: exec.stats.bytes_staged,
        bandwidth_gbs,
        stats: exec.stats,
        max_abs_error,
        rel_l2_error,
    };
    Ok((exec.y, report))
}

/// Options for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Runs per cell; the fastest is kept.
    pub repeats: usize,
    /// Run cells concurrently. Timings then interfere with each other.
    pub concurrent_cells: bool,
    pub check_oracle: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            repeats: 1,
            concurrent_cells: false,
            check_oracle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(Box<ConvolutionReport>),
    /// The configuration was rejected by the memory budget or chunk cap.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub size: usize,
    pub chunk_size: usize,
    pub outcome: CellOutcome,
}

/// One report per (dataset size, chunk size) cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub sizes: Vec<usize>,
    pub chunks: Vec<usize>,
    pub cells: Vec<SweepCell>,
}

fn run_cell(
    size: usize,
    chunk_size: usize,
    x: &[f64],
    h: &[f64],
    base: &ConvolutionConfig,
    opts: &SweepOptions,
) -> Result<SweepCell> {
    let cfg = ConvolutionConfig {
        chunk_size,
        ..base.clone()
    };
    let outcome = match plan_chunks(x.len(), h.len(), &cfg) {
        Err(e) if e.is_budget() => CellOutcome::Skipped(e.to_string()),
        Err(e) => return Err(e),
        Ok(_) => {
            let run_opts = RunOptions {
                check_oracle: opts.check_oracle,
                ..Default::default()
            };
            let mut best: Option<ConvolutionReport> = None;
            for _ in 0..opts.repeats.max(1) {
                let (_, report) = run_instrumented(x, h, &cfg, &run_opts)?;
                if best
                    .as_ref()
                    .is_none_or(|b| report.timings.total_s < b.timings.total_s)
                {
                    best = Some(report);
                }
            }
            CellOutcome::Done(Box::new(best.expect("at least one repeat")))
        }
    };
    Ok(SweepCell {
        size,
        chunk_size,
        outcome,
    })
}

/// Runs every `sizes × chunks` cell. `dataset(n)` supplies the input and
/// filter for dataset size `n`; it is called once per size.
pub fn sweep<F>(
    sizes: &[usize],
    chunks: &[usize],
    base: &ConvolutionConfig,
    opts: &SweepOptions,
    dataset: F,
) -> Result<SweepTable>
where
    F: Fn(usize) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    let data = sizes
        .iter()
        .map(|&n| dataset(n))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|s| chunks.iter().map(move |&c| (s, c)))
        .collect();
    let job = |&(s, c): &(usize, usize)| {
        let (x, h) = &data[s];
        run_cell(sizes[s], c, x, h, base, opts)
    };

    #[cfg(feature = "parallel")]
    let cells = if opts.concurrent_cells {
        use rayon::prelude::*;
        jobs.par_iter().map(job).collect::<Result<Vec<_>>>()?
    } else {
        jobs.iter().map(job).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let cells = jobs.iter().map(job).collect::<Result<Vec<_>>>()?;

    Ok(SweepTable {
        sizes: sizes.to_vec(),
        chunks: chunks.to_vec(),
        cells,
    })
}
