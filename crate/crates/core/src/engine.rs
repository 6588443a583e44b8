//! Pair loop shared by the plain and instrumented entry points.
//!
//! Every pair runs three phases: staging (chunk extraction into padded
//! work buffers and read-back of the real result), compute (transforms and
//! spectral product) and host (overlap-add into the accumulator). A [`Probe`]
//! decides whether those phases are timed; the arithmetic is the same either
//! way, so timed and untimed runs produce bit-identical output.

use std::ops::Range;
use std::time::Instant;

use num_complex::Complex;

use crate::conv::{multiply_spectra, plan_chunks, ChunkPlan, ConvolutionConfig, ExecStats};
use crate::error::Result;
use crate::fft::{forward_unchecked, inverse_unchecked, TwiddleTable};
use crate::sample::{Precision, Sample};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Phase {
    Compute = 0,
    Staging = 1,
    Host = 2,
}

pub(crate) trait Probe: Default + Send {
    fn time<R>(&mut self, phase: Phase, f: impl FnOnce() -> R) -> R;

    /// Accumulated nanoseconds per phase, indexed by `Phase as usize`.
    fn nanos(&self) -> [u64; 3];
}

#[derive(Debug, Default)]
pub(crate) struct Untimed;

impl Probe for Untimed {
    #[inline(always)]
    fn time<R>(&mut self, _phase: Phase, f: impl FnOnce() -> R) -> R {
        f()
    }

    fn nanos(&self) -> [u64; 3] {
        [0; 3]
    }
}

#[derive(Debug, Default)]
pub(crate) struct PhaseClock([u64; 3]);

impl Probe for PhaseClock {
    #[inline]
    fn time<R>(&mut self, phase: Phase, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        self.0[phase as usize] += start.elapsed().as_nanos() as u64;
        r
    }

    fn nanos(&self) -> [u64; 3] {
        self.0
    }
}

pub(crate) struct Execution {
    pub plan: ChunkPlan,
    pub y: Vec<f64>,
    pub stats: ExecStats,
    pub phase_nanos: [u64; 3],
    pub workers: usize,
}

pub(crate) fn execute<P: Probe>(x: &[f64], h: &[f64], cfg: &ConvolutionConfig) -> Result<Execution> {
    let plan = plan_chunks(x.len(), h.len(), cfg)?;
    match cfg.precision {
        Precision::Single => run::<f32, P>(x, h, plan, cfg),
        Precision::Double => run::<f64, P>(x, h, plan, cfg),
    }
}

fn chunk(samples: &[f64], index: usize, c: usize) -> &[f64] {
    let start = index * c;
    &samples[start..samples.len().min(start + c)]
}

/// Writes `src` into the front of `dst` as complex values and zeroes the rest.
#[inline]
fn stage<T: Sample>(dst: &mut [Complex<T>], src: &[f64]) {
    let (head, tail) = dst.split_at_mut(src.len());
    for (d, &s) in head.iter_mut().zip(src) {
        *d = Complex::new(T::narrow(s), T::zero());
    }
    tail.fill(Complex::new(T::zero(), T::zero()));
}

fn worker_count(cfg: &ConvolutionConfig, pairs: usize) -> usize {
    if cfg!(feature = "parallel") {
        cfg.parallel_pairs.clamp(1, pairs.max(1))
    } else {
        1
    }
}

/// Splits `0..total` into `parts` contiguous, nearly equal ranges.
fn split_ranges(total: usize, parts: usize) -> Vec<Range<usize>> {
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

struct Shared<'a, T> {
    x: &'a [f64],
    h: &'a [f64],
    plan: ChunkPlan,
    tw: &'a TwiddleTable<T>,
    filter_spectra: Option<&'a [Vec<Complex<T>>]>,
}

struct Worker<'a, T, P> {
    shared: &'a Shared<'a, T>,
    work_x: Vec<Complex<T>>,
    work_h: Vec<Complex<T>>,
    readback: Vec<f64>,
    acc: Vec<f64>,
    stats: ExecStats,
    probe: P,
}

impl<'a, T: Sample, P: Probe> Worker<'a, T, P> {
    fn new(shared: &'a Shared<'a, T>) -> Self {
        let plan = &shared.plan;
        let zero = Complex::new(T::zero(), T::zero());
        Worker {
            shared,
            work_x: vec![zero; plan.fft_len],
            work_h: if shared.filter_spectra.is_some() {
                Vec::new()
            } else {
                vec![zero; plan.fft_len]
            },
            readback: vec![0.0; plan.pair_output_len()],
            acc: vec![0.0; plan.accumulator_len()],
            stats: ExecStats::default(),
            probe: P::default(),
        }
    }

    fn run(&mut self, pairs: Range<usize>) {
        for p in pairs {
            let (i, j) = self.shared.plan.pair_indices(p);
            self.pair(i, j);
        }
    }

    fn pair(&mut self, i: usize, j: usize) {
        let Shared {
            x,
            h,
            plan,
            tw,
            filter_spectra,
        } = *self.shared;
        let c = plan.chunk_size;
        let complex_bytes = (plan.fft_len * T::PRECISION.complex_bytes()) as u64;
        let Worker {
            work_x,
            work_h,
            readback,
            acc,
            stats,
            probe,
            ..
        } = self;

        probe.time(Phase::Staging, || {
            stage(work_x, chunk(x, i, c));
            stats.bytes_staged += complex_bytes;
            if filter_spectra.is_none() {
                stage(work_h, chunk(h, j, c));
                stats.bytes_staged += complex_bytes;
            }
        });

        probe.time(Phase::Compute, || {
            forward_unchecked(work_x, tw);
            stats.forward_ffts += 1;
            match filter_spectra {
                Some(spectra) => multiply_spectra(work_x, &spectra[j]),
                None => {
                    forward_unchecked(work_h, tw);
                    stats.forward_ffts += 1;
                    multiply_spectra(work_x, work_h);
                }
            }
            inverse_unchecked(work_x, tw);
            stats.inverse_ffts += 1;
        });

        probe.time(Phase::Staging, || {
            for (r, v) in readback.iter_mut().zip(work_x.iter()) {
                *r = v.re.widen();
            }
            stats.bytes_staged += (readback.len() * T::PRECISION.real_bytes()) as u64;
        });

        let offset = plan.pair_offset(i, j);
        probe.time(Phase::Host, || {
            for (a, r) in acc[offset..offset + readback.len()].iter_mut().zip(readback.iter()) {
                *a += *r;
            }
        });

        stats.pairs_executed += 1;
        stats.kernel_invocations += 1;
    }
}

fn filter_spectra<T: Sample, P: Probe>(
    h: &[f64],
    plan: &ChunkPlan,
    tw: &TwiddleTable<T>,
    probe: &mut P,
    stats: &mut ExecStats,
) -> Vec<Vec<Complex<T>>> {
    (0..plan.m_h)
        .map(|j| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); plan.fft_len];
            probe.time(Phase::Staging, || stage(&mut buf, chunk(h, j, plan.chunk_size)));
            probe.time(Phase::Compute, || forward_unchecked(&mut buf, tw));
            stats.bytes_staged += (plan.fft_len * T::PRECISION.complex_bytes()) as u64;
            stats.forward_ffts += 1;
            stats.kernel_invocations += 1;
            buf
        })
        .collect()
}

struct WorkerOutput {
    acc: Vec<f64>,
    stats: ExecStats,
    nanos: [u64; 3],
}

fn run<T: Sample, P: Probe>(
    x: &[f64],
    h: &[f64],
    plan: ChunkPlan,
    cfg: &ConvolutionConfig,
) -> Result<Execution> {
    let tw = TwiddleTable::<T>::new(plan.fft_len)?;
    let mut coordinator = P::default();
    let mut stats = ExecStats::default();

    let spectra = cfg
        .cache_filter_ffts
        .then(|| filter_spectra(h, &plan, &tw, &mut coordinator, &mut stats));
    let shared = Shared {
        x,
        h,
        plan,
        tw: &tw,
        filter_spectra: spectra.as_deref(),
    };

    let workers = worker_count(cfg, plan.pair_count);
    let outputs = run_workers::<T, P>(&shared, workers)?;

    // Phase totals follow the busiest worker: its phases all lie inside the
    // wall-clock window, so they never sum past the total.
    let busiest = outputs
        .iter()
        .map(|o| o.nanos)
        .max_by_key(|n| n.iter().sum::<u64>())
        .unwrap_or_default();
    let mut outputs = outputs.into_iter();
    let first = outputs.next().expect("at least one worker");
    stats += first.stats;
    let mut acc = first.acc;
    for other in outputs {
        stats += other.stats;
        coordinator.time(Phase::Host, || {
            for (a, b) in acc.iter_mut().zip(&other.acc) {
                *a += b;
            }
        });
    }

    let out_len = plan.output_len(cfg.causal);
    coordinator.time(Phase::Host, || acc.truncate(out_len));

    let own = coordinator.nanos();
    let phase_nanos = [0, 1, 2].map(|k| own[k] + busiest[k]);
    Ok(Execution {
        plan,
        y: acc,
        stats,
        phase_nanos,
        workers,
    })
}

fn run_one<T: Sample, P: Probe>(shared: &Shared<'_, T>, pairs: Range<usize>) -> WorkerOutput {
    let mut w = Worker::<T, P>::new(shared);
    w.run(pairs);
    WorkerOutput {
        nanos: w.probe.nanos(),
        acc: w.acc,
        stats: w.stats,
    }
}

#[cfg(feature = "parallel")]
fn run_workers<T: Sample, P: Probe>(shared: &Shared<'_, T>, workers: usize) -> Result<Vec<WorkerOutput>> {
    use rayon::prelude::*;

    let ranges = split_ranges(shared.plan.pair_count, workers);
    if workers == 1 {
        return Ok(ranges.into_iter().map(|r| run_one::<T, P>(shared, r)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::Parallel(e.to_string()))?;
    Ok(pool.install(|| {
        ranges
            .into_par_iter()
            .map(|r| run_one::<T, P>(shared, r))
            .collect()
    }))
}

#[cfg(not(feature = "parallel"))]
fn run_workers<T: Sample, P: Probe>(shared: &Shared<'_, T>, workers: usize) -> Result<Vec<WorkerOutput>> {
    Ok(split_ranges(shared.plan.pair_count, workers)
        .into_iter()
        .map(|r| run_one::<T, P>(shared, r))
        .collect())
}
