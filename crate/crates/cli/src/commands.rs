use std::fs;
use std::path::Path;

use anyhow::Context;
use chunkfft::data_io::{
    generate_filter, load_fasta, read_samples, synthetic_sequence, write_samples, FastaOptions,
    FilterSpec, Region,
};
use chunkfft::pipeline::{relative_l2, size_label, SweepOptions};
use chunkfft::{
    chunked_convolve, direct_convolve, footprint, max_chunk_size, run_instrumented, sweep,
    ByteUnits, ConvolutionConfig, MemoryBudget, RunOptions,
};

use crate::args::{BenchArgs, BudgetArgs, BudgetFlags, Command, ConvolveArgs, EngineArgs, TableFormat, VerifyArgs};

/// Largest size `verify` accepts; the direct oracle is quadratic.
const VERIFY_MAX_SIZE: usize = 16_384;

const DEFAULT_CAPACITY: &str = "2.8MB";

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flag values that clap could not catch (exit 2).
    Usage(String),
    /// Runtime or verification failure (exit 1).
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<chunkfft::Error> for Failure {
    fn from(e: chunkfft::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Convolve(a) => convolve(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
        Command::Budget(a) => budget(a),
    }
}

/// Parses `450K`, `32768`, `1.5M`. K and M are decimal unless `k_binary`.
pub fn parse_size(s: &str, k_binary: bool) -> Result<usize, String> {
    let t = s.trim();
    let (digits, mult) = match t.char_indices().last() {
        Some((i, 'k' | 'K')) => (&t[..i], if k_binary { 1024.0 } else { 1e3 }),
        Some((i, 'm' | 'M')) => (&t[..i], if k_binary { 1_048_576.0 } else { 1e6 }),
        _ => (t, 1.0),
    };
    let v: f64 = digits
        .parse()
        .map_err(|_| format!("invalid size {s:?}"))?;
    let n = v * mult;
    if !n.is_finite() || n < 1.0 || n.fract() != 0.0 || n > usize::MAX as f64 {
        return Err(format!("invalid size {s:?}: must be a positive whole number of samples"));
    }
    Ok(n as usize)
}

fn parse_sizes(list: &[String], k_binary: bool) -> Result<Vec<usize>, Failure> {
    list.iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_size(s, k_binary).map_err(Failure::Usage))
        .collect()
}

fn units(binary: bool) -> ByteUnits {
    if binary {
        ByteUnits::Binary
    } else {
        ByteUnits::Decimal
    }
}

fn parse_budget(text: &str, binary: bool) -> Result<MemoryBudget, Failure> {
    MemoryBudget::parse_with(text, units(binary)).map_err(|e| Failure::Usage(format!("--budget: {e}")))
}

fn engine_config(chunk: usize, engine: &EngineArgs, flags: Option<&BudgetFlags>) -> Result<ConvolutionConfig, Failure> {
    let mut cfg = ConvolutionConfig::new(chunk)
        .with_precision(engine.precision)
        .cache_filter_ffts(engine.cache_filter)
        .parallel_pairs(engine.workers);
    cfg.max_chunk = engine.max_chunk;
    if let Some(text) = flags.and_then(|f| f.budget.as_deref()) {
        cfg = cfg.with_budget(parse_budget(text, flags.is_some_and(|f| f.binary_units))?);
    }
    Ok(cfg)
}

fn convolve(a: ConvolveArgs) -> CmdResult {
    let x = if let Some(path) = &a.x {
        read_samples(path)
            .with_context(|| format!("reading input {}", path.display()))?
            .samples
    } else {
        let path = a.fasta.as_ref().expect("clap requires --x or --fasta");
        let region = match (a.offset, a.length) {
            (None, None) => None,
            (off, Some(len)) => Some(Region { offset: off.unwrap_or(0), len }),
            (Some(_), None) => unreachable!("clap requires --length with --offset"),
        };
        let opts = FastaOptions { record: a.record.clone(), region, encoding: a.encoding };
        let seq = load_fasta(path, &opts).with_context(|| format!("reading {}", path.display()))?;
        if seq.unknown_count > 0 {
            eprintln!("note: {} ambiguous bases encoded as 0", seq.unknown_count);
        }
        seq.samples
    };
    let h = match &a.h {
        Some(path) => {
            read_samples(path)
                .with_context(|| format!("reading filter {}", path.display()))?
                .samples
        }
        None => generate_filter(&FilterSpec {
            length: a.filter_len.unwrap_or(x.len()),
            seed: a.filter_seed,
            distribution: a.filter_dist,
        })?,
    };

    let cfg = engine_config(a.chunk, &a.engine, Some(&a.budget))?.causal(a.causal);
    let opts = if a.check { RunOptions::with_oracle() } else { RunOptions::default() };
    let (y, report) = run_instrumented(&x, &h, &cfg, &opts)?;
    write_samples(&a.out, &y, a.engine.precision)
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!("{report}");
    if let Some(e) = report.rel_l2_error {
        println!("rel_l2_err={e:.3e}");
    }
    println!("wrote {} samples to {}", y.len(), a.out.display());
    Ok(())
}

fn verify(a: VerifyArgs) -> CmdResult {
    let sizes = parse_sizes(&a.sizes, a.k_binary)?;
    if let Some(&n) = sizes.iter().find(|&&n| n > VERIFY_MAX_SIZE) {
        return Err(Failure::Usage(format!(
            "verify size {n} exceeds {VERIFY_MAX_SIZE}; the direct reference is quadratic"
        )));
    }
    let tolerance = a.engine.precision.oracle_tolerance();
    println!("{:>8} {:>8} {:>12}  status", "size", "chunk", "rel_l2");
    let mut worst: Option<(usize, usize, f64)> = None;
    let mut failures = 0usize;
    for (si, &n) in sizes.iter().enumerate() {
        let x = generate_filter(&FilterSpec::uniform(n, a.seed.wrapping_add(2 * si as u64)))?;
        let h = generate_filter(&FilterSpec::uniform(n, a.seed.wrapping_add(2 * si as u64 + 1)))?;
        let reference = direct_convolve(&x, &h)?;
        for &c in &a.chunks {
            let cfg = engine_config(c, &a.engine, None)?;
            let mut y = chunked_convolve(&x, &h, &cfg)?;
            if a.corrupt {
                y[0] += 1.0;
            }
            let err = relative_l2(&y, &reference);
            let ok = err.is_finite() && err <= tolerance;
            if !ok {
                failures += 1;
            }
            println!("{n:>8} {c:>8} {err:>12.3e}  {}", if ok { "ok" } else { "FAIL" });
            if worst.is_none_or(|(_, _, w)| err.is_nan() || err > w) {
                worst = Some((n, c, err));
            }
        }
    }
    match worst {
        Some((n, c, err)) if failures > 0 => Err(Failure::Runtime(anyhow::anyhow!(
            "{failures} cell(s) exceed tolerance {tolerance:e}; worst size={n} chunk={c} rel_l2={err:.3e}"
        ))),
        Some((n, c, err)) => {
            println!("all cells within {tolerance:e} (worst size={n} chunk={c} rel_l2={err:.3e})");
            Ok(())
        }
        None => Err(Failure::Usage("nothing to verify: empty size or chunk list".into())),
    }
}

fn bench(a: BenchArgs) -> CmdResult {
    let sizes = parse_sizes(&a.sizes, a.k_binary)?;
    if sizes.is_empty() || a.chunks.is_empty() {
        return Err(Failure::Usage("--sizes and --chunks must be non-empty".into()));
    }
    if a.repeats == 0 {
        return Err(Failure::Usage("--repeats must be at least 1".into()));
    }
    let base = engine_config(a.chunks[0], &a.engine, Some(&a.budget))?;
    let opts = SweepOptions {
        repeats: a.repeats,
        concurrent_cells: a.concurrent_cells,
        check_oracle: a.check,
    };
    if a.concurrent_cells {
        eprintln!("warning: --concurrent-cells runs cells at the same time; timings interfere");
    }

    let fasta = match &a.fasta {
        Some(path) => {
            let largest = *sizes.iter().max().expect("non-empty");
            let opts = FastaOptions {
                record: a.record.clone(),
                region: Some(Region { offset: a.offset, len: largest }),
                encoding: a.encoding,
            };
            Some(load_fasta(path, &opts).with_context(|| format!("reading {}", path.display()))?.samples)
        }
        None => None,
    };
    let (seed, encoding) = (a.seed, a.encoding);
    let table = sweep(&sizes, &a.chunks, &base, &opts, |n| {
        let x = match &fasta {
            Some(seq) => seq[..n].to_vec(),
            None => synthetic_sequence(n, seed, encoding)?.samples,
        };
        let h = generate_filter(&FilterSpec::uniform(n, seed.wrapping_add(1)))?;
        Ok((x, h))
    })?;

    for (n, c, why) in table.skipped() {
        eprintln!("skipped {} x {c}: {why}", size_label(n));
    }
    if table.all_skipped() {
        return Err(Failure::Runtime(anyhow::anyhow!("every cell was rejected by the memory budget")));
    }

    let degradation = {
        let (small, large) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        let c = *a.chunks.iter().max().unwrap();
        (small != large)
            .then(|| table.degradation_pct(c, small, large).map(|d| (small, large, c, d)))
            .flatten()
    };
    let degradation_line = degradation.map(|(s, l, c, d)| {
        format!(
            "MFLOPS change from {} to {} at chunk {c}: {:+.1}% degradation",
            size_label(s),
            size_label(l),
            d
        )
    });

    let text = match a.format {
        TableFormat::Markdown => {
            let mut md = table.to_markdown();
            if let Some(line) = &degradation_line {
                md.push('\n');
                md.push_str(line);
                md.push('\n');
            }
            md
        }
        TableFormat::Csv => {
            if let Some(line) = &degradation_line {
                eprintln!("{line}");
            }
            table.to_csv()?
        }
    };
    emit(&text, a.out.as_deref())
}

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn budget(a: BudgetArgs) -> CmdResult {
    let text = a.capacity.as_deref().unwrap_or(DEFAULT_CAPACITY);
    let budget = MemoryBudget::parse_with(text, units(a.binary_units))
        .map_err(|e| Failure::Usage(format!("--capacity: {e}")))?;
    let limit = max_chunk_size(&budget, a.precision, Some(a.max_chunk))?;

    println!("budget {} bytes, precision {}", budget.capacity_bytes(), a.precision);
    println!("{:>8} {:>12} {:>12} {:>10} {:>12}  fits", "chunk", "input_B", "filter_B", "twiddle_B", "total_B");
    let top = limit.unclamped.max(a.max_chunk).saturating_mul(2);
    let mut c = 2usize;
    while c <= top {
        let fp = footprint(c, a.precision)?;
        println!(
            "{c:>8} {:>12} {:>12} {:>10} {:>12}  {}",
            fp.input_buffer_bytes,
            fp.filter_buffer_bytes,
            fp.twiddle_bytes,
            fp.total_bytes,
            if fp.fits(&budget) { "yes" } else { "no" }
        );
        c *= 2;
    }
    println!("largest chunk that fits: {}", limit.unclamped);
    println!(
        "max chunk size: {}{}",
        limit.chunk_size,
        if limit.clamped { format!(" (capped by engine limit {})", a.max_chunk) } else { String::new() }
    );
    Ok(())
}
