use std::path::PathBuf;

use chunkfft::data_io::{FilterDistribution, NucleotideEncoding};
use chunkfft::Precision;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "chunkfft",
    version,
    about = "Chunked FFT long convolution under an on-chip memory budget",
    args_override_self = true
)]
pub struct Cli {
    /// key=value file mirroring the long flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convolve an input with a filter and write the result as CFFT.
    Convolve(ConvolveArgs),
    /// Compare chunked against direct convolution on seeded random inputs.
    Verify(VerifyArgs),
    /// Sweep dataset sizes x chunk sizes and print time, MFLOPS and breakdown tables.
    Bench(BenchArgs),
    /// Show the on-chip footprint per chunk size and the largest chunk that fits.
    Budget(BudgetArgs),
}

pub fn parse_chunk(s: &str) -> Result<usize, String> {
    let c: usize = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if c < 2 || !c.is_power_of_two() {
        return Err("chunk size must be a power of two >= 2".to_string());
    }
    Ok(c)
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse()
}

fn parse_encoding(s: &str) -> Result<NucleotideEncoding, String> {
    s.parse()
}

fn parse_distribution(s: &str) -> Result<FilterDistribution, String> {
    s.parse()
}

fn parse_workers(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err("worker count must be a positive integer".to_string()),
        Ok(n) => Ok(n),
    }
}

/// Engine flags shared by every subcommand that convolves.
#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    /// Numeric format of the transforms: single or double.
    #[arg(long, default_value = "single", value_parser = parse_precision)]
    pub precision: Precision,

    /// Transform each filter chunk once and reuse it for every pair.
    #[arg(long)]
    pub cache_filter: bool,

    /// Worker threads for the pair loop (1 = sequential).
    #[arg(long, default_value_t = 1, value_parser = parse_workers)]
    pub workers: usize,

    /// Largest chunk the engine accepts.
    #[arg(long, default_value_t = chunkfft::MAX_CHUNK_SIZE, value_parser = parse_chunk)]
    pub max_chunk: usize,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetFlags {
    /// On-chip memory budget in bytes, or with a suffix such as 2.8MB.
    #[arg(long, env = "CHUNKFFT_BUDGET")]
    pub budget: Option<String>,

    /// Read K/M/G suffixes as powers of 1024.
    #[arg(long)]
    pub binary_units: bool,
}

#[derive(Args, Debug)]
pub struct ConvolveArgs {
    /// Input signal as a CFFT file.
    #[arg(long = "x", value_name = "PATH", conflicts_with = "fasta", required_unless_present = "fasta")]
    pub x: Option<PathBuf>,

    /// Input sequence from a FASTA file.
    #[arg(long, value_name = "PATH")]
    pub fasta: Option<PathBuf>,

    /// FASTA record name; defaults to the first record.
    #[arg(long, requires = "fasta")]
    pub record: Option<String>,

    /// Region start within the record, in bases.
    #[arg(long, requires = "length")]
    pub offset: Option<usize>,

    /// Region length, in bases.
    #[arg(long)]
    pub length: Option<usize>,

    #[arg(long, default_value = "ordinal", value_parser = parse_encoding)]
    pub encoding: NucleotideEncoding,

    /// Filter as a CFFT file. Without it a seeded filter is generated.
    #[arg(long = "h", value_name = "PATH")]
    pub h: Option<PathBuf>,

    #[arg(long, default_value_t = 1, conflicts_with = "h")]
    pub filter_seed: u64,

    /// Generated filter length; defaults to the input length.
    #[arg(long, conflicts_with = "h")]
    pub filter_len: Option<usize>,

    #[arg(long, default_value = "uniform", value_parser = parse_distribution, conflicts_with = "h")]
    pub filter_dist: FilterDistribution,

    /// Samples per chunk (power of two).
    #[arg(long, default_value_t = chunkfft::MAX_CHUNK_SIZE, value_parser = parse_chunk)]
    pub chunk: usize,

    /// Keep only the first n_x output samples.
    #[arg(long)]
    pub causal: bool,

    /// Also compare against direct convolution and report the error.
    #[arg(long)]
    pub check: bool,

    #[command(flatten)]
    pub engine: EngineArgs,

    #[command(flatten)]
    pub budget: BudgetFlags,

    /// Output CFFT path.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated lengths (n_x = n_h = size).
    #[arg(long, value_delimiter = ',', default_value = "1,17,256,1000,4096")]
    pub sizes: Vec<String>,

    #[arg(long, value_delimiter = ',', default_value = "4,16,64,256,1024", value_parser = parse_chunk)]
    pub chunks: Vec<usize>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Read K as 1024 in size lists.
    #[arg(long)]
    pub k_binary: bool,

    #[command(flatten)]
    pub engine: EngineArgs,

    /// Perturb the chunked output before comparing (harness self-test).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated dataset sizes, e.g. 32K,160K,450K.
    #[arg(long, value_delimiter = ',', default_value = "32768")]
    pub sizes: Vec<String>,

    #[arg(long, value_delimiter = ',', default_value = "2048,4096,8192", value_parser = parse_chunk)]
    pub chunks: Vec<usize>,

    /// Read K as 1024 in size lists.
    #[arg(long)]
    pub k_binary: bool,

    #[arg(long, value_enum, default_value = "markdown")]
    pub format: TableFormat,

    /// Runs per cell; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,

    /// Seed for the synthetic sequence; the filter uses seed + 1.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Take inputs from this FASTA file instead of a synthetic sequence.
    #[arg(long, value_name = "PATH")]
    pub fasta: Option<PathBuf>,

    #[arg(long, requires = "fasta")]
    pub record: Option<String>,

    /// Start of the window taken from the FASTA record.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,

    #[arg(long, default_value = "ordinal", value_parser = parse_encoding)]
    pub encoding: NucleotideEncoding,

    /// Run cells concurrently (timings interfere).
    #[arg(long)]
    pub concurrent_cells: bool,

    /// Compare each cell with direct convolution (small sizes only).
    #[arg(long)]
    pub check: bool,

    #[command(flatten)]
    pub engine: EngineArgs,

    #[command(flatten)]
    pub budget: BudgetFlags,

    /// Write tables here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Capacity in bytes or with a suffix; defaults to 2.8MB.
    #[arg(long, env = "CHUNKFFT_BUDGET")]
    pub capacity: Option<String>,

    #[arg(long, default_value = "single", value_parser = parse_precision)]
    pub precision: Precision,

    /// Read K/M/G suffixes as powers of 1024.
    #[arg(long)]
    pub binary_units: bool,

    /// Engine chunk cap applied to the answer.
    #[arg(long, default_value_t = chunkfft::MAX_CHUNK_SIZE, value_parser = parse_chunk)]
    pub max_chunk: usize,
}
