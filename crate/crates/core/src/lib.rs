//! Long 1D convolution by chunked radix-2 FFTs.
//!
//! Input and filter are split into power-of-two chunks, every chunk pair is
//! convolved in the frequency domain with a transform of twice the chunk
//! length, and the partial results are summed back together by overlap-add.
//! The chunk size is bounded by a [`MemoryBudget`] that stands in for the
//! on-chip RAM of an accelerator.
//!
//! ```
//! use chunkfft::{chunked_convolve, ConvolutionConfig};
//!
//! let cfg = ConvolutionConfig::new(2);
//! let y = chunked_convolve(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &cfg).unwrap();
//! let expected = [4.0, 13.0, 28.0, 27.0, 18.0];
//! for (a, b) in y.iter().zip(expected) {
//!     assert!((a - b).abs() < 1e-4);
//! }
//! ```

pub mod conv;
pub mod data_io;
mod engine;
mod error;
pub mod fft;
pub mod memory;
pub mod pipeline;
mod sample;

pub use conv::{
    causal_truncate, chunked_convolve, chunked_convolve_with_stats, convolve_chunk_pair,
    direct_convolve, overlap_add, plan_chunks, ChunkPlan, ConvolutionConfig, ExecStats,
};
pub use error::{Error, Result};
pub use fft::{bit_reverse_permute, fft_forward, fft_inverse, ComplexBuffer, TwiddleTable};
pub use memory::{footprint, max_chunk_size, ByteUnits, ChunkLimit, MemoryBudget, MemoryFootprint};
pub use num_complex::Complex;
pub use pipeline::{
    breakdown_percentages, flop_count, run_instrumented, sweep, ConvolutionReport, PhaseTimings,
    RunOptions, SweepOptions, SweepTable,
};
pub use sample::{Precision, Sample};

/// Largest chunk the engine accepts by default, in samples.
pub const MAX_CHUNK_SIZE: usize = 8_192;

/// Largest transform the engine builds by default (two chunks of support).
pub const MAX_FFT_LEN: usize = 2 * MAX_CHUNK_SIZE;
