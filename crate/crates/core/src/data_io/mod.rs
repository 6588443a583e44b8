//! Sequence ingest, filter generation and the CFFT sample format.

mod cfft;
mod fasta;
mod filter;

pub use cfft::{decode_samples, encode_samples, read_samples, write_samples, SampleFile, CFFT_VERSION};
pub use fasta::{
    encode_nucleotides, load_fasta, synthetic_sequence, EncodedSequence, FastaOptions,
    NucleotideEncoding, Region,
};
pub use filter::{generate_filter, FilterDistribution, FilterSpec, SplitMix64};
