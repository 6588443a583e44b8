use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use super::filter::SplitMix64;
use crate::error::{Error, Result};

/// Nucleotide to real-sample map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NucleotideEncoding {
    /// A→1, C→2, G→3, T→4, anything else→0.
    #[default]
    Ordinal,
    /// A→-1.5, C→-0.5, G→0.5, T→1.5, anything else→0.
    Centered,
}

impl NucleotideEncoding {
    #[inline]
    fn map(self, base: u8) -> Option<f64> {
        let idx = match base.to_ascii_uppercase() {
            b'A' => 0,
            b'C' => 1,
            b'G' => 2,
            b'T' => 3,
            _ => return None,
        };
        Some(match self {
            NucleotideEncoding::Ordinal => (idx + 1) as f64,
            NucleotideEncoding::Centered => idx as f64 - 1.5,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            NucleotideEncoding::Ordinal => "ordinal",
            NucleotideEncoding::Centered => "centered",
        }
    }
}

impl fmt::Display for NucleotideEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NucleotideEncoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ordinal" => Ok(NucleotideEncoding::Ordinal),
            "centered" => Ok(NucleotideEncoding::Centered),
            other => Err(format!("unknown nucleotide encoding {other:?}")),
        }
    }
}

/// Encodes bases case-insensitively. Returns the samples and how many
/// characters fell outside A/C/G/T (those encode as 0).
pub fn encode_nucleotides(bases: &[u8], encoding: NucleotideEncoding) -> (Vec<f64>, usize) {
    let mut unknown = 0;
    let samples = bases
        .iter()
        .map(|&b| {
            encoding.map(b).unwrap_or_else(|| {
                unknown += 1;
                0.0
            })
        })
        .collect();
    (samples, unknown)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSequence {
    pub samples: Vec<f64>,
    /// `path[:record][@offset+len]` or `synthetic:<seed>`.
    pub source: String,
    pub encoding: NucleotideEncoding,
    pub unknown_count: usize,
}

/// Window into a record, in bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FastaOptions {
    /// Record name (first word of the header); `None` takes the first record.
    pub record: Option<String>,
    pub region: Option<Region>,
    pub encoding: NucleotideEncoding,
}

// IUPAC nucleotide codes plus gap characters.
fn is_iupac(b: u8) -> bool {
    matches!(
        b.to_ascii_uppercase(),
        b'A' | b'C' | b'G' | b'T' | b'U' | b'R' | b'Y' | b'S' | b'W' | b'K' | b'M' | b'B'
            | b'D' | b'H' | b'V' | b'N' | b'-' | b'.'
    )
}

/// Reads one record of a FASTA file and encodes it. With a region, reading
/// stops as soon as the window is covered, so large genomes need not be
/// loaded whole.
pub fn load_fasta(path: impl AsRef<Path>, opts: &FastaOptions) -> Result<EncodedSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);

    let wanted_end = opts.region.map(|r| r.offset.saturating_add(r.len));
    let mut in_record = false;
    let mut found = false;
    let mut seen_header = false;
    let mut bases: Vec<u8> = Vec::new();

    for (idx, line) in reader.split(b'\n').enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_ascii();
        if line.is_empty() {
            continue;
        }
        if line[0] == b'>' {
            if found {
                break;
            }
            seen_header = true;
            let name = line[1..]
                .split(|b| b.is_ascii_whitespace())
                .next()
                .unwrap_or_default();
            in_record = match &opts.record {
                None => true,
                Some(want) => name == want.as_bytes(),
            };
            found = in_record;
            continue;
        }
        if line[0] == b';' {
            continue;
        }
        if !seen_header {
            return Err(Error::MalformedFasta {
                line: line_no,
                reason: "sequence data before the first '>' header".to_string(),
            });
        }
        if let Some(&bad) = line.iter().find(|&&b| !is_iupac(b)) {
            return Err(Error::MalformedFasta {
                line: line_no,
                reason: format!("invalid nucleotide character {:?}", bad as char),
            });
        }
        if in_record {
            bases.extend_from_slice(line);
            if wanted_end.is_some_and(|end| bases.len() >= end) {
                break;
            }
        }
    }

    if !seen_header {
        return Err(Error::MalformedFasta {
            line: 1,
            reason: "no '>' header found".to_string(),
        });
    }
    if !found {
        return Err(Error::RecordNotFound(opts.record.clone().unwrap_or_default()));
    }

    let mut source = path.display().to_string();
    if let Some(name) = &opts.record {
        source.push(':');
        source.push_str(name);
    }
    let window = match opts.region {
        Some(r) => {
            if r.len == 0 {
                return Err(Error::shape("region length must be at least 1"));
            }
            match r.offset.checked_add(r.len) {
                Some(end) if end <= bases.len() => {}
                _ => {
                    return Err(Error::RegionOutOfBounds {
                        offset: r.offset,
                        len: r.len,
                        available: bases.len(),
                    })
                }
            }
            source.push_str(&format!("@{}+{}", r.offset, r.len));
            &bases[r.offset..r.offset + r.len]
        }
        None => &bases[..],
    };
    if window.is_empty() {
        return Err(Error::shape("FASTA record has an empty sequence"));
    }

    let (samples, unknown_count) = encode_nucleotides(window, opts.encoding);
    Ok(EncodedSequence {
        samples,
        source,
        encoding: opts.encoding,
        unknown_count,
    })
}

/// Uniformly random A/C/G/T sequence for runs without a genome file.
pub fn synthetic_sequence(len: usize, seed: u64, encoding: NucleotideEncoding) -> Result<EncodedSequence> {
    if len == 0 {
        return Err(Error::shape("sequence length must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let bases: Vec<u8> = (0..len)
        .map(|_| b"ACGT"[(rng.next_u64() >> 62) as usize])
        .collect();
    let (samples, unknown_count) = encode_nucleotides(&bases, encoding);
    Ok(EncodedSequence {
        samples,
        source: format!("synthetic:{seed}"),
        encoding,
        unknown_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fasta(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn encode_examples() {
        assert_eq!(
            encode_nucleotides(b"acgt", NucleotideEncoding::Ordinal),
            (vec![1.0, 2.0, 3.0, 4.0], 0)
        );
        assert_eq!(
            encode_nucleotides(b"AAXA", NucleotideEncoding::Ordinal),
            (vec![1.0, 1.0, 0.0, 1.0], 1)
        );
        assert_eq!(
            encode_nucleotides(b"ACGTN", NucleotideEncoding::Centered),
            (vec![-1.5, -0.5, 0.5, 1.5, 0.0], 1)
        );
    }

    #[test]
    fn load_examples() {
        let f = fasta(">r\nACGT\n");
        let s = load_fasta(f.path(), &FastaOptions::default()).unwrap();
        assert_eq!(s.samples, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.unknown_count, 0);

        let f = fasta(">r\nNNNN\n");
        let s = load_fasta(f.path(), &FastaOptions::default()).unwrap();
        assert_eq!(s.samples, vec![0.0; 4]);
        assert_eq!(s.unknown_count, 4);

        let f = fasta(">r\nACGT\n");
        let opts = FastaOptions {
            region: Some(Region { offset: 1, len: 2 }),
            ..Default::default()
        };
        let s = load_fasta(f.path(), &opts).unwrap();
        assert_eq!(s.samples, vec![2.0, 3.0]);
        assert!(s.source.ends_with("@1+2"));
    }

    #[test]
    fn multiline_and_named_records() {
        let f = fasta(">chr1 first\nAC\ngt\n\n>chr2\nTTTT\nAA\n>chr3\nC\n");
        let s = load_fasta(f.path(), &FastaOptions::default()).unwrap();
        assert_eq!(s.samples, vec![1.0, 2.0, 3.0, 4.0]);

        let opts = FastaOptions {
            record: Some("chr2".into()),
            region: Some(Region { offset: 3, len: 3 }),
            ..Default::default()
        };
        let s = load_fasta(f.path(), &opts).unwrap();
        assert_eq!(s.samples, vec![4.0, 1.0, 1.0]);
    }

    #[test]
    fn error_kinds_are_distinct() {
        let missing = load_fasta("/nonexistent/definitely/not/here.fa", &FastaOptions::default());
        assert!(matches!(missing, Err(Error::Open { .. })));

        let f = fasta("ACGT\n");
        assert!(matches!(
            load_fasta(f.path(), &FastaOptions::default()),
            Err(Error::MalformedFasta { line: 1, .. })
        ));

        let f = fasta(">r\nAC1T\n");
        assert!(matches!(
            load_fasta(f.path(), &FastaOptions::default()),
            Err(Error::MalformedFasta { line: 2, .. })
        ));

        let f = fasta(">r\nACGT\n");
        let opts = FastaOptions {
            region: Some(Region { offset: 3, len: 2 }),
            ..Default::default()
        };
        assert!(matches!(
            load_fasta(f.path(), &opts),
            Err(Error::RegionOutOfBounds { available: 4, .. })
        ));

        let opts = FastaOptions {
            record: Some("chrZ".into()),
            ..Default::default()
        };
        assert!(matches!(load_fasta(f.path(), &opts), Err(Error::RecordNotFound(_))));

        let f = fasta(">empty\n>next\nA\n");
        assert!(matches!(
            load_fasta(f.path(), &FastaOptions::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn synthetic_is_seeded() {
        let a = synthetic_sequence(1000, 7, NucleotideEncoding::Ordinal).unwrap();
        let b = synthetic_sequence(1000, 7, NucleotideEncoding::Ordinal).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.unknown_count, 0);
        assert!(a.samples.iter().all(|&v| (1.0..=4.0).contains(&v)));
        assert_eq!(a.source, "synthetic:7");
        assert!(synthetic_sequence(0, 7, NucleotideEncoding::Ordinal).is_err());
    }
}
