use std::fmt::Write as _;

use super::{CellOutcome, ConvolutionReport, SweepTable};
use crate::error::{Error, Result};

/// `450000 -> "450K"`, `32768 -> "32K"`, otherwise the plain number.
pub fn size_label(n: usize) -> String {
    if n >= 1000 && n.is_multiple_of(1000) {
        format!("{}K", n / 1000)
    } else if n >= 1024 && n.is_multiple_of(1024) {
        format!("{}K", n / 1024)
    } else {
        n.to_string()
    }
}

pub fn chunk_label(c: usize) -> String {
    format!("{} Chunk", size_label(c))
}

impl SweepTable {
    pub fn report(&self, size: usize, chunk_size: usize) -> Option<&ConvolutionReport> {
        self.cells
            .iter()
            .find(|c| c.size == size && c.chunk_size == chunk_size)
            .and_then(|c| match &c.outcome {
                CellOutcome::Done(r) => Some(r.as_ref()),
                CellOutcome::Skipped(_) => None,
            })
    }

    pub fn reports(&self) -> impl Iterator<Item = &ConvolutionReport> {
        self.cells.iter().filter_map(|c| match &c.outcome {
            CellOutcome::Done(r) => Some(r.as_ref()),
            CellOutcome::Skipped(_) => None,
        })
    }

    /// `(size, chunk, reason)` for every cell the budget rejected.
    pub fn skipped(&self) -> impl Iterator<Item = (usize, usize, &str)> {
        self.cells.iter().filter_map(|c| match &c.outcome {
            CellOutcome::Skipped(why) => Some((c.size, c.chunk_size, why.as_str())),
            CellOutcome::Done(_) => None,
        })
    }

    pub fn all_skipped(&self) -> bool {
        self.reports().next().is_none()
    }

    /// Percentage drop in MFLOPS from the `small` dataset to the `large` one
    /// at a fixed chunk size. Positive means the larger input ran slower.
    pub fn degradation_pct(&self, chunk_size: usize, small: usize, large: usize) -> Option<f64> {
        let a = self.report(small, chunk_size)?.mflops;
        let b = self.report(large, chunk_size)?.mflops;
        Some(100.0 * (a - b) / a)
    }

    fn rows(&self) -> Vec<usize> {
        let mut rows = self.sizes.clone();
        rows.sort_unstable_by(|a, b| b.cmp(a));
        rows.dedup();
        rows
    }

    fn columns(&self) -> Vec<usize> {
        let mut cols = self.chunks.clone();
        cols.sort_unstable_by(|a, b| b.cmp(a));
        cols.dedup();
        cols
    }

    fn markdown_table(
        &self,
        title: &str,
        row_label: impl Fn(usize) -> String,
        cell: impl Fn(&ConvolutionReport) -> String,
    ) -> String {
        let cols = self.columns();
        let mut out = format!("**{title}**\n\n| Dataset Size |");
        for &c in &cols {
            let _ = write!(out, " {} |", chunk_label(c));
        }
        out.push_str("\n|---|");
        for _ in &cols {
            out.push_str("---|");
        }
        out.push('\n');
        for size in self.rows() {
            let _ = write!(out, "| {} |", row_label(size));
            for &c in &cols {
                let text = match self.report(size, c) {
                    Some(r) => cell(r),
                    None => "skipped".to_string(),
                };
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
        out
    }

    /// Execution time, throughput and phase breakdown as three Markdown
    /// tables, rows by dataset size and columns by chunk size, both descending.
    pub fn to_markdown(&self) -> String {
        let by = |n: usize| format!("{} by {}", size_label(n), size_label(n));
        let time = self.markdown_table("Execution Time (seconds)", by, |r| {
            format!("{:.4}", r.timings.total_s)
        });
        let mflops = self.markdown_table("Throughput (MFLOPS)", by, |r| format!("{:.1}", r.mflops));
        let breakdown = self.markdown_table(
            "Time Breakdown: Compute / Staging / Host (%)",
            size_label,
            |r| match r.breakdown() {
                Ok((c, s, h)) => format!("{c:.1} / {s:.1} / {h:.1}"),
                Err(_) => "n/a".to_string(),
            },
        );
        format!(
            "{time}\n{mflops}\n{breakdown}\n_FLOPs counted as 5·N·log2(N) per N-point transform, \
             6·N per spectral product, 2C-1 per overlap-add deposit._\n"
        )
    }

    /// One CSV row per completed cell. Seconds carry 6 decimals, MFLOPS 3,
    /// percentages 3 and bandwidth 4.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "n_x",
            "n_h",
            "chunk_size",
            "seconds",
            "mflops",
            "compute_pct",
            "staging_pct",
            "host_pct",
            "bandwidth_gbs",
        ])
        .map_err(csv_err)?;
        for r in self.reports() {
            let (c, s, h) = r.breakdown().unwrap_or((0.0, 0.0, 0.0));
            w.write_record([
                r.plan.n_x.to_string(),
                r.plan.n_h.to_string(),
                r.plan.chunk_size.to_string(),
                format!("{:.6}", r.timings.total_s),
                format!("{:.3}", r.mflops),
                format!("{c:.3}"),
                format!("{s:.3}"),
                format!("{h:.3}"),
                format!("{:.4}", r.bandwidth_gbs),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_err(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

fn csv_err(e: impl Into<std::io::Error>) -> Error {
    Error::Io(e.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{sweep, SweepOptions};
    use crate::ConvolutionConfig;

    #[test]
    fn labels() {
        assert_eq!(size_label(450_000), "450K");
        assert_eq!(size_label(32_768), "32K");
        assert_eq!(size_label(160_000), "160K");
        assert_eq!(size_label(1000), "1K");
        assert_eq!(size_label(100), "100");
        assert_eq!(chunk_label(8192), "8K Chunk");
        assert_eq!(chunk_label(2048), "2K Chunk");
    }

    #[test]
    fn markdown_layout() {
        let t = sweep(
            &[64, 128],
            &[4, 16, 8],
            &ConvolutionConfig::default(),
            &SweepOptions::default(),
            |n| Ok((vec![1.0; n], vec![1.0; n])),
        )
        .unwrap();
        let md = t.to_markdown();
        assert!(md.contains("| Dataset Size | 16 Chunk | 8 Chunk | 4 Chunk |"));
        let rows: Vec<&str> = md.lines().filter(|l| l.starts_with("| 128 by 128")).collect();
        assert_eq!(rows.len(), 2);
        let first_row = md.lines().position(|l| l.starts_with("| 128 by 128")).unwrap();
        let second_row = md.lines().position(|l| l.starts_with("| 64 by 64")).unwrap();
        assert!(first_row < second_row);
        assert!(md.contains("Time Breakdown"));

        let csv = t.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.starts_with("n_x,n_h,chunk_size,seconds,mflops"));
    }
}
