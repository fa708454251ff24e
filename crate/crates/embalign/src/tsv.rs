//! Tab-separated output files and atomic writes.
//!
//! Alignment files carry one pair per row, `src<TAB>tgt<TAB>score`, with the
//! score printed to exactly nine decimal places. All files are written
//! atomically (temporary file in the destination directory, then rename), so
//! a crashed run never leaves a truncated artifact behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `contents` to `path` via a temporary file and an atomic rename.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Formats one scored pair row. Scores are printed to nine decimal places;
/// parsing such a row and re-formatting it reproduces the bytes exactly.
pub fn format_pair_row(src: &str, tgt: &str, score: f64) -> String {
    format!("{src}\t{tgt}\t{score:.9}")
}

/// A row of a scored pair file. `score` is missing for two-column (gold)
/// files; text columns are present only for files written with texts.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub src: String,
    pub tgt: String,
    pub score: Option<f64>,
    pub src_text: Option<String>,
    pub tgt_text: Option<String>,
}

/// Reads a pair TSV with two to five columns per row.
pub fn read_pair_rows(path: impl AsRef<Path>) -> Result<Vec<PairRow>> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_pair_rows_str(&input, path)
}

/// In-memory variant of [`read_pair_rows`].
pub fn read_pair_rows_str(input: &str, origin: impl AsRef<Path>) -> Result<Vec<PairRow>> {
    let origin = origin.as_ref();
    let mut rows = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 5 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected 2..=5 tab-separated columns, got {}", cols.len()),
            ));
        }
        let score = match cols.get(2) {
            None => None,
            Some(raw) => Some(raw.parse::<f64>().map_err(|_| {
                Error::parse(origin, line_no, format!("unparseable score {raw:?}"))
            })?),
        };
        rows.push(PairRow {
            src: cols[0].to_owned(),
            tgt: cols[1].to_owned(),
            score,
            src_text: cols.get(3).map(|s| s.to_string()),
            tgt_text: cols.get(4).map(|s| s.to_string()),
        });
    }
    Ok(rows)
}

/// Replaces tabs and newlines so a sentence can ride along as a TSV column.
pub fn sanitize_text_column(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_rows_round_trip_at_nine_decimals() {
        let rows = [
            format_pair_row("a", "x", 0.123456789),
            format_pair_row("b", "y", 1.0 / 3.0),
            format_pair_row("c", "z", std::f64::consts::SQRT_2),
        ]
        .join("\n");
        let parsed = read_pair_rows_str(&rows, "mem").unwrap();
        let rewritten = parsed
            .iter()
            .map(|r| format_pair_row(&r.src, &r.tgt, r.score.unwrap()))
            .collect::<Vec<_>>()
            .join("\n");
        assert_eq!(rows, rewritten);
    }

    #[test]
    fn read_accepts_two_and_five_columns() {
        let rows = read_pair_rows_str("a\tb\nc\td\t0.5\te text\tf text", "mem").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].score, None);
        assert_eq!(rows[1].tgt_text.as_deref(), Some("f text"));
        assert!(read_pair_rows_str("lonely", "mem").is_err());
    }

    #[test]
    fn atomic_write_replaces_existing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.tsv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
    }
}
