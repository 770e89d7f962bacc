//! Pharaoh alignment text: whitespace-separated `s-t` items, 0-based, one
//! line per sentence pair (the format written by fast_align and atools).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::WordAlignment;

#[derive(Debug, Error)]
pub enum PharaohError {
    #[error("line {line}: malformed link `{item}` at item {position}")]
    MalformedLink {
        line: usize,
        item: String,
        position: usize,
    },
    #[error("invalid UTF-8 in alignment input at byte offset {offset}")]
    Encoding { offset: usize },
    #[error("alignment file has {found} lines, corpus has {expected} pairs")]
    LineCountMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn parse_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses one line. Item positions in errors are 1-based; `line` is 0 for
/// single-line parses.
pub fn parse_pharaoh(line: &str) -> Result<WordAlignment, PharaohError> {
    parse_line(line, 0)
}

fn parse_line(line: &str, line_no: usize) -> Result<WordAlignment, PharaohError> {
    let mut alignment = WordAlignment::new();
    for (i, item) in line.split_whitespace().enumerate() {
        let link = item
            .split_once('-')
            .and_then(|(s, t)| Some((parse_index(s)?, parse_index(t)?)));
        match link {
            Some((s, t)) => {
                alignment.insert(s, t);
            }
            None => {
                return Err(PharaohError::MalformedLink {
                    line: line_no,
                    item: item.to_string(),
                    position: i + 1,
                })
            }
        }
    }
    Ok(alignment)
}

/// Links sorted by `(s, t)` and joined with single spaces.
pub fn format_pharaoh(alignment: &WordAlignment) -> String {
    let mut out = String::new();
    for (i, (s, t)) in alignment.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{s}-{t}"));
    }
    out
}

/// Parses a whole alignment file buffer. Line numbers in errors are 1-based.
pub fn parse_pharaoh_lines(bytes: &[u8]) -> Result<Vec<WordAlignment>, PharaohError> {
    let text = std::str::from_utf8(bytes).map_err(|e| PharaohError::Encoding {
        offset: e.valid_up_to(),
    })?;
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.strip_suffix('\n')
        .unwrap_or(text)
        .split('\n')
        .enumerate()
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// Reads an alignment file, checking it has one line per corpus pair when
/// `expected` is given.
pub fn read_pharaoh_file(
    path: &Path,
    expected: Option<usize>,
) -> Result<Vec<WordAlignment>, PharaohError> {
    let bytes = fs::read(path).map_err(|source| PharaohError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let alignments = parse_pharaoh_lines(&bytes)?;
    if let Some(expected) = expected {
        if alignments.len() != expected {
            return Err(PharaohError::LineCountMismatch {
                expected,
                found: alignments.len(),
            });
        }
    }
    Ok(alignments)
}

pub fn write_pharaoh_file(path: &Path, alignments: &[WordAlignment]) -> Result<(), PharaohError> {
    let io_err = |source| PharaohError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for a in alignments {
        writeln!(out, "{}", format_pharaoh(a)).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_links() {
        let a = parse_pharaoh("0-0 1-2 2-1").unwrap();
        assert_eq!(a, WordAlignment::from([(0, 0), (1, 2), (2, 1)]));
        assert!(parse_pharaoh("").unwrap().is_empty());
        assert!(parse_pharaoh("   ").unwrap().is_empty());
    }

    #[test]
    fn malformed_item_position() {
        match parse_pharaoh("0-0 x-1").unwrap_err() {
            PharaohError::MalformedLink { item, position, .. } => {
                assert_eq!(item, "x-1");
                assert_eq!(position, 2);
            }
            e => panic!("unexpected {e:?}"),
        }
        for bad in ["1-", "-1", "1-2-3", "+1-2", "1--2", "99999999999999999999999-0", "１-2"] {
            assert!(parse_pharaoh(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn formats_sorted() {
        assert_eq!(format_pharaoh(&WordAlignment::from([(1, 2), (0, 0)])), "0-0 1-2");
        assert_eq!(format_pharaoh(&WordAlignment::new()), "");
    }

    #[test]
    fn file_lines() {
        let all = parse_pharaoh_lines(b"0-0\n\n1-1 0-1\n").unwrap();
        assert_eq!(all.len(), 3);
        assert!(all[1].is_empty());
        match parse_pharaoh_lines(b"0-0\n0-z\n").unwrap_err() {
            PharaohError::MalformedLink { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn file_round_trip_and_count_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pharaoh");
        let alignments = vec![WordAlignment::from([(0, 1)]), WordAlignment::new()];
        write_pharaoh_file(&path, &alignments).unwrap();
        assert_eq!(read_pharaoh_file(&path, Some(2)).unwrap(), alignments);
        assert!(matches!(
            read_pharaoh_file(&path, Some(3)),
            Err(PharaohError::LineCountMismatch { expected: 3, found: 2 })
        ));
    }

    proptest! {
        #[test]
        fn format_then_parse(links in proptest::collection::btree_set((0usize..50, 0usize..50), 0..20)) {
            let a: WordAlignment = links.into_iter().collect();
            prop_assert_eq!(parse_pharaoh(&format_pharaoh(&a)).unwrap(), a);
        }
    }
}
