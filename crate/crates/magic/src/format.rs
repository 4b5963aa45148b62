//! Versioned text formats.
//!
//! Every file starts with `# format=1` followed by a `# kind=...` line.
//! Other `#` lines are metadata; blank lines are ignored.
//!
//! - catalog: one square per line in canonical encoding (row-major values,
//!   single spaces), in search order.
//! - classification: tab-separated records keyed by catalog line number,
//!   columns `line square dudeney trigg vi_split broken_diagonals orbit_id
//!   generator`; `-` marks an absent value. A `.kv` sidecar carries the same
//!   records as `key=value` blocks.
//! - group listing: one transformation per line,
//!   `rows=<perm> cols=<perm> transposed=<0|1>`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use magic_core::classify::{Dudeney, Trigg, ViSplit};
use magic_core::{Error as CoreError, Square, Transformation};

use crate::{Error, Result};

pub const FORMAT_HEADER: &str = "# format=1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("expected {expected} values, found {found}")]
    TokenCount { expected: usize, found: usize },
    #[error("`{token}` is not an integer")]
    NotInteger { token: String },
    #[error("value {value} at position {index} is outside 1..={max}")]
    OutOfRange {
        index: usize,
        value: i64,
        max: usize,
    },
    #[error("value {value} at position {index} appears twice")]
    Duplicate { index: usize, value: i64 },
    #[error("{0}")]
    Field(String),
}

/// Parses one canonical line into an order-`order` square.
pub fn parse_square(line: &str, order: usize) -> Result<Square, ParseError> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let expected = order * order;
    if tokens.len() != expected {
        return Err(ParseError::TokenCount {
            expected,
            found: tokens.len(),
        });
    }
    let values = tokens
        .iter()
        .map(|t| {
            t.parse::<i64>().map_err(|_| ParseError::NotInteger {
                token: t.to_string(),
            })
        })
        .collect::<Result<Vec<i64>, _>>()?;
    Square::from_values(order, &values).map_err(|e| match e {
        CoreError::ValueOutOfRange { index, value, max } => {
            ParseError::OutOfRange { index, value, max }
        }
        CoreError::DuplicateValue { index, value } => ParseError::Duplicate { index, value },
        other => ParseError::Field(other.to_string()),
    })
}

/// Order implied by a line's token count.
pub fn infer_order(line: &str) -> Option<usize> {
    let count = line.split_whitespace().count();
    (1..=magic_core::square::MAX_ORDER).find(|n| n * n == count)
}

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data lines with their 1-based line numbers in the file.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(|l| l.trim_start_matches('#').split_whitespace())
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
}

fn check_header(path: &Path, text: &str, kind: &str) -> Result<()> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    if text.lines().next() != Some(FORMAT_HEADER) {
        return Err(bad(format!("missing `{FORMAT_HEADER}` header")));
    }
    match header_value(text, "kind") {
        Some(k) if k == kind => Ok(()),
        Some(k) => Err(bad(format!("expected a {kind} file, found {k}"))),
        None => Err(bad("missing `# kind=` header".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub order: usize,
    pub squares: Vec<Square>,
}

pub fn render_catalog<'a>(order: usize, squares: impl IntoIterator<Item = &'a Square>) -> String {
    let mut out = format!("{FORMAT_HEADER}\n# kind=catalog order={order}\n");
    for s in squares {
        out.push_str(&s.to_text());
        out.push('\n');
    }
    out
}

pub fn write_catalog(path: &Path, catalog: &Catalog) -> Result<()> {
    write_atomic(path, &render_catalog(catalog.order, &catalog.squares))
}

pub fn parse_catalog(path: &Path, text: &str) -> Result<Catalog> {
    check_header(path, text, "catalog")?;
    let mut lines = data_lines(text).peekable();
    let order = header_value(text, "order")
        .and_then(|o| o.parse().ok())
        .or_else(|| lines.peek().and_then(|(_, l)| infer_order(l)))
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: "cannot determine the square order".into(),
        })?;
    let squares = lines
        .map(|(line, l)| {
            parse_square(l, order).map_err(|source| Error::Parse {
                path: path.to_path_buf(),
                line,
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Catalog { order, squares })
}

pub fn read_catalog(path: &Path) -> Result<Catalog> {
    parse_catalog(path, &read(path)?)
}

/// One classified catalog entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogRecord {
    /// 1-based position in the catalog.
    pub line: usize,
    pub square: Square,
    pub dudeney: Dudeney,
    pub trigg: Trigg,
    pub vi_split: Option<ViSplit>,
    pub broken_diagonals: usize,
    pub orbit_id: Option<usize>,
    pub is_generator: bool,
}

const CLASS_COLUMNS: &str =
    "line\tsquare\tdudeney\ttrigg\tvi_split\tbroken_diagonals\torbit_id\tgenerator";

pub fn render_classification(records: &[CatalogRecord]) -> String {
    let mut out =
        format!("{FORMAT_HEADER}\n# kind=classification order=4\n# columns={CLASS_COLUMNS}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.line,
            r.square,
            r.dudeney,
            r.trigg,
            r.vi_split.map_or("-", ViSplit::marker),
            r.broken_diagonals,
            r.orbit_id
                .map_or_else(|| "-".to_string(), |o| o.to_string()),
            u8::from(r.is_generator),
        );
    }
    out
}

/// Same records as `key=value` lines, one blank-line-separated block each.
pub fn render_classification_kv(records: &[CatalogRecord]) -> String {
    let mut out = format!("{FORMAT_HEADER}\n# kind=classification-kv order=4\n");
    for r in records {
        let _ = writeln!(out, "\nline={}", r.line);
        let _ = writeln!(out, "square={}", r.square);
        let _ = writeln!(out, "dudeney={}", r.dudeney);
        let _ = writeln!(out, "trigg={}", r.trigg);
        let _ = writeln!(out, "vi_split={}", r.vi_split.map_or("-", ViSplit::marker));
        let _ = writeln!(out, "broken_diagonals={}", r.broken_diagonals);
        match r.orbit_id {
            Some(id) => {
                let _ = writeln!(out, "orbit_id={id}");
            }
            None => out.push_str("orbit_id=-\n"),
        }
        let _ = writeln!(out, "generator={}", u8::from(r.is_generator));
    }
    out
}

fn parse_record(line: &str) -> Result<CatalogRecord, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 8 {
        return Err(ParseError::Field(format!(
            "expected 8 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let field = |what: &str| ParseError::Field(format!("bad {what}"));
    let square = parse_square(fields[1], 4)?;
    let dudeney = Dudeney::from_numeral(fields[2]).ok_or_else(|| field("dudeney numeral"))?;
    let trigg = Trigg::from_letter(fields[3]).ok_or_else(|| field("trigg letter"))?;
    let vi_split = match fields[4] {
        "-" => None,
        m => Some(ViSplit::from_marker(m).ok_or_else(|| field("vi split marker"))?),
    };
    let orbit_id = match fields[6] {
        "-" => None,
        o => Some(o.parse().map_err(|_| field("orbit id"))?),
    };
    if dudeney.trigg() != trigg {
        return Err(field("trigg letter for this numeral"));
    }
    Ok(CatalogRecord {
        line: fields[0].parse().map_err(|_| field("line number"))?,
        square,
        dudeney,
        trigg,
        vi_split,
        broken_diagonals: fields[5]
            .parse()
            .map_err(|_| field("broken diagonal count"))?,
        orbit_id,
        is_generator: match fields[7] {
            "0" => false,
            "1" => true,
            _ => return Err(field("generator flag")),
        },
    })
}

pub fn parse_classification(path: &Path, text: &str) -> Result<Vec<CatalogRecord>> {
    check_header(path, text, "classification")?;
    data_lines(text)
        .map(|(line, l)| {
            parse_record(l).map_err(|source| Error::Parse {
                path: path.to_path_buf(),
                line,
                source,
            })
        })
        .collect()
}

pub fn read_classification(path: &Path) -> Result<Vec<CatalogRecord>> {
    parse_classification(path, &read(path)?)
}

pub fn render_group(
    trigg: Option<Trigg>,
    order: usize,
    members: &[Transformation],
    pair_view_order: usize,
) -> String {
    let mut out = format!("{FORMAT_HEADER}\n# kind=group order={order}");
    if let Some(t) = trigg {
        let _ = write!(out, " trigg={t}");
    }
    let _ = writeln!(out, "\n# group_order={}", members.len());
    let _ = writeln!(out, "# pair_view_order={pair_view_order}");
    for t in members {
        let _ = writeln!(out, "{t}");
    }
    out
}

/// Parses a listing line back into a transformation.
pub fn parse_transformation(line: &str) -> Result<Transformation, ParseError> {
    let mut rows = None;
    let mut cols = None;
    let mut transposed = None;
    let digits = |s: &str| -> Result<Vec<u8>, ParseError> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| ParseError::Field(format!("bad permutation `{s}`")))
            })
            .collect()
    };
    for part in line.split_whitespace() {
        match part.split_once('=') {
            Some(("rows", v)) => rows = Some(digits(v)?),
            Some(("cols", v)) => cols = Some(digits(v)?),
            Some(("transposed", "0")) => transposed = Some(false),
            Some(("transposed", "1")) => transposed = Some(true),
            _ => return Err(ParseError::Field(format!("unexpected `{part}`"))),
        }
    }
    match (rows, cols, transposed) {
        (Some(r), Some(c), Some(t)) => {
            Transformation::new(r, c, t).map_err(|e| ParseError::Field(e.to_string()))
        }
        _ => Err(ParseError::Field("incomplete transformation".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn durer() -> Square {
        Square::new(
            4,
            vec![16, 3, 2, 13, 5, 10, 11, 8, 9, 6, 7, 12, 4, 15, 14, 1],
        )
        .unwrap()
    }

    #[test]
    fn parse_errors_are_distinct() {
        let d = parse_square("16 3 2 13 5 10 11 8 9 6 7 12 4 15 14 1", 4).unwrap();
        assert_eq!(d, durer());
        assert_eq!(
            parse_square("16 3 2 13 5 10 11 8 9 6 7 12 4 15 14", 4),
            Err(ParseError::TokenCount {
                expected: 16,
                found: 15
            })
        );
        assert!(matches!(
            parse_square("16 3 2 13 5 10 11 8 9 6 7 12 4 15 14 x", 4),
            Err(ParseError::NotInteger { .. })
        ));
        assert!(matches!(
            parse_square("0 3 2 13 5 10 11 8 9 6 7 12 4 15 14 1", 4),
            Err(ParseError::OutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            parse_square("16 3 2 13 5 10 11 8 9 6 7 12 4 15 14 16", 4),
            Err(ParseError::Duplicate { index: 15, .. })
        ));
        let messages: std::collections::BTreeSet<String> = [
            ParseError::TokenCount {
                expected: 16,
                found: 15,
            },
            ParseError::NotInteger { token: "x".into() },
            ParseError::OutOfRange {
                index: 0,
                value: 0,
                max: 16,
            },
            ParseError::Duplicate {
                index: 15,
                value: 16,
            },
        ]
        .iter()
        .map(|e| e.to_string())
        .collect();
        assert_eq!(messages.len(), 4);
    }

    #[test]
    fn catalog_headers() {
        let text = render_catalog(4, [&durer()]);
        assert!(text.starts_with("# format=1\n# kind=catalog order=4\n"));
        let p = Path::new("x");
        assert_eq!(parse_catalog(p, &text).unwrap().squares, vec![durer()]);
        assert!(parse_catalog(p, "16 3 2 13\n").is_err());
        assert!(parse_catalog(p, "# format=1\n# kind=group\n").is_err());
    }

    #[test]
    fn classification_round_trip() {
        let record = CatalogRecord {
            line: 1,
            square: durer(),
            dudeney: Dudeney::VI,
            trigg: Trigg::B,
            vi_split: Some(ViSplit::DoublePrime),
            broken_diagonals: 2,
            orbit_id: Some(7),
            is_generator: false,
        };
        let text = render_classification(std::slice::from_ref(&record));
        let back = parse_classification(Path::new("x"), &text).unwrap();
        assert_eq!(back, vec![record.clone()]);
        let kv = render_classification_kv(&[record]);
        assert!(kv.contains("\nvi_split=VI''\n"));
        assert!(kv.contains("\norbit_id=7\n"));
    }

    #[test]
    fn bad_record_fields() {
        let text = format!(
            "{FORMAT_HEADER}\n# kind=classification order=4\n1\t{}\tI\tB\t-\t2\t-\t0\n",
            durer()
        );
        let err = parse_classification(Path::new("c.tsv"), &text).unwrap_err();
        assert!(err.to_string().contains("c.tsv:3"), "{err}");
    }

    #[test]
    fn transformation_lines() {
        let t = Transformation::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3], true).unwrap();
        assert_eq!(t.to_string(), "rows=1032 cols=0123 transposed=1");
        assert_eq!(parse_transformation(&t.to_string()).unwrap(), t);
        assert!(parse_transformation("rows=1032").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert!(!dir.path().join("sub/out.txt.tmp").exists());
    }
}
