//! CSV ingestion and output.
//!
//! Input holds one sample per row: either a single numeric column or several
//! columns (for example `timestamp,value`) of which one is selected. A header
//! is assumed when the first cell of the first row does not parse as a number.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Which column holds the samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ValueColumn {
    /// A column named `value` if the header has one, else the last column.
    #[default]
    Auto,
    /// Header name.
    Name(String),
    /// 0-based position.
    Index(usize),
}

impl ValueColumn {
    /// Digits select by index, anything else by name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ValueColumn::Index(i),
            Err(_) => ValueColumn::Name(s.to_string()),
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// Reads a series from CSV text.
pub fn read_series_from<R: Read>(reader: R, column: &ValueColumn) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records().enumerate().peekable();

    let header: Option<Vec<String>> = match rows.peek() {
        Some((_, Ok(rec))) if rec.get(0).is_some_and(|c| parse_number(c).is_none()) => {
            Some(rec.iter().map(str::to_string).collect())
        }
        _ => None,
    };
    if header.is_some() {
        rows.next();
    }

    let pick = |width: usize| -> Result<usize> {
        match (column, &header) {
            (ValueColumn::Index(i), _) if *i < width => Ok(*i),
            (ValueColumn::Index(i), _) => Err(Error::Config(format!(
                "value column {i} out of range for {width} columns"
            ))),
            (ValueColumn::Name(n), Some(h)) => h
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| Error::Config(format!("no column named `{n}`"))),
            (ValueColumn::Name(n), None) => Err(Error::Config(format!(
                "column `{n}` requested but the file has no header"
            ))),
            (ValueColumn::Auto, Some(h)) => {
                Ok(h.iter().position(|c| c.eq_ignore_ascii_case("value")).unwrap_or(width - 1))
            }
            (ValueColumn::Auto, None) => Ok(width - 1),
        }
    };

    let mut col: Option<usize> = None;
    let mut values = Vec::new();
    for (i, rec) in rows {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let c = match col {
            Some(c) => c,
            None => {
                let c = match &header {
                    Some(h) => pick(h.len())?,
                    None => pick(rec.len())?,
                };
                col = Some(c);
                c
            }
        };
        let name = header
            .as_ref()
            .and_then(|h| h.get(c).cloned())
            .unwrap_or_else(|| c.to_string());
        let cell = rec.get(c).ok_or_else(|| Error::Parse {
            row,
            column: name.clone(),
            message: "missing field".into(),
        })?;
        let v = parse_number(cell).ok_or_else(|| Error::Parse {
            row,
            column: name.clone(),
            message: format!("`{cell}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                column: name,
                message: format!("`{cell}` is not finite"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: "-".into(),
            message: "no samples".into(),
        });
    }
    TimeSeries::new(values)
}

/// Reads a series from a CSV file; the series is named after the file stem.
pub fn read_series(path: impl AsRef<Path>, column: &ValueColumn) -> Result<TimeSeries> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let s = read_series_from(f, column)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(match name {
        Some(n) => s.with_name(n),
        None => s,
    })
}

/// Shortest round-trip text for `x`; exponent notation outside `[1e-4, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Writes `t,value` rows with 1-based `t`.
pub fn write_series_to<W: Write>(writer: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let wrap = |e: csv::Error| Error::Malformed(e.to_string());
    w.write_record(["t", "value"]).map_err(wrap)?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format_float(*v)]).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_series(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series_to(f, values).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str, c: ValueColumn) -> Result<TimeSeries> {
        read_series_from(s.as_bytes(), &c)
    }

    #[test]
    fn single_column_no_header() {
        assert_eq!(read("1\n2.5\n-3\n", ValueColumn::Auto).unwrap().values(), &[1.0, 2.5, -3.0]);
    }

    #[test]
    fn timestamp_value_with_header() {
        let s = "timestamp,value\n2020-01-01,1\n2020-01-02,2\n";
        assert_eq!(read(s, ValueColumn::Auto).unwrap().values(), &[1.0, 2.0]);
        assert_eq!(read(s, ValueColumn::Name("value".into())).unwrap().values(), &[1.0, 2.0]);
    }

    #[test]
    fn select_by_index() {
        let s = "1,10\n2,20\n";
        assert_eq!(read(s, ValueColumn::Index(0)).unwrap().values(), &[1.0, 2.0]);
        assert_eq!(read(s, ValueColumn::Auto).unwrap().values(), &[10.0, 20.0]);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let s = "t,value\n1,3\n2,abc\n";
        match read(s, ValueColumn::Auto) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "value");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn write_then_read() {
        let mut buf = Vec::new();
        let v = [0.1, -2.0, 1e-17];
        write_series_to(&mut buf, &v).unwrap();
        assert_eq!(read_series_from(buf.as_slice(), &ValueColumn::Auto).unwrap().values(), &v);
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.0, 1e-17, -2.5e-5, 0.1, 123.0, 3e20, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1e-8), "1e-8");
        assert_eq!(format_float(0.25), "0.25");
    }

    #[test]
    fn unknown_column() {
        assert!(matches!(read("a,b\n1,2\n", ValueColumn::Name("x".into())), Err(Error::Config(_))));
    }
}
