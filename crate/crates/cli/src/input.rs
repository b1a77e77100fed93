use std::fs::File;
use std::io::{self, Read};

use betalogistic::Error;

/// Read observations from `path` (`-` for stdin): one value per line, or the
/// zero-based column `column` of a CSV file. A non-numeric first CSV row is
/// taken as a header.
pub fn read_observations(path: &str, column: Option<usize>) -> Result<Vec<f64>, Error> {
    let mut text = String::new();
    let io_err = |e: io::Error| Error::InvalidArgument(format!("cannot read {path}: {e}"));
    if path == "-" {
        io::stdin().read_to_string(&mut text).map_err(io_err)?;
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(io_err)?;
    }
    match column {
        None => parse_lines(&text),
        Some(k) => parse_csv_column(&text, k),
    }
}

fn parse_value(field: &str, line: usize) -> Result<f64, Error> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("line {line}: '{}' is not a number", field.trim())))
}

fn parse_lines(text: &str) -> Result<Vec<f64>, Error> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_value(l, i + 1))
        .collect()
}

fn parse_csv_column(text: &str, column: usize) -> Result<Vec<f64>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidArgument(format!("malformed CSV: {e}")))?;
        let field = record.get(column).ok_or_else(|| {
            Error::InvalidArgument(format!("line {}: no column {column}", i + 1))
        })?;
        match parse_value(field, i + 1) {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
