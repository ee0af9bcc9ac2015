//! Plain-text vectors and matrices.
//!
//! Vectors hold one number per line; matrices hold comma-separated rows.
//! Numbers are written with 17 significant digits, which reproduces every
//! `f64` exactly on reading back.

use crate::error::{param_err, Result};

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = String::with_capacity(v.len() * 24);
    for x in v {
        out.push_str(&format_number(*x));
        out.push('\n');
    }
    out
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| param_err(format!("line {}: cannot parse '{}' as a number", line + 1, s.trim())))
}

/// Accepts one number per line or a single comma-separated line. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for cell in line.split(',') {
            out.push(parse_number(cell, i)?);
        }
    }
    if out.is_empty() {
        return Err(param_err("empty vector"));
    }
    Ok(out)
}

pub fn format_matrix(rows: usize, cols: usize, data: &[f64]) -> String {
    debug_assert_eq!(data.len(), rows * cols);
    let mut out = String::new();
    for r in 0..rows {
        let line: Vec<String> = data[r * cols..(r + 1) * cols].iter().map(|x| format_number(*x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Row-major matrix from CSV rows; returns `(rows, cols, data)`.
pub fn parse_matrix(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line.split(',').map(|c| parse_number(c, i)).collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(param_err(format!("line {}: expected {c} columns, found {}", i + 1, row.len())))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    match cols {
        Some(c) => Ok((rows, c, data)),
        None => Err(param_err("empty matrix")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip_is_exact() {
        let v = vec![0.1, 1.0 / 3.0, 2.5e-300, 1.7976931348623157e308, 5e-324];
        let text = format_vector(&v);
        assert_eq!(parse_vector(&text).unwrap(), v);
        assert_eq!(format_vector(&parse_vector(&text).unwrap()), text);
    }

    #[test]
    fn inline_and_comments() {
        assert_eq!(parse_vector("# p\n1, 2,3\n\n4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(parse_vector("1\nx").is_err());
        assert!(parse_vector("\n").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = vec![1.0, 0.0, 0.25, 2.0, 3.0, 1e-7];
        let text = format_matrix(2, 3, &m);
        assert_eq!(parse_matrix(&text).unwrap(), (2, 3, m));
        assert!(parse_matrix("1,2\n3").is_err());
    }
}
