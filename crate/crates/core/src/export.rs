//! Text encodings for traces and coefficient matrices.
//!
//! Traces are CSV with header `theta_deg,power_w,power_db_norm`. Matrices are
//! one line per row `n` (ascending), comma-separated columns `m`
//! (ascending). Numbers carry nine significant digits.

use ndarray::Array2;

use crate::alphabet::sig9;
use crate::error::{Error, Result};
use crate::pattern::PatternTrace;

pub const TRACE_HEADER: &str = "theta_deg,power_w,power_db_norm";

fn fmt(v: f64) -> String {
    if v.is_finite() {
        sig9(v)
    } else {
        v.to_string()
    }
}

pub fn trace_csv(trace: &PatternTrace) -> String {
    let mut out = String::with_capacity(48 * trace.len() + 32);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for ((a, p), db) in trace.angles.iter().zip(&trace.power).zip(&trace.power_db_normalized) {
        out.push_str(&format!("{},{},{}\n", fmt(*a), fmt(*p), fmt(*db)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceColumns {
    pub angles: Vec<f64>,
    pub power: Vec<f64>,
    pub power_db_normalized: Vec<f64>,
}

pub fn parse_trace_csv(text: &str) -> Result<TraceColumns> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header `{TRACE_HEADER}`") }),
    }
    let mut cols = TraceColumns::default();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        if vals.len() != 3 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 3 columns, found {}", vals.len()) });
        }
        cols.angles.push(vals[0]);
        cols.power.push(vals[1]);
        cols.power_db_normalized.push(vals[2]);
    }
    Ok(cols)
}

pub fn matrix_text(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        match cols {
            None => cols = Some(vals.len()),
            Some(c) if c != vals.len() => {
                return Err(Error::Parse { line: i + 1, msg: "ragged matrix row".into() })
            }
            _ => {}
        }
        data.extend(vals);
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), data)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
}
