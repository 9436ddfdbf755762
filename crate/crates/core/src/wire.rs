//! JSON layout for complex matrices: a list of rows, each row a list of
//! `[re, im]` pairs.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

pub type WireMatrix = Vec<Vec<[f64; 2]>>;

pub fn to_wire(m: &CMat) -> WireMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
        .collect()
}

/// Parses a wire matrix and checks it against the expected shape.
pub fn from_wire(w: &WireMatrix, rows: usize, cols: usize, what: &str) -> Result<CMat> {
    if w.len() != rows {
        return Err(Error::Format(format!(
            "{what}: expected {rows} rows, found {}",
            w.len()
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (r, row) in w.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Format(format!(
                "{what}: row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (k, e) in row.iter().enumerate() {
            if !e[0].is_finite() || !e[1].is_finite() {
                return Err(Error::Format(format!("{what}: non-finite entry at ({r}, {k})")));
            }
            m[(r, k)] = c(e[0], e[1]);
        }
    }
    Ok(m)
}
