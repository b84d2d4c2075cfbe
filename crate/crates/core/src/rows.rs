//! Row-major nested-array (de)serialization for dense matrices.
//!
//! Matrices travel through JSON as `[[row0...], [row1...], ...]`. Ragged
//! input is rejected. An empty outer array is a `0 x 0` matrix; use
//! [`with_shape`] when a zero-column shape must be preserved.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|r| r.iter().copied().collect())
        .collect()
}

/// Builds a matrix from nested rows. `ncols_hint` fixes the column count
/// when there are rows but all of them are empty.
pub fn from_rows(rows: &[Vec<f64>], ncols_hint: Option<usize>) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).or(ncols_hint).unwrap_or(0);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(Error::InvalidInput(format!(
                "ragged matrix: row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<f64>, D::Error> {
    let rows = Vec::<Vec<f64>>::deserialize(d)?;
    from_rows(&rows, None).map_err(D::Error::custom)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &Option<DMatrix<f64>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<DMatrix<f64>>, D::Error> {
        let rows = Option::<Vec<Vec<f64>>>::deserialize(d)?;
        rows.map(|r| from_rows(&r, None))
            .transpose()
            .map_err(D::Error::custom)
    }
}

/// Reshapes a parsed matrix to `(nrows, ncols)`, accepting the degenerate
/// encodings of zero-sized matrices (`[]` or `[[], [], ...]`).
pub fn with_shape(m: DMatrix<f64>, nrows: usize, ncols: usize, name: &str) -> Result<DMatrix<f64>> {
    if m.shape() == (nrows, ncols) {
        return Ok(m);
    }
    if m.is_empty() && (nrows == 0 || ncols == 0) {
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    Err(Error::InvalidInput(format!(
        "{name} is {}x{}, expected {nrows}x{ncols}",
        m.nrows(),
        m.ncols()
    )))
}
