//! Shared JSON encodings: complex numbers are `[re, im]`, matrices are
//! row-major nested arrays of complex numbers.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matcore::ComplexMatrix;

/// Newtype carrying the shared matrix encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixJson(pub ComplexMatrix);

impl Serialize for MatrixJson {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        matrix::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for MatrixJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        matrix::deserialize(d).map(MatrixJson)
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Complex64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let rows: Vec<Vec<Complex64>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(D::Error::custom("matrix must have at least one row and column"));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        if rows
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

/// Serializes with a trailing newline, the form every artifact file uses.
pub fn to_canonical_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_is_byte_identical() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64 * 0.1, -(j as f64) / 3.0));
        let s = serde_json::to_string(&MatrixJson(m.clone())).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(serde_json::from_str::<MatrixJson>("[[[1,0]],[[1,0],[2,0]]]").is_err());
        assert!(serde_json::from_str::<MatrixJson>("[]").is_err());
    }
}
