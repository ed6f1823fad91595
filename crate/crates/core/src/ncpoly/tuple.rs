use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NcError, Result};
use crate::json::MatrixJson;
use crate::matcore::{self, ComplexMatrix};

/// A point of `M_n^d`: `d` square complex matrices of a common size `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    n: usize,
    mats: Vec<ComplexMatrix>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(NcError::InvalidParameter("matrix tuple needs d >= 1".into()));
        };
        let n = first.nrows();
        if n == 0 {
            return Err(NcError::InvalidParameter("matrix tuple needs level n >= 1".into()));
        }
        for m in &mats {
            if m.shape() != (n, n) {
                return Err(NcError::Shape(format!(
                    "tuple entries must all be {n}x{n}, found {:?}",
                    m.shape()
                )));
            }
            matcore::ensure_finite(m)?;
        }
        Ok(Self { n, mats })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            mats: vec![ComplexMatrix::zeros(n, n); d],
        }
    }

    /// Level-1 point from scalars.
    pub fn from_scalars(values: &[Complex64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&z| ComplexMatrix::from_element(1, 1, z))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &ComplexMatrix {
        &self.mats[i]
    }

    pub fn into_mats(self) -> Vec<ComplexMatrix> {
        self.mats
    }

    /// The C* norm `max_i ‖x_i‖`.
    pub fn norm(&self) -> Result<f64> {
        self.mats
            .iter()
            .try_fold(0.0, |acc, m| Ok(f64::max(acc, matcore::op_norm(m)?)))
    }

    pub fn scale(&self, t: f64) -> Self {
        self.map(|m| m.scale(t))
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        Self {
            n: self.n,
            mats: self.mats.iter().map(f).collect(),
        }
    }

    /// Entrywise sum `self + t·other`.
    pub fn add_scaled(&self, other: &MatrixTuple, t: f64) -> Result<Self> {
        if self.d() != other.d() || self.n != other.n {
            return Err(NcError::DimensionMismatch(format!(
                "cannot add tuples at (n={}, d={}) and (n={}, d={})",
                self.n,
                self.d(),
                other.n,
                other.d()
            )));
        }
        Ok(Self {
            n: self.n,
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| a + b.scale(t))
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TupleRepr {
    n: usize,
    d: usize,
    mats: Vec<MatrixJson>,
}

impl Serialize for MatrixTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TupleRepr {
            n: self.n,
            d: self.d(),
            mats: self.mats.iter().cloned().map(MatrixJson).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixTuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = TupleRepr::deserialize(d)?;
        if repr.mats.len() != repr.d {
            return Err(D::Error::custom(format!(
                "tuple declares d={} but carries {} matrices",
                repr.d,
                repr.mats.len()
            )));
        }
        let t = MatrixTuple::new(repr.mats.into_iter().map(|m| m.0).collect())
            .map_err(D::Error::custom)?;
        if t.n != repr.n {
            return Err(D::Error::custom(format!(
                "tuple declares n={} but matrices are {}x{}",
                repr.n, t.n, t.n
            )));
        }
        Ok(t)
    }
}

/// A `d`-tuple of `rows × cols` matrices: the direction argument of the
/// difference-differential operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDirection {
    rows: usize,
    cols: usize,
    mats: Vec<ComplexMatrix>,
}

impl BlockDirection {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(NcError::InvalidParameter("direction needs d >= 1".into()));
        };
        let (rows, cols) = first.shape();
        if mats.iter().any(|m| m.shape() != (rows, cols)) {
            return Err(NcError::Shape("direction matrices differ in shape".into()));
        }
        for m in &mats {
            matcore::ensure_finite(m)?;
        }
        Ok(Self { rows, cols, mats })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    /// C* norm `max_i ‖z_i‖`.
    pub fn norm(&self) -> Result<f64> {
        self.mats
            .iter()
            .try_fold(0.0, |acc, m| Ok(f64::max(acc, matcore::op_norm(m)?)))
    }

    pub fn scale(&self, t: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            mats: self.mats.iter().map(|m| m.scale(1.0) * t).collect(),
        }
    }

    pub fn add(&self, other: &BlockDirection) -> Result<Self> {
        if self.d() != other.d() || (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(NcError::DimensionMismatch("direction shapes differ".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect(),
        })
    }
}

impl From<MatrixTuple> for BlockDirection {
    fn from(t: MatrixTuple) -> Self {
        Self {
            rows: t.n,
            cols: t.n,
            mats: t.mats,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DirectionRepr {
    rows: usize,
    cols: usize,
    d: usize,
    mats: Vec<MatrixJson>,
}

impl Serialize for BlockDirection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DirectionRepr {
            rows: self.rows,
            cols: self.cols,
            d: self.d(),
            mats: self.mats.iter().cloned().map(MatrixJson).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockDirection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = DirectionRepr::deserialize(d)?;
        let z = BlockDirection::new(repr.mats.into_iter().map(|m| m.0).collect())
            .map_err(D::Error::custom)?;
        if z.d() != repr.d || z.rows != repr.rows || z.cols != repr.cols {
            return Err(D::Error::custom("direction header disagrees with its matrices"));
        }
        Ok(z)
    }
}
