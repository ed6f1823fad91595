use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::FreePolynomial;
use super::tuple::MatrixTuple;
use crate::error::{NcError, Result};
use crate::matcore::{assemble_blocks, ComplexMatrix};

/// An `s × r` array of free polynomials over a shared `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFreePolynomial {
    s: usize,
    r: usize,
    d: usize,
    entries: Vec<FreePolynomial>,
}

impl MatrixFreePolynomial {
    pub fn new(rows: Vec<Vec<FreePolynomial>>) -> Result<Self> {
        let s = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        if s == 0 || r == 0 {
            return Err(NcError::Shape("polynomial matrix must be at least 1x1".into()));
        }
        if rows.iter().any(|row| row.len() != r) {
            return Err(NcError::Shape("ragged polynomial matrix".into()));
        }
        let d = rows[0][0].d();
        if rows.iter().flatten().any(|p| p.d() != d) {
            return Err(NcError::DimensionMismatch(
                "polynomial matrix entries use different d".into(),
            ));
        }
        Ok(Self {
            s,
            r,
            d,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn scalar(p: FreePolynomial) -> Self {
        Self {
            s: 1,
            r: 1,
            d: p.d(),
            entries: vec![p],
        }
    }

    /// Diagonal matrix with the given entries and zeros elsewhere.
    pub fn diagonal(polys: Vec<FreePolynomial>) -> Result<Self> {
        let k = polys.len();
        let d = polys.first().map_or(0, FreePolynomial::d);
        let rows = polys
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                (0..k)
                    .map(|j| if i == j { p.clone() } else { FreePolynomial::zero(d) })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &FreePolynomial {
        &self.entries[i * self.r + j]
    }

    pub fn entries(&self) -> impl Iterator<Item = &FreePolynomial> {
        self.entries.iter()
    }

    /// True iff no entry has a nonzero constant term.
    pub fn vanishes_at_zero(&self) -> bool {
        self.entries.iter().all(|p| p.constant_term() == Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(FreePolynomial::degree).max().unwrap_or(0)
    }

    /// Common degree when every nonzero entry is homogeneous of that degree.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degree = None;
        for p in self.entries.iter().filter(|p| !p.is_zero()) {
            let k = p.homogeneous_degree()?;
            match degree {
                None => degree = Some(k),
                Some(prev) if prev != k => return None,
                _ => {}
            }
        }
        degree
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|p| p.scale(c)).collect(),
            ..self.clone()
        }
    }

    /// Block evaluation: an `(s·n) × (r·n)` matrix whose `(i, j)` block is
    /// `δ_ij(x)`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<ComplexMatrix> {
        if x.d() != self.d {
            return Err(NcError::DimensionMismatch(format!(
                "polynomial matrix over d={} evaluated at a point with d={}",
                self.d,
                x.d()
            )));
        }
        let blocks = (0..self.s)
            .map(|i| {
                (0..self.r)
                    .map(|j| self.entry(i, j).eval(x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        assemble_blocks(&blocks)
    }
}

#[derive(Serialize, Deserialize)]
struct MatPolyRepr {
    s: usize,
    r: usize,
    d: usize,
    entries: Vec<Vec<FreePolynomial>>,
}

impl Serialize for MatrixFreePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatPolyRepr {
            s: self.s,
            r: self.r,
            d: self.d,
            entries: self.entries.chunks(self.r).map(<[_]>::to_vec).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixFreePolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = MatPolyRepr::deserialize(d)?;
        let m = MatrixFreePolynomial::new(repr.entries).map_err(D::Error::custom)?;
        if (m.s, m.r, m.d) != (repr.s, repr.r, repr.d) {
            return Err(D::Error::custom(format!(
                "header (s={}, r={}, d={}) disagrees with entries (s={}, r={}, d={})",
                repr.s, repr.r, repr.d, m.s, m.r, m.d
            )));
        }
        Ok(m)
    }
}
