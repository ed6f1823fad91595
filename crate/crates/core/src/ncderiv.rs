//! The right difference-differential operator `Δf(x, y)(z)`, read off the
//! upper-right block of `f` at `[[x, t·z], [0, y]]`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{upper_triangular_point, Polyhedron};
use crate::error::{NcError, Result};
use crate::matcore::{self, ComplexMatrix};
use crate::ncpoly::{BlockDirection, FreePolynomial, MatrixTuple};
use crate::realization::{Colligation, TransferFunction};
use crate::transforms::BOUNDARY_MARGIN;

/// Most halvings tried when searching for an admissible `t`.
pub const MAX_HALVINGS: usize = 60;

/// An nc function this library can evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum NcFunction {
    Polynomial(FreePolynomial),
    Transfer(TransferFunction),
}

impl NcFunction {
    pub fn d(&self) -> usize {
        match self {
            NcFunction::Polynomial(p) => p.d(),
            NcFunction::Transfer(f) => f.d(),
        }
    }

    pub fn eval(&self, x: &MatrixTuple) -> Result<ComplexMatrix> {
        match self {
            NcFunction::Polynomial(p) => p.eval(x),
            NcFunction::Transfer(f) => f.eval(x),
        }
    }

    /// Whether `x` is safely inside the domain (polynomials are entire).
    pub fn admits(&self, x: &MatrixTuple) -> Result<bool> {
        match self {
            NcFunction::Polynomial(_) => Ok(true),
            NcFunction::Transfer(f) => {
                Ok(f.polyhedron().delta_norm(x)? < 1.0 - BOUNDARY_MARGIN)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NcFunctionRepr {
    Polynomial {
        poly: FreePolynomial,
    },
    Transfer {
        colligation: Colligation,
        delta: Polyhedron,
    },
}

impl Serialize for NcFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NcFunction::Polynomial(p) => NcFunctionRepr::Polynomial { poly: p.clone() },
            NcFunction::Transfer(f) => NcFunctionRepr::Transfer {
                colligation: f.colligation().clone(),
                delta: f.polyhedron().clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NcFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match NcFunctionRepr::deserialize(d)? {
            NcFunctionRepr::Polynomial { poly } => NcFunction::Polynomial(poly),
            NcFunctionRepr::Transfer { colligation, delta } => NcFunction::Transfer(
                TransferFunction::new(colligation, delta).map_err(serde::de::Error::custom)?,
            ),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NcDiff {
    pub value: ComplexMatrix,
    /// The scaling that was actually used.
    pub t: f64,
}

/// `Δf(x, y)(z)`, halving `t` from `t_hint` until the block point is admissible.
pub fn nc_diff(
    f: &NcFunction,
    x: &MatrixTuple,
    y: &MatrixTuple,
    z: &BlockDirection,
    t_hint: f64,
) -> Result<NcDiff> {
    if !(t_hint > 0.0) || !t_hint.is_finite() {
        return Err(NcError::InvalidParameter(format!(
            "t_hint must be positive, got {t_hint}"
        )));
    }
    let (n, m) = (x.n(), y.n());
    let mut t = t_hint;
    for _ in 0..=MAX_HALVINGS {
        let point = upper_triangular_point(x, y, z, Complex64::new(t, 0.0))?;
        if f.admits(&point)? {
            let fb = f.eval(&point)?;
            let lower_left = fb.view((n, 0), (m, n)).into_owned();
            let leak = matcore::op_norm(&lower_left)?;
            let scale = matcore::op_norm(&fb)?.max(1.0);
            if leak > 1e-10 * scale {
                return Err(NcError::BlockStructure(leak));
            }
            let w = fb.view((0, n), (n, m)).into_owned();
            return Ok(NcDiff {
                value: w.unscale(t),
                t,
            });
        }
        t /= 2.0;
    }
    Err(NcError::NoAdmissibleT(MAX_HALVINGS))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdCheck {
    pub fd_value: ComplexMatrix,
    pub delta_value: ComplexMatrix,
    pub gap: f64,
}

/// Compares the forward difference `(f(x+hz) − f(x))/h` with `Δf(x, x)(z)`.
pub fn fd_derivative_check(
    f: &NcFunction,
    x: &MatrixTuple,
    z: &MatrixTuple,
    h: f64,
) -> Result<FdCheck> {
    let moved = x.add_scaled(z, h)?;
    if !f.admits(&moved)? {
        return Err(NcError::OutsideDomain(match f {
            NcFunction::Transfer(tf) => tf.polyhedron().delta_norm(&moved)?,
            NcFunction::Polynomial(_) => f64::NAN,
        }));
    }
    let fd_value = (f.eval(&moved)? - f.eval(x)?).unscale(h);
    let delta_value = nc_diff(f, x, x, &BlockDirection::from(z.clone()), 1.0)?.value;
    let gap = matcore::op_norm(&(&fd_value - &delta_value))?;
    Ok(FdCheck {
        fd_value,
        delta_value,
        gap,
    })
}
