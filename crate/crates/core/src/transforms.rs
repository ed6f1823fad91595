//! Pointwise matrix Cayley transforms between contractions and matrices with
//! positive real part, the disc automorphisms `φ_α`, and the Herglotz bounds.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NcError, Result};
use crate::matcore::{self, identity, ComplexMatrix};

/// Distance from the unit sphere required of arguments that must be strict
/// contractions; floating point cannot witness strict inequality exactly.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// `(I + F)(I − F)⁻¹` for `‖F‖ < 1`.
pub fn cayley_s2h(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = square(f)?;
    let norm = matcore::op_norm(f)?;
    if norm >= 1.0 - BOUNDARY_MARGIN {
        return Err(NcError::InvalidParameter(format!(
            "Cayley transform needs a strict contraction, got norm {norm}"
        )));
    }
    let id = identity(n);
    matcore::solve_right(&(&id + f), &(&id - f))
}

/// `(H − I)(H + I)⁻¹` for `Re H ⪰ 0`.
pub fn cayley_h2s(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = square(h)?;
    let floor = matcore::hermitian_min_eig(h)?;
    if floor < -matcore::DEFAULT_PSD_TOL {
        return Err(NcError::InvalidParameter(format!(
            "inverse Cayley transform needs Re H >= 0, got spectral floor {floor}"
        )));
    }
    let id = identity(n);
    matcore::solve_right(&(h - &id), &(h + &id))
}

/// `φ_α(w) = (w − αI)(I − ᾱw)⁻¹`.
pub fn mobius_phi(w: &ComplexMatrix, alpha: Complex64) -> Result<ComplexMatrix> {
    let n = square(w)?;
    if alpha.norm() >= 1.0 {
        return Err(NcError::InvalidParameter(format!(
            "Möbius parameter must satisfy |α| < 1, got {alpha}"
        )));
    }
    let norm = matcore::op_norm(w)?;
    if norm > 1.0 + 1e-10 {
        return Err(NcError::InvalidParameter(format!(
            "Möbius map needs ‖w‖ <= 1, got {norm}"
        )));
    }
    let id = identity(n);
    matcore::solve_right(&(w - &id * alpha), &(&id - w * alpha.conj()))
}

fn square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(NcError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HerglotzBounds {
    /// `(1−r)/(1+r)`: lower bound on `Re h(x)` as a multiple of `I`.
    pub lower_real_part: f64,
    /// `(1+r)/(1−r)`: upper bound on `‖h(x)‖`.
    pub upper_norm: f64,
}

pub fn herglotz_bounds(r: f64) -> Result<HerglotzBounds> {
    if !(0.0..1.0).contains(&r) {
        return Err(NcError::InvalidParameter(format!(
            "Herglotz bounds need 0 <= r < 1, got {r}"
        )));
    }
    Ok(HerglotzBounds {
        lower_real_part: (1.0 - r) / (1.0 + r),
        upper_norm: (1.0 + r) / (1.0 - r),
    })
}

/// Lipschitz constant of `F ↦ (I+F)(I−F)⁻¹` on contractions of norm `≤ r`.
pub fn s2h_lipschitz(r: f64) -> f64 {
    3.0 / (1.0 - r).powi(2)
}

/// Lipschitz constant of `H ↦ (H−I)(H+I)⁻¹` on matrices obeying the
/// Herglotz bounds at norm `r`.
pub fn h2s_lipschitz(r: f64) -> f64 {
    (1.0 / (1.0 - r)).sqrt() + 2.0 / (1.0 - r).powi(2)
}
