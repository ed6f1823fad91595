//! Dense complex matrix kernels shared by every other module.
//!
//! Everything here operates on [`ComplexMatrix`], a plain `nalgebra` dense
//! matrix of `Complex64`. The sizes this library works with stay in the low
//! hundreds, so the kernels favour full decompositions (SVD, Hermitian
//! eigendecomposition, LU with partial pivoting) over iterative methods.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{NcError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Default slack for positive-semidefiniteness tests.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Condition number above which a linear solve is reported as near-singular.
pub const CONDITION_LIMIT: f64 = 1e12;

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(NcError::NonFinite)
    }
}

fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(NcError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

/// Power iteration on `M*M`. Much cheaper than [`op_norm`] but only
/// approximate; it is never used for a decision without a cross-check.
pub fn op_norm_power(m: &ComplexMatrix, iterations: usize) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let n = gram.nrows();
    // Deterministic start with no special alignment.
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + i as f64 * 0.37, 0.25 - 0.11 * i as f64)
    });
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.norm();
        v = w.unscale(norm);
    }
    lambda.sqrt()
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Smallest eigenvalue of the Hermitian part `(M + M*) / 2`.
///
/// Passing a non-Hermitian matrix is allowed and yields the spectral floor
/// of its real part, which is what the Herglotz checks need.
pub fn hermitian_min_eig(m: &ComplexMatrix) -> Result<f64> {
    ensure_square(m)?;
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    Ok(eig.eigenvalues.min())
}

/// PSD test of the Hermitian part with an explicit slack.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(hermitian_min_eig(m)? >= -tol)
}

/// Ratio of extreme singular values; `inf` for singular input.
pub fn condition_number(m: &ComplexMatrix) -> Result<f64> {
    ensure_square(m)?;
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(1.0);
    }
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

fn guard_condition(a: &ComplexMatrix) -> Result<()> {
    let cond = condition_number(a)?;
    if cond > CONDITION_LIMIT || !cond.is_finite() {
        return Err(NcError::NearSingular {
            condition: cond,
            norm: op_norm(a)?,
        });
    }
    Ok(())
}

/// Solves `A X = B` by LU with partial pivoting, refusing near-singular `A`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(NcError::Shape(format!(
            "solve: {}x{} system with {} right-hand-side rows",
            n,
            n,
            b.nrows()
        )));
    }
    ensure_finite(b)?;
    guard_condition(a)?;
    a.clone().lu().solve(b).ok_or(NcError::NearSingular {
        condition: f64::INFINITY,
        norm: op_norm(a)?,
    })
}

/// Solves `X A = B`, i.e. returns `B A⁻¹`.
pub fn solve_right(b: &ComplexMatrix, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    if b.ncols() != n {
        return Err(NcError::Shape(format!(
            "solve_right: {}x{} system with {} right-hand-side cols",
            n,
            n,
            b.ncols()
        )));
    }
    Ok(solve(&a.transpose(), &b.transpose())?.transpose())
}

/// `(I - M)⁻¹ R` via a linear solve.
pub fn resolvent_apply(m: &ComplexMatrix, r: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    let lhs = identity(n) - m;
    solve(&lhs, r)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `I_k ⊗ M`.
pub fn kron_identity_left(k: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = m.shape();
    let mut out = ComplexMatrix::zeros(k * r, k * c);
    for b in 0..k {
        out.view_mut((b * r, b * c), (r, c)).copy_from(m);
    }
    out
}

/// `M ⊗ I_k`.
pub fn kron_identity_right(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let (r, c) = m.shape();
    let mut out = ComplexMatrix::zeros(r * k, c * k);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            if z != Complex64::new(0.0, 0.0) {
                for t in 0..k {
                    out[(i * k + t, j * k + t)] = z;
                }
            }
        }
    }
    out
}

pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar + br, ac + bc);
    out.view_mut((0, 0), (ar, ac)).copy_from(a);
    out.view_mut((ar, ac), (br, bc)).copy_from(b);
    out
}

/// Assembles a block matrix from a row-major grid of equally shaped blocks.
pub fn assemble_blocks(blocks: &[Vec<ComplexMatrix>]) -> Result<ComplexMatrix> {
    let rows = blocks.len();
    let cols = blocks.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(NcError::Shape("empty block grid".into()));
    }
    let (br, bc) = blocks[0][0].shape();
    let mut out = ComplexMatrix::zeros(rows * br, cols * bc);
    for (i, row) in blocks.iter().enumerate() {
        if row.len() != cols {
            return Err(NcError::Shape("ragged block grid".into()));
        }
        for (j, blk) in row.iter().enumerate() {
            if blk.shape() != (br, bc) {
                return Err(NcError::Shape(format!(
                    "block ({i},{j}) is {:?}, expected {:?}",
                    blk.shape(),
                    (br, bc)
                )));
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(blk);
        }
    }
    Ok(out)
}

/// Max-abs entrywise distance; a cheap companion to operator-norm gaps.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
