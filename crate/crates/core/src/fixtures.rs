//! Stock defining polynomials and functions used by the verification suites,
//! the examples and the tests.

use num_complex::Complex64;

use crate::domain::Polyhedron;
use crate::matcore::ComplexMatrix;
use crate::ncpoly::{FreePolynomial, FreeWord, MatrixFreePolynomial};
use crate::realization::{Colligation, TransferFunction};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn term(d: usize, letters: &[usize], coeff: f64) -> FreePolynomial {
    FreePolynomial::monomial(d, FreeWord::from_letters(letters.iter().copied()), c(coeff))
        .expect("fixture letters are in range")
}

/// `δ(x) = [x0]`: the row ball in one variable.
pub fn identity_delta() -> Polyhedron {
    Polyhedron::new(MatrixFreePolynomial::scalar(term(1, &[0], 1.0))).expect("vanishes at 0")
}

/// `δ(x) = diag(x0, …, x_{d−1})`: the nc polydisc.
pub fn polydisc_delta(d: usize) -> Polyhedron {
    let diag = (0..d).map(|i| term(d, &[i], 1.0)).collect();
    Polyhedron::new(MatrixFreePolynomial::diagonal(diag).expect("d >= 1")).expect("vanishes at 0")
}

/// A non-homogeneous 2×2 `δ` in two variables:
/// `[[x0, x0x1/2], [x1²/2, x1]]`.
pub fn quadratic_delta() -> Polyhedron {
    let rows = vec![
        vec![term(2, &[0], 1.0), term(2, &[0, 1], 0.5)],
        vec![term(2, &[1, 1], 0.5), term(2, &[1], 1.0)],
    ];
    Polyhedron::new(MatrixFreePolynomial::new(rows).expect("square")).expect("vanishes at 0")
}

/// `δ(x) = [x0 + x0²/2]`: non-homogeneous but scalar and univariate.
pub fn univariate_quadratic_delta() -> Polyhedron {
    let p = term(1, &[0], 1.0).try_add(&term(1, &[0, 0], 0.5)).expect("same d");
    Polyhedron::new(MatrixFreePolynomial::scalar(p)).expect("vanishes at 0")
}

pub fn stock_deltas() -> Vec<Polyhedron> {
    vec![identity_delta(), polydisc_delta(2), quadratic_delta()]
}

/// `f = δ` for a scalar `δ`, realized with `dimX = 1`, `A = 0`, `B = C = 1`.
pub fn delta_itself(polyhedron: Polyhedron) -> TransferFunction {
    assert_eq!((polyhedron.s(), polyhedron.r()), (1, 1), "needs a 1x1 delta");
    let one = ComplexMatrix::from_element(1, 1, c(1.0));
    let col = Colligation::new(
        1,
        1,
        1,
        ComplexMatrix::zeros(1, 1),
        one.clone(),
        one,
        c(0.0),
    )
    .expect("swap is unitary");
    TransferFunction::new(col, polyhedron).expect("shapes agree")
}

/// Regular random colligation with `dimX = 2` on the row ball.
pub fn stock_transfer() -> TransferFunction {
    let col = Colligation::random(2, 1, 1, true, 42).expect("valid shape");
    TransferFunction::new(col, identity_delta()).expect("shapes agree")
}

/// The constant function `e^{iπ/3}·I` on the nc polydisc in two variables.
pub fn constant_transfer() -> TransferFunction {
    let col = Colligation::constant(2, 2, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3), 7)
        .expect("valid shape");
    TransferFunction::new(col, polydisc_delta(2)).expect("shapes agree")
}
