//! Free words, free polynomials in `d` noncommuting variables, matrices of
//! free polynomials, and matrix tuples to evaluate them on.

mod matpoly;
mod poly;
mod tuple;
mod word;

pub use matpoly::MatrixFreePolynomial;
pub use poly::{FreePolynomial, DEFAULT_MAX_DEGREE};
pub use tuple::{BlockDirection, MatrixTuple};
pub use word::FreeWord;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::NcError;
    use crate::matcore::{identity, max_abs_diff, ComplexMatrix};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn m2(a: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &a.map(c))
    }

    fn x(d: usize, i: usize) -> FreePolynomial {
        FreePolynomial::variable(d, i).unwrap()
    }

    #[test]
    fn constant_evaluates_to_identity() {
        let p = FreePolynomial::one(2);
        let pt = MatrixTuple::zeros(3, 2);
        assert_eq!(p.eval(&pt).unwrap(), identity(3));
    }

    #[test]
    fn commutator_of_matrix_units() {
        // x0 = E12, x1 = E21: x0x1 = E11, x1x0 = E22.
        let p = x(2, 0)
            .try_mul(&x(2, 1))
            .unwrap()
            .try_sub(&x(2, 1).try_mul(&x(2, 0)).unwrap())
            .unwrap();
        let pt = MatrixTuple::new(vec![m2([0., 1., 0., 0.]), m2([0., 0., 1., 0.])]).unwrap();
        assert_eq!(p.eval(&pt).unwrap(), m2([1., 0., 0., -1.]));
    }

    #[test]
    fn square_of_diagonal() {
        let p = x(1, 0).try_mul(&x(1, 0)).unwrap();
        let pt = MatrixTuple::new(vec![m2([0.3, 0., 0., -2.])]).unwrap();
        assert!(max_abs_diff(&p.eval(&pt).unwrap(), &m2([0.09, 0., 0., 4.])) < 1e-15);
    }

    #[test]
    fn evaluation_rejects_wrong_d() {
        let pt = MatrixTuple::zeros(2, 3);
        assert!(matches!(x(2, 0).eval(&pt), Err(NcError::DimensionMismatch(_))));
    }

    #[test]
    fn matpoly_block_evaluation() {
        let pt = MatrixTuple::from_scalars(&[c(0.2), c(-0.7)]).unwrap();
        let row = MatrixFreePolynomial::new(vec![vec![x(2, 0), x(2, 1)]]).unwrap();
        assert_eq!(
            row.eval(&pt).unwrap(),
            ComplexMatrix::from_row_slice(1, 2, &[c(0.2), c(-0.7)])
        );
        let diag = MatrixFreePolynomial::diagonal(vec![x(2, 0), x(2, 1)]).unwrap();
        assert_eq!(diag.eval(&pt).unwrap(), m2([0.2, 0., 0., -0.7]));
        let single = MatrixFreePolynomial::scalar(x(1, 0));
        let half = MatrixTuple::from_scalars(&[c(0.5)]).unwrap();
        assert_eq!(single.eval(&half).unwrap(), ComplexMatrix::from_element(1, 1, c(0.5)));
        assert!(single.vanishes_at_zero());
        assert!(!MatrixFreePolynomial::scalar(FreePolynomial::one(1)).vanishes_at_zero());
    }

    #[test]
    fn products() {
        let p = x(2, 0).try_mul(&x(2, 1)).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff(&FreeWord::from_letters([0, 1])), c(1.0));

        let one = FreePolynomial::one(1);
        let a = one.try_add(&x(1, 0)).unwrap();
        let b = one.try_sub(&x(1, 0)).unwrap();
        let prod = a.try_mul(&b).unwrap();
        let expect = one.try_sub(&x(1, 0).try_mul(&x(1, 0)).unwrap()).unwrap();
        assert_eq!(prod, expect);
        assert_eq!(prod.num_terms(), 2);

        let s = x(2, 0).try_add(&x(2, 1)).unwrap();
        let sq = s.try_mul(&s).unwrap();
        for w in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(sq.coeff(&FreeWord::from_letters(w)), c(1.0));
        }
        assert_eq!(sq.num_terms(), 4);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let p = FreePolynomial::monomial(1, FreeWord::power(0, 40), c(1.0)).unwrap();
        assert!(matches!(p.try_mul(&p), Err(NcError::DegreeCap { degree: 80, cap: 64 })));
        assert_eq!(p.mul_capped(&p, 80).unwrap().degree(), 80);
    }

    #[test]
    fn argument_scaling() {
        let p = x(1, 0).try_mul(&x(1, 0)).unwrap();
        assert_eq!(p.scale_argument(1.0).unwrap(), p);
        assert_eq!(p.scale_argument(0.5).unwrap(), p.scale(c(0.25)));
        assert!(p.scale_argument(0.0).is_err());
        assert!(p.scale_argument(-0.5).is_err());
    }

    #[test]
    fn json_is_canonical() {
        let p = FreePolynomial::from_terms(
            2,
            [
                (FreeWord::from_letters([1, 0]), c(2.0)),
                (FreeWord::from_letters([0]), c(-1.0)),
                (FreeWord::empty(), Complex64::new(0.5, 0.25)),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"d":2,"terms":[{"word":[],"coeff":[0.5,0.25]},{"word":[0],"coeff":[-1.0,0.0]},{"word":[1,0],"coeff":[2.0,0.0]}]}"#
        );
        let back: FreePolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_out_of_range_letters() {
        let s = r#"{"d":1,"terms":[{"word":[1],"coeff":[1.0,0.0]}]}"#;
        assert!(serde_json::from_str::<FreePolynomial>(s).is_err());
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let p = x(1, 0).try_sub(&x(1, 0)).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }
}
