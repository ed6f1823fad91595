//! Reproducible random instance generation.
//!
//! Every stochastic routine takes a 64-bit seed and an index; sample `i` is
//! drawn from ChaCha stream `i` of the seed, so results do not depend on the
//! order or the thread in which samples are produced.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::ComplexMatrix;
use crate::ncpoly::{FreePolynomial, FreeWord, MatrixTuple};

pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Gaussian tuple at level `n`, entries scaled by `1/√n` so norms stay O(1).
pub fn gaussian_tuple<R: Rng>(rng: &mut R, n: usize, d: usize) -> MatrixTuple {
    let scale = 1.0 / (n as f64).sqrt();
    MatrixTuple::new((0..d).map(|_| gaussian_matrix(rng, n, n).scale(scale)).collect())
        .expect("gaussian tuple is well formed")
}

/// Haar-distributed unitary via QR with the phase correction of Mezzadri.
pub fn haar_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        }
    });
    q * ComplexMatrix::from_diagonal(&phases)
}

/// Invertible matrix `U Σ V*` with singular values in `[1, cond]`.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize, cond: f64) -> ComplexMatrix {
    let u = haar_unitary(rng, n);
    let v = haar_unitary(rng, n);
    let sigma = DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(1.0..=cond), 0.0));
    u * ComplexMatrix::from_diagonal(&sigma) * v.adjoint()
}

/// Random polynomial with `terms` words of length `0..=max_degree` and
/// Gaussian coefficients of scale `coeff_scale`.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    d: usize,
    max_degree: usize,
    terms: usize,
    coeff_scale: f64,
) -> FreePolynomial {
    let words = (0..terms).map(|_| {
        let len = rng.random_range(0..=max_degree);
        let w = FreeWord::from_letters((0..len).map(|_| rng.random_range(0..d)));
        (w, complex_gaussian(rng) * coeff_scale)
    });
    let words: Vec<_> = words.collect();
    FreePolynomial::from_terms(d, words).expect("letters drawn below d")
}
