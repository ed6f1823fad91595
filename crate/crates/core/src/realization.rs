//! Unitary colligations and the transfer functions they realize on a
//! polynomial polyhedron:
//!
//! ```text
//! f(x) = D⊗I + (C⊗I) (I − (I_X⊗δ(x))(A⊗I))⁻¹ (I_X⊗δ(x)) (B⊗I)
//! ```
//!
//! `U = [[A, B], [C, D]]` maps `(X⊗ℂ^s) ⊕ ℂ` to `(X⊗ℂ^r) ⊕ ℂ`. Tensor
//! indices are ordered with the auxiliary space outermost: row `ξ·r + j` of
//! `A` is basis vector `e_ξ ⊗ e_j`, and at level `n` each of those expands to
//! an `n × n` block.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::Polyhedron;
use crate::error::{NcError, Result};
use crate::json::MatrixJson;
use crate::matcore::{self, identity, kron_identity_left, kron_identity_right, ComplexMatrix};
use crate::ncpoly::{FreePolynomial, MatrixTuple};
use crate::random::{gaussian_matrix, haar_unitary, stream_rng};

/// Default unitarity tolerance for colligations.
pub const UNITARITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Colligation {
    dim_x: usize,
    s: usize,
    r: usize,
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitarityCheck {
    pub residual: f64,
    pub pass: bool,
}

impl Colligation {
    /// Builds a colligation and checks that `U` is unitary to
    /// [`UNITARITY_TOL`].
    pub fn new(
        dim_x: usize,
        s: usize,
        r: usize,
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: Complex64,
    ) -> Result<Self> {
        let col = Self::from_blocks(dim_x, s, r, a, b, c, d)?;
        let check = col.check_unitary(UNITARITY_TOL);
        if !check.pass {
            return Err(NcError::NotUnitary {
                residual: check.residual,
                tol: UNITARITY_TOL,
            });
        }
        Ok(col)
    }

    /// Shape-checked construction without the unitarity requirement; only
    /// useful for inspecting candidate blocks with [`Self::check_unitary`].
    pub fn from_blocks(
        dim_x: usize,
        s: usize,
        r: usize,
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: Complex64,
    ) -> Result<Self> {
        if dim_x == 0 || s == 0 || r == 0 {
            return Err(NcError::Shape("dimX, s and r must be positive".into()));
        }
        let (out_dim, in_dim) = (dim_x * r, dim_x * s);
        let expect = [
            ("A", a.shape(), (out_dim, in_dim)),
            ("B", b.shape(), (out_dim, 1)),
            ("C", c.shape(), (1, in_dim)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(NcError::Shape(format!(
                    "block {name} is {got:?}, expected {want:?} for dimX={dim_x}, s={s}, r={r}"
                )));
            }
        }
        for m in [&a, &b, &c] {
            matcore::ensure_finite(m)?;
        }
        Ok(Self {
            dim_x,
            s,
            r,
            a,
            b,
            c,
            d,
        })
    }

    /// Haar-like random colligation with `s = r`.
    ///
    /// For `regular`, the unitary is post-rotated so that its last column is
    /// orthogonal to the last basis vector, which makes `D` vanish while
    /// keeping `U` unitary.
    pub fn random(dim_x: usize, s: usize, r: usize, regular: bool, seed: u64) -> Result<Self> {
        if dim_x == 0 {
            return Err(NcError::InvalidParameter("dimX must be >= 1".into()));
        }
        if s != r {
            return Err(NcError::Shape(format!(
                "a unitary colligation needs dimX·s = dimX·r, got s={s}, r={r}"
            )));
        }
        let m = dim_x * s + 1;
        let mut rng = stream_rng(seed, 0);
        let w = haar_unitary(&mut rng, m);
        let mut u = if regular {
            // w_last = W* e_m; pick v ⟂ w_last and send e_m to v.
            let w_last = w.row(m - 1).adjoint();
            let g = gaussian_matrix(&mut rng, m, 1);
            let proj = &w_last * (w_last.adjoint() * &g)[(0, 0)];
            let v = &g - proj;
            let v = v.unscale(v.norm());
            let mut basis = gaussian_matrix(&mut rng, m, m);
            basis.set_column(0, &v.column(0));
            let q = basis.qr().q();
            let mut p = ComplexMatrix::zeros(m, m);
            for j in 0..m {
                p.set_column(j, &q.column((j + 1) % m));
            }
            &w * p
        } else {
            w
        };
        if regular {
            u[(m - 1, m - 1)] = ZERO;
        }
        let n = m - 1;
        Self::new(
            dim_x,
            s,
            r,
            u.view((0, 0), (n, n)).into_owned(),
            u.view((0, n), (n, 1)).into_owned(),
            u.view((n, 0), (1, n)).into_owned(),
            u[(n, n)],
        )
    }

    /// A colligation with `B = 0`, `C = 0` and `|D| = 1`: the constant
    /// function `D·I`.
    pub fn constant(dim_x: usize, s: usize, d: Complex64, seed: u64) -> Result<Self> {
        let n = dim_x * s;
        let mut rng = stream_rng(seed, 0);
        Self::new(
            dim_x,
            s,
            s,
            haar_unitary(&mut rng, n),
            ComplexMatrix::zeros(n, 1),
            ComplexMatrix::zeros(1, n),
            d,
        )
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn is_regular(&self) -> bool {
        self.d == ZERO
    }

    /// The assembled block operator `[[A, B], [C, D]]`.
    pub fn unitary(&self) -> ComplexMatrix {
        let (rows, cols) = self.a.shape();
        let mut u = ComplexMatrix::zeros(rows + 1, cols + 1);
        u.view_mut((0, 0), (rows, cols)).copy_from(&self.a);
        u.view_mut((0, cols), (rows, 1)).copy_from(&self.b);
        u.view_mut((rows, 0), (1, cols)).copy_from(&self.c);
        u[(rows, cols)] = self.d;
        u
    }

    /// `max(‖U*U − I‖, ‖UU* − I‖)` against `tol`.
    pub fn check_unitary(&self, tol: f64) -> UnitarityCheck {
        let u = self.unitary();
        let left = u.adjoint() * &u - identity(u.ncols());
        let right = &u * u.adjoint() - identity(u.nrows());
        let residual = matcore::op_norm(&left)
            .and_then(|l| Ok(l.max(matcore::op_norm(&right)?)))
            .unwrap_or(f64::INFINITY);
        UnitarityCheck {
            residual,
            pass: residual <= tol,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ColligationRepr {
    #[serde(rename = "dimX")]
    dim_x: usize,
    s: usize,
    r: usize,
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "B")]
    b: MatrixJson,
    #[serde(rename = "C")]
    c: MatrixJson,
    #[serde(rename = "D")]
    d: MatrixJson,
}

impl Serialize for Colligation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ColligationRepr {
            dim_x: self.dim_x,
            s: self.s,
            r: self.r,
            a: MatrixJson(self.a.clone()),
            b: MatrixJson(self.b.clone()),
            c: MatrixJson(self.c.clone()),
            d: MatrixJson(ComplexMatrix::from_element(1, 1, self.d)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Colligation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ColligationRepr::deserialize(d)?;
        if repr.d.0.shape() != (1, 1) {
            return Err(D::Error::custom("D must be a 1x1 matrix"));
        }
        Colligation::new(
            repr.dim_x,
            repr.s,
            repr.r,
            repr.a.0,
            repr.b.0,
            repr.c.0,
            repr.d.0[(0, 0)],
        )
        .map_err(D::Error::custom)
    }
}

/// The Schur-Agler function realized by a colligation on `B_δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    colligation: Colligation,
    polyhedron: Polyhedron,
}

impl TransferFunction {
    pub fn new(colligation: Colligation, polyhedron: Polyhedron) -> Result<Self> {
        if (colligation.s, colligation.r) != (polyhedron.s(), polyhedron.r()) {
            return Err(NcError::Shape(format!(
                "colligation expects a {}x{} delta, got {}x{}",
                colligation.s,
                colligation.r,
                polyhedron.s(),
                polyhedron.r()
            )));
        }
        Ok(Self {
            colligation,
            polyhedron,
        })
    }

    pub fn colligation(&self) -> &Colligation {
        &self.colligation
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.polyhedron
    }

    pub fn d(&self) -> usize {
        self.polyhedron.d()
    }

    pub fn is_regular(&self) -> bool {
        self.colligation.is_regular()
    }

    /// `f_ρ`: the same colligation over `ρ·δ`.
    pub fn scaled(&self, rho: f64) -> Self {
        Self {
            colligation: self.colligation.clone(),
            polyhedron: self.polyhedron.scaled(rho),
        }
    }

    /// Evaluates the realization formula at `x ∈ B_δ`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<ComplexMatrix> {
        let delta_x = self.polyhedron.delta().eval(x)?;
        let norm = matcore::op_norm(&delta_x)?;
        if norm >= 1.0 {
            return Err(NcError::OutsideDomain(norm));
        }
        let n = x.n();
        let col = &self.colligation;
        let big_delta = kron_identity_left(col.dim_x, &delta_x);
        let m = &big_delta * kron_identity_right(&col.a, n);
        let rhs = &big_delta * kron_identity_right(&col.b, n);
        let y = matcore::resolvent_apply(&m, &rhs)?;
        Ok(identity(n) * col.d + kron_identity_right(&col.c, n) * y)
    }
}

/// Smallest `N` with `ρ^{N+2}/(1−ρ) ≤ (1−ρ)/2`, so that the truncated
/// series of `f_ρ` stays below `ρ + (1−ρ)/2 < 1` in norm.
pub fn neumann_order(rho: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(NcError::InvalidParameter(format!(
            "scaling must lie in (0, 1), got {rho}"
        )));
    }
    let target = (1.0 - rho) / 2.0;
    let mut n = 0usize;
    while rho.powi(n as i32 + 2) / (1.0 - rho) > target {
        n += 1;
    }
    Ok(n)
}

/// `(ρ‖δ(x)‖)^{N+2} / (1 − ρ‖δ(x)‖)`, a bound on `‖f_ρ(x) − p(x)‖`.
pub fn truncation_tail_bound(rho: f64, order: usize, x_norm: f64) -> Result<f64> {
    let a = rho * x_norm;
    if !(a < 1.0) || a < 0.0 {
        return Err(NcError::InvalidParameter(format!(
            "tail bound needs 0 <= rho·‖δ(x)‖ < 1, got {a}"
        )));
    }
    Ok(a.powi(order as i32 + 2) / (1.0 - a))
}

/// Expands `Σ_{k=0}^{N} C (Δ̂A)^k Δ̂ B` with `Δ̂ = I_X ⊗ ρδ` over the free
/// polynomial ring. `F` must be regular; the result vanishes at 0 and has
/// degree at most `(N+1)·deg δ`.
pub fn neumann_truncate(
    f: &TransferFunction,
    rho: f64,
    order: usize,
    degree_cap: usize,
) -> Result<FreePolynomial> {
    if !f.is_regular() {
        return Err(NcError::NotRegular);
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(NcError::InvalidParameter(format!(
            "scaling must lie in (0, 1), got {rho}"
        )));
    }
    let col = &f.colligation;
    let delta = f.polyhedron.delta().scale(Complex64::new(rho, 0.0));
    let (dim_x, s, r, d) = (col.dim_x, col.s, col.r, f.d());
    let degree = (order + 1) * delta.degree();
    if degree > degree_cap {
        return Err(NcError::DegreeCap {
            degree,
            cap: degree_cap,
        });
    }

    // (I_X ⊗ ρδ) applied to a vector indexed by X⊗ℂ^r, δ multiplying on the left.
    let apply_delta = |w: &[FreePolynomial]| -> Result<Vec<FreePolynomial>> {
        let mut out = Vec::with_capacity(dim_x * s);
        for xi in 0..dim_x {
            for i in 0..s {
                let products = (0..r)
                    .map(|j| delta.entry(i, j).mul_capped(&w[xi * r + j], degree_cap))
                    .collect::<Result<Vec<_>>>()?;
                out.push(FreePolynomial::linear_combination(
                    d,
                    products.iter().map(|p| (Complex64::new(1.0, 0.0), p)),
                )?);
            }
        }
        Ok(out)
    };
    let contract = |row: &[Complex64], v: &[FreePolynomial]| {
        FreePolynomial::linear_combination(d, row.iter().copied().zip(v.iter()))
    };

    let b: Vec<FreePolynomial> = col.b.iter().map(|&c| FreePolynomial::constant(d, c)).collect();
    let c_row: Vec<Complex64> = col.c.iter().copied().collect();
    let a_rows: Vec<Vec<Complex64>> = (0..dim_x * r)
        .map(|i| col.a.row(i).iter().copied().collect())
        .collect();

    let mut v = apply_delta(&b)?;
    let mut terms = vec![contract(&c_row, &v)?];
    for _ in 0..order {
        let w = a_rows
            .iter()
            .map(|row| contract(row, &v))
            .collect::<Result<Vec<_>>>()?;
        v = apply_delta(&w)?;
        terms.push(contract(&c_row, &v)?);
    }
    FreePolynomial::linear_combination(d, terms.iter().map(|p| (Complex64::new(1.0, 0.0), p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matcore::max_abs_diff;
    use crate::ncpoly::DEFAULT_MAX_DEGREE;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_by_one(z: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, c(z))
    }

    #[test]
    fn swap_is_unitary() {
        let col = Colligation::from_blocks(1, 1, 1, one_by_one(0.), one_by_one(1.), one_by_one(1.), c(0.))
            .unwrap();
        let check = col.check_unitary(1e-10);
        assert_eq!(check.residual, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn scaled_swap_fails() {
        let col = Colligation::from_blocks(
            1,
            1,
            1,
            one_by_one(0.),
            one_by_one(1.01),
            one_by_one(1.01),
            c(0.),
        )
        .unwrap();
        let check = col.check_unitary(1e-10);
        assert!(!check.pass);
        assert!((check.residual - 0.0201).abs() < 1e-12);
        assert!(matches!(
            Colligation::new(1, 1, 1, one_by_one(0.), one_by_one(1.01), one_by_one(1.01), c(0.)),
            Err(NcError::NotUnitary { .. })
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            Colligation::from_blocks(2, 1, 1, one_by_one(0.), one_by_one(1.), one_by_one(1.), c(0.)),
            Err(NcError::Shape(_))
        ));
        assert!(matches!(Colligation::random(2, 1, 2, true, 0), Err(NcError::Shape(_))));
    }

    #[test]
    fn random_colligations_are_unitary_and_reproducible() {
        for seed in 0..20 {
            for (dim_x, s) in [(1, 1), (2, 1), (3, 2), (4, 2)] {
                for regular in [false, true] {
                    let col = Colligation::random(dim_x, s, s, regular, seed).unwrap();
                    assert!(col.check_unitary(1e-10).pass);
                    assert_eq!(col.is_regular(), regular);
                    assert_eq!(col, Colligation::random(dim_x, s, s, regular, seed).unwrap());
                }
            }
        }
    }

    #[test]
    fn regular_transfer_vanishes_at_zero() {
        let col = Colligation::random(3, 2, 2, true, 4).unwrap();
        let f = TransferFunction::new(col, fixtures::polydisc_delta(2)).unwrap();
        assert_eq!(f.eval(&MatrixTuple::zeros(3, 2)).unwrap(), ComplexMatrix::zeros(3, 3));
    }

    #[test]
    fn zero_point_gives_d() {
        let col = Colligation::random(2, 1, 1, false, 8).unwrap();
        let d = col.d();
        let f = TransferFunction::new(col, fixtures::identity_delta()).unwrap();
        let v = f.eval(&MatrixTuple::zeros(2, 1)).unwrap();
        assert!(max_abs_diff(&v, &(identity(2) * d)) < 1e-15);
    }

    #[test]
    fn swap_realizes_delta() {
        let f = fixtures::delta_itself(fixtures::identity_delta());
        let x = MatrixTuple::from_scalars(&[c(0.5)]).unwrap();
        assert!(max_abs_diff(&f.eval(&x).unwrap(), &one_by_one(0.5)) < 1e-15);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let f = fixtures::delta_itself(fixtures::identity_delta());
        let x = MatrixTuple::from_scalars(&[c(1.0)]).unwrap();
        assert!(matches!(f.eval(&x), Err(NcError::OutsideDomain(_))));
    }

    #[test]
    fn neumann_order_rule() {
        // 0.5^{N+2}/0.5 <= 0.25  ⇔  N >= 1.
        assert_eq!(neumann_order(0.5).unwrap(), 1);
        for rho in [0.1, 0.5, 0.8, 0.9375] {
            let n = neumann_order(rho).unwrap();
            let tail = |k: usize| rho.powi(k as i32 + 2) / (1.0 - rho);
            assert!(tail(n) <= (1.0 - rho) / 2.0);
            if n > 0 {
                assert!(tail(n - 1) > (1.0 - rho) / 2.0);
            }
        }
        assert!(neumann_order(1.0).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(truncation_tail_bound(0.5, 3, 0.0).unwrap(), 0.0);
        assert!((truncation_tail_bound(0.5, 0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(truncation_tail_bound(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn truncation_of_delta_itself_is_scaled_delta() {
        let f = fixtures::delta_itself(fixtures::identity_delta());
        let x0 = FreePolynomial::variable(1, 0).unwrap();
        for order in [0, 3] {
            let p = neumann_truncate(&f, 0.7, order, DEFAULT_MAX_DEGREE).unwrap();
            assert_eq!(p, x0.scale(c(0.7)));
        }
    }

    #[test]
    fn truncation_requires_regularity() {
        let col = Colligation::random(1, 1, 1, false, 1).unwrap();
        let f = TransferFunction::new(col, fixtures::identity_delta()).unwrap();
        assert!(matches!(
            neumann_truncate(&f, 0.5, 2, DEFAULT_MAX_DEGREE),
            Err(NcError::NotRegular)
        ));
    }

    #[test]
    fn truncation_matches_scaled_transfer_within_tail() {
        for (k, delta) in fixtures::stock_deltas().into_iter().enumerate() {
            let col = Colligation::random(2, delta.s(), delta.r(), true, 30 + k as u64).unwrap();
            let f = TransferFunction::new(col, delta.clone()).unwrap();
            let rho = 0.6;
            let order = 3;
            let p = neumann_truncate(&f, rho, order, DEFAULT_MAX_DEGREE).unwrap();
            assert_eq!(p.constant_term(), ZERO);
            assert!(p.degree() <= (order + 1) * delta.delta().degree());
            let f_rho = f.scaled(rho);
            for i in 0..20 {
                let x = delta.sample_at(5, i, 1 + (i as usize % 3), 0.9).unwrap();
                let gap = matcore::op_norm(&(p.eval(&x).unwrap() - f_rho.eval(&x).unwrap())).unwrap();
                let bound = truncation_tail_bound(rho, order, delta.delta_norm(&x).unwrap()).unwrap();
                assert!(gap <= bound + 1e-12, "gap {gap} > bound {bound}");
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let col = Colligation::random(2, 2, 2, true, 3).unwrap();
        let s = serde_json::to_string(&col).unwrap();
        assert!(s.starts_with(r#"{"dimX":2,"s":2,"r":2,"A":"#));
        let back: Colligation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, col);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
