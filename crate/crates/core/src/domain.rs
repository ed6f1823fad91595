//! Polynomial polyhedra `B_δ = {x : ‖δ(x)‖ < 1}`, their closed shells
//! `K_{δ,r} = {x ∈ B_δ : ‖δ(x)‖ ≤ r}`, reproducible sampling, and the nc
//! constructions (direct sums, similarities, upper-triangular block points).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NcError, Result};
use crate::matcore::{self, block_diag, ComplexMatrix};
use crate::ncpoly::{BlockDirection, MatrixFreePolynomial, MatrixTuple};
use crate::random::{gaussian_tuple, stream_rng};

/// Largest admissible sampling target for `‖δ(x)‖`.
pub const MAX_TARGET_NORM: f64 = 0.95;

/// Tolerance on the attained `‖δ(x)‖` of a sampled point.
pub const SAMPLE_NORM_TOL: f64 = 1e-6;

const MAX_RAY_ITERATIONS: usize = 300;
const RAY_START: f64 = 1.0 / 1024.0;
const RAY_SCAN_STEPS: usize = 16;

/// `B_δ` for a polynomial matrix with `δ(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    delta: MatrixFreePolynomial,
}

impl Polyhedron {
    pub fn new(delta: MatrixFreePolynomial) -> Result<Self> {
        if !delta.vanishes_at_zero() {
            return Err(NcError::DeltaNotVanishing);
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> &MatrixFreePolynomial {
        &self.delta
    }

    pub fn d(&self) -> usize {
        self.delta.d()
    }

    pub fn s(&self) -> usize {
        self.delta.s()
    }

    pub fn r(&self) -> usize {
        self.delta.r()
    }

    /// The polyhedron of `c·δ`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            delta: self.delta.scale(Complex64::new(c, 0.0)),
        }
    }

    pub fn delta_norm(&self, x: &MatrixTuple) -> Result<f64> {
        matcore::op_norm(&self.delta.eval(x)?)
    }

    pub fn membership(&self, x: &MatrixTuple, shell_r: Option<f64>) -> Result<Membership> {
        let norm = self.delta_norm(x)?;
        let inside_b = norm < 1.0;
        Ok(Membership {
            inside_b,
            inside_k: shell_r.map(|r| inside_b && norm <= r),
            norm,
        })
    }

    /// Draws sample `index` of stream `seed` at `level` with `‖δ(x)‖ = target`.
    pub fn sample_at(&self, seed: u64, index: u64, level: usize, target: f64) -> Result<MatrixTuple> {
        check_target(target)?;
        if level == 0 {
            return Err(NcError::InvalidParameter("sampling level must be >= 1".into()));
        }
        let mut rng = stream_rng(seed, index);
        let g = gaussian_tuple(&mut rng, level, self.d());
        self.ray_to_norm(&g, target)
    }

    /// Moves along `t ↦ t·g` to a point with `‖δ(t·g)‖ = target`.
    ///
    /// Homogeneous `δ` of degree `k` is solved in closed form; otherwise the
    /// first crossing is bracketed by doubling and a grid scan, then located
    /// by bisection. The map is continuous with value 0 at `t = 0` but need
    /// not be monotone.
    pub fn ray_to_norm(&self, g: &MatrixTuple, target: f64) -> Result<MatrixTuple> {
        let phi = |t: f64| self.delta_norm(&g.scale(t));
        let unreachable = |best: f64, iterations: usize| NcError::UnreachableTarget {
            target,
            best,
            iterations,
        };

        if let Some(k) = self.delta.homogeneous_degree() {
            let base = phi(1.0)?;
            if base == 0.0 {
                return Err(unreachable(0.0, 1));
            }
            let point = g.scale((target / base).powf(1.0 / k as f64));
            let attained = self.delta_norm(&point)?;
            if (attained - target).abs() > SAMPLE_NORM_TOL {
                return Err(unreachable(attained, 1));
            }
            return Ok(point);
        }

        // Bracket the first crossing: double from a small t, then scan the
        // last doubling interval on a uniform grid. This keeps samples in the
        // component of B_δ that contains 0.
        let mut iterations = 0;
        let mut lo = 0.0;
        let mut hi = RAY_START;
        let mut phi_hi = phi(hi)?;
        while phi_hi < target {
            iterations += 1;
            if iterations >= MAX_RAY_ITERATIONS {
                return Err(unreachable(phi_hi, iterations));
            }
            lo = hi;
            hi *= 2.0;
            phi_hi = phi(hi)?;
        }
        let step = (hi - lo) / RAY_SCAN_STEPS as f64;
        for k in 1..RAY_SCAN_STEPS {
            let t = lo + step * k as f64;
            let v = phi(t)?;
            iterations += 1;
            if v >= target {
                hi = t;
                phi_hi = v;
                break;
            }
            lo = t;
        }
        while iterations < MAX_RAY_ITERATIONS && phi_hi - target > 1e-12 {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let phi_mid = phi(mid)?;
            if phi_mid < target {
                lo = mid;
            } else {
                hi = mid;
                phi_hi = phi_mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        if phi_hi - target > SAMPLE_NORM_TOL {
            return Err(unreachable(phi_hi, iterations));
        }
        Ok(g.scale(hi))
    }

    /// All samples requested by `cfg`, generated in parallel and returned in
    /// index order.
    pub fn sample(&self, cfg: &SampleConfig) -> Result<Vec<MatrixTuple>> {
        cfg.validate()?;
        (0..cfg.count as u64)
            .into_par_iter()
            .map(|i| self.sample_at(cfg.seed, i, cfg.level, cfg.target_norm))
            .collect()
    }
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target <= MAX_TARGET_NORM) {
        return Err(NcError::InvalidParameter(format!(
            "target norm must lie in (0, {MAX_TARGET_NORM}], got {target}"
        )));
    }
    Ok(())
}

impl Serialize for Polyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.delta.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Polyhedron::new(MatrixFreePolynomial::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub inside_b: bool,
    pub inside_k: Option<bool>,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub target_norm: f64,
    pub level: usize,
    pub count: usize,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        check_target(self.target_norm)?;
        if self.level == 0 || self.count == 0 {
            return Err(NcError::InvalidParameter(
                "sample level and count must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn direct_sum(x: &MatrixTuple, y: &MatrixTuple) -> Result<MatrixTuple> {
    if x.d() != y.d() {
        return Err(NcError::DimensionMismatch(format!(
            "direct sum of tuples with d={} and d={}",
            x.d(),
            y.d()
        )));
    }
    MatrixTuple::new(
        x.mats()
            .iter()
            .zip(y.mats())
            .map(|(a, b)| block_diag(a, b))
            .collect(),
    )
}

/// `(α x_1 α⁻¹, …, α x_d α⁻¹)`.
pub fn similarity_conjugate(x: &MatrixTuple, alpha: &ComplexMatrix) -> Result<MatrixTuple> {
    if alpha.shape() != (x.n(), x.n()) {
        return Err(NcError::Shape(format!(
            "similarity must be {}x{}, got {:?}",
            x.n(),
            x.n(),
            alpha.shape()
        )));
    }
    let mats = x
        .mats()
        .iter()
        .map(|m| matcore::solve_right(&(alpha * m), alpha))
        .collect::<Result<Vec<_>>>()?;
    MatrixTuple::new(mats)
}

/// The block point `[[x, t·z], [0, y]]` at level `n + m`.
pub fn upper_triangular_point(
    x: &MatrixTuple,
    y: &MatrixTuple,
    z: &BlockDirection,
    t: Complex64,
) -> Result<MatrixTuple> {
    if x.d() != y.d() || x.d() != z.d() {
        return Err(NcError::DimensionMismatch("x, y and z must share d".into()));
    }
    if (z.rows(), z.cols()) != (x.n(), y.n()) {
        return Err(NcError::Shape(format!(
            "direction must be {}x{}, got {}x{}",
            x.n(),
            y.n(),
            z.rows(),
            z.cols()
        )));
    }
    let (n, m) = (x.n(), y.n());
    let mats = (0..x.d())
        .map(|i| {
            let mut b = ComplexMatrix::zeros(n + m, n + m);
            b.view_mut((0, 0), (n, n)).copy_from(x.mat(i));
            b.view_mut((0, n), (n, m)).copy_from(&(&z.mats()[i] * t));
            b.view_mut((n, n), (m, m)).copy_from(y.mat(i));
            b
        })
        .collect();
    MatrixTuple::new(mats)
}
