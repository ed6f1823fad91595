//! Polynomial approximation in the regular free Herglotz-Agler class, and
//! the classical level-one Herglotz integral over discrete circle measures.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::domain::SampleConfig;
use crate::error::{NcError, Result};
use crate::matcore::{self, hermitian_part, identity, ComplexMatrix};
use crate::ncpoly::{FreePolynomial, MatrixTuple};
use crate::realization::{neumann_order, neumann_truncate, TransferFunction};
use crate::transforms::cayley_s2h;

/// Degree cap used by the pipeline. On the default schedule the nominal
/// degree `(L+1)·deg p` of the fourth step is 10464.
pub const PIPELINE_DEGREE_CAP: usize = 20_000;

/// Largest admissible schedule value.
pub const MAX_SCHEDULE_VALUE: f64 = 0.99;

/// Norms at which positivity of `Re q_n` is sampled, cycled by index.
pub const PSD_SAMPLE_NORMS: [f64; 4] = [0.25, 0.5, 0.75, 0.95];

/// Smallest `L ≥ 0` with `r^{L+1}/(1−r) < (1−r²)/8`.
pub fn choose_truncation_order(r: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&r) {
        return Err(NcError::InvalidParameter(format!(
            "truncation order needs 0 <= r < 1, got {r}"
        )));
    }
    let target = (1.0 - r * r) / 8.0;
    let mut l = 0usize;
    while r.powf(l as f64 + 1.0) / (1.0 - r) >= target {
        l += 1;
    }
    Ok(l)
}

/// `q = (1 + r·p)·Σ_{j=0}^{L} (r·p)^j`, expanded symbolically.
pub fn make_q(p: &FreePolynomial, r: f64, l: usize, degree_cap: usize) -> Result<FreePolynomial> {
    if p.constant_term() != Complex64::new(0.0, 0.0) {
        return Err(NcError::NotRegular);
    }
    let needed = choose_truncation_order(r)?;
    if l < needed {
        return Err(NcError::InvalidParameter(format!(
            "truncation order {l} is below the admissible {needed} for r = {r}"
        )));
    }
    let degree = (l + 1) * p.degree();
    if degree > degree_cap {
        return Err(NcError::DegreeCap {
            degree,
            cap: degree_cap,
        });
    }
    let d = p.d();
    let one = FreePolynomial::one(d);
    let rp = p.scale(Complex64::new(r, 0.0));
    // Horner: S ← 1 + rp·S, L times, gives Σ_{j≤L} (rp)^j.
    let mut sum = one.clone();
    for _ in 0..l {
        sum = one.try_add(&rp.mul_capped(&sum, degree_cap)?)?;
    }
    one.try_add(&rp)?.mul_capped(&sum, degree_cap)
}

/// `|1−r|·Σ_{j≤L} t^j + 2·Σ_{j>L} t^j + 2|r−1|/(1−t)² + gap` with `t = ‖δ(x)‖`.
pub fn qn_error_bound(r: f64, l: usize, x_norm: f64, cayley_gap: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x_norm) {
        return Err(NcError::OutsideDomain(x_norm));
    }
    let t = x_norm;
    let tail = t.powf(l as f64 + 1.0) / (1.0 - t);
    let head = (1.0 - t.powf(l as f64 + 1.0)) / (1.0 - t);
    let gap = (r - 1.0).abs();
    Ok(gap * head + 2.0 * tail + 2.0 * gap / ((1.0 - t) * (1.0 - t)) + cayley_gap)
}

/// `1 − 2^{−n}` for `n = 1..=steps`.
pub fn default_schedule(steps: usize) -> Vec<f64> {
    (1..=steps).map(|n| 1.0 - 0.5f64.powi(n as i32)).collect()
}

/// One step of the construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxStep {
    pub step: usize,
    pub r: f64,
    /// Neumann order `N(r)` used for `p`.
    pub neumann_order: usize,
    pub l: usize,
    pub p: FreePolynomial,
    pub q: FreePolynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxSchedule {
    pub rhos: Vec<f64>,
    pub steps: Vec<ApproxStep>,
}

pub fn validate_schedule(rhos: &[f64]) -> Result<()> {
    if rhos.is_empty() {
        return Err(NcError::InvalidParameter("schedule is empty".into()));
    }
    for (i, &r) in rhos.iter().enumerate() {
        if !(r > 0.0 && r <= MAX_SCHEDULE_VALUE) {
            return Err(NcError::InvalidParameter(format!(
                "schedule value {r} outside (0, {MAX_SCHEDULE_VALUE}]"
            )));
        }
        if i > 0 && r <= rhos[i - 1] {
            return Err(NcError::InvalidParameter(
                "schedule must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Per-step measurements; only the first seven fields go to CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub step: usize,
    pub r_n: f64,
    pub l_n: usize,
    pub deg_q: usize,
    pub sup_error_measured: f64,
    /// Largest per-sample bound.
    pub bound: f64,
    /// Smallest eigenvalue of `Re q_n` over the positivity samples.
    pub psd_margin: f64,
    /// `min(bound(x) + error_tol − ‖q_n(x) − h(x)‖)` over the shell samples.
    pub bound_slack: f64,
    /// `min(λ_min(Re cayley(r·f(x))) − (1−r²)/4)` over all samples.
    pub intermediate_margin: f64,
    /// Largest sampled `‖p_n(x)‖`.
    pub p_sup_sampled: f64,
    /// `q_n` has constant term exactly 1 and evaluates to `I` at 0.
    pub q_at_zero_exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

pub const REPORT_COLUMNS: [&str; 7] = [
    "step",
    "r_n",
    "L_n",
    "deg_q",
    "sup_error_measured",
    "bound",
    "psd_margin",
];

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = REPORT_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            writeln!(
                out,
                "{},{:?},{},{},{:?},{:?},{:?}",
                row.step,
                row.r_n,
                row.l_n,
                row.deg_q,
                row.sup_error_measured,
                row.bound,
                row.psd_margin
            )
            .expect("writing to a String");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub degree_cap: usize,
    pub psd_tol: f64,
    pub error_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            degree_cap: PIPELINE_DEGREE_CAP,
            psd_tol: matcore::DEFAULT_PSD_TOL,
            error_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub schedule: ApproxSchedule,
    pub report: ErrorReport,
}

struct ShellSample {
    norm: f64,
    f: ComplexMatrix,
    h: ComplexMatrix,
}

struct PsdSample {
    x: MatrixTuple,
    f: ComplexMatrix,
}

/// Builds `q_1, q_2, …` for the schedule and measures them against
/// `h = cayley_s2h ∘ f`.
///
/// Errors are measured on `cfg.count` shell samples at `cfg.target_norm`;
/// positivity on another `cfg.count` samples at norms cycling through
/// [`PSD_SAMPLE_NORMS`]. Levels cycle through `1..=cfg.level`.
pub fn approx_pipeline(
    f: &TransferFunction,
    rhos: &[f64],
    cfg: &SampleConfig,
    opts: &PipelineOptions,
) -> Result<PipelineRun> {
    if !f.is_regular() {
        return Err(NcError::NotRegular);
    }
    validate_schedule(rhos)?;
    cfg.validate()?;
    let delta = f.polyhedron();
    let count = cfg.count as u64;
    let level_of = |i: u64| 1 + (i as usize) % cfg.level;

    let shell: Vec<(MatrixTuple, ShellSample)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = delta.sample_at(cfg.seed, i, level_of(i), cfg.target_norm)?;
            let norm = delta.delta_norm(&x)?;
            let fx = f.eval(&x)?;
            let h = cayley_s2h(&fx)?;
            Ok((x, ShellSample { norm, f: fx, h }))
        })
        .collect::<Result<_>>()?;
    let psd: Vec<PsdSample> = (count..2 * count)
        .into_par_iter()
        .map(|i| {
            let target = PSD_SAMPLE_NORMS[((i - count) as usize) % PSD_SAMPLE_NORMS.len()];
            let x = delta.sample_at(cfg.seed, i, level_of(i - count), target)?;
            let fx = f.eval(&x)?;
            Ok(PsdSample { x, f: fx })
        })
        .collect::<Result<_>>()?;

    let mut steps = Vec::with_capacity(rhos.len());
    let mut rows = Vec::with_capacity(rhos.len());
    let mut prev_l = 0usize;
    for (k, &r) in rhos.iter().enumerate() {
        let step = k + 1;
        let n_order = neumann_order(r)?;
        let p = neumann_truncate(f, r, n_order, opts.degree_cap)?;
        let l = choose_truncation_order(r)?.max(prev_l) + 1;
        prev_l = l;
        let q = make_q(&p, r, l, opts.degree_cap)?;

        let zero = MatrixTuple::zeros(1, q.d());
        let q_at_zero_exact = q.constant_term() == Complex64::new(1.0, 0.0)
            && q.eval(&zero)? == identity(1);
        let intermediate_floor = (1.0 - r * r) / 4.0;

        let shell_stats: Vec<(f64, f64, f64, f64, f64)> = shell
            .par_iter()
            .map(|(x, s)| {
                let qx = q.eval(x)?;
                let px = p.eval(x)?;
                let err = matcore::op_norm(&(&qx - &s.h))?;
                let gap = matcore::op_norm(&(cayley_s2h(&px)? - &s.h))?;
                let bound = qn_error_bound(r, l, s.norm, gap)?;
                let inter = intermediate_margin(&s.f, r)? - intermediate_floor;
                Ok((err, bound, bound + opts.error_tol - err, inter, matcore::op_norm(&px)?))
            })
            .collect::<Result<_>>()?;
        let psd_stats: Vec<(f64, f64, f64)> = psd
            .par_iter()
            .map(|s| {
                let qx = q.eval(&s.x)?;
                let margin = matcore::hermitian_min_eig(&hermitian_part(&qx))?;
                let inter = intermediate_margin(&s.f, r)? - intermediate_floor;
                Ok((margin, inter, matcore::op_norm(&p.eval(&s.x)?)?))
            })
            .collect::<Result<_>>()?;

        let (worst_idx, psd_margin) = psd_stats
            .iter()
            .map(|s| s.0)
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
        if psd_margin < -opts.psd_tol {
            return Err(NcError::PsdViolation {
                step,
                margin: psd_margin,
                point: Box::new(psd[worst_idx].x.clone()),
            });
        }
        let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
        let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
        rows.push(ErrorRow {
            step,
            r_n: r,
            l_n: l,
            deg_q: q.degree(),
            sup_error_measured: fold_max(&mut shell_stats.iter().map(|s| s.0)),
            bound: fold_max(&mut shell_stats.iter().map(|s| s.1)),
            psd_margin,
            bound_slack: fold_min(&mut shell_stats.iter().map(|s| s.2)),
            intermediate_margin: fold_min(
                &mut shell_stats.iter().map(|s| s.3).chain(psd_stats.iter().map(|s| s.1)),
            ),
            p_sup_sampled: fold_max(
                &mut shell_stats.iter().map(|s| s.4).chain(psd_stats.iter().map(|s| s.2)),
            ),
            q_at_zero_exact,
        });
        steps.push(ApproxStep {
            step,
            r,
            neumann_order: n_order,
            l,
            p,
            q,
        });
    }
    Ok(PipelineRun {
        schedule: ApproxSchedule {
            rhos: rhos.to_vec(),
            steps,
        },
        report: ErrorReport { rows },
    })
}

/// `λ_min(Re cayley_s2h(r·F))`.
fn intermediate_margin(fx: &ComplexMatrix, r: f64) -> Result<f64> {
    let h = cayley_s2h(&fx.scale(r))?;
    matcore::hermitian_min_eig(&hermitian_part(&h))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

/// A probability measure on the circle with finitely many atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteCircleMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteCircleMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(NcError::InvalidParameter("measure has no atoms".into()));
        }
        for a in &atoms {
            if !(0.0..TAU).contains(&a.angle) {
                return Err(NcError::InvalidParameter(format!(
                    "atom angle {} outside [0, 2π)",
                    a.angle
                )));
            }
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(NcError::InvalidParameter(format!(
                    "atom weight {} is not a nonnegative number",
                    a.weight
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(NcError::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// One to `max_atoms` atoms at uniform angles with normalized
    /// exponential weights.
    pub fn random<R: Rng>(rng: &mut R, max_atoms: usize) -> Result<Self> {
        if max_atoms == 0 {
            return Err(NcError::InvalidParameter("max_atoms must be >= 1".into()));
        }
        let k = rng.random_range(1..=max_atoms);
        let raw: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(0.0..TAU), -(1.0 - rng.random::<f64>()).ln()))
            .collect();
        let total: f64 = raw.iter().map(|a| a.1).sum();
        Self::new(
            raw.into_iter()
                .map(|(angle, w)| Atom {
                    angle,
                    weight: w / total,
                })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `Σ w_i (I + e^{iθ_i}x)(I − e^{iθ_i}x)⁻¹` for `‖x‖ ≤ 0.95`.
    pub fn eval(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !x.is_square() {
            return Err(NcError::NotSquare {
                rows: x.nrows(),
                cols: x.ncols(),
            });
        }
        let norm = matcore::op_norm(x)?;
        if norm > 0.95 {
            return Err(NcError::OutsideDomain(norm));
        }
        let n = x.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for a in &self.atoms {
            let w = x * Complex64::from_polar(1.0, a.angle);
            out += cayley_s2h(&w)? * Complex64::new(a.weight, 0.0);
        }
        Ok(out)
    }
}

impl<'de> Deserialize<'de> for DiscreteCircleMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            atoms: Vec<Atom>,
        }
        DiscreteCircleMeasure::new(Repr::deserialize(d)?.atoms).map_err(serde::de::Error::custom)
    }
}
