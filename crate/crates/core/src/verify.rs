//! Randomized property suites, the maximum-principle probe and sampled
//! sup-norm estimation.
//!
//! Every check records a signed margin `bound + tol − measured`; an instance
//! passes when all of its margins are nonnegative. Instances run in
//! parallel and are reduced in index order, so reports depend only on the
//! seed and the counts.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::domain::{direct_sum, similarity_conjugate, Polyhedron, SampleConfig};
use crate::error::{NcError, Result};
use crate::fixtures;
use crate::herglotz::{approx_pipeline, default_schedule, DiscreteCircleMeasure, PipelineOptions};
use crate::matcore::{self, hermitian_part, identity, ComplexMatrix};
use crate::ncderiv::{nc_diff, NcFunction};
use crate::ncpoly::{BlockDirection, MatrixTuple, DEFAULT_MAX_DEGREE};
use crate::random::{gaussian_matrix, gaussian_tuple, random_invertible, random_polynomial, stream_rng};
use crate::realization::{neumann_order, neumann_truncate, truncation_tail_bound, Colligation, TransferFunction};
use crate::transforms::{cayley_h2s, cayley_s2h, h2s_lipschitz, herglotz_bounds, s2h_lipschitz};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Schwarz,
    Derivative0,
    Axioms,
    Cayley,
    Bounds,
    Maxprinciple,
    HerglotzPipeline,
    Neumann,
    Measure,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Schwarz,
        SuiteName::Derivative0,
        SuiteName::Axioms,
        SuiteName::Cayley,
        SuiteName::Bounds,
        SuiteName::Maxprinciple,
        SuiteName::HerglotzPipeline,
        SuiteName::Neumann,
        SuiteName::Measure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Schwarz => "schwarz",
            SuiteName::Derivative0 => "derivative0",
            SuiteName::Axioms => "axioms",
            SuiteName::Cayley => "cayley",
            SuiteName::Bounds => "bounds",
            SuiteName::Maxprinciple => "maxprinciple",
            SuiteName::HerglotzPipeline => "herglotz_pipeline",
            SuiteName::Neumann => "neumann",
            SuiteName::Measure => "measure",
        }
    }

    /// Default count of random draws per family.
    pub fn default_samples(self) -> usize {
        match self {
            SuiteName::Schwarz => 500,
            SuiteName::Maxprinciple => 20,
            SuiteName::Neumann => 100,
            SuiteName::Measure => 50,
            _ => 200,
        }
    }

    /// Default count of evaluation points inside one instance.
    pub fn default_points(self) -> usize {
        match self {
            SuiteName::Measure => 50,
            _ => 100,
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = NcError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| NcError::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Counts for a suite run.
///
/// `samples` is the number of random draws per family: per stock `δ` for
/// schwarz, per (axiom, function kind) pair for axioms, per step for
/// herglotz_pipeline, and the plain instance count elsewhere. `points` is
/// the number of evaluation points inside one instance (neumann,
/// maxprinciple, measure). `tol`, when set, replaces every check tolerance
/// of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: usize,
    pub points: usize,
    pub tol: Option<f64>,
}

impl SuiteOptions {
    pub fn defaults(name: SuiteName, seed: u64) -> Self {
        Self {
            seed,
            samples: name.default_samples(),
            points: name.default_points(),
            tol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub tol: f64,
    pub count: usize,
    pub passed: usize,
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    /// Smallest margin over all checks; negative means a violation.
    pub worst_margin: f64,
    /// Replayable inputs of the instance attaining `worst_margin`.
    pub worst_instance: Option<Value>,
    pub checks: Vec<CheckSummary>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

struct Check {
    name: &'static str,
    tol: f64,
    margin: f64,
    strict: bool,
}

impl Check {
    fn passed(&self) -> bool {
        if self.strict {
            self.margin > 0.0
        } else {
            self.margin >= 0.0
        }
    }
}

struct Outcome {
    checks: Vec<Check>,
    instance: Value,
}

impl Outcome {
    fn new(instance: Value) -> Self {
        Self {
            checks: Vec::new(),
            instance,
        }
    }

    /// `measured ≤ bound + tol`.
    fn le(&mut self, name: &'static str, measured: f64, bound: f64, tol: f64) {
        let margin = bound + tol - measured;
        self.checks.push(Check {
            name,
            tol,
            margin: if margin.is_nan() { f64::NEG_INFINITY } else { margin },
            strict: false,
        });
    }

    /// `measured < bound`.
    fn lt(&mut self, name: &'static str, measured: f64, bound: f64) {
        let margin = bound - measured;
        self.checks.push(Check {
            name,
            tol: 0.0,
            margin: if margin.is_nan() { f64::NEG_INFINITY } else { margin },
            strict: true,
        });
    }

    fn holds(&mut self, name: &'static str, ok: bool) {
        self.le(name, if ok { 0.0 } else { 1.0 }, 0.0, 0.0);
    }

    fn failed(name: &'static str, instance: Value, err: &NcError) -> Self {
        let mut out = Outcome::new(json!({ "inputs": instance, "error": err.to_string(), "kind": err.kind() }));
        out.checks.push(Check {
            name,
            tol: 0.0,
            margin: f64::NEG_INFINITY,
            strict: false,
        });
        out
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

/// Runs a named suite. Violations and numerical failures are reported in
/// the result rather than returned as errors.
pub fn run_suite(name: SuiteName, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.samples == 0 {
        return Err(NcError::InvalidParameter("samples must be >= 1".into()));
    }
    if matches!(name, SuiteName::Neumann | SuiteName::Maxprinciple | SuiteName::Measure) && opts.points == 0 {
        return Err(NcError::InvalidParameter("points must be >= 1".into()));
    }
    if let Some(t) = opts.tol {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(NcError::InvalidParameter(format!("tolerance must be >= 0, got {t}")));
        }
    }
    let outcomes = match name {
        SuiteName::HerglotzPipeline => herglotz_pipeline_suite(opts),
        _ => {
            let total = match name {
                SuiteName::Schwarz => 3 * opts.samples,
                SuiteName::Axioms => 6 * opts.samples,
                _ => opts.samples,
            };
            (0..total as u64)
                .into_par_iter()
                .map(|i| instance(name, opts, i))
                .collect()
        }
    };
    Ok(summarize(name, opts.seed, outcomes))
}

fn summarize(suite: SuiteName, seed: u64, outcomes: Vec<Outcome>) -> SuiteReport {
    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut passed = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_instance = None;
    for (i, o) in outcomes.iter().enumerate() {
        if o.checks.iter().all(Check::passed) {
            passed += 1;
        }
        for c in &o.checks {
            let idx = match checks.iter().position(|s| s.name == c.name) {
                Some(idx) => idx,
                None => {
                    checks.push(CheckSummary {
                        name: c.name.to_string(),
                        tol: c.tol,
                        count: 0,
                        passed: 0,
                        worst_margin: f64::INFINITY,
                    });
                    checks.len() - 1
                }
            };
            let s = &mut checks[idx];
            s.count += 1;
            s.passed += usize::from(c.passed());
            s.worst_margin = s.worst_margin.min(c.margin);
            if c.margin < worst_margin || worst_instance.is_none() {
                worst_margin = worst_margin.min(c.margin);
                worst_instance = Some(json!({ "index": i, "check": c.name, "inputs": o.instance }));
            }
        }
    }
    SuiteReport {
        suite,
        seed,
        instances: outcomes.len(),
        passed,
        worst_margin,
        worst_instance,
        checks,
    }
}

fn instance(name: SuiteName, opts: &SuiteOptions, i: u64) -> Outcome {
    let tol = |default: f64| opts.tol.unwrap_or(default);
    let mut rng = stream_rng(opts.seed, i);
    let result = match name {
        SuiteName::Schwarz => schwarz_instance(&mut rng, i, tol(1e-8)),
        SuiteName::Derivative0 => derivative0_instance(&mut rng, i, tol(1e-8)),
        SuiteName::Axioms => axioms_instance(&mut rng, i, opts.tol),
        SuiteName::Cayley => cayley_instance(&mut rng, tol(1e-10), tol(1e-8)),
        SuiteName::Bounds => bounds_instance(&mut rng, i, tol(1e-8)),
        SuiteName::Maxprinciple => maxprinciple_instance(&mut rng, i, opts.points, tol(1e-10)),
        SuiteName::Neumann => neumann_instance(&mut rng, i, opts.points, tol(1e-10), tol(1e-8)),
        SuiteName::Measure => measure_instance(&mut rng, opts.points, tol(1e-12), tol(1e-10), tol(1e-8)),
        SuiteName::HerglotzPipeline => unreachable!("run as a whole"),
    };
    result.unwrap_or_else(|(inputs, err)| Outcome::failed("numerical", inputs, &err))
}

type InstanceResult = std::result::Result<Outcome, (Value, NcError)>;

/// Attaches the instance inputs to any error raised while evaluating it.
trait WithInputs<T> {
    fn inputs(self, v: &Value) -> std::result::Result<T, (Value, NcError)>;
}

impl<T> WithInputs<T> for Result<T> {
    fn inputs(self, v: &Value) -> std::result::Result<T, (Value, NcError)> {
        self.map_err(|e| (v.clone(), e))
    }
}

fn random_regular<R: Rng>(rng: &mut R, delta: &Polyhedron, max_dim_x: usize) -> Result<TransferFunction> {
    let dim_x = rng.random_range(1..=max_dim_x);
    let col = Colligation::random(dim_x, delta.s(), delta.r(), true, rng.random())?;
    TransferFunction::new(col, delta.clone())
}

fn level_of(i: u64, stride: u64) -> usize {
    1 + ((i / stride) % 3) as usize
}

fn schwarz_instance<R: Rng>(rng: &mut R, i: u64, tol: f64) -> InstanceResult {
    let delta = fixtures::stock_deltas().swap_remove((i % 3) as usize);
    let f = random_regular(rng, &delta, 4).inputs(&Value::Null)?;
    let target = rng.random_range(0.05..=0.95);
    let point_seed = rng.random();
    let mut inputs = json!({ "function": to_value(&NcFunction::Transfer(f.clone())) });
    let x = delta.sample_at(point_seed, 0, level_of(i, 3), target).inputs(&inputs)?;
    inputs["point"] = to_value(&x);
    let fx = matcore::op_norm(&f.eval(&x).inputs(&inputs)?).inputs(&inputs)?;
    let dx = delta.delta_norm(&x).inputs(&inputs)?;
    let mut out = Outcome::new(inputs);
    out.le("schwarz", fx, dx, tol);
    Ok(out)
}

fn derivative0_instance<R: Rng>(rng: &mut R, i: u64, tol: f64) -> InstanceResult {
    let d = 1 + (i % 3) as usize;
    let delta = fixtures::polydisc_delta(d);
    let f = NcFunction::Transfer(random_regular(rng, &delta, 3).inputs(&Value::Null)?);
    let n = level_of(i, 3);
    let z = gaussian_tuple(rng, n, d).scale(rng.random_range(0.1..=5.0));
    let inputs = json!({ "function": to_value(&f), "z": to_value(&z) });
    let zero = MatrixTuple::zeros(n, d);
    let w = nc_diff(&f, &zero, &zero, &BlockDirection::from(z.clone()), 1.0).inputs(&inputs)?;
    let wn = matcore::op_norm(&w.value).inputs(&inputs)?;
    let zn = z.norm().inputs(&inputs)?;
    let mut out = Outcome::new(inputs);
    out.le("contractive", wn, zn * (1.0 + tol), 0.0);
    Ok(out)
}

fn contraction<R: Rng>(rng: &mut R, n: usize, norm: f64) -> Result<ComplexMatrix> {
    let g = gaussian_matrix(rng, n, n);
    Ok(g.scale(norm / matcore::op_norm(&g)?))
}

fn cayley_instance<R: Rng>(rng: &mut R, tol_roundtrip: f64, tol: f64) -> InstanceResult {
    let n = rng.random_range(1..=4);
    let norm = rng.random_range(0.0..=0.9);
    let f = contraction(rng, n, norm).inputs(&Value::Null)?;
    let step_norm = rng.random_range(1e-3..=0.3);
    let step = contraction(rng, n, step_norm).inputs(&Value::Null)?;
    let mut g = &f + step;
    let gn = matcore::op_norm(&g).inputs(&Value::Null)?;
    if gn > 0.9 {
        g = g.scale(0.9 / gn);
    }
    let inputs = json!({ "F": to_value(&crate::json::MatrixJson(f.clone())), "G": to_value(&crate::json::MatrixJson(g.clone())) });
    let run = || -> Result<Outcome> {
        let r = matcore::op_norm(&f)?.max(matcore::op_norm(&g)?);
        let hf = cayley_s2h(&f)?;
        let hg = cayley_s2h(&g)?;
        let back = cayley_h2s(&hf)?;
        let bounds = herglotz_bounds(matcore::op_norm(&f)?)?;
        let mut out = Outcome::new(inputs.clone());
        out.le("roundtrip", matcore::op_norm(&(back - &f))?, 0.0, tol_roundtrip);
        out.le(
            "herglotz_lower",
            bounds.lower_real_part,
            matcore::hermitian_min_eig(&hermitian_part(&hf))?,
            tol,
        );
        out.le("herglotz_upper", matcore::op_norm(&hf)?, bounds.upper_norm, tol);
        let df = matcore::op_norm(&(&f - &g))?;
        let dh = matcore::op_norm(&(&hf - &hg))?;
        out.le("lipschitz_s2h", dh, s2h_lipschitz(r) * df, tol);
        let ds = matcore::op_norm(&(cayley_h2s(&hf)? - cayley_h2s(&hg)?))?;
        out.le("lipschitz_h2s", ds, h2s_lipschitz(r) * dh, tol);
        Ok(out)
    };
    run().inputs(&inputs)
}

fn bounds_instance<R: Rng>(rng: &mut R, i: u64, tol: f64) -> InstanceResult {
    let delta = fixtures::stock_deltas().swap_remove((i % 3) as usize);
    let f = random_regular(rng, &delta, 4).inputs(&Value::Null)?;
    let target = rng.random_range(0.05..=0.95);
    let point_seed = rng.random();
    let mut inputs = json!({ "function": to_value(&NcFunction::Transfer(f.clone())) });
    let x = delta.sample_at(point_seed, 0, level_of(i, 3), target).inputs(&inputs)?;
    inputs["point"] = to_value(&x);
    let run = || -> Result<Outcome> {
        let t = delta.delta_norm(&x)?;
        let h = cayley_s2h(&f.eval(&x)?)?;
        let b = herglotz_bounds(t)?;
        let mut out = Outcome::new(inputs.clone());
        out.le("lower_real_part", b.lower_real_part, matcore::hermitian_min_eig(&hermitian_part(&h))?, tol);
        out.le("upper_norm", matcore::op_norm(&h)?, b.upper_norm, tol);
        Ok(out)
    };
    run().inputs(&inputs)
}

fn axioms_instance<R: Rng>(rng: &mut R, i: u64, tol: Option<f64>) -> InstanceResult {
    let axiom = i % 3;
    let transfer = (i / 3) % 2 == 1;
    let delta = fixtures::stock_deltas().swap_remove(rng.random_range(0..3));
    let d = delta.d();
    let f = if transfer {
        NcFunction::Transfer(random_regular(rng, &delta, 3).inputs(&Value::Null)?)
    } else {
        NcFunction::Polynomial(random_polynomial(rng, d, 4, 6, 1.0))
    };
    let point_seed: u64 = rng.random();
    let mut inputs = json!({ "function": to_value(&f) });
    let sample = |idx: u64, level: usize, target: f64| delta.sample_at(point_seed, idx, level, target);
    let diff = |a: &ComplexMatrix, b: &ComplexMatrix| matcore::op_norm(&(a - b));
    match axiom {
        0 => {
            let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
            let (ta, tb) = (rng.random_range(0.05..=0.9), rng.random_range(0.05..=0.9));
            let x = sample(0, a, ta).inputs(&inputs)?;
            let y = sample(1, b, tb).inputs(&inputs)?;
            inputs["x"] = to_value(&x);
            inputs["y"] = to_value(&y);
            let run = || -> Result<f64> {
                let lhs = f.eval(&direct_sum(&x, &y)?)?;
                let rhs = matcore::block_diag(&f.eval(&x)?, &f.eval(&y)?);
                diff(&lhs, &rhs)
            };
            let gap = run().inputs(&inputs)?;
            let mut out = Outcome::new(inputs);
            out.le("direct_sum", gap, 0.0, tol.unwrap_or(1e-9));
            Ok(out)
        }
        1 => {
            let n = rng.random_range(1..=3);
            let target = rng.random_range(0.01..=0.09);
            let cond = rng.random_range(1.0..=10.0);
            let alpha = random_invertible(rng, n, cond);
            let x = sample(0, n, target).inputs(&inputs)?;
            inputs["x"] = to_value(&x);
            inputs["alpha"] = to_value(&crate::json::MatrixJson(alpha.clone()));
            let run = || -> Result<f64> {
                let lhs = f.eval(&similarity_conjugate(&x, &alpha)?)?;
                let rhs = matcore::solve_right(&(&alpha * f.eval(&x)?), &alpha)?;
                diff(&lhs, &rhs)
            };
            let gap = run().inputs(&inputs)?;
            let mut out = Outcome::new(inputs);
            out.le("similarity", gap, 0.0, tol.unwrap_or(1e-7));
            Ok(out)
        }
        _ => {
            let (m, k) = (rng.random_range(1..=2), rng.random_range(1..=2));
            let (ty, tw) = (rng.random_range(0.01..=0.09), rng.random_range(0.01..=0.09));
            let cond = rng.random_range(1.0..=10.0);
            let s = random_invertible(rng, m + k, cond);
            let left = rng.random_bool(0.5);
            let y = sample(0, m, ty).inputs(&inputs)?;
            let w = sample(1, k, tw).inputs(&inputs)?;
            inputs["y"] = to_value(&y);
            inputs["w"] = to_value(&w);
            inputs["S"] = to_value(&crate::json::MatrixJson(s.clone()));
            let run = || -> Result<f64> {
                let s_inv = matcore::solve(&s, &identity(m + k))?;
                // X = S⁻¹(y ⊕ w)S, intertwined with y through [I 0]S or S⁻¹[I 0]ᵀ.
                let big = similarity_conjugate(&direct_sum(&y, &w)?, &s_inv)?;
                let proj = identity(m + k).rows(0, m).into_owned();
                let (fy, fx) = (f.eval(&y)?, f.eval(&big)?);
                if left {
                    let alpha = &proj * &s;
                    diff(&(&fy * &alpha), &(&alpha * &fx))
                } else {
                    let alpha = &s_inv * proj.transpose();
                    diff(&(&fx * &alpha), &(&alpha * &fy))
                }
            };
            let gap = run().inputs(&inputs)?;
            let mut out = Outcome::new(inputs);
            out.le("intertwining", gap, 0.0, tol.unwrap_or(1e-7));
            Ok(out)
        }
    }
}

fn maxprinciple_instance<R: Rng>(rng: &mut R, i: u64, points: usize, tol: f64) -> InstanceResult {
    let probe_seed = rng.random();
    if i % 2 == 0 {
        let delta = fixtures::stock_deltas().swap_remove(rng.random_range(0..3));
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let col = Colligation::constant(rng.random_range(1..=3), delta.s(), phase, rng.random())
            .inputs(&Value::Null)?;
        let f = NcFunction::Transfer(TransferFunction::new(col, delta.clone()).inputs(&Value::Null)?);
        let inputs = json!({ "function": to_value(&f), "probe_seed": probe_seed });
        let probe = max_principle_probe(&f, &delta, probe_seed, points, 3).inputs(&inputs)?;
        let mut out = Outcome::new(inputs);
        out.le("constant_spread", probe.spread, 0.0, tol);
        out.holds("constant_verdict", probe.constant_verdict);
        Ok(out)
    } else {
        let f = match (i / 2) % 3 {
            0 => fixtures::delta_itself(fixtures::identity_delta()),
            1 => fixtures::delta_itself(fixtures::univariate_quadratic_delta()),
            _ => fixtures::stock_transfer(),
        };
        let delta = f.polyhedron().clone();
        let f = NcFunction::Transfer(f);
        let inputs = json!({ "function": to_value(&f), "probe_seed": probe_seed });
        let probe = max_principle_probe(&f, &delta, probe_seed, points, 3).inputs(&inputs)?;
        let mut out = Outcome::new(inputs);
        out.le("interior_below_shell", probe.interior_max + MAX_PRINCIPLE_GAP, probe.shell_max, 0.0);
        out.holds("nonconstant_verdict", !probe.constant_verdict);
        Ok(out)
    }
}

/// Required `shell_max − interior_max` for the nonconstant fixtures.
pub const MAX_PRINCIPLE_GAP: f64 = 0.05;

fn neumann_instance<R: Rng>(rng: &mut R, i: u64, points: usize, tol_tail: f64, tol_sup: f64) -> InstanceResult {
    let rho = if i % 2 == 0 { 0.5 } else { 0.8 };
    let delta = if rho == 0.5 {
        fixtures::stock_deltas().swap_remove(((i / 2) % 3) as usize)
    } else if (i / 2) % 2 == 0 {
        fixtures::identity_delta()
    } else {
        fixtures::univariate_quadratic_delta()
    };
    let f = random_regular(rng, &delta, 3).inputs(&Value::Null)?;
    let point_seed: u64 = rng.random();
    let targets: Vec<f64> = (0..points).map(|_| rng.random_range(0.05..=0.95)).collect();
    let inputs = json!({ "function": to_value(&NcFunction::Transfer(f.clone())), "rho": rho, "point_seed": point_seed });
    let run = || -> Result<Outcome> {
        let order = neumann_order(rho)?;
        let p = neumann_truncate(&f, rho, order, DEFAULT_MAX_DEGREE)?;
        let f_rho = f.scaled(rho);
        let mut out = Outcome::new(inputs.clone());
        let zero = MatrixTuple::zeros(2, delta.d());
        out.holds(
            "vanishes_at_zero",
            p.constant_term() == Complex64::new(0.0, 0.0) && p.eval(&zero)? == ComplexMatrix::zeros(2, 2),
        );
        let mut sup = 0.0f64;
        let mut worst_tail = f64::INFINITY;
        for (j, &target) in targets.iter().enumerate() {
            let x = delta.sample_at(point_seed, j as u64, 1 + j % 3, target)?;
            let px = p.eval(&x)?;
            let gap = matcore::op_norm(&(&px - f_rho.eval(&x)?))?;
            let bound = truncation_tail_bound(rho, order, delta.delta_norm(&x)?)?;
            worst_tail = worst_tail.min(bound + tol_tail - gap);
            sup = sup.max(matcore::op_norm(&px)?);
        }
        out.le("tail", 0.0, worst_tail, 0.0);
        out.le("sup_norm", sup, rho + (1.0 - rho) / 2.0, tol_sup);
        Ok(out)
    };
    run().inputs(&inputs)
}

fn measure_instance<R: Rng>(rng: &mut R, points: usize, tol_zero: f64, tol_psd: f64, tol_schwarz: f64) -> InstanceResult {
    let mu = DiscreteCircleMeasure::random(rng, 5).inputs(&Value::Null)?;
    let xs: Vec<Complex64> = (0..points)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..=0.9), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let inputs = json!({ "measure": to_value(&mu), "points": to_value(&xs) });
    let run = || -> Result<Outcome> {
        let mut out = Outcome::new(inputs.clone());
        let h0 = mu.eval(&ComplexMatrix::zeros(1, 1))?[(0, 0)];
        out.le("h_at_zero", (h0 - Complex64::new(1.0, 0.0)).norm(), 0.0, tol_zero);
        let mut re_floor = f64::INFINITY;
        let mut schwarz = f64::INFINITY;
        for &x in &xs {
            let h = mu.eval(&ComplexMatrix::from_element(1, 1, x))?;
            re_floor = re_floor.min(h[(0, 0)].re);
            let back = cayley_h2s(&h)?[(0, 0)].norm();
            schwarz = schwarz.min(x.norm() + tol_schwarz - back);
        }
        out.le("real_part", 0.0, re_floor, tol_psd);
        out.le("schwarz", 0.0, schwarz, 0.0);
        Ok(out)
    };
    run().inputs(&inputs)
}

fn herglotz_pipeline_suite(opts: &SuiteOptions) -> Vec<Outcome> {
    let f = fixtures::stock_transfer();
    let cfg = SampleConfig {
        seed: opts.seed,
        target_norm: 0.5,
        level: 3,
        count: opts.samples,
    };
    let popts = PipelineOptions {
        psd_tol: opts.tol.unwrap_or(PipelineOptions::default().psd_tol),
        ..PipelineOptions::default()
    };
    let inputs = json!({ "function": to_value(&NcFunction::Transfer(f.clone())), "config": to_value(&cfg) });
    let run = match approx_pipeline(&f, &default_schedule(4), &cfg, &popts) {
        Ok(run) => run,
        Err(e) => {
            let inputs = match &e {
                NcError::PsdViolation { point, .. } => json!({ "setup": inputs, "point": to_value(point) }),
                _ => inputs,
            };
            return vec![Outcome::failed("pipeline", inputs, &e)];
        }
    };
    let rows = &run.report.rows;
    let tol = opts.tol.unwrap_or(1e-8);
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            let mut out = Outcome::new(json!({ "setup": inputs, "row": to_value(row) }));
            out.holds("q_at_zero", row.q_at_zero_exact);
            out.le("psd", 0.0, row.psd_margin, tol);
            out.le("error_bound", 0.0, row.bound_slack, 0.0);
            out.le("intermediate", 0.0, row.intermediate_margin, tol);
            if k + 1 == rows.len() {
                out.lt("convergence", row.sup_error_measured, rows[0].sup_error_measured);
            }
            out
        })
        .collect()
}

/// Largest `‖f(x)‖` over `count` samples on the shell `‖δ(x)‖ = shell_r`,
/// cycling levels `1..=levels`.
pub fn estimate_sup_norm(
    f: &NcFunction,
    delta: &Polyhedron,
    shell_r: f64,
    levels: usize,
    count: usize,
    seed: u64,
) -> Result<f64> {
    if levels == 0 || count == 0 {
        return Err(NcError::InvalidParameter("levels and count must be positive".into()));
    }
    let norms: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|j| {
            let x = delta.sample_at(seed, j, 1 + (j as usize) % levels, shell_r)?;
            matcore::op_norm(&f.eval(&x)?)
        })
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleProbe {
    /// Largest `‖f(x)‖` over samples with `‖δ(x)‖ ≤ 0.5`.
    pub interior_max: f64,
    /// Largest `‖f(x)‖` over samples with `‖δ(x)‖ = 0.9`.
    pub shell_max: f64,
    /// Largest minus smallest sampled `‖f(x)‖`.
    pub spread: f64,
    pub constant_verdict: bool,
}

pub const INTERIOR_RADIUS: f64 = 0.5;
pub const SHELL_RADIUS: f64 = 0.9;
pub const CONSTANT_SPREAD: f64 = 1e-9;

/// Samples `count` interior points on the grid of norms
/// `0.5·(j+1)/count` and `count` points on the shell at 0.9.
pub fn max_principle_probe(
    f: &NcFunction,
    delta: &Polyhedron,
    seed: u64,
    count: usize,
    levels: usize,
) -> Result<MaxPrincipleProbe> {
    if levels == 0 || count == 0 {
        return Err(NcError::InvalidParameter("levels and count must be positive".into()));
    }
    let norms: Vec<(bool, f64)> = (0..2 * count as u64)
        .into_par_iter()
        .map(|j| {
            let shell = j >= count as u64;
            let target = if shell {
                SHELL_RADIUS
            } else {
                INTERIOR_RADIUS * (j + 1) as f64 / count as f64
            };
            let x = delta.sample_at(seed, j, 1 + (j as usize) % levels, target)?;
            Ok((shell, matcore::op_norm(&f.eval(&x)?)?))
        })
        .collect::<Result<_>>()?;
    let max_where = |want: bool| {
        norms
            .iter()
            .filter(|(s, _)| *s == want)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let hi = norms.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = norms.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(MaxPrincipleProbe {
        interior_max: max_where(false),
        shell_max: max_where(true),
        spread: hi - lo,
        constant_verdict: hi - lo <= CONSTANT_SPREAD,
    })
}
