//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use ncfun::domain::SampleConfig;
use ncfun::herglotz::{
    approx_pipeline, choose_truncation_order, default_schedule, PipelineOptions,
};
use ncfun::matcore::op_norm;
use ncfun::ncderiv::{fd_derivative_check, nc_diff, NcFunction};
use ncfun::ncpoly::{BlockDirection, FreePolynomial};
use ncfun::random::{gaussian_matrix, gaussian_tuple, stream_rng};
use ncfun::realization::{Colligation, TransferFunction};
use ncfun::verify::{max_principle_probe, run_suite, SuiteName, SuiteOptions, MAX_PRINCIPLE_GAP};
use ncfun::fixtures;

const SEED: u64 = 42;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn suite(name: SuiteName, samples: usize, points: usize, expect_instances: usize) -> Outcome {
    let report = run_suite(
        name,
        &SuiteOptions {
            seed: SEED,
            samples,
            points,
            tol: None,
        },
    )
    .expect("suite runs");
    let mut detail = format!(
        "{} instances, {} passed, worst margin {:.3e}",
        report.instances, report.passed, report.worst_margin
    );
    for c in &report.checks {
        detail.push_str(&format!("; {} {}/{} ({:.3e})", c.name, c.passed, c.count, c.worst_margin));
    }
    outcome(
        report.all_passed() && report.instances == expect_instances,
        detail,
    )
}

fn schwarz() -> Outcome {
    suite(SuiteName::Schwarz, 500, 100, 1500)
}

fn derivative_at_zero() -> Outcome {
    suite(SuiteName::Derivative0, 200, 100, 200)
}

fn cayley() -> Outcome {
    suite(SuiteName::Cayley, 200, 100, 200)
}

fn neumann() -> Outcome {
    suite(SuiteName::Neumann, 100, 100, 100)
}

fn herglotz_pipeline() -> Outcome {
    let f = fixtures::stock_transfer();
    let cfg = SampleConfig {
        seed: SEED,
        target_norm: 0.5,
        level: 3,
        count: 200,
    };
    let run = approx_pipeline(&f, &default_schedule(4), &cfg, &PipelineOptions::default())
        .expect("pipeline runs");
    let rows = &run.report.rows;
    let q_at_zero = rows.iter().all(|r| r.q_at_zero_exact);
    let psd = rows.iter().map(|r| r.psd_margin).fold(f64::INFINITY, f64::min);
    let slack = rows.iter().map(|r| r.bound_slack).fold(f64::INFINITY, f64::min);
    let inter = rows.iter().map(|r| r.intermediate_margin).fold(f64::INFINITY, f64::min);
    let first = rows[0].sup_error_measured;
    let last = rows[rows.len() - 1].sup_error_measured;
    let errors: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.sup_error_measured)).collect();
    let ok = rows.len() == 4
        && q_at_zero
        && psd >= -1e-8
        && slack >= 0.0
        && inter >= -1e-8
        && last < first;
    outcome(
        ok,
        format!(
            "q(0)=I {q_at_zero}; min psd {psd:.4}; min bound slack {slack:.4}; \
             min intermediate margin {inter:.4}; sup errors [{}]",
            errors.join(", ")
        ),
    )
}

/// Sums the geometric tail term by term instead of using its closed form.
fn scan_order(r: f64) -> usize {
    let target = (1.0 - r * r) / 8.0;
    (0..100_000)
        .find(|&l| {
            let mut tail = 0.0;
            let mut term = r.powi(l as i32 + 1);
            while term > 1e-300 && term > tail * 1e-18 {
                tail += term;
                term *= r;
            }
            tail < target
        })
        .expect("order exists")
}

fn truncation_order() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, want) in [(0.5, 4usize), (0.9, 57)] {
        let got = choose_truncation_order(r).expect("valid r");
        let oracle = scan_order(r);
        ok &= got == want && got == oracle;
        parts.push(format!("r={r}: {got} (oracle {oracle})"));
    }
    outcome(ok, parts.join("; "))
}

fn axioms() -> Outcome {
    suite(SuiteName::Axioms, 200, 100, 1200)
}

fn derivative() -> Outcome {
    let deltas = fixtures::stock_deltas();
    let mut worst_t = 0.0f64;
    for k in 0..60u64 {
        let delta = deltas[k as usize % 3].clone();
        let col = Colligation::random(1 + (k as usize) % 4, delta.s(), delta.r(), true, 100 + k)
            .expect("valid shape");
        let f = NcFunction::Transfer(TransferFunction::new(col, delta.clone()).expect("shapes"));
        let (n, m) = (1 + (k as usize) % 3, 1 + (k as usize / 3) % 3);
        let x = delta.sample_at(SEED, 2 * k, n, 0.5).expect("sample");
        let y = delta.sample_at(SEED, 2 * k + 1, m, 0.5).expect("sample");
        let mut rng = stream_rng(SEED + 1, k);
        let z = BlockDirection::new((0..delta.d()).map(|_| gaussian_matrix(&mut rng, n, m)).collect())
            .expect("direction");
        let a = nc_diff(&f, &x, &y, &z, 1.0).expect("admissible t");
        let b = nc_diff(&f, &x, &y, &z, 0.3 * a.t).expect("admissible t");
        worst_t = worst_t.max(op_norm(&(a.value - b.value)).expect("finite"));
    }
    let v = FreePolynomial::variable(1, 0).expect("d = 1");
    let square = NcFunction::Polynomial(v.try_mul(&v).expect("same d"));
    let mut rng = stream_rng(SEED + 2, 0);
    let x = gaussian_tuple(&mut rng, 3, 1);
    let z = gaussian_tuple(&mut rng, 3, 1);
    let gaps: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&h| fd_derivative_check(&square, &x, &z, h).expect("entire").gap)
        .collect();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    let ratios_ok = ratios.iter().all(|r| (r - 10.0).abs() <= 2.0);
    outcome(
        worst_t <= 1e-9 && ratios_ok,
        format!(
            "worst t-gap {worst_t:.3e} over 60 instances; fd gaps {:?}; ratios {:?}",
            gaps, ratios
        ),
    )
}

fn measure() -> Outcome {
    suite(SuiteName::Measure, 50, 50, 50)
}

fn max_principle() -> Outcome {
    let constant = max_principle_probe(
        &NcFunction::Transfer(fixtures::constant_transfer()),
        &fixtures::polydisc_delta(2),
        SEED,
        50,
        3,
    )
    .expect("probe runs");
    let stock = max_principle_probe(
        &NcFunction::Transfer(fixtures::stock_transfer()),
        &fixtures::identity_delta(),
        SEED,
        50,
        3,
    )
    .expect("probe runs");
    let margin = stock.shell_max - stock.interior_max;
    outcome(
        constant.constant_verdict
            && constant.spread <= 1e-10
            && !stock.constant_verdict
            && margin >= MAX_PRINCIPLE_GAP,
        format!(
            "constant spread {:.3e}; stock interior {:.4} shell {:.4} margin {:.4}",
            constant.spread, stock.interior_max, stock.shell_max, margin
        ),
    )
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn commands(out: &Path) -> Vec<Vec<String>> {
    let o = |name: &str| out.join(name).to_string_lossy().into_owned();
    let coll = fixture("stock_colligation.json");
    let delta = fixture("identity_delta.json");
    let raw: Vec<Vec<String>> = vec![
        vec!["eval-poly".into(), "--poly".into(), fixture("commutator.json"), "--point".into(), fixture("e12_e21.json"), "--out".into(), o("eval_poly.json")],
        vec!["eval-poly".into(), "--poly".into(), fixture("commutator.json"), "--point".into(), fixture("e12_e21.json")],
        vec!["eval-realization".into(), "--colligation".into(), coll.clone(), "--delta".into(), delta.clone(), "--point".into(), fixture("point_x.json"), "--out".into(), o("eval_realization.json")],
        vec!["truncate".into(), "--colligation".into(), coll.clone(), "--delta".into(), delta.clone(), "--rho".into(), "0.5".into(), "--out".into(), o("p.json")],
        vec!["herglotz-approx".into(), "--colligation".into(), coll, "--delta".into(), delta, "--schedule".into(), "0.5,0.75".into(), "--seed".into(), SEED.to_string(), "--out-dir".into(), o("approx")],
        vec!["derivative".into(), "--fn".into(), fixture("stock_fn.json"), "--x".into(), fixture("point_x.json"), "--y".into(), fixture("point_y.json"), "--z".into(), fixture("direction_z.json"), "--out".into(), o("derivative.json")],
        vec!["measure-eval".into(), "--measure".into(), fixture("two_atoms.json"), "--x".into(), fixture("scalar_half.json"), "--out".into(), o("measure.json")],
    ];
    let mut all = raw;
    for name in SuiteName::ALL {
        let samples = if name == SuiteName::HerglotzPipeline { "2" } else { "12" };
        all.push(vec![
            "verify".into(),
            "--suite".into(),
            name.as_str().into(),
            "--samples".into(),
            samples.into(),
            "--points".into(),
            "10".into(),
            "--seed".into(),
            SEED.to_string(),
            "--report".into(),
            o(&format!("verify_{}.json", name.as_str())),
        ]);
    }
    all
}

fn collect(dir: &Path, into: &mut BTreeMap<String, Vec<u8>>) {
    for entry in std::fs::read_dir(dir).expect("readable") {
        let path = entry.expect("entry").path();
        if path.is_dir() {
            collect(&path, into);
            continue;
        }
        let name = path.to_string_lossy().into_owned();
        if name.ends_with("manifest.json") {
            continue;
        }
        into.insert(name, std::fs::read(&path).expect("readable"));
    }
}

/// Runs every command once into a fresh directory and returns output bytes
/// keyed by a name relative to that directory.
fn run_all(threads: &str) -> Result<(BTreeMap<String, Vec<u8>>, PathBuf, tempfile::TempDir), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = BTreeMap::new();
    for (i, args) in commands(dir.path()).into_iter().enumerate() {
        let res = Command::new(env!("CARGO_BIN_EXE_ncfun"))
            .args(&args)
            .env("NCFUN_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !res.status.success() {
            return Err(format!(
                "`ncfun {}` exited {:?}: {}",
                args[0],
                res.status.code(),
                String::from_utf8_lossy(&res.stderr)
            ));
        }
        outputs.insert(format!("stdout#{i}"), res.stdout);
    }
    let mut files = BTreeMap::new();
    collect(dir.path(), &mut files);
    let prefix = dir.path().to_string_lossy().into_owned();
    for (k, v) in files {
        outputs.insert(k.trim_start_matches(&prefix).to_string(), v);
    }
    Ok((outputs, dir.path().to_path_buf(), dir))
}

fn reproducibility() -> Outcome {
    let runs: Result<Vec<_>, String> = ["1", "1", "4"].iter().map(|t| run_all(t)).collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let base = &runs[0].0;
    let mut diffs = Vec::new();
    for (label, run) in [("second run", &runs[1].0), ("4 threads", &runs[2].0)] {
        if run.keys().ne(base.keys()) {
            diffs.push(format!("{label}: different file set"));
        }
        for (k, v) in base {
            if run.get(k) != Some(v) {
                diffs.push(format!("{label}: {k} differs"));
            }
        }
    }
    let approx = runs[0].1.join("approx");
    let csv = std::fs::read_to_string(approx.join("report.csv")).unwrap_or_default();
    let layout_ok = approx.join("q_1.json").is_file()
        && approx.join("q_2.json").is_file()
        && !approx.join("q_3.json").exists()
        && csv.lines().count() == 3;
    if !layout_ok {
        diffs.push("herglotz-approx output layout".into());
    }
    let files = base.keys().filter(|k| !k.starts_with("stdout#")).count();
    outcome(
        diffs.is_empty(),
        if diffs.is_empty() {
            format!("{} commands, {files} output files identical over 3 runs", commands(Path::new("")).len())
        } else {
            diffs.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("schwarz lemma", schwarz),
        ("derivative at zero", derivative_at_zero),
        ("cayley transforms", cayley),
        ("neumann truncation", neumann),
        ("herglotz pipeline", herglotz_pipeline),
        ("truncation order", truncation_order),
        ("nc axioms", axioms),
        ("nc derivative", derivative),
        ("level-1 measures", measure),
        ("max principle", max_principle),
        ("cli reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        if !result.ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<22} {} ({:.1}s) {}",
            i + 1,
            name,
            if result.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
