mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ncfun::domain::{Polyhedron, SampleConfig};
use ncfun::herglotz::{
    approx_pipeline, default_schedule, DiscreteCircleMeasure, PipelineOptions, PIPELINE_DEGREE_CAP,
};
use ncfun::json::MatrixJson;
use ncfun::ncderiv::{nc_diff, NcFunction};
use ncfun::ncpoly::{BlockDirection, FreePolynomial, MatrixTuple, DEFAULT_MAX_DEGREE};
use ncfun::realization::{neumann_order, neumann_truncate, Colligation, TransferFunction};
use ncfun::verify::{run_suite, SuiteName, SuiteOptions};

use crate::io::{load, write_atomic, CliError};
use crate::manifest::{InputDigest, RunManifest};

const SCHEMAS: &str = "\
File schemas (all JSON files end with a newline; complex numbers are [re, im]):
  polynomial   {\"d\":2,\"terms\":[{\"word\":[],\"coeff\":[0.5,0.0]},{\"word\":[1,0],\"coeff\":[2.0,0.0]}]}
  point        {\"n\":1,\"d\":2,\"mats\":[[[[0.3,0.0]]],[[[0.1,-0.2]]]]}
  direction    {\"rows\":1,\"cols\":2,\"d\":1,\"mats\":[[[[1.0,0.0],[0.0,0.0]]]]}
  matrix       [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[-1.0,0.0]]]
  delta        {\"s\":1,\"r\":1,\"d\":1,\"entries\":[[{\"d\":1,\"terms\":[{\"word\":[0],\"coeff\":[1.0,0.0]}]}]]}
  colligation  {\"dimX\":1,\"s\":1,\"r\":1,\"A\":[[[0.0,0.0]]],\"B\":[[[1.0,0.0]]],\"C\":[[[1.0,0.0]]],\"D\":[[[0.0,0.0]]]}
  function     {\"kind\":\"polynomial\",\"poly\":<polynomial>}
               {\"kind\":\"transfer\",\"colligation\":<colligation>,\"delta\":<delta>}
  measure      {\"atoms\":[{\"angle\":0.0,\"weight\":0.5},{\"angle\":3.14159,\"weight\":0.5}]}
  report.csv   step,r_n,L_n,deg_q,sup_error_measured,bound,psd_margin

Every run writes a manifest: <out>.manifest.json next to --out or --report,
manifest.json inside --out-dir, or one JSON line on stderr when the result
goes to stdout.

Environment: NCFUN_THREADS caps the worker thread count.
Exit status: 0 on success, 1 on a failed suite or numerical error, 2 on usage errors.";

#[derive(Parser, Debug)]
#[command(name = "ncfun", version, about = "Free noncommutative functions on matrix tuples", after_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a free polynomial at a matrix tuple.
    EvalPoly(EvalPolyArgs),
    /// Evaluate a realization-formula function at a matrix tuple.
    EvalRealization(EvalRealizationArgs),
    /// Expand the truncated Neumann series of a scaled transfer function.
    Truncate(TruncateArgs),
    /// Build Herglotz-Agler polynomial approximants and an error report.
    HerglotzApprox(HerglotzArgs),
    /// Evaluate the difference-differential Δf(x, y)(z).
    Derivative(DerivativeArgs),
    /// Run a randomized property suite.
    Verify(VerifyArgs),
    /// Evaluate the Herglotz integral of a discrete circle measure.
    MeasureEval(MeasureArgs),
}

#[derive(Args, Debug, Serialize)]
struct EvalPolyArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long)]
    point: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvalRealizationArgs {
    #[arg(long)]
    colligation: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    #[arg(long)]
    point: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TruncateArgs {
    #[arg(long)]
    colligation: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    #[arg(long)]
    rho: f64,
    /// Override the Neumann order chosen from rho.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    degree_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct HerglotzArgs {
    #[arg(long)]
    colligation: PathBuf,
    #[arg(long)]
    delta: PathBuf,
    /// Comma-separated increasing values in (0, 0.99]; default 1-2^-n, n=1..4.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    shell: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Sample levels cycle through 1..=levels.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = PIPELINE_DEGREE_CAP)]
    degree_cap: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DerivativeArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    z: PathBuf,
    /// Initial block scaling; halved until the block point is admissible.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    /// Random draws per family; defaults depend on the suite.
    #[arg(long)]
    samples: Option<usize>,
    /// Evaluation points per instance; defaults depend on the suite.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: u64,
    /// Replace every check tolerance of the suite.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MeasureArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where the primary result goes.
enum Sink {
    Stdout,
    File(PathBuf),
}

struct Run {
    name: &'static str,
    flags: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    started: Instant,
}

impl Run {
    fn new<A: Serialize>(name: &'static str, args: &A, seed: Option<u64>) -> Self {
        Self {
            name,
            flags: serde_json::to_value(args).expect("flags serialize"),
            seed,
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn load<T>(&mut self, flag: &str, path: &PathBuf) -> Result<T, CliError>
    where
        T: serde::de::DeserializeOwned + Serialize,
    {
        let value: T = load(path)?;
        self.inputs.push(InputDigest::of(flag, path, &value));
        Ok(value)
    }

    fn manifest(&self) -> RunManifest {
        RunManifest::new(
            self.name,
            self.flags.clone(),
            self.seed,
            self.inputs.clone(),
            self.started.elapsed(),
        )
    }

    /// Emits `body` and the manifest that belongs with it.
    fn finish(&self, sink: &Sink, body: &str) -> Result<(), CliError> {
        match sink {
            Sink::Stdout => {
                print!("{body}");
                eprintln!("{}", self.manifest().to_line());
            }
            Sink::File(path) => {
                write_atomic(path, body.as_bytes())?;
                write_atomic(&manifest::beside(path), self.manifest().to_canonical().as_bytes())?;
            }
        }
        Ok(())
    }
}

fn sink(out: &Option<PathBuf>) -> Sink {
    out.clone().map_or(Sink::Stdout, Sink::File)
}

fn canonical<T: Serialize>(value: &T) -> String {
    ncfun::json::to_canonical_string(value).expect("results serialize")
}

fn transfer(run: &mut Run, colligation: &PathBuf, delta: &PathBuf) -> Result<TransferFunction, CliError> {
    let col: Colligation = run.load("colligation", colligation)?;
    let delta: Polyhedron = run.load("delta", delta)?;
    TransferFunction::new(col, delta).map_err(CliError::usage)
}

fn eval_poly(args: &EvalPolyArgs) -> Result<bool, CliError> {
    let mut run = Run::new("eval-poly", args, None);
    let poly: FreePolynomial = run.load("poly", &args.poly)?;
    let point: MatrixTuple = run.load("point", &args.point)?;
    let value = poly.eval(&point).map_err(CliError::usage)?;
    run.finish(&sink(&args.out), &canonical(&MatrixJson(value)))?;
    Ok(true)
}

fn eval_realization(args: &EvalRealizationArgs) -> Result<bool, CliError> {
    let mut run = Run::new("eval-realization", args, None);
    let f = transfer(&mut run, &args.colligation, &args.delta)?;
    let point: MatrixTuple = run.load("point", &args.point)?;
    let value = f.eval(&point).map_err(CliError::numerical)?;
    run.finish(&sink(&args.out), &canonical(&MatrixJson(value)))?;
    Ok(true)
}

fn truncate(args: &TruncateArgs) -> Result<bool, CliError> {
    let mut run = Run::new("truncate", args, None);
    let f = transfer(&mut run, &args.colligation, &args.delta)?;
    let order = match args.order {
        Some(n) => n,
        None => neumann_order(args.rho).map_err(CliError::usage)?,
    };
    let p = neumann_truncate(&f, args.rho, order, args.degree_cap).map_err(CliError::numerical)?;
    run.finish(&Sink::File(args.out.clone()), &canonical(&p))?;
    Ok(true)
}

fn parse_schedule(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("schedule entry {s:?} is not a number")))
        })
        .collect()
}

fn herglotz_approx(args: &HerglotzArgs) -> Result<bool, CliError> {
    let mut run = Run::new("herglotz-approx", args, Some(args.seed));
    let f = transfer(&mut run, &args.colligation, &args.delta)?;
    let rhos = match &args.schedule {
        Some(text) => parse_schedule(text)?,
        None => default_schedule(4),
    };
    ncfun::herglotz::validate_schedule(&rhos).map_err(CliError::usage)?;
    let cfg = SampleConfig {
        seed: args.seed,
        target_norm: args.shell,
        level: args.levels,
        count: args.samples,
    };
    cfg.validate().map_err(CliError::usage)?;
    let opts = PipelineOptions {
        degree_cap: args.degree_cap,
        ..PipelineOptions::default()
    };
    let result = approx_pipeline(&f, &rhos, &cfg, &opts).map_err(CliError::numerical)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    for step in &result.schedule.steps {
        write_atomic(&args.out_dir.join(format!("q_{}.json", step.step)), canonical(&step.q).as_bytes())?;
    }
    write_atomic(&args.out_dir.join("report.csv"), result.report.to_csv().as_bytes())?;
    write_atomic(&args.out_dir.join("manifest.json"), run.manifest().to_canonical().as_bytes())?;
    Ok(true)
}

#[derive(Serialize)]
struct DerivativeOut {
    #[serde(with = "ncfun::json::matrix")]
    value: ncfun::matcore::ComplexMatrix,
    t: f64,
}

fn derivative(args: &DerivativeArgs) -> Result<bool, CliError> {
    let mut run = Run::new("derivative", args, None);
    let f: NcFunction = run.load("fn", &args.function)?;
    let x: MatrixTuple = run.load("x", &args.x)?;
    let y: MatrixTuple = run.load("y", &args.y)?;
    let z: BlockDirection = run.load("z", &args.z)?;
    let w = nc_diff(&f, &x, &y, &z, args.t).map_err(|e| match e {
        ncfun::NcError::DimensionMismatch(_) | ncfun::NcError::Shape(_) | ncfun::NcError::InvalidParameter(_) => {
            CliError::usage(e)
        }
        _ => CliError::numerical(e),
    })?;
    let out = DerivativeOut { value: w.value, t: w.t };
    run.finish(&sink(&args.out), &canonical(&out))?;
    Ok(true)
}

fn verify(args: &VerifyArgs) -> Result<bool, CliError> {
    let run = Run::new("verify", args, Some(args.seed));
    let name: SuiteName = args.suite.parse().map_err(CliError::usage)?;
    let mut opts = SuiteOptions::defaults(name, args.seed);
    if let Some(s) = args.samples {
        opts.samples = s;
    }
    if let Some(p) = args.points {
        opts.points = p;
    }
    opts.tol = args.tol;
    let report = run_suite(name, &opts).map_err(CliError::usage)?;
    run.finish(&sink(&args.report), &canonical(&report))?;
    Ok(report.all_passed())
}

fn measure_eval(args: &MeasureArgs) -> Result<bool, CliError> {
    let mut run = Run::new("measure-eval", args, None);
    let mu: DiscreteCircleMeasure = run.load("measure", &args.measure)?;
    let x: MatrixJson = run.load("x", &args.x)?;
    let value = mu.eval(&x.0).map_err(|e| match e {
        ncfun::NcError::NotSquare { .. } | ncfun::NcError::OutsideDomain(_) => CliError::usage(e),
        _ => CliError::numerical(e),
    })?;
    run.finish(&sink(&args.out), &canonical(&MatrixJson(value)))?;
    Ok(true)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("NCFUN_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("NCFUN_THREADS must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::EvalPoly(a) => eval_poly(a),
        Command::EvalRealization(a) => eval_realization(a),
        Command::Truncate(a) => truncate(a),
        Command::HerglotzApprox(a) => herglotz_approx(a),
        Command::Derivative(a) => derivative(a),
        Command::Verify(a) => verify(a),
        Command::MeasureEval(a) => measure_eval(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!(e.to_json()));
            ExitCode::from(e.exit_code())
        }
    }
}
