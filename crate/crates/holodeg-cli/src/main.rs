//! Command-line front end: JSON in, JSON out, deterministic for a fixed seed.
//!
//! Exit codes separate the kinds of outcome scripts care about:
//!   0  success / property holds
//!   1  mathematically negative verdict (data does not extend, map is
//!      complex-linear so no witness exists)
//!   2  usage or input error (bad flags, unreadable files, violated
//!      preconditions)
//!   3  numerical failure (no convergence, scale cap exceeded, oracle
//!      disagreement, suspected missed zeros)

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use holodeg::degree::{zero_count_degree, RealLinearMap};
use holodeg::domains::{ComplexLine, Domain};
use holodeg::error::Error as CoreError;
use holodeg::extension::{line_family_extension_test, structured_degree};
use holodeg::mixed::{
    sample_component, split_on_circle, MixedMap, MixedPolynomial, SampledLoop, UnivariateMixed,
};
use holodeg::params::Params;
use holodeg::verify;
use holodeg::winding::{winding_number, winding_of_loop, WindingResult};
use holodeg::witness::{assemble_witness, linear_witness};

#[derive(Parser)]
#[command(
    name = "holodeg",
    about = "Topological degrees of boundary maps, holomorphic extension tests, and negative-degree witnesses on domains in C^N",
    version
)]
struct Cli {
    /// JSON run configuration (seed, tolerance scales, sample counts, output path)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result JSON here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winding number of a loop, from samples or from a polynomial oracle
    Wind(WindArgs),
    /// Disc slice a complex line cuts out of a domain
    Slice(SliceArgs),
    /// Split a mixed polynomial on a circle into holomorphic parts q and s
    Split(SplitArgs),
    /// Test boundary data for holomorphic extendibility along sampled lines
    ExtendTest(ExtendArgs),
    /// Degree by signed zero counting over the domain
    DegreeOracle(DegreeOracleArgs),
    /// Degree of a structured map via its slice winding
    StructuredDegree(StructuredArgs),
    /// Construct a negative-degree holomorphic completion for non-extendable data
    Witness(WitnessArgs),
    /// Orientation-reversing complex-linear completion for a real-linear map
    LinearWitness(LinearWitnessArgs),
    /// Run the full verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct WindArgs {
    /// Sampled loop JSON: {"samples":[{"theta":..,"re":..,"im":..},..]}
    #[arg(long = "loop", conflicts_with = "poly")]
    loop_file: Option<PathBuf>,
    /// Mixed univariate polynomial JSON, evaluated on a circle
    #[arg(long, requires = "radius")]
    poly: Option<PathBuf>,
    /// Circle center "re,im" (with --poly)
    #[arg(long, default_value = "0,0", value_parser = parse_complex)]
    center: Complex64,
    /// Circle radius (with --poly)
    #[arg(long)]
    radius: Option<f64>,
    /// Initial sample count for the refinement
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Export the sampled loop as CSV (theta, re, im)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Line JSON: {"base":[[re,im],..],"direction":[[re,im],..]}
    #[arg(long)]
    line: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Mixed univariate polynomial JSON: {"terms":[{"re":..,"im":..,"z":i,"zbar":j}]}
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, value_parser = parse_complex)]
    center: Complex64,
    #[arg(long)]
    radius: f64,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Mixed map JSON: array of mixed polynomials
    #[arg(long)]
    map: PathBuf,
    /// Number of random lines to sample
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DegreeOracleArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    map: PathBuf,
    /// Start-grid density per real axis
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative zero tolerance scale
    #[arg(long)]
    zero_tol: Option<f64>,
}

#[derive(Args)]
struct StructuredArgs {
    #[arg(long)]
    domain: PathBuf,
    /// First-component polynomial JSON
    #[arg(long)]
    component: PathBuf,
    #[arg(long)]
    line: PathBuf,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lines: Option<usize>,
}

#[derive(Args)]
struct LinearWitnessArgs {
    /// 2N x 2N real matrix JSON (array of rows)
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RunConfig {
    seed: Option<u64>,
    tolerances: Option<ToleranceConfig>,
    sample_counts: Option<SampleCountConfig>,
    output_path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ToleranceConfig {
    zero_tol: Option<f64>,
    fourier_tol: Option<f64>,
    dedup_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SampleCountConfig {
    boundary: Option<usize>,
    lines: Option<usize>,
    lambda_steps: Option<usize>,
}

impl RunConfig {
    fn apply(self, params: &mut Params) {
        if let Some(t) = self.tolerances {
            if let Some(v) = t.zero_tol {
                params.zero_tol_scale = v;
            }
            if let Some(v) = t.fourier_tol {
                params.fourier_tol_scale = v;
            }
            if let Some(v) = t.dedup_radius {
                params.dedup_radius_scale = v;
            }
        }
        if let Some(s) = self.sample_counts {
            if let Some(v) = s.boundary {
                params.boundary_samples = v;
            }
            if let Some(v) = s.lines {
                params.line_count = v;
            }
            if let Some(v) = s.lambda_steps {
                params.lambda_steps = v;
            }
        }
    }
}

const DEFAULT_SEED: u64 = 7;

// ---------------------------------------------------------------------------
// Error reporting
// ---------------------------------------------------------------------------

struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { kind: "InvalidInput".into(), message: message.into(), code: 2 }
    }
}

fn classify(e: &CoreError) -> (&'static str, u8) {
    use CoreError::*;
    match e {
        DimensionMismatch { .. } => ("DimensionMismatch", 2),
        InvalidInput(_) => ("InvalidInput", 2),
        DegenerateSlice => ("DegenerateSlice", 2),
        NonTransverseLine => ("NonTransverseLine", 2),
        ZeroOnBoundary { .. } => ("ZeroOnBoundary", 2),
        ZeroOnSliceBoundary { .. } => ("ZeroOnSliceBoundary", 2),
        SingularMap => ("SingularMap", 2),
        IsComplexLinear => ("IsComplexLinear", 1),
        DataExtends => ("DataExtends", 1),
        NoConvergence { .. } => ("NoConvergence", 3),
        IrregularZero { .. } => ("IrregularZero", 3),
        SuspectMissedZeros { .. } => ("SuspectMissedZeros", 3),
        NoValidB => ("NoValidB", 3),
        TCapExceeded => ("TCapExceeded", 3),
        DegreeMismatch { .. } => ("DegreeMismatch", 3),
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let (kind, code) = classify(&e);
        Failure { kind: kind.into(), message: e.to_string(), code }
    }
}

fn emit_failure(f: &Failure) -> ExitCode {
    #[derive(Serialize)]
    struct ErrorBody<'a> {
        kind: &'a str,
        message: &'a str,
    }
    #[derive(Serialize)]
    struct ErrorJson<'a> {
        error: ErrorBody<'a>,
    }
    let json = serde_json::to_string(&ErrorJson {
        error: ErrorBody { kind: &f.kind, message: &f.message },
    })
    .expect("error object serializes");
    eprintln!("{json}");
    ExitCode::from(f.code)
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected \"re,im\"".into());
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?;
    Ok(Complex64::new(re, im))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("cannot parse {what} file {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, json: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn write_loop_csv(path: &Path, lp: &SampledLoop) -> Result<(), Failure> {
    let mut text = String::from("theta,re,im\n");
    for (theta, v) in lp.angles().iter().zip(lp.values()) {
        text.push_str(&format!("{theta},{},{}\n", v.re, v.im));
    }
    fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("result serializes")
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

struct Ctx {
    params: Params,
    seed: u64,
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut params = Params::default();
    let mut seed = DEFAULT_SEED;
    let mut out = cli.out;
    if let Some(path) = &cli.config {
        let config: RunConfig = read_json(path, "config")?;
        if let Some(s) = config.seed {
            seed = s;
        }
        if out.is_none() {
            out = config.output_path.clone();
        }
        config.apply(&mut params);
        params.validate().map_err(Failure::from)?;
    }
    let ctx = Ctx { params, seed, out };
    match cli.command {
        Command::Wind(args) => wind(args, &ctx),
        Command::Slice(args) => slice(args, &ctx),
        Command::Split(args) => split(args, &ctx),
        Command::ExtendTest(args) => extend_test(args, &ctx),
        Command::DegreeOracle(args) => degree_oracle(args, &ctx),
        Command::StructuredDegree(args) => structured(args, &ctx),
        Command::Witness(args) => witness(args, &ctx),
        Command::LinearWitness(args) => linear(args, &ctx),
        Command::Verify(args) => verify_cmd(args, &ctx),
    }
}

fn wind(args: WindArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let (result, sampled): (WindingResult, SampledLoop) = match (&args.loop_file, &args.poly) {
        (Some(path), None) => {
            let lp: SampledLoop = read_json(path, "loop")?;
            let result = winding_of_loop(&lp, ctx.params.zero_tol_scale)?;
            (result, lp)
        }
        (None, Some(path)) => {
            let poly: UnivariateMixed = read_json(path, "polynomial")?;
            let radius =
                args.radius.ok_or_else(|| Failure::usage("--radius required with --poly"))?;
            let center = args.center;
            let result = winding_number(
                |theta| poly.evaluate(center + radius * Complex64::from_polar(1.0, theta)),
                args.samples,
                ctx.params.zero_tol_scale,
            )?;
            let lp = sample_component(&poly, center, radius, result.samples_used)?;
            (result, lp)
        }
        _ => return Err(Failure::usage("provide exactly one of --loop or --poly")),
    };
    if let Some(csv) = &args.csv {
        write_loop_csv(csv, &sampled)?;
    }
    write_output(ctx.out.as_deref(), &to_json(&result))?;
    Ok(0)
}

fn slice(args: SliceArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let domain: Domain = read_json(&args.domain, "domain")?;
    let line: ComplexLine = read_json(&args.line, "line")?;
    let json = match domain.slice(&line)? {
        Some(slice) => to_json(&slice),
        None => r#"{"empty":true}"#.to_string(),
    };
    write_output(ctx.out.as_deref(), &json)?;
    Ok(0)
}

fn split(args: SplitArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let poly: UnivariateMixed = read_json(&args.poly, "polynomial")?;
    let (q, s) = split_on_circle(&poly, args.center, args.radius)?;
    #[derive(Serialize)]
    struct SplitOut {
        q: holodeg::mixed::HoloPoly,
        s: holodeg::mixed::HoloPoly,
    }
    write_output(ctx.out.as_deref(), &to_json(&SplitOut { q, s }))?;
    Ok(0)
}

fn extend_test(args: ExtendArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let domain: Domain = read_json(&args.domain, "domain")?;
    let map: MixedMap = read_json(&args.map, "map")?;
    let lines = args.lines.unwrap_or(ctx.params.line_count);
    let seed = args.seed.unwrap_or(ctx.seed);
    let verdict = line_family_extension_test(&map, &domain, lines, seed, &ctx.params)?;
    let extends = verdict.extends;
    write_output(ctx.out.as_deref(), &to_json(&verdict))?;
    Ok(if extends { 0 } else { 1 })
}

fn degree_oracle(args: DegreeOracleArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let domain: Domain = read_json(&args.domain, "domain")?;
    let map: MixedMap = read_json(&args.map, "map")?;
    if map.vars() != domain.dim() {
        return Err(Failure::usage("map and domain dimensions differ"));
    }
    let mut params = ctx.params.clone();
    if let Some(v) = args.zero_tol {
        params.zero_tol_scale = v;
        params.validate().map_err(Failure::from)?;
    }
    let grid = args.grid.unwrap_or(params.grid_density);
    let seed = args.seed.unwrap_or(ctx.seed);
    let oracle_map = map.clone();
    let cert = zero_count_degree(
        move |z| oracle_map.evaluate(z).expect("dimensions checked"),
        &domain,
        grid,
        seed,
        &params,
    )?;
    write_output(ctx.out.as_deref(), &to_json(&cert))?;
    Ok(0)
}

fn structured(args: StructuredArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let domain: Domain = read_json(&args.domain, "domain")?;
    let component: MixedPolynomial = read_json(&args.component, "component")?;
    let line: ComplexLine = read_json(&args.line, "line")?;
    let cert = structured_degree(&component, &domain, &line, &ctx.params)?;
    write_output(ctx.out.as_deref(), &to_json(&cert))?;
    Ok(0)
}

fn witness(args: WitnessArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let domain: Domain = read_json(&args.domain, "domain")?;
    let map: MixedMap = read_json(&args.map, "map")?;
    let mut params = ctx.params.clone();
    if let Some(lines) = args.lines {
        params.line_count = lines;
        params.validate().map_err(Failure::from)?;
    }
    let seed = args.seed.unwrap_or(ctx.seed);
    let report = assemble_witness(&map, &domain, seed, &params)?;
    write_output(ctx.out.as_deref(), &to_json(&report))?;
    Ok(0)
}

fn linear(args: LinearWitnessArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let matrix: RealLinearMap = read_json(&args.matrix, "matrix")?;
    let report = linear_witness(&matrix, &ctx.params)?;
    write_output(ctx.out.as_deref(), &to_json(&report))?;
    Ok(0)
}

fn verify_cmd(args: VerifyArgs, ctx: &Ctx) -> Result<u8, Failure> {
    let seed = args.seed.unwrap_or(ctx.seed);
    let report = verify::run_all(seed, &ctx.params);
    let pass = report.pass;
    write_output(ctx.out.as_deref(), &to_json(&report))?;
    Ok(if pass { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => emit_failure(&failure),
    }
}
