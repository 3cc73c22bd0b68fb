//! Command-line frontend for `hypmetrics`.
//!
//! Every command except `sharp` (CSV) and `ball --csv` prints a JSON report
//! `{command, config, results, version, seed}`. Exit codes: 0 on success,
//! 1 when a verification finds violations or a numerical routine fails,
//! 2 on argument errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hypmetrics::conformal::{self, DistortionSummary, MapSpec};
use hypmetrics::contour;
use hypmetrics::oracle::{self, OracleConfig};
use hypmetrics::verify::{self, Family, SampleConfig};
use hypmetrics::{Domain, DomainKind, Error, MetricKind, Point, SolverConfig};

pub const SEED_ENV: &str = "HYPMETRICS_SEED";

/// Violations listed per summary in a report; the full count is always given.
const MAX_LISTED_VIOLATIONS: usize = 20;

#[derive(Parser, Debug)]
#[command(
    name = "hypmetrics",
    version,
    about = "Hyperbolic-type metrics: evaluation and numerical verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one metric at a pair of points.
    Eval {
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Comma-separated coordinates, e.g. `0,1`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Run a verification suite on seeded random samples.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u16).range(2..))]
        dim: u16,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        /// Defaults to $HYPMETRICS_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Ball center for the inclusion suite.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        /// Radii for the inclusion suite.
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 0.9])]
        r: Vec<f64>,
        /// Stretch exponents for the quasiregular suite.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.75])]
        exponent: Vec<f64>,
    },
    /// Trace a sharpness family and print `parameter,ratio` rows.
    Sharp {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Print the JSON report instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Extract the boundary of a metric ball in a planar domain.
    Ball {
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        level: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Also write an SVG drawing to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Print `loop_id,vertex_id,x,y` rows instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Maximum deviation between the closed forms and the brute-force oracles.
    Compare {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DomainArg {
    Half,
    Ball,
    Punctured,
}

impl DomainArg {
    fn build(self, dim: usize) -> Domain {
        match self {
            DomainArg::Half => Domain::half_space(dim),
            DomainArg::Ball => Domain::unit_ball(dim),
            DomainArg::Punctured => Domain::punctured(dim),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Ctilde,
    S,
    J,
    Jstar,
    Rho,
    Thrho,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Ctilde => MetricKind::CTilde,
            MetricArg::S => MetricKind::S,
            MetricArg::J => MetricKind::J,
            MetricArg::Jstar => MetricKind::JStar,
            MetricArg::Rho => MetricKind::Rho,
            MetricArg::Thrho => MetricKind::ThRhoHalf,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Suite {
    Ineq,
    Triangle,
    Inclusion,
    Conformal,
    Qr,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    config: Value,
    results: Value,
    version: &'static str,
    seed: Option<u64>,
}

/// Why a command did not succeed.
#[derive(Debug)]
enum Failure {
    /// bad flags or inputs (exit 2)
    Usage(String),
    /// violations found or a numerical routine failed (exit 1)
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Domain { .. }
            | Error::Dimension { .. }
            | Error::UndefinedAngle
            | Error::Pole { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Check(format!("serialization error: {e}"))
    }
}

/// Whether the command's checks all passed.
type Outcome = std::result::Result<bool, Failure>;

/// Runs the CLI with `argv` (including the program name), writing the report
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Eval {
            domain,
            metric,
            x,
            y,
        } => eval(domain, metric.into(), &x, &y, out),
        Command::Verify {
            suite,
            domain,
            dim,
            pairs,
            seed,
            tol,
            center,
            r,
            exponent,
        } => {
            let mut cfg =
                SampleConfig::new(domain.build(usize::from(dim)), pairs, resolve_seed(seed)?);
            cfg.tol = tol;
            cfg.validate()?;
            verify_suite(suite, &cfg, center.as_deref(), &r, &exponent, out)
        }
        Command::Sharp {
            family,
            steps,
            json,
        } => sharp(&family, steps, json, out),
        Command::Ball {
            domain,
            metric,
            center,
            level,
            grid,
            svg,
            csv,
        } => ball(domain, metric.into(), &center, level, grid, svg, csv, out),
        Command::Compare { pairs, seed } => compare(pairs, resolve_seed(seed)?, out),
    }
}

fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn parse_point(text: &str) -> std::result::Result<Point, Failure> {
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("cannot parse point {text:?}: {e}")))?;
    Ok(Point::new(coords)?)
}

fn emit(out: &mut dyn Write, report: &Report) -> std::result::Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

fn report(command: &'static str, config: Value, results: Value, seed: Option<u64>) -> Report {
    Report {
        command,
        config,
        results,
        version: env!("CARGO_PKG_VERSION"),
        seed,
    }
}

/// Serializes a summary, listing at most a few violations next to their total count.
fn summarize<T: Serialize>(summary: &T) -> std::result::Result<Value, Failure> {
    let mut v = serde_json::to_value(summary)?;
    if let Some(map) = v.as_object_mut() {
        if let Some(Value::Array(list)) = map.get_mut("violations") {
            let total = list.len();
            list.truncate(MAX_LISTED_VIOLATIONS);
            map.insert("violation_count".into(), json!(total));
        }
    }
    Ok(v)
}

fn eval(domain: DomainArg, metric: MetricKind, x: &str, y: &str, out: &mut dyn Write) -> Outcome {
    let (x, y) = (parse_point(x)?, parse_point(y)?);
    let d = domain.build(x.dim());
    let rep = hypmetrics::metrics::evaluate(metric, &d, &x, &y, &SolverConfig::default())?;
    let config = json!({ "domain": d.kind().name(), "metric": metric.name(), "x": x, "y": y });
    emit(
        out,
        &report("eval", config, serde_json::to_value(&rep)?, None),
    )?;
    Ok(true)
}

fn verify_suite(
    suite: Suite,
    cfg: &SampleConfig,
    center: Option<&str>,
    radii: &[f64],
    exponents: &[f64],
    out: &mut dyn Write,
) -> Outcome {
    let domain = &cfg.domain;
    let mut config = json!({
        "domain": domain.kind().name(),
        "dim": domain.dim(),
        "pairs": cfg.pair_count,
        "tol": cfg.tol,
    });
    let (name, results, passed): (&str, Vec<Value>, bool) = match suite {
        Suite::Ineq => {
            let summaries = verify::sweep_ratios(&verify::inequality_suite(domain), cfg)?;
            let passed = summaries.iter().all(|s| s.passed());
            (
                "ineq",
                summaries
                    .iter()
                    .map(summarize)
                    .collect::<std::result::Result<_, _>>()?,
                passed,
            )
        }
        Suite::Triangle => {
            let t = verify::check_triangle(MetricKind::CTilde, cfg)?;
            let passed = t.violations.is_empty();
            ("triangle", vec![summarize(&t)?], passed)
        }
        Suite::Inclusion => {
            let center = match center {
                Some(c) => parse_point(c)?,
                None => default_center(domain),
            };
            config["center"] = json!(center);
            config["r"] = json!(radii);
            let mut results = Vec::new();
            let mut passed = true;
            for &r in radii {
                let rep = verify::check_ball_inclusions(&center, r, cfg)?;
                passed &= rep.violations.is_empty();
                results.push(summarize(&rep)?);
            }
            ("inclusion", results, passed)
        }
        Suite::Conformal => {
            let pairs = cfg.pairs();
            let maps = conformal_maps(domain)?;
            let mut results = Vec::new();
            let mut passed = true;
            for map in &maps {
                let inv = conformal::check_hyperbolic_invariance(map, &pairs)?;
                let dist = conformal::check_conformal_distortion(map, &pairs, &cfg.solver)?;
                passed &= inv.passed() && dist.passed();
                results.push(json!({
                    "map": map,
                    "invariance": summarize(&inv)?,
                    "distortion": summarize(&dist)?,
                }));
            }
            ("conformal", results, passed)
        }
        Suite::Qr => {
            if domain.kind() != DomainKind::UnitBall || domain.dim() != 2 {
                return Err(Failure::Usage(
                    "the quasiregular suite runs in the unit disk (--domain ball --dim 2)".into(),
                ));
            }
            config["exponent"] = json!(exponents);
            let pairs = cfg.pairs();
            let mut results = Vec::new();
            let mut passed = true;
            for &a in exponents {
                let s: DistortionSummary = conformal::check_quasiregular(a, &pairs, &cfg.solver)?;
                passed &= s.passed();
                results.push(json!({ "exponent": a, "summary": summarize(&s)? }));
            }
            ("qr", results, passed)
        }
    };
    config["suite"] = json!(name);
    emit(
        out,
        &report(
            "verify",
            config,
            json!({ "passed": passed, "summaries": results }),
            Some(cfg.seed),
        ),
    )?;
    Ok(passed)
}

fn default_center(domain: &Domain) -> Point {
    let n = domain.dim();
    match domain.kind() {
        DomainKind::UnitBall => Point::unit(n, 0).scaled(0.3),
        DomainKind::PuncturedSpace => Point::unit(n, 0),
        _ => Point::unit(n, n - 1),
    }
}

fn conformal_maps(domain: &Domain) -> std::result::Result<Vec<MapSpec>, Failure> {
    let n = domain.dim();
    match domain.kind() {
        DomainKind::HalfSpace => {
            let mut shift = vec![0.0; n];
            shift[0] = 0.7;
            Ok(vec![
                MapSpec::half_to_ball(n),
                MapSpec::HalfSimilarity { scale: 3.5, shift },
            ])
        }
        DomainKind::UnitBall => {
            let (c, s) = (0.6f64, 0.8f64);
            let mut matrix: Vec<Vec<f64>> =
                (0..n).map(|i| Point::unit(n, i).into_coords()).collect();
            matrix[0][0] = c;
            matrix[0][1] = -s;
            matrix[1][0] = s;
            matrix[1][1] = c;
            Ok(vec![
                MapSpec::ball_to_half(n),
                MapSpec::BallRotation { matrix },
            ])
        }
        _ => Err(Failure::Usage(
            "the conformal suite runs in the half-space or the unit ball".into(),
        )),
    }
}

fn sharp(family: &str, steps: usize, as_json: bool, out: &mut dyn Write) -> Outcome {
    let family: Family = family.parse()?;
    let trace = verify::sharpness_family(family, steps)?;
    if as_json {
        let config = json!({ "family": family.id(), "steps": steps });
        emit(
            out,
            &report("sharp", config, serde_json::to_value(&trace)?, None),
        )?;
    } else {
        writeln!(out, "parameter,ratio")?;
        for p in &trace.points {
            writeln!(out, "{},{}", p.parameter, p.ratio)?;
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn ball(
    domain: DomainArg,
    metric: MetricKind,
    center: &str,
    level: f64,
    grid: usize,
    svg: Option<PathBuf>,
    csv: bool,
    out: &mut dyn Write,
) -> Outcome {
    let center = parse_point(center)?;
    let d = domain.build(center.dim());
    let c =
        contour::metric_ball_contour(&d, metric, &center, level, grid, &SolverConfig::default())?;
    if let Some(path) = &svg {
        std::fs::write(path, contour::to_svg(&d, &c))?;
    }
    if csv {
        write!(out, "{}", contour::to_csv(&c.polylines))?;
    } else {
        let config = json!({
            "domain": d.kind().name(),
            "metric": metric.name(),
            "center": center,
            "level": level,
            "grid": grid,
            "svg": svg,
        });
        let results = json!({
            "loops": c.polylines.len(),
            "window": { "lo": c.lo, "hi": c.hi },
            "spacing": c.spacing(),
            "polylines": c.polylines,
        });
        emit(out, &report("ball", config, results, None))?;
    }
    Ok(true)
}

/// Agreement required between closed forms and the reduced oracles.
const COMPARE_TOL: f64 = 1e-6;
/// Agreement required with the full-boundary planar oracle, whose search
/// interval is much longer for the same grid.
const COMPARE_FULL_TOL: f64 = 1e-5;

fn compare(pairs: usize, seed: u64, out: &mut dyn Write) -> Outcome {
    if pairs == 0 {
        return Err(Failure::Usage("--pairs must be at least 1".into()));
    }
    let ocfg = OracleConfig::default();
    let solver = SolverConfig::default();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_full = 0.0f64;
    for domain in [
        Domain::half_space(2),
        Domain::half_space(3),
        Domain::unit_ball(2),
        Domain::unit_ball(3),
    ] {
        let sample = SampleConfig::new(domain.clone(), pairs, seed).pairs();
        let devs = hypmetrics::par::map_slice(&sample, |(x, y)| -> hypmetrics::Result<[f64; 3]> {
            let c = hypmetrics::metrics::value(MetricKind::CTilde, &domain, x, y, &solver)?;
            let s = hypmetrics::metrics::value(MetricKind::S, &domain, x, y, &solver)?;
            let reduced = (c - oracle::ctilde_oracle_reduced(&domain, x, y, &ocfg)?).abs();
            let s_dev = (s - oracle::s_oracle(&domain, x, y, &ocfg)?).abs();
            let naive = if domain.dim() == 2 {
                (c - oracle::ctilde_oracle_naive2d(&domain, x, y, &ocfg)?).abs()
            } else {
                0.0
            };
            Ok([reduced, naive, s_dev])
        });
        let mut max = [0.0f64; 3];
        for d in devs {
            let d = d?;
            for k in 0..3 {
                max[k] = max[k].max(d[k]);
            }
        }
        worst = worst.max(max[0]).max(max[2]);
        worst_full = worst_full.max(max[1]);
        rows.push(json!({
            "domain": domain.kind().name(),
            "dim": domain.dim(),
            "ctilde_vs_reduced": max[0],
            "ctilde_vs_full_boundary": (domain.dim() == 2).then_some(max[1]),
            "s_vs_oracle": max[2],
        }));
    }
    let passed = worst <= COMPARE_TOL && worst_full <= COMPARE_FULL_TOL;
    let config = json!({ "pairs": pairs, "tol": COMPARE_TOL, "full_boundary_tol": COMPARE_FULL_TOL, "oracle": ocfg });
    let results = json!({
        "max_deviation": worst,
        "max_full_boundary_deviation": worst_full,
        "passed": passed,
        "domains": rows,
    });
    emit(out, &report("compare", config, results, Some(seed)))?;
    Ok(passed)
}
