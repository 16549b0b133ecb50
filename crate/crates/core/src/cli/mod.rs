//! The `borbit` command line.
//!
//! Exit codes: 0 success, 1 a failed check or violated invariant, 2 bad input
//! (parse, configuration, domain, dimension, i/o, out-of-scope map), 3 numerical
//! or construction failure.

pub mod config;
pub mod mapspec;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    orbit_distance_profile_with, premodel_validate, region_equivalence_check, shift_recovery,
    tube_covering_check, CheckLine, Report, EPS_PLATEAU,
};
use crate::catalog::verify_brfp;
use crate::error::{Error, Result};
use crate::geometry::{
    horofunction, kob_dist, koranyi_functional, BoundaryPoint, GeodesicTube, KoranyiRegion,
};
use crate::numeric::{fmt15, CX_I};
use crate::orbit::{
    backward_orbit_via_preimages, construct_with_clearance, kobayashi_offset, read_orbit_csv,
    write_orbit_csv, OrbitSegment, PreimageParams,
};
use crate::suite::{run_suite, DEFAULT_SEED, MAX_SHIFT, REGION_SAMPLES, TUBE_SAMPLES};

pub use config::RunConfig;
pub use mapspec::{load_map, load_premodel, parse_boundary, parse_point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => EXIT_CHECK_FAILED,
        Error::Parse(_)
        | Error::Config(_)
        | Error::Domain(_)
        | Error::DimensionMismatch { .. }
        | Error::Io(_)
        | Error::OutOfScope { .. } => EXIT_INPUT,
        Error::Numerical(_) | Error::Construction(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "borbit",
    version,
    about = "Backward orbits to boundary repelling fixed points of ball self-maps"
)]
pub struct Cli {
    /// RNG seed for every sampled check.
    #[arg(long, global = true, env = "BORBIT_SEED")]
    seed: Option<u64>,
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distances, horofunctions and region membership.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Dilation at a boundary fixed point.
    Dilation {
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
    },
    /// Constructs a backward orbit and writes it as CSV.
    Orbit(OrbitArgs),
    /// Compares two backward orbits converging to the same point.
    Compare(CompareArgs),
    /// Runs the four pre-model checks.
    ValidatePremodel {
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
        /// TOML pre-model file.
        #[arg(long)]
        premodel: PathBuf,
    },
    /// Checks that graded tube samples lie in the matching Korányi region.
    Regions {
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
        /// Tube width L.
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Korányi amplitude M; defaults to e^L.
        #[arg(long = "M")]
        amplitude: Option<f64>,
        #[arg(long, default_value_t = REGION_SAMPLES)]
        samples: usize,
        /// Orbit CSV whose tail is located against the regions.
        #[arg(long)]
        orbit: Option<PathBuf>,
    },
    /// Covering radius of a tube by an orbit read from CSV.
    Tube {
        #[arg(long)]
        orbit: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = TUBE_SAMPLES)]
        samples: usize,
    },
    /// The acceptance battery.
    Suite,
}

#[derive(Debug, Subcommand)]
enum GeometryCmd {
    /// Kobayashi distance between two points.
    Dist {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Horofunction at `zeta` with pole at the origin.
    Horo {
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
    },
    /// Membership in the Korányi region K(zeta, M).
    Koranyi {
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        #[arg(long = "M")]
        amplitude: f64,
    },
    /// Membership in the tube of width L around the radius to zeta.
    Tube {
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        #[arg(long)]
        width: f64,
    },
}

#[derive(Debug, Args)]
struct OrbitArgs {
    map: String,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<String>,
    /// Dilation at zeta; estimated when omitted.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    kmin: Option<u32>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    eps_sigma: Option<f64>,
    #[arg(long)]
    rho_cluster: Option<f64>,
    #[arg(long)]
    tol_cluster: Option<f64>,
    /// `single-tail` or `cluster`.
    #[arg(long)]
    mode: Option<String>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    map: String,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<String>,
    /// First orbit as CSV; constructed when omitted.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Second orbit as CSV; otherwise a Newton backward orbit.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Start of the Newton orbit; defaults to a Kobayashi offset of the first orbit's start.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Kobayashi offset of the default Newton start.
    #[arg(long, default_value_t = 0.05)]
    offset: f64,
    #[arg(long, default_value_t = MAX_SHIFT)]
    max_shift: usize,
    #[arg(long)]
    eps_plateau: Option<f64>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Ctx {
    seed: u64,
    config: RunConfig,
}

impl Ctx {
    fn zeta(&self, flag: Option<&str>) -> Result<BoundaryPoint> {
        match flag.or(self.config.zeta.as_deref()) {
            Some(s) => parse_boundary(s),
            None => Err(Error::Config(
                "a boundary point is required (--zeta)".into(),
            )),
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        config,
    };
    match cli.command {
        Command::Geometry(g) => geometry(g, out),
        Command::Dilation { map, zeta } => dilation(&ctx, &map, zeta.as_deref(), out),
        Command::Orbit(a) => orbit(&ctx, a, out, err),
        Command::Compare(a) => compare(&ctx, a, out),
        Command::ValidatePremodel {
            map,
            zeta,
            premodel,
        } => {
            let f = load_map(&map)?;
            let zeta = ctx.zeta(zeta.as_deref())?;
            let model = load_premodel(&premodel, f.dim())?;
            let r = premodel_validate(&f, &model, &zeta, ctx.seed)?;
            writeln!(out, "lambda_tau = {}", fmt15(r.lambda_tau))?;
            writeln!(out, "lambda_f = {}", fmt15(r.lambda_f))?;
            writeln!(out, "intertwining_residual = {}", fmt15(r.residual))?;
            writeln!(
                out,
                "backward_dist = {} after {} steps",
                fmt15(r.backward_dist),
                r.backward_steps
            )?;
            writeln!(out, "k_limit_dist = {}", fmt15(r.probe_dist))?;
            finish(&r.report, out)
        }
        Command::Regions {
            zeta,
            width,
            amplitude,
            samples,
            orbit,
        } => {
            let zeta = ctx.zeta(zeta.as_deref())?;
            let amplitude = amplitude.unwrap_or(width.exp());
            let seq = match orbit {
                Some(p) => read_csv(&p, &zeta)?.points().to_vec(),
                None => Vec::new(),
            };
            let r = region_equivalence_check(&zeta, &seq, width, amplitude, samples, ctx.seed)?;
            writeln!(out, "samples = {samples}")?;
            writeln!(out, "violations = {}", r.violations)?;
            writeln!(out, "max_functional = {}", fmt15(r.max_functional))?;
            if let Some(t) = r.tail_functional {
                writeln!(out, "tail_functional = {}", fmt15(t))?;
            }
            if let Some(l) = r.l_hat {
                writeln!(out, "l_hat = {}", fmt15(l))?;
            }
            let mut rep = Report::new();
            rep.push(CheckLine::new(
                "regions.tube_in_koranyi",
                r.passed(),
                r.margin,
            ));
            if let Some(inside) = r.tail_in_koranyi {
                let m = 2.0 * amplitude.ln() - r.tail_functional.unwrap_or(f64::INFINITY);
                rep.push(CheckLine::new("regions.tail_in_koranyi", inside, m));
            }
            finish(&rep, out)
        }
        Command::Tube {
            orbit,
            zeta,
            width,
            samples,
        } => {
            let zeta = ctx.zeta(zeta.as_deref())?;
            let eta = read_csv(&orbit, &zeta)?;
            let r = tube_covering_check(&eta, width, samples, ctx.seed)?;
            writeln!(out, "r_hat = {}", fmt15(r.r_hat))?;
            writeln!(out, "c_hat = {}", fmt15(r.c_hat))?;
            writeln!(out, "sigma_hat = {}", fmt15(r.sigma_hat))?;
            writeln!(out, "bound = {}", fmt15(r.bound))?;
            writeln!(out, "r_shallow = {}", fmt15(r.r_shallow))?;
            writeln!(out, "r_deep = {}", fmt15(r.r_deep))?;
            let mut rep = Report::new();
            rep.push(CheckLine::new("tube.covering", r.passed(), r.margin()));
            finish(&rep, out)
        }
        Command::Suite => {
            let rep = run_suite(ctx.seed)?;
            writeln!(out, "seed = {}", ctx.seed)?;
            finish(&rep, out)
        }
    }
}

fn finish(rep: &Report, out: &mut dyn Write) -> Result<i32> {
    write!(out, "{rep}")?;
    writeln!(
        out,
        "overall: {}",
        if rep.passed() { "PASS" } else { "FAIL" }
    )?;
    Ok(if rep.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn read_csv(path: &PathBuf, zeta: &BoundaryPoint) -> Result<OrbitSegment> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_orbit_csv(BufReader::new(file), zeta, &path.display().to_string())
}

fn geometry(cmd: GeometryCmd, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        GeometryCmd::Dist { a, b } => {
            let d = kob_dist(&parse_point(&a)?, &parse_point(&b)?)?;
            writeln!(out, "{}", fmt15(d))?;
        }
        GeometryCmd::Horo { z, zeta } => {
            let h = horofunction(&parse_point(&z)?, &parse_boundary(&zeta)?)?;
            writeln!(out, "{}", fmt15(h))?;
        }
        GeometryCmd::Koranyi { z, zeta, amplitude } => {
            let z = parse_point(&z)?;
            let zeta = parse_boundary(&zeta)?;
            let m = KoranyiRegion::new(zeta.clone(), amplitude)?.contains(&z)?;
            writeln!(
                out,
                "functional = {}",
                fmt15(koranyi_functional(&z, &zeta)?)
            )?;
            writeln!(
                out,
                "{} margin={}",
                if m.inside { "inside" } else { "outside" },
                fmt15(m.margin)
            )?;
        }
        GeometryCmd::Tube { z, zeta, width } => {
            let m =
                GeodesicTube::new(parse_boundary(&zeta)?, width)?.contains(&parse_point(&z)?)?;
            writeln!(
                out,
                "{} margin={}",
                if m.inside { "inside" } else { "outside" },
                fmt15(m.margin)
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn dilation(ctx: &Ctx, map: &str, zeta: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let f = load_map(map)?;
    let zeta = ctx.zeta(zeta)?;
    let r = verify_brfp(&f, &zeta)?;
    let e = &r.estimate;
    writeln!(out, "lambda = {}", fmt15(e.lambda))?;
    writeln!(out, "log_lambda = {}", fmt15(e.log_lambda))?;
    writeln!(out, "tail_infimum = {}", fmt15(e.tail_infimum))?;
    if let Some(j) = e.jacobian_dilation {
        writeln!(out, "jacobian_dilation = {}", fmt15(j))?;
    }
    for (seq, res) in r.probes.residuals.iter().enumerate() {
        let last = res.last().copied().unwrap_or(f64::NAN);
        writeln!(out, "k_limit_probe_{seq} = {}", fmt15(last))?;
    }
    Ok(EXIT_OK)
}

fn orbit(ctx: &Ctx, a: OrbitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = ctx.config.clone();
    macro_rules! over {
        ($($flag:ident => $field:ident),*) => { $(if a.$flag.is_some() { cfg.$field = a.$flag.clone(); })* };
    }
    over!(kmin => k_min, kmax => k_max, nmax => n_max, eps_sigma => eps_sigma,
          rho_cluster => rho_cluster, tol_cluster => tol_cluster, mode => mode,
          out => out, lambda => lambda);
    cfg.validate()?;
    let params = cfg.orbit_params()?;
    let mut f = load_map(&a.map)?;
    let zeta = ctx.zeta(a.zeta.as_deref())?;
    if let Some(l) = cfg.lambda {
        f = f.with_known_fixed_point(zeta.clone(), l)?;
    }
    let r = construct_with_clearance(&f, &zeta, &params)?;
    let orbit = &r.original;
    match &cfg.out {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write_orbit_csv(orbit, &mut w)?;
            w.flush()?;
        }
        None => write_orbit_csv(orbit, &mut *out)?,
    }
    // the summary goes wherever the CSV does not
    let summary: &mut dyn Write = if cfg.out.is_some() { out } else { err };
    let steps = orbit.steps();
    writeln!(summary, "map = {}", f.label())?;
    writeln!(summary, "lambda = {}", fmt15(r.lambda))?;
    writeln!(summary, "clearance_translation = {}", fmt15(r.translation))?;
    writeln!(summary, "mode = {}", r.cleared.mode)?;
    if let Some(k) = r.cleared.chosen_k {
        writeln!(summary, "chosen_k = {k}")?;
    }
    writeln!(summary, "points = {}", orbit.len())?;
    writeln!(
        summary,
        "final_step = {}",
        fmt15(steps.last().copied().unwrap_or(f64::NAN))
    )?;
    writeln!(summary, "log_lambda = {}", fmt15(r.lambda.ln()))?;
    writeln!(
        summary,
        "backward_residual = {}",
        fmt15(orbit.backward_residual(&f))
    )?;
    let last = orbit.points().last().expect("non-empty orbit");
    writeln!(
        summary,
        "final_dist_to_zeta = {}",
        fmt15(zeta.dist_from(last))
    )?;
    for w in &r.cleared.warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(EXIT_OK)
}

fn compare(ctx: &Ctx, a: CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_map(&a.map)?;
    let zeta = ctx.zeta(a.zeta.as_deref())?;
    let eps_plateau = a
        .eps_plateau
        .or(ctx.config.eps_plateau)
        .unwrap_or(EPS_PLATEAU);
    let xi = match &a.a {
        Some(p) => read_csv(p, &zeta)?,
        None => construct_with_clearance(&f, &zeta, &ctx.config.orbit_params()?)?.original,
    };
    let eta = match &a.b {
        Some(p) => read_csv(p, &zeta)?,
        None => {
            let start = match &a.start {
                Some(s) => parse_point(s)?,
                None => {
                    let dir: Vec<_> = zeta.coords().iter().map(|c| *c * CX_I).collect();
                    kobayashi_offset(&xi.points()[0], &dir, a.offset)?
                }
            };
            let lambda = match (ctx.config.lambda, f.known_dilation(&zeta)) {
                (Some(l), _) | (None, Some(l)) => l,
                (None, None) => crate::catalog::estimate_dilation(&f, &zeta)?.lambda,
            };
            let steps = (xi.last_index() - xi.first_index()) as usize;
            let eta = backward_orbit_via_preimages(
                &f,
                &start,
                &zeta,
                lambda,
                steps,
                &PreimageParams::default(),
            )?;
            OrbitSegment::with_first_index(
                eta.points().to_vec(),
                xi.first_index(),
                zeta.clone(),
                eta.lambda(),
                eta.map_label(),
            )?
        }
    };
    let cmp = orbit_distance_profile_with(&f, &xi, &eta, eps_plateau)?;
    writeln!(out, "n,direct,shifted")?;
    for ((n, d), s) in cmp.indices.iter().zip(&cmp.direct).zip(&cmp.shifted) {
        writeln!(out, "{n},{},{}", fmt15(*d), fmt15(*s))?;
    }
    writeln!(out, "c_direct = {}", fmt15(cmp.c_direct))?;
    writeln!(out, "c_shifted = {}", fmt15(cmp.c_shifted))?;
    writeln!(
        out,
        "last_quarter_increase = {}",
        fmt15(cmp.last_quarter_increase)
    )?;
    let mut rep = Report::new();
    rep.push(CheckLine::from_margin(
        "compare.plateau",
        eps_plateau - cmp.last_quarter_increase,
    ));
    rep.push(CheckLine::new(
        "compare.shifted_profile",
        cmp.shifted_below_direct && cmp.shifted_monotone,
        cmp.c_shifted,
    ));
    match shift_recovery(&f, &xi, &eta, a.max_shift) {
        Ok(s) => {
            writeln!(out, "alpha = {}", s.alpha)?;
            writeln!(out, "c_alpha = {}", fmt15(s.c))?;
            writeln!(out, "certified_bound = {}", fmt15(s.certified_bound))?;
            rep.push(CheckLine::from_margin(
                "compare.shift_certified",
                s.certified_bound - s.direct_max + 1e-9,
            ));
        }
        Err(Error::Invariant(msg)) => {
            writeln!(out, "shift_recovery: {msg}")?;
            rep.push(CheckLine::new("compare.shift_certified", false, -1.0));
        }
        Err(e) => return Err(e),
    }
    finish(&rep, out)
}
