//! The `thermoptics` command-line front-end.
//!
//! ```text
//! thermoptics compute xy --K 1 --C 0.5
//! thermoptics sweep --config run.conf
//! thermoptics verify full
//! thermoptics optics --d 1 --sigma 1 --y-min -3 --y-max 3 --y-step 0.1
//! thermoptics figure2 --output fig2.csv --plot
//! ```
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, SweepGrid};
use crate::models::{
    free_spin_observables, ising_observables, ti_observables, xy_observables, Convention, ObservableTriple, RawParams,
    ReducedCouplings,
};
use crate::numerics::{DiffScheme, DiffSpec, QuadratureSpec, Step};
use crate::optics::{
    double_slit_intensity, thermo_slit_map, visibility_predictability, CorrespondenceMap, Phase, SlitGeometry,
    ThermoInput,
};
use crate::verify::{self, Level, VerifyOptions};

/// Environment variable consulted for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "THERMOPTICS_THREADS";

/// Header of every sweep CSV.
pub const SWEEP_HEADER: [&str; 11] = [
    "model",
    "J",
    "muB",
    "kT",
    "K",
    "C",
    "f_density",
    "m",
    "s",
    "comp_sum",
    "flags",
];

/// Header of the optics CSV.
pub const OPTICS_HEADER: [&str; 5] = ["y", "intensity", "V", "P", "comp_sum"];

pub const PLOT_WIDTH: usize = 72;
pub const PLOT_HEIGHT: usize = 20;

/// Cap on the number of rows of a single sweep.
pub const MAX_SWEEP_POINTS: usize = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "thermoptics",
    version,
    about = "Spin-chain complementarity and double-slit optics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Observables at a single parameter point, printed as key=value lines.
    Compute(ComputeArgs),
    /// Parameter sweep described by a config file, written as CSV.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Double-slit intensity, visibility and predictability along the screen.
    Optics(OpticsArgs),
    /// Transverse-Ising sweep over B at J=3 for kT in {0.05, 0.5, 2}.
    Figure2(Figure2Args),
}

/// Chain model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Free,
    Ising,
    Xy,
    Ti,
}

impl ModelName {
    pub fn name(self) -> &'static str {
        match self {
            ModelName::Free => "free",
            ModelName::Ising => "ising",
            ModelName::Xy => "xy",
            ModelName::Ti => "ti",
        }
    }

    /// Coupling convention; free spins borrow the Ising one with `K = 0`.
    pub fn convention(self) -> Convention {
        match self {
            ModelName::Free | ModelName::Ising => Convention::Ising,
            ModelName::Xy => Convention::Xy,
            ModelName::Ti => Convention::TransverseIsing,
        }
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(ModelName::Free),
            "ising" => Ok(ModelName::Ising),
            "xy" => Ok(ModelName::Xy),
            "ti" => Ok(ModelName::Ti),
            _ => Err(Error::Config(format!(
                "unknown model `{s}` (expected free, ising, xy or ti)"
            ))),
        }
    }
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Quadrature absolute tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Panel cap of the quadrature.
    #[arg(long)]
    max_panels: Option<usize>,
}

impl TolArgs {
    fn quad(&self) -> Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        QuadratureSpec::new(
            self.abs_tol.unwrap_or(d.abs_tol),
            self.max_panels.unwrap_or(d.max_panels),
            d.endpoint_refinement,
        )
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    model: ModelName,
    /// Reduced field of free spins, E/kT.
    #[arg(long, conflicts_with_all = ["big_c", "j", "b", "kt"])]
    x: Option<f64>,
    /// Reduced coupling.
    #[arg(long = "K", id = "big_k", value_name = "K", conflicts_with_all = ["j", "b", "kt"])]
    k: Option<f64>,
    /// Reduced field.
    #[arg(long = "C", id = "big_c", value_name = "C", conflicts_with_all = ["j", "b", "kt"])]
    c: Option<f64>,
    #[arg(long = "J", id = "j", value_name = "J")]
    j: Option<f64>,
    #[arg(long = "B", id = "b", value_name = "B")]
    b: Option<f64>,
    /// Magnetic moment.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long = "kT", id = "kt", value_name = "kT")]
    kt: Option<f64>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output` from the config; `-` writes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Render an ASCII chart of one column against the last grid axis.
    #[arg(long)]
    plot: bool,
    #[arg(long, value_enum, default_value_t = PlotColumn::S)]
    plot_column: PlotColumn,
}

#[derive(Debug, Args)]
struct Figure2Args {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    plot: bool,
    #[arg(long, value_enum, default_value_t = PlotColumn::S)]
    plot_column: PlotColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotColumn {
    M,
    S,
    CompSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value_t = LevelArg::Fast)]
    level: LevelArg,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapKind {
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    A,
    B,
}

#[derive(Debug, Args)]
struct OpticsArgs {
    /// Slit separation.
    #[arg(long, conflicts_with = "map")]
    d: Option<f64>,
    /// Gaussian slit width.
    #[arg(long, conflicts_with = "map")]
    sigma: Option<f64>,
    /// Linear phase slope, φ(y) = κy.
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    envelope: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    y_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    y_max: f64,
    #[arg(long, default_value_t = 0.01)]
    y_step: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Lay a free-spin ensemble onto the slit; `y` is then the level energy.
    #[arg(long, value_enum)]
    map: Option<MapKind>,
    #[arg(long = "kT", id = "kt", value_name = "kT", requires = "map")]
    kt: Option<f64>,
    /// Boltzmann constant of the mapped ensemble.
    #[arg(long = "k", requires = "map", default_value_t = 1.0)]
    boltzmann: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::A, requires = "map")]
    variant: VariantArg,
}

/// Entry point of the binary.
pub fn main_entry() -> ExitCode {
    run(std::env::args_os())
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let outcome = match cli.command {
        Command::Compute(a) => cmd_compute(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Optics(a) => cmd_optics(&a),
        Command::Figure2(a) => cmd_figure2(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for usage and configuration errors, 1 for numerical failures.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_usage() {
        2
    } else {
        1
    }
}

/// Shortest round-trip decimal form of a finite number.
pub fn format_number(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::NonFinite { at: x });
    }
    Ok(ryu::Buffer::new().format_finite(x).to_string())
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// One evaluated parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub observables: ObservableTriple,
    /// Band gap of the transverse-Ising chain.
    pub gap: Option<f64>,
    pub gap_singularity: bool,
}

impl PointResult {
    pub fn flags(&self) -> &'static str {
        if self.gap_singularity {
            "gap_singularity"
        } else {
            ""
        }
    }
}

/// Observables of `model` at reduced couplings `rc`; every value is checked finite.
pub fn evaluate(
    model: ModelName,
    rc: &ReducedCouplings,
    quad: &QuadratureSpec,
    diff: &DiffSpec,
) -> Result<PointResult> {
    let mut gap = None;
    let mut gap_singularity = false;
    let observables = match model {
        ModelName::Free => free_spin_observables(rc.c),
        ModelName::Ising => ising_observables(rc)?,
        ModelName::Xy => xy_observables(rc, quad)?,
        ModelName::Ti => {
            let r = ti_observables(rc, quad, diff)?;
            gap = Some(r.gap);
            gap_singularity = r.gap_singularity;
            r.observables
        }
    };
    for v in [
        observables.f_density,
        observables.m,
        observables.s,
        observables.complementarity_sum(),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite { at: rc.c });
        }
    }
    Ok(PointResult {
        observables,
        gap,
        gap_singularity,
    })
}

fn cmd_compute(a: &ComputeArgs) -> Result<ExitCode> {
    let quad = a.tol.quad()?;
    let model = a.model;
    let rc = if a.j.is_some() || a.b.is_some() || a.kt.is_some() {
        let kt = a.kt.ok_or_else(|| usage("--kT is required with --J/--B"))?;
        if model == ModelName::Free && a.j.is_some_and(|j| j != 0.0) {
            return Err(usage("free spins take no coupling --J"));
        }
        let raw = RawParams {
            j: a.j.unwrap_or(0.0),
            mu: a.mu,
            b: a.b.unwrap_or(0.0),
            t: kt,
            k: 1.0,
        };
        ReducedCouplings::from_raw(model.convention(), raw)?
    } else {
        if model == ModelName::Free {
            if a.k.is_some_and(|k| k != 0.0) {
                return Err(usage("free spins take no coupling --K"));
            }
        } else if a.x.is_some() {
            return Err(usage("--x applies to free spins only; use --C"));
        }
        let c = a.x.or(a.c).unwrap_or(0.0);
        ReducedCouplings::new(model.convention(), a.k.unwrap_or(0.0), c)
    };
    if !(rc.k.is_finite() && rc.c.is_finite()) {
        return Err(usage("parameters must be finite"));
    }
    let r = evaluate(model, &rc, &quad, &DiffSpec::default())?;
    let o = r.observables;
    let mut out = String::new();
    let k = if model == ModelName::Free { 0.0 } else { rc.k };
    for (key, v) in [
        ("K", k),
        ("C", rc.c),
        ("f_density", o.f_density),
        ("m", o.m),
        ("s", o.s),
        ("comp_sum", o.complementarity_sum()),
    ] {
        let _ = writeln!(out, "{key}={}", format_number(v)?);
    }
    if let Some(gap) = r.gap {
        let _ = writeln!(out, "gap={}", format_number(gap)?);
    }
    let _ = writeln!(out, "flags={}", r.flags());
    print!("model={}\n{out}", model.name());
    Ok(ExitCode::SUCCESS)
}

/// How the fixed parameters and grid axes of a sweep are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMode {
    /// `J`, `muB`, `kT`.
    Raw,
    /// `K`, `C`.
    Reduced,
}

/// A parsed sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelName,
    pub mode: ParamMode,
    /// Fixed parameter values by canonical name.
    pub fixed: Vec<(String, f64)>,
    /// Grid axes, outermost first.
    pub axes: Vec<Axis>,
    pub output: Option<PathBuf>,
    pub quad: QuadratureSpec,
    pub diff: DiffSpec,
    pub threads: Option<usize>,
}

/// A sweep point: columns `J, muB, kT` plus its reduced couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub j: f64,
    pub mu_b: f64,
    pub kt: f64,
    pub rc: ReducedCouplings,
}

fn canonical_param(key: &str) -> Option<(&'static str, ParamMode)> {
    match key {
        "J" => Some(("J", ParamMode::Raw)),
        "muB" | "B" => Some(("muB", ParamMode::Raw)),
        "kT" => Some(("kT", ParamMode::Raw)),
        "K" => Some(("K", ParamMode::Reduced)),
        "C" | "x" => Some(("C", ParamMode::Reduced)),
        _ => None,
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("`{key}` expects a finite number, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` expects true or false, got `{v}`"))),
    }
}

fn parse_grid(v: &str) -> Result<Axis> {
    let bad = || {
        Error::Config(format!(
            "grid expects `axis min max step` or `axis : v1, v2, ...`, got `{v}`"
        ))
    };
    let (name, rest) = v.split_once(char::is_whitespace).ok_or_else(bad)?;
    let (axis, _) = canonical_param(name).ok_or_else(|| Error::Config(format!("unknown grid axis `{name}`")))?;
    let rest = rest.trim();
    if let Some(list) = rest.strip_prefix(':') {
        let values = list
            .split(',')
            .map(|s| parse_f64(axis, s))
            .collect::<Result<Vec<_>>>()?;
        return Axis::list(axis, values);
    }
    let nums: Vec<&str> = rest.split_whitespace().collect();
    if nums.len() != 3 {
        return Err(bad());
    }
    Ok(Axis::Range(SweepGrid::new(
        axis,
        parse_f64(axis, nums[0])?,
        parse_f64(axis, nums[1])?,
        parse_f64(axis, nums[2])?,
    )?))
}

impl RunConfig {
    /// Parses the `key = value` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut model = None;
        let mut fixed: Vec<(String, f64)> = Vec::new();
        let mut axes: Vec<Axis> = Vec::new();
        let mut output = None;
        let mut abs_tol = None;
        let mut max_panels = None;
        let mut endpoint = None;
        let mut diff_step = None;
        let mut diff_scheme = None;
        let mut threads = None;
        let mut seen: Vec<String> = Vec::new();

        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::Config(m) | Error::InvalidParameter(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "grid" {
                if seen.iter().any(|k| k == key) {
                    return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
                }
                seen.push(key.to_string());
            }
            match key {
                "model" => model = Some(value.parse::<ModelName>().map_err(at)?),
                "grid" => axes.push(parse_grid(value).map_err(at)?),
                "output" => output = Some(PathBuf::from(value)),
                "abs_tol" => abs_tol = Some(parse_f64(key, value).map_err(at)?),
                "max_panels" => {
                    max_panels =
                        Some(value.parse::<usize>().map_err(|_| {
                            at(Error::Config(format!("`max_panels` expects an integer, got `{value}`")))
                        })?)
                }
                "endpoint_refinement" => endpoint = Some(parse_bool(key, value).map_err(at)?),
                "diff_step" => diff_step = Some(parse_f64(key, value).map_err(at)?),
                "diff_scheme" => {
                    diff_scheme = Some(match value {
                        "central" => DiffScheme::Central,
                        "richardson" => DiffScheme::Richardson,
                        _ => return Err(at(Error::Config(format!("unknown diff_scheme `{value}`")))),
                    })
                }
                "threads" => {
                    threads = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| at(Error::Config(format!("`threads` expects an integer, got `{value}`"))))?,
                    )
                }
                _ => match canonical_param(key) {
                    Some((name, _)) => {
                        if fixed.iter().any(|(k, _)| k == name) {
                            return Err(Error::Config(format!("line {}: `{key}` given twice", lineno + 1)));
                        }
                        fixed.push((name.to_string(), parse_f64(key, value).map_err(at)?));
                    }
                    None => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
                },
            }
        }

        let model = model.ok_or_else(|| Error::Config("missing `model`".into()))?;
        if axes.is_empty() {
            return Err(Error::Config("at least one `grid` line is required".into()));
        }
        let mut names: Vec<&str> = fixed.iter().map(|(k, _)| k.as_str()).collect();
        for axis in &axes {
            if names.contains(&axis.name()) {
                return Err(Error::Config(format!("`{}` is both fixed and swept", axis.name())));
            }
            names.push(axis.name());
        }
        let modes: Vec<ParamMode> = names
            .iter()
            .filter_map(|n| canonical_param(n))
            .map(|(_, m)| m)
            .collect();
        let mode = match (modes.contains(&ParamMode::Raw), modes.contains(&ParamMode::Reduced)) {
            (true, true) => {
                return Err(Error::Config(
                    "mix of dimensional (J, muB, kT) and reduced (K, C) parameters".into(),
                ))
            }
            (true, false) => ParamMode::Raw,
            _ => ParamMode::Reduced,
        };
        if mode == ParamMode::Raw && !names.contains(&"kT") {
            return Err(Error::Config("dimensional parameters need `kT`".into()));
        }
        let coupling = if mode == ParamMode::Raw { "J" } else { "K" };
        if model == ModelName::Free && axes.iter().any(|a| a.name() == coupling) {
            return Err(Error::Config(format!("free spins cannot sweep `{coupling}`")));
        }
        if model == ModelName::Free && fixed.iter().any(|(k, v)| k == coupling && *v != 0.0) {
            return Err(Error::Config(format!("free spins take no coupling `{coupling}`")));
        }

        let qd = QuadratureSpec::default();
        let quad = QuadratureSpec::new(
            abs_tol.unwrap_or(qd.abs_tol),
            max_panels.unwrap_or(qd.max_panels),
            endpoint.unwrap_or(qd.endpoint_refinement),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let dd = DiffSpec::default();
        let diff = DiffSpec::new(
            diff_step.map(Step::Relative).unwrap_or(dd.step),
            diff_scheme.unwrap_or(dd.scheme),
        )
        .map_err(|e| Error::Config(e.to_string()))?;

        Ok(RunConfig {
            model,
            mode,
            fixed,
            axes,
            output,
            quad,
            diff,
            threads,
        })
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    fn fixed_value(&self, name: &str) -> f64 {
        self.fixed.iter().find(|(k, _)| k == name).map_or(0.0, |(_, v)| *v)
    }

    /// All grid points, Cartesian product with the first axis outermost.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total = values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
        match total {
            Some(t) if t <= MAX_SWEEP_POINTS => {}
            _ => return Err(Error::Config(format!("sweep exceeds {MAX_SWEEP_POINTS} points"))),
        }
        let mut points = Vec::new();
        let mut index = vec![0usize; values.len()];
        loop {
            let get = |name: &str| {
                self.axes
                    .iter()
                    .position(|a| a.name() == name)
                    .map_or_else(|| self.fixed_value(name), |i| values[i][index[i]])
            };
            points.push(self.point(get("J"), get("muB"), get("kT"), get("K"), get("C"))?);

            let mut level = values.len();
            loop {
                if level == 0 {
                    return Ok(points);
                }
                level -= 1;
                index[level] += 1;
                if index[level] < values[level].len() {
                    break;
                }
                index[level] = 0;
            }
        }
    }

    fn point(&self, j: f64, mu_b: f64, kt: f64, k: f64, c: f64) -> Result<SweepPoint> {
        let conv = self.model.convention();
        Ok(match self.mode {
            ParamMode::Raw => {
                let raw = RawParams {
                    j,
                    mu: 1.0,
                    b: mu_b,
                    t: kt,
                    k: 1.0,
                };
                SweepPoint {
                    j,
                    mu_b,
                    kt,
                    rc: ReducedCouplings::from_raw(conv, raw)?,
                }
            }
            ParamMode::Reduced => SweepPoint {
                j: k * conv.coupling_divisor(),
                mu_b: c,
                kt: 1.0,
                rc: ReducedCouplings::new(conv, k, c),
            },
        })
    }
}

/// Worker count: `flag`, else [`THREADS_ENV`], else all cores (`None`).
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag.filter(|&n| n > 0));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(|n| Some(n).filter(|&n| n > 0))
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        _ => Ok(None),
    }
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Evaluates every point in parallel; results come back in grid order.
pub fn run_sweep(config: &RunConfig, threads: Option<usize>) -> Result<Vec<(SweepPoint, PointResult)>> {
    let points = config.points()?;
    with_pool(threads, || {
        points
            .par_iter()
            .map(|p| evaluate(config.model, &p.rc, &config.quad, &config.diff).map(|r| (*p, r)))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Renders sweep rows as CSV bytes.
pub fn sweep_csv(model: ModelName, rows: &[(SweepPoint, PointResult)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for (p, r) in rows {
        let o = r.observables;
        let k = if model == ModelName::Free { 0.0 } else { p.rc.k };
        let mut record = vec![model.name().to_string()];
        for v in [
            p.j,
            p.mu_b,
            p.kt,
            k,
            p.rc.c,
            o.f_density,
            o.m,
            o.s,
            o.complementarity_sum(),
        ] {
            record.push(format_number(v)?);
        }
        record.push(r.flags().to_string());
        w.write_record(&record).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Writes `bytes` to `path` through a sibling temporary file, so a failed run
/// never leaves a partial file behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let written = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(Error::Io(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) if p != Path::new("-") => write_atomically(p, bytes),
        _ => io::stdout().write_all(bytes).map_err(Error::from),
    }
}

fn sweep_and_emit(
    config: &RunConfig,
    output: Option<&Path>,
    threads: Option<usize>,
    plot: Option<PlotColumn>,
) -> Result<()> {
    let rows = match run_sweep(config, threads) {
        Ok(rows) => rows,
        Err(e) => {
            // a stale file from an earlier run must not pass for this one
            if let Some(p) = output.filter(|p| *p != Path::new("-")) {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
    };
    let bytes = sweep_csv(config.model, &rows)?;
    emit(output, &bytes)?;
    if let Some(column) = plot {
        let chart = sweep_chart(config, &rows, column);
        if output.is_some_and(|p| p != Path::new("-")) {
            print!("{chart}");
        } else {
            eprint!("{chart}");
        }
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<ExitCode> {
    let config = RunConfig::from_file(&a.config)?;
    let threads = resolve_threads(a.threads.or(config.threads))?;
    let output = a.output.as_deref().or(config.output.as_deref());
    sweep_and_emit(&config, output, threads, a.plot.then_some(a.plot_column))?;
    Ok(ExitCode::SUCCESS)
}

/// The preset behind `figure2`: transverse-Ising, `J = 3`, three temperatures,
/// `B ∈ [0, 6]` in steps of 0.01.
pub fn figure2_config() -> RunConfig {
    RunConfig::parse(
        "model = ti\n\
         J = 3\n\
         grid = kT : 0.05, 0.5, 2\n\
         grid = muB 0 6 0.01\n",
    )
    .expect("preset parses")
}

fn cmd_figure2(a: &Figure2Args) -> Result<ExitCode> {
    let config = figure2_config();
    let threads = resolve_threads(a.threads)?;
    sweep_and_emit(&config, a.output.as_deref(), threads, a.plot.then_some(a.plot_column))?;
    Ok(ExitCode::SUCCESS)
}

fn sweep_chart(config: &RunConfig, rows: &[(SweepPoint, PointResult)], column: PlotColumn) -> String {
    let inner = config.axes.last().map_or(1, |a| a.values().len()).max(1);
    let last = config.axes.last().map(|a| a.name().to_string()).unwrap_or_default();
    let series: Vec<Vec<(f64, f64)>> = rows
        .chunks(inner)
        .map(|block| {
            block
                .iter()
                .map(|(p, r)| {
                    let x = match last.as_str() {
                        "J" => p.j,
                        "muB" => p.mu_b,
                        "kT" => p.kt,
                        "K" => p.rc.k,
                        _ => p.rc.c,
                    };
                    let o = r.observables;
                    let y = match column {
                        PlotColumn::M => o.m,
                        PlotColumn::S => o.s,
                        PlotColumn::CompSum => o.complementarity_sum(),
                    };
                    (x, y)
                })
                .collect()
        })
        .collect();
    let label = match column {
        PlotColumn::M => "m",
        PlotColumn::S => "s",
        PlotColumn::CompSum => "comp_sum",
    };
    ascii_chart(&series, label, &last)
}

/// Plots each series with its own marker (`1`, `2`, ...) on a
/// [`PLOT_WIDTH`]×[`PLOT_HEIGHT`] character canvas.
pub fn ascii_chart(series: &[Vec<(f64, f64)>], y_label: &str, x_label: &str) -> String {
    let pts = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 <= x1 && y0 <= y1) {
        return String::new();
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let mut canvas = vec![vec![' '; PLOT_WIDTH]; PLOT_HEIGHT];
    const MARKS: &[u8] = b"123456789abcdefghijklmnopqrstuvwxyz";
    for (i, s) in series.iter().enumerate() {
        let mark = MARKS[i % MARKS.len()] as char;
        for &(x, y) in s {
            let col = ((x - x0) / (x1 - x0) * (PLOT_WIDTH - 1) as f64).round() as usize;
            let row = ((y1 - y) / (y1 - y0) * (PLOT_HEIGHT - 1) as f64).round() as usize;
            canvas[row.min(PLOT_HEIGHT - 1)][col.min(PLOT_WIDTH - 1)] = mark;
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{y_label} in [{y0:.4}, {y1:.4}]");
    for (r, line) in canvas.iter().enumerate() {
        let tick = if r == 0 || r == PLOT_HEIGHT - 1 { '+' } else { '|' };
        let _ = writeln!(out, "{tick}{}", line.iter().collect::<String>());
    }
    let _ = writeln!(out, "+{}", "-".repeat(PLOT_WIDTH));
    let _ = writeln!(out, " {x_label} from {x0} to {x1}");
    out
}

fn cmd_verify(a: &VerifyArgs) -> Result<ExitCode> {
    let level = match a.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let mut opts = VerifyOptions::new(level);
    opts.quad = a.tol.quad()?;
    let threads = resolve_threads(a.threads)?;
    let started = Instant::now();
    let report = with_pool(threads, || verify::run(&opts))?;
    for line in report.lines() {
        println!("{line}");
    }
    let passed = report.groups.iter().filter(|g| g.passed).count();
    println!(
        "{} {passed}/{} groups passed in {:.1}s",
        if report.passed() { "OK" } else { "FAILED" },
        report.groups.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_optics(a: &OpticsArgs) -> Result<ExitCode> {
    let grid = SweepGrid::new("y", a.y_min, a.y_max, a.y_step)?;
    let phase = Phase::Linear(a.kappa);
    // y → (geometry, screen position)
    let place: Box<dyn Fn(f64) -> Result<(SlitGeometry, f64)>> = match a.map {
        None => {
            let g =
                SlitGeometry::with_phase(a.d.unwrap_or(1.0), a.sigma.unwrap_or(1.0), phase)?.envelope(a.envelope)?;
            Box::new(move |y| Ok((g.clone(), y)))
        }
        Some(MapKind::Free) => {
            let kt = a.kt.ok_or_else(|| usage("--map free needs --kT"))?;
            let variant = match a.variant {
                VariantArg::A => CorrespondenceMap::EnergyAsPosition,
                VariantArg::B => CorrespondenceMap::RatioAsPosition,
            };
            let (boltzmann, envelope, kappa) = (a.boltzmann, a.envelope, a.kappa);
            // validate once so bad temperatures surface as usage errors
            thermo_slit_map(&ThermoInput::free_spin(0.0, kt / boltzmann, boltzmann), variant)?;
            Box::new(move |e| {
                let sp = thermo_slit_map(&ThermoInput::free_spin(e, kt / boltzmann, boltzmann), variant)?;
                let g = SlitGeometry::with_phase(sp.geometry.d, sp.geometry.sigma, Phase::Linear(kappa))?
                    .envelope(envelope)?;
                Ok((g, sp.y))
            })
        }
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(OPTICS_HEADER).map_err(io)?;
    for y in grid.values() {
        let (g, pos) = place(y)?;
        let vp = visibility_predictability(pos, &g);
        let intensity = double_slit_intensity(pos, &g);
        let record = [y, intensity, vp.visibility, vp.predictability, vp.sum()]
            .into_iter()
            .map(format_number)
            .collect::<Result<Vec<_>>>()?;
        w.write_record(&record).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    emit(a.output.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_raw_config() {
        let c = RunConfig::parse(
            "# comment\nmodel = ti   # trailing\nJ = 3\ngrid = kT : 2, 0.05, 0.5\ngrid = B 0 1 0.5\nabs_tol = 1e-9\n",
        )
        .unwrap();
        assert_eq!(c.mode, ParamMode::Raw);
        assert_eq!(c.quad.abs_tol, 1e-9);
        let pts = c.points().unwrap();
        assert_eq!(pts.len(), 9);
        let kt: Vec<f64> = pts.iter().map(|p| p.kt).collect();
        assert_eq!(kt, [0.05, 0.05, 0.05, 0.5, 0.5, 0.5, 2.0, 2.0, 2.0]);
        assert_eq!(pts[1].mu_b, 0.5);
        assert_eq!(pts[2].rc.k, 60.0);
        assert_eq!(pts[2].rc.c, 20.0);
    }

    #[test]
    fn reduced_point_columns() {
        let c = RunConfig::parse("model = xy\nK = 0.5\ngrid = x 0 1 1\n").unwrap();
        let p = c.points().unwrap();
        assert_eq!(c.mode, ParamMode::Reduced);
        assert_eq!(
            (p[1].j, p[1].mu_b, p[1].kt, p[1].rc.k, p[1].rc.c),
            (1.0, 1.0, 1.0, 0.5, 1.0)
        );
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "model = xy\ngrid = C 0 1 0.1\nbogus = 1\n",
            "model = xy\n",
            "grid = C 0 1 0.1\n",
            "model = potts\ngrid = C 0 1 0.1\n",
            "model = xy\nK = 1\nJ = 1\nkT = 1\ngrid = C 0 1 0.1\n",
            "model = xy\nC = 1\ngrid = C 0 1 0.1\n",
            "model = xy\nJ = 1\ngrid = muB 0 1 0.1\n",
            "model = free\ngrid = K 0 1 0.1\n",
            "model = xy\ngrid = C 1 0 0.1\n",
            "model = xy\ngrid = C 0 1\n",
            "model = xy\nmodel = ti\ngrid = C 0 1 0.1\n",
            "model = xy\nabs_tol = -1\ngrid = C 0 1 0.1\n",
            "model xy\n",
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.is_usage(), "{text:?} gave {err}");
        }
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -0.1, 1e-300, 123456.789, std::f64::consts::PI] {
            assert_eq!(format_number(x).unwrap().parse::<f64>().unwrap(), x);
        }
        assert!(format_number(f64::NAN).is_err());
        assert!(format_number(f64::INFINITY).is_err());
    }

    #[test]
    fn chart_has_fixed_size() {
        let s: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, (i as f64 / 10.0).sin())).collect();
        let chart = ascii_chart(&[s], "y", "x");
        let lines: Vec<&str> = chart.lines().collect();
        assert_eq!(lines.len(), PLOT_HEIGHT + 3);
        assert!(lines[1..=PLOT_HEIGHT]
            .iter()
            .all(|l| l.chars().count() == PLOT_WIDTH + 1));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
