//! `skewspec` command-line front end.
//!
//! Every subcommand resolves its settings (flag, then config file, then
//! default), writes its data files, and leaves a `<stem>.manifest.json`
//! beside the primary output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use serde::Serialize;
use serde_json::Value;

use skewspec_core::cmv::SpectralParameter;
use skewspec_core::cocycle::{lyapunov_estimate, uniform_point, CocycleSpec, LyapunovConfig, SampleMode};
use skewspec_core::io::{fmt_f64, write_csv, write_json};
use skewspec_core::montecarlo::{
    log_grid, measure_unsuitable_detailed, wegner_tail_estimate, CensusOperator, ExperimentConfig, SampleVerdict,
    DEFAULT_P, DEFAULT_TAU,
};
use skewspec_core::sampling::SamplingFunction;
use skewspec_core::schrodinger::PotentialSpec;
use skewspec_core::spectral::{ids_estimate, schrodinger_eigenvalues, spacing_stats, zero_in_spectrum_check};
use skewspec_core::torus::{return_time_count, BallRegion, SkewShiftMap, TorusPoint};

pub mod config;
pub mod verify;

use config::{List, Omega, Resolver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(skewspec_core::Error),
    VerifyFailed(usize),
}

impl From<skewspec_core::Error> for CliError {
    fn from(e: skewspec_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_CONTRACT,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_CONTRACT,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::VerifyFailed(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "skewspec",
    version,
    about = "Skew-shift CMV and Schrödinger operator experiments"
)]
pub struct Cli {
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: SKEWSPEC_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lyapunov exponent of the Szegő or Schrödinger cocycle.
    Lyapunov(LyapunovArgs),
    /// Integrated density of states on a uniform energy grid.
    Ids(IdsArgs),
    /// Census of unsuitable intervals [−N, N] over random base points.
    Suitability(CensusArgs),
    /// Tail of the resolvent norm distribution.
    Wegner(WegnerArgs),
    /// Return frequencies of skew-shift orbits to a ball.
    ReturnTimes(ReturnArgs),
    /// Normalized level spacings in an energy window.
    Spacing(SpacingArgs),
    /// Smallest |eigenvalue| of H on [1, N] for growing N.
    ZeroSpectrum(ZeroArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

/// Operator family: `szego`/`cmv` or `schrodinger`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cmv,
    Schrodinger,
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "cmv" | "szego" => Ok(Kind::Cmv),
            "schrodinger" => Ok(Kind::Schrodinger),
            other => Err(format!("unknown kind {other}; expected szego, cmv or schrodinger")),
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct OperatorArgs {
    #[arg(long)]
    pub kind: Option<Kind>,
    /// CMV coupling `λ` (real, |λ| < 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Schrödinger coupling.
    #[arg(long)]
    pub g: Option<f64>,
    /// Spectral parameter `z = e^{2πi t}`, `t` in turns.
    #[arg(long = "z-angle", allow_hyphen_values = true)]
    pub z_angle: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    /// Decimal in [0, 1) or `golden`.
    #[arg(long)]
    pub omega: Option<Omega>,
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Debug)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdsArgs {
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub omega: Option<Omega>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    /// Half-lengths N, comma separated.
    #[arg(long = "N")]
    pub scales: Option<List<i64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed decay rate; default N^{-1/2}.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Norm budget exponent, Γ = N^τ.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub p: Option<u32>,
    /// Best of an 8×8 grid of boundary phases instead of β = β̃ = 1.
    #[arg(long)]
    pub sweep: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-sample verdicts as CSV.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WegnerArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[arg(long = "N")]
    pub scales: Option<List<i64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "b-min")]
    pub b_min: Option<f64>,
    #[arg(long = "b-max")]
    pub b_max: Option<f64>,
    #[arg(long = "b-count")]
    pub b_count: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exceedance curve as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReturnArgs {
    #[arg(long)]
    pub omega: Option<Omega>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Orbit length L.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ball center, comma separated; default (1/2, …, 1/2).
    #[arg(long)]
    pub center: Option<List<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpacingArgs {
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    /// Base point, comma separated; default drawn from the seed.
    #[arg(long)]
    pub x: Option<List<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub omega: Option<Omega>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ZeroArgs {
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub sizes: Option<List<usize>>,
    #[arg(long)]
    pub x: Option<List<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub omega: Option<Omega>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written as `<stem>.manifest.json` next to the primary output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: std::collections::BTreeMap<String, Value>,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    primary.with_file_name(format!("{stem}.manifest.json"))
}

/// What a subcommand produced.
struct Outcome {
    config: std::collections::BTreeMap<String, Value>,
    outputs: Vec<PathBuf>,
    summary: String,
    failed_checks: usize,
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONTRACT,
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("skewspec: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(k) = flag {
        return Ok(k);
    }
    match std::env::var("SKEWSPEC_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SKEWSPEC_THREADS = {s:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

pub fn run(cli: Cli) -> Result<String, CliError> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let mut res = Resolver::new(cli.config.as_deref())?;
    let (name, outcome) = pool.install(|| -> Result<(&str, Outcome), CliError> {
        Ok(match cli.command {
            Command::Lyapunov(a) => ("lyapunov", lyapunov(a, &mut res)?),
            Command::Ids(a) => ("ids", ids(a, &mut res)?),
            Command::Suitability(a) => ("suitability", suitability(a, &mut res)?),
            Command::Wegner(a) => ("wegner", wegner(a, &mut res)?),
            Command::ReturnTimes(a) => ("return-times", return_times(a, &mut res)?),
            Command::Spacing(a) => ("spacing", spacing(a, &mut res)?),
            Command::ZeroSpectrum(a) => ("zero-spectrum", zero_spectrum(a, &mut res)?),
            Command::Verify(a) => ("verify", verify_cmd(a, &mut res)?),
        })
    })?;
    let manifest = RunManifest {
        command: name.to_string(),
        config: outcome.config,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_json(&manifest_path(&outcome.outputs[0]), &manifest)?;
    if outcome.failed_checks > 0 {
        println!("{}", outcome.summary);
        return Err(CliError::VerifyFailed(outcome.failed_checks));
    }
    Ok(outcome.summary)
}

fn done(res: &mut Resolver, outputs: Vec<PathBuf>, summary: String) -> Result<Outcome, CliError> {
    let config = std::mem::replace(res, Resolver::new(None)?).finish()?;
    Ok(Outcome {
        config,
        outputs,
        summary,
        failed_checks: 0,
    })
}

fn map_of(res: &mut Resolver, omega: Option<Omega>, r: Option<usize>) -> Result<SkewShiftMap<f64>, CliError> {
    let omega = res.get("omega", omega, Omega(skewspec_core::torus::GOLDEN))?;
    let r = res.get("r", r, 2usize)?;
    Ok(SkewShiftMap::new(r, omega.0)?)
}

fn base_point(res: &mut Resolver, x: Option<List<f64>>, r: usize, seed: u64) -> Result<TorusPoint<f64>, CliError> {
    match res.optional("x", x)? {
        Some(List(c)) if c.len() == r => Ok(TorusPoint::new(c)?),
        Some(List(c)) => Err(CliError::Usage(format!("--x has {} coordinates, r = {r}", c.len()))),
        None => Ok(uniform_point(r, seed, 0)),
    }
}

fn lyapunov(a: LyapunovArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let kind = res.get("kind", a.op.kind, Kind::Cmv)?;
    let map = map_of(res, a.op.omega, a.op.r)?;
    let steps = res.get("steps", a.steps, 100_000usize)?;
    let samples = res.get("samples", a.samples, 32usize)?;
    let seed = res.get("seed", a.seed, 0u64)?;
    let out = res.path("out", a.out, "lyapunov.csv")?;
    let (spec, coupling, spectral) = match kind {
        Kind::Cmv => {
            let lambda = res.get("lambda", a.op.lambda, 0.5)?;
            let t = res.get("z-angle", a.op.z_angle, 0.0)?;
            let f = SamplingFunction::canonical(map.r(), Complex::new(lambda, 0.0))?;
            let z = SpectralParameter::from_turns(t).z;
            (CocycleSpec::Szego { f, map, z }, lambda, t)
        }
        Kind::Schrodinger => {
            let g = res.get("g", a.op.g, 1.0)?;
            let e = res.get("energy", a.op.energy, 0.0)?;
            (CocycleSpec::Schrodinger { g, map, energy: e }, g, e)
        }
    };
    let cfg = LyapunovConfig {
        steps,
        samples,
        seed,
        mode: SampleMode::Uniform,
    };
    let est = lyapunov_estimate(&spec, &cfg)?;
    let kind_name = if kind == Kind::Cmv { "szego" } else { "schrodinger" };
    write_csv(
        &out,
        &[
            "kind",
            "coupling",
            "spectral",
            "steps",
            "samples",
            "seed",
            "value",
            "std_error",
        ],
        &[vec![
            kind_name.to_string(),
            fmt_f64(coupling),
            fmt_f64(spectral),
            steps.to_string(),
            samples.to_string(),
            seed.to_string(),
            fmt_f64(est.value),
            fmt_f64(est.std_error),
        ]],
    )?;
    let summary = format!(
        "lyapunov {kind_name}: L = {:.6} ± {:.1e} -> {}",
        est.value,
        est.std_error,
        out.display()
    );
    done(res, vec![out], summary)
}

fn ids(a: IdsArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let g = res.get("g", a.g, 1.0)?;
    let map = map_of(res, a.omega, a.r)?;
    let n = res.get("N", a.n, 2048usize)?;
    let samples = res.get("samples", a.samples, 16usize)?;
    let grid = res.get("grid", a.grid, 512usize)?;
    let seed = res.get("seed", a.seed, 0u64)?;
    let out = res.path("out", a.out, "ids.csv")?;
    let r = map.r();
    let spec = PotentialSpec::new(g, map, TorusPoint::origin(r))?;
    let table = ids_estimate(&spec, n, samples, grid, seed)?;
    write_csv(&out, &["energy", "k"], &table.csv_rows())?;
    let summary = format!(
        "ids: {grid} energies, k ends at {} -> {}",
        table.k[grid - 1],
        out.display()
    );
    done(res, vec![out], summary)
}

fn census_config(
    op: OperatorArgs,
    scales: Option<List<i64>>,
    samples: Option<usize>,
    seed: Option<u64>,
    default_scales: Vec<i64>,
    res: &mut Resolver,
) -> Result<ExperimentConfig, CliError> {
    let kind = res.get("kind", op.kind, Kind::Cmv)?;
    let omega = res.get("omega", op.omega, Omega(skewspec_core::torus::GOLDEN))?;
    let r = res.get("r", op.r, 2usize)?;
    let operator = match kind {
        Kind::Cmv => {
            let lambda = res.get("lambda", op.lambda, 0.5)?;
            let t = res.get("z-angle", op.z_angle, 0.5)?;
            CensusOperator::Cmv {
                lambda: Complex::new(lambda, 0.0),
                z: SpectralParameter::from_turns(t).z,
            }
        }
        Kind::Schrodinger => CensusOperator::Schrodinger {
            g: res.get("g", op.g, 1.0)?,
            energy: res.get("energy", op.energy, 0.0)?,
        },
    };
    let scales = res.get("N", scales, List(default_scales))?.0;
    let samples = res.get("samples", samples, 400usize)?;
    let seed = res.get("seed", seed, 0u64)?;
    let mut cfg = ExperimentConfig::new(operator, scales, samples, seed);
    cfg.omega = omega.0;
    cfg.r = r;
    cfg.validate()?;
    Ok(cfg)
}

fn suitability(a: CensusArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let mut cfg = census_config(a.op, a.scales, a.samples, a.seed, vec![32, 64, 128], res)?;
    cfg.gamma = res.optional("gamma", a.gamma)?;
    cfg.tau = res.get("tau", a.tau, DEFAULT_TAU)?;
    cfg.p = res.get("p", a.p, DEFAULT_P)?;
    cfg.sweep = res.get("sweep", a.sweep, false)?;
    let out = res.path("out", a.out, "suitability.json")?;
    let verdicts_path = res.optional_path("verdicts", a.verdicts)?;
    let (report, raw) = measure_unsuitable_detailed(&cfg)?;
    write_json(&out, &report)?;
    let mut outputs = vec![out.clone()];
    if let Some(p) = verdicts_path {
        write_verdicts(&p, &raw, cfg.r)?;
        outputs.push(p);
    }
    let per_scale: Vec<String> = report
        .estimates
        .iter()
        .map(|e| format!("N={} p̂={:.4} [{:.4}, {:.4}]", e.n, e.fraction, e.ci[0], e.ci[1]))
        .collect();
    let summary = format!(
        "suitability: {}; nonincreasing={} -> {}",
        per_scale.join("; "),
        report.nonincreasing,
        out.display()
    );
    done(res, outputs, summary)
}

fn write_verdicts(path: &Path, raw: &[SampleVerdict], r: usize) -> Result<(), CliError> {
    let mut header: Vec<String> = vec!["N".into(), "index".into()];
    header.extend((1..=r).map(|i| format!("x{i}")));
    header.extend(SampleVerdict::CSV_HEADER[3..].iter().map(|s| s.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = raw
        .iter()
        .map(|v| {
            let mut row = vec![v.n.to_string(), v.index.to_string()];
            row.extend(v.x.iter().map(|&c| fmt_f64(c)));
            row.extend([
                v.suitable.to_string(),
                v.norm_ok.to_string(),
                v.decay_ok.to_string(),
                fmt_f64(v.margin),
                fmt_f64(v.inverse_norm),
            ]);
            row
        })
        .collect();
    write_csv(path, &header, &rows)?;
    Ok(())
}

fn wegner(a: WegnerArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let cfg = census_config(a.op, a.scales, a.samples, a.seed, vec![64], res)?;
    let b_min = res.get("b-min", a.b_min, 0.25)?;
    let b_max = res.get("b-max", a.b_max, 1e6)?;
    let b_count = res.get("b-count", a.b_count, 25usize)?;
    let out = res.path("out", a.out, "wegner.json")?;
    let curve_path = res.optional_path("curve", a.curve)?;
    if !(b_min > 0.0 && b_max > b_min && b_count >= 2) {
        return Err(CliError::Usage(
            "B grid needs 0 < b-min < b-max and b-count >= 2".into(),
        ));
    }
    let report = wegner_tail_estimate(&cfg, &log_grid(b_min, b_max, b_count))?;
    write_json(&out, &report)?;
    let mut outputs = vec![out.clone()];
    if let Some(p) = curve_path {
        let rows: Vec<Vec<String>> = report
            .curves
            .iter()
            .flat_map(|c| {
                (0..c.b_grid.len()).map(move |i| {
                    vec![
                        c.n.to_string(),
                        fmt_f64(c.b_grid[i]),
                        fmt_f64(c.full[i]),
                        fmt_f64(c.sub[i]),
                    ]
                })
            })
            .collect();
        write_csv(&p, &["N", "B", "p_full", "p_sub"], &rows)?;
        outputs.push(p);
    }
    let slopes: Vec<String> = report
        .curves
        .iter()
        .map(|c| {
            let s = |f: &Option<skewspec_core::stats::LinearFit>| {
                f.as_ref().map_or("n/a".to_string(), |f| format!("{:.3}", f.slope))
            };
            format!("N={} slope full {} sub {}", c.n, s(&c.full_fit), s(&c.sub_fit))
        })
        .collect();
    let summary = format!("wegner: {} -> {}", slopes.join("; "), out.display());
    done(res, outputs, summary)
}

fn return_times(a: ReturnArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let map = map_of(res, a.omega, a.r)?;
    let r = map.r();
    let eps = res.get("epsilon", a.epsilon, 0.1)?;
    let horizon = res.get("horizon", a.horizon, 100_000u64)?;
    let starts = res.get("starts", a.starts, 10usize)?;
    let seed = res.get("seed", a.seed, 0u64)?;
    let center = res.get("center", a.center, List(vec![0.5; r]))?.0;
    let out = res.path("out", a.out, "return_times.csv")?;
    if center.len() != r {
        return Err(CliError::Usage(format!(
            "--center has {} coordinates, r = {r}",
            center.len()
        )));
    }
    let ball = BallRegion::new(TorusPoint::new(center)?, eps)?;
    let mut header: Vec<String> = vec!["start".into()];
    header.extend((1..=r).map(|i| format!("x{i}")));
    header.extend(["horizon", "hits", "frequency", "target", "abs_error"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(starts);
    let mut worst: f64 = 0.0;
    for i in 0..starts {
        let x = uniform_point::<f64>(r, seed, i as u64);
        let st = return_time_count(&map, &x, &ball, horizon)?;
        worst = worst.max(st.abs_error());
        let mut row = vec![i.to_string()];
        row.extend(x.coords().iter().map(|&c| fmt_f64(c)));
        row.extend([
            horizon.to_string(),
            st.hits.to_string(),
            fmt_f64(st.frequency),
            fmt_f64(st.target_measure),
            fmt_f64(st.abs_error()),
        ]);
        rows.push(row);
    }
    write_csv(&out, &header, &rows)?;
    let summary = format!(
        "return-times: {starts} starts, max |freq − measure| = {worst:.5} -> {}",
        out.display()
    );
    done(res, vec![out], summary)
}

fn spacing(a: SpacingArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let g = res.get("g", a.g, 1.0)?;
    let map = map_of(res, a.omega, a.r)?;
    let n = res.get("N", a.n, 4096usize)?;
    let center = res.get("center", a.center, 0.0)?;
    let half = res.get("half-width", a.half_width, 0.5)?;
    let seed = res.get("seed", a.seed, 0u64)?;
    let x = base_point(res, a.x, map.r(), seed)?;
    let out = res.path("out", a.out, "spacing.json")?;
    let spec = PotentialSpec::new(g, map, x)?;
    let stats = spacing_stats(&schrodinger_eigenvalues(&spec, n)?, center, half)?;
    write_json(&out, &stats)?;
    let summary = format!(
        "spacing: {} gaps, KS to Poisson {:.4}, KS to clock {:.4} -> {}",
        stats.gaps.len(),
        stats.ks_poisson,
        stats.ks_clock,
        out.display()
    );
    done(res, vec![out], summary)
}

fn zero_spectrum(a: ZeroArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let g = res.get("g", a.g, 1.0)?;
    let map = map_of(res, a.omega, a.r)?;
    let sizes = res.get("sizes", a.sizes, List(vec![256, 1024, 4096]))?.0;
    let seed = res.get("seed", a.seed, 0u64)?;
    let x = base_point(res, a.x, map.r(), seed)?;
    let out = res.path("out", a.out, "zero_spectrum.csv")?;
    let spec = PotentialSpec::new(g, map, x)?;
    let rep = zero_in_spectrum_check(&spec, &sizes)?;
    let rows: Vec<Vec<String>> = rep
        .sizes
        .iter()
        .zip(&rep.min_abs)
        .map(|(n, m)| vec![n.to_string(), fmt_f64(*m)])
        .collect();
    write_csv(&out, &["N", "min_abs_eig"], &rows)?;
    let summary = format!(
        "zero-spectrum: min|eig| = {:.3e} at N = {}, nonincreasing={} -> {}",
        rep.min_abs[rep.min_abs.len() - 1],
        rep.sizes[rep.sizes.len() - 1],
        rep.nonincreasing,
        out.display()
    );
    done(res, vec![out], summary)
}

fn verify_cmd(a: VerifyArgs, res: &mut Resolver) -> Result<Outcome, CliError> {
    let suite = res.get("suite", a.suite, "fast".to_string())?;
    let out = res.path("out", a.out, "verify.json")?;
    if suite != "fast" {
        return Err(CliError::Usage(format!("unknown suite {suite}; available: fast")));
    }
    let checks = verify::fast_suite();
    write_json(&out, &checks)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut outcome = done(res, vec![out.clone()], String::new())?;
    outcome.summary = format!(
        "verify {suite}: {}/{} checks passed -> {}",
        checks.len() - failed,
        checks.len(),
        out.display()
    );
    outcome.failed_checks = failed;
    Ok(outcome)
}
