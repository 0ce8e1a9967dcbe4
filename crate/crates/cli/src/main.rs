//! Command-line laboratory for slab-to-plane NLS reduction experiments.
//!
//! Subcommands wrap the library operations: coupling-constant quadrature,
//! the sharp interpolation-constant search, 2D/3D evolutions, slab
//! ground-state minimization, the thickness-ladder convergence study, and
//! the inequality check suites.
//!
//! Conventions shared by every subcommand:
//! - exit 0 on success, 1 on validation/configuration errors, 2 on numerical
//!   failure (NaN, blow-up, non-convergence, falsified check);
//! - errors are reported as a single machine-readable JSON line on stderr
//!   (except when the output pipe closes early, which ends the process with
//!   the conventional SIGPIPE disposition);
//! - `--dry-run` prints the resolved, validated configuration and exits
//!   without computing or writing anything;
//! - results land in `--out` (default `out/`): `report.json` (payload under
//!   the `report` key is deterministic for a fixed config and seed; run
//!   bookkeeping is segregated under `metadata`), `series.csv` for time or
//!   ladder series, and `fields/*.bin` snapshots with JSON sidecars.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use dimred_nls_core::checks::{run_suite, CheckInstance, Suite, SuiteOptions};
use dimred_nls_core::dynamics::{
    evolve_2d, evolve_3d, minimization_upper_bound, minimize_energy, Evolution2DConfig,
    Evolution3DConfig, KineticGauge, MinimizationConfig, TrajectorySample,
};
use dimred_nls_core::gn::{estimate_cgn, gn_ratio};
use dimred_nls_core::potential::{
    coupling_constant_g0, BumpKind, CouplingEstimate, PotentialSpec, ScaledPotentialParams,
};
use dimred_nls_core::reduction::{
    default_initial_state, run_convergence_study, write_study_csv, StudyConfig, StudyReport,
};
use dimred_nls_core::report::{
    read_field_2d, read_field_3d, write_field_2d, write_field_3d, CsvWriter, Metadata,
    ReportEnvelope,
};
use dimred_nls_core::sampling::{gaussian_field_2d, rng_from_seed};
use dimred_nls_core::{Error, Field3D, Result, SlabGrid, TorusGrid};
use num_complex::Complex64;

/// Numerical laboratory for the 3D-slab to 2D-plane NLS reduction.
#[derive(Debug, Parser)]
#[command(name = "dimred-nls", version, about, propagate_version = true)]
struct Cli {
    /// Output directory for report.json, series.csv and field snapshots.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: DIMRED_NLS_THREADS or the logical core count).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the resolved, validated configuration and exit without running.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Effective 2D coupling constant of a transversally confined potential.
    G0(G0Args),
    /// Sharp planar interpolation (Gagliardo–Nirenberg) constant estimate.
    Cgn(CgnArgs),
    /// Cubic Schrödinger evolution on the 2D torus.
    Evolve2d(Evolve2dArgs),
    /// Slab evolution with the convolved interaction.
    Evolve3d(Evolve3dArgs),
    /// Slab ground-state energy per unit mass.
    Minimize(MinimizeArgs),
    /// Thickness-ladder convergence study: 3D marginals against the 2D limit.
    Reduce(ReduceArgs),
    /// Deterministic inequality check suites.
    Check(CheckArgs),
}

#[derive(Debug, Copy, Clone, ValueEnum)]
enum KindArg {
    Separable,
    Radial,
}

impl From<KindArg> for BumpKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Separable => BumpKind::Separable,
            KindArg::Radial => BumpKind::Radial,
        }
    }
}

#[derive(Debug, Copy, Clone, ValueEnum)]
enum GaugeArg {
    Renormalized,
    Lab,
}

impl From<GaugeArg> for KineticGauge {
    fn from(gauge: GaugeArg) -> Self {
        match gauge {
            GaugeArg::Renormalized => KineticGauge::Renormalized,
            GaugeArg::Lab => KineticGauge::Lab,
        }
    }
}

#[derive(Debug, Args)]
struct G0Args {
    /// Potential description file (JSON: {kind, amplitude, rx, rz}).
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Override: bump family.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Override: potential depth (must be ≤ 0).
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// Override: transverse (planar) radius.
    #[arg(long)]
    rx: Option<f64>,
    /// Override: confined (slab-normal) radius.
    #[arg(long)]
    rz: Option<f64>,
    /// Quadrature refinement depth (level ℓ uses 2^{ℓ−1} panels per seam).
    #[arg(long, default_value_t = 4)]
    quad_level: u32,
}

#[derive(Debug, Args)]
struct CgnArgs {
    /// Fourier modes per axis for the maximizer search.
    #[arg(long, default_value_t = 16)]
    modes: usize,
    /// Independent random restarts of the ascent.
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Euler–Lagrange residual target.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Base seed for the restart initializations.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also probe this many random smooth fields; none may beat the estimate.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Debug, Args)]
struct Evolve2dArgs {
    /// Evolution configuration file (JSON, same schema as the report echo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override: grid points per axis (even, ≥ 4).
    #[arg(long)]
    n: Option<usize>,
    /// Override: cubic coupling constant (negative = focusing).
    #[arg(long, allow_negative_numbers = true)]
    g0: Option<f64>,
    /// Override: time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override: final time (integer multiple of dt).
    #[arg(long)]
    t_final: Option<f64>,
    /// Override: record observables every this many steps.
    #[arg(long)]
    record_every: Option<usize>,
    /// Initial state snapshot (.bin from a previous run); default: the
    /// built-in smooth profile.
    #[arg(long)]
    initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Evolve3dArgs {
    /// Evolution configuration file (JSON, same schema as the report echo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Potential description file overriding the configured spec.
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Override: planar grid points per axis.
    #[arg(long)]
    nx: Option<usize>,
    /// Override: confined-direction grid points.
    #[arg(long)]
    nz: Option<usize>,
    /// Override: scattering-to-thickness ratio c = L(N/L)^β (≤ 1).
    #[arg(long)]
    c: Option<f64>,
    /// Override: slab half-period thickness parameter L.
    #[arg(long)]
    l: Option<f64>,
    /// Override: scaling exponent β ∈ (0, 3/7).
    #[arg(long)]
    beta: Option<f64>,
    /// Override: time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override: final time (integer multiple of dt).
    #[arg(long)]
    t_final: Option<f64>,
    /// Override: record observables every this many steps.
    #[arg(long)]
    record_every: Option<usize>,
    /// Override: kinetic gauge of the confined direction.
    #[arg(long, value_enum)]
    gauge: Option<GaugeArg>,
    /// Initial state snapshot (.bin from a previous run); default: the
    /// built-in smooth profile.
    #[arg(long)]
    initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MinimizeArgs {
    /// Minimization configuration file (JSON, same schema as the report echo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Potential description file overriding the configured spec.
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Override: planar grid points per axis.
    #[arg(long)]
    nx: Option<usize>,
    /// Override: confined-direction grid points.
    #[arg(long)]
    nz: Option<usize>,
    /// Override: scattering-to-thickness ratio c (≤ 1).
    #[arg(long)]
    c: Option<f64>,
    /// Override: slab half-period thickness parameter L.
    #[arg(long)]
    l: Option<f64>,
    /// Override: scaling exponent β.
    #[arg(long)]
    beta: Option<f64>,
    /// Override: iteration cap for the imaginary-time descent.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Override: Euler–Lagrange residual target.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Override: initial imaginary-time step.
    #[arg(long)]
    initial_tau: Option<f64>,
    /// Interpolation constant; when given, the report includes the analytic
    /// upper bound 1 + C⁴‖V‖/2 the minimum must not exceed.
    #[arg(long)]
    cgn: Option<f64>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Study configuration file (JSON, same schema as the report echo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interpolation constant used to size the standard potential when no
    /// config file is given (default: measured by a fresh estimate).
    #[arg(long)]
    cgn: Option<f64>,
    /// Override: multiplier on the derived 2D coupling (1 = matched model).
    #[arg(long)]
    coupling_scale: Option<f64>,
    /// Override: refinement depth of the coupling quadrature.
    #[arg(long)]
    quad_level: Option<u32>,
    /// Override: time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override: final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Override: number of uniform checkpoints after t = 0.
    #[arg(long)]
    checkpoints: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Suite name: hoffman-ostenhof, interaction-estimate, fourier-lower-bound,
    /// operator-bound, scalar-interpolation, approx-identity, scaling-regime,
    /// or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Base seed for instance generation.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance count override for the sampled suites.
    #[arg(long)]
    samples: Option<usize>,
    /// Interpolation constant for the suites that need one (default: measured
    /// by a fresh estimate).
    #[arg(long)]
    cgn: Option<f64>,
}

/// Options shared by every subcommand, resolved once.
struct Common {
    out: PathBuf,
    threads: usize,
    dry_run: bool,
}

/// Restore the default SIGPIPE disposition so piping into a consumer that
/// exits early (e.g. `head`) terminates the run quietly, Unix-tool style,
/// instead of panicking on the broken pipe.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            emit_error_line("usage", 1, &err.to_string());
            return ExitCode::from(1);
        }
    };

    let threads = match resolve_threads(cli.threads) {
        Ok(n) => n,
        Err(err) => return exit_with(&err),
    };
    // The pool is built once per process; parallel suites inherit it.
    if let Err(err) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
    {
        return exit_with(&err);
    }

    let common = Common {
        out: cli.out,
        threads,
        dry_run: cli.dry_run,
    };

    let outcome = match &cli.command {
        Command::G0(args) => cmd_g0(&common, args),
        Command::Cgn(args) => cmd_cgn(&common, args),
        Command::Evolve2d(args) => cmd_evolve2d(&common, args),
        Command::Evolve3d(args) => cmd_evolve3d(&common, args),
        Command::Minimize(args) => cmd_minimize(&common, args),
        Command::Reduce(args) => cmd_reduce(&common, args),
        Command::Check(args) => cmd_check(&common, args),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => exit_with(&err),
    }
}

/// Thread count: flag beats the DIMRED_NLS_THREADS variable beats the
/// logical core count.
fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("DIMRED_NLS_THREADS") {
            Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!(
                    "DIMRED_NLS_THREADS must be a positive integer, got {raw:?}"
                ))
            })?,
            Err(_) => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(Error::InvalidConfig("thread count must be ≥ 1".into()));
    }
    Ok(n)
}

fn exit_with(err: &Error) -> ExitCode {
    let code = exit_code_for(err);
    emit_error_line(error_kind_name(err), code, &err.to_string());
    ExitCode::from(code)
}

/// 2 = numerical failure mid-computation; 1 = everything rejected up front.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonFiniteSymbol { .. }
        | Error::NonFiniteSamples(_)
        | Error::NonFiniteField { .. }
        | Error::BlowUp { .. }
        | Error::NonConvergence { .. }
        | Error::ConservationFailure { .. } => 2,
        _ => 1,
    }
}

fn error_kind_name(err: &Error) -> &'static str {
    match err {
        Error::InvalidGrid(_) => "invalid_grid",
        Error::InvalidPotential(_) => "invalid_potential",
        Error::InvalidParams(_) => "invalid_params",
        Error::InvalidConfig(_) => "invalid_config",
        Error::PointOutsideDomain { .. } => "point_outside_domain",
        Error::GridTooCoarse { .. } => "grid_too_coarse",
        Error::ShapeMismatch(_) => "shape_mismatch",
        Error::NonFiniteSymbol { .. } => "non_finite_symbol",
        Error::NonFiniteSamples(_) => "non_finite_samples",
        Error::NonFiniteField { .. } => "non_finite_field",
        Error::BlowUp { .. } => "blow_up",
        Error::NonConvergence { .. } => "non_convergence",
        Error::InstanceRejected(_) => "instance_rejected",
        Error::ConservationFailure { .. } => "conservation_failure",
        Error::Io(_) => "io",
        Error::Serde(_) => "serde",
    }
}

/// Single-line machine-readable error record on stderr.
fn emit_error_line(kind: &str, exit: u8, message: &str) {
    let line = serde_json::json!({
        "error": { "kind": kind, "exit": exit, "message": message }
    });
    eprintln!("{line}");
}

fn read_json_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot open {}: {e}", path.display())))?;
    let value = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    Ok(value)
}

fn print_resolved<T: Serialize>(config: &T) -> Result<u8> {
    println!("{}", serde_json::to_string_pretty(config)?);
    Ok(0)
}

/// Wrap the deterministic payload in an envelope and write `report.json`.
fn write_report<T: Serialize>(common: &Common, tool: &str, report: &T) -> Result<PathBuf> {
    fs::create_dir_all(&common.out)?;
    let path = common.out.join("report.json");
    ReportEnvelope {
        metadata: Metadata::now(tool, common.threads),
        report,
    }
    .write_json(&path)?;
    Ok(path)
}

fn fields_dir(common: &Common) -> Result<PathBuf> {
    let dir = common.out.join("fields");
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_series(common: &Common, samples: &[TrajectorySample]) -> Result<PathBuf> {
    fs::create_dir_all(&common.out)?;
    let path = common.out.join("series.csv");
    let mut csv = CsvWriter::create(&path, &["step", "t", "mass", "energy", "gradient_norm"])?;
    for s in samples {
        csv.write_row(&[s.step as f64, s.t, s.mass, s.energy, s.gradient_norm])?;
    }
    csv.finish()?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// g0
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct G0Resolved {
    spec: PotentialSpec,
    quad_level: u32,
}

#[derive(Debug, Serialize)]
struct G0Report {
    config: G0Resolved,
    value: f64,
    estimate: CouplingEstimate,
}

fn cmd_g0(common: &Common, args: &G0Args) -> Result<u8> {
    let mut spec: PotentialSpec = match &args.potential {
        Some(path) => read_json_config(path)?,
        None => PotentialSpec::reference(),
    };
    if let Some(kind) = args.kind {
        spec.kind = kind.into();
    }
    if let Some(a) = args.amplitude {
        spec.amplitude = a;
    }
    if let Some(rx) = args.rx {
        spec.rx = rx;
    }
    if let Some(rz) = args.rz {
        spec.rz = rz;
    }
    spec.validate()?;

    let resolved = G0Resolved {
        spec,
        quad_level: args.quad_level,
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let estimate = coupling_constant_g0(&resolved.spec, resolved.quad_level)?;
    println!("{:?}", estimate.value);
    let report = G0Report {
        config: resolved,
        value: estimate.value,
        estimate,
    };
    write_report(common, "g0", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// cgn
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CgnResolved {
    modes: usize,
    restarts: usize,
    tol: f64,
    seed: u64,
    samples: usize,
}

#[derive(Debug, Serialize)]
struct CgnReport {
    config: CgnResolved,
    cgn: f64,
    residual: f64,
    converged: bool,
    iterations: usize,
    restarts_used: usize,
    band: i64,
    /// Largest interpolation ratio over the random probe fields, if any ran.
    sample_max_ratio: Option<f64>,
    /// Probe fields whose ratio exceeded the estimate (should stay 0).
    samples_exceeding: Option<usize>,
}

fn cmd_cgn(common: &Common, args: &CgnArgs) -> Result<u8> {
    let resolved = CgnResolved {
        modes: args.modes,
        restarts: args.restarts,
        tol: args.tol,
        seed: args.seed,
        samples: args.samples,
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let estimate = estimate_cgn(args.modes, args.restarts, args.tol, args.seed)?;
    println!("{:?}", estimate.cgn);

    let (sample_max_ratio, samples_exceeding) = if args.samples > 0 {
        let grid = estimate.maximizer.grid().clone();
        let kmax = estimate.band.min(grid.n() as i64 / 2 - 1);
        let mut rng = rng_from_seed(args.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let mut max_ratio = f64::MIN;
        let mut exceeding = 0usize;
        for _ in 0..args.samples {
            let field = gaussian_field_2d(&grid, 2.0, kmax, &mut rng)?;
            let ratio = gn_ratio(&field)?;
            if ratio > estimate.cgn {
                exceeding += 1;
            }
            max_ratio = max_ratio.max(ratio);
        }
        (Some(max_ratio), Some(exceeding))
    } else {
        (None, None)
    };

    let report = CgnReport {
        config: resolved,
        cgn: estimate.cgn,
        residual: estimate.residual,
        converged: estimate.converged,
        iterations: estimate.iterations,
        restarts_used: estimate.restarts_used,
        band: estimate.band,
        sample_max_ratio,
        samples_exceeding,
    };
    write_report(common, "cgn", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// evolve2d
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct Evolve2dResolved {
    config: Evolution2DConfig,
    initial: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvolutionReport<C: Serialize> {
    config: C,
    steps: usize,
    recorded: usize,
    mass_drift: f64,
    energy_drift: f64,
    first: TrajectorySample,
    last: TrajectorySample,
}

fn default_evolution_2d_config() -> Result<Evolution2DConfig> {
    Ok(Evolution2DConfig {
        grid: TorusGrid::new(32)?,
        g0: -1.0,
        dt: 1e-3,
        t_final: 0.5,
        record_every: 50,
    })
}

fn cmd_evolve2d(common: &Common, args: &Evolve2dArgs) -> Result<u8> {
    let mut cfg: Evolution2DConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => default_evolution_2d_config()?,
    };
    if let Some(n) = args.n {
        cfg.grid = TorusGrid::new(n)?;
    } else {
        // Torus grids deserialize structurally; re-validate the size.
        cfg.grid = TorusGrid::new(cfg.grid.n())?;
    }
    if let Some(g0) = args.g0 {
        cfg.g0 = g0;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t_final) = args.t_final {
        cfg.t_final = t_final;
    }
    if let Some(every) = args.record_every {
        cfg.record_every = every;
    }
    cfg.validate()?;

    let resolved = Evolve2dResolved {
        config: cfg.clone(),
        initial: args.initial.clone(),
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let phi0 = match &args.initial {
        Some(path) => read_field_2d(path, cfg.grid.clone())?,
        None => default_initial_state(&cfg.grid)?,
    };
    let trajectory = evolve_2d(&phi0, &cfg)?;

    let samples = &trajectory.samples;
    let report = EvolutionReport {
        config: resolved,
        steps: samples.last().map(|s| s.step).unwrap_or(0),
        recorded: samples.len(),
        mass_drift: trajectory.mass_drift(),
        energy_drift: trajectory.energy_drift(),
        first: samples[0],
        last: *samples.last().expect("trajectory records ≥ 1 sample"),
    };
    write_series(common, samples)?;
    let dir = fields_dir(common)?;
    write_field_2d(&dir.join("initial.bin"), &phi0)?;
    write_field_2d(&dir.join("final.bin"), trajectory.final_field())?;
    write_report(common, "evolve2d", &report)?;
    println!(
        "evolved to t = {} in {} steps: mass drift {:.3e}, energy drift {:.3e}",
        report.last.t, report.steps, report.mass_drift, report.energy_drift
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// evolve3d
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct Evolve3dResolved {
    config: Evolution3DConfig,
    initial: Option<PathBuf>,
}

fn default_evolution_3d_config() -> Result<Evolution3DConfig> {
    Ok(Evolution3DConfig {
        grid: SlabGrid::new(24, 16)?,
        spec: PotentialSpec::reference(),
        params: ScaledPotentialParams::from_c(0.9, 0.5, 0.25)?,
        dt: 1e-3,
        t_final: 0.25,
        record_every: 25,
        gauge: KineticGauge::Renormalized,
    })
}

/// Smooth normalized slab profile: a gentle planar modulation times the
/// lowest confined mode.
fn default_initial_state_3d(grid: &SlabGrid) -> Result<Field3D> {
    Field3D::from_fn(grid.clone(), |x, y, z| {
        let planar = 1.0 + 0.35 * x.cos() + 0.25 * y.cos() + 0.15 * (x + y).cos();
        Complex64::new(planar * z.cos(), 0.0)
    })
    .normalized()
}

/// Rebuild the scaling parameters when any of c, L, β is overridden.
fn apply_param_overrides(
    params: &ScaledPotentialParams,
    c: Option<f64>,
    l: Option<f64>,
    beta: Option<f64>,
) -> Result<ScaledPotentialParams> {
    if c.is_none() && l.is_none() && beta.is_none() {
        return Ok(params.clone());
    }
    ScaledPotentialParams::from_c(
        c.unwrap_or_else(|| params.c()),
        l.unwrap_or_else(|| params.l()),
        beta.unwrap_or_else(|| params.beta()),
    )
}

fn cmd_evolve3d(common: &Common, args: &Evolve3dArgs) -> Result<u8> {
    let mut cfg: Evolution3DConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => default_evolution_3d_config()?,
    };
    if args.nx.is_some() || args.nz.is_some() {
        cfg.grid = SlabGrid::new(
            args.nx.unwrap_or_else(|| cfg.grid.nx()),
            args.nz.unwrap_or_else(|| cfg.grid.nz()),
        )?;
    }
    if let Some(path) = &args.potential {
        cfg.spec = read_json_config(path)?;
    }
    cfg.params = apply_param_overrides(&cfg.params, args.c, args.l, args.beta)?;
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t_final) = args.t_final {
        cfg.t_final = t_final;
    }
    if let Some(every) = args.record_every {
        cfg.record_every = every;
    }
    if let Some(gauge) = args.gauge {
        cfg.gauge = gauge.into();
    }
    cfg.validate()?;

    let resolved = Evolve3dResolved {
        config: cfg.clone(),
        initial: args.initial.clone(),
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let psi0 = match &args.initial {
        Some(path) => read_field_3d(path, cfg.grid.clone())?,
        None => default_initial_state_3d(&cfg.grid)?,
    };
    let trajectory = evolve_3d(&psi0, &cfg)?;

    let samples = &trajectory.samples;
    let report = EvolutionReport {
        config: resolved,
        steps: samples.last().map(|s| s.step).unwrap_or(0),
        recorded: samples.len(),
        mass_drift: trajectory.mass_drift(),
        energy_drift: trajectory.energy_drift(),
        first: samples[0],
        last: *samples.last().expect("trajectory records ≥ 1 sample"),
    };
    write_series(common, samples)?;
    let dir = fields_dir(common)?;
    write_field_3d(&dir.join("initial.bin"), &psi0)?;
    write_field_3d(&dir.join("final.bin"), trajectory.final_field())?;
    write_report(common, "evolve3d", &report)?;
    println!(
        "evolved to t = {} in {} steps: mass drift {:.3e}, energy drift {:.3e}",
        report.last.t, report.steps, report.mass_drift, report.energy_drift
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct MinimizeResolved {
    config: MinimizationConfig,
    cgn: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MinimizeReport {
    config: MinimizeResolved,
    energy: f64,
    iterations: usize,
    residual: f64,
    tau_final: f64,
    /// Analytic cap 1 + C⁴‖V‖/2 when an interpolation constant was supplied.
    upper_bound: Option<f64>,
}

fn default_minimization_config() -> Result<MinimizationConfig> {
    Ok(MinimizationConfig {
        grid: SlabGrid::new(24, 16)?,
        spec: PotentialSpec::reference(),
        params: ScaledPotentialParams::from_c(0.9, 0.5, 0.25)?,
        max_iterations: 2000,
        tolerance: 1e-7,
        initial_tau: 0.5,
    })
}

fn cmd_minimize(common: &Common, args: &MinimizeArgs) -> Result<u8> {
    let mut cfg: MinimizationConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => default_minimization_config()?,
    };
    if args.nx.is_some() || args.nz.is_some() {
        cfg.grid = SlabGrid::new(
            args.nx.unwrap_or_else(|| cfg.grid.nx()),
            args.nz.unwrap_or_else(|| cfg.grid.nz()),
        )?;
    }
    if let Some(path) = &args.potential {
        cfg.spec = read_json_config(path)?;
    }
    cfg.params = apply_param_overrides(&cfg.params, args.c, args.l, args.beta)?;
    if let Some(n) = args.max_iterations {
        cfg.max_iterations = n;
    }
    if let Some(tol) = args.tolerance {
        cfg.tolerance = tol;
    }
    if let Some(tau) = args.initial_tau {
        cfg.initial_tau = tau;
    }
    cfg.validate()?;

    let resolved = MinimizeResolved {
        config: cfg.clone(),
        cgn: args.cgn,
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let upper_bound = match args.cgn {
        Some(cgn) => Some(minimization_upper_bound(&resolved.config.spec, cgn)?),
        None => None,
    };
    let result = minimize_energy(&cfg)?;
    println!("{:?}", result.energy);

    let report = MinimizeReport {
        config: resolved,
        energy: result.energy,
        iterations: result.iterations,
        residual: result.residual,
        tau_final: result.tau_final,
        upper_bound,
    };
    let dir = fields_dir(common)?;
    write_field_3d(&dir.join("minimizer.bin"), &result.minimizer)?;
    write_report(common, "minimize", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

fn cmd_reduce(common: &Common, args: &ReduceArgs) -> Result<u8> {
    let mut cfg: StudyConfig = match &args.config {
        Some(path) => read_json_config(path)?,
        None => {
            let cgn = match args.cgn {
                Some(cgn) => cgn,
                None => estimate_cgn(16, 4, 1e-9, 7)?.cgn,
            };
            StudyConfig::standard(cgn)?
        }
    };
    if let Some(scale) = args.coupling_scale {
        cfg.coupling_scale = scale;
    }
    if let Some(level) = args.quad_level {
        cfg.quad_level = level;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t_final) = args.t_final {
        cfg.t_final = t_final;
    }
    if let Some(checkpoints) = args.checkpoints {
        cfg.checkpoints = checkpoints;
    }
    cfg.validate()?;

    if common.dry_run {
        return print_resolved(&cfg);
    }

    let report: StudyReport = run_convergence_study(&cfg)?;
    for rung in &report.rungs {
        println!(
            "L = {:?}: N = {:.6e}, max marginal distance = {:.6e}",
            rung.l, rung.n, rung.max_distance
        );
    }
    println!(
        "monotone decrease: {}; final/first: {:.6}",
        report.monotone_max_distance, report.final_over_first
    );
    fs::create_dir_all(&common.out)?;
    write_study_csv(&report, &common.out.join("series.csv"))?;
    write_report(common, "reduce", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CheckResolved {
    suite: String,
    seed: u64,
    samples: Option<usize>,
    cgn: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    config: CheckResolved,
    total: usize,
    passed: usize,
    instances: Vec<CheckInstance>,
}

fn cmd_check(common: &Common, args: &CheckArgs) -> Result<u8> {
    let suite: Suite = args.suite.parse()?;
    let resolved = CheckResolved {
        suite: suite.name().to_string(),
        seed: args.seed,
        samples: args.samples,
        cgn: args.cgn,
    };
    if common.dry_run {
        return print_resolved(&resolved);
    }

    let options = SuiteOptions {
        seed: args.seed,
        samples: args.samples,
        cgn: args.cgn,
    };
    let instances = run_suite(suite, &options)?;

    println!(
        "{:<44} {:>10} {:>14} {:>9} {:>6}",
        "check", "seed", "margin", "tol", "result"
    );
    for inst in &instances {
        println!(
            "{:<44} {:>10} {:>14.6e} {:>9.1e} {:>6}",
            inst.name,
            inst.seed,
            inst.margin,
            inst.tolerance,
            if inst.passed { "pass" } else { "FAIL" }
        );
    }
    let passed = instances.iter().filter(|i| i.passed).count();
    let total = instances.len();
    println!("passed {passed}/{total}");

    let report = CheckReport {
        config: resolved,
        total,
        passed,
        instances,
    };
    write_report(common, "check", &report)?;

    if passed == total {
        Ok(0)
    } else {
        // A falsified instance is a numerical finding, not a usage mistake.
        emit_error_line(
            "check_failed",
            2,
            &format!("{} of {} check instances failed", total - passed, total),
        );
        Ok(2)
    }
}
