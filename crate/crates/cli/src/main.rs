//! `pnpk` — command-line front end for the pnpk-core numerical engine.
//!
//! Subcommands: `eig`, `kernel`, `evolve`, `simulate`, `validate`.
//! Exit codes: 0 success (all checks passed for `validate`), 1 failed
//! validation check or runtime failure, 2 invalid flags or malformed input,
//! 3 numerical-validity failure (bracket failure, singular solver, or a
//! request below a method's validity floor).
//!
//! All floating-point output uses Rust's shortest round-trip `{}` formatting;
//! CSV uses `\n` line endings, so repeated runs are byte-identical.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pnpk_core::bromwich::{bromwich_kernel, BromwichConfig};
use pnpk_core::kernel::{calibrate, kernel_field, KernelConfig};
use pnpk_core::mc::{l1_distance, simulate_detailed, SimConfig};
use pnpk_core::oracle::{evolve, kernel_estimate, EvolveConfig, Scheme};
use pnpk_core::spectral::{find_eigenvalues, Family};
use pnpk_core::validation::{run_validation, Level};
use pnpk_core::{Error, ModelParams, ScalarField};
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pnpk", version, about = "Spectrum, resolvent, heat kernel and \
stochastic simulation for damped diffusion with non-local boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the eigenvalue families.
    Eig(EigArgs),
    /// Evaluate the heat kernel K(x, y, t) on a grid in x.
    Kernel(KernelArgs),
    /// Evolve an initial density with the finite-difference oracle.
    Evolve(EvolveArgs),
    /// Monte Carlo jump-diffusion simulation.
    Simulate(SimulateArgs),
    /// Run the cross-validation suite and emit a JSON report.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct EigArgs {
    #[arg(long)]
    kappa2: f64,
    /// Roots per family.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    kappa2: f64,
    /// Source point.
    #[arg(long)]
    y: f64,
    /// Time.
    #[arg(long)]
    t: f64,
    /// Number of grid points in x.
    #[arg(long, default_value_t = 501)]
    grid: usize,
    /// Mode count per family, or "auto".
    #[arg(long, default_value = "auto")]
    modes: String,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    method: Method,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Method {
    Series,
    Bromwich,
    Fd,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Bromwich => "bromwich",
            Method::Fd => "fd",
        }
    }
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    kappa2: f64,
    #[arg(long, default_value_t = 0.0)]
    voltage: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Initial condition: "uniform", "delta:<y>", or "file:<path>"
    /// (one value per line, or x,u rows; must match --nx).
    #[arg(long, default_value = "uniform")]
    init: String,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 513)]
    nx: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    kappa2: f64,
    /// Start position.
    #[arg(long)]
    y0: f64,
    /// Time horizon.
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 100_000)]
    particles: usize,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Comma-separated kappa^2 values.
    #[arg(long, default_value = "1,4,12,25")]
    kappa2: String,
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

/// Exit-code policy for core errors.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BracketFailure { .. }
        | Error::SolverSingular { .. }
        | Error::NonFiniteState { .. }
        | Error::TimeTooSmall { .. } => 3,
        Error::InvalidParameter(_) | Error::InvalidStart { .. } | Error::GridMismatch { .. } => 2,
        _ => 1,
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn calibration_hash(c: &pnpk_core::kernel::Calibration) -> String {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    c.stationary.to_bits().hash(&mut h);
    c.transcendental.to_bits().hash(&mut h);
    c.cosine.to_bits().hash(&mut h);
    format!("{:016x}", h.finish())
}

fn cmd_eig(args: &EigArgs) -> Result<(), (u8, String)> {
    let p = ModelParams::homogeneous(args.kappa2).map_err(fail)?;
    let s = find_eigenvalues(&p, args.count).map_err(fail)?;
    // Rows: (family, index, eigenvalue, residual, bracket)
    let mut rows: Vec<(Family, usize, f64, f64, f64, f64)> =
        vec![(Family::Ground, 0, s.ground, 0.0, s.ground, s.ground)];
    for c in &s.cosine_family {
        rows.push((Family::Cosine, c.k, c.mu, 0.0, c.mu, c.mu));
    }
    for t in &s.transcendental_family {
        rows.push((
            Family::Transcendental,
            t.m,
            t.lambda,
            t.residual,
            t.bracket.0,
            t.bracket.1,
        ));
    }
    rows.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let content = match args.format {
        Format::Csv => {
            let mut out = String::from("family,index,eigenvalue,residual,bracket_lo,bracket_hi\n");
            for (f, i, l, r, lo, hi) in rows {
                out.push_str(&format!("{},{},{},{},{},{}\n", f.label(), i, l, r, lo, hi));
            }
            out
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(f, i, l, r, lo, hi)| {
                    serde_json::json!({
                        "family": f.label(),
                        "index": i,
                        "eigenvalue": l,
                        "residual": r,
                        "bracket_lo": lo,
                        "bracket_hi": hi,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items).unwrap();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content).map_err(io_fail)
}

fn cmd_kernel(args: &KernelArgs) -> Result<(), (u8, String)> {
    let p = ModelParams::homogeneous(args.kappa2).map_err(fail)?;
    if args.grid < 2 {
        return Err((2, "grid must be >= 2".into()));
    }
    let mut cfg = KernelConfig::auto(&p);
    if args.modes != "auto" {
        cfg.mode_count = args
            .modes
            .parse::<usize>()
            .map_err(|_| (2u8, format!("--modes must be \"auto\" or an integer, got {}", args.modes)))?;
    }
    let (field, modes_used) = match args.method {
        Method::Series => {
            let s = find_eigenvalues(&p, cfg.mode_count).map_err(fail)?;
            (
                kernel_field(&p, args.y, args.t, args.grid, &s, &cfg).map_err(fail)?,
                cfg.mode_count,
            )
        }
        Method::Bromwich => {
            let b = BromwichConfig::auto(&p);
            let n = args.grid;
            let mut vals = Vec::with_capacity(n);
            for i in 0..n {
                let x = i as f64 / (n - 1) as f64;
                vals.push(bromwich_kernel(&p, x, args.y, args.t, &b).map_err(fail)?);
            }
            (ScalarField::new(vals).map_err(fail)?, b.node_count)
        }
        Method::Fd => {
            let nx = args.grid.max(65);
            let c = EvolveConfig::new(nx, 2e-5, Scheme::CrankNicolson, args.t.max(2e-4))
                .map_err(fail)?;
            let f = kernel_estimate(&p, args.y, args.t, &c).map_err(fail)?;
            let resampled =
                ScalarField::from_fn(args.grid, |x| f.interpolate(x)).map_err(fail)?;
            (resampled, 0)
        }
    };
    let meta = serde_json::json!({
        "method": args.method.label(),
        "modes": modes_used,
        "kappa2": args.kappa2,
        "y": args.y,
        "t": args.t,
        "calibration": [cfg.calibration.stationary, cfg.calibration.transcendental, cfg.calibration.cosine],
        "calibration_hash": calibration_hash(&cfg.calibration),
    });
    let content = match args.format {
        Format::Csv => {
            let mut out = String::from("x,K\n");
            for i in 0..field.grid_size() {
                out.push_str(&format!("{},{}\n", field.x(i), field.values()[i]));
            }
            out.push_str(&format!("# {meta}\n"));
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = (0..field.grid_size())
                .map(|i| serde_json::json!({"x": field.x(i), "K": field.values()[i]}))
                .collect();
            let mut s =
                serde_json::to_string_pretty(&serde_json::json!({"rows": rows, "meta": meta}))
                    .unwrap();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content).map_err(io_fail)
}

fn parse_init(spec: &str, nx: usize) -> Result<ScalarField, (u8, String)> {
    if spec == "uniform" {
        return ScalarField::from_fn(nx, |_| 1.0).map_err(fail);
    }
    if let Some(y) = spec.strip_prefix("delta:") {
        let y: f64 = y
            .parse()
            .map_err(|_| (2u8, format!("malformed delta position in --init {spec}")))?;
        if !(0.0..=1.0).contains(&y) {
            return Err((2, format!("delta position {y} outside [0, 1]")));
        }
        // Split unit mass linearly between the two neighbouring nodes.
        let h = 1.0 / (nx - 1) as f64;
        let j = ((y / h).floor() as usize).min(nx - 2);
        let theta = (y - j as f64 * h) / h;
        let mut vals = vec![0.0; nx];
        vals[j] = (1.0 - theta) / h;
        vals[j + 1] = theta / h;
        return ScalarField::new(vals).map_err(fail);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| (2u8, format!("cannot read init file {path}: {e}")))?;
        let mut vals = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "x,u" {
                continue;
            }
            let field = line.rsplit(',').next().unwrap();
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| (2u8, format!("malformed init file {path} at line {}", ln + 1)))?;
            vals.push(v);
        }
        if vals.len() != nx {
            return Err((
                2,
                format!("init file {path} has {} values, expected {nx}", vals.len()),
            ));
        }
        return ScalarField::new(vals).map_err(fail);
    }
    Err((2, format!("--init must be uniform, delta:<y> or file:<path>, got {spec}")))
}

fn cmd_evolve(args: &EvolveArgs) -> Result<(), (u8, String)> {
    let p = ModelParams::new(args.kappa2, args.epsilon, args.voltage).map_err(fail)?;
    let cfg = EvolveConfig::new(args.nx, args.dt, Scheme::CrankNicolson, args.t_end).map_err(fail)?;
    let init = parse_init(&args.init, args.nx)?;
    let r = evolve(&p, &init, &cfg).map_err(fail)?;
    let m0 = r.mass_trace[0].1;
    let drift = r
        .mass_trace
        .iter()
        .map(|(_, m)| (m - m0).abs())
        .fold(0.0, f64::max);
    let min_u = r
        .min_trace
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::INFINITY, f64::min);
    let summary = serde_json::json!({
        "kappa2": args.kappa2,
        "epsilon": args.epsilon,
        "voltage": args.voltage,
        "t_end": args.t_end,
        "dt": args.dt,
        "nx": args.nx,
        "mass_initial": m0,
        "mass_drift": drift,
        "min_value": min_u,
    });
    let mut out = String::from("x,u\n");
    let f = &r.final_field;
    for i in 0..f.grid_size() {
        out.push_str(&format!("{},{}\n", f.x(i), f.values()[i]));
    }
    out.push_str(&format!("# {summary}\n"));
    emit(&args.out, &out).map_err(io_fail)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), (u8, String)> {
    let p = ModelParams::homogeneous(args.kappa2).map_err(fail)?;
    let c = SimConfig::for_params(&p, args.particles, args.dt, args.seed, args.bins).map_err(fail)?;
    let out = simulate_detailed(&p, args.y0, args.t, &c).map_err(fail)?;
    // Reference density for the L1 diagnostic.
    let cfg = KernelConfig::auto(&p);
    let s = find_eigenvalues(&p, cfg.mode_count).map_err(fail)?;
    let reference = kernel_field(&p, args.y0, args.t, 2001, &s, &cfg).map_err(fail)?;
    let l1 = l1_distance(&out.histogram, &reference).map_err(fail)?;
    let summary = serde_json::json!({
        "kappa2": args.kappa2,
        "y0": args.y0,
        "t": args.t,
        "particles": args.particles,
        "dt": args.dt,
        "seed": args.seed,
        "bins": args.bins,
        "mean_jumps": out.mean_jumps,
        "frac_to_left": out.frac_to_left,
        "l1_vs_kernel": l1,
    });
    let mut text = String::from("bin_center,density\n");
    for i in 0..out.histogram.bins {
        text.push_str(&format!(
            "{},{}\n",
            out.histogram.bin_center(i),
            out.histogram.normalized[i]
        ));
    }
    text.push_str(&format!("# {summary}\n"));
    emit(&args.out, &text).map_err(io_fail)
}

fn cmd_validate(args: &ValidateArgs) -> Result<bool, (u8, String)> {
    let kappa2: Vec<f64> = args
        .kappa2
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| (2u8, format!("malformed --kappa2 entry {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if kappa2.is_empty() {
        return Err((2, "--kappa2 must list at least one value".into()));
    }
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let report = run_validation(&kappa2, level).map_err(fail)?;
    // Exercise the calibration path explicitly so a non-snapping factor
    // surfaces as a hard (exit 3) failure rather than a failed check.
    for &k2 in &kappa2 {
        let p = ModelParams::homogeneous(k2).map_err(fail)?;
        let cfg = KernelConfig::auto(&p);
        let s = find_eigenvalues(&p, cfg.mode_count).map_err(fail)?;
        calibrate(&p, &s).map_err(|e| (3u8, e.to_string()))?;
    }
    let mut text = serde_json::to_string_pretty(&report).unwrap();
    text.push('\n');
    emit(&args.out, &text).map_err(io_fail)?;
    Ok(report.all_passed())
}

fn fail(e: Error) -> (u8, String) {
    (exit_code_for(&e), e.to_string())
}

fn io_fail(e: std::io::Error) -> (u8, String) {
    (1, format!("io error: {e}"))
}

fn main() -> ExitCode {
    // PNPK_THREADS caps the rayon pool; results are independent of it by
    // construction (integer tallies and order-independent reductions).
    if let Ok(v) = std::env::var("PNPK_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: PNPK_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Eig(a) => cmd_eig(a).map(|()| true),
        Command::Kernel(a) => cmd_kernel(a).map(|()| true),
        Command::Evolve(a) => cmd_evolve(a).map(|()| true),
        Command::Simulate(a) => cmd_simulate(a).map(|()| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation: one or more checks failed");
            ExitCode::from(1)
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
