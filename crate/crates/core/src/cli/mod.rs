//! Command-line front end. Every output starts with the resolved config:
//! as `#` comment lines for CSV, as the `config` member for JSON.

mod config;
mod figures;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub use config::{
    default_params, read_header_config, Basis, Convention, Direction, Figure, Model, Options,
    RunConfig, WindowArg,
};

use crate::classical::{self, SweepOptions};
use crate::error::{Error, Result};
use crate::kb;
use crate::lindblad::{self, PeriodicOptions, ScanOptions};
use crate::meanfield;
use crate::params::{self, BasisChoice, SystemParams};
use crate::vanvleck;
use config::compact;

/// Environment variable overriding the worker count of parallel scans.
pub const THREADS_ENV: &str = "KERR_FLOQUET_THREADS";

#[derive(Parser, Debug)]
#[command(name = "kerr-floquet", version, about = "Driven Duffing oscillator: classical averaging, van Vleck expansions and Lindblad scans")]
struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    params: ParamFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Serialize)]
struct ParamFlags {
    #[arg(long, global = true)]
    m: Option<f64>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Lab-frame drive amplitude F.
    #[arg(long = "force", global = true)]
    #[serde(rename = "F")]
    force: Option<f64>,
    #[arg(long, global = true)]
    omega: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    hbar: Option<f64>,
}

#[derive(Args, Debug, Default, Serialize)]
struct GridFlags {
    /// Smallest ω − ω0.
    #[arg(long, allow_hyphen_values = true)]
    delta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta_max: Option<f64>,
    #[arg(long, visible_alias = "delta-steps")]
    n_points: Option<usize>,
}

#[derive(Args, Debug, Default, Serialize)]
struct SweepFlags {
    #[arg(long, value_enum)]
    direction: Option<Direction>,
    #[arg(long)]
    settle_periods: Option<usize>,
    #[arg(long)]
    measure_periods: Option<usize>,
    #[arg(long)]
    samples_per_period: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Default, Serialize)]
struct PsdFlags {
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    samples_per_period: Option<usize>,
    #[arg(long, value_enum)]
    window: Option<WindowArg>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Default, Serialize)]
struct VvFlags {
    #[arg(long, value_enum)]
    basis: Option<Basis>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug, Default, Serialize)]
struct BasisFlags {
    #[arg(long, value_enum)]
    basis: Option<Basis>,
}

#[derive(Args, Debug, Default, Serialize)]
struct ScanFlags {
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridFlags,
    #[arg(long)]
    force_min: Option<f64>,
    #[arg(long)]
    force_max: Option<f64>,
    #[arg(long)]
    force_steps: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Default, Serialize)]
struct MprFlags {
    #[arg(long, value_enum)]
    basis: Option<Basis>,
    #[arg(long, value_enum)]
    convention: Option<Convention>,
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Args, Debug, Default, Serialize)]
struct FigureFlags {
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridFlags,
    #[arg(long)]
    settle_periods: Option<usize>,
    #[arg(long)]
    measure_periods: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    force_steps: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rotating-frame coefficients in both bases.
    Coeffs,
    /// Adiabatic time-domain frequency sweep with lock-in detection.
    ClassicalSweep {
        #[command(flatten)]
        grid: GridFlags,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Slow-flow fixed points and their stability.
    KbSteady {
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Periodogram of a trajectory started at (x0, p0).
    Psd(PsdFlags),
    /// Effective Hamiltonian matrix and fitted Kerr coefficients.
    Vv(VvFlags),
    /// Classical limit of the mean-field equations against the slow flow.
    MeanfieldCheck(BasisFlags),
    /// Stationary photon number over a detuning × drive grid.
    LindbladScan(ScanFlags),
    /// Predicted multiphoton-resonance detunings.
    Mpr(MprFlags),
    /// Canonical parameter sets of the reference figures.
    Figure {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        flags: FigureFlags,
    },
}

fn to_map<T: Serialize>(v: &T) -> Map<String, Value> {
    compact(serde_json::to_value(v).expect("flags serialize"))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::ClassicalSweep { .. } => "classical-sweep",
            Command::KbSteady { .. } => "kb-steady",
            Command::Psd(_) => "psd",
            Command::Vv(_) => "vv",
            Command::MeanfieldCheck(_) => "meanfield-check",
            Command::LindbladScan(_) => "lindblad-scan",
            Command::Mpr(_) => "mpr",
            Command::Figure { .. } => "figure",
        }
    }

    fn flags(&self) -> Map<String, Value> {
        match self {
            Command::Coeffs => Map::new(),
            Command::ClassicalSweep { grid, sweep } => {
                let mut m = to_map(grid);
                m.extend(to_map(sweep));
                m
            }
            Command::KbSteady { grid } => to_map(grid),
            Command::Psd(f) => to_map(f),
            Command::Vv(f) => to_map(f),
            Command::MeanfieldCheck(f) => to_map(f),
            Command::LindbladScan(f) => to_map(f),
            Command::Mpr(f) => to_map(f),
            Command::Figure { which, flags } => {
                let mut m = to_map(flags);
                m.insert("figure".into(), serde_json::to_value(which).unwrap());
                m
            }
        }
    }
}

/// What a command produced.
pub enum Output {
    Csv(String),
    Json(Value),
}

/// Process exit status for an error: 1 invalid input, 2 numerical
/// failure, 3 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        e if e.is_numerical() => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    let out = dispatch(&cfg)?;
    write_output(&cfg, out)
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let base = match &cli.command {
        Command::Figure { which, .. } => figures::canonical(*which),
        _ => to_map(&default_params()),
    };
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            match serde_json::from_str::<Value>(&text)
                .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?
            {
                Value::Object(m) => m,
                _ => return Err(Error::invalid("config file must hold a JSON object")),
            }
        }
        None => Map::new(),
    };
    let mut flags = to_map(&cli.params);
    flags.extend(cli.command.flags());
    if let Some(o) = &cli.output {
        flags.insert("output".into(), json!(o));
    }
    if let Some(s) = cli.seed {
        flags.insert("seed".into(), json!(s));
    }
    let mut cfg = RunConfig::from_layers(cli.command.name(), &[base, file, flags])?;
    cfg.params.validate()?;
    fill_defaults(&mut cfg)?;
    Ok(cfg)
}

pub(crate) fn a_kerr(p: &SystemParams) -> Result<f64> {
    Ok(params::compute_rwa_coefficients(p, &BasisChoice::system_photons(p))?.u_c)
}

/// Settling that covers `10/γ` at the fastest drive of the grid.
pub(crate) fn settle_for(p: &SystemParams, delta_max: f64) -> usize {
    SweepOptions::for_params(&p.with_omega(p.omega0 + delta_max.max(0.0))).settle_periods
}

/// Fills every option the command reads, so the embedded config is
/// complete. Idempotent.
pub fn fill_defaults(cfg: &mut RunConfig) -> Result<()> {
    let p = cfg.params;
    let o = &mut cfg.options;
    let grid = |o: &mut Options, lo: f64, hi: f64, n: usize| {
        o.delta_min.get_or_insert(lo);
        o.delta_max.get_or_insert(hi);
        o.n_points.get_or_insert(n);
    };
    match cfg.command.as_str() {
        "coeffs" => {}
        "classical-sweep" => {
            grid(o, -0.05, 0.2, 51);
            o.direction.get_or_insert(Direction::Down);
            let settle = settle_for(&p, o.delta_max.unwrap());
            o.settle_periods.get_or_insert(settle);
            o.measure_periods.get_or_insert(64);
            o.samples_per_period.get_or_insert(32);
            o.tol.get_or_insert(1e-9);
        }
        "kb-steady" => grid(o, -0.05, 0.2, 51),
        "psd" => {
            o.periods.get_or_insert(512);
            o.samples_per_period.get_or_insert(32);
            o.window.get_or_insert(WindowArg::Hann);
            o.x0.get_or_insert(0.0);
            o.p0.get_or_insert(0.0);
            o.tol.get_or_insert(1e-10);
        }
        "vv" => {
            o.basis.get_or_insert(Basis::B);
            o.order.get_or_insert(1);
            o.dim.get_or_insert(16);
        }
        "meanfield-check" => {
            o.basis.get_or_insert(Basis::B);
        }
        "lindblad-scan" => {
            grid(o, 0.0, 0.04, 41);
            let kappa = 0.1 * a_kerr(&p)?;
            o.kappa.get_or_insert(kappa);
            o.dim.get_or_insert(24);
            o.model.get_or_insert(Model::Exact);
            o.tol.get_or_insert(PeriodicOptions::default().tol);
        }
        "mpr" => {
            o.basis.get_or_insert(Basis::B);
            o.convention.get_or_insert(Convention::Eq6);
            o.n_max.get_or_insert(6);
        }
        "figure" => figures::fill_defaults(cfg)?,
        other => return Err(Error::invalid(format!("unknown command '{other}'"))),
    }
    Ok(())
}

fn dispatch(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params;
    let o = &cfg.options;
    match cfg.command.as_str() {
        "coeffs" => coeffs(&p),
        "classical-sweep" => {
            let grid = delta_grid(o)?;
            let options = SweepOptions {
                settle_periods: o.settle_periods.unwrap(),
                measure_periods: o.measure_periods.unwrap(),
                tol: o.tol.unwrap(),
                samples_per_period: o.samples_per_period.unwrap(),
            };
            let direction: classical::SweepDirection = o.direction.unwrap().into();
            let ordered = ordered_grid(&grid, direction);
            let points = classical::sweep_response(&p, &ordered, direction, &options)?;
            let mut csv = String::from("delta,u,v,X\n");
            for pt in points {
                let r = pt.response;
                csv += &format!("{},{},{},{}\n", pt.delta, r.u, r.v, r.amplitude);
            }
            Ok(Output::Csv(csv))
        }
        "kb-steady" => {
            let mut csv = String::from("delta,X,stable\n");
            for d in delta_grid(o)? {
                for s in kb::steady_states(&p.with_omega(p.omega0 + d))? {
                    csv += &format!("{},{},{}\n", d, s.state.amplitude(), s.stable);
                }
            }
            Ok(Output::Csv(csv))
        }
        "psd" => {
            let spec = figures::psd(&p, o)?;
            let mut csv = String::from("omega_response,psd\n");
            for (w, s) in spec.omega.iter().zip(&spec.psd) {
                csv += &format!("{w},{s}\n");
            }
            Ok(Output::Csv(csv))
        }
        "vv" => vv(&p, o),
        "meanfield-check" => {
            let basis = BasisChoice::of_kind(o.basis.unwrap().into(), &p);
            let coeffs = params::compute_rwa_coefficients(&p, &basis)?;
            let eom = meanfield::meanfield_eom(&coeffs, p.hbar);
            let limit = meanfield::classical_limit(&eom, &p, &basis)?;
            let slow = kb::slow_flow_field(&p.with_gamma(0.0));
            Ok(Output::Json(json!({
                "basis": o.basis,
                "meanfield_eom": eom,
                "classical_limit": limit,
                "slow_flow": slow,
                "relative_deviation": meanfield::compare_vector_fields(&limit, &slow),
                "linear_block_deviation": meanfield::linear_block_deviation(&limit, &slow),
            })))
        }
        "lindblad-scan" => {
            let scan = lindblad_scan(&p, o)?;
            let mut csv = String::from("delta,force,n_avg,converged\n");
            for (i, d) in scan.delta.iter().enumerate() {
                for (j, f) in scan.force.iter().enumerate() {
                    csv += &format!("{},{},{},{}\n", d, f, scan.n_avg[i][j], scan.converged[i][j]);
                }
            }
            Ok(Output::Csv(csv))
        }
        "mpr" => {
            let basis = BasisChoice::of_kind(o.basis.unwrap().into(), &p);
            let mut csv = String::from("n,delta_a\n");
            for n in 1..=o.n_max.unwrap() {
                let pred = lindblad::mpr_predicted(&p, &basis, n, o.convention.unwrap().into())?;
                csv += &format!("{},{}\n", n, pred.delta_a);
            }
            Ok(Output::Csv(csv))
        }
        "figure" => figures::run(cfg),
        other => Err(Error::invalid(format!("unknown command '{other}'"))),
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::invalid("grid needs at least one point")),
        1 => Ok(vec![lo]),
        _ => {
            if !(hi > lo) {
                return Err(Error::invalid(format!("empty grid [{lo}, {hi}]")));
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
    }
}

pub(crate) fn delta_grid(o: &Options) -> Result<Vec<f64>> {
    linspace(o.delta_min.unwrap(), o.delta_max.unwrap(), o.n_points.unwrap())
}

pub(crate) fn ordered_grid(grid: &[f64], direction: classical::SweepDirection) -> Vec<f64> {
    let mut g = grid.to_vec();
    if direction == classical::SweepDirection::Down {
        g.reverse();
    }
    g
}

fn coeffs(p: &SystemParams) -> Result<Output> {
    let a = params::compute_rwa_coefficients(p, &BasisChoice::system_photons(p))?;
    let b = params::compute_rwa_coefficients(p, &BasisChoice::pump_photons(p))?;
    let bogoliubov = params::bogoliubov_coefficients(p.omega0, p.omega)?;
    Ok(Output::Json(json!({
        "a": a,
        "b": b,
        "bogoliubov": bogoliubov,
        "identical": a == b,
    })))
}

fn vv(p: &SystemParams, o: &Options) -> Result<Output> {
    let basis = BasisChoice::of_kind(o.basis.unwrap().into(), p);
    let fc = vanvleck::fourier_components(p, &basis, o.dim.unwrap())?;
    let h = vanvleck::effective_hamiltonian(&fc, o.order.unwrap(), p.hbar, p.omega)?;
    let n = h.matrix.dim();
    let part = |f: fn(faer::c64) -> f64| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f(h.matrix.get(i, j))).collect()).collect()
    };
    let fitted = vanvleck::fit_kerr_coefficients(&h.matrix, p.hbar)?;
    Ok(Output::Json(json!({
        "basis": o.basis,
        "order": h.order,
        "dim": n,
        "re": part(|z| z.re),
        "im": part(|z| z.im),
        "fitted": fitted,
    })))
}

pub(crate) fn lindblad_scan(p: &SystemParams, o: &Options) -> Result<lindblad::MprScan> {
    let deltas = delta_grid(o)?;
    let forces = match o.force_steps {
        Some(n) => linspace(o.force_min.unwrap_or(0.0), o.force_max.unwrap_or(p.force), n)?,
        None => vec![p.force],
    };
    let dim = o.dim.unwrap();
    let mut options = ScanOptions::for_dim(dim);
    options.periodic.tol = o.tol.unwrap_or(options.periodic.tol);
    lindblad::mpr_scan(p, &deltas, &forces, o.model.unwrap().into(), o.kappa.unwrap(), dim, &options)
}

fn write_output(cfg: &RunConfig, out: Output) -> Result<()> {
    let text = match out {
        Output::Csv(body) => cfg.header() + &body,
        Output::Json(mut v) => {
            if let Value::Object(m) = &mut v {
                m.insert("config".into(), cfg.to_value());
            }
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
