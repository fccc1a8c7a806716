//! Batch front-end: config ingestion, experiment subcommands and CSV output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::damping::{integrate, unphysical_spin_time, DampingParams, LangevinState};
use crate::error::{Error, Result};
use crate::evolve::{evolve, linspace, rwa_comparison, Observable, TimeSeries};
use crate::hamiltonian::dispersive_hamiltonian;
use crate::hilbert::{build_operators, coherent_state, default_cutoff, QuantumState, SpaceSpec, Spin};
use crate::model::{
    coupling_constant, derive_field_params, model_params, quantum_regime_temperature, resonant_rf_frequency,
    ModelParams, PhysicalSetup, PrefactorMode,
};
use crate::protocol::{estimate_resolving_power, scenario_table_at, simulate_switching, SwitchSchedule};
use crate::squeezing::{max_squeeze_factor, mean_position_with, revival_period, squeeze_factor, squeeze_params};
use crate::C64;

#[derive(Debug, Parser)]
#[command(name = "namr-qed", version, about = "Spin / nanomechanical resonator coupling experiments")]
pub struct Cli {
    /// Write output here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field parameters, coupling constants and detection estimates.
    Derive(DeriveArgs),
    /// Squeeze factor r_k(t) of one branch.
    Squeeze(SqueezeArgs),
    /// Maximum squeeze factor over a (g/Δ, g/ω_c) grid.
    SweepSqueeze(SweepArgs),
    /// Collapse and revival of ⟨x⟩, analytic and numerical.
    Revival(RevivalArgs),
    /// Spin-up probability under the full and JC Hamiltonians.
    Rabi(RabiArgs),
    /// JC / anti-JC switching series.
    Protocol(ProtocolArgs),
    /// Damped moment equations.
    Damp(DampArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrefactorArg {
    Exact,
    Paper,
}

impl From<PrefactorArg> for PrefactorMode {
    fn from(p: PrefactorArg) -> Self {
        match p {
            PrefactorArg::Exact => PrefactorMode::Exact,
            PrefactorArg::Paper => PrefactorMode::Paper,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub prefactor: PrefactorArg,
    /// Detuning used for the frequency-shift estimate.
    #[arg(long, default_value_t = 0.1)]
    pub g_over_delta: f64,
}

#[derive(Debug, clap::Args)]
pub struct SqueezeArgs {
    #[arg(long, default_value_t = 0.1)]
    pub g_over_delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub g_over_omega: f64,
    /// Spin branch, 0 or 1.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// End time in units of 1/g; defaults to one branch period.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 10)]
    pub n_delta: usize,
    #[arg(long, default_value_t = 99)]
    pub n_omega: usize,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
}

#[derive(Debug, clap::Args)]
pub struct RevivalArgs {
    #[arg(long, default_value_t = 1.0)]
    pub omega_c: f64,
    #[arg(long, default_value_t = 10.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Real coherent amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// End time in units of 1/g; defaults to 1.5 revival periods.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[arg(long)]
    pub n_cut: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct RabiArgs {
    #[arg(long, default_value_t = 0.01)]
    pub g_over_omega: f64,
    /// Number of vacuum Rabi periods π/g.
    #[arg(long, default_value_t = 1.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub n_cut: usize,
}

#[derive(Debug, clap::Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 1.0)]
    pub omega_c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub g_over_delta: f64,
    /// Segment length in units of 1/Δ.
    #[arg(long, default_value_t = 20.0)]
    pub half_period: f64,
    #[arg(long, default_value_t = 10)]
    pub cycles: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub samples_per_segment: usize,
    #[arg(long)]
    pub n_cut: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    /// Spin excited, resonator thermal.
    Spin,
    /// One extra resonator quantum, spin down.
    Namr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TimeScale {
    G,
    Kappa,
}

#[derive(Debug, clap::Args)]
pub struct DampArgs {
    #[arg(long, default_value_t = 0.2)]
    pub kappa_over_g: f64,
    #[arg(long, default_value_t = 10.0)]
    pub nth: f64,
    /// End time in units of the selected time scale.
    #[arg(long, default_value_t = 60.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1200)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "spin")]
    pub initial: InitialArg,
    #[arg(long, value_enum, default_value = "g")]
    pub time_scale: TimeScale,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let text = match &cli.command {
        Command::Derive(a) => derive_report(a)?,
        Command::Squeeze(a) => to_csv(&squeeze_series(a)?),
        Command::SweepSqueeze(a) => sweep_csv(a)?,
        Command::Revival(a) => to_csv(&revival_series(a)?),
        Command::Rabi(a) => to_csv(&rabi_series(a)?),
        Command::Protocol(a) => protocol_csv(a)?,
        Command::Damp(a) => {
            let label = if a.time_scale == TimeScale::Kappa { "t_kappa" } else { "t_g" };
            to_csv_labeled(&damp_series(a)?, label)
        }
    };
    match &cli.output {
        Some(path) => fs::write(path, text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe downstream (e.g. `| head`) is not a failure
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header line then one row per sample, time in the first column `t_g`.
pub fn to_csv(series: &TimeSeries) -> String {
    to_csv_labeled(series, "t_g")
}

fn to_csv_labeled(series: &TimeSeries, time_label: &str) -> String {
    let cols: Vec<(&str, &[f64])> = series.columns().collect();
    let mut out = String::from(time_label);
    for (label, _) in &cols {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, t) in series.times().iter().enumerate() {
        out.push_str(&num(*t));
        for (_, values) in &cols {
            out.push(',');
            out.push_str(&num(values[i]));
        }
        out.push('\n');
    }
    out
}

const CONFIG_KEYS: [&str; 9] = ["b0", "b1", "phi", "gamma", "m_tip", "d", "m_eff", "omega_c", "k_eff"];

/// Flat `key = value` file in SI units; `#` starts a comment. All keys are
/// required except `k_eff`, which defaults to `m_eff · ω_c²`.
pub fn load_config(path: &Path) -> Result<PhysicalSetup> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<PhysicalSetup> {
    let mut values: [Option<f64>; 9] = [None; 9];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let slot = CONFIG_KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        if values[slot].is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("key `{key}`: not a number: `{}`", value.trim())))?;
        values[slot] = Some(v);
    }
    let get = |i: usize| values[i].ok_or_else(|| Error::Config(format!("missing key `{}`", CONFIG_KEYS[i])));
    let setup = PhysicalSetup {
        b0: get(0)?,
        b1: get(1)?,
        phi: get(2)?,
        gamma: get(3)?,
        m_tip: get(4)?,
        d: get(5)?,
        m_eff: get(6)?,
        omega_c: get(7)?,
        k_eff: values[8],
    };
    setup.validate()?;
    Ok(setup)
}

fn derive_report(args: &DeriveArgs) -> Result<String> {
    if !(args.g_over_delta > 0.0) {
        return Err(Error::InvalidArgument("--g-over-delta must be positive".into()));
    }
    let setup = load_config(&args.config)?;
    let fp = derive_field_params(&setup)?;
    let mode = PrefactorMode::from(args.prefactor);
    let params = model_params(&setup, &fp, mode)?;
    let g = params.g;
    let delta = g / args.g_over_delta;
    let delta_f = g * g / delta;

    let mut out = String::new();
    let mut kv = |k: &str, v: f64| {
        let _ = writeln!(out, "{k}={}", num(v));
    };
    kv("a_t", fp.a);
    kv("gradient_t_per_m", fp.gradient);
    kv("lambda_m", fp.lambda);
    kv("omega_r", resonant_rf_frequency(&setup, &fp));
    kv("g_exact", coupling_constant(&setup, &fp, PrefactorMode::Exact));
    kv("g_paper", coupling_constant(&setup, &fp, PrefactorMode::Paper));
    kv("g", g);
    kv("setup_delta", params.delta());
    kv("g_over_delta", args.g_over_delta);
    kv("delta", delta);
    kv("delta_f_hz", delta_f);
    kv("delta_f_cyclic_hz", delta_f / (2.0 * std::f64::consts::PI));
    kv("resolving_power", estimate_resolving_power(delta_f, setup.omega_c)?);
    kv("t_quantum_k", quantum_regime_temperature(setup.omega_c));
    for row in scenario_table_at(args.g_over_delta) {
        let name = row.scenario.name;
        kv(&format!("scenario.{name}.omega_c"), row.scenario.omega_c);
        kv(&format!("scenario.{name}.k_eff"), row.scenario.k_eff);
        kv(&format!("scenario.{name}.g"), row.g);
        kv(&format!("scenario.{name}.delta_f_hz"), row.delta_f);
        kv(&format!("scenario.{name}.delta_f_cyclic_hz"), row.delta_f_cyclic);
        kv(&format!("scenario.{name}.resolving_power"), row.resolving_power);
        kv(&format!("scenario.{name}.t_quantum_k"), row.t_quantum);
    }
    Ok(out)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("--samples must be at least 2, got {samples}")));
    }
    Ok(())
}

/// Columns `r`, `abs_r`, `ln_n` and `two_ln_n` against `t_g`, with g = 1.
pub fn squeeze_series(args: &SqueezeArgs) -> Result<TimeSeries> {
    check_samples(args.samples)?;
    if args.k > 1 {
        return Err(Error::InvalidArgument(format!("--k must be 0 or 1, got {}", args.k)));
    }
    let params = ModelParams::from_ratios(1.0, args.g_over_delta, args.g_over_omega)?;
    let sp = squeeze_params(&params, args.k)?;
    let tmax = args.tmax.unwrap_or(2.0 * std::f64::consts::PI / sp.omega);
    if !(tmax > 0.0) {
        return Err(Error::InvalidArgument("--tmax must be positive".into()));
    }
    let grid = linspace(0.0, tmax, args.samples);
    let r: Vec<f64> = grid.iter().map(|&t| squeeze_factor(&sp, t)).collect();
    let ln_n = sp.n_k.ln();
    let mut s = TimeSeries::new(grid)?;
    s.push_column("abs_r", r.iter().map(|v| v.abs()).collect())?;
    s.push_column("r", r)?;
    s.push_column("ln_n", vec![ln_n; s.len()])?;
    s.push_column("two_ln_n", vec![2.0 * ln_n; s.len()])?;
    reorder(s, &["r", "abs_r", "ln_n", "two_ln_n"])
}

fn reorder(s: TimeSeries, order: &[&str]) -> Result<TimeSeries> {
    let mut out = TimeSeries::new(s.times().to_vec())?;
    for label in order {
        let col = s.column(label).ok_or_else(|| Error::InvalidArgument(format!("no column {label}")))?;
        out.push_column(*label, col.to_vec())?;
    }
    Ok(out)
}

/// Rows in grid order: g/Δ outer, g/ω_c inner.
pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<[f64; 5]>> {
    if args.n_delta < 2 || args.n_omega < 2 {
        return Err(Error::InvalidArgument("sweep grids need at least 2 points per axis".into()));
    }
    if args.k > 1 {
        return Err(Error::InvalidArgument(format!("--k must be 0 or 1, got {}", args.k)));
    }
    let deltas = linspace(0.01, 0.1, args.n_delta);
    let omegas = linspace(0.01, 0.99, args.n_omega);
    let points: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| omegas.iter().map(move |&o| (d, o))).collect();
    points
        .par_iter()
        .map(|&(gd, go)| {
            let sp = squeeze_params(&ModelParams::from_ratios(1.0, gd, go)?, args.k)?;
            Ok([gd, go, sp.n_k, max_squeeze_factor(&sp), sp.n_k.ln()])
        })
        .collect()
}

fn sweep_csv(args: &SweepArgs) -> Result<String> {
    let mut out = String::from("g_over_delta,g_over_omega,n_k,r_max,ln_n\n");
    for row in sweep_rows(args)? {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// `x_analytic` from the branch closed form and `x_numeric` from exact
/// evolution under the dispersive Hamiltonian, spin in `(|↑⟩ + |↓⟩)/√2`.
pub fn revival_series(args: &RevivalArgs) -> Result<TimeSeries> {
    check_samples(args.samples)?;
    let params = ModelParams::new(args.omega_c, args.omega_c + args.delta, args.g, 0.0)?;
    let t_rev = revival_period(&params)?;
    let t_end = match args.tmax {
        Some(t) if t > 0.0 => t / args.g,
        Some(_) => return Err(Error::InvalidArgument("--tmax must be positive".into())),
        None => 1.5 * t_rev,
    };
    let grid = linspace(0.0, t_end, args.samples);
    let alpha = C64::new(args.alpha, 0.0);
    let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let branches = [squeeze_params(&params, 0)?, squeeze_params(&params, 1)?];
    let analytic = grid.iter().map(|&t| mean_position_with(&branches, alpha, c, c, t)).collect::<Result<Vec<_>>>()?;

    let space = SpaceSpec::new(args.n_cut.unwrap_or_else(|| default_cutoff(args.alpha.abs())))?;
    let psi = coherent_state(space, alpha, [c, c])?;
    let h = dispersive_hamiltonian(&params, space)?;
    let ops = build_operators(space);
    let ev = evolve(&psi, &h, &grid, &[Observable::expect("x", ops.x)])?;

    let mut s = TimeSeries::new(grid.iter().map(|t| t * args.g).collect())?;
    s.push_column("x_analytic", analytic)?;
    s.push_column("x_numeric", ev.series.column("x").unwrap().to_vec())?;
    Ok(s)
}

/// Resonant `|↑, 0⟩` start, `ω_c = ω_s = 1`.
pub fn rabi_series(args: &RabiArgs) -> Result<TimeSeries> {
    check_samples(args.samples)?;
    if !(args.periods > 0.0) {
        return Err(Error::InvalidArgument("--periods must be positive".into()));
    }
    let params = ModelParams::new(1.0, 1.0, args.g_over_omega, 0.0)?;
    if params.g == 0.0 {
        return Err(Error::InvalidArgument("--g-over-omega must be positive".into()));
    }
    let space = SpaceSpec::new(args.n_cut)?;
    let psi = QuantumState::basis(space, 0, Spin::Up)?;
    let t_max = args.periods * std::f64::consts::PI / params.g;
    let mut s = rwa_comparison(&params, &psi, t_max, args.samples)?;
    s.scale_times(params.g);
    Ok(s)
}

pub fn protocol_series(args: &ProtocolArgs) -> Result<TimeSeries> {
    if !(args.delta > 0.0) {
        return Err(Error::InvalidArgument("--delta must be positive".into()));
    }
    let g = args.g_over_delta * args.delta;
    let params = ModelParams::new(args.omega_c, args.omega_c + args.delta, g, 0.0)?;
    let schedule = SwitchSchedule::new(args.half_period / args.delta, args.cycles)?;
    let space = SpaceSpec::new(args.n_cut.unwrap_or_else(|| default_cutoff(args.alpha.abs())))?;
    let psi = coherent_state(space, C64::new(args.alpha, 0.0), [C64::new(0.0, 0.0), C64::new(1.0, 0.0)])?;
    let mut s = simulate_switching(&params, &schedule, &psi, args.samples_per_segment)?;
    s.scale_times(g);
    Ok(s)
}

fn protocol_csv(args: &ProtocolArgs) -> Result<String> {
    let s = protocol_series(args)?;
    let labels = ["segment", "model", "sz", "n", "x", "shift"];
    let cols: Vec<&[f64]> = labels.iter().map(|l| s.column(l).unwrap()).collect();
    let mut out = String::from("t_g,segment,model,sz,n,x,shift\n");
    for (i, t) in s.times().iter().enumerate() {
        let model = if cols[1][i] == 0.0 { "jc" } else { "anti_jc" };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(*t),
            cols[0][i] as usize,
            model,
            num(cols[2][i]),
            num(cols[3][i]),
            num(cols[4][i]),
            num(cols[5][i])
        );
    }
    Ok(out)
}

/// Moments against `g t` (or `κ t`), g = 1.
pub fn damp_series(args: &DampArgs) -> Result<TimeSeries> {
    check_samples(args.samples)?;
    let p = DampingParams::new(args.kappa_over_g, 1.0, args.nth, 0.0)?;
    let scale = match args.time_scale {
        TimeScale::G => 1.0,
        TimeScale::Kappa => {
            if p.kappa == 0.0 {
                return Err(Error::InvalidArgument("--time-scale kappa needs kappa > 0".into()));
            }
            p.kappa
        }
    };
    if !(args.tmax > 0.0) {
        return Err(Error::InvalidArgument("--tmax must be positive".into()));
    }
    let initial = match args.initial {
        InitialArg::Spin => LangevinState::spin_excited(args.nth),
        InitialArg::Namr => LangevinState::resonator_excited(args.nth),
    };
    let grid = linspace(0.0, args.tmax / scale, args.samples);
    let mut s = integrate(&initial, &p, &grid, args.tol)?;
    if let Some(t) = unphysical_spin_time(&s) {
        log::warn!("<S_z> leaves [-1/2, 1/2] at g t = {t:.6}; the closed moment equations are unphysical there");
    }
    s.scale_times(scale);
    Ok(s)
}
