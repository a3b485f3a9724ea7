//! The `tomo` command line: every subcommand reads and writes `TOMO1` containers
//! and echoes its effective configuration into the output metadata.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tomo_core::{
    marginal_with_tolerance, AxisGrid, AxisKind, Error, OpticalTomogram1, OpticalTomogram2, Result, Tolerances,
    Which,
};
use tomo_evolution::{
    evolve, marginal_consistency_report, EvolutionConfig, OracleSet, PolynomialPotential, QuantumState, Scheme,
    ThetaDerivative,
};
use tomo_hybrid::{
    compose_entangled, compose_mixture, compose_product, covariance, toy_entanglement_bounds, Branch, HybridSpec,
};
use tomo_states::{make_density_matrix, make_phase_space, make_tomogram, make_wavefunction, StateSpec};
use tomo_transforms::{
    classify2, classify_with, radon_forward, radon_forward2, reconstruct_density_matrix2,
    reconstruct_density_matrix_with, reconstruct_phase_space, reconstruct_phase_space2, Apodization, BridgeSpec,
    ClassifyOptions, Diagnostics, RampFilterSpec,
};

use crate::container::{
    decode, evolution_tolerances, recorded_tolerances, tolerance_metadata, write_quarantined, Container, Loaded,
    Object,
};
use crate::export;

#[derive(Debug, Parser)]
#[command(name = "tomo", version, about = "Tomographic classical, quantum and hybrid states")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Tolerance overrides; unset values come from the input file's metadata or the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct TolArgs {
    /// Allowed per-angle deviation of the normalization integral from one [default: 1e-8]
    #[arg(long, global = true)]
    pub tol_norm: Option<f64>,
    /// Negative slack for tomogram values relative to the maximum [default: 1e-9]
    #[arg(long, global = true)]
    pub tol_grid_rel: Option<f64>,
    /// Negative slack for phase-space densities relative to the maximum [default: 1e-6]
    #[arg(long, global = true)]
    pub tol_classical_rel: Option<f64>,
    /// Negative slack for density-matrix eigenvalues relative to the largest [default: 1e-6]
    #[arg(long, global = true)]
    pub tol_quantum_rel: Option<f64>,
    /// Allowed dependence of a marginal on the integrated-out angle [default: 1e-8]
    #[arg(long, global = true)]
    pub tol_marginal: Option<f64>,
}

impl TolArgs {
    fn over(&self, base: &Tolerances) -> Tolerances {
        Tolerances {
            norm: self.tol_norm.unwrap_or(base.norm),
            grid_rel: self.tol_grid_rel.unwrap_or(base.grid_rel),
            classical_rel: self.tol_classical_rel.unwrap_or(base.classical_rel),
            quantum_rel: self.tol_quantum_rel.unwrap_or(base.quantum_rel),
            marginal: self.tol_marginal.unwrap_or(base.marginal),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct FilterArgs {
    /// Ramp filter cutoff as a fraction of the Nyquist frequency [default: 0.9]
    #[arg(long, global = true)]
    pub filter_cutoff: Option<f64>,
    /// Ramp filter apodization: none or raised-cosine [default: raised-cosine]
    #[arg(long, global = true)]
    pub filter_apodization: Option<String>,
    /// Width of the roll-off band as a fraction of the cutoff [default: 0.5]
    #[arg(long, global = true)]
    pub filter_rolloff: Option<f64>,
}

impl FilterArgs {
    fn spec(&self) -> Result<RampFilterSpec> {
        let d = RampFilterSpec::default();
        let apodization = match &self.filter_apodization {
            Some(s) => s.parse::<Apodization>()?,
            None => d.apodization,
        };
        RampFilterSpec::new(
            self.filter_cutoff.unwrap_or(d.cutoff_fraction),
            apodization,
            self.filter_rolloff.unwrap_or(d.rolloff),
        )
    }
}

/// Quadrature and angle grid of a produced tomogram.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// The X axis covers [-w, w)
    #[arg(long, default_value_t = 8.0)]
    pub x_half_width: f64,
    #[arg(long, default_value_t = 128)]
    pub x_count: usize,
    /// Angles on [0, π)
    #[arg(long, default_value_t = 64)]
    pub theta_count: usize,
}

impl GridArgs {
    fn axes(&self) -> Result<(AxisGrid, AxisGrid)> {
        Ok((AxisGrid::centered(AxisKind::Position, self.x_half_width, self.x_count)?, AxisGrid::angles(self.theta_count)?))
    }

    fn echo(&self, e: &mut Echo) {
        e.set("x_half_width", self.x_half_width);
        e.set("x_count", self.x_count);
        e.set("theta_count", self.theta_count);
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic state fixtures
    State {
        #[command(subcommand)]
        action: StateCommand,
    },
    /// Forward and inverse transforms
    Tomo {
        #[command(subcommand)]
        action: TomoCommand,
    },
    /// Print the admissibility label: both, classical-only, quantum-only or neither
    Classify(ClassifyArgs),
    /// Two-particle hybrid tomograms
    Hybrid {
        #[command(subcommand)]
        action: HybridCommand,
    },
    /// Position covariance of a two-particle tomogram at fixed angles
    Covariance(CovarianceArgs),
    /// Two-outcome entanglement bound
    ToyBounds(ToyArgs),
    /// Time evolution of a two-particle tomogram
    Evolve(EvolveArgs),
    /// Reports on evolution runs
    Report {
        #[command(subcommand)]
        action: ReportCommand,
    },
    /// Run the invariant checks of a container; exits 4 when it is quarantined
    Check(CheckArgs),
    /// Write CSV slices and an SVG heatmap
    Plot(PlotArgs),
}

#[derive(Debug, Subcommand)]
pub enum StateCommand {
    Make(MakeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Coherent,
    Fock,
    Thermal,
    SqueezedGaussian,
    ClassicalGaussian,
    ClassicalUniformDisk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Optical1,
    PhaseSpace,
    DensityMatrix,
    Wavefunction,
}

impl Form {
    fn as_str(self) -> &'static str {
        match self {
            Form::Optical1 => "optical1",
            Form::PhaseSpace => "phase-space",
            Form::DensityMatrix => "density-matrix",
            Form::Wavefunction => "wavefunction",
        }
    }
}

#[derive(Debug, Args)]
pub struct MakeArgs {
    #[arg(long, value_enum)]
    pub kind: StateKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p0: f64,
    /// Fock number
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// Thermal mean occupancy
    #[arg(long, default_value_t = 1.0)]
    pub nbar: f64,
    #[arg(long)]
    pub sigma_q: Option<f64>,
    #[arg(long)]
    pub sigma_p: Option<f64>,
    /// Disk radius
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    /// Object to produce
    #[arg(long, value_enum, default_value_t = Form::Optical1)]
    pub form: Form,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TomoCommand {
    /// Radon transform of a phase-space density
    Forward(ForwardArgs),
    /// Filtered back-projection of a tomogram to phase space
    Invert(InvertArgs),
    /// Density matrix of a tomogram
    Rho(RhoArgs),
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Optional grid of the reconstruction; each particle uses `[-w, w)` with `count` points.
#[derive(Debug, Args)]
pub struct TargetArgs {
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

impl TargetArgs {
    fn axis(&self, kind: AxisKind, default: &AxisGrid) -> Result<AxisGrid> {
        match (self.half_width, self.count) {
            (None, None) => default.with_kind(kind),
            (w, n) => AxisGrid::centered(kind, w.unwrap_or(-default.start()), n.unwrap_or(default.len())),
        }
    }

    fn echo(&self, e: &mut Echo) {
        if let Some(w) = self.half_width {
            e.set("half_width", w);
        }
        if let Some(n) = self.count {
            e.set("count", n);
        }
    }
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Phase axes of a two-particle reconstruction [default: 32 points on [-8, 8)]
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Matrix axis [default: the tomogram's X axis, or 16 points on [-6, 6) per particle]
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Also print the floors behind the verdict
    #[arg(long)]
    pub diagnostics: bool,
}

#[derive(Debug, Subcommand)]
pub enum HybridCommand {
    /// Product, mixture or entangled-form composition of single-particle tomograms
    Compose(ComposeArgs),
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Branch `weight:first.tomo:second.tomo`; repeat for mixtures
    #[arg(long = "branch", required = true)]
    pub branches: Vec<String>,
    /// Subtracted branch of the entangled form, same syntax
    #[arg(long = "negative")]
    pub negative: Vec<String>,
    /// Entanglement parameter
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta2: f64,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    #[arg(long)]
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Particle {
    First,
    Second,
}

impl Particle {
    fn which(self) -> Which {
        match self {
            Particle::First => Which::First,
            Particle::Second => Which::Second,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Particle::First => "first",
            Particle::Second => "second",
        }
    }
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// characteristics-quadratic, spectral-rk4 or oracle-pipeline
    #[arg(long, default_value = "spectral-rk4")]
    pub scheme: String,
    /// Final time
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Potential of the first particle, e.g. "0.5*q^2 + 0.1*q^4"
    #[arg(long = "U1", default_value = "0.5*q^2")]
    pub u1: String,
    /// Potential of the second particle
    #[arg(long = "U2", default_value = "0.5*q^2")]
    pub u2: String,
    /// Particle evolved with the quantum equation
    #[arg(long, value_enum, default_value_t = Particle::First)]
    pub which_quantum: Particle,
    /// spectral or fourth-order
    #[arg(long, default_value = "spectral")]
    pub theta_derivative: String,
    /// Keep every this many steps in the trajectory
    #[arg(long)]
    pub save_every: Option<usize>,
    /// Also write the whole trajectory here
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Final snapshot
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Marginals of a trajectory against the von Neumann and Liouville oracles
    Marginals(MarginalsArgs),
}

#[derive(Debug, Args)]
pub struct MarginalsArgs {
    /// Trajectory container
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Initial quantum state: wavefunction or density-matrix container
    #[arg(long)]
    pub quantum: PathBuf,
    /// Initial classical state: phase-space-1 container
    #[arg(long)]
    pub classical: PathBuf,
    #[arg(long = "U1", default_value = "0.5*q^2")]
    pub u1: String,
    #[arg(long = "U2", default_value = "0.5*q^2")]
    pub u2: String,
    #[arg(long, value_enum, default_value_t = Particle::First)]
    pub which_quantum: Particle,
    /// Step of the oracle integrators
    #[arg(long, default_value_t = 1e-3)]
    pub oracle_dt: f64,
    /// Also write the table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(short, long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Marginal to plot for two-particle inputs
    #[arg(long, value_enum, default_value_t = Particle::First)]
    pub marginal: Particle,
    /// Writes `<prefix>.csv` and `<prefix>.svg`
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Configuration echoed into output metadata under `config.`.
struct Echo(BTreeMap<String, String>);

impl Echo {
    fn new(command: &str, tol: &Tolerances, filter: &RampFilterSpec) -> Self {
        let mut e = Echo(tolerance_metadata(tol));
        e.0.insert("provenance.tool".into(), format!("tomo {}", env!("CARGO_PKG_VERSION")));
        e.set("command", command);
        e.set("filter.cutoff_fraction", filter.cutoff_fraction);
        e.set("filter.apodization", filter.apodization.as_str());
        e.set("filter.rolloff", filter.rolloff);
        e
    }

    fn set(&mut self, key: &str, value: impl Display) {
        self.0.insert(format!("config.{key}"), value.to_string());
    }

    fn path(&mut self, key: &str, path: &Path) {
        self.set(key, path.display());
    }
}

struct Context {
    tol_args: TolArgs,
    tol: Tolerances,
    filter: RampFilterSpec,
}

impl Context {
    /// Reads a container; tolerances come from the flags, then the file, then the defaults.
    fn load(&self, path: &Path) -> Result<Loaded> {
        let c = Container::read(path)?;
        let tol = self.tol_args.over(&recorded_tolerances(&c.header.metadata, &Tolerances::DEFAULT)?);
        let loaded = decode(&c, &tol)?;
        if loaded.is_quarantined() {
            log::warn!("{} is quarantined: {}", path.display(), loaded.report.summary());
        }
        Ok(loaded)
    }

    fn echo(&self, command: &str) -> Echo {
        Echo::new(command, &self.tol, &self.filter)
    }

    fn echo_with(&self, command: &str, tol: &Tolerances) -> Echo {
        Echo::new(command, tol, &self.filter)
    }
}

/// Writes an output; objects failing their invariants are still written, flagged as quarantined.
fn save(object: &Object, echo: Echo, path: &Path, tol: &Tolerances) -> Result<()> {
    let report = write_quarantined(object, echo.0, path, tol)?;
    if !report.is_ok() {
        log::warn!("{} written quarantined: {}", path.display(), report.summary());
    }
    Ok(())
}

fn unexpected(path: &Path, object: &Object, wanted: &str) -> Error {
    Error::UnsupportedKind(format!("{} holds {}, expected {wanted}", path.display(), object.kind()))
}

fn optical1(ctx: &Context, path: &Path) -> Result<OpticalTomogram1> {
    match ctx.load(path)?.object {
        Object::Optical1(w) => Ok(w),
        other => Err(unexpected(path, &other, "optical1")),
    }
}

fn optical2(ctx: &Context, path: &Path) -> Result<OpticalTomogram2> {
    match ctx.load(path)?.object {
        Object::Optical2(w) => Ok(w),
        other => Err(unexpected(path, &other, "optical2")),
    }
}

/// Shortest decimal that agrees with `v` to twelve significant digits.
pub fn trimmed(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let r = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{r}")
}

fn potential(s: &str) -> Result<PolynomialPotential> {
    s.parse()
}

/// Runs a parsed command line, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let ctx = Context { tol: cli.tol.over(&Tolerances::DEFAULT), tol_args: cli.tol, filter: cli.filter.spec()? };
    match cli.command {
        Command::State { action: StateCommand::Make(a) } => state_make(&ctx, a),
        Command::Tomo { action: TomoCommand::Forward(a) } => tomo_forward(&ctx, a),
        Command::Tomo { action: TomoCommand::Invert(a) } => tomo_invert(&ctx, a),
        Command::Tomo { action: TomoCommand::Rho(a) } => tomo_rho(&ctx, a),
        Command::Classify(a) => classify(&ctx, a, out),
        Command::Hybrid { action: HybridCommand::Compose(a) } => hybrid_compose(&ctx, a, out),
        Command::Covariance(a) => {
            let w = optical2(&ctx, &a.input)?;
            let c = covariance(&w, a.theta1, a.theta2)?;
            writeln!(out, "covariance={}", export::number(c.value))?;
            writeln!(out, "interpolated={}", c.interpolated)?;
            Ok(())
        }
        Command::ToyBounds(a) => {
            let b = toy_entanglement_bounds(a.x, a.y, a.mu)?;
            writeln!(
                out,
                "z={} in_range={} bounds=[{},{}]",
                trimmed(b.z),
                b.in_range,
                trimmed(b.lower),
                trimmed(b.upper)
            )?;
            Ok(())
        }
        Command::Evolve(a) => run_evolve(&ctx, a, out),
        Command::Report { action: ReportCommand::Marginals(a) } => report_marginals(&ctx, a, out),
        Command::Check(a) => check(&ctx, a, out),
        Command::Plot(a) => plot(&ctx, a),
    }
}

fn state_spec(a: &MakeArgs) -> Result<StateSpec> {
    let sigmas = || match (a.sigma_q, a.sigma_p) {
        (Some(sigma_q), Some(sigma_p)) => Ok((sigma_q, sigma_p)),
        _ => Err(Error::InvalidArgument(format!("{:?} needs --sigma-q and --sigma-p", a.kind))),
    };
    let (q0, p0) = (a.q0, a.p0);
    Ok(match a.kind {
        StateKind::Coherent => StateSpec::Coherent { q0, p0 },
        StateKind::Fock => StateSpec::Fock { n: a.n },
        StateKind::Thermal => StateSpec::Thermal { nbar: a.nbar },
        StateKind::SqueezedGaussian => {
            let (sigma_q, sigma_p) = sigmas()?;
            StateSpec::SqueezedGaussian { sigma_q, sigma_p, q0, p0 }
        }
        StateKind::ClassicalGaussian => {
            let (sigma_q, sigma_p) = sigmas()?;
            StateSpec::ClassicalGaussian { sigma_q, sigma_p, q0, p0 }
        }
        StateKind::ClassicalUniformDisk => StateSpec::ClassicalUniformDisk { radius: a.radius },
    })
}

fn state_make(ctx: &Context, a: MakeArgs) -> Result<()> {
    let spec = state_spec(&a)?;
    let (x, theta) = a.grid.axes()?;
    let object = match a.form {
        Form::Optical1 => Object::Optical1(make_tomogram(&spec, &x, &theta)?),
        Form::PhaseSpace => Object::PhaseSpace(make_phase_space(&spec, &x, &x)?),
        Form::DensityMatrix => Object::DensityMatrix(make_density_matrix(&spec, &x)?),
        Form::Wavefunction => {
            let axis = x.with_kind(AxisKind::MatrixX)?;
            Object::Wavefunction { psi: make_wavefunction(&spec, &axis)?, axis }
        }
    };
    let mut e = ctx.echo("state make");
    e.set("state", spec);
    e.set("form", a.form.as_str());
    a.grid.echo(&mut e);
    save(&object, e, &a.output, &ctx.tol)
}

fn tomo_forward(ctx: &Context, a: ForwardArgs) -> Result<()> {
    let (x, theta) = a.grid.axes()?;
    let object = match ctx.load(&a.input)?.object {
        Object::PhaseSpace(f) if f.particles() == 1 => Object::Optical1(radon_forward(&f, &x, &theta)?),
        Object::PhaseSpace(f) => Object::Optical2(radon_forward2(&f, &x, &x, &theta, &theta)?),
        other => return Err(unexpected(&a.input, &other, "a phase-space density")),
    };
    let mut e = ctx.echo("tomo forward");
    e.path("input", &a.input);
    a.grid.echo(&mut e);
    save(&object, e, &a.output, &ctx.tol)
}

fn tomo_invert(ctx: &Context, a: InvertArgs) -> Result<()> {
    let f = match ctx.load(&a.input)?.object {
        Object::Optical1(w) => {
            if a.target.half_width.is_some() || a.target.count.is_some() {
                return Err(Error::InvalidArgument("single-particle inversion uses the tomogram's X axis".into()));
            }
            reconstruct_phase_space(&w, &ctx.filter)?
        }
        Object::Optical2(w) => {
            let axis = a.target.axis(AxisKind::PhaseQ, &ClassifyOptions::default().joint_phase_axis)?;
            let p = axis.with_kind(AxisKind::PhaseP)?;
            reconstruct_phase_space2(&w, &ctx.filter, [&axis, &axis], [&p, &p])?
        }
        other => return Err(unexpected(&a.input, &other, "an optical tomogram")),
    };
    let mut e = ctx.echo("tomo invert");
    e.path("input", &a.input);
    a.target.echo(&mut e);
    save(&Object::PhaseSpace(f), e, &a.output, &ctx.tol)
}

fn tomo_rho(ctx: &Context, a: RhoArgs) -> Result<()> {
    let rho = match ctx.load(&a.input)?.object {
        Object::Optical1(w) => {
            let axis = a.target.axis(AxisKind::MatrixX, w.x_axis())?;
            reconstruct_density_matrix_with(&w, &BridgeSpec::matching(&axis, ctx.filter)?)?
        }
        Object::Optical2(w) => {
            let mut bridge = ClassifyOptions::default().joint_bridge;
            bridge.filter = ctx.filter;
            if a.target.half_width.is_some() || a.target.count.is_some() {
                bridge = BridgeSpec::matching(&a.target.axis(AxisKind::MatrixX, &bridge.x_axis)?, ctx.filter)?;
            }
            reconstruct_density_matrix2(&w, [&bridge, &bridge])?
        }
        other => return Err(unexpected(&a.input, &other, "an optical tomogram")),
    };
    let mut e = ctx.echo("tomo rho");
    e.path("input", &a.input);
    a.target.echo(&mut e);
    save(&Object::DensityMatrix(rho), e, &a.output, &ctx.tol)
}

fn write_diagnostics(out: &mut dyn Write, prefix: &str, d: &Diagnostics) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or("none".to_string(), export::number);
    writeln!(out, "{prefix}label={}", d.label)?;
    writeln!(out, "{prefix}tomogram_floor={}", export::number(d.tomogram_floor))?;
    writeln!(out, "{prefix}tomogram_eps={}", export::number(d.tomogram_eps))?;
    writeln!(out, "{prefix}sign_floor={}", opt(d.sign_floor))?;
    writeln!(out, "{prefix}sign_max={}", opt(d.sign_max))?;
    writeln!(out, "{prefix}eigen_floor={}", opt(d.eigen_floor))?;
    writeln!(out, "{prefix}eigen_max={}", opt(d.eigen_max))?;
    Ok(())
}

fn classify(ctx: &Context, a: ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = ctx.load(&a.input)?;
    let tol = ctx.tol_args.over(&recorded_tolerances(&loaded.metadata, &Tolerances::DEFAULT)?);
    let opts = ClassifyOptions { filter: ctx.filter, tol, ..ClassifyOptions::default() };
    match loaded.object {
        Object::Optical1(w) => {
            let d = classify_with(&w, &opts)?;
            writeln!(out, "{}", d.label)?;
            if a.diagnostics {
                write_diagnostics(out, "", &d)?;
            }
        }
        Object::Optical2(w) => {
            let c = classify2(&w, &opts)?;
            writeln!(out, "{}", c.label)?;
            if a.diagnostics {
                write_diagnostics(out, "joint.", &c.joint)?;
                write_diagnostics(out, "first.", &c.subsystems[0])?;
                write_diagnostics(out, "second.", &c.subsystems[1])?;
            }
        }
        other => return Err(unexpected(&a.input, &other, "an optical tomogram")),
    }
    Ok(())
}

fn branch(ctx: &Context, s: &str) -> Result<Branch> {
    let bad = || Error::InvalidArgument(format!("branch '{s}' is not weight:first:second"));
    let mut parts = s.splitn(3, ':');
    let (Some(w), Some(a), Some(b)) = (parts.next(), parts.next(), parts.next()) else { return Err(bad()) };
    let weight: f64 = w.parse().map_err(|_| bad())?;
    Ok(Branch::new(weight, optical1(ctx, Path::new(a))?, optical1(ctx, Path::new(b))?))
}

fn hybrid_compose(ctx: &Context, a: ComposeArgs, out: &mut dyn Write) -> Result<()> {
    let branches = a.branches.iter().map(|s| branch(ctx, s)).collect::<Result<Vec<_>>>()?;
    let negative = a.negative.iter().map(|s| branch(ctx, s)).collect::<Result<Vec<_>>>()?;
    let mut e = ctx.echo("hybrid compose");
    e.set("branches", a.branches.join(" "));
    e.set("negative", a.negative.join(" "));
    e.set("mu", a.mu);
    let w = if a.mu == 0.0 && negative.is_empty() {
        match &branches[..] {
            [b] if b.weight == 1.0 => compose_product(&b.first, &b.second)?,
            _ => compose_mixture(&HybridSpec::mixture(branches))?,
        }
    } else {
        let ent = compose_entangled(&HybridSpec::entangled(branches, negative, a.mu))?;
        writeln!(out, "min_value={}", export::number(ent.min_value))?;
        writeln!(out, "has_negative={}", ent.has_negative)?;
        ent.tomogram
    };
    save(&Object::Optical2(w), e, &a.output, &ctx.tol)
}

fn run_evolve(ctx: &Context, a: EvolveArgs, out: &mut dyn Write) -> Result<()> {
    let w0 = optical2(ctx, &a.input)?;
    let (u1, u2) = (potential(&a.u1)?, potential(&a.u2)?);
    let which = a.which_quantum.which();
    let (uq, uc) = match which {
        Which::First => (&u1, &u2),
        Which::Second => (&u2, &u1),
    };
    let cfg = EvolutionConfig {
        dt: a.dt,
        t_final: a.t,
        scheme: a.scheme.parse::<Scheme>()?,
        which_quantum: which,
        filter: ctx.filter,
        theta_derivative: a.theta_derivative.parse::<ThetaDerivative>()?,
        save_every: a.save_every,
    };
    let traj = evolve(&w0, uq, uc, &cfg)?;
    let tol = evolution_tolerances(&ctx.tol);
    let echo = || {
        let mut e = ctx.echo_with("evolve", &tol);
        e.path("input", &a.input);
        e.set("scheme", cfg.scheme);
        e.set("t", format!("{:?}", a.t));
        e.set("dt", format!("{:?}", a.dt));
        e.set("U1", &u1);
        e.set("U2", &u2);
        e.set("which_quantum", a.which_quantum.as_str());
        e.set("theta_derivative", cfg.theta_derivative.as_str());
        e.set("save_every", a.save_every.map_or("none".to_string(), |s| s.to_string()));
        e
    };
    let log = &traj.log;
    writeln!(out, "steps={} substeps={} h={:e}", log.steps, log.substeps, log.h)?;
    writeln!(out, "max_drift={:e} rank={}", log.max_drift, log.rank)?;
    if let Some(path) = &a.trajectory {
        save(&Object::Trajectory2(traj.clone()), echo(), path, &tol)?;
    }
    let last = traj.snapshots.last().expect("trajectory holds the initial state").clone();
    save(&Object::Optical2(last), echo(), &a.output, &tol)
}

fn report_marginals(ctx: &Context, a: MarginalsArgs, out: &mut dyn Write) -> Result<()> {
    let traj = match ctx.load(&a.trajectory)?.object {
        Object::Trajectory2(t) => t,
        other => return Err(unexpected(&a.trajectory, &other, "a two-particle trajectory")),
    };
    let quantum = match ctx.load(&a.quantum)?.object {
        Object::Wavefunction { axis, psi } => QuantumState::Pure { axis, psi },
        Object::DensityMatrix(rho) if rho.x_axes().len() == 1 => QuantumState::Mixed(rho),
        other => return Err(unexpected(&a.quantum, &other, "a single-mode wavefunction or density matrix")),
    };
    let classical = match ctx.load(&a.classical)?.object {
        Object::PhaseSpace(f) if f.particles() == 1 => f,
        other => return Err(unexpected(&a.classical, &other, "phase-space-1")),
    };
    let (u1, u2) = (potential(&a.u1)?, potential(&a.u2)?);
    let which = a.which_quantum.which();
    let (u_quantum, u_classical) = match which {
        Which::First => (u1, u2),
        Which::Second => (u2, u1),
    };
    let oracles = OracleSet { quantum, classical, u_quantum, u_classical, dt: a.oracle_dt };
    let cfg = EvolutionConfig { which_quantum: which, filter: ctx.filter, ..EvolutionConfig::default() };
    let rows = marginal_consistency_report(&traj, &oracles, &cfg)?;
    let mut table = String::from("t,quantum_linf,quantum_l1,classical_linf,classical_l1\n");
    for r in &rows {
        let cells = [r.t, r.quantum_linf, r.quantum_l1, r.classical_linf, r.classical_l1];
        table += &cells.map(export::number).join(",");
        table.push('\n');
    }
    out.write_all(table.as_bytes())?;
    if let Some(path) = &a.csv {
        fs::write(path, table)?;
    }
    Ok(())
}

fn check(ctx: &Context, a: CheckArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = ctx.load(&a.input)?;
    writeln!(out, "kind={}", loaded.object.kind())?;
    for c in &loaded.report.checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        writeln!(out, "{} value={} limit={} {verdict}", c.name, export::number(c.value), export::number(c.limit))?;
    }
    if let Some(reason) = loaded.metadata.get("quarantine.reason") {
        writeln!(out, "written_quarantined={reason}")?;
    }
    if loaded.is_quarantined() {
        writeln!(out, "status=quarantined")?;
        return Err(Error::Invariant(format!("{} is quarantined: {}", a.input.display(), loaded.report.summary())));
    }
    writeln!(out, "status=ok")?;
    Ok(())
}

fn plot(ctx: &Context, a: PlotArgs) -> Result<()> {
    let tol = ctx.tol.marginal.max(Tolerances::EVOLUTION.marginal);
    let pick = |w: &OpticalTomogram2| marginal_with_tolerance(w, a.marginal.which(), tol);
    let (csv, svg) = match ctx.load(&a.input)?.object {
        Object::Optical1(w) => (export::tomogram_csv(&w), export::tomogram_svg(&w)),
        Object::Optical2(w) => {
            let m = pick(&w)?;
            (export::tomogram_csv(&m), export::tomogram_svg(&m))
        }
        Object::Trajectory2(t) => {
            let m = pick(t.last())?;
            (export::tomogram_csv(&m), export::tomogram_svg(&m))
        }
        Object::Trajectory1(t) => (export::tomogram_csv(t.last()), export::tomogram_svg(t.last())),
        Object::PhaseSpace(f) if f.particles() == 1 => (export::phase_space_csv(&f)?, export::phase_space_svg(&f)?),
        other => return Err(unexpected(&a.input, &other, "a tomogram, trajectory or phase-space-1 density")),
    };
    fs::write(a.output.with_extension("csv"), csv)?;
    fs::write(a.output.with_extension("svg"), svg)?;
    Ok(())
}
