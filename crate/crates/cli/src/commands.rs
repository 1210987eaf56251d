//! Subcommands. Each writes a human-readable summary to `out` and returns
//! the error that decides the exit code.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tribody::action::BoundaryMode;
use tribody::bounds::*;
use tribody::dynamics::{
    energy, integrate, shoot_henon, trajectory_action, IntegrateOptions, ShootingOptions, ShootingProblem, Termination,
};
use tribody::minimize::{first_variation_report, minimize_free, MinimizeConfig, Seed};
use tribody::states::{broucke_henon_t0, broucke_henon_rounded, schubart_t1};
use tribody::symmetry::{
    extend_antisymmetric, extend_henon, verify_d2, ExtendOptions, PeriodicOrbit, Provenance, Quarter,
};
use tribody::PhaseState;

use crate::error::CliError;
use crate::file::TrajectoryFile;

#[derive(Debug, Parser)]
#[command(name = "tribody", version, about = "Periodic orbits of the equal-mass planar three-body problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form action bounds next to their reference values.
    Bounds,
    /// Minimize the discrete action over a boundary family.
    Minimize(MinimizeArgs),
    /// Integrate the equations of motion from a named state or a file.
    Integrate(IntegrateArgs),
    /// Refine a collinear-start state by shooting to the isosceles end.
    Shoot(ShootArgs),
    /// Extend a quarter on [0, 1] to a full period.
    Extend(ExtendArgs),
    /// Check periodicity, energy and D2 symmetry of a full-period file.
    Verify(VerifyArgs),
    /// Write a trajectory file as CSV.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "qs1-qe1")]
    Qs1Qe1,
    #[value(name = "qs3-qe3")]
    Qs3Qe3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedKind {
    Testpath,
    Lagrange,
    File,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Number of segments.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Use the graded grid t_k = (k/N)^exponent.
    #[arg(long)]
    pub graded: bool,
    #[arg(long, default_value_t = 1.5)]
    pub exponent: f64,
    #[arg(long, value_enum, default_value = "testpath")]
    pub seed: SeedKind,
    /// Path file used with `--seed file`.
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// Number of coarser grids solved first.
    #[arg(long, default_value_t = 3)]
    pub continuation: usize,
    #[arg(long, default_value_t = 50_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub gradient_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedState {
    /// Published t = 0 data of the Broucke-Henon orbit.
    BrouckeHenon,
    /// The same data rounded to two decimals.
    BrouckeHenonRounded,
    /// Published t = 1 data of the Schubart orbit, velocities reversed so
    /// that backward integration reaches the collision at t = 0.
    SchubartT1,
}

impl NamedState {
    fn state(self) -> PhaseState {
        match self {
            Self::BrouckeHenon => broucke_henon_t0(),
            Self::BrouckeHenonRounded => broucke_henon_rounded(),
            Self::SchubartT1 => schubart_t1().time_reversed(),
        }
    }
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, value_enum, conflicts_with = "input")]
    pub state: Option<NamedState>,
    /// Start from the first sample of this file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Final time (may lie before the start time).
    #[arg(long = "t")]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub r_event: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[arg(long, value_enum, conflicts_with = "input")]
    pub state: Option<NamedState>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Writes the refined quarter on [0, 1].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtendMode {
    Henon,
    Antisymmetric,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long, value_enum)]
    pub mode: ExtendMode,
    #[arg(long)]
    pub input: PathBuf,
    /// Largest accepted boundary residual of the quarter.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Jacobi coordinates with the angle between them.
    #[arg(long)]
    pub jacobi: bool,
}

type Out<'a> = &'a mut dyn Write;

fn say(out: Out, s: String) -> Result<(), CliError> {
    writeln!(out, "{s}").map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
}

pub fn run(cli: Cli, out: Out) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds => cmd_bounds(out),
        Command::Minimize(a) => cmd_minimize(&a, out),
        Command::Integrate(a) => cmd_integrate(&a, out),
        Command::Shoot(a) => cmd_shoot(&a, out),
        Command::Extend(a) => cmd_extend(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Export(a) => cmd_export(&a, out),
    }
}

pub fn cmd_bounds(out: Out) -> Result<(), CliError> {
    let tp = test_path_action();
    let rows = [
        ("kepler bound, collinear total collision", "7.4672", collinear_collision_bound()),
        ("kepler bound, triangle total collision", "6.6927", triangle_collision_bound()),
        ("total-collision bound", "6.6927", total_collision_bound()),
        ("lagrange quarter action", "4.21617", lagrange_quarter_action()),
        ("lagrange full action", "16.8647", lagrange_full_action()),
        ("test path A1", "<= 1.5100", tp.a1),
        ("test path A2", "2.0281", tp.a2),
        ("test path total", "<= 3.5383", tp.total),
    ];
    say(out, format!("{:<42} {:>12} {:>12}", "quantity", "reference", "computed"))?;
    for (name, reference, value) in rows {
        say(out, format!("{name:<42} {reference:>12} {value:>12.6}"))?;
    }
    say(
        out,
        format!(
            "total-collision bound < test-path total: {}",
            total_collision_bound() < tp.total
        ),
    )?;
    say(out, format!("test-path total < 3.5383: {}", tp.total < 3.5383))
}

pub fn cmd_minimize(a: &MinimizeArgs, out: Out) -> Result<(), CliError> {
    let family = match a.family {
        Family::Qs1Qe1 => BoundaryMode::Qs1Qe1,
        Family::Qs3Qe3 => BoundaryMode::Qs3Qe3,
    };
    let seed = match a.seed {
        SeedKind::Testpath => Seed::CollinearTestPath,
        SeedKind::Lagrange => Seed::LagrangeQuarter,
        SeedKind::File => {
            let p = a
                .seed_file
                .as_ref()
                .ok_or_else(|| CliError::Validation("--seed file needs --seed-file".into()))?;
            Seed::Path(TrajectoryFile::read(p)?.path()?)
        }
    };
    let mut cfg = MinimizeConfig::new(family, seed, a.grid);
    cfg.grading = if a.graded { a.exponent } else { 1.0 };
    cfg.continuation_levels = a.continuation;
    cfg.solver.max_iterations = a.max_iterations;
    cfg.solver.gradient_tol = a.gradient_tol;
    let r = minimize_free(&cfg)?;

    say(out, format!("action {:.10}", r.action.total))?;
    say(out, format!("kinetic {:.10}  potential {:.10}", r.action.kinetic, r.action.potential))?;
    let (sn, en) = match family {
        BoundaryMode::Qs1Qe1 => (["a1", "a2"], ["b1", "b2"]),
        _ => (["a1", "c1"], ["b1", "b2"]),
    };
    for (n, v) in sn.iter().zip(&r.start_params).chain(en.iter().zip(&r.end_params)) {
        say(out, format!("{n} {v:.10}"))?;
    }
    say(
        out,
        format!(
            "gradient {:.3e}  iterations {}  termination {:?}",
            r.gradient_norm, r.iterations, r.termination
        ),
    )?;
    let min_dist = r.path.nodes().iter().map(|c| c.min_distance().0).fold(f64::INFINITY, f64::min);
    say(
        out,
        format!(
            "min pairwise distance {min_dist:.6e}  at Gauss points {:.6e}",
            r.min_gauss_distance
        ),
    )?;
    for res in first_variation_report(&r).residuals {
        say(out, format!("first variation {} = {:.3e}", res.name, res.value))?;
    }

    if let Some(path) = &a.out {
        let mut f = TrajectoryFile::from_path(&r.path, "minimize");
        let m = &mut f.metadata;
        m.actions.insert("total".into(), r.action.total);
        m.actions.insert("kinetic".into(), r.action.kinetic);
        m.actions.insert("potential".into(), r.action.potential);
        m.tolerances.insert("gradient".into(), a.gradient_tol);
        for (n, v) in sn.iter().zip(&r.start_params).chain(en.iter().zip(&r.end_params)) {
            m.values.insert(n.to_string(), *v);
        }
        f.write(path)?;
    }
    Ok(())
}

fn initial_state(state: Option<NamedState>, input: &Option<PathBuf>) -> Result<PhaseState, CliError> {
    match (state, input) {
        (Some(s), _) => Ok(s.state()),
        (None, Some(p)) => Ok(TrajectoryFile::read(p)?.states()?[0]),
        (None, None) => Err(CliError::Validation("give --state or --input".into())),
    }
}

pub fn cmd_integrate(a: &IntegrateArgs, out: Out) -> Result<(), CliError> {
    let s0 = initial_state(a.state, &a.input)?;
    let opts = IntegrateOptions {
        tol: a.tol,
        r_event: a.r_event,
        ..IntegrateOptions::default()
    };
    let tr = integrate(&s0, a.t_end, &opts)?;
    let end = tr.terminal();
    say(out, format!("steps {}  t in [{:.10}, {:.10}]", tr.steps().len(), tr.t_min(), tr.t_max()))?;
    match tr.termination {
        Termination::Completed => say(out, "termination completed".into())?,
        Termination::Collision { i, j, distance } => say(
            out,
            format!("termination collision of bodies {} and {} at distance {distance:.3e}, t = {:.10}", i + 1, j + 1, end.time),
        )?,
    }
    let action = trajectory_action(&tr, tr.t_min(), tr.t_max())?;
    say(out, format!("action {action:.10}"))?;
    let c = tr.conservation();
    say(
        out,
        format!(
            "drift energy {:.3e}  momentum {:.3e}  angular momentum {:.3e}",
            c.energy, c.momentum, c.angular_momentum
        ),
    )?;
    if (end.time - s0.time).abs() >= 4.0 - 1e-12 && tr.termination == Termination::Completed {
        let at = s0.time + 4.0 * (end.time - s0.time).signum();
        let ret = tr.state_at(at)?.max_deviation(&s0.at_time(at));
        say(out, format!("period-return deviation {ret:.6e}"))?;
    }
    if let Some(path) = &a.out {
        let mut f = TrajectoryFile::from_states(tr.states(), "integrate");
        f.metadata.tolerances.insert("integrator".into(), a.tol);
        f.metadata.tolerances.insert("r_event".into(), a.r_event);
        f.metadata.actions.insert("integrated".into(), action);
        f.write(path)?;
    }
    Ok(())
}

pub fn cmd_shoot(a: &ShootArgs, out: Out) -> Result<(), CliError> {
    let s0 = match &a.input {
        Some(_) => initial_state(None, &a.input)?,
        None => a.state.unwrap_or(NamedState::BrouckeHenonRounded).state(),
    };
    let opts = ShootingOptions::default();
    let sol = shoot_henon(&ShootingProblem::from_state(&s0), a.tol, &opts)?;
    let p = sol.problem;
    say(out, format!("iterations {}  residual {:.3e}", sol.iterations, sol.residual))?;
    say(out, format!("x1 {:.10}  x2 {:.10}  v1y {:.10}  v2y {:.10}", p.x1, p.x2, p.v1y, p.v2y))?;
    let tr = integrate(&sol.state, 1.0, &opts.integrator)?;
    let action = trajectory_action(&tr, 0.0, 1.0)?;
    say(out, format!("quarter action {action:.10}  energy {:.10}", energy(&sol.state)))?;
    if let Some(path) = &a.out {
        let mut f = TrajectoryFile::from_states(tr.states(), "shoot");
        f.metadata.tolerances.insert("shooting".into(), a.tol);
        f.metadata.tolerances.insert("integrator".into(), opts.integrator.tol);
        f.metadata.actions.insert("quarter".into(), action);
        f.write(path)?;
    }
    Ok(())
}

fn quarter_of(f: &TrajectoryFile) -> Result<Quarter, CliError> {
    let q = match f.velocities {
        Some(_) => Quarter::new(f.states()?),
        None => Quarter::from_path(&f.path()?),
    };
    q.map_err(|e| CliError::Validation(e.to_string()))
}

pub fn cmd_extend(a: &ExtendArgs, out: Out) -> Result<(), CliError> {
    let f = TrajectoryFile::read(&a.input)?;
    let q = quarter_of(&f)?;
    let opts = ExtendOptions {
        tol: a.tol,
        ..ExtendOptions::default()
    };
    let (o, name) = match a.mode {
        ExtendMode::Henon => (extend_henon(&q, &opts)?, "henon"),
        ExtendMode::Antisymmetric => (extend_antisymmetric(&q, &opts)?, "antisymmetric"),
    };
    say(out, format!("samples {}", o.states().len()))?;
    for j in &o.junctions {
        say(out, format!("junction t = {} jump {:.3e}", j.time, j.jump))?;
    }
    say(out, format!("periodicity {:.3e}  energy spread {:.3e}", o.periodicity_error(), o.energy_spread()))?;
    if let Some(path) = &a.out {
        let mut g = TrajectoryFile::from_states(o.states(), "extend");
        g.metadata.provenance = Some(name.into());
        g.metadata.tolerances.insert("junction".into(), a.tol);
        g.metadata.actions = f.metadata.actions.clone();
        g.write(path)?;
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs, out: Out) -> Result<(), CliError> {
    let f = TrajectoryFile::read(&a.input)?;
    let states = f.states()?;
    let provenance = match f.metadata.provenance.as_deref() {
        Some("henon") => Provenance::Henon,
        Some("antisymmetric") => Provenance::Antisymmetric,
        _ => Provenance::Integrated,
    };
    let o = PeriodicOrbit::from_samples(states, provenance).map_err(|e| CliError::Validation(e.to_string()))?;
    let periodic = o.periodicity_error();
    let spread = o.energy_spread();
    let d2 = verify_d2(&o, a.tol);
    let mut failures = Vec::new();
    let mut line = |name: &str, value: f64, ok: bool, out: Out| -> Result<(), CliError> {
        if !ok {
            failures.push(name.to_string());
        }
        say(out, format!("{} {name} {value:.3e}", if ok { "PASS" } else { "FAIL" }))
    };
    line("periodicity", periodic, periodic <= a.tol, out)?;
    line("energy spread", spread, spread <= a.tol, out)?;
    line(
        "time reflection",
        d2.time_reflection.max_deviation,
        d2.time_reflection.max_deviation <= a.tol,
        out,
    )?;
    line(
        "half period",
        d2.half_period.max_deviation,
        d2.half_period.max_deviation <= a.tol,
        out,
    )?;
    if !d2.passed {
        say(
            out,
            format!(
                "worst time reflection at t = {:.6} (body {}), worst half period at t = {:.6} (body {})",
                d2.time_reflection.at_time,
                d2.time_reflection.body + 1,
                d2.half_period.at_time,
                d2.half_period.body + 1
            ),
        )?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("failed: {}", failures.join(", "))))
    }
}

pub fn cmd_export(a: &ExportArgs, out: Out) -> Result<(), CliError> {
    let f = TrajectoryFile::read(&a.input)?;
    let mut buf = Vec::new();
    let res = if a.jacobi {
        f.write_jacobi_csv(&mut buf)
    } else {
        f.write_csv(&mut buf)
    };
    res.map_err(|e| CliError::io(&a.input, e))?;
    match &a.out {
        Some(p) => std::fs::write(p, buf).map_err(|e| CliError::io(p, e)),
        None => out.write_all(&buf).map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e)),
    }
}
