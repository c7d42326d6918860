//! Command-line surface: every subcommand reads a TOML config and writes
//! its outputs under `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::convergence::{fit_to_ground_state, sequential_convergence_experiment};
use crate::diagnostics::{conserved_quantities, snapshot_record, virial_check, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::evolve::{run_evolution_sampled, Stepper, Trajectory};
use crate::field::{mass, ComplexField, C64};
use crate::ground_state::{pohozaev_report, solve_ground_state, GroundState};
use crate::io::{
    ground_state_for, initial_field, parse_config_with, read_diagnostics, write_diagnostics, write_snapshot,
    write_snapshot_kind, write_table, Preset, RunConfig, SnapshotKind, TransformKind,
};
use crate::morawetz::{build_weights, interaction_morawetz, morawetz_terms};
use crate::symmetry::{apply_group, galilean_boost, pseudoconformal, GroupElement};

#[derive(Debug, Parser)]
#[command(name = "nlslab", version, about = "Mass-critical NLS experiments on periodic boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted `key=value` override applied before validation.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the ground state and write it with a certification report.
    GroundState(Common),
    /// Evolve the preset and write snapshots and diagnostics.
    Evolve(Common),
    /// Apply the configured symmetry transform to the preset.
    Transform(Common),
    /// Compare finite differences of the Morawetz functional with its bulk terms.
    MorawetzCheck(Common),
    /// Compare the variance second difference with 16 E(u0).
    VirialCheck(Common),
    /// Fit symmetry parameters that bring the preset closest to the ground state.
    Fit(Common),
    /// Fit the evolving preset to the ground state at every sample time.
    ConvergeDemo(Common),
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 1 on usage or validation errors, 2 on runtime errors.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Context> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let cfg = parse_config_with(&text, &common.overrides)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("nlslab-out"));
    fs::create_dir_all(&out)?;
    Ok(Context { cfg, out })
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GroundState(c) => ground_state_cmd(&load(&c)?),
        Command::Evolve(c) => evolve_cmd(&load(&c)?),
        Command::Transform(c) => transform_cmd(&load(&c)?),
        Command::MorawetzCheck(c) => morawetz_cmd(&load(&c)?),
        Command::VirialCheck(c) => virial_cmd(&load(&c)?),
        Command::Fit(c) => fit_cmd(&load(&c)?),
        Command::ConvergeDemo(c) => converge_cmd(&load(&c)?),
    }
}

fn solve_q(ctx: &Context) -> Result<GroundState> {
    solve_ground_state(ctx.cfg.grid, ctx.cfg.ground_state_tol)
}

fn ground_state_cmd(ctx: &Context) -> Result<()> {
    let q = solve_q(ctx)?;
    write_snapshot_kind(&q.field, SnapshotKind::GroundState, ctx.out.join("ground_state.nls"))?;
    let p = pohozaev_report(&q);
    let report = format!(
        "dimension = {}\nn = {}\nL = {}\niterations = {}\nresidual = {:e}\nmass = {:.16e}\n\
         grad_sq = {:.16e}\nenergy = {:.16e}\npohozaev_grad_ratio = {:.16e}\npeak = {:.16e}\n",
        q.grid().dim(),
        q.grid().n(),
        q.grid().half_width(),
        q.iterations,
        q.residual,
        q.mass,
        q.grad_sq,
        q.energy,
        p.grad_ratio,
        q.peak()
    );
    fs::write(ctx.out.join("ground_state_report.toml"), report)?;
    info!("ground state: mass {:.12} residual {:.3e}", q.mass, q.residual);
    Ok(())
}

fn initial(ctx: &Context) -> Result<(ComplexField, Option<GroundState>)> {
    let q = ground_state_for(&ctx.cfg)?;
    let f = initial_field(&ctx.cfg, q.as_ref())?;
    Ok((f, q))
}

fn sample_name(i: usize) -> String {
    format!("snapshot_{i:04}.nls")
}

/// Splices `new` onto the rows of an existing diagnostics file that end
/// before the new run starts.
fn spliced(path: &Path, new: &[DiagnosticRecord]) -> Result<Vec<DiagnosticRecord>> {
    let start = new.first().map_or(f64::INFINITY, |r| r.t);
    let mut out: Vec<DiagnosticRecord> = if path.is_file() {
        read_diagnostics(path)?.into_iter().filter(|r| r.t < start).collect()
    } else {
        Vec::new()
    };
    out.extend_from_slice(new);
    Ok(out)
}

fn evolve_cmd(ctx: &Context) -> Result<()> {
    let (u0, q) = initial(ctx)?;
    let traj = run_evolution_sampled(&u0, &ctx.cfg.evolution, q.as_ref(), &ctx.cfg.sample_times)?;
    for (i, f) in traj.samples.iter().enumerate() {
        write_snapshot(f, ctx.out.join(sample_name(i)))?;
    }
    write_snapshot(&traj.final_state, ctx.out.join("final.nls"))?;
    let csv = ctx.out.join("diagnostics.csv");
    let records = if matches!(ctx.cfg.preset, Preset::File(_)) {
        spliced(&csv, &traj.records)?
    } else {
        traj.records.clone()
    };
    write_diagnostics(&records, traj.dim, &csv)?;
    write_summary(ctx, &traj)?;
    Ok(())
}

fn write_summary(ctx: &Context, traj: &Trajectory) -> Result<()> {
    let text = format!(
        "termination = \"{}\"\nsteps = {}\nt_final = {:.16e}\nrecords = {}\n",
        traj.termination.as_str(),
        traj.steps,
        traj.final_state.time(),
        traj.records.len()
    );
    fs::write(ctx.out.join("summary.toml"), text)?;
    Ok(())
}

fn transform_cmd(ctx: &Context) -> Result<()> {
    let (f, _) = initial(ctx)?;
    let d = ctx.cfg.grid.dim();
    let tr = &ctx.cfg.transform;
    let out = match tr.kind {
        TransformKind::Group => {
            let g = GroupElement::new(tr.lambda, &tr.x0_or_zero(d), &tr.xi0_or_zero(d), tr.gamma)?;
            apply_group(&g, &f)?
        }
        TransformKind::Galilean => galilean_boost(&f.clone().with_time(tr.t), &tr.xi0_or_zero(d), tr.t)?,
        TransformKind::Pseudoconformal => {
            if tr.t == 0.0 {
                return Err(Error::Config("transform.t: pseudoconformal time must be nonzero".into()));
            }
            pseudoconformal(&f.clone().with_time(1.0 / tr.t), tr.t)?
        }
    };
    write_snapshot(&out, ctx.out.join("transformed.nls"))?;
    let c0 = conserved_quantities(&f, ctx.cfg.mu);
    let c1 = conserved_quantities(&out, ctx.cfg.mu);
    fs::write(
        ctx.out.join("transform_report.toml"),
        format!("mass_in = {:.16e}\nmass_out = {:.16e}\n", c0.mass, c1.mass),
    )?;
    Ok(())
}

/// Finite-difference step of the Morawetz check and its Strang substep.
const FD_DELTA: f64 = 0.01;
const FD_SUBSTEP: f64 = 1e-3;

fn morawetz_cmd(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    if let Some(t) = cfg.cutoff {
        return Err(Error::Unsupported(format!(
            "the Morawetz check compares against the uncut bulk terms; remove cutoff = {t}"
        )));
    }
    let (u0, _) = initial(ctx)?;
    let grid = cfg.grid;
    let radius = cfg
        .morawetz_radius
        .unwrap_or_else(|| (4.0 * grid.spacing()).max(grid.half_width() / 16.0));
    let w = build_weights(radius, &grid)?;
    let times: Vec<f64> = if cfg.sample_times.is_empty() {
        (0..=10).map(|i| u0.time() + cfg.evolution.t_end * i as f64 / 10.0).collect()
    } else {
        cfg.sample_times.clone()
    };
    let mut stepper = Stepper::new(grid, cfg.mu);
    let mut state = u0.clone();
    let steps_fd = (FD_DELTA / FD_SUBSTEP).round() as usize;
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        if t < state.time() {
            return Err(Error::Config("sample_times: must not precede the initial time".into()));
        }
        let gap = t - state.time();
        if gap > 0.0 {
            state = stepper.advance(&state, gap, FD_SUBSTEP);
        }
        let mut fwd = state.clone();
        let mut bwd = state.clone();
        for _ in 0..steps_fd {
            fwd = stepper.step(&fwd, FD_SUBSTEP);
            bwd = stepper.step(&bwd, -FD_SUBSTEP);
        }
        let fd = (interaction_morawetz(&fwd, &w, None)? - interaction_morawetz(&bwd, &w, None)?) / (2.0 * FD_DELTA);
        let m = interaction_morawetz(&state, &w, None)?;
        let terms = morawetz_terms(&state, &w, cfg.mu)?;
        let rel = (fd - terms.total()).abs() / terms.scale();
        info!("t = {t:.4}: dM/dt {fd:.8e} rhs {:.8e} relative {rel:.2e}", terms.total());
        if terms.gradient_angular < 0.0 {
            warn!("angular gradient block is negative at t = {t}: {}", terms.gradient_angular);
        }
        rows.push(vec![
            t,
            m,
            fd,
            terms.total(),
            terms.gradient_radial,
            terms.gradient_angular,
            terms.momentum_pair,
            terms.mass,
            terms.nonlinear,
            rel,
        ]);
    }
    write_table(
        ctx.out.join("morawetz.csv"),
        "# nlslab morawetz check v1",
        &[
            "t",
            "functional",
            "fd_derivative",
            "rhs",
            "gradient_radial",
            "gradient_angular",
            "momentum_pair",
            "mass",
            "nonlinear",
            "relative_error",
        ],
        &rows,
    )
}

fn virial_cmd(ctx: &Context) -> Result<()> {
    let (u0, _) = initial(ctx)?;
    let traj = run_evolution_sampled(&u0, &ctx.cfg.evolution, None, &[])?;
    write_diagnostics(&traj.records, traj.dim, ctx.out.join("diagnostics.csv"))?;
    let report = virial_check(&traj)?;
    let rows: Vec<Vec<f64>> = report
        .second_differences
        .iter()
        .map(|(t, v)| vec![*t, *v, report.target])
        .collect();
    write_table(
        ctx.out.join("virial.csv"),
        "# nlslab virial check v1",
        &["t", "variance_second_difference", "sixteen_energy"],
        &rows,
    )?;
    info!("virial: max relative error {:.3e}", report.max_rel_error);
    Ok(())
}

fn fit_record(f: &ComplexField, mu: f64, g: &GroupElement, distance: f64) -> DiagnosticRecord {
    let mut r = snapshot_record(f, mu);
    r.lambda = Some(g.lambda);
    r.x_center = Some(g.x0().to_vec());
    r.xi = Some(g.xi0().to_vec());
    r.gamma = Some(g.gamma);
    r.fit_distance = Some(distance);
    r
}

fn fit_cmd(ctx: &Context) -> Result<()> {
    let (f, q) = initial(ctx)?;
    let q = match q {
        Some(q) => q,
        None => solve_q(ctx)?,
    };
    let fit = fit_to_ground_state(&f, &q)?;
    let rec = fit_record(&f, ctx.cfg.mu, &fit.g, fit.distance);
    write_diagnostics(&[rec], f.grid().dim(), ctx.out.join("diagnostics.csv"))?;
    info!("fit: distance {:.6e} after {} evaluations", fit.distance, fit.iterations);
    Ok(())
}

fn converge_cmd(ctx: &Context) -> Result<()> {
    let (f, q) = initial(ctx)?;
    let q = match q {
        Some(q) => q,
        None => solve_q(ctx)?,
    };
    let u0 = f.scaled(C64::new((mass(&q.field) / mass(&f)).sqrt(), 0.0));
    let times = if ctx.cfg.sample_times.is_empty() {
        vec![u0.time(), u0.time() + ctx.cfg.evolution.t_end]
    } else {
        ctx.cfg.sample_times.clone()
    };
    let samples = sequential_convergence_experiment(&u0, &ctx.cfg.evolution, &q, &times)?;
    let d = u0.grid().dim();
    let mut rows = Vec::with_capacity(samples.len());
    for s in &samples {
        let mut row = vec![s.t, s.fit.distance, s.running_inf, s.fit.g.lambda];
        row.extend_from_slice(s.fit.g.x0());
        row.extend_from_slice(s.fit.g.xi0());
        row.extend([s.fit.g.gamma, s.fit.iterations as f64, if s.fit.converged { 1.0 } else { 0.0 }]);
        rows.push(row);
    }
    let mut header: Vec<String> = ["t", "distance", "running_inf", "lambda"].iter().map(|s| s.to_string()).collect();
    header.extend((0..d).map(|a| format!("x_center_{a}")));
    header.extend((0..d).map(|a| format!("xi_{a}")));
    header.extend(["gamma", "evaluations", "converged"].iter().map(|s| s.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(ctx.out.join("convergence.csv"), "# nlslab convergence v1", &header, &rows)
}
