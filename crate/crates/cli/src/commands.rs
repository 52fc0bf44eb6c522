use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use twisting_core::dynamics::lyapunov;
use twisting_core::sim::{level_set_monitor, settling_time, simulate};
use twisting_core::tuning::{settling_estimate, validate_gains, validate_parameters};
use twisting_core::verify::run_campaign;
use twisting_core::{CampaignReportF64, CampaignSpecF64, GainsF64, Plant, StateF64, TrajectoryF64};

use crate::config::{GainSource, RunConfig};
use crate::{CliError, Command};

/// Loads the configuration for `command` and runs it, printing to `out`.
pub fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let (Command::Tune(args)
    | Command::Simulate(args)
    | Command::Verify(args)
    | Command::DemoPendulum(args)) = &command;
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    match command {
        Command::Tune(_) => cmd_tune(&cfg, out),
        Command::Simulate(_) => cmd_simulate(&cfg, out).map(|_| ()),
        Command::Verify(_) => cmd_verify(&cfg, out).map(|_| ()),
        Command::DemoPendulum(_) => cmd_demo_pendulum(&cfg, out).map(|_| ()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "did not settle".to_string(), |x| format!("{x} s"))
}

pub fn cmd_tune(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let p = cfg.params()?;
    let report = validate_parameters(&p);
    writeln!(out, "parameters")?;
    writeln!(
        out,
        "  R = {}  beta = {}  rho = {}  delta = {}  N = {}  Ts = {}",
        p.level, p.beta, p.rho, p.delta, p.disturbance_bound, p.settling_time
    )?;
    writeln!(out, "  delta lower bound = {}", report.delta_min)?;
    for v in &report.violations {
        writeln!(out, "  VIOLATION: {v}")?;
    }
    for a in &report.advisories {
        writeln!(out, "  advisory: {a}")?;
    }
    if !report.is_ok() {
        let named: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Config(named.join("; ")));
    }

    let (g, source) = cfg.gains(&p)?;
    let gr = validate_gains(&p, &g);
    writeln!(out, "gains")?;
    match source {
        GainSource::Given => writeln!(out, "  given:        mu1 = {}  mu2 = {}", g.mu1, g.mu2)?,
        GainSource::Synthesized { margin } => writeln!(
            out,
            "  synthesized (margin {margin}): mu1 = {}  mu2 = {}",
            g.mu1, g.mu2
        )?,
    }
    writeln!(
        out,
        "  mu1 bound:    {}  (margin {})",
        gr.mu1_bound, gr.mu1_margin
    )?;
    writeln!(
        out,
        "  mu2 bound:    {}  (margin {}, binding term {:?})",
        gr.mu2_bound, gr.mu2_margin, gr.mu2_binding
    )?;
    for v in &gr.violations {
        writeln!(out, "  VIOLATION: {v}")?;
    }
    if !gr.is_ok() {
        let named: Vec<String> = gr.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Verification(named.join("; ")));
    }

    let e = settling_estimate(&p, &g)?;
    writeln!(out, "settling estimate")?;
    writeln!(out, "  r1 = {}", e.r1)?;
    writeln!(out, "  r2 = {}", e.r2)?;
    writeln!(out, "  eta = {}  (< 1/beta = {})", e.eta, 1.0 / p.beta)?;
    writeln!(out, "  t2 = {}", e.t2)?;
    writeln!(
        out,
        "  t2_bound = {}  (<= Ts = {})",
        e.t2_bound, p.settling_time
    )?;
    Ok(())
}

/// Gains from the config, rejected unless they satisfy both bounds.
fn checked_gains(
    cfg: &RunConfig,
    p: &twisting_core::TuningParametersF64,
) -> Result<GainsF64, CliError> {
    let (g, _) = cfg.gains(p)?;
    let report = validate_gains(p, &g);
    if !report.is_ok() {
        let named: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Config(format!(
            "gains rejected: {}",
            named.join("; ")
        )));
    }
    Ok(g)
}

fn write_trajectory(traj: &TrajectoryF64, path: &Path) -> Result<(), CliError> {
    let file = BufWriter::new(File::create(path)?);
    traj.write_csv(file)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub csv: PathBuf,
    pub trajectory: TrajectoryF64,
    pub settle_time: Option<f64>,
    pub max_v_after_entry: Option<f64>,
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<SimulationOutcome, CliError> {
    let p = cfg.params()?;
    let g = checked_gains(cfg, &p)?;
    let profile = cfg.disturbance(p.disturbance_bound)?;
    let x0 = cfg.initial_state()?;
    let sim = cfg.sim_config(&p);
    let plant = cfg.plant()?;

    let traj = simulate(&plant, &g, &profile, x0, &sim)?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    let csv = dir.join("trajectory.csv");
    write_trajectory(&traj, &csv)?;

    let settle_time = settling_time(&traj, sim.settle_eps);
    let max_v_after_entry = level_set_monitor(&traj, &g, p.level).map(|r| r.max_v_after_entry);
    writeln!(out, "plant:              {:?}", traj.plant)?;
    writeln!(out, "x0:                 ({}, {})", x0.x1, x0.x2)?;
    writeln!(out, "disturbance:        {}", profile.label())?;
    writeln!(out, "samples:            {}", traj.samples.len())?;
    writeln!(
        out,
        "settling time:      {} (eps {})",
        opt(settle_time),
        sim.settle_eps
    )?;
    match max_v_after_entry {
        Some(v) => writeln!(out, "max V after entry:  {v} (R = {})", p.level)?,
        None => writeln!(out, "max V after entry:  never entered V <= {}", p.level)?,
    }
    writeln!(out, "wrote {}", csv.display())?;
    Ok(SimulationOutcome {
        csv,
        trajectory: traj,
        settle_time,
        max_v_after_entry,
    })
}

pub fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<CampaignReportF64, CliError> {
    let p = cfg.params()?;
    let g = checked_gains(cfg, &p)?;
    let spec = CampaignSpecF64 {
        params: p,
        gains: g,
        boundary_count: cfg.campaign.boundary_count.unwrap_or(100),
        interior_count: cfg.campaign.interior_count.unwrap_or(0),
        profiles: cfg.campaign_profiles(p.disturbance_bound)?,
        sim: cfg.sim_config(&p),
        rng_seed: cfg.campaign.seed.unwrap_or(0),
    };
    let report = run_campaign(&spec)?;

    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    let csv = dir.join("campaign.csv");
    report.write_csv(BufWriter::new(File::create(&csv)?))?;
    let summary = report.summary();
    fs::write(dir.join("campaign_summary.txt"), &summary)?;
    write!(out, "{summary}")?;
    writeln!(out, "wrote {}", csv.display())?;

    if report.passed() {
        Ok(report)
    } else {
        Err(CliError::Verification(format!(
            "{} of {} cases failed",
            report.cases.len() - report.pass_count,
            report.cases.len()
        )))
    }
}

/// Closed polyline through `V = level` (right branch top to bottom, then the
/// left branch back up), `2 * per_branch` points, first point repeated at the end.
pub fn level_set_polyline(level: f64, gains: &GainsF64, per_branch: usize) -> Vec<StateF64> {
    let top = (2.0 * level).sqrt();
    let n = per_branch.max(2);
    let branch = |sign: f64, i: usize| {
        let x2 = top - 2.0 * top * i as f64 / (n - 1) as f64;
        let x2 = if sign > 0.0 { x2 } else { -x2 };
        StateF64::new(sign * (level - 0.5 * x2 * x2) / gains.mu2, x2)
    };
    let mut pts: Vec<StateF64> = (0..n)
        .map(|i| branch(1.0, i))
        .chain((0..n).map(|i| branch(-1.0, i)))
        .collect();
    pts.push(pts[0]);
    pts
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutcome {
    pub files: Vec<PathBuf>,
    pub initial_states: [StateF64; 2],
    pub settle_times: [Option<f64>; 2],
    pub max_v_after_entry: [Option<f64>; 2],
    /// Largest per-sample state deviation between the pendulum and the
    /// double-integrator run, over both initial states.
    pub equivalence_error: f64,
    pub boundary: Vec<StateF64>,
}

pub fn cmd_demo_pendulum(cfg: &RunConfig, out: &mut dyn Write) -> Result<DemoOutcome, CliError> {
    let mut cfg = cfg.clone();
    cfg.fill_lab_defaults()?;
    let p = cfg.params()?;
    let g = checked_gains(&cfg, &p)?;
    let pp = cfg.pendulum()?;
    let profile = cfg.disturbance(p.disturbance_bound)?;
    let sim = cfg.sim_config(&p);
    let initial_states = [
        StateF64::new(0.9 * p.level / g.mu2, 0.0),
        StateF64::new(0.0, 0.8 * (2.0 * p.level).sqrt()),
    ];

    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut settle_times = [None; 2];
    let mut max_v = [None; 2];
    let mut equivalence_error = 0.0_f64;

    writeln!(
        out,
        "pendulum b = {}  disturbance {}",
        pp.b(),
        profile.label()
    )?;
    writeln!(
        out,
        "gains mu1 = {}  mu2 = {}  Ts = {}  horizon {} s  dt {}",
        g.mu1, g.mu2, p.settling_time, sim.t_end, sim.dt
    )?;
    for (i, x0) in initial_states.iter().enumerate() {
        let pend = simulate(&Plant::Pendulum(pp), &g, &profile, *x0, &sim)?;
        let reference = simulate(&Plant::DoubleIntegrator, &g, &profile, *x0, &sim)?;
        for (a, b) in pend.samples.iter().zip(&reference.samples) {
            equivalence_error = equivalence_error
                .max((a.x1 - b.x1).abs())
                .max((a.x2 - b.x2).abs());
        }
        settle_times[i] = settling_time(&pend, sim.settle_eps);
        max_v[i] = level_set_monitor(&pend, &g, p.level).map(|r| r.max_v_after_entry);

        let path = dir.join(format!("pendulum_ic{}.csv", i + 1));
        write_trajectory(&pend, &path)?;
        files.push(path);
        if i == 0 {
            let path = dir.join("double_integrator_ic1.csv");
            write_trajectory(&reference, &path)?;
            files.push(path);
        }
        writeln!(
            out,
            "x0 = ({}, {}): V0 = {}  settling {}  max V after entry {}",
            x0.x1,
            x0.x2,
            lyapunov(x0, &g),
            opt(settle_times[i]),
            max_v[i].map_or("n/a".to_string(), |v| v.to_string())
        )?;
    }
    writeln!(
        out,
        "pendulum vs double integrator: max deviation {equivalence_error:e}"
    )?;

    let boundary = level_set_polyline(p.level, &g, 200);
    let path = dir.join("level_set_boundary.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "x1,x2")?;
    for s in &boundary {
        writeln!(w, "{},{}", s.x1, s.x2)?;
    }
    w.flush()?;
    files.push(path);
    for f in &files {
        writeln!(out, "wrote {}", f.display())?;
    }

    Ok(DemoOutcome {
        files,
        initial_states,
        settle_times,
        max_v_after_entry: max_v,
        equivalence_error,
        boundary,
    })
}
