use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use redres::harness::{self, ScenarioConfig, SignalSpec};
use redres::{Error, Result};

#[derive(Parser)]
#[command(name = "redres", version, about = "Offline redundancy resolution with online path adjustment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (JSON). Defaults to the circle experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random-walk adjustment signal (switches the signal to a random walk).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest random-walk step, in adjustment grid units.
    #[arg(long, global = true)]
    step_bound: Option<u32>,
    /// Scripted adjustment indices (CSV).
    #[arg(long, global = true, conflicts_with = "seed")]
    signal_file: Option<PathBuf>,
    /// Number of q7 grid values.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Adjustment grid half-width in steps.
    #[arg(long, global = true)]
    o: Option<usize>,
    /// Largest adjustment in metres.
    #[arg(long, global = true)]
    y_max: Option<f64>,
    /// Planning velocity as a fraction of the joint velocity limit.
    #[arg(long, global = true)]
    plan_fraction: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the feasibility atlas.
    Grid,
    /// Build the atlas and solve the dynamic program.
    Plan,
    /// Run the planned path with the adjustment signal at the communication rate.
    Simulate,
    /// Run the greedy online resolver from the planner's start joints.
    Baseline,
    /// Check the persisted artifacts against the configuration.
    Verify {
        /// Pose tolerance for the atlas check.
        #[arg(long, default_value_t = 1e-9)]
        pose_tol: f64,
    },
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::circle(),
        };
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(m) = self.m {
            cfg.grid.m = m;
        }
        if let Some(o) = self.o {
            cfg.grid.o = o;
        }
        if let Some(y) = self.y_max {
            cfg.grid.y_max = y;
        }
        if let Some(f) = self.plan_fraction {
            cfg.limits.plan_fraction = f;
        }
        if let Some(file) = &self.signal_file {
            cfg.signal = SignalSpec::Scripted { file: file.clone() };
        }
        let bound = |cfg: &ScenarioConfig| match cfg.signal {
            SignalSpec::RandomWalk { step_bound, .. } => step_bound,
            _ => cfg.grid.o as u32 * 2,
        };
        if let Some(seed) = self.seed {
            cfg.signal = SignalSpec::RandomWalk { seed, step_bound: self.step_bound.unwrap_or(bound(&cfg)) };
        } else if let (Some(s), SignalSpec::RandomWalk { seed, .. }) = (self.step_bound, &cfg.signal) {
            cfg.signal = SignalSpec::RandomWalk { seed: *seed, step_bound: s };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.config()?;
    match cli.command {
        Command::Grid => {
            let (grid, t) = harness::run_grid(&cfg)?;
            println!(
                "grid: {} points x {} branches x {} offsets, {} feasible cells ({:.3} s)",
                grid.atlas.n_points(),
                grid.m(),
                2 * grid.o() + 1,
                grid.atlas.feasible_count(),
                t.as_secs_f64()
            );
        }
        Command::Plan => {
            let plan = harness::run_plan(&cfg)?;
            let s = &plan.summary;
            println!("d_max = {} (delta = {} m), j0 = {}", s.d_max, s.delta_m, s.j0);
            println!(
                "grid {:.3} s, dynamic program {:.3} s; artifacts in {}",
                plan.grid_time.as_secs_f64(),
                plan.dp_time.as_secs_f64(),
                cfg.out.display()
            );
        }
        Command::Simulate => {
            let run = harness::run_simulation(&cfg)?;
            let a = &run.audit;
            println!(
                "{} cycles, {} violations, max position error {:.3e} m, completed: {}",
                run.log.cycles.len() - 1,
                a.violation_count(),
                a.max_error(),
                a.completed
            );
            if !a.is_clean() {
                for v in a.violations.iter().take(10) {
                    eprintln!("cycle {} joint {}: {}", v.cycle, v.joint, v.what);
                }
                return Err(Error::SignalViolation {
                    index: a.violations.first().map_or(0, |v| v.cycle),
                    reason: "trajectory audit failed".into(),
                });
            }
        }
        Command::Baseline => {
            let (_, s) = harness::run_baseline(&cfg)?;
            match (s.halt_index, s.limiting_joint) {
                (Some(i), Some(j)) => println!("baseline halted at sampling point {i} of {}; limiting joint {j}", s.n),
                _ => println!("baseline completed all {} sampling points", s.n),
            }
        }
        Command::Verify { pose_tol } => {
            let report = harness::run_verify(&cfg, pose_tol)?;
            for v in report.table.violations.iter().take(10) {
                eprintln!("table: {:?} {}", v.cell, v.what);
            }
            for c in report.bad_cells.iter().take(10) {
                eprintln!("atlas cell {c:?} fails the pose check");
            }
            if !report.is_clean() {
                return Err(Error::ArtifactMismatch {
                    expected: "a table and atlas consistent with the configuration".into(),
                    found: format!(
                        "{} table violations, {} bad atlas cells",
                        report.table.violations.len(),
                        report.bad_cells.len()
                    ),
                });
            }
            println!("artifacts verified");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
