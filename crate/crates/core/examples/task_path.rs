//! The 101-point task circle. Started at angle 0 the arm cannot complete it
//! within joint 7's range; started half a turn earlier it can.

use redres::harness::{run_plan, run_simulation, PathSource, ScenarioConfig};
use redres::Error;

fn main() -> redres::Result<()> {
    for theta0 in [0.0, -std::f64::consts::PI] {
        let mut cfg = ScenarioConfig::task(11);
        cfg.path = PathSource::Task { theta0 };
        cfg.grid.m = 121;
        cfg.out = std::env::temp_dir().join(format!("redres-task-{}", if theta0 == 0.0 { "literal" } else { "phased" }));
        match run_plan(&cfg) {
            Err(Error::NoFeasibleStart) => println!("start angle {theta0:+.3}: no feasible start"),
            Err(e) => return Err(e),
            Ok(plan) => {
                let run = run_simulation(&cfg)?;
                let errs: Vec<f64> = run.audit.sample_errors.iter().map(|e| e.err_m).collect();
                let inner = &errs[5..errs.len() - 5];
                println!(
                    "start angle {theta0:+.3}: d_max {}, {} violations, max inner error {:.4} m",
                    plan.summary.d_max,
                    run.audit.violation_count(),
                    inner.iter().cloned().fold(0.0, f64::max)
                );
            }
        }
    }
    Ok(())
}
