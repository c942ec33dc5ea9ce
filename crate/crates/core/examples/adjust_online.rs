//! Plan once, then run the circle with a random adjustment stream at 1 kHz
//! and audit the commanded trajectory.
//!
//! `cargo run --release --example adjust_online -- [seed]`

use redres::harness::{run_plan, run_simulation, ScenarioConfig, SignalSpec};

fn main() -> redres::Result<()> {
    let seed = std::env::args().nth(1).map_or(7, |s| s.parse().expect("seed must be an integer"));
    let mut cfg = ScenarioConfig::circle();
    cfg.grid.m = 121;
    cfg.signal = SignalSpec::RandomWalk { seed, step_bound: 20 };
    cfg.out = std::env::temp_dir().join("redres-adjust-online");
    let plan = run_plan(&cfg)?;
    println!("d_max = {}, delta = {:.3} m", plan.summary.d_max, plan.summary.delta_m);

    let run = run_simulation(&cfg)?;
    let shown: Vec<String> = run.signal.iter().take(20).map(|c| c.to_string()).collect();
    println!("first indices: {} ...", shown.join(" "));
    let a = &run.audit;
    println!("{} cycles, {} violations, completed: {}", run.log.cycles.len() - 1, a.violation_count(), a.completed);
    for (j, row) in a.max_normalized.iter().enumerate() {
        println!("joint {}: angle {:.3} vel {:.3} acc {:.3} jerk {:.3}", j + 1, row[0], row[1], row[2], row[3]);
    }
    println!("trajectory and audit CSV in {}", cfg.out.display());
    Ok(())
}
