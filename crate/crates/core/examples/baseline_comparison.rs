//! Planned resolution against the greedy online resolver, both started from
//! the planner's initial joints.

use redres::harness::{run_baseline, run_plan, run_simulation, ScenarioConfig};

fn main() -> redres::Result<()> {
    println!("{:>5} {:>10} {:>18} {:>16}", "m", "planned", "greedy", "limiting joint");
    for m in [61, 121] {
        let mut cfg = ScenarioConfig::circle();
        cfg.grid.m = m;
        cfg.out = std::env::temp_dir().join(format!("redres-baseline-{m}"));
        run_plan(&cfg)?;
        let planned = run_simulation(&cfg)?;
        let (run, summary) = run_baseline(&cfg)?;
        let greedy = match run.halt {
            Some(h) => format!("halted at {}/{}", h.index, summary.n),
            None => "completed".to_string(),
        };
        let joint = run.halt.map_or("-".to_string(), |h| h.limiting_joint.to_string());
        let done = if planned.audit.completed { "completed" } else { "halted" };
        println!("{m:>5} {done:>10} {greedy:>18} {joint:>16}");
    }
    Ok(())
}
