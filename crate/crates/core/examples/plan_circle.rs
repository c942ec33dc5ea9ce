//! Offline planning on the circle path: grid, dynamic program, and the
//! guaranteed adjustment envelope for two redundancy grid sizes.

use redres::harness::{run_plan, ScenarioConfig};

fn main() -> redres::Result<()> {
    let dir = std::env::temp_dir().join("redres-plan-circle");
    for m in [61, 121] {
        let mut cfg = ScenarioConfig::circle();
        cfg.grid.m = m;
        cfg.out = dir.join(format!("m{m}"));
        let plan = run_plan(&cfg)?;
        let s = &plan.summary;
        println!(
            "m = {m:3}: d_max = {} (delta = {:.3} m), start branch {} (q7 = {:+.3}), grid {:.2} s, dp {:.3} s",
            s.d_max,
            s.delta_m,
            s.j0,
            plan.grid.provenance.redundancy.value(s.j0),
            plan.grid_time.as_secs_f64(),
            plan.dp_time.as_secs_f64()
        );
    }
    println!("artifacts under {}", dir.display());
    Ok(())
}
