//! One joint driven against its velocity: the compensator clamps jerk,
//! acceleration and velocity until the arm rejoins the moving target.

use redres::compensator::{
    cautionary_velocity, compensate_step, derived_limits, error_bounds, ControlClock, ManipulatorState,
};
use redres::kinematics::{JointLimits, JointVector};

fn main() -> redres::Result<()> {
    let limits = JointLimits::panda();
    let t0 = 0.001;
    let caution = cautionary_velocity(&limits, t0);
    let joint = 0;
    let plan = 0.5 * limits.qd_max[joint];
    let (err_max, t_max) = error_bounds(limits.qd_max[joint], plan, limits.qdd_max[joint])?;
    println!("joint 1: cautionary velocity {:.4} rad/s, err_max {err_max:.4} rad, t_max {t_max:.3} s", caution[joint]);

    let mut state = ManipulatorState::at_rest(JointVector::zeros());
    state.qd[joint] = caution[joint];
    let mut worst: f64 = 0.0;
    for cycle in 0..1000 {
        let t = cycle as f64 * t0;
        let next_sample = (cycle / 100 + 1) as f64 * 0.1;
        let mut target = JointVector::zeros();
        target[joint] = -plan * next_sample;
        let clock = ControlClock { t0, t_r: next_sample - t, n0: usize::MAX };
        let cmd = compensate_step(&state, &target, &clock, &limits, &derived_limits(&limits, &clock));
        state = cmd.state;
        let err = (state.q[joint] + plan * (t + t0)).abs();
        worst = worst.max(err);
        if cycle % 50 == 49 {
            println!(
                "t = {:.2} s  q = {:+.4}  qd = {:+.3}  qdd = {:+.2}  error = {err:.4}  clamps = {:03b}",
                t + t0,
                state.q[joint],
                state.qd[joint],
                state.qdd[joint],
                cmd.clamps & 0b111
            );
        }
    }
    println!("peak error {worst:.4} rad (bound {err_max:.4})");
    Ok(())
}
