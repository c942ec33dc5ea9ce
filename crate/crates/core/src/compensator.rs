//! Per-cycle motion compensation.
//!
//! Each communication cycle turns the next sampled joint target into a
//! command whose jerk, acceleration and velocity stay inside the joint limits.
//! Near the end of the motion the acceleration and velocity limits shrink so
//! the arm comes to rest at the last point.
//!
//! The clamp cascade is solved per joint as a sequence of interval
//! intersections on the next acceleration: jerk first, then acceleration,
//! then velocity. A later constraint can only narrow what the earlier ones
//! allow; when it would empty the interval the earlier constraint wins and
//! the nearest admissible value is used. Each joint therefore sees at most
//! three clamps per cycle.

use crate::error::{Error, Result};
use crate::kinematics::{JointLimits, JointVector};

/// Bit for a jerk clamp on joint `j` in a clamp mask; accel and velocity use
/// the next two bits.
pub const fn clamp_bit(joint: usize, kind: ClampKind) -> u32 {
    1 << (3 * joint + kind as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampKind {
    Jerk = 0,
    Accel = 1,
    Velocity = 2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulatorState {
    pub q: JointVector,
    pub qd: JointVector,
    pub qdd: JointVector,
}

impl ManipulatorState {
    pub fn at_rest(q: JointVector) -> Self {
        Self { q, qd: JointVector::zeros(), qdd: JointVector::zeros() }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).chain(self.qdd.iter()).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlClock {
    /// Communication period.
    pub t0: f64,
    /// Time left until the next sampling point.
    pub t_r: f64,
    /// Communication cycles left until the motion ends.
    pub n0: usize,
}

impl ControlClock {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::InvalidInput(format!("communication period {} must be positive", self.t0)));
        }
        if !(self.t_r >= self.t0 * (1.0 - 1e-9)) || !self.t_r.is_finite() {
            return Err(Error::InvalidInput(format!("remaining time {} is shorter than one cycle", self.t_r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLimits {
    pub qdd_eff: JointVector,
    pub qd_eff: JointVector,
    pub qd_caution: JointVector,
}

impl DerivedLimits {
    /// The velocity ceiling actually enforced.
    pub fn velocity_cap(&self) -> JointVector {
        self.qd_eff.zip_map(&self.qd_caution, f64::min)
    }
}

/// Velocity gained while ramping acceleration from `a` down to zero at the
/// jerk limit, one cycle at a time.
fn discrete_reserve(a: f64, jerk: f64, t0: f64) -> f64 {
    let step = jerk * t0;
    if !(step > 0.0) || !step.is_finite() {
        return 0.0;
    }
    let mut a = a;
    let mut gained = 0.0;
    while a > 0.0 {
        a = (a - step).max(0.0);
        gained += a * t0;
    }
    gained
}

/// Velocity reserve for a jerk-limited ramp-down from full acceleration.
pub fn velocity_reserve(limits: &JointLimits, t0: f64) -> JointVector {
    JointVector::from_fn(|j, _| discrete_reserve(limits.qdd_max[j], limits.qddd_max[j], t0))
}

/// Continuous-time counterpart of [`velocity_reserve`]: `qdd^2 / (2 qddd)`.
pub fn velocity_reserve_closed_form(limits: &JointLimits) -> JointVector {
    limits.qdd_max.zip_map(&limits.qddd_max, |a, j| a * a / (2.0 * j))
}

/// Velocity ceiling that leaves room for a worst-case ramp-down.
pub fn cautionary_velocity(limits: &JointLimits, t0: f64) -> JointVector {
    (limits.qd_max - velocity_reserve(limits, t0)).map(|v| v.max(0.0))
}

pub fn derived_limits(limits: &JointLimits, clock: &ControlClock) -> DerivedLimits {
    let horizon = clock.n0 as f64 * clock.t0;
    let qdd_eff = limits.qdd_max.zip_map(&limits.qddd_max, |a, j| a.min(j * horizon));
    let qd_eff = JointVector::from_fn(|i, _| {
        let (v, a, j) = (limits.qd_max[i], limits.qdd_max[i], limits.qddd_max[i]);
        v.min(a * horizon - a * a / (2.0 * j)).max(0.0)
    });
    DerivedLimits { qdd_eff, qd_eff, qd_caution: cautionary_velocity(limits, clock.t0) }
}

/// Largest next acceleration whose velocity, plus what a jerk-limited
/// ramp-down would still add, stays at or below `cap`.
fn accel_ceiling(v: f64, cap: f64, jerk: f64, t0: f64, search_to: f64) -> f64 {
    let first = (cap - v) / t0;
    if first <= 0.0 {
        return first;
    }
    let step = jerk * t0;
    let mut p = 0.0_f64;
    loop {
        let a = (cap - v + step * t0 * p * (p + 1.0) / 2.0) / (t0 * (1.0 + p));
        if a <= (p + 1.0) * step || (p + 1.0) * step > search_to {
            return a;
        }
        p += 1.0;
    }
}

#[derive(Clone, Copy)]
struct Bound {
    value: f64,
    from: Option<ClampKind>,
}

#[derive(Clone, Copy)]
struct Interval {
    lo: Bound,
    hi: Bound,
}

impl Interval {
    /// Narrow to `[lo, hi]`; if that leaves nothing, collapse onto the
    /// current endpoint nearest to it.
    fn tighten(&mut self, lo: f64, hi: f64, kind: ClampKind) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, hi) };
        if hi < self.lo.value {
            self.hi = Bound { value: self.lo.value, from: self.lo.from };
            return;
        }
        if lo > self.hi.value {
            self.lo = Bound { value: self.hi.value, from: self.hi.from };
            return;
        }
        if lo > self.lo.value {
            self.lo = Bound { value: lo, from: Some(kind) };
        }
        if hi < self.hi.value {
            self.hi = Bound { value: hi, from: Some(kind) };
        }
    }

    fn clamp(&self, x: f64) -> (f64, Option<ClampKind>) {
        if x < self.lo.value {
            (self.lo.value, self.lo.from)
        } else if x > self.hi.value {
            (self.hi.value, self.hi.from)
        } else {
            (x, None)
        }
    }
}

/// Result of one compensation cycle. `state` is what a kinematic plant
/// reports after executing `state.q`; `qddd` is the implied jerk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub state: ManipulatorState,
    pub qddd: JointVector,
    pub clamps: u32,
}

impl Command {
    pub fn q(&self) -> JointVector {
        self.state.q
    }

    pub fn clamp_count(&self, joint: usize) -> u32 {
        (self.clamps >> (3 * joint) & 0b111).count_ones()
    }
}

/// One cycle of motion compensation toward `q_target`, due in `clock.t_r`.
pub fn compensate_step(
    state: &ManipulatorState,
    q_target: &JointVector,
    clock: &ControlClock,
    limits: &JointLimits,
    dl: &DerivedLimits,
) -> Command {
    let t0 = clock.t0;
    let t_r = clock.t_r.max(t0);
    let cap = dl.velocity_cap();
    let mut next = *state;
    let mut qddd = JointVector::zeros();
    let mut clamps = 0;
    for j in 0..7 {
        let (q, v, a) = (state.q[j], state.qd[j], state.qdd[j]);
        let jerk = limits.qddd_max[j];
        let vd = (q_target[j] - q) / t_r;
        let ad = (vd - v) / t0;

        let mut iv = Interval {
            lo: Bound { value: a - jerk * t0, from: Some(ClampKind::Jerk) },
            hi: Bound { value: a + jerk * t0, from: Some(ClampKind::Jerk) },
        };
        iv.tighten(-dl.qdd_eff[j], dl.qdd_eff[j], ClampKind::Accel);
        let reach = dl.qdd_eff[j];
        let hi = accel_ceiling(v, cap[j], jerk, t0, reach);
        let lo = -accel_ceiling(-v, cap[j], jerk, t0, reach);
        iv.tighten(lo, hi, ClampKind::Velocity);

        let (a_next, kind) = iv.clamp(ad);
        if let Some(kind) = kind {
            clamps |= clamp_bit(j, kind);
        }
        let v_next = v + a_next * t0;
        next.q[j] = q + v_next * t0;
        next.qd[j] = v_next;
        next.qdd[j] = a_next;
        qddd[j] = (a_next - a) / t0;
    }
    Command { state: next, qddd, clamps }
}

/// Worst-case tracking error and recovery time when the arm moves at full
/// speed against a path planned at `qd_plan`.
pub fn error_bounds(qd_max: f64, qd_plan: f64, qdd_max: f64) -> Result<(f64, f64)> {
    if !(qd_max > 0.0 && qd_plan > 0.0 && qdd_max > 0.0) {
        return Err(Error::InvalidInput("error bounds need positive rates".into()));
    }
    if qd_plan >= qd_max {
        return Err(Error::InvalidInput(format!("planning velocity {qd_plan} must be below {qd_max}")));
    }
    let err_max = (qd_max + qd_plan).powi(2) / (2.0 * qdd_max);
    let t_max = 2.0 * qd_max * qd_max / (qdd_max * (qd_max - qd_plan));
    Ok((err_max, t_max))
}

/// [`error_bounds`] for every joint.
pub fn joint_error_bounds(limits: &JointLimits, qd_plan: &[f64; 7]) -> Result<[(f64, f64); 7]> {
    let mut out = [(0.0, 0.0); 7];
    for j in 0..7 {
        out[j] = error_bounds(limits.qd_max[j], qd_plan[j], limits.qdd_max[j])?;
    }
    Ok(out)
}
