use serde::Serialize;

use crate::kinematics::{ik_parameterized_tol, DhModel, JointLimits, JointVector};
use crate::pathmodel::{PathSpec, RedundancyGrid};
use crate::planner::StepConstraint;

use super::sim::{SampleRecord, TrajectoryLog, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Halt {
    /// Last sampling point reached.
    pub index: usize,
    /// 1-based joint that blocks the least-violating candidate for the next
    /// point (or, with no IK solution at all, the joint closest to a bound).
    pub limiting_joint: usize,
    /// Normalised excess of that joint over its bound.
    pub excess: f64,
    pub q: [f64; 7],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub log: TrajectoryLog,
    pub halt: Option<Halt>,
}

impl BaselineRun {
    pub fn completed(&self) -> bool {
        self.halt.is_none()
    }
}

/// Joint with the smallest distance to either angle bound, as a fraction of
/// its range.
pub fn nearest_bound_joint(q: &JointVector, limits: &JointLimits) -> (usize, f64) {
    (0..7)
        .map(|j| {
            let span = limits.q_max[j] - limits.q_min[j];
            (j + 1, (q[j] - limits.q_min[j]).min(limits.q_max[j] - q[j]) / span)
        })
        .fold((0, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best })
}

/// Worst normalised violation of `cand` reached from `q`, and the joint
/// responsible. Step excess is relative to the step bound, angle excess to
/// the joint range.
fn violation(q: &JointVector, cand: &JointVector, max_step: &[f64; 7], reduced: &JointLimits) -> (f64, usize) {
    (0..7)
        .map(|k| {
            let step = (cand[k] - q[k]).abs() / max_step[k] - 1.0;
            let span = reduced.q_max[k] - reduced.q_min[k];
            let angle = (reduced.q_min[k] - cand[k]).max(cand[k] - reduced.q_max[k]) / span;
            (step.max(angle), k + 1)
        })
        .fold((f64::NEG_INFINITY, 0), |best, x| if x.0 > best.0 { x } else { best })
}

/// Online resolution without look-ahead: at every sampling point take the
/// admissible IK solution on the `q7` grid that is closest to the current
/// joints. Admissible means the same step bound and reduced angle bounds the
/// planner works with. Stops at the first point with no admissible solution.
pub fn baseline_online(
    model: &DhModel,
    path: &PathSpec,
    redundancy: &RedundancyGrid,
    q0: JointVector,
    limits: &JointLimits,
    sc: &StepConstraint,
    singular_tol: f64,
) -> BaselineRun {
    let n = path.n();
    let max_step = sc.max_step();
    let reduced = sc.reduced_limits(limits);
    let mut q = q0;
    let mut samples = vec![SampleRecord { i: 0, j: nearest_column(redundancy, q0[6]), c: 0, q_plan: q0, target: *path.pose(0) }];
    let mut tracker = Tracker::new(limits, q0, path.comm_period(), path.cycles_per_sample(), n);
    let mut halt = None;
    for i in 0..n {
        let pose = path.pose(i + 1);
        let cands: Vec<(usize, JointVector)> = (0..redundancy.m)
            .filter_map(|j| ik_parameterized_tol(model, pose, redundancy.value(j), limits, singular_tol).map(|c| (j, c)))
            .collect();
        let best = cands
            .iter()
            .filter(|(_, c)| violation(&q, c, &max_step, &reduced).0 <= 0.0)
            .min_by(|a, b| (a.1 - q).norm().total_cmp(&(b.1 - q).norm()));
        let Some(&(j, cand)) = best else {
            let (limiting_joint, excess) = cands
                .iter()
                .map(|(_, c)| violation(&q, c, &max_step, &reduced))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(e, k)| (k, e))
                .unwrap_or_else(|| {
                    let (k, margin) = nearest_bound_joint(&q, limits);
                    (k, -margin)
                });
            halt = Some(Halt { index: i, limiting_joint, excess, q: q.into() });
            break;
        };
        samples.push(SampleRecord { i: i + 1, j, c: 0, q_plan: cand, target: *pose });
        tracker.segment(i, 0, &cand);
        q = cand;
    }
    let reached = samples.len() - 1;
    tracker.settle(&q, reached, 0);
    BaselineRun {
        log: TrajectoryLog {
            comm_period: path.comm_period(),
            cycles_per_sample: path.cycles_per_sample(),
            cycles: tracker.into_cycles(),
            samples,
        },
        halt,
    }
}

fn nearest_column(rg: &RedundancyGrid, q7: f64) -> usize {
    (0..rg.m).min_by(|&a, &b| (rg.value(a) - q7).abs().total_cmp(&(rg.value(b) - q7).abs())).unwrap_or(0)
}
