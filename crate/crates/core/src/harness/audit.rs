use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::kinematics::{forward_kinematics, DhModel, JointLimits, Pose};

use super::sim::TrajectoryLog;

/// Slack on the normalised bounds for rounding in recomputed differences.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Angle,
    Velocity,
    Accel,
    Jerk,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub cycle: usize,
    pub joint: usize,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleError {
    pub i: usize,
    pub c: i32,
    pub err_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    /// Per joint: max normalised |angle|, |velocity|, |acceleration|, |jerk|.
    pub max_normalized: [[f64; 4]; 7],
    pub violations: Vec<Violation>,
    pub sample_errors: Vec<SampleError>,
    pub completed: bool,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.completed
    }

    pub fn max_error(&self) -> f64 {
        self.sample_errors.iter().map(|e| e.err_m).fold(0.0, f64::max)
    }

    pub fn write_errors_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "c", "err_m"])?;
        for e in &self.sample_errors {
            wtr.write_record([e.i.to_string(), e.c.to_string(), e.err_m.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn normalized_angle(q: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * q - (hi + lo)) / (hi - lo)
}

fn close(logged: f64, recomputed: f64, scale: f64) -> bool {
    (logged - recomputed).abs() <= AUDIT_TOL * scale
}

/// Recompute derivatives from the commanded positions, normalise by the
/// joint limits and compare with `desired` (one adjusted target pose per
/// sampling point). A (cycle, joint) pair counts once no matter how many of
/// its checks fail.
pub fn validate_trajectory(log: &TrajectoryLog, limits: &JointLimits, model: &DhModel, desired: &[Pose]) -> AuditReport {
    let t0 = log.comm_period;
    let mut max_normalized = [[0.0f64; 4]; 7];
    let mut violations = Vec::new();
    let (mut v_prev, mut a_prev) = ([0.0f64; 7], [0.0f64; 7]);
    for (r, row) in log.cycles.iter().enumerate() {
        for j in 0..7 {
            let (v, a, jerk) = if r == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let v = (row.q[j] - log.cycles[r - 1].q[j]) / t0;
                let a = (v - v_prev[j]) / t0;
                (v, a, (a - a_prev[j]) / t0)
            };
            let norm = [
                normalized_angle(row.q[j], limits.q_min[j], limits.q_max[j]).abs(),
                v.abs() / limits.qd_max[j],
                a.abs() / limits.qdd_max[j],
                jerk.abs() / limits.qddd_max[j],
            ];
            let logged = [
                normalized_angle(row.q[j], limits.q_min[j], limits.q_max[j]).abs(),
                row.qd[j].abs() / limits.qd_max[j],
                row.qdd[j].abs() / limits.qdd_max[j],
                row.qddd[j].abs() / limits.qddd_max[j],
            ];
            let mut problems = Vec::new();
            for (idx, quantity) in [Quantity::Angle, Quantity::Velocity, Quantity::Accel, Quantity::Jerk].into_iter().enumerate() {
                max_normalized[j][idx] = max_normalized[j][idx].max(norm[idx]);
                if norm[idx] > 1.0 + AUDIT_TOL || logged[idx] > 1.0 + AUDIT_TOL {
                    problems.push(format!("{quantity:?} at {:.6} of its bound", norm[idx].max(logged[idx])));
                }
            }
            if !(close(row.qd[j], v, limits.qd_max[j])
                && close(row.qdd[j], a, limits.qdd_max[j])
                && close(row.qddd[j], jerk, limits.qddd_max[j]))
            {
                problems.push("logged derivatives disagree with the commanded positions".into());
            }
            if r > 0 {
                v_prev[j] = v;
                a_prev[j] = a;
            }
            if !problems.is_empty() {
                violations.push(Violation { cycle: row.cycle, joint: j + 1, what: problems.join("; ") });
            }
        }
    }

    let mut sample_errors = Vec::new();
    for s in &log.samples {
        if let (Some(row), Some(target)) = (log.sample_row(s.i), desired.get(s.i)) {
            let p = forward_kinematics(model, &row.q).translation;
            sample_errors.push(SampleError { i: s.i, c: s.c, err_m: (p - target.translation).norm() });
        }
    }
    let completed = !desired.is_empty() && sample_errors.len() == desired.len();
    AuditReport { max_normalized, violations, sample_errors, completed }
}

/// Adjusted target poses recorded in the log, in sampling order.
pub fn desired_poses(log: &TrajectoryLog) -> Vec<Pose> {
    log.samples.iter().map(|s| s.target).collect()
}
