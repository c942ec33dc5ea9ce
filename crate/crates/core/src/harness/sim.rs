use std::io::Write;

use crate::compensator::{compensate_step, derived_limits, ControlClock, ManipulatorState};
use crate::error::{Error, Result};
use crate::feasibility::FeasibilityGrid;
use crate::kinematics::{JointLimits, JointVector, Pose};
use crate::planner::{next_joints, DpTable};

use super::signal::validate_signal;

/// Upper bound on extra cycles spent bringing the arm to rest after the
/// last sampling point.
pub const MAX_SETTLE_CYCLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub t: f64,
    /// Sampling point the arm is heading to is `i + 1`.
    pub i: usize,
    pub c: i32,
    pub q: JointVector,
    pub qd: JointVector,
    pub qdd: JointVector,
    pub qddd: JointVector,
    pub clamped: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub i: usize,
    pub j: usize,
    pub c: i32,
    pub q_plan: JointVector,
    pub target: Pose,
}

/// Row 0 is the initial state at rest; every later row is one command.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub comm_period: f64,
    pub cycles_per_sample: usize,
    pub cycles: Vec<CycleRecord>,
    pub samples: Vec<SampleRecord>,
}

pub const TRAJECTORY_CSV_HEADER: &str = "cycle,t,i,c,q1,q2,q3,q4,q5,q6,q7,qd1,qd2,qd3,qd4,qd5,qd6,qd7,\
qdd1,qdd2,qdd3,qdd4,qdd5,qdd6,qdd7,qddd1,qddd2,qddd3,qddd4,qddd5,qddd6,qddd7,clamped_mask";

impl TrajectoryLog {
    /// Row at which sampling point `i` is reached.
    pub fn sample_row(&self, i: usize) -> Option<&CycleRecord> {
        self.cycles.get(i * self.cycles_per_sample)
    }

    pub fn last(&self) -> &CycleRecord {
        self.cycles.last().expect("log always holds the initial state")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(TRAJECTORY_CSV_HEADER.split(','))?;
        for r in &self.cycles {
            let mut rec = vec![r.cycle.to_string(), r.t.to_string(), r.i.to_string(), r.c.to_string()];
            for v in [&r.q, &r.qd, &r.qdd, &r.qddd] {
                rec.extend(v.iter().map(|x| x.to_string()));
            }
            rec.push(r.clamped.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_samples_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j", "c", "q1", "q2", "q3", "q4", "q5", "q6", "q7", "px", "py", "pz"])?;
        for s in &self.samples {
            let mut rec = vec![s.i.to_string(), s.j.to_string(), s.c.to_string()];
            rec.extend(s.q_plan.iter().map(|x| x.to_string()));
            rec.extend(s.target.translation.iter().map(|x| x.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Drives the kinematic plant through compensated cycles.
pub struct Tracker<'a> {
    limits: &'a JointLimits,
    t0: f64,
    per_sample: usize,
    total: usize,
    state: ManipulatorState,
    log: Vec<CycleRecord>,
}

impl<'a> Tracker<'a> {
    pub fn new(limits: &'a JointLimits, q0: JointVector, t0: f64, per_sample: usize, n: usize) -> Self {
        let first = CycleRecord {
            cycle: 0,
            t: 0.0,
            i: 0,
            c: 0,
            q: q0,
            qd: JointVector::zeros(),
            qdd: JointVector::zeros(),
            qddd: JointVector::zeros(),
            clamped: 0,
        };
        Self {
            limits,
            t0,
            per_sample,
            total: per_sample * n,
            state: ManipulatorState::at_rest(q0),
            log: vec![first],
        }
    }

    pub fn state(&self) -> &ManipulatorState {
        &self.state
    }

    fn step(&mut self, target: &JointVector, left_in_segment: usize, n0: usize, i: usize, c: i32) {
        let clock = ControlClock { t0: self.t0, t_r: left_in_segment as f64 * self.t0, n0 };
        let dl = derived_limits(self.limits, &clock);
        let cmd = compensate_step(&self.state, target, &clock, self.limits, &dl);
        self.state = cmd.state;
        let cycle = self.log.len();
        self.log.push(CycleRecord {
            cycle,
            t: cycle as f64 * self.t0,
            i,
            c,
            q: cmd.state.q,
            qd: cmd.state.qd,
            qdd: cmd.state.qdd,
            qddd: cmd.qddd,
            clamped: cmd.clamps,
        });
    }

    /// Run the cycles from sampling point `i` to `i + 1`.
    pub fn segment(&mut self, i: usize, c: i32, target: &JointVector) {
        for cc in 0..self.per_sample {
            let done = i * self.per_sample + cc;
            self.step(target, self.per_sample - cc, self.total.saturating_sub(done), i, c);
        }
    }

    /// Hold the final target with one-cycle stop limits until velocity and
    /// acceleration are within one cycle of zero.
    pub fn settle(&mut self, target: &JointVector, i: usize, c: i32) {
        for _ in 0..MAX_SETTLE_CYCLES {
            if at_rest(&self.state, self.limits, self.t0) {
                break;
            }
            self.step(target, 1, 1, i, c);
        }
    }

    pub fn into_cycles(self) -> Vec<CycleRecord> {
        self.log
    }
}

/// `|qd| <= qdd_max t0` and `|qdd| <= qddd_max t0` on every joint.
pub fn at_rest(s: &ManipulatorState, limits: &JointLimits, t0: f64) -> bool {
    (0..7).all(|j| {
        s.qd[j].abs() <= limits.qdd_max[j] * t0 * (1.0 + 1e-9) && s.qdd[j].abs() <= limits.qddd_max[j] * t0 * (1.0 + 1e-9)
    })
}

/// Run the planned path at the communication rate while the adjustment
/// index follows `signal`.
pub fn simulate(grid: &FeasibilityGrid, table: &DpTable, signal: &[i32]) -> Result<TrajectoryLog> {
    let live = grid.provenance.hash();
    if table.grid_hash != live {
        return Err(Error::ArtifactMismatch { expected: live, found: table.grid_hash.clone() });
    }
    let n = table.n();
    validate_signal(signal, table.d_max(), table.o(), n)?;
    let path = &grid.provenance.path;
    let limits = &grid.provenance.limits;
    let per_sample = path.cycles_per_sample();

    let mut j = table.j0();
    let q0 = grid.get(0, j, 0).ok_or(Error::NoFeasibleStart)?;
    let mut samples = vec![SampleRecord { i: 0, j, c: 0, q_plan: q0, target: grid.target_pose(0, 0) }];
    let mut tracker = Tracker::new(limits, q0, path.comm_period(), per_sample, n);
    for i in 0..n {
        let (c, c_next) = (signal[i], signal[i + 1]);
        let (jn, q_next) = next_joints(table, grid, i, j, c, c_next)
            .map_err(|e| Error::SignalViolation { index: i + 1, reason: e.to_string() })?;
        samples.push(SampleRecord { i: i + 1, j: jn, c: c_next, q_plan: q_next, target: grid.target_pose(i + 1, c_next) });
        tracker.segment(i, c_next, &q_next);
        j = jn;
    }
    let last = samples.last().expect("at least the start sample");
    tracker.settle(&last.q_plan.clone(), n, last.c);
    Ok(TrajectoryLog { comm_period: path.comm_period(), cycles_per_sample: per_sample, cycles: tracker.into_cycles(), samples })
}
