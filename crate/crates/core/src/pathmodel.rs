//! Prescribed Cartesian paths, axis-adjusted poses and the two discretization
//! grids (adjustment offsets and seventh-joint values).

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{JointVector, Pose};

/// Communication period of the arm controller (1 kHz).
pub const DEFAULT_COMM_PERIOD: f64 = 0.001;

pub const PATH_CSV_HEADER: [&str; 14] =
    ["i", "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33", "px", "py", "pz", "t"];

/// `n + 1` sampling poses visited every `sample_interval` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    poses: Vec<Pose>,
    sample_interval: f64,
    comm_period: f64,
    cycles_per_sample: usize,
}

impl PathSpec {
    pub fn new(poses: Vec<Pose>, sample_interval: f64, comm_period: f64) -> Result<Self> {
        if poses.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two sampling points".into()));
        }
        if !(sample_interval > 0.0 && comm_period > 0.0) {
            return Err(Error::InvalidInput("sampling and communication periods must be positive".into()));
        }
        let ratio = sample_interval / comm_period;
        let cycles = ratio.round();
        if cycles < 1.0 || (ratio - cycles).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "sampling interval {sample_interval} s is not a multiple of the communication period {comm_period} s"
            )));
        }
        if let Some(i) = poses.iter().position(|p| !p.is_valid(1e-9)) {
            return Err(Error::InvalidInput(format!("pose {i} is not a proper rigid transform")));
        }
        Ok(Self { poses, sample_interval, comm_period, cycles_per_sample: cycles as usize })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn pose(&self, i: usize) -> &Pose {
        &self.poses[i]
    }

    /// Index of the last sampling point (`n`).
    pub fn n(&self) -> usize {
        self.poses.len() - 1
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn comm_period(&self) -> f64 {
        self.comm_period
    }

    pub fn cycles_per_sample(&self) -> usize {
        self.cycles_per_sample
    }

    pub fn duration(&self) -> f64 {
        self.n() as f64 * self.sample_interval
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(PATH_CSV_HEADER)?;
        for (i, p) in self.poses.iter().enumerate() {
            let r = &p.rotation;
            let mut rec = vec![i.to_string()];
            for row in 0..3 {
                for col in 0..3 {
                    rec.push(r[(row, col)].to_string());
                }
            }
            rec.extend(p.translation.iter().map(|v| v.to_string()));
            rec.push((i as f64 * self.sample_interval).to_string());
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the path CSV; the sampling interval is taken from the `t` column,
    /// which must be uniformly spaced.
    pub fn read_csv<R: Read>(r: R, comm_period: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().ne(PATH_CSV_HEADER.iter().copied()) {
            return Err(Error::Parse(format!("unexpected path header {:?}", header)));
        }
        let mut poses = Vec::new();
        let mut times = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if vals[0] != row as f64 {
                return Err(Error::Parse(format!("row {row}: index column must be {row}, got {}", vals[0])));
            }
            let rot = Matrix3::new(vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7], vals[8], vals[9]);
            poses.push(Pose::new(rot, Vector3::new(vals[10], vals[11], vals[12])));
            times.push(vals[13]);
        }
        if times.len() < 2 {
            return Err(Error::Parse("path file needs at least two rows".into()));
        }
        let t_s = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) - t_s).abs() > 1e-9 {
                return Err(Error::Parse("sampling times must be uniformly spaced".into()));
            }
        }
        Self::new(poses, t_s, comm_period)
    }
}

/// Symmetric adjustment offsets `b_k = k * y_max / o`, `k = -o..=o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentGrid {
    pub y_max: f64,
    pub o: usize,
}

impl AdjustmentGrid {
    pub fn new(y_max: f64, o: usize) -> Result<Self> {
        if o == 0 || !(y_max > 0.0) {
            return Err(Error::InvalidInput("adjustment grid needs o >= 1 and y_max > 0".into()));
        }
        Ok(Self { y_max, o })
    }

    pub fn len(&self) -> usize {
        2 * self.o + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.y_max / self.o as f64
    }

    pub fn value(&self, k: i32) -> f64 {
        debug_assert!(k.unsigned_abs() as usize <= self.o);
        self.y_max * (k as f64 / self.o as f64)
    }

    /// Index of an exact grid value.
    pub fn index_of(&self, b: f64) -> Option<i32> {
        let k = (b / self.spacing()).round();
        if k.abs() > self.o as f64 {
            return None;
        }
        let k = k as i32;
        (self.value(k) == b).then_some(k)
    }

    /// Metric step `delta` corresponding to an index step `d`.
    pub fn delta(&self, d: i32) -> f64 {
        d.max(0) as f64 * self.spacing()
    }
}

/// Uniform seventh-joint samples `a_1 = q7_min, ..., a_m = q7_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedundancyGrid {
    pub q7_min: f64,
    pub q7_max: f64,
    pub m: usize,
}

impl RedundancyGrid {
    pub fn new(q7_min: f64, q7_max: f64, m: usize) -> Result<Self> {
        if m < 2 || !(q7_min < q7_max) {
            return Err(Error::InvalidInput("redundancy grid needs m >= 2 and q7_min < q7_max".into()));
        }
        Ok(Self { q7_min, q7_max, m })
    }

    /// Grid spanning the joint-7 interval of `limits`.
    pub fn spanning(limits: &crate::kinematics::JointLimits, m: usize) -> Result<Self> {
        Self::new(limits.q_min[6], limits.q_max[6], m)
    }

    /// Value of the zero-based sample `j` (the paper's `a_{j+1}`).
    pub fn value(&self, j: usize) -> f64 {
        if j + 1 == self.m {
            return self.q7_max;
        }
        self.q7_min + (self.q7_max - self.q7_min) * j as f64 / (self.m - 1) as f64
    }
}

/// Translate the pose by `y` along its own z axis; rotation is untouched.
pub fn adjusted_pose(pose: &Pose, y: f64) -> Pose {
    Pose::new(pose.rotation, pose.translation + y * pose.z_axis())
}

fn planar_circle_pose(theta: f64, height: f64) -> Pose {
    let (s, c) = theta.sin_cos();
    Pose::new(
        Matrix3::new(c, s, 0.0, s, -c, 0.0, 0.0, 0.0, -1.0),
        Vector3::new(0.6 + 0.1 * c, 0.1 * s, height),
    )
}

/// Circle of radius 0.1 m around (0.6, 0, 0.1) traversed once in `duration`
/// seconds, tool axis pointing down, sampled at `n + 1` points.
pub fn circle_path(n: usize, duration: f64) -> Result<PathSpec> {
    circle_path_with_period(n, duration, DEFAULT_COMM_PERIOD)
}

pub fn circle_path_with_period(n: usize, duration: f64, comm_period: f64) -> Result<PathSpec> {
    if n == 0 {
        return Err(Error::InvalidInput("circle path needs n >= 1".into()));
    }
    if !(duration > 0.0) {
        return Err(Error::InvalidInput("circle path duration must be positive".into()));
    }
    let poses = (0..=n)
        .map(|i| {
            let t = duration * i as f64 / n as f64;
            planar_circle_pose(2.0 * PI * t / duration - PI, 0.1)
        })
        .collect();
    PathSpec::new(poses, duration / n as f64, comm_period)
}

/// 101-point circle at height 0.2 m sampled every 0.1 s, starting at angle 0.
pub fn task_path() -> PathSpec {
    task_path_from(0.0)
}

/// The task circle started at angle `theta0` instead of 0. Same geometry and
/// timing, only the seam moves.
pub fn task_path_from(theta0: f64) -> PathSpec {
    let poses = (0..=100).map(|i| planar_circle_pose(theta0 + 2.0 * PI * i as f64 / 100.0, 0.2)).collect();
    PathSpec::new(poses, 0.1, DEFAULT_COMM_PERIOD).expect("task path constants are consistent")
}

/// Finite-difference joint velocity between consecutive samples.
pub fn joint_velocity(q_i: &JointVector, q_prev: &JointVector, t_s: f64) -> JointVector {
    (q_i - q_prev) / t_s
}
