//! Dense `(i, j, k)` atlas of inverse-kinematics solutions: for every sampling
//! point `i`, seventh-joint sample `a_j` and adjustment offset `b_k` the cell
//! holds the selected branch of `ik(adjusted_pose(pose_i, b_k), a_j)` or is
//! empty when none exists.

use std::io::{Read, Write};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kinematics::{ik_parameterized_tol, DhModel, JointLimits, JointVector, Pose};
use crate::pathmodel::{adjusted_pose, AdjustmentGrid, PathSpec, RedundancyGrid};

pub const ATLAS_CSV_HEADER: [&str; 11] = ["i", "j", "k", "feasible", "q1", "q2", "q3", "q4", "q5", "q6", "q7"];

/// Raw cell storage: presence bitmap plus packed joint data.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    n_points: usize,
    m: usize,
    o: usize,
    present: Vec<bool>,
    joints: Vec<[f64; 7]>,
}

impl Atlas {
    pub fn empty(n_points: usize, m: usize, o: usize) -> Self {
        let len = n_points * m * (2 * o + 1);
        Self { n_points, m, o, present: vec![false; len], joints: vec![[0.0; 7]; len] }
    }

    /// Build from cells listed in `(i, j, k)` row-major order.
    pub fn from_cells(n_points: usize, m: usize, o: usize, cells: Vec<Option<JointVector>>) -> Result<Self> {
        let mut atlas = Self::empty(n_points, m, o);
        if cells.len() != atlas.present.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} cells, got {}",
                atlas.present.len(),
                cells.len()
            )));
        }
        for (idx, c) in cells.into_iter().enumerate() {
            if let Some(q) = c {
                atlas.present[idx] = true;
                atlas.joints[idx] = q.into();
            }
        }
        Ok(atlas)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn o(&self) -> usize {
        self.o
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: i32) -> usize {
        debug_assert!(i < self.n_points && j < self.m && k.unsigned_abs() as usize <= self.o);
        (i * self.m + j) * (2 * self.o + 1) + (k + self.o as i32) as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: i32) -> Option<JointVector> {
        let idx = self.index(i, j, k);
        self.present[idx].then(|| JointVector::from(self.joints[idx]))
    }

    #[inline]
    pub(crate) fn raw(&self, idx: usize) -> Option<&[f64; 7]> {
        self.present[idx].then(|| &self.joints[idx])
    }

    pub fn feasible_count(&self) -> usize {
        self.present.iter().filter(|p| **p).count()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(ATLAS_CSV_HEADER)?;
        let o = self.o as i32;
        let mut rec: Vec<String> = Vec::with_capacity(11);
        for i in 0..self.n_points {
            for j in 0..self.m {
                for k in -o..=o {
                    rec.clear();
                    rec.extend([i.to_string(), j.to_string(), k.to_string()]);
                    match self.get(i, j, k) {
                        Some(q) => {
                            rec.push("1".into());
                            rec.extend(q.iter().map(|v| v.to_string()));
                        }
                        None => {
                            rec.push("0".into());
                            rec.extend(std::iter::repeat_n(String::new(), 7));
                        }
                    }
                    wr.write_record(&rec)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Inverse of [`Atlas::write_csv`]; dimensions are inferred from the
    /// largest indices present.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        if rd.headers()?.iter().ne(ATLAS_CSV_HEADER.iter().copied()) {
            return Err(Error::Parse("unexpected atlas header".into()));
        }
        let mut rows = Vec::new();
        let (mut max_i, mut max_j, mut max_k) = (0usize, 0usize, 0i32);
        for rec in rd.records() {
            let rec = rec?;
            let perr = |e: &dyn std::fmt::Display| Error::Parse(format!("atlas row {:?}: {e}", rec.position()));
            let i: usize = rec[0].parse().map_err(|e| perr(&e))?;
            let j: usize = rec[1].parse().map_err(|e| perr(&e))?;
            let k: i32 = rec[2].parse().map_err(|e| perr(&e))?;
            let q = match &rec[3] {
                "1" => {
                    let mut q = [0.0; 7];
                    for c in 0..7 {
                        q[c] = rec[4 + c].parse().map_err(|e| perr(&e))?;
                    }
                    Some(q)
                }
                "0" => None,
                other => return Err(perr(&format!("feasible flag {other}"))),
            };
            max_i = max_i.max(i);
            max_j = max_j.max(j);
            max_k = max_k.max(k.abs());
            rows.push((i, j, k, q));
        }
        let mut atlas = Self::empty(max_i + 1, max_j + 1, max_k as usize);
        if rows.len() != atlas.len() {
            return Err(Error::Parse(format!("atlas has {} rows, dimensions need {}", rows.len(), atlas.len())));
        }
        for (i, j, k, q) in rows {
            let idx = atlas.index(i, j, k);
            if let Some(q) = q {
                atlas.present[idx] = true;
                atlas.joints[idx] = q;
            }
        }
        Ok(atlas)
    }
}

/// Inputs a grid was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProvenance {
    pub model: DhModel,
    pub path: PathSpec,
    pub redundancy: RedundancyGrid,
    pub adjustment: AdjustmentGrid,
    pub limits: JointLimits,
    pub singular_tol: f64,
}

impl GridProvenance {
    /// SHA-256 over the bit patterns of every input.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |v: f64| h.update(v.to_bits().to_le_bytes());
        for l in self.model.links.iter().chain(std::iter::once(&self.model.flange)) {
            put(l.a);
            put(l.d);
            put(l.alpha);
            put(l.theta_offset);
        }
        for p in self.path.poses() {
            p.rotation.iter().chain(p.translation.iter()).for_each(|v| put(*v));
        }
        put(self.path.sample_interval());
        put(self.path.comm_period());
        put(self.redundancy.q7_min);
        put(self.redundancy.q7_max);
        put(self.redundancy.m as f64);
        put(self.adjustment.y_max);
        put(self.adjustment.o as f64);
        for v in [&self.limits.q_min, &self.limits.q_max, &self.limits.qd_max, &self.limits.qdd_max, &self.limits.qddd_max] {
            v.iter().for_each(|x| put(*x));
        }
        put(self.singular_tol);
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityGrid {
    pub atlas: Atlas,
    pub provenance: GridProvenance,
}

impl FeasibilityGrid {
    pub fn n(&self) -> usize {
        self.atlas.n_points - 1
    }

    pub fn m(&self) -> usize {
        self.atlas.m
    }

    pub fn o(&self) -> usize {
        self.atlas.o
    }

    pub fn get(&self, i: usize, j: usize, k: i32) -> Option<JointVector> {
        self.atlas.get(i, j, k)
    }

    /// Target pose of cell `(i, *, k)`.
    pub fn target_pose(&self, i: usize, k: i32) -> Pose {
        adjusted_pose(self.provenance.path.pose(i), self.provenance.adjustment.value(k))
    }

    /// Grid over arbitrary cell contents, for synthetic planning instances.
    /// The attached path is a stationary identity pose.
    pub fn synthetic(atlas: Atlas, limits: JointLimits, sample_interval: f64) -> Result<Self> {
        let path = PathSpec::new(vec![Pose::identity(); atlas.n_points], sample_interval, sample_interval)?;
        let provenance = GridProvenance {
            model: DhModel::panda(),
            redundancy: RedundancyGrid::new(limits.q_min[6], limits.q_max[6], atlas.m.max(2))?,
            adjustment: AdjustmentGrid::new(1.0, atlas.o)?,
            path,
            limits,
            singular_tol: 0.0,
        };
        Ok(Self { atlas, provenance })
    }

    pub fn export_atlas<W: Write>(&self, w: W) -> Result<()> {
        self.atlas.write_csv(w)
    }

    /// Post-hoc check of every present cell: pose match, exact `q7`, bounds
    /// and non-singularity. Returns the offending `(i, j, k)` triples.
    pub fn audit(&self, pose_tol: f64) -> Vec<(usize, usize, i32)> {
        use crate::kinematics::{forward_kinematics, is_singular};
        let p = &self.provenance;
        let o = self.o() as i32;
        let mut bad = Vec::new();
        for i in 0..self.atlas.n_points {
            for j in 0..self.m() {
                for k in -o..=o {
                    let Some(q) = self.get(i, j, k) else { continue };
                    let target = self.target_pose(i, k);
                    let fk = forward_kinematics(&p.model, &q);
                    let ok = fk.position_error(&target) <= pose_tol
                        && fk.rotation_error(&target) <= pose_tol
                        && q[6] == p.redundancy.value(j)
                        && p.limits.within_angles(&q)
                        && !is_singular(&p.model, &q, p.singular_tol);
                    if !ok {
                        bad.push((i, j, k));
                    }
                }
            }
        }
        bad
    }
}

/// Compute every cell independently (in parallel over sampling points).
pub fn build_grid(
    model: &DhModel,
    path: &PathSpec,
    redundancy: &RedundancyGrid,
    adjustment: &AdjustmentGrid,
    limits: &JointLimits,
    singular_tol: f64,
) -> Result<FeasibilityGrid> {
    limits.validate().map_err(Error::InvalidInput)?;
    if redundancy.q7_min < limits.q_min[6] || redundancy.q7_max > limits.q_max[6] {
        return Err(Error::InvalidInput("redundancy grid exceeds the joint-7 interval".into()));
    }
    let n_points = path.poses().len();
    let m = redundancy.m;
    let o = adjustment.o as i32;
    let per_point: Vec<Vec<Option<JointVector>>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut cells = Vec::with_capacity(m * adjustment.len());
            for j in 0..m {
                let q7 = redundancy.value(j);
                for k in -o..=o {
                    let target = adjusted_pose(path.pose(i), adjustment.value(k));
                    cells.push(ik_parameterized_tol(model, &target, q7, limits, singular_tol));
                }
            }
            cells
        })
        .collect();
    let atlas = Atlas::from_cells(n_points, m, adjustment.o, per_point.into_iter().flatten().collect())?;
    Ok(FeasibilityGrid {
        atlas,
        provenance: GridProvenance {
            model: model.clone(),
            path: path.clone(),
            redundancy: *redundancy,
            adjustment: *adjustment,
            limits: limits.clone(),
            singular_tol,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::DEFAULT_SINGULAR_TOL;
    use crate::pathmodel::circle_path;

    #[test]
    fn all_infeasible_export_has_zero_flags() {
        let atlas = Atlas::empty(2, 3, 1);
        let mut buf = Vec::new();
        atlas.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,k,feasible,q1,q2,q3,q4,q5,q6,q7");
        assert_eq!(lines.len(), 1 + 2 * 3 * 3);
        assert!(lines[1..].iter().all(|l| l.split(',').nth(3) == Some("0")));
    }

    #[test]
    fn small_grid_round_trips_through_csv() {
        let limits = JointLimits::panda();
        let path = circle_path(2, 10.0).unwrap();
        let grid = build_grid(
            &DhModel::panda(),
            &path,
            &RedundancyGrid::spanning(&limits, 7).unwrap(),
            &AdjustmentGrid::new(0.05, 2).unwrap(),
            &limits,
            DEFAULT_SINGULAR_TOL,
        )
        .unwrap();
        assert!(grid.atlas.feasible_count() > 0);
        let mut buf = Vec::new();
        grid.export_atlas(&mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 1 + 3 * 7 * 5);
        assert_eq!(Atlas::read_csv(buf.as_slice()).unwrap(), grid.atlas);
        assert!(grid.audit(1e-9).is_empty());
    }
}
