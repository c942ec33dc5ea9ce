//! Backward dynamic program over the feasibility atlas.
//!
//! `L(i, j, k)` is the largest per-step adjustment envelope `d` such that,
//! starting from cell `(i, j, k)`, every admissible adjustment sequence with
//! steps of at most `d` can be followed to the end of the path while staying
//! inside the (margin-reduced) angle bounds and the planning velocity bound.
//! It satisfies the recursion
//!
//! ```text
//! L(i,j,k) = max d  s.t.  for all |e| <= d with |k+e| <= o there is a j' with
//!            cell (i+1, j', k+e) reachable from (i, j, k) and L(i+1, j', k+e) >= d
//! ```
//!
//! with `L(n, j, k) = 2o` for usable end cells and `d` capped at `2o`.
//! Cells with no admissible zero-offset continuation get the sentinel `-1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::FeasibilityGrid;
use crate::kinematics::{JointLimits, JointVector};
use crate::pathmodel::AdjustmentGrid;

pub mod oracle;

pub use oracle::brute_force_values;

/// Value of a usable cell with no admissible zero-offset continuation.
pub const STUCK: i32 = -1;

const ABSENT: i16 = i16::MIN;

pub const TABLE_SCHEMA: u32 = 1;

/// Per-step constraint used while planning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepConstraint {
    pub sample_interval: f64,
    /// Reduced velocity bound used for planning, at most `qd_max`.
    pub qd_plan: [f64; 7],
    /// Amount by which both ends of every angle interval are pulled in.
    pub margin: [f64; 7],
}

impl StepConstraint {
    /// Planning velocity `fraction * qd_max` and the stopping-distance margin
    /// `qd_max^2 / (2 qdd_max)` on every angle bound.
    pub fn from_limits(limits: &JointLimits, sample_interval: f64, fraction: f64) -> Self {
        let qd_plan = limits.qd_max * fraction;
        let margin = limits.qd_max.component_mul(&limits.qd_max).component_div(&(2.0 * limits.qdd_max));
        Self { sample_interval, qd_plan: qd_plan.into(), margin: margin.into() }
    }

    pub fn with_margin(mut self, margin: [f64; 7]) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self, limits: &JointLimits) -> Result<()> {
        if !(self.sample_interval > 0.0) {
            return Err(Error::InvalidInput("sample interval must be positive".into()));
        }
        for c in 0..7 {
            if !(self.qd_plan[c] > 0.0 && self.qd_plan[c] <= limits.qd_max[c]) {
                return Err(Error::InvalidInput(format!("joint {}: qd_plan must lie in (0, qd_max]", c + 1)));
            }
            if !(self.margin[c] >= 0.0) || 2.0 * self.margin[c] >= limits.q_max[c] - limits.q_min[c] {
                return Err(Error::InvalidInput(format!("joint {}: invalid angle margin", c + 1)));
            }
        }
        Ok(())
    }

    pub fn reduced_limits(&self, limits: &JointLimits) -> JointLimits {
        limits.shrunk(&JointVector::from(self.margin))
    }

    /// Largest per-step joint change allowed between consecutive samples.
    pub fn max_step(&self) -> [f64; 7] {
        let mut s = self.qd_plan;
        s.iter_mut().for_each(|v| *v *= self.sample_interval);
        s
    }

    #[inline]
    pub(crate) fn step_ok(max_step: &[f64; 7], a: &[f64; 7], b: &[f64; 7]) -> bool {
        (0..7).all(|c| (a[c] - b[c]).abs() <= max_step[c])
    }
}

/// Cells of the atlas the planner may use: present and inside the reduced
/// angle bounds.
pub(crate) fn usable_mask(grid: &FeasibilityGrid, sc: &StepConstraint) -> Vec<bool> {
    let reduced = sc.reduced_limits(&grid.provenance.limits);
    (0..grid.atlas.len())
        .map(|idx| grid.atlas.raw(idx).is_some_and(|q| reduced.within_angles(&JointVector::from(*q))))
        .collect()
}

/// Solved value function with successor pointers.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    n_points: usize,
    m: usize,
    o: usize,
    values: Vec<i16>,
    succ_start: Vec<u32>,
    succ: Vec<u16>,
    d_max: i32,
    j0: usize,
    pub adjustment: AdjustmentGrid,
    pub constraint: StepConstraint,
    pub grid_hash: String,
}

/// Best successor per target offset for one source cell.
#[derive(Clone, Copy)]
struct Best {
    value: i16,
    j: u16,
}

const NO_BEST: Best = Best { value: -1, j: u16::MAX };

/// Fill `best[k' + o]` with the preferred successor in stage `i + 1` for every
/// target offset `k'`: maximal value, then closest `j`, then smallest `j`.
#[allow(clippy::too_many_arguments)]
fn best_successors(
    grid: &FeasibilityGrid,
    usable: &[bool],
    values: &[i16],
    max_step: &[f64; 7],
    i: usize,
    j: usize,
    q: &[f64; 7],
    best: &mut [Best],
) {
    let o = grid.o() as i32;
    let atlas = &grid.atlas;
    for (slot, kk) in best.iter_mut().zip(-o..=o) {
        *slot = NO_BEST;
        for jj in 0..grid.m() {
            let idx = atlas.index(i + 1, jj, kk);
            let v = values[idx];
            if !usable[idx] || v < 0 {
                continue;
            }
            let qq = atlas.raw(idx).expect("usable cell is present");
            if !StepConstraint::step_ok(max_step, q, qq) {
                continue;
            }
            let better = v > slot.value
                || (v == slot.value
                    && (jj.abs_diff(j) < (slot.j as usize).abs_diff(j)
                        || (jj.abs_diff(j) == (slot.j as usize).abs_diff(j) && jj < slot.j as usize)));
            if better {
                *slot = Best { value: v, j: jj as u16 };
            }
        }
    }
}

/// Largest `d <= cap` such that every in-grid offset `|e| <= d` has a
/// successor with value at least `d`.
fn envelope(best: &[Best], k: i32, o: i32) -> i32 {
    let at = |kk: i32| best[(kk + o) as usize];
    if at(k).value < 0 {
        return STUCK;
    }
    let mut run_min = at(k).value as i32;
    let mut l = 0;
    for d in 1..=2 * o {
        for kk in [k - d, k + d] {
            if kk.abs() <= o {
                let b = at(kk);
                if b.value < 0 {
                    return l;
                }
                run_min = run_min.min(b.value as i32);
            }
        }
        if run_min < d {
            return l;
        }
        l = d;
    }
    l
}

fn offset_range(l: i32, k: i32, o: i32) -> (i32, i32) {
    ((-l).max(-o - k), l.min(o - k))
}

/// Backward recursion from the last sampling point to the first.
pub fn compute_dp(grid: &FeasibilityGrid, sc: &StepConstraint) -> Result<DpTable> {
    let table = solve(grid, sc)?;
    if table.d_max < 0 {
        return Err(Error::NoFeasibleStart);
    }
    Ok(table)
}

/// The recursion itself. Unlike [`compute_dp`] it also returns tables where
/// no start cell can continue; `d_max` is then `-1`.
pub fn solve(grid: &FeasibilityGrid, sc: &StepConstraint) -> Result<DpTable> {
    sc.validate(&grid.provenance.limits)?;
    if grid.n() < 1 {
        return Err(Error::InvalidInput("planning needs at least two sampling points".into()));
    }
    if grid.m() > u16::MAX as usize || 2 * grid.o() > i16::MAX as usize {
        return Err(Error::InvalidInput("grid too large for table encoding".into()));
    }
    let atlas = &grid.atlas;
    let (n, m, o) = (grid.n(), grid.m(), grid.o() as i32);
    let usable = usable_mask(grid, sc);
    let max_step = sc.max_step();
    let cap = (2 * o) as i16;

    let mut values = vec![ABSENT; atlas.len()];
    for j in 0..m {
        for k in -o..=o {
            let idx = atlas.index(n, j, k);
            if usable[idx] {
                values[idx] = cap;
            }
        }
    }

    // Successor lists are produced back to front and re-ordered at the end.
    let mut stage_succ: Vec<Vec<(usize, Vec<u16>)>> = Vec::with_capacity(n);
    let mut best = vec![NO_BEST; (2 * o + 1) as usize];
    for i in (0..n).rev() {
        let mut lists = Vec::new();
        for j in 0..m {
            for k in -o..=o {
                let idx = atlas.index(i, j, k);
                if !usable[idx] {
                    continue;
                }
                let q = atlas.raw(idx).expect("usable cell is present");
                best_successors(grid, &usable, &values, &max_step, i, j, q, &mut best);
                let l = envelope(&best, k, o);
                values[idx] = l as i16;
                if l >= 0 {
                    let (lo, hi) = offset_range(l, k, o);
                    let list = (lo..=hi).map(|e| best[(k + e + o) as usize].j).collect();
                    lists.push((idx, list));
                }
            }
        }
        stage_succ.push(lists);
    }

    let mut per_cell: Vec<Option<Vec<u16>>> = vec![None; atlas.len()];
    for (idx, list) in stage_succ.into_iter().flatten() {
        per_cell[idx] = Some(list);
    }
    let mut succ_start = Vec::with_capacity(atlas.len() + 1);
    let mut succ = Vec::new();
    for list in per_cell {
        succ_start.push(succ.len() as u32);
        if let Some(list) = list {
            succ.extend(list);
        }
    }
    succ_start.push(succ.len() as u32);

    let (mut d_max, mut j0) = (STUCK, usize::MAX);
    for j in 0..m {
        let v = values[atlas.index(0, j, 0)];
        if v != ABSENT && (v as i32) > d_max {
            d_max = v as i32;
            j0 = j;
        }
    }
    Ok(DpTable {
        n_points: atlas.n_points(),
        m,
        o: o as usize,
        values,
        succ_start,
        succ,
        d_max,
        j0,
        adjustment: grid.provenance.adjustment,
        constraint: sc.clone(),
        grid_hash: grid.provenance.hash(),
    })
}

/// `(d_max, j0, delta)` of a solved table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustStep {
    pub d_max: i32,
    pub j0: usize,
    pub delta: f64,
}

pub fn max_adjust_step(table: &DpTable) -> AdjustStep {
    AdjustStep { d_max: table.d_max, j0: table.j0, delta: table.adjustment.delta(table.d_max) }
}

impl DpTable {
    pub fn n(&self) -> usize {
        self.n_points - 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn o(&self) -> usize {
        self.o
    }

    pub fn d_max(&self) -> i32 {
        self.d_max
    }

    pub fn j0(&self) -> usize {
        self.j0
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: i32) -> usize {
        (i * self.m + j) * (2 * self.o + 1) + (k + self.o as i32) as usize
    }

    /// `None` for cells the planner cannot use, `Some(-1)` for stuck cells.
    pub fn value(&self, i: usize, j: usize, k: i32) -> Option<i32> {
        let v = self.values[self.index(i, j, k)];
        (v != ABSENT).then_some(v as i32)
    }

    /// All values in `(i, j, k)` row-major order.
    pub fn values(&self) -> Vec<Option<i32>> {
        self.values.iter().map(|&v| (v != ABSENT).then_some(v as i32)).collect()
    }

    /// Stored successor branch for offset `e` from `(i, j, k)`.
    pub fn successor(&self, i: usize, j: usize, k: i32, e: i32) -> Option<usize> {
        let idx = self.index(i, j, k);
        let l = self.values[idx] as i32;
        if i + 1 >= self.n_points || self.values[idx] == ABSENT || l < 0 {
            return None;
        }
        let (lo, hi) = offset_range(l, k, self.o as i32);
        if e < lo || e > hi {
            return None;
        }
        let start = self.succ_start[idx] as usize;
        Some(self.succ[start + (e - lo) as usize] as usize)
    }

    /// Successor entries recorded for the cell (length check helper).
    fn succ_len(&self, idx: usize) -> usize {
        (self.succ_start[idx + 1] - self.succ_start[idx]) as usize
    }

    #[cfg(test)]
    pub(crate) fn tamper_value(&mut self, i: usize, j: usize, k: i32, delta: i16) {
        let idx = self.index(i, j, k);
        self.values[idx] += delta;
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            schema: TABLE_SCHEMA,
            grid_hash: self.grid_hash.clone(),
            n_points: self.n_points,
            m: self.m,
            o: self.o,
            adjustment: self.adjustment,
            constraint: self.constraint.clone(),
            d_max: self.d_max,
            j0: self.j0,
            values: self.values(),
            succ_start: self.succ_start.clone(),
            succ: self.succ.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TableFile = serde_json::from_str(s)?;
        if f.schema != TABLE_SCHEMA {
            return Err(Error::Parse(format!("unsupported table schema {}", f.schema)));
        }
        let cells = f.n_points * f.m * (2 * f.o + 1);
        if f.values.len() != cells || f.succ_start.len() != cells + 1 {
            return Err(Error::Parse("table arrays do not match its dimensions".into()));
        }
        if f.succ_start.last().copied() != Some(f.succ.len() as u32) {
            return Err(Error::Parse("successor offsets do not match successor data".into()));
        }
        Ok(Self {
            n_points: f.n_points,
            m: f.m,
            o: f.o,
            values: f.values.iter().map(|v| v.map_or(ABSENT, |x| x as i16)).collect(),
            succ_start: f.succ_start,
            succ: f.succ,
            d_max: f.d_max,
            j0: f.j0,
            adjustment: f.adjustment,
            constraint: f.constraint,
            grid_hash: f.grid_hash,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    schema: u32,
    grid_hash: String,
    n_points: usize,
    m: usize,
    o: usize,
    adjustment: AdjustmentGrid,
    constraint: StepConstraint,
    d_max: i32,
    j0: usize,
    values: Vec<Option<i32>>,
    succ_start: Vec<u32>,
    succ: Vec<u16>,
}

/// Runtime query: the planned joints at sample `i + 1` when the adjustment
/// index moves from `k` to `k_next`. Constant time.
pub fn next_joints(
    table: &DpTable,
    grid: &FeasibilityGrid,
    i: usize,
    j: usize,
    k: i32,
    k_next: i32,
) -> Result<(usize, JointVector)> {
    let o = table.o as i32;
    let err = |reason: String| Error::StepTooLarge { sample: i + 1, reason };
    if i >= table.n() {
        return Err(err(format!("sample {i} is the end of the path")));
    }
    if j >= table.m || k.abs() > o {
        return Err(err(format!("state (j={j}, k={k}) is outside the grid")));
    }
    if k_next.abs() > o {
        return Err(err(format!("|k_next| = {} exceeds o = {o}", k_next.abs())));
    }
    let l = match table.value(i, j, k) {
        Some(l) if l >= 0 => l,
        _ => return Err(err(format!("state (i={i}, j={j}, k={k}) has no admissible continuation"))),
    };
    if (k_next - k).abs() > l {
        return Err(err(format!("|{k_next} - {k}| = {} exceeds L = {l}", (k_next - k).abs())));
    }
    let jn = table.successor(i, j, k, k_next - k).expect("successor recorded for every admissible offset");
    let q = grid.get(i + 1, jn, k_next).expect("successor cell present");
    Ok((jn, q))
}

/// Follow an adjustment index sequence from `(0, j0, 0)`; returns the branch
/// and joints at every sampling point.
pub fn follow(table: &DpTable, grid: &FeasibilityGrid, signal: &[i32]) -> Result<Vec<(usize, JointVector)>> {
    if signal.len() != table.n_points || signal.first() != Some(&0) {
        return Err(Error::SignalViolation {
            index: 0,
            reason: format!("expected {} indices starting at 0", table.n_points),
        });
    }
    let mut j = table.j0;
    let mut out = vec![(j, grid.get(0, j, 0).expect("start cell present"))];
    for i in 0..table.n() {
        let (jn, q) = next_joints(table, grid, i, j, signal[i], signal[i + 1])?;
        out.push((jn, q));
        j = jn;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableViolation {
    pub cell: Option<(usize, usize, i32)>,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableAudit {
    pub violations: Vec<TableViolation>,
}

impl TableAudit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct cells with at least one violation.
    pub fn cells(&self) -> Vec<(usize, usize, i32)> {
        let mut v: Vec<_> = self.violations.iter().filter_map(|x| x.cell).collect();
        v.dedup();
        v
    }
}

/// Check every table invariant cell by cell. Values are compared against a
/// fresh solve of the same grid, so a tampered cell is reported on its own
/// without implicating its predecessors.
pub fn verify_table(table: &DpTable, grid: &FeasibilityGrid, sc: &StepConstraint) -> TableAudit {
    let mut audit = TableAudit::default();
    let mut flag = |cell: Option<(usize, usize, i32)>, what: String| audit.violations.push(TableViolation { cell, what });

    if table.grid_hash != grid.provenance.hash() {
        flag(None, "table was solved for a different grid".into());
    }
    if table.n_points != grid.atlas.n_points() || table.m != grid.m() || table.o != grid.o() {
        flag(None, "table dimensions differ from the grid".into());
        return audit;
    }
    if &table.constraint != sc {
        flag(None, "table was solved with a different step constraint".into());
    }
    let reference = solve(grid, sc).ok();
    let usable = usable_mask(grid, sc);
    let max_step = sc.max_step();
    let o = table.o as i32;

    for i in 0..table.n_points {
        for j in 0..table.m {
            for k in -o..=o {
                let idx = table.index(i, j, k);
                let cell = Some((i, j, k));
                let v = table.value(i, j, k);
                if usable[idx] != v.is_some() {
                    flag(cell, "presence disagrees with the grid".into());
                    continue;
                }
                let Some(l) = v else { continue };
                if let Some(r) = &reference {
                    if r.values[idx] as i32 != l {
                        flag(cell, format!("value {l} differs from recomputed {}", r.values[idx]));
                    }
                }
                if i == table.n() {
                    if l != 2 * o {
                        flag(cell, "end cell value must equal the cap".into());
                    }
                    continue;
                }
                if l < 0 {
                    if table.succ_len(idx) != 0 {
                        flag(cell, "stuck cell has successors".into());
                    }
                    continue;
                }
                let (lo, hi) = offset_range(l, k, o);
                if table.succ_len(idx) != (hi - lo + 1) as usize {
                    flag(cell, "successor list does not cover every admissible offset".into());
                    continue;
                }
                let q = grid.atlas.raw(idx).expect("usable cell is present");
                for e in lo..=hi {
                    let jn = table.successor(i, j, k, e).expect("covered offset");
                    if jn >= table.m {
                        flag(cell, format!("offset {e}: successor branch {jn} out of range"));
                        continue;
                    }
                    let sidx = table.index(i + 1, jn, k + e);
                    if !usable[sidx] {
                        flag(cell, format!("offset {e}: successor cell unusable"));
                        continue;
                    }
                    let qq = grid.atlas.raw(sidx).expect("usable");
                    if !StepConstraint::step_ok(&max_step, q, qq) {
                        flag(cell, format!("offset {e}: step exceeds qd_plan * t_s"));
                    }
                    match table.value(i + 1, jn, k + e) {
                        Some(ls) if ls >= l => {}
                        other => flag(cell, format!("offset {e}: successor value {other:?} below {l}")),
                    }
                }
            }
        }
    }

    let best = (0..table.m).filter_map(|j| table.value(0, j, 0)).max().unwrap_or(STUCK);
    if table.d_max != best {
        flag(None, format!("d_max {} is not the best start value {best}", table.d_max));
    }
    if table.d_max >= 0 && (table.j0 >= table.m || table.value(0, table.j0, 0) != Some(table.d_max)) {
        flag(None, "start branch does not realise d_max".into());
    }
    audit
}
