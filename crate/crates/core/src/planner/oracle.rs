//! Exhaustive reference for the value function.
//!
//! Evaluates the definition directly as a two-player game tree without any
//! sharing between sub-problems: the adjustment sequence picks every offset
//! `|e| <= d` that keeps the index on the grid, and the resolver answers with
//! any branch of the next sampling point that respects the step bound. `L` is
//! the largest `d <= 2o` for which the resolver can always reach the end of
//! the path. The resolver only sees the current state and the next index,
//! which is what a runtime lookup can act on.
//!
//! Exponential in `n`; intended for tiny instances only.

use crate::error::{Error, Result};
use crate::feasibility::FeasibilityGrid;

use super::{usable_mask, StepConstraint, STUCK};

pub const MAX_POINTS: usize = 7;
pub const MAX_BRANCHES: usize = 6;
pub const MAX_OFFSET: usize = 3;

struct Game<'a> {
    grid: &'a FeasibilityGrid,
    usable: Vec<bool>,
    max_step: [f64; 7],
}

impl Game<'_> {
    /// Can the resolver, standing on `(i, j, k)`, survive every sequence whose
    /// steps are bounded by `d` until the last sampling point?
    fn survives(&self, i: usize, j: usize, k: i32, d: i32) -> bool {
        let n = self.grid.n();
        if i == n {
            return true;
        }
        let o = self.grid.o() as i32;
        let atlas = &self.grid.atlas;
        let q = atlas.raw(atlas.index(i, j, k)).expect("only usable cells are visited");
        (-d..=d).filter(|e| (k + e).abs() <= o).all(|e| {
            (0..self.grid.m()).any(|jj| {
                let idx = atlas.index(i + 1, jj, k + e);
                self.usable[idx]
                    && StepConstraint::step_ok(&self.max_step, q, atlas.raw(idx).expect("usable"))
                    && self.survives(i + 1, jj, k + e, d)
            })
        })
    }
}

/// Value of every cell, `(i, j, k)` row-major; `None` for unusable cells,
/// `Some(-1)` for stuck ones. End cells report the cap `2o`.
pub fn brute_force_values(grid: &FeasibilityGrid, sc: &StepConstraint) -> Result<Vec<Option<i32>>> {
    if grid.atlas.n_points() > MAX_POINTS || grid.m() > MAX_BRANCHES || grid.o() > MAX_OFFSET {
        return Err(Error::InstanceTooLarge(format!(
            "n+1={}, m={}, o={} (limits {MAX_POINTS}, {MAX_BRANCHES}, {MAX_OFFSET})",
            grid.atlas.n_points(),
            grid.m(),
            grid.o()
        )));
    }
    let game = Game { grid, usable: usable_mask(grid, sc), max_step: sc.max_step() };
    let o = grid.o() as i32;
    let mut out = Vec::with_capacity(grid.atlas.len());
    for i in 0..grid.atlas.n_points() {
        for j in 0..grid.m() {
            for k in -o..=o {
                if !game.usable[grid.atlas.index(i, j, k)] {
                    out.push(None);
                    continue;
                }
                // Larger d only admits more sequences, so scan upwards and stop
                // at the first loss.
                let mut l = STUCK;
                for d in 0..=2 * o {
                    if !game.survives(i, j, k, d) {
                        break;
                    }
                    l = d;
                }
                out.push(Some(l));
            }
        }
    }
    Ok(out)
}
