use std::collections::VecDeque;

use redres::feasibility::{build_grid, Atlas, FeasibilityGrid};
use redres::kinematics::{ik_parameterized_tol, DhModel, JointLimits, DEFAULT_SINGULAR_TOL};
use redres::pathmodel::{adjusted_pose, circle_path, AdjustmentGrid, RedundancyGrid};

fn circle_grid(n: usize, m: usize, o: usize) -> FeasibilityGrid {
    let limits = JointLimits::panda();
    build_grid(
        &DhModel::panda(),
        &circle_path(n, n as f64 * 0.1).unwrap(),
        &RedundancyGrid::spanning(&limits, m).unwrap(),
        &AdjustmentGrid::new(0.05, o).unwrap(),
        &limits,
        DEFAULT_SINGULAR_TOL,
    )
    .unwrap()
}

#[test]
fn small_grid_equals_cellwise_inverse() {
    let grid = circle_grid(2, 25, 3);
    let p = &grid.provenance;
    let mut present = 0;
    for i in 0..=2 {
        for j in 0..25 {
            for k in -3..=3 {
                let pose = adjusted_pose(p.path.pose(i), 0.05 * k as f64 / 3.0);
                let q7 = p.limits.q_min[6] + (p.limits.q_max[6] - p.limits.q_min[6]) * j as f64 / 24.0;
                let want = ik_parameterized_tol(&DhModel::panda(), &pose, q7, &p.limits, DEFAULT_SINGULAR_TOL);
                let got = grid.get(i, j, k);
                assert_eq!(got.is_some(), want.is_some(), "cell ({i}, {j}, {k})");
                if let (Some(a), Some(b)) = (got, want) {
                    assert!((a - b).amax() < 1e-12);
                    present += 1;
                }
            }
        }
    }
    assert!(present > 0);
}

#[test]
fn atlas_round_trip_and_shape() {
    let grid = circle_grid(4, 9, 2);
    let mut buf = Vec::new();
    grid.export_atlas(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 9 * 5);
    assert!(text.starts_with("i,j,k,feasible,q1,q2,q3,q4,q5,q6,q7"));
    let back = Atlas::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, grid.atlas);
}

#[test]
fn rebuild_is_bit_identical_and_audits_clean() {
    let a = circle_grid(10, 31, 2);
    let b = circle_grid(10, 31, 2);
    assert_eq!(a.atlas, b.atlas);
    assert_eq!(a.provenance.hash(), b.provenance.hash());
    assert!(a.audit(1e-9).is_empty());
}

/// 4-connected components of the zero-offset slice over (i, j).
fn components(grid: &FeasibilityGrid) -> Vec<Vec<Option<usize>>> {
    let (n, m) = (grid.n(), grid.m());
    let mut label = vec![vec![None; m]; n + 1];
    let mut next = 0;
    for i0 in 0..=n {
        for j0 in 0..m {
            if label[i0][j0].is_some() || grid.get(i0, j0, 0).is_none() {
                continue;
            }
            let mut queue = VecDeque::from([(i0, j0)]);
            label[i0][j0] = Some(next);
            while let Some((i, j)) = queue.pop_front() {
                let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
                for (a, b) in nbrs {
                    if a <= n && b < m && label[a][b].is_none() && grid.get(a, b, 0).is_some() {
                        label[a][b] = Some(next);
                        queue.push_back((a, b));
                    }
                }
            }
            next += 1;
        }
    }
    label
}

#[test]
fn circle_atlas_band_sweeps_down_with_a_separate_island() {
    let grid = circle_grid(100, 61, 10);
    let label = components(&grid);
    let (n, m) = (grid.n(), grid.m());
    let band = label[0][m - 1].expect("top of the q7 range is feasible at the start");
    let mean_j = |i: usize| {
        let js: Vec<usize> = (0..m).filter(|&j| label[i][j] == Some(band)).collect();
        js.iter().sum::<usize>() as f64 / js.len() as f64
    };
    assert!(mean_j(10) > mean_j(50) && mean_j(50) > mean_j(90));
    assert!((0..m / 4).any(|j| label[n][j] == Some(band)), "band reaches low q7 at the end");
    let island = label[0][0].expect("bottom of the q7 range is feasible at the start");
    assert_ne!(island, band);
}
