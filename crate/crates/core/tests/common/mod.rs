//! Independent reference computations for the integration tests. Nothing
//! here calls into the library's kinematics; matrices are plain arrays.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use redres::feasibility::{Atlas, FeasibilityGrid};
use redres::kinematics::{JointLimits, JointVector};

pub type M4 = [[f64; 4]; 4];
pub type M3 = [[f64; 3]; 3];

/// `(a, d, alpha)` of the seven links and the flange, read off the arm's
/// published frame diagram.
pub const PANDA_DH: [(f64, f64, f64); 8] = [
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -FRAC_PI_2),
    (0.0, 0.316, FRAC_PI_2),
    (0.0825, 0.0, FRAC_PI_2),
    (-0.0825, 0.384, -FRAC_PI_2),
    (0.0, 0.0, FRAC_PI_2),
    (0.088, 0.0, FRAC_PI_2),
    (0.0, 0.107, 0.0),
];

pub const Q_MIN: [f64; 7] = [-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973];
pub const Q_MAX: [f64; 7] = [2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973];
pub const QD_MAX: [f64; 7] = [2.175, 2.175, 2.175, 2.175, 2.61, 2.61, 2.61];
pub const QDD_MAX: [f64; 7] = [15.0, 7.5, 10.0, 12.5, 15.0, 20.0, 20.0];
pub const QDDD_MAX: [f64; 7] = [7500.0, 3750.0, 5000.0, 6250.0, 7500.0, 10000.0, 10000.0];

fn mul4(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for r in 0..4 {
        for k in 0..4 {
            for s in 0..4 {
                c[r][s] += a[r][k] * b[k][s];
            }
        }
    }
    c
}

fn rot_x(alpha: f64) -> M4 {
    let (s, c) = alpha.sin_cos();
    [[1.0, 0.0, 0.0, 0.0], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [0.0, 0.0, 0.0, 1.0]]
}

fn rot_z(theta: f64) -> M4 {
    let (s, c) = theta.sin_cos();
    [[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
}

fn trans(x: f64, y: f64, z: f64) -> M4 {
    [[1.0, 0.0, 0.0, x], [0.0, 1.0, 0.0, y], [0.0, 0.0, 1.0, z], [0.0, 0.0, 0.0, 1.0]]
}

/// Base-to-frame transforms of joints 1..7 and the flange, built as
/// `Rx(alpha) Tx(a) Rz(theta) Tz(d)` per link.
pub fn oracle_frames(dh: &[(f64, f64, f64); 8], q: &[f64; 7]) -> [M4; 8] {
    let mut t = trans(0.0, 0.0, 0.0);
    let mut out = [t; 8];
    for (c, &(a, d, alpha)) in dh.iter().enumerate() {
        let theta = if c < 7 { q[c] } else { 0.0 };
        let link = mul4(&mul4(&mul4(&rot_x(alpha), &trans(a, 0.0, 0.0)), &rot_z(theta)), &trans(0.0, 0.0, d));
        t = mul4(&t, &link);
        out[c] = t;
    }
    out
}

pub fn oracle_fk(q: &[f64; 7]) -> M4 {
    oracle_frames(&PANDA_DH, q)[7]
}

pub fn rotation(t: &M4) -> M3 {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = t[i][j];
        }
    }
    r
}

pub fn position(t: &M4) -> [f64; 3] {
    [t[0][3], t[1][3], t[2][3]]
}

/// Rotation vector of `a * b^T`.
pub fn rotation_log_diff(a: &M3, b: &M3) -> [f64; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[j][k]).sum();
        }
    }
    let cos = ((r[0][0] + r[1][1] + r[2][2] - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let v = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
    let scale = if angle < 1e-12 { 0.5 } else { angle / (2.0 * angle.sin()) };
    v.map(|x| x * scale)
}

/// Smallest singular value of a 6x7 matrix via cyclic Jacobi on `A A^T`.
pub fn jacobi_min_singular(a: &[[f64; 7]; 6]) -> f64 {
    let mut s = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            s[i][j] = (0..7).map(|k| a[i][k] * a[j][k]).sum();
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..6).flat_map(|i| (0..6).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..6 {
            for q in p + 1..6 {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..6 {
                    let (skp, skq) = (s[k][p], s[k][q]);
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..6 {
                    let (spk, sqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..6).map(|i| s[i][i]).fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

/// Solve a dense square system by Gaussian elimination with partial pivoting.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> [f64; 6] {
    for col in 0..6 {
        let piv = (col..6).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..6 {
            let f = a[r][col] / a[col][col];
            for k in col..6 {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for r in (0..6).rev() {
        x[r] = (b[r] - (r + 1..6).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
    }
    x
}

fn pose_residual(target: &M4, q: &[f64; 7]) -> [f64; 6] {
    let t = oracle_fk(q);
    let (p, pt) = (position(&t), position(target));
    let w = rotation_log_diff(&rotation(target), &rotation(&t));
    [pt[0] - p[0], pt[1] - p[1], pt[2] - p[2], w[0], w[1], w[2]]
}

/// Damped least squares on joints 1..6 with `q7` held fixed. Returns the
/// converged joints, or `None` if the residual does not vanish.
pub fn dls_ik(target: &M4, q7: f64, seed: &[f64; 6]) -> Option<[f64; 7]> {
    let mut q = [seed[0], seed[1], seed[2], seed[3], seed[4], seed[5], q7];
    let lambda2 = 1e-4;
    for _ in 0..200 {
        let r = pose_residual(target, &q);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Some(q);
        }
        let h = 1e-7;
        let mut jac = [[0.0; 6]; 6];
        for c in 0..6 {
            let mut qp = q;
            qp[c] += h;
            let rp = pose_residual(target, &qp);
            for row in 0..6 {
                jac[row][c] = (r[row] - rp[row]) / h;
            }
        }
        let mut a = [[0.0; 6]; 6];
        let mut b = [0.0; 6];
        for i in 0..6 {
            for j in 0..6 {
                a[i][j] = (0..6).map(|k| jac[k][i] * jac[k][j]).sum::<f64>() + if i == j { lambda2 } else { 0.0 };
            }
            b[i] = (0..6).map(|k| jac[k][i] * r[k]).sum();
        }
        let dq = solve6(a, b);
        for c in 0..6 {
            q[c] += dq[c].clamp(-0.5, 0.5);
        }
    }
    let r = pose_residual(target, &q);
    (r.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-10).then_some(q)
}

pub fn within(q: &[f64; 7], margin: f64) -> bool {
    (0..7).all(|c| q[c] >= Q_MIN[c] + margin && q[c] <= Q_MAX[c] - margin)
}

pub fn random_interior<R: Rng>(rng: &mut R, shrink: f64) -> JointVector {
    JointVector::from_fn(|c, _| {
        let mid = 0.5 * (Q_MIN[c] + Q_MAX[c]);
        let half = 0.5 * (Q_MAX[c] - Q_MIN[c]) * (1.0 - shrink);
        rng.gen_range(mid - half..=mid + half)
    })
}

/// Joint limits with angles wide open, for synthetic planning grids.
pub fn wide_limits() -> JointLimits {
    let mut l = JointLimits::panda();
    l.q_min = JointVector::from([-10.0; 7]);
    l.q_max = JointVector::from([10.0; 7]);
    l
}

/// Synthetic grid from a cell function.
pub fn synthetic_grid(
    n_points: usize,
    m: usize,
    o: usize,
    mut cell: impl FnMut(usize, usize, i32) -> Option<JointVector>,
) -> FeasibilityGrid {
    let mut cells = Vec::with_capacity(n_points * m * (2 * o + 1));
    for i in 0..n_points {
        for j in 0..m {
            for k in -(o as i32)..=o as i32 {
                cells.push(cell(i, j, k));
            }
        }
    }
    FeasibilityGrid::synthetic(Atlas::from_cells(n_points, m, o, cells).unwrap(), wide_limits(), 0.1).unwrap()
}

/// Branch rule evaluated independently: `a` ranks ahead of `b`.
pub fn branch_preferred(a: &JointVector, b: &JointVector) -> bool {
    let mid6 = 0.5 * (Q_MIN[5] + Q_MAX[5]);
    let key = |q: &JointVector| ((q[1] < 0.0) as u8, (q[5] - mid6).abs());
    let (ka, kb) = (key(a), key(b));
    if ka.0 != kb.0 {
        return ka.0 < kb.0;
    }
    if (ka.1 - kb.1).abs() > 1e-9 {
        return ka.1 < kb.1;
    }
    a.iter().zip(b.iter()).find(|(x, y)| (*x - *y).abs() > 1e-9).is_some_and(|(x, y)| x < y)
}

/// Largest elementwise gap between `jac` (rows: linear then angular) and
/// central differences of the oracle forward kinematics at `q`.
pub fn jacobian_fd_deviation(jac: &[[f64; 7]; 6], q: &[f64; 7]) -> f64 {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for c in 0..7 {
        let (mut qp, mut qm) = (*q, *q);
        qp[c] += h;
        qm[c] -= h;
        let (tp, tm) = (oracle_fk(&qp), oracle_fk(&qm));
        let (pp, pm) = (position(&tp), position(&tm));
        let w = rotation_log_diff(&rotation(&tp), &rotation(&tm));
        for r in 0..3 {
            worst = worst.max((jac[r][c] - (pp[r] - pm[r]) / (2.0 * h)).abs());
            worst = worst.max((jac[r + 3][c] - w[r] / (2.0 * h)).abs());
        }
    }
    worst
}
