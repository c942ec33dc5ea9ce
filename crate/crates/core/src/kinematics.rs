//! Modified-DH model of the 7-DOF arm: forward kinematics, geometric
//! Jacobian, singularity test and the q7-parameterized closed-form inverse.
//!
//! With the seventh joint fixed the arm behaves like a 6-DOF manipulator and
//! the remaining joints follow from a geometric decomposition (wrist centre,
//! elbow triangle, shoulder). Up to eight solution sets exist; the elbow is
//! pinned by the negative joint-4 range and the remaining shoulder/wrist
//! ambiguity is resolved by [`select_branch`].

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Matrix4, SMatrix, SVector, Vector3};

/// Seven joint angles in radians, joint `c` at index `c - 1`.
pub type JointVector = SVector<f64, 7>;

/// Geometric Jacobian, linear rows first.
pub type Jacobian = SMatrix<f64, 6, 7>;

/// Default threshold on the smallest singular value of the Jacobian.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-4;

/// Per-joint bounds on angle, velocity, acceleration and jerk.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLimits {
    pub q_min: JointVector,
    pub q_max: JointVector,
    pub qd_max: JointVector,
    pub qdd_max: JointVector,
    pub qddd_max: JointVector,
}

impl JointLimits {
    /// Manufacturer limits of the Franka Emika Panda.
    pub fn panda() -> Self {
        Self {
            q_max: JointVector::from([2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973]),
            q_min: JointVector::from([-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973]),
            qd_max: JointVector::from([2.1750, 2.1750, 2.1750, 2.1750, 2.6100, 2.6100, 2.6100]),
            qdd_max: JointVector::from([15.0, 7.5, 10.0, 12.5, 15.0, 20.0, 20.0]),
            qddd_max: JointVector::from([7500.0, 3750.0, 5000.0, 6250.0, 7500.0, 10000.0, 10000.0]),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for c in 0..7 {
            if !(self.q_min[c] < self.q_max[c]) {
                return Err(format!("joint {}: q_min must be below q_max", c + 1));
            }
            if !(self.qd_max[c] > 0.0 && self.qdd_max[c] > 0.0 && self.qddd_max[c] > 0.0) {
                return Err(format!("joint {}: rate limits must be positive", c + 1));
            }
        }
        Ok(())
    }

    pub fn within_angles(&self, q: &JointVector) -> bool {
        (0..7).all(|c| q[c] >= self.q_min[c] && q[c] <= self.q_max[c])
    }

    /// Copy with every angle interval shrunk by `margin` on both sides.
    pub fn shrunk(&self, margin: &JointVector) -> Self {
        let mut out = self.clone();
        out.q_min += margin;
        out.q_max -= margin;
        out
    }
}

/// One row of a modified (Craig) DH table: `Rx(alpha) Tx(a) Rz(theta + offset) Tz(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhLink {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    pub theta_offset: f64,
}

impl DhLink {
    pub const fn new(a: f64, d: f64, alpha: f64) -> Self {
        Self { a, d, alpha, theta_offset: 0.0 }
    }

    fn transform(&self, theta: f64) -> Matrix4<f64> {
        let (sa, ca) = self.alpha.sin_cos();
        let (st, ct) = (theta + self.theta_offset).sin_cos();
        Matrix4::new(
            ct, -st, 0.0, self.a,
            st * ca, ct * ca, -sa, -sa * self.d,
            st * sa, ct * sa, ca, ca * self.d,
            0.0, 0.0, 0.0, 1.0,
        )
    }
}

/// Seven actuated links plus the fixed flange transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DhModel {
    pub links: [DhLink; 7],
    pub flange: DhLink,
}

impl DhModel {
    pub fn panda() -> Self {
        Self {
            links: [
                DhLink::new(0.0, 0.333, 0.0),
                DhLink::new(0.0, 0.0, -FRAC_PI_2),
                DhLink::new(0.0, 0.316, FRAC_PI_2),
                DhLink::new(0.0825, 0.0, FRAC_PI_2),
                DhLink::new(-0.0825, 0.384, -FRAC_PI_2),
                DhLink::new(0.0, 0.0, FRAC_PI_2),
                DhLink::new(0.088, 0.0, FRAC_PI_2),
            ],
            flange: DhLink::new(0.0, 0.107, 0.0),
        }
    }

    /// Base-frame transforms of the seven joint frames followed by the flange.
    pub fn frames(&self, q: &JointVector) -> [Matrix4<f64>; 8] {
        let mut out = [Matrix4::identity(); 8];
        let mut t = Matrix4::identity();
        for (c, link) in self.links.iter().enumerate() {
            t *= link.transform(q[c]);
            out[c] = t;
        }
        out[7] = t * self.flange.transform(0.0);
        out
    }
}

/// Homogeneous end-effector transform split into rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_homogeneous(m: &Matrix4<f64>) -> Self {
        Self::new(m.fixed_view::<3, 3>(0, 0).into_owned(), m.fixed_view::<3, 1>(0, 3).into_owned())
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// End-effector z axis (third column of the rotation).
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    /// Orthonormality residual `max(|RᵀR - I|_F, |det R - 1|)`.
    pub fn rotation_defect(&self) -> f64 {
        let r = &self.rotation;
        let ortho = (r.transpose() * r - Matrix3::identity()).norm();
        ortho.max((r.determinant() - 1.0).abs())
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.rotation_defect() <= tol && self.translation.iter().all(|v| v.is_finite())
    }

    pub fn position_error(&self, other: &Pose) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// Frobenius norm of the rotation difference.
    pub fn rotation_error(&self, other: &Pose) -> f64 {
        (self.rotation - other.rotation).norm()
    }
}

pub fn forward_kinematics(model: &DhModel, q: &JointVector) -> Pose {
    Pose::from_homogeneous(&model.frames(q)[7])
}

/// Geometric Jacobian in the base frame: column `c` is `[z_c x (p_ee - o_c); z_c]`.
pub fn jacobian(model: &DhModel, q: &JointVector) -> Jacobian {
    let frames = model.frames(q);
    let p_ee: Vector3<f64> = frames[7].fixed_view::<3, 1>(0, 3).into_owned();
    let mut j = Jacobian::zeros();
    for c in 0..7 {
        let z: Vector3<f64> = frames[c].fixed_view::<3, 1>(0, 2).into_owned();
        let o: Vector3<f64> = frames[c].fixed_view::<3, 1>(0, 3).into_owned();
        let lin = z.cross(&(p_ee - o));
        j.fixed_view_mut::<3, 1>(0, c).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, c).copy_from(&z);
    }
    j
}

pub fn smallest_singular_value(j: &Jacobian) -> f64 {
    j.svd(false, false).singular_values.min()
}

pub fn is_singular(model: &DhModel, q: &JointVector, tol: f64) -> bool {
    smallest_singular_value(&jacobian(model, q)) < tol
}

fn rot_x(alpha: f64) -> Matrix3<f64> {
    let (s, c) = alpha.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_z(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Every geometric solution for `(pose, q7)` before limit, singularity and
/// branch filtering: up to two elbow angles, two wrist and two shoulder
/// branches. Joint 6 is wrapped into `[q6_lo, q6_hi]` when possible, the
/// other joints into `(-pi, pi]`.
///
/// With `q7` fixed, frame 6 is known. The wrist centre (origin of frames 5
/// and 6) and the shoulder (origin of frame 2) are then fixed points whose
/// distance depends on `q4` alone. Walking the shoulder-to-wrist vector from
/// frame 4 to frame 6 yields `q5` and `q6`, and the remaining orientation of
/// frame 3 is a ZYZ rotation in `q1, q2, q3`. Shoulder-singular solutions
/// (`sin q2 = 0`) have no isolated solution and are dropped.
pub fn ik_candidates(model: &DhModel, pose: &Pose, q7: f64, q6_range: (f64, f64)) -> Vec<JointVector> {
    let l = &model.links;
    let (d1, d3, d5, a4, a5, a7) = (l[0].d, l[2].d, l[4].d, l[3].a, l[4].a, l[6].a);
    let (alpha4, alpha5, alpha6, alpha7) = (l[3].alpha, l[4].alpha, l[5].alpha, l[6].alpha);
    let mut out = Vec::with_capacity(8);

    let r_7 = pose.rotation;
    let p_7 = pose.translation - model.flange.d * pose.z_axis();
    let r_6 = r_7 * rot_z(q7).transpose() * rot_x(alpha7).transpose();
    let p_6 = p_7 - a7 * r_6.column(0);
    let p_2 = Vector3::new(0.0, 0.0, d1);
    let u = p_6 - p_2;

    // Shoulder-to-wrist vector in frame 3 and its squared length
    // L + B cos q4 + C sin q4.
    let w3 = |q4: f64| {
        let (s, c) = q4.sin_cos();
        Vector3::new(a4 + a5 * c - d5 * s, 0.0, d3 + a5 * s + d5 * c)
    };
    let base = a4 * a4 + d3 * d3 + a5 * a5 + d5 * d5;
    let (b, c) = (2.0 * (a4 * a5 + d3 * d5), 2.0 * (d3 * a5 - a4 * d5));
    let ratio = (u.norm_squared() - base) / b.hypot(c);
    if !(ratio.abs() <= 1.0) {
        return out;
    }
    let phi = c.atan2(b);
    let spread = ratio.acos();
    let elbows: &[f64] = if spread == 0.0 { &[0.0] } else { &[-1.0, 1.0] };

    let v = r_6.transpose() * (-u);
    for &sign in elbows {
        let q4 = wrap(phi + sign * spread);
        let r_34 = rot_x(alpha4) * rot_z(q4);
        let s_5 = rot_x(alpha5).transpose() * (r_34.transpose() * (-w3(q4)));
        // Rz(q5)^T keeps the z component of s_5 and Rx(alpha6)^T moves the
        // y component onto -z, so v_z fixes the y component after q5.
        let a_y = -v[2] * alpha6.sin().signum();
        let rho5 = s_5[0].hypot(s_5[1]);
        if a_y.abs() > rho5 {
            continue;
        }
        let a_x_abs = (rho5 * rho5 - a_y * a_y).sqrt();
        let wrists: &[f64] = if a_x_abs == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for &ws in wrists {
            let a_x = ws * a_x_abs;
            let q5 = wrap(s_5[1].atan2(s_5[0]) - a_y.atan2(a_x));
            let after5 = rot_x(alpha6).transpose() * Vector3::new(a_x, a_y, s_5[2]);
            let mut q6 = wrap(after5[1].atan2(after5[0]) - v[1].atan2(v[0]));
            if q6 < q6_range.0 {
                q6 += 2.0 * PI;
            } else if q6 > q6_range.1 {
                q6 -= 2.0 * PI;
            }
            let r_5 = r_6 * (rot_x(alpha6) * rot_z(q6)).transpose();
            let r_4 = r_5 * (rot_x(alpha5) * rot_z(q5)).transpose();
            let r_3 = r_4 * r_34.transpose();
            // r_3 = Rz(q1) Ry(q2) Rz(q3).
            let c2 = r_3[(2, 2)].clamp(-1.0, 1.0);
            let s2_abs = (1.0 - c2 * c2).sqrt();
            if s2_abs <= 1e-12 {
                continue;
            }
            for s2 in [s2_abs, -s2_abs] {
                let q1 = (r_3[(1, 2)] / s2).atan2(r_3[(0, 2)] / s2);
                let q2 = s2.atan2(c2);
                let q3 = (r_3[(2, 1)] / s2).atan2(-r_3[(2, 0)] / s2);
                out.push(JointVector::from([q1, q2, q3, q4, q5, q6, q7]));
            }
        }
    }
    out
}

/// Deterministic choice among limit-feasible candidates: shoulder branch with
/// `q2 >= 0` first, then joint 6 closest to the middle of its range, then the
/// lexicographically smallest vector.
pub fn select_branch(candidates: &[JointVector], limits: &JointLimits) -> Option<JointVector> {
    let mid6 = 0.5 * (limits.q_min[5] + limits.q_max[5]);
    candidates
        .iter()
        .filter(|q| limits.within_angles(q))
        .min_by(|a, b| {
            let sa = (a[1] < 0.0) as u8;
            let sb = (b[1] < 0.0) as u8;
            sa.cmp(&sb)
                .then_with(|| (a[5] - mid6).abs().total_cmp(&(b[5] - mid6).abs()))
                .then_with(|| {
                    a.iter()
                        .zip(b.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        })
        .copied()
}

/// Closed-form solution of joints 1..6 for a fixed `q7`, stacked with `q7`.
///
/// Candidates outside the angle bounds or within `singular_tol` of a
/// singularity are discarded before the branch rule; `None` when nothing is
/// left.
pub fn ik_branch_tol(
    model: &DhModel,
    pose: &Pose,
    q7: f64,
    limits: &JointLimits,
    singular_tol: f64,
) -> Option<JointVector> {
    let mut candidates = ik_candidates(model, pose, q7, (limits.q_min[5], limits.q_max[5]));
    candidates.retain(|q| limits.within_angles(q) && !is_singular(model, q, singular_tol));
    select_branch(&candidates, limits)
}

pub fn ik_branch(model: &DhModel, pose: &Pose, q7: f64, limits: &JointLimits) -> Option<JointVector> {
    ik_branch_tol(model, pose, q7, limits, DEFAULT_SINGULAR_TOL)
}

/// `q = f(T, q7)`: empty when `q7` is outside the joint-7 interval.
pub fn ik_parameterized_tol(
    model: &DhModel,
    pose: &Pose,
    q7: f64,
    limits: &JointLimits,
    singular_tol: f64,
) -> Option<JointVector> {
    if !(q7 >= limits.q_min[6] && q7 <= limits.q_max[6]) {
        return None;
    }
    let mut q = ik_branch_tol(model, pose, q7, limits, singular_tol)?;
    q[6] = q7;
    Some(q)
}

pub fn ik_parameterized(model: &DhModel, pose: &Pose, q7: f64, limits: &JointLimits) -> Option<JointVector> {
    ik_parameterized_tol(model, pose, q7, limits, DEFAULT_SINGULAR_TOL)
}
