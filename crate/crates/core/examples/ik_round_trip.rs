//! Forward kinematics, the q7-parameterized inverse and the singularity test
//! on a handful of configurations.

use redres::kinematics::{
    forward_kinematics, ik_parameterized, jacobian, smallest_singular_value, DhModel, JointLimits, JointVector,
};

fn main() {
    let model = DhModel::panda();
    let limits = JointLimits::panda();
    let samples = [
        JointVector::from([0.0, -0.3, 0.0, -2.2, 0.0, 2.0, 0.8]),
        JointVector::from([1.1, 0.4, -0.7, -1.5, 0.9, 1.2, -1.3]),
        JointVector::from([-2.0, 1.2, 2.1, -0.6, -2.4, 3.0, 2.5]),
    ];
    for q in &samples {
        let pose = forward_kinematics(&model, q);
        let sigma = smallest_singular_value(&jacobian(&model, q));
        print!("q = {:.3?}\n  p = {:.4?}, sigma_min = {sigma:.4}\n", q.as_slice(), pose.translation.as_slice());
        match ik_parameterized(&model, &pose, q[6], &limits) {
            Some(back) => println!("  recovered with |dq|inf = {:.2e}", (back - q).amax()),
            None => println!("  no admissible solution for this q7"),
        }
        // The same pose with other values of the redundancy parameter.
        let alternatives: Vec<String> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&q7| match ik_parameterized(&model, &pose, q7, &limits) {
                Some(s) => format!("q7={q7:+.1}: q1={:+.3}", s[0]),
                None => format!("q7={q7:+.1}: none"),
            })
            .collect();
        println!("  {}", alternatives.join(", "));
    }
}
