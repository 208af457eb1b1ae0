//! Parametric 26-joint skeleton posed from (action, phase).
//!
//! Poses are a deterministic function of the action and its cycle phase.
//! They fill the joint block of motion exports; positions and labels never
//! depend on them.

use std::f64::consts::TAU;

use crate::catalog::AtomicAction;
use crate::geometry::{rotate_yaw, Vec3};

pub const JOINT_COUNT: usize = 26;
/// Per-joint features: world position then world velocity.
pub const FEATURES_PER_JOINT: usize = 6;

pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "pelvis",
    "spine1",
    "spine2",
    "spine3",
    "neck",
    "head",
    "l_clavicle",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "l_hand",
    "r_clavicle",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
    "r_hand",
    "l_hip",
    "l_knee",
    "l_ankle",
    "l_foot",
    "l_toe",
    "r_hip",
    "r_knee",
    "r_ankle",
    "r_foot",
    "r_toe",
];

const L_SHOULDER: usize = 7;
const R_SHOULDER: usize = 12;
const L_HIP: usize = 16;
const R_HIP: usize = 21;

/// Rest pose in body units (height 1). Body frame: +y up, +z forward,
/// +x the character's left.
const REST: [[f64; 3]; JOINT_COUNT] = [
    [0.0, 0.53, 0.0],
    [0.0, 0.60, 0.0],
    [0.0, 0.67, 0.0],
    [0.0, 0.74, 0.0],
    [0.0, 0.82, 0.0],
    [0.0, 0.90, 0.0],
    [0.04, 0.80, 0.0],
    [0.11, 0.80, 0.0],
    [0.11, 0.62, 0.0],
    [0.11, 0.47, 0.0],
    [0.11, 0.43, 0.0],
    [-0.04, 0.80, 0.0],
    [-0.11, 0.80, 0.0],
    [-0.11, 0.62, 0.0],
    [-0.11, 0.47, 0.0],
    [-0.11, 0.43, 0.0],
    [0.05, 0.52, 0.0],
    [0.05, 0.28, 0.0],
    [0.05, 0.04, 0.0],
    [0.05, 0.01, 0.05],
    [0.05, 0.0, 0.09],
    [-0.05, 0.52, 0.0],
    [-0.05, 0.28, 0.0],
    [-0.05, 0.04, 0.0],
    [-0.05, 0.01, 0.05],
    [-0.05, 0.0, 0.09],
];

/// Swing a limb chain forward (positive angle) about its root joint.
fn swing(pose: &mut [Vec3; JOINT_COUNT], root: usize, len: usize, degrees: f64) {
    let (s, c) = (-degrees.to_radians()).sin_cos();
    let pivot = pose[root];
    for p in &mut pose[root + 1..root + 1 + len] {
        let v = *p - pivot;
        *p = pivot + Vec3::new(v.x, v.y * c - v.z * s, v.y * s + v.z * c);
    }
}

/// Raise a limb chain sideways about its root; positive lifts towards +x.
fn abduct(pose: &mut [Vec3; JOINT_COUNT], root: usize, len: usize, degrees: f64) {
    let (s, c) = degrees.to_radians().sin_cos();
    let pivot = pose[root];
    for p in &mut pose[root + 1..root + 1 + len] {
        let v = *p - pivot;
        *p = pivot + Vec3::new(v.x * c - v.y * s, v.x * s + v.y * c, v.z);
    }
}

/// Joint positions relative to the root for a character of `height`.
pub fn body_pose(action: AtomicAction, phase: f64, height: f64) -> [Vec3; JOINT_COUNT] {
    let mut pose = REST.map(|[x, y, z]| Vec3::new(x, y, z));
    let w = (TAU * phase).sin();
    match action {
        AtomicAction::Walk | AtomicAction::Run => {
            let (leg, arm, bob) = if action == AtomicAction::Run {
                (40.0, 35.0, 0.02)
            } else {
                (25.0, 20.0, 0.01)
            };
            swing(&mut pose, L_HIP, 4, leg * w);
            swing(&mut pose, R_HIP, 4, -leg * w);
            swing(&mut pose, L_SHOULDER, 3, -arm * w);
            swing(&mut pose, R_SHOULDER, 3, arm * w);
            let lift = bob * (2.0 * TAU * phase).cos().abs();
            for p in &mut pose {
                p.y += lift;
            }
        }
        AtomicAction::Dance => {
            abduct(&mut pose, L_SHOULDER, 3, 90.0 + 45.0 * w);
            abduct(&mut pose, R_SHOULDER, 3, -(90.0 + 45.0 * w));
            let sway = 0.03 * w;
            for p in &mut pose[..16] {
                p.x += sway;
            }
        }
        AtomicAction::Wave => {
            abduct(
                &mut pose,
                R_SHOULDER,
                3,
                -(140.0 + 20.0 * (2.0 * TAU * phase).sin()),
            );
        }
        AtomicAction::Point => swing(&mut pose, R_SHOULDER, 3, 85.0),
        AtomicAction::Talk => swing(&mut pose, R_SHOULDER, 3, 20.0 + 15.0 * w),
        AtomicAction::Text => {
            swing(&mut pose, L_SHOULDER, 3, 60.0);
            swing(&mut pose, R_SHOULDER, 3, 60.0);
        }
        AtomicAction::Idle => {
            let sway = 0.01 * w;
            for p in &mut pose[..16] {
                p.x += sway;
            }
        }
        _ => {}
    }
    pose.map(|p| p * height)
}

/// World-space joint positions.
pub fn world_pose(
    action: AtomicAction,
    phase: f64,
    height: f64,
    root: &Vec3,
    heading: f64,
) -> [Vec3; JOINT_COUNT] {
    body_pose(action, phase, height).map(|p| rotate_yaw(&p, heading) + root)
}
