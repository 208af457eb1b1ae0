#![allow(dead_code)]

use groupsim_core::authoring::GroupActivity;
use groupsim_core::catalog::AtomicAction;
use groupsim_core::dynamics::{step_group, CharacterState, GroupState, Locomotion, SimOptions};
use groupsim_core::geometry::Vec3;
use groupsim_core::GroupMotion;

pub fn walker(id: u32, position: Vec3, heading: f64, speed: f64) -> CharacterState {
    CharacterState {
        person_id: id,
        group_id: 1,
        position,
        heading,
        init_speed: speed,
        speed,
        action: AtomicAction::Walk,
        clip: "clip_walk_00".into(),
        phase: 0.0,
        body_radius: 0.225,
        height: 1.7,
        locomotion: Locomotion {
            nominal_speed: 1.4,
            stride_factor: 1.0,
            cycle_length: 1.1,
        },
    }
}

pub fn walking_group(characters: Vec<CharacterState>) -> GroupState {
    GroupState {
        group_id: 1,
        activity: GroupActivity::Walking,
        speed_adjusted: true,
        characters,
    }
}

/// Step a group for `frames` frames (frame 0 is the initial state).
pub fn run(
    mut group: GroupState,
    frames: usize,
    fps: f64,
    speed_adjust: bool,
) -> (GroupMotion, GroupState) {
    let options = SimOptions {
        speed_adjust,
        ..SimOptions::default()
    };
    let mut positions = vec![group
        .characters
        .iter()
        .map(|c| c.position)
        .collect::<Vec<_>>()];
    for _ in 1..frames {
        step_group(&mut group, 1.0 / fps, &options);
        positions.push(group.characters.iter().map(|c| c.position).collect());
    }
    let motion = GroupMotion::from_positions(group.activity, fps, &positions).unwrap();
    (motion, group)
}

pub fn min_pair_distance(motion: &GroupMotion) -> f64 {
    let mut best = f64::INFINITY;
    for t in 0..motion.frames() {
        let f = motion.frame(t);
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                best = best.min((f[i].position - f[j].position).norm());
            }
        }
    }
    best
}
