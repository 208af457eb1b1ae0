//! Per-frame simulation: locomotion, phase advance and the dynamic speed
//! adjustment that keeps walking and jogging groups from running into
//! each other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authoring::{GroupActivity, SceneInstance};
use crate::catalog::{AssetCatalog, AtomicAction};
use crate::geometry::{angle_between_deg, forward, Vec3};
use crate::skeleton::{world_pose, FEATURES_PER_JOINT, JOINT_COUNT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("unknown character asset `{0}`")]
    UnknownCharacter(String),
    #[error("unknown clip asset `{0}`")]
    UnknownClip(String),
    #[error("motion must have at least one frame and one person")]
    EmptyMotion,
    #[error("fps must be positive")]
    BadFps,
    #[error("sample buffer has {got} entries, expected {expected}")]
    SampleCount { expected: usize, got: usize },
}

/// Constants of the collision-avoidance speed rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedAdjustParams {
    pub trigger_distance: f64,
    pub trigger_angle: f64,
    pub decay: f64,
    pub floor: f64,
    pub growth: f64,
}

impl Default for SpeedAdjustParams {
    fn default() -> Self {
        Self {
            trigger_distance: 0.8,
            trigger_angle: 60.0,
            decay: 0.96,
            floor: 0.1,
            growth: 1.03,
        }
    }
}

/// Clip-derived motion parameters of one character.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Locomotion {
    pub nominal_speed: f64,
    pub stride_factor: f64,
    pub cycle_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterState {
    pub person_id: u32,
    pub group_id: u32,
    pub position: Vec3,
    pub heading: f64,
    pub init_speed: f64,
    pub speed: f64,
    pub action: AtomicAction,
    pub clip: String,
    pub phase: f64,
    pub body_radius: f64,
    pub height: f64,
    pub locomotion: Locomotion,
}

impl CharacterState {
    pub fn forward(&self) -> Vec3 {
        forward(self.heading)
    }

    /// Ground-plane velocity at the current speed factor, m/s.
    pub fn velocity(&self) -> Vec3 {
        if self.action.is_locomotion() {
            self.forward()
                * (self.locomotion.nominal_speed * self.locomotion.stride_factor * self.speed)
        } else {
            Vec3::zeros()
        }
    }
}

/// New speed factors for one group, all flags taken from the pre-update
/// state so the result does not depend on list order.
pub fn adjust_speeds(states: &[CharacterState], params: &SpeedAdjustParams) -> Vec<f64> {
    states
        .iter()
        .enumerate()
        .map(|(i, me)| {
            let fwd = me.forward();
            let blocked = states.iter().enumerate().any(|(j, other)| {
                if i == j {
                    return false;
                }
                let offset = other.position - me.position;
                offset.norm() <= params.trigger_distance
                    && angle_between_deg(&fwd, &offset) <= params.trigger_angle
            });
            if blocked {
                (me.speed * params.decay).max(params.floor)
            } else {
                (me.speed * params.growth).min(me.init_speed)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupState {
    pub group_id: u32,
    pub activity: GroupActivity,
    pub speed_adjusted: bool,
    pub characters: Vec<CharacterState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneState {
    pub groups: Vec<GroupState>,
    pub frame: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    /// Run the speed rule for walking and jogging groups.
    pub speed_adjust: bool,
    pub params: SpeedAdjustParams,
    pub joint_block: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            speed_adjust: true,
            params: SpeedAdjustParams::default(),
            joint_block: false,
        }
    }
}

impl SceneState {
    pub fn from_scene(
        scene: &SceneInstance,
        catalog: &AssetCatalog,
    ) -> Result<Self, DynamicsError> {
        let groups = scene
            .groups
            .iter()
            .map(|g| {
                let characters = g
                    .members
                    .iter()
                    .map(|m| {
                        let ch = catalog.character(&m.character_id).ok_or_else(|| {
                            DynamicsError::UnknownCharacter(m.character_id.clone())
                        })?;
                        let clip = catalog
                            .clip(&m.clip_id)
                            .ok_or_else(|| DynamicsError::UnknownClip(m.clip_id.clone()))?;
                        Ok(CharacterState {
                            person_id: m.person_id,
                            group_id: g.group_id,
                            position: m.placement.position,
                            heading: m.placement.heading,
                            init_speed: m.animation_speed_factor,
                            speed: m.animation_speed_factor,
                            action: m.action,
                            clip: m.clip_id.clone(),
                            phase: m.phase_offset,
                            body_radius: ch.shoulder_width / 2.0,
                            height: ch.height,
                            locomotion: Locomotion {
                                nominal_speed: clip.nominal_speed,
                                stride_factor: clip.stride_factor(),
                                cycle_length: clip.cycle_length,
                            },
                        })
                    })
                    .collect::<Result<Vec<_>, DynamicsError>>()?;
                Ok(GroupState {
                    group_id: g.group_id,
                    activity: g.activity,
                    speed_adjusted: g.activity.spec().dynamic_speed_adjust,
                    characters,
                })
            })
            .collect::<Result<Vec<_>, DynamicsError>>()?;
        Ok(Self { groups, frame: 0 })
    }
}

/// Advance a group by `dt` seconds.
pub fn step_group(group: &mut GroupState, dt: f64, options: &SimOptions) {
    if group.speed_adjusted && options.speed_adjust {
        let speeds = adjust_speeds(&group.characters, &options.params);
        for (c, s) in group.characters.iter_mut().zip(speeds) {
            c.speed = s;
        }
    }
    for c in &mut group.characters {
        c.phase = (c.phase + dt * c.speed / c.locomotion.cycle_length).rem_euclid(1.0);
        if c.phase >= 1.0 {
            c.phase = 0.0;
        }
        c.position += c.velocity() * dt;
    }
}

/// Advance the whole scene by `dt` seconds. Groups never interact.
pub fn step(mut state: SceneState, dt: f64, options: &SimOptions) -> SceneState {
    assert!(dt > 0.0, "time step must be positive");
    for g in &mut state.groups {
        step_group(g, dt, options);
    }
    state.frame += 1;
    state
}

/// One person at one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonFrame {
    pub position: Vec3,
    pub heading: f64,
    pub action: AtomicAction,
    pub speed: f64,
}

/// Trajectories and labels of one group; the unit of 3D export and of the
/// metric suite.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupMotion {
    pub activity: GroupActivity,
    pub group_id: u32,
    pub seed: u64,
    pub fps: f64,
    frames: usize,
    person_ids: Vec<u32>,
    /// Frame-major: index `t * persons + p`.
    samples: Vec<PersonFrame>,
    /// Person-major `P × T × 26 × 6` block.
    joints: Option<Vec<f64>>,
}

impl GroupMotion {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        activity: GroupActivity,
        group_id: u32,
        seed: u64,
        fps: f64,
        frames: usize,
        person_ids: Vec<u32>,
        samples: Vec<PersonFrame>,
        joints: Option<Vec<f64>>,
    ) -> Result<Self, DynamicsError> {
        if frames == 0 || person_ids.is_empty() {
            return Err(DynamicsError::EmptyMotion);
        }
        if !(fps > 0.0) {
            return Err(DynamicsError::BadFps);
        }
        let expected = frames * person_ids.len();
        if samples.len() != expected {
            return Err(DynamicsError::SampleCount {
                expected,
                got: samples.len(),
            });
        }
        if let Some(j) = &joints {
            let expected = expected * JOINT_COUNT * FEATURES_PER_JOINT;
            if j.len() != expected {
                return Err(DynamicsError::SampleCount {
                    expected,
                    got: j.len(),
                });
            }
        }
        Ok(Self {
            activity,
            group_id,
            seed,
            fps,
            frames,
            person_ids,
            samples,
            joints,
        })
    }

    /// Build from per-frame positions only, e.g. for metric fixtures.
    pub fn from_positions(
        activity: GroupActivity,
        fps: f64,
        positions: &[Vec<Vec3>],
    ) -> Result<Self, DynamicsError> {
        let frames = positions.len();
        let persons = positions.first().map_or(0, |f| f.len());
        let mut samples = Vec::with_capacity(frames * persons);
        for frame in positions {
            if frame.len() != persons {
                return Err(DynamicsError::SampleCount {
                    expected: persons,
                    got: frame.len(),
                });
            }
            samples.extend(frame.iter().map(|p| PersonFrame {
                position: *p,
                heading: 0.0,
                action: AtomicAction::Idle,
                speed: 1.0,
            }));
        }
        Self::new(
            activity,
            1,
            0,
            fps,
            frames,
            (1..=persons as u32).collect(),
            samples,
            None,
        )
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn persons(&self) -> usize {
        self.person_ids.len()
    }

    pub fn person_ids(&self) -> &[u32] {
        &self.person_ids
    }

    pub fn sample(&self, frame: usize, person: usize) -> &PersonFrame {
        &self.samples[frame * self.persons() + person]
    }

    pub fn frame(&self, frame: usize) -> &[PersonFrame] {
        let p = self.persons();
        &self.samples[frame * p..(frame + 1) * p]
    }

    pub fn samples(&self) -> &[PersonFrame] {
        &self.samples
    }

    pub fn joints(&self) -> Option<&[f64]> {
        self.joints.as_deref()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames as f64 / self.fps
    }

    /// Apply a rigid ground-plane motion to every position.
    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.position = f(&s.position);
        }
        out
    }
}

/// Static per-person data of a scene trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonInfo {
    pub person_id: u32,
    pub group_id: u32,
    pub activity: GroupActivity,
    pub height: f64,
    pub body_radius: f64,
}

/// All characters of a scene, every frame, for annotation.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneTrace {
    pub fps: f64,
    pub frames: usize,
    pub persons: Vec<PersonInfo>,
    /// Frame-major: index `t * persons.len() + p`.
    pub samples: Vec<PersonFrame>,
}

impl SceneTrace {
    pub fn frame(&self, t: usize) -> &[PersonFrame] {
        let p = self.persons.len();
        &self.samples[t * p..(t + 1) * p]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutput {
    pub motions: Vec<GroupMotion>,
    pub trace: SceneTrace,
}

fn snapshot(c: &CharacterState) -> PersonFrame {
    PersonFrame {
        position: c.position,
        heading: c.heading,
        action: c.action,
        speed: c.speed,
    }
}

/// Fixed-step simulation of a scene for `frames` frames at `fps`.
/// Frame 0 is the authored initial state.
pub fn simulate(
    scene: &SceneInstance,
    catalog: &AssetCatalog,
    frames: usize,
    fps: f64,
    options: &SimOptions,
) -> Result<SimulationOutput, DynamicsError> {
    if frames == 0 {
        return Err(DynamicsError::EmptyMotion);
    }
    if !(fps > 0.0) {
        return Err(DynamicsError::BadFps);
    }
    let state = SceneState::from_scene(scene, catalog)?;
    let dt = 1.0 / fps;

    let mut motions = Vec::with_capacity(state.groups.len());
    let mut trace_persons = Vec::new();
    let mut per_group_samples: Vec<Vec<PersonFrame>> = Vec::new();
    for mut group in state.groups {
        let p = group.characters.len();
        let mut samples = Vec::with_capacity(frames * p);
        let mut poses: Vec<Vec<[Vec3; JOINT_COUNT]>> = vec![Vec::with_capacity(frames); p];
        for t in 0..frames {
            if t > 0 {
                step_group(&mut group, dt, options);
            }
            for (k, c) in group.characters.iter().enumerate() {
                samples.push(snapshot(c));
                if options.joint_block {
                    poses[k].push(world_pose(
                        c.action,
                        c.phase,
                        c.height,
                        &c.position,
                        c.heading,
                    ));
                }
            }
        }
        let joints = options.joint_block.then(|| joint_block(&poses, fps));
        for c in &group.characters {
            trace_persons.push(PersonInfo {
                person_id: c.person_id,
                group_id: group.group_id,
                activity: group.activity,
                height: c.height,
                body_radius: c.body_radius,
            });
        }
        per_group_samples.push(samples.clone());
        motions.push(GroupMotion::new(
            group.activity,
            group.group_id,
            scene.seed,
            fps,
            frames,
            group.characters.iter().map(|c| c.person_id).collect(),
            samples,
            joints,
        )?);
    }

    let total = trace_persons.len();
    let mut trace_samples = Vec::with_capacity(frames * total);
    for t in 0..frames {
        for (g, m) in per_group_samples.iter().zip(&motions) {
            let p = m.persons();
            trace_samples.extend_from_slice(&g[t * p..(t + 1) * p]);
        }
    }
    Ok(SimulationOutput {
        motions,
        trace: SceneTrace {
            fps,
            frames,
            persons: trace_persons,
            samples: trace_samples,
        },
    })
}

/// Flatten per-person pose sequences into position + finite-difference
/// velocity features, person-major.
fn joint_block(poses: &[Vec<[Vec3; JOINT_COUNT]>], fps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for seq in poses {
        let t_len = seq.len();
        for t in 0..t_len {
            for (j, &p) in seq[t].iter().enumerate() {
                let v = if t_len < 2 {
                    Vec3::zeros()
                } else if t + 1 < t_len {
                    (seq[t + 1][j] - p) * fps
                } else {
                    (p - seq[t - 1][j]) * fps
                };
                out.extend_from_slice(&[p.x, p.y, p.z, v.x, v.y, v.z]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::WALK_SPEED;

    pub(crate) fn walker(
        id: u32,
        pos: Vec3,
        heading: f64,
        speed: f64,
        init: f64,
    ) -> CharacterState {
        CharacterState {
            person_id: id,
            group_id: 1,
            position: pos,
            heading,
            init_speed: init,
            speed,
            action: AtomicAction::Walk,
            clip: "clip_walk_00".into(),
            phase: 0.0,
            body_radius: 0.225,
            height: 1.7,
            locomotion: Locomotion {
                nominal_speed: WALK_SPEED,
                stride_factor: 1.0,
                cycle_length: 1.1,
            },
        }
    }

    #[test]
    fn speed_rule_examples() {
        let p = SpeedAdjustParams::default();
        let ahead = vec![
            walker(1, Vec3::zeros(), 0.0, 1.0, 1.0),
            walker(2, Vec3::new(0.0, 0.0, 0.5), 0.0, 1.0, 1.0),
        ];
        assert_eq!(adjust_speeds(&ahead, &p)[0], 0.96);

        let floored = vec![
            walker(1, Vec3::zeros(), 0.0, 0.1, 1.0),
            walker(2, Vec3::new(0.0, 0.0, 0.5), 0.0, 1.0, 1.0),
        ];
        assert_eq!(adjust_speeds(&floored, &p)[0], 0.1);

        let behind = vec![
            walker(1, Vec3::zeros(), 0.0, 0.96, 1.0),
            walker(2, Vec3::new(0.0, 0.0, -0.5), 0.0, 1.0, 1.0),
        ];
        assert!((adjust_speeds(&behind, &p)[0] - 0.9888).abs() < 1e-12);

        let alone = vec![
            walker(1, Vec3::zeros(), 0.0, 0.995, 1.0),
            walker(2, Vec3::new(0.0, 0.0, 3.0), 0.0, 1.0, 1.0),
        ];
        assert_eq!(adjust_speeds(&alone, &p)[0], 1.0);
    }

    #[test]
    fn angle_boundary_inclusive() {
        let p = SpeedAdjustParams::default();
        let off = crate::geometry::forward(60.0) * 0.5;
        let s = vec![
            walker(1, Vec3::zeros(), 0.0, 1.0, 1.0),
            walker(2, off, 0.0, 1.0, 1.0),
        ];
        // 60° exactly is within the cone, up to rounding of acos
        let out = adjust_speeds(&s, &p);
        assert!(out[0] == 0.96 || (angle_between_deg(&Vec3::z(), &off) - 60.0).abs() < 1e-9);
        let wide = crate::geometry::forward(61.0) * 0.5;
        let s = vec![
            walker(1, Vec3::zeros(), 0.0, 0.5, 1.0),
            walker(2, wide, 0.0, 1.0, 1.0),
        ];
        assert_eq!(adjust_speeds(&s, &p)[0], 0.5 * 1.03);
    }

    #[test]
    fn walker_displacement_per_step() {
        let mut g = GroupState {
            group_id: 1,
            activity: GroupActivity::Walking,
            speed_adjusted: true,
            characters: vec![walker(1, Vec3::zeros(), 0.0, 1.0, 1.0)],
        };
        step_group(&mut g, 0.05, &SimOptions::default());
        let c = &g.characters[0];
        assert!((c.position - Vec3::new(0.0, 0.0, 0.07)).norm() < 1e-15);
        assert!((c.phase - 0.05 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn idle_does_not_move() {
        let mut c = walker(1, Vec3::new(1.0, 0.0, 2.0), 30.0, 1.0, 1.0);
        c.action = AtomicAction::Idle;
        c.locomotion.nominal_speed = 0.0;
        let mut g = GroupState {
            group_id: 1,
            activity: GroupActivity::Waiting,
            speed_adjusted: false,
            characters: vec![c.clone()],
        };
        for _ in 0..100 {
            step_group(&mut g, 0.5, &SimOptions::default());
        }
        assert_eq!(g.characters[0].position, c.position);
    }

    #[test]
    fn motion_validation() {
        assert_eq!(
            GroupMotion::from_positions(GroupActivity::Talking, 20.0, &[]).unwrap_err(),
            DynamicsError::EmptyMotion
        );
        let m = GroupMotion::from_positions(
            GroupActivity::Talking,
            20.0,
            &vec![vec![Vec3::zeros(), Vec3::x()]; 3],
        )
        .unwrap();
        assert_eq!((m.frames(), m.persons()), (3, 2));
        assert!(GroupMotion::new(
            GroupActivity::Talking,
            1,
            0,
            20.0,
            3,
            vec![1],
            m.samples().to_vec(),
            None
        )
        .is_err());
    }
}
