//! Group-activity authoring: formation shapes, facing rules, placement
//! jitter, action assignment and multi-group scene layout.
//!
//! Formations are built in a group-local frame (members spread along local
//! x, group forward is local +z, centroid at the origin) and moved into the
//! world by the group's yaw and center.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{place_cameras, CameraError, CameraModel};
use crate::catalog::{AssetCatalog, AtomicAction, CatalogError};
use crate::config::{PerturbConfig, SimulationConfig};
use crate::geometry::{centroid, heading_of, normalize_degrees, rotate_yaw, Vec3};
use crate::randomization::{RandomError, RngStream};

/// Half-width of the square in which group centers are drawn, meters.
pub const PLACEMENT_HALF_EXTENT: f64 = 20.0;
/// Margin added to a formation's radius when checking group overlap.
pub const GROUP_DISC_MARGIN: f64 = 1.0;
pub const MAX_PLACEMENT_TRIES: usize = 100;
/// Height above ground at which cameras aim.
pub const CAMERA_TARGET_HEIGHT: f64 = 1.0;

#[derive(Debug, Error)]
pub enum AuthoringError {
    #[error("formation needs at least one character")]
    InvalidCount,
    #[error("character interval must be positive, got {0}")]
    InvalidInterval(f64),
    #[error("activity {0} allows no atomic actions")]
    EmptyAllowedActions(GroupActivity),
    #[error("no clip in the catalog plays `{0}`")]
    NoClip(AtomicAction),
    #[error("group {group} could not be placed without overlap after {tries} tries")]
    PlacementFailure { group: usize, tries: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Random(#[from] RandomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupActivity {
    Walking,
    Waiting,
    Queueing,
    Talking,
    Dancing,
    Jogging,
}

impl GroupActivity {
    pub const ALL: [GroupActivity; 6] = [
        GroupActivity::Walking,
        GroupActivity::Waiting,
        GroupActivity::Queueing,
        GroupActivity::Talking,
        GroupActivity::Dancing,
        GroupActivity::Jogging,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupActivity::Walking => "Walking",
            GroupActivity::Waiting => "Waiting",
            GroupActivity::Queueing => "Queueing",
            GroupActivity::Talking => "Talking",
            GroupActivity::Dancing => "Dancing",
            GroupActivity::Jogging => "Jogging",
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// Authoring rules for this activity.
    pub fn spec(self) -> GroupActivitySpec {
        use AlignmentShape::*;
        use AtomicAction as A;
        let (allowed_alignments, face_rule, allowed_actions) = match self {
            GroupActivity::Walking => (
                vec![StraightLine, Circle, Rectangle],
                FaceRule::SameDirection,
                vec![A::Walk],
            ),
            GroupActivity::Waiting => (
                vec![MultiRowLines],
                FaceRule::SameDirection,
                vec![A::Idle, A::Text, A::Talk, A::Point, A::Wave],
            ),
            GroupActivity::Queueing => (
                vec![StraightLine, OneCornerLine, TwoCornerLine, Parabola, Curve],
                FaceRule::FrontOfQueue,
                vec![A::Idle, A::Text, A::Talk, A::Point],
            ),
            GroupActivity::Talking => (vec![Circle], FaceRule::GroupCenter, vec![A::Talk]),
            GroupActivity::Dancing => {
                (vec![MultiRowLines], FaceRule::SameDirection, vec![A::Dance])
            }
            GroupActivity::Jogging => (
                vec![StraightLine, Circle, Rectangle],
                FaceRule::SameDirection,
                vec![A::Run],
            ),
        };
        GroupActivitySpec {
            activity: self,
            allowed_alignments,
            face_rule,
            allowed_actions,
            dynamic_speed_adjust: matches!(self, GroupActivity::Walking | GroupActivity::Jogging),
            synchronous: self == GroupActivity::Dancing,
        }
    }
}

impl fmt::Display for GroupActivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupActivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown group activity `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignmentShape {
    StraightLine,
    MultiRowLines,
    Circle,
    Rectangle,
    OneCornerLine,
    TwoCornerLine,
    Parabola,
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceRule {
    SameDirection,
    FrontOfQueue,
    GroupCenter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupActivitySpec {
    pub activity: GroupActivity,
    pub allowed_alignments: Vec<AlignmentShape>,
    pub face_rule: FaceRule,
    pub allowed_actions: Vec<AtomicAction>,
    pub dynamic_speed_adjust: bool,
    pub synchronous: bool,
}

impl GroupActivitySpec {
    /// Whether adjacent pairs may split off into talking subgroups.
    pub fn allows_talk_subgroups(&self) -> bool {
        matches!(
            self.activity,
            GroupActivity::Queueing | GroupActivity::Waiting
        ) && self.allowed_actions.contains(&AtomicAction::Talk)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub position: Vec3,
    /// Yaw in [0, 360) degrees.
    pub heading: f64,
}

impl Placement {
    fn at(x: f64, z: f64) -> Self {
        Self {
            position: Vec3::new(x, 0.0, z),
            heading: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    /// 1-based, unique within a scene.
    pub person_id: u32,
    pub character_id: String,
    pub placement: Placement,
    pub action: AtomicAction,
    pub clip_id: String,
    pub animation_speed_factor: f64,
    /// Starting point in the clip cycle, [0, 1).
    pub phase_offset: f64,
    /// Style blend weight, metadata only.
    pub blend: f64,
    pub body_color_rgba: [f64; 4],
    pub clothes_color_hsv: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupInstance {
    pub group_id: u32,
    pub activity: GroupActivity,
    pub alignment: AlignmentShape,
    pub interval: f64,
    pub center: Vec3,
    pub group_heading: f64,
    /// Largest member distance from the center.
    pub formation_radius: f64,
    pub members: Vec<Member>,
    /// Member-index pairs forming talking subgroups.
    pub subgroups: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightType {
    Directional,
    Point,
    Spot,
}

/// Light placement; recorded as scene metadata only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightRecord {
    pub light_type: LightType,
    pub position: Vec3,
    pub intensity: f64,
    /// Ground point the light faces.
    pub target: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneInstance {
    pub seed: u64,
    pub scene_asset: String,
    pub hdri: String,
    pub lighting_volume: String,
    pub lights: Vec<LightRecord>,
    pub groups: Vec<GroupInstance>,
    pub cameras: Vec<CameraModel>,
}

impl SceneInstance {
    pub fn person_count(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }
}

fn check_formation(n: usize, interval: f64) -> Result<(), AuthoringError> {
    if n == 0 {
        return Err(AuthoringError::InvalidCount);
    }
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(AuthoringError::InvalidInterval(interval));
    }
    Ok(())
}

fn recenter(mut pts: Vec<Placement>) -> Vec<Placement> {
    let c = centroid(pts.iter().map(|p| &p.position));
    for p in &mut pts {
        p.position -= c;
    }
    pts
}

/// Walk a polyline from the origin, turning 90° after each listed index.
fn cornered_line(n: usize, interval: f64, corners: &[(usize, f64)]) -> Vec<Placement> {
    let mut dir = Vec3::x();
    let mut pos = Vec3::zeros();
    let mut out = vec![Placement::at(0.0, 0.0)];
    for k in 1..n {
        if let Some((_, turn)) = corners.iter().find(|(at, _)| *at + 1 == k) {
            dir = rotate_yaw(&dir, 90.0 * turn);
        }
        pos += dir * interval;
        out.push(Placement::at(pos.x, pos.z));
    }
    out
}

/// Arc length of `z = a x²` from the vertex to `x`.
fn parabola_arc(a: f64, x: f64) -> f64 {
    let q = 2.0 * a * x;
    (x * (1.0 + q * q).sqrt()) / 2.0 + q.asinh() / (4.0 * a)
}

fn parabola_x_at_arc(a: f64, s: f64) -> f64 {
    let mut x = s;
    for _ in 0..100 {
        let f = parabola_arc(a, x) - s;
        let df = (1.0 + 4.0 * a * a * x * x).sqrt();
        let step = f / df;
        x -= step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

fn cubic_bezier(p: &[Vec3; 4], t: f64) -> Vec3 {
    let u = 1.0 - t;
    p[0] * (u * u * u) + p[1] * (3.0 * u * u * t) + p[2] * (3.0 * u * t * t) + p[3] * (t * t * t)
}

const BEZIER_SAMPLES: usize = 4096;

fn bezier_by_arc_length(ctrl: &[Vec3; 4], n: usize, interval: f64) -> Vec<Placement> {
    let samples: Vec<Vec3> = (0..=BEZIER_SAMPLES)
        .map(|i| cubic_bezier(ctrl, i as f64 / BEZIER_SAMPLES as f64))
        .collect();
    let mut cumulative = Vec::with_capacity(samples.len());
    cumulative.push(0.0);
    for w in samples.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + (w[1] - w[0]).norm());
    }
    (0..n)
        .map(|k| {
            let s = k as f64 * interval;
            let i = cumulative
                .partition_point(|c| *c < s)
                .clamp(1, samples.len() - 1);
            let (s0, s1) = (cumulative[i - 1], cumulative[i]);
            let t = if s1 > s0 {
                ((s - s0) / (s1 - s0)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let p = samples[i - 1] + (samples[i] - samples[i - 1]) * t;
            Placement::at(p.x, p.z)
        })
        .collect()
}

/// Place `n` members in the shape, centroid at the local origin, all
/// headings 0. No jitter is applied here.
pub fn align(
    shape: AlignmentShape,
    n: usize,
    interval: f64,
    rng: &mut RngStream,
) -> Result<Vec<Placement>, AuthoringError> {
    check_formation(n, interval)?;
    if n == 1 {
        return Ok(vec![Placement::at(0.0, 0.0)]);
    }
    let pts = match shape {
        AlignmentShape::StraightLine => (0..n)
            .map(|k| Placement::at(k as f64 * interval, 0.0))
            .collect(),
        AlignmentShape::Circle => {
            let radius = n as f64 * interval / (2.0 * PI);
            let pts = (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    Placement::at(radius * a.cos(), radius * a.sin())
                })
                .collect();
            // exact symmetry already puts the centroid at the origin
            return Ok(pts);
        }
        AlignmentShape::Rectangle => {
            if n < 4 {
                return align(AlignmentShape::StraightLine, n, interval, rng);
            }
            let perimeter = n as f64 * interval;
            // keeps the short side at least one interval long
            let max_aspect = (n as f64 / 2.0 - 1.0).min(2.0);
            let aspect = rng.sample_real(1.0, max_aspect)?;
            let short = perimeter / (2.0 * (1.0 + aspect));
            let long = aspect * short;
            let corners = [
                Vec3::zeros(),
                Vec3::new(long, 0.0, 0.0),
                Vec3::new(long, 0.0, short),
                Vec3::new(0.0, 0.0, short),
            ];
            let sides = [long, short, long, short];
            (0..n)
                .map(|k| {
                    let mut s = k as f64 * interval;
                    let mut side = 0;
                    while side < 3 && s > sides[side] {
                        s -= sides[side];
                        side += 1;
                    }
                    let a = corners[side];
                    let b = corners[(side + 1) % 4];
                    let p = a + (b - a) * (s / sides[side]).min(1.0);
                    Placement::at(p.x, p.z)
                })
                .collect()
        }
        AlignmentShape::MultiRowLines => {
            let per_row = (n as f64).sqrt().ceil() as usize;
            (0..n)
                .map(|k| {
                    let (row, col) = (k / per_row, k % per_row);
                    Placement::at(col as f64 * interval, -(row as f64) * interval)
                })
                .collect()
        }
        AlignmentShape::OneCornerLine => {
            if n < 3 {
                return align(AlignmentShape::StraightLine, n, interval, rng);
            }
            let at = rng.sample_int(1, n as i64 - 2)? as usize;
            let turn = if rng.sample_int(0, 1)? == 0 {
                -1.0
            } else {
                1.0
            };
            cornered_line(n, interval, &[(at, turn)])
        }
        AlignmentShape::TwoCornerLine => {
            if n < 4 {
                return align(AlignmentShape::OneCornerLine, n, interval, rng);
            }
            let first = rng.sample_int(1, n as i64 - 3)? as usize;
            let second = rng.sample_int(first as i64 + 1, n as i64 - 2)? as usize;
            let t1 = if rng.sample_int(0, 1)? == 0 {
                -1.0
            } else {
                1.0
            };
            let t2 = if rng.sample_int(0, 1)? == 0 {
                -1.0
            } else {
                1.0
            };
            cornered_line(n, interval, &[(first, t1), (second, t2)])
        }
        AlignmentShape::Parabola => {
            let a = rng.sample_real(0.05, 0.3)?;
            let half = (n as f64 - 1.0) / 2.0;
            (0..n)
                .map(|k| {
                    let x = parabola_x_at_arc(a, (k as f64 - half) * interval);
                    Placement::at(x, a * x * x)
                })
                .collect()
        }
        AlignmentShape::Curve => {
            let extent = (n as f64 - 1.0) * interval;
            let bound = extent / 3.0;
            let mut ctrl = [Vec3::zeros(); 4];
            for (i, c) in ctrl.iter_mut().enumerate().skip(1) {
                *c = Vec3::new(
                    extent * i as f64 / 3.0,
                    0.0,
                    rng.sample_real(-bound, bound)?,
                );
            }
            bezier_by_arc_length(&ctrl, n, interval)
        }
    };
    Ok(recenter(pts))
}

/// Assign headings by the facing rule. `group_heading` is the shared
/// direction for [`FaceRule::SameDirection`] and the fallback for members
/// with no defined direction.
pub fn apply_face_rule(
    mut placements: Vec<Placement>,
    rule: FaceRule,
    group_heading: f64,
) -> Vec<Placement> {
    let group_heading = normalize_degrees(group_heading);
    match rule {
        FaceRule::SameDirection => {
            for p in &mut placements {
                p.heading = group_heading;
            }
        }
        FaceRule::GroupCenter => {
            let c = centroid(placements.iter().map(|p| &p.position));
            for p in &mut placements {
                let d = c - p.position;
                p.heading = if d.norm() < 1e-9 {
                    group_heading
                } else {
                    heading_of(&d)
                };
            }
        }
        FaceRule::FrontOfQueue => {
            let positions: Vec<Vec3> = placements.iter().map(|p| p.position).collect();
            for (i, p) in placements.iter_mut().enumerate() {
                let d = match i {
                    0 if positions.len() > 1 => positions[0] - positions[1],
                    0 => Vec3::zeros(),
                    _ => positions[i - 1] - positions[i],
                };
                p.heading = if d.norm() < 1e-9 {
                    group_heading
                } else {
                    heading_of(&d)
                };
            }
        }
    }
    placements
}

/// Independent per-member jitter of ground position and heading.
pub fn perturb(
    mut placements: Vec<Placement>,
    interval: f64,
    scale: &PerturbConfig,
    rng: &mut RngStream,
) -> Result<Vec<Placement>, AuthoringError> {
    if !(interval > 0.0) {
        return Err(AuthoringError::InvalidInterval(interval));
    }
    let dp = scale.position_fraction * interval;
    let dh = scale.heading_degrees;
    for p in &mut placements {
        p.position.x += rng.sample_real(-dp, dp)?;
        p.position.z += rng.sample_real(-dp, dp)?;
        p.heading = normalize_degrees(p.heading + rng.sample_real(-dh, dh)?);
    }
    Ok(placements)
}

/// Members plus the talking subgroups carved out of the formation.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub members: Vec<Member>,
    pub subgroups: Vec<(usize, usize)>,
}

/// Draw actions, clips and animation parameters for every placement.
pub fn assign_actions(
    spec: &GroupActivitySpec,
    placements: Vec<Placement>,
    rng: &mut RngStream,
    catalog: &AssetCatalog,
) -> Result<Assignment, AuthoringError> {
    let k = if spec.allows_talk_subgroups() {
        Some(rng.sample_int(0, (placements.len() / 2) as i64)? as usize)
    } else {
        None
    };
    assign_actions_with_subgroups(spec, placements, k.unwrap_or(0), rng, catalog)
}

/// [`assign_actions`] with a fixed number of talking pairs. The count is
/// ignored for activities without subgroups.
pub fn assign_actions_with_subgroups(
    spec: &GroupActivitySpec,
    mut placements: Vec<Placement>,
    subgroup_count: usize,
    rng: &mut RngStream,
    catalog: &AssetCatalog,
) -> Result<Assignment, AuthoringError> {
    if spec.allowed_actions.is_empty() {
        return Err(AuthoringError::EmptyAllowedActions(spec.activity));
    }
    let n = placements.len();
    let pick_clip = |action: AtomicAction, rng: &mut RngStream| -> Result<usize, AuthoringError> {
        let clips = catalog.clips_for(action);
        if clips.is_empty() {
            return Err(AuthoringError::NoClip(action));
        }
        Ok(clips[rng.sample_index(clips.len())])
    };

    let chosen = if catalog.characters.len() >= n {
        rng.sample_distinct(catalog.characters.len(), n)
    } else {
        (0..n)
            .map(|_| rng.sample_index(catalog.characters.len()))
            .collect()
    };

    let mut actions = Vec::with_capacity(n);
    let mut clips = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    if spec.synchronous {
        let action = *rng.sample_choice(&spec.allowed_actions, None)?;
        let clip = pick_clip(action, rng)?;
        let speed = rng.sample_real(0.8, 1.2)?;
        for _ in 0..n {
            actions.push(action);
            clips.push(clip);
            speeds.push(speed);
            phases.push(rng.sample_real(0.0, 0.1)?);
        }
    } else {
        for _ in 0..n {
            let action = *rng.sample_choice(&spec.allowed_actions, None)?;
            actions.push(action);
            clips.push(pick_clip(action, rng)?);
            speeds.push(rng.sample_real(0.8, 1.2)?);
            phases.push(rng.sample_real(0.0, 1.0)?);
        }
    }

    let mut subgroups = Vec::new();
    if spec.allows_talk_subgroups() && subgroup_count > 0 {
        let mut pair_slots = rng.sample_distinct(n / 2, subgroup_count);
        pair_slots.sort_unstable();
        for slot in pair_slots {
            let (a, b) = (2 * slot, 2 * slot + 1);
            for m in [a, b] {
                actions[m] = AtomicAction::Talk;
                clips[m] = pick_clip(AtomicAction::Talk, rng)?;
            }
            let ab = placements[b].position - placements[a].position;
            if ab.norm() > 1e-9 {
                placements[a].heading = heading_of(&ab);
                placements[b].heading = heading_of(&-ab);
            }
            subgroups.push((a, b));
        }
    }

    let mut members = Vec::with_capacity(n);
    for (i, placement) in placements.into_iter().enumerate() {
        let body = [
            rng.sample_real(0.4, 1.0)?,
            rng.sample_real(0.4, 1.0)?,
            rng.sample_real(0.4, 1.0)?,
            rng.sample_real(0.6, 1.0)?,
        ];
        let clothes = [
            rng.sample_real(0.0, 1.0)?,
            rng.sample_real(0.0, 1.0)?,
            rng.sample_real(0.4, 1.0)?,
        ];
        members.push(Member {
            person_id: 0,
            character_id: catalog.characters[chosen[i]].id.clone(),
            placement,
            action: actions[i],
            clip_id: catalog.clips[clips[i]].id.clone(),
            animation_speed_factor: speeds[i],
            phase_offset: phases[i],
            blend: rng.sample_real(0.0, 1.0)?,
            body_color_rgba: body,
            clothes_color_hsv: clothes,
        });
    }
    Ok(Assignment { members, subgroups })
}

/// Knobs for authoring one group outside of a full scene.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRequest {
    pub activity: GroupActivity,
    pub size: usize,
    pub interval: f64,
    pub alignment: Option<AlignmentShape>,
    pub perturbation: PerturbConfig,
}

/// align → face → perturb → assign, in the group-local frame.
pub fn author_group(
    request: &GroupRequest,
    catalog: &AssetCatalog,
    rng: &RngStream,
) -> Result<(AlignmentShape, Assignment), AuthoringError> {
    let spec = request.activity.spec();
    let alignment = match request.alignment {
        Some(a) => a,
        None => *rng
            .child("alignment")
            .sample_choice(&spec.allowed_alignments, None)?,
    };
    let placements = align(
        alignment,
        request.size,
        request.interval,
        &mut rng.child("formation"),
    )?;
    let placements = apply_face_rule(placements, spec.face_rule, 0.0);
    let placements = perturb(
        placements,
        request.interval,
        &request.perturbation,
        &mut rng.child("perturb"),
    )?;
    let assignment = assign_actions(&spec, placements, &mut rng.child("actions"), catalog)?;
    Ok((alignment, assignment))
}

fn to_world(members: &mut [Member], center: &Vec3, heading: f64) {
    for m in members {
        m.placement.position = rotate_yaw(&m.placement.position, heading) + center;
        m.placement.heading = normalize_degrees(m.placement.heading + heading);
    }
}

/// Sample one full scene: assets, lights, groups and cameras.
pub fn instantiate_scene(
    config: &SimulationConfig,
    catalog: &AssetCatalog,
    rng: &RngStream,
) -> Result<SceneInstance, AuthoringError> {
    let mut assets = rng.child("scene/assets");
    let scene_asset = assets.sample_choice(&catalog.scenes, None)?.clone();
    let hdri = assets.sample_choice(&catalog.hdris, None)?.clone();
    let lighting_volume = assets
        .sample_choice(&catalog.lighting_volumes, None)?
        .clone();

    let mut light_rng = rng.child("scene/lights");
    let n_lights = light_rng.sample_int(1, 3)? as usize;
    let lights = (0..n_lights)
        .map(|_| {
            let light_type = *light_rng.sample_choice(
                &[LightType::Directional, LightType::Point, LightType::Spot],
                None,
            )?;
            let position = Vec3::new(
                light_rng.sample_real(-20.0, 20.0)?,
                light_rng.sample_real(5.0, 10.0)?,
                light_rng.sample_real(-20.0, 20.0)?,
            );
            let intensity = light_rng.sample_real(0.5, 3.0)?;
            let target = Vec3::new(
                light_rng.sample_real(-50.0, 50.0)?,
                0.0,
                light_rng.sample_real(-50.0, 50.0)?,
            );
            Ok(LightRecord {
                light_type,
                position,
                intensity,
                target,
            })
        })
        .collect::<Result<Vec<_>, RandomError>>()?;

    let n_groups = rng
        .child("scene/group_count")
        .sample_int(1, config.max_groups as i64)? as usize;
    let weights = config.activity_weights.as_vec();
    let mut groups: Vec<GroupInstance> = Vec::with_capacity(n_groups);
    let mut next_person = 1u32;
    for g in 0..n_groups {
        let grng = rng.child_indexed("group", g);
        let activity = GroupActivity::ALL[grng
            .child("activity")
            .sample_choice_index(GroupActivity::ALL.len(), Some(&weights))?];
        let size = grng
            .child("size")
            .sample_int(config.min_characters as i64, config.max_characters as i64)?
            as usize;
        let interval = grng
            .child("interval")
            .sample_real(config.min_interval, config.max_interval)?;
        let request = GroupRequest {
            activity,
            size,
            interval,
            alignment: None,
            perturbation: config.perturbation.clone(),
        };
        let (alignment, mut assignment) = author_group(&request, catalog, &grng)?;
        let formation_radius = assignment
            .members
            .iter()
            .map(|m| m.placement.position.norm())
            .fold(0.0, f64::max);
        let group_heading = grng.child("rotation").sample_real(0.0, 360.0)?;

        let mut center_rng = grng.child("center");
        let mut center = None;
        for _ in 0..MAX_PLACEMENT_TRIES {
            let c = Vec3::new(
                center_rng.sample_real(-PLACEMENT_HALF_EXTENT, PLACEMENT_HALF_EXTENT)?,
                0.0,
                center_rng.sample_real(-PLACEMENT_HALF_EXTENT, PLACEMENT_HALF_EXTENT)?,
            );
            let clear = groups.iter().all(|other| {
                (other.center - c).norm()
                    >= formation_radius + other.formation_radius + 2.0 * GROUP_DISC_MARGIN
            });
            if clear {
                center = Some(c);
                break;
            }
        }
        let center = center.ok_or(AuthoringError::PlacementFailure {
            group: g,
            tries: MAX_PLACEMENT_TRIES,
        })?;

        to_world(&mut assignment.members, &center, group_heading);
        for m in &mut assignment.members {
            m.person_id = next_person;
            next_person += 1;
        }
        groups.push(GroupInstance {
            group_id: g as u32 + 1,
            activity,
            alignment,
            interval,
            center,
            group_heading,
            formation_radius,
            members: assignment.members,
            subgroups: assignment.subgroups,
        });
    }

    let mut target = centroid(groups.iter().map(|g| &g.center));
    target.y = CAMERA_TARGET_HEIGHT;
    let cameras = place_cameras(
        &target,
        config.n_views,
        (config.image_width, config.image_height),
        &rng.child("scene/cameras"),
    )?;

    Ok(SceneInstance {
        seed: rng.seed(),
        scene_asset,
        hdri,
        lighting_volume,
        lights,
        groups,
        cameras,
    })
}
