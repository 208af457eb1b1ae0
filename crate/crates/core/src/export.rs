//! Dataset writers and readers: MOT-style tracking ground truth, COCO-style
//! detection annotations, binary 3D motion files, scene descriptions, and
//! dataset statistics.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::authoring::{GroupActivity, SceneInstance};
use crate::camera::{project_block, CameraModel};
use crate::catalog::AtomicAction;
use crate::dynamics::{DynamicsError, GroupMotion, PersonFrame, SceneTrace};
use crate::geometry::Vec3;
use crate::skeleton::{FEATURES_PER_JOINT, JOINT_COUNT, JOINT_NAMES};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("records must be sorted by (frame, person_id)")]
    Unsorted,
    #[error(transparent)]
    Motion(#[from] DynamicsError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> ExportError + '_ {
    move |source| ExportError::Json {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> ExportError {
    ExportError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// One person in one frame of one view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    /// 1-based.
    pub frame: usize,
    pub person_id: u32,
    pub group_id: u32,
    /// left, top, width, height in pixels.
    pub bbox: [f64; 4],
    pub action: AtomicAction,
    pub activity: GroupActivity,
    pub visibility: f64,
}

/// Boxes of every character in the camera's view, sorted by (frame, id).
pub fn annotate_view(trace: &SceneTrace, cam: &CameraModel) -> Vec<AnnotationRecord> {
    let mut out = Vec::new();
    for t in 0..trace.frames {
        let frame = trace.frame(t);
        let mut rows: Vec<AnnotationRecord> = trace
            .persons
            .iter()
            .zip(frame)
            .filter_map(|(info, s)| {
                let bbox = project_block(cam, &s.position, info.body_radius, info.height)?;
                Some(AnnotationRecord {
                    frame: t + 1,
                    person_id: info.person_id,
                    group_id: info.group_id,
                    bbox,
                    action: s.action,
                    activity: info.activity,
                    visibility: 1.0,
                })
            })
            .collect();
        rows.sort_by_key(|r| r.person_id);
        out.extend(rows);
    }
    out
}

fn check_sorted(records: &[AnnotationRecord]) -> Result<(), ExportError> {
    if records
        .windows(2)
        .all(|w| (w[0].frame, w[0].person_id) < (w[1].frame, w[1].person_id))
    {
        Ok(())
    } else {
        Err(ExportError::Unsorted)
    }
}

/// Render MOT ground-truth lines:
/// `frame,id,bb_left,bb_top,bb_width,bb_height,1,1,1.0`.
pub fn mot_lines(records: &[AnnotationRecord]) -> Result<String, ExportError> {
    check_sorted(records)?;
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3},{:.3},1,1,1.0\n",
            r.frame, r.person_id, r.bbox[0], r.bbox[1], r.bbox[2], r.bbox[3]
        ));
    }
    Ok(out)
}

pub fn write_mot(records: &[AnnotationRecord], path: &Path) -> Result<(), ExportError> {
    let text = mot_lines(records)?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// A parsed MOT ground-truth line.
#[derive(Clone, Debug, PartialEq)]
pub struct MotRow {
    pub frame: usize,
    pub id: u32,
    pub bbox: [f64; 4],
    pub confidence: f64,
    pub class: u32,
    pub visibility: f64,
}

pub fn read_mot(path: &Path) -> Result<Vec<MotRow>, ExportError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format_err(
                path,
                format!("line {}: expected 9 fields", n + 1),
            ));
        }
        let bad = |what: &str| format_err(path, format!("line {}: bad {what}", n + 1));
        let real = |i: usize| fields[i].trim().parse::<f64>().map_err(|_| bad("number"));
        rows.push(MotRow {
            frame: fields[0].trim().parse().map_err(|_| bad("frame"))?,
            id: fields[1].trim().parse().map_err(|_| bad("id"))?,
            bbox: [real(2)?, real(3)?, real(4)?, real(5)?],
            confidence: real(6)?,
            class: fields[7].trim().parse().map_err(|_| bad("class"))?,
            visibility: real(8)?,
        });
    }
    Ok(rows)
}

pub const ACTION_CATEGORY_BASE: u32 = 1;
pub const ACTIVITY_CATEGORY_BASE: u32 = 101;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoInfo {
    pub description: String,
    pub sim_id: String,
    pub view: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub frame: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    /// Atomic-action category.
    pub category_id: u32,
    /// Group-activity category.
    pub activity_id: u32,
    pub bbox: [f64; 4],
    pub area: f64,
    pub iscrowd: u8,
    pub track_id: u32,
    pub group_id: u32,
    pub visibility: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
    pub supercategory: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocoDocument {
    pub info: CocoInfo,
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

pub fn coco_categories() -> Vec<CocoCategory> {
    let actions = AtomicAction::ALL.iter().map(|a| CocoCategory {
        id: ACTION_CATEGORY_BASE + a.index() as u32,
        name: a.name().to_string(),
        supercategory: "atomic_action".into(),
    });
    let activities = GroupActivity::ALL.iter().map(|a| CocoCategory {
        id: ACTIVITY_CATEGORY_BASE + a.index() as u32,
        name: a.name().to_string(),
        supercategory: "group_activity".into(),
    });
    actions.chain(activities).collect()
}

/// Which simulation and view a COCO document describes. Ids are derived
/// from these so documents written in parallel never collide.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMeta {
    pub sim_index: usize,
    pub sim_id: String,
    pub view: usize,
    pub frames: usize,
    pub image_size: (u32, u32),
    pub seed: u64,
}

const ID_VIEW_SHIFT: u32 = 24;
const ID_SIM_SHIFT: u32 = 32;

impl FrameMeta {
    fn id_base(&self) -> u64 {
        ((self.sim_index as u64) << ID_SIM_SHIFT) | ((self.view as u64) << ID_VIEW_SHIFT)
    }
}

pub fn coco_document(
    records: &[AnnotationRecord],
    meta: &FrameMeta,
) -> Result<CocoDocument, ExportError> {
    check_sorted(records)?;
    let base = meta.id_base();
    let images = (1..=meta.frames)
        .map(|frame| CocoImage {
            id: base | frame as u64,
            file_name: format!("{}/view_{:02}/{:06}.png", meta.sim_id, meta.view, frame),
            width: meta.image_size.0,
            height: meta.image_size.1,
            frame,
        })
        .collect();
    let annotations = records
        .iter()
        .enumerate()
        .map(|(i, r)| CocoAnnotation {
            id: base | (i as u64 + 1),
            image_id: base | r.frame as u64,
            category_id: ACTION_CATEGORY_BASE + r.action.index() as u32,
            activity_id: ACTIVITY_CATEGORY_BASE + r.activity.index() as u32,
            bbox: r.bbox,
            area: r.bbox[2] * r.bbox[3],
            iscrowd: 0,
            track_id: r.person_id,
            group_id: r.group_id,
            visibility: r.visibility,
        })
        .collect();
    Ok(CocoDocument {
        info: CocoInfo {
            description: "groupsim synthetic group activity annotations".into(),
            sim_id: meta.sim_id.clone(),
            view: meta.view,
            seed: meta.seed,
        },
        images,
        annotations,
        categories: coco_categories(),
    })
}

pub fn write_coco(
    records: &[AnnotationRecord],
    meta: &FrameMeta,
    path: &Path,
) -> Result<(), ExportError> {
    let doc = coco_document(records, meta)?;
    let bytes = serde_json::to_vec_pretty(&doc).map_err(json_err(path))?;
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_coco(path: &Path) -> Result<CocoDocument, ExportError> {
    let text = std::fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&text).map_err(json_err(path))
}

/// Annotation records recovered from a COCO document.
pub fn coco_records(doc: &CocoDocument) -> Result<Vec<AnnotationRecord>, String> {
    let frames: BTreeMap<u64, usize> = doc.images.iter().map(|i| (i.id, i.frame)).collect();
    doc.annotations
        .iter()
        .map(|a| {
            let frame = *frames
                .get(&a.image_id)
                .ok_or_else(|| format!("annotation {} references unknown image", a.id))?;
            let action = a
                .category_id
                .checked_sub(ACTION_CATEGORY_BASE)
                .and_then(|i| AtomicAction::from_index(i as u8))
                .ok_or_else(|| format!("bad category {}", a.category_id))?;
            let activity = a
                .activity_id
                .checked_sub(ACTIVITY_CATEGORY_BASE)
                .and_then(|i| GroupActivity::ALL.get(i as usize).copied())
                .ok_or_else(|| format!("bad activity {}", a.activity_id))?;
            Ok(AnnotationRecord {
                frame,
                person_id: a.track_id,
                group_id: a.group_id,
                bbox: a.bbox,
                action,
                activity,
                visibility: a.visibility,
            })
        })
        .collect()
}

pub const MOTION_MAGIC: &[u8; 8] = b"GSMOTION";
pub const MOTION_VERSION: u32 = 1;
/// Bytes per frame-person row: x, y, z, heading (f64), action (u8), speed (f64).
pub const MOTION_ROW_BYTES: usize = 4 * 8 + 1 + 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionHeader {
    pub activity: GroupActivity,
    pub group_id: u32,
    pub seed: u64,
    pub fps: f64,
    pub persons: usize,
    pub frames: usize,
    pub person_ids: Vec<u32>,
    pub joints: bool,
    pub joint_count: usize,
    pub features_per_joint: usize,
    pub joint_names: Vec<String>,
    pub joint_order: String,
}

/// Serialize a motion: magic, version, header length and JSON header, then
/// frame-major rows, then the optional person-major joint block. All
/// numbers little-endian.
pub fn encode_motion3d(motion: &GroupMotion) -> Vec<u8> {
    let header = MotionHeader {
        activity: motion.activity,
        group_id: motion.group_id,
        seed: motion.seed,
        fps: motion.fps,
        persons: motion.persons(),
        frames: motion.frames(),
        person_ids: motion.person_ids().to_vec(),
        joints: motion.joints().is_some(),
        joint_count: JOINT_COUNT,
        features_per_joint: FEATURES_PER_JOINT,
        joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
        joint_order: "person,frame,joint,feature".into(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(
        16 + header.len()
            + motion.samples().len() * MOTION_ROW_BYTES
            + motion.joints().map_or(0, |j| j.len() * 8),
    );
    out.extend_from_slice(MOTION_MAGIC);
    out.extend_from_slice(&MOTION_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for s in motion.samples() {
        for v in [s.position.x, s.position.y, s.position.z, s.heading] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(s.action.index());
        out.extend_from_slice(&s.speed.to_le_bytes());
    }
    if let Some(j) = motion.joints() {
        for v in j {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_motion3d(motion: &GroupMotion, path: &Path) -> Result<(), ExportError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    w.write_all(&encode_motion3d(motion))
        .map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.at..self.at + n)?;
        self.at += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

pub fn decode_motion3d(
    bytes: &[u8],
    path: &Path,
) -> Result<(MotionHeader, GroupMotion), ExportError> {
    let truncated = || format_err(path, "truncated motion file");
    let mut c = Cursor { bytes, at: 0 };
    if c.take(8).ok_or_else(truncated)? != MOTION_MAGIC {
        return Err(format_err(path, "not a motion file"));
    }
    let version = c.u32().ok_or_else(truncated)?;
    if version != MOTION_VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let len = c.u32().ok_or_else(truncated)? as usize;
    let header: MotionHeader =
        serde_json::from_slice(c.take(len).ok_or_else(truncated)?).map_err(json_err(path))?;
    if header.person_ids.len() != header.persons
        || header.joint_count != JOINT_COUNT
        || header.features_per_joint != FEATURES_PER_JOINT
    {
        return Err(format_err(path, "inconsistent header"));
    }
    let n = header.persons * header.frames;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y, z, heading) = (
            c.f64().ok_or_else(truncated)?,
            c.f64().ok_or_else(truncated)?,
            c.f64().ok_or_else(truncated)?,
            c.f64().ok_or_else(truncated)?,
        );
        let code = c.take(1).ok_or_else(truncated)?[0];
        let action = AtomicAction::from_index(code)
            .ok_or_else(|| format_err(path, format!("bad action code {code}")))?;
        samples.push(PersonFrame {
            position: Vec3::new(x, y, z),
            heading,
            action,
            speed: c.f64().ok_or_else(truncated)?,
        });
    }
    let joints = if header.joints {
        let count = n * JOINT_COUNT * FEATURES_PER_JOINT;
        let mut block = Vec::with_capacity(count);
        for _ in 0..count {
            block.push(c.f64().ok_or_else(truncated)?);
        }
        Some(block)
    } else {
        None
    };
    if c.at != bytes.len() {
        return Err(format_err(path, "trailing bytes after motion data"));
    }
    let motion = GroupMotion::new(
        header.activity,
        header.group_id,
        header.seed,
        header.fps,
        header.frames,
        header.person_ids.clone(),
        samples,
        joints,
    )?;
    Ok((header, motion))
}

pub fn read_motion3d(path: &Path) -> Result<GroupMotion, ExportError> {
    let mut bytes = Vec::new();
    File::open(path)
        .map_err(io_err(path))?
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    Ok(decode_motion3d(&bytes, path)?.1)
}

/// Everything needed to re-create a simulation's annotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub sim_index: usize,
    pub sim_id: String,
    pub master_seed: u64,
    pub frames: usize,
    pub fps: f64,
    /// Every character is annotated as fully visible; no occlusion model.
    pub occlusion_model: String,
    pub scene: SceneInstance,
}

pub fn write_scene(desc: &SceneDescription, path: &Path) -> Result<(), ExportError> {
    let bytes = serde_json::to_vec_pretty(desc).map_err(json_err(path))?;
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_scene(path: &Path) -> Result<SceneDescription, ExportError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(json_err(path))
}

/// Group composition of one simulation, enough for dataset statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSummary {
    pub frames: usize,
    pub fps: f64,
    pub groups: Vec<(GroupActivity, usize)>,
}

impl SimSummary {
    pub fn from_scene(scene: &SceneInstance, frames: usize, fps: f64) -> Self {
        Self {
            frames,
            fps,
            groups: scene
                .groups
                .iter()
                .map(|g| (g.activity, g.members.len()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub simulations: usize,
    pub total_groups: usize,
    pub total_tracks: usize,
    pub total_frames: usize,
    /// persons in frame → number of frames.
    pub persons_per_frame: BTreeMap<usize, usize>,
    /// group size → number of groups.
    pub group_sizes: BTreeMap<usize, usize>,
    /// activity → number of group clips.
    pub activity_clips: BTreeMap<String, usize>,
    pub mean_persons_per_frame: f64,
    pub mean_persons_per_group: f64,
    pub mean_track_length_seconds: f64,
}

/// Exact counts over simulation summaries. Every person is tracked for the
/// full clip, so each frame holds all of a simulation's persons.
pub fn dataset_stats(outputs: &[SimSummary]) -> StatsReport {
    let mut r = StatsReport {
        simulations: outputs.len(),
        ..StatsReport::default()
    };
    let mut person_frames = 0usize;
    let mut persons_total = 0usize;
    let mut track_seconds = 0.0;
    for sim in outputs {
        let persons: usize = sim.groups.iter().map(|(_, n)| n).sum();
        *r.persons_per_frame.entry(persons).or_default() += sim.frames;
        r.total_frames += sim.frames;
        person_frames += persons * sim.frames;
        for (activity, n) in &sim.groups {
            *r.group_sizes.entry(*n).or_default() += 1;
            *r.activity_clips
                .entry(activity.name().to_string())
                .or_default() += 1;
            r.total_groups += 1;
            persons_total += n;
        }
        r.total_tracks += persons;
        track_seconds += persons as f64 * sim.frames as f64 / sim.fps;
    }
    if r.total_frames > 0 {
        r.mean_persons_per_frame = person_frames as f64 / r.total_frames as f64;
    }
    if r.total_groups > 0 {
        r.mean_persons_per_group = persons_total as f64 / r.total_groups as f64;
    }
    if r.total_tracks > 0 {
        r.mean_track_length_seconds = track_seconds / r.total_tracks as f64;
    }
    r
}
