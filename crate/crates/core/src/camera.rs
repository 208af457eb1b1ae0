//! Randomized pinhole cameras and character bounding boxes.
//!
//! Camera frame: +x right, +y down, +z along the optical axis, so pixel
//! coordinates grow rightwards and downwards from the top-left corner.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::CharacterState;
use crate::geometry::Vec3;
use crate::randomization::{RandomError, RngStream};

/// Points with camera depth at or below this are not projected.
pub const MIN_DEPTH: f64 = 1e-6;
/// Near plane used when clipping box edges that cross behind the camera.
const NEAR_PLANE: f64 = 1e-3;

pub const DEFAULT_FOV_RANGE: (f64, f64) = (40.0, 70.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("camera position coincides with its look-at point")]
    CoincidentLookAt,
    #[error("camera looks straight along the vertical axis")]
    VerticalView,
    #[error("vertical field of view {0} is outside (0, 180)")]
    BadFov(f64),
    #[error("image size must be positive")]
    EmptyImage,
    #[error(transparent)]
    Random(#[from] RandomError),
}

#[derive(Clone, Debug, Deserialize)]
struct CameraParams {
    position: Vec3,
    look_at: Vec3,
    vertical_fov: f64,
    image_width: u32,
    image_height: u32,
}

impl TryFrom<CameraParams> for CameraModel {
    type Error = CameraError;

    fn try_from(p: CameraParams) -> Result<Self, Self::Error> {
        CameraModel::new(
            p.position,
            p.look_at,
            p.vertical_fov,
            p.image_width,
            p.image_height,
        )
    }
}

/// Pinhole camera; intrinsics and rotation are derived on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraParams")]
pub struct CameraModel {
    position: Vec3,
    look_at: Vec3,
    vertical_fov: f64,
    image_width: u32,
    image_height: u32,
    focal_px: f64,
    principal_point: [f64; 2],
    /// Rows are the camera x, y, z axes in world coordinates.
    world_to_camera: Matrix3<f64>,
}

impl CameraModel {
    pub fn new(
        position: Vec3,
        look_at: Vec3,
        vertical_fov: f64,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self, CameraError> {
        if !(vertical_fov > 0.0 && vertical_fov < 180.0) {
            return Err(CameraError::BadFov(vertical_fov));
        }
        if image_width == 0 || image_height == 0 {
            return Err(CameraError::EmptyImage);
        }
        let axis = look_at - position;
        let dist = axis.norm();
        if dist == 0.0 {
            return Err(CameraError::CoincidentLookAt);
        }
        let z = axis / dist;
        let right = z.cross(&Vec3::y());
        if right.norm() < 1e-9 {
            return Err(CameraError::VerticalView);
        }
        let x = right.normalize();
        let y = z.cross(&x);
        let world_to_camera = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let focal_px = (image_height as f64 / 2.0) / (vertical_fov.to_radians() / 2.0).tan();
        Ok(Self {
            position,
            look_at,
            vertical_fov,
            image_width,
            image_height,
            focal_px,
            principal_point: [image_width as f64 / 2.0, image_height as f64 / 2.0],
            world_to_camera,
        })
    }

    pub fn position(&self) -> &Vec3 {
        &self.position
    }

    pub fn look_at(&self) -> &Vec3 {
        &self.look_at
    }

    pub fn vertical_fov(&self) -> f64 {
        self.vertical_fov
    }

    pub fn focal_px(&self) -> f64 {
        self.focal_px
    }

    pub fn image_size(&self) -> (u32, u32) {
        (self.image_width, self.image_height)
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.world_to_camera * (p - self.position)
    }

    fn project_camera_point(&self, pc: &Vec3) -> [f64; 2] {
        [
            self.focal_px * pc.x / pc.z + self.principal_point[0],
            self.focal_px * pc.y / pc.z + self.principal_point[1],
        ]
    }
}

/// Project a world point to pixels; `None` at or behind the camera plane.
pub fn project_point(cam: &CameraModel, p: &Vec3) -> Option<[f64; 2]> {
    let pc = cam.to_camera(p);
    if pc.z <= MIN_DEPTH {
        return None;
    }
    Some(cam.project_camera_point(&pc))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox2D {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub person_id: u32,
    pub group_id: u32,
    pub frame: usize,
}

/// Pixel-space box of an upright `2r × height × 2r` block standing at
/// `ground`, clipped to the image. Edges crossing the near plane are cut
/// there, so partially visible characters still get a box.
pub fn project_block(
    cam: &CameraModel,
    ground: &Vec3,
    radius: f64,
    height: f64,
) -> Option<[f64; 4]> {
    let mut corners = [Vec3::zeros(); 8];
    for (i, c) in corners.iter_mut().enumerate() {
        let dx = if i & 1 == 0 { -radius } else { radius };
        let dy = if i & 2 == 0 { 0.0 } else { height };
        let dz = if i & 4 == 0 { -radius } else { radius };
        *c = cam.to_camera(&(ground + Vec3::new(dx, dy, dz)));
    }
    let mut pts: Vec<Vec3> = Vec::with_capacity(24);
    for c in &corners {
        if c.z >= NEAR_PLANE {
            pts.push(*c);
        }
    }
    // corners differing in one bit share an edge
    for i in 0..8 {
        for bit in [1, 2, 4] {
            let j = i ^ bit;
            if j < i {
                continue;
            }
            let (a, b) = (corners[i], corners[j]);
            if (a.z - NEAR_PLANE) * (b.z - NEAR_PLANE) < 0.0 {
                let t = (NEAR_PLANE - a.z) / (b.z - a.z);
                pts.push(a + (b - a) * t);
            }
        }
    }
    if pts.is_empty() {
        return None;
    }
    let (mut u0, mut v0, mut u1, mut v1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &pts {
        let [u, v] = cam.project_camera_point(p);
        u0 = u0.min(u);
        v0 = v0.min(v);
        u1 = u1.max(u);
        v1 = v1.max(v);
    }
    let (w, h) = (cam.image_width as f64, cam.image_height as f64);
    let (u0, v0, u1, v1) = (u0.max(0.0), v0.max(0.0), u1.min(w), v1.min(h));
    if u1 <= u0 || v1 <= v0 {
        return None;
    }
    Some([u0, v0, u1 - u0, v1 - v0])
}

/// Bounding box of a character's capsule proxy in one view.
pub fn bbox_for_character(
    cam: &CameraModel,
    state: &CharacterState,
    height: f64,
    frame: usize,
) -> Option<BBox2D> {
    let [left, top, width, height] =
        project_block(cam, &state.position, state.body_radius, height)?;
    Some(BBox2D {
        left,
        top,
        width,
        height,
        person_id: state.person_id,
        group_id: state.group_id,
        frame,
    })
}

/// Cameras on a randomized ring around `target`, all looking at it.
pub fn place_cameras(
    target: &Vec3,
    n_views: usize,
    image_size: (u32, u32),
    rng: &RngStream,
) -> Result<Vec<CameraModel>, CameraError> {
    (0..n_views)
        .map(|view| {
            let mut r = rng.child_indexed("view", view);
            let radius = r.sample_real(6.0, 10.0)?;
            let azimuth = r.sample_real(0.0, 360.0)?.to_radians();
            let height = r.sample_real(1.0, 5.0)?;
            let jitter_x = r.sample_real(-1.0, 1.0)?;
            let jitter_z = r.sample_real(-1.0, 1.0)?;
            let fov = r.sample_real(DEFAULT_FOV_RANGE.0, DEFAULT_FOV_RANGE.1)?;
            let position = Vec3::new(
                target.x + radius * azimuth.sin() + jitter_x,
                height,
                target.z + radius * azimuth.cos() + jitter_z,
            );
            CameraModel::new(position, *target, fov, image_size.0, image_size.1)
        })
        .collect()
}
