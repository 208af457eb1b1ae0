use groupsim_core::camera::{place_cameras, project_block, project_point, CameraModel};
use groupsim_core::geometry::Vec3;
use groupsim_core::RngStream;
use proptest::prelude::*;

fn level_camera(fov: f64) -> CameraModel {
    let eye = Vec3::new(0.0, 0.9, 0.0);
    CameraModel::new(eye, eye + Vec3::new(0.0, 0.0, 10.0), fov, 1920, 1080).unwrap()
}

#[test]
fn box_height_matches_hand_projection() {
    let cam = level_camera(60.0);
    let f = cam.focal_px();
    assert!((f - 935.307).abs() < 1e-3);
    let r = 0.225;
    // the near face spans the full height at depth 8
    let b = project_block(&cam, &Vec3::new(0.0, 0.0, 8.0 + r), r, 1.8).unwrap();
    assert!((b[3] - 210.4).abs() <= 1.0, "{}", b[3]);
    assert!((b[3] - f * 1.8 / 8.0).abs() < 1e-9);
    // measured from the block centre, the near face sits r closer
    let b = project_block(&cam, &Vec3::new(0.0, 0.0, 8.0), r, 1.8).unwrap();
    assert!((b[3] - f * 1.8 / (8.0 - r)).abs() < 1e-9);
}

#[test]
fn centred_character_gives_centred_box() {
    let cam = level_camera(50.0);
    let b = project_block(&cam, &Vec3::new(0.0, 0.0, 6.0), 0.225, 1.8).unwrap();
    assert!((b[0] + b[2] / 2.0 - 960.0).abs() < 0.5);
    assert!((b[1] + b[3] / 2.0 - 540.0).abs() < 0.5);
    assert!(project_block(&cam, &Vec3::new(0.0, 0.0, -6.0), 0.225, 1.8).is_none());
}

#[test]
fn placed_cameras_stay_on_their_ring() {
    let target = Vec3::new(3.0, 1.0, -2.0);
    let root = RngStream::new(11);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..2500 {
        let cams = place_cameras(
            &target,
            4,
            (1920, 1080),
            &root.derive(&format!("{i}")).unwrap(),
        )
        .unwrap();
        assert_eq!(cams.len(), 4);
        for cam in &cams {
            let p = cam.position();
            let ring = ((p.x - target.x).powi(2) + (p.z - target.z).powi(2)).sqrt();
            assert!(ring >= 6.0 - 2f64.sqrt() && ring <= 10.0 + 2f64.sqrt());
            lo = lo.min(p.y);
            hi = hi.max(p.y);
            assert_eq!(cam.look_at(), &target);
            assert!((40.0..70.0).contains(&cam.vertical_fov()));
        }
    }
    assert!(lo >= 1.0 && hi <= 5.0);
    let a = place_cameras(&target, 1, (1920, 1080), &root).unwrap();
    let b = place_cameras(&target, 1, (1920, 1080), &root).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn ground_point_lies_in_its_box(
        az in 0.0..360.0f64,
        radius in 6.0..10.0f64,
        height in 1.0..5.0f64,
        fov in 40.0..70.0f64,
        dx in -4.0..4.0f64,
        dz in -4.0..4.0f64,
    ) {
        let target = Vec3::new(0.0, 1.0, 0.0);
        let a = az.to_radians();
        let cam = CameraModel::new(
            Vec3::new(radius * a.sin(), height, radius * a.cos()),
            target,
            fov,
            1920,
            1080,
        )
        .unwrap();
        let ground = Vec3::new(dx, 0.0, dz);
        if let (Some(b), Some(p)) = (project_block(&cam, &ground, 0.225, 1.7), project_point(&cam, &ground)) {
            prop_assert!(b[2] > 0.0 && b[3] > 0.0);
            prop_assert!(b[0] < 1920.0 && b[1] < 1080.0 && b[0] + b[2] > 0.0 && b[1] + b[3] > 0.0);
            if (0.0..=1920.0).contains(&p[0]) && (0.0..=1080.0).contains(&p[1]) {
                prop_assert!(p[0] >= b[0] - 1e-9 && p[0] <= b[0] + b[2] + 1e-9);
                prop_assert!(p[1] >= b[1] - 1e-9 && p[1] <= b[1] + b[3] + 1e-9);
            }
        }
    }

    #[test]
    fn boxes_shrink_as_the_camera_backs_away(az in 0.0..360.0f64, d in 4.0..12.0f64, extra in 0.1..3.0f64) {
        let a = az.to_radians();
        let dir = Vec3::new(a.sin(), 0.0, a.cos());
        let aim = Vec3::new(0.0, 0.9, 0.0);
        let height_at = |dist: f64| {
            let cam = CameraModel::new(aim + dir * dist, aim, 60.0, 1920, 1080).unwrap();
            project_block(&cam, &Vec3::zeros(), 0.225, 1.8).unwrap()[3]
        };
        prop_assert!(height_at(d + extra) < height_at(d));
    }
}
