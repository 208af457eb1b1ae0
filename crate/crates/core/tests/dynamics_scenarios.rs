mod common;

use common::{min_pair_distance, run, walker, walking_group};
use groupsim_core::authoring::GroupActivity;
use groupsim_core::catalog::build_default_catalog;
use groupsim_core::config::{ActivityWeights, Preset, SimulationConfig};
use groupsim_core::geometry::{forward, Vec3};
use groupsim_core::metrics::collision_frequency;
use groupsim_core::{instantiate_scene, simulate, RngStream, SimOptions};

#[test]
fn head_on_walkers_slow_down_but_still_cross() {
    let pair = walking_group(vec![
        walker(1, Vec3::new(0.0, 0.0, 0.0), 0.0, 1.0),
        walker(2, Vec3::new(0.0, 0.0, 2.0), 180.0, 1.0),
    ]);
    let fps = 30.0;
    let (on, end) = run(pair.clone(), 150, fps, true);
    let (off, _) = run(pair, 150, fps, false);
    // once flagged, the remaining closing distance is a geometric series
    // 2·1.4/fps·Σ0.96^k ≈ 2.24 m, well beyond the 0.8 m trigger radius
    let budget = 2.0 * 1.4 / fps * 0.96 / (1.0 - 0.96);
    assert!(budget > 0.8);
    for m in [&on, &off] {
        let last = m.frames() - 1;
        assert!(m.sample(last, 0).position.z > m.sample(last, 1).position.z);
    }
    let slowest = (0..on.frames())
        .map(|t| on.sample(t, 0).position.z)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| (w[1] - w[0]) * fps / 1.4)
        .fold(f64::INFINITY, f64::min);
    assert!((0.1 - 1e-9..0.7).contains(&slowest), "{slowest}");
    assert!(end
        .characters
        .iter()
        .all(|c| c.speed >= 0.1 && c.speed <= 1.0));
    assert!(min_pair_distance(&on) < 0.45 && min_pair_distance(&off) < 0.45);
}

#[test]
fn single_file_column_never_collides() {
    for interval in [0.9, 1.0, 1.4] {
        let column = walking_group(
            (0..8)
                .map(|i| walker(i + 1, Vec3::new(0.0, 0.0, -(i as f64) * interval), 0.0, 1.0))
                .collect(),
        );
        for adjust in [true, false] {
            let (motion, _) = run(column.clone(), 150, 30.0, adjust);
            assert_eq!(collision_frequency(&motion, 0.45).unwrap(), 0.0);
        }
    }
}

#[test]
fn constant_speed_walker_has_no_drift() {
    let heading = 37.0;
    let start = Vec3::new(1.0, 0.0, -2.0);
    let n = 1000;
    let (motion, _) = run(
        walking_group(vec![walker(1, start, heading, 1.0)]),
        n + 1,
        30.0,
        false,
    );
    let expected = start + forward(heading) * (1.4 * n as f64 / 30.0);
    let end = motion.sample(n, 0).position;
    assert!((end - expected).norm() <= 1e-9 * n as f64);
}

fn config(preset: Preset) -> SimulationConfig {
    let mut c = SimulationConfig::preset(preset);
    c.catalog.characters = 200;
    c
}

#[test]
fn clip_lengths_follow_frames_and_fps() {
    for (preset, frames, fps) in [(Preset::Rgb, 100, 20.0), (Preset::ThreeD, 150, 30.0)] {
        let c = config(preset);
        assert_eq!((c.frames, c.fps), (frames, fps));
        let catalog = build_default_catalog(&c, &RngStream::new(1)).unwrap();
        let scene = instantiate_scene(&c, &catalog, &RngStream::new(2)).unwrap();
        let out = simulate(&scene, &catalog, c.frames, c.fps, &SimOptions::default()).unwrap();
        assert_eq!(out.trace.frames, frames);
        for m in &out.motions {
            assert_eq!(m.frames(), frames);
            assert!((m.duration_seconds() - 5.0).abs() < 1e-12);
        }
    }
}

#[test]
fn talking_groups_stand_still() {
    let mut c = config(Preset::Rgb);
    c.activity_weights = ActivityWeights::only(GroupActivity::Talking);
    let catalog = build_default_catalog(&c, &RngStream::new(3)).unwrap();
    for seed in 0..10 {
        let scene = instantiate_scene(&c, &catalog, &RngStream::new(seed)).unwrap();
        let out = simulate(&scene, &catalog, c.frames, c.fps, &SimOptions::default()).unwrap();
        for m in &out.motions {
            for t in 1..m.frames() {
                for p in 0..m.persons() {
                    assert_eq!(m.sample(t, p).position, m.sample(0, p).position);
                }
            }
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let c = config(Preset::Rgb);
    let catalog = build_default_catalog(&c, &RngStream::new(4)).unwrap();
    let a = instantiate_scene(&c, &catalog, &RngStream::new(5)).unwrap();
    let b = instantiate_scene(&c, &catalog, &RngStream::new(5)).unwrap();
    assert_eq!(a, b);
    let opts = SimOptions {
        joint_block: true,
        ..SimOptions::default()
    };
    let x = simulate(&a, &catalog, 40, 20.0, &opts).unwrap();
    let y = simulate(&b, &catalog, 40, 20.0, &opts).unwrap();
    assert_eq!(x.motions, y.motions);
}
