use groupsim_core::authoring::{align, AlignmentShape, GroupActivity};
use groupsim_core::catalog::build_default_catalog;
use groupsim_core::config::{Preset, SimulationConfig};
use groupsim_core::export::{dataset_stats, SimSummary};
use groupsim_core::{instantiate_scene, RngStream};

#[test]
fn group_sizes_are_uniform_over_the_configured_range() {
    let mut c = SimulationConfig::preset(Preset::ThreeD);
    c.catalog.characters = 200;
    let catalog = build_default_catalog(&c, &RngStream::new(1)).unwrap();
    let root = RngStream::new(2);
    let draws = 3900;
    let mut counts = [0usize; 14];
    let mut summaries = Vec::new();
    for s in 0..draws {
        let scene =
            instantiate_scene(&c, &catalog, &root.derive(&format!("sim/{s}")).unwrap()).unwrap();
        assert_eq!(scene.groups.len(), 1);
        counts[scene.groups[0].members.len()] += 1;
        summaries.push(SimSummary::from_scene(&scene, c.frames, c.fps));
    }
    assert_eq!(counts[0], 0);
    // 300 expected per size; binomial σ ≈ 16.6
    for (size, n) in counts.iter().enumerate().skip(1) {
        assert!((*n as f64 - 300.0).abs() < 4.0 * 16.6, "size {size}: {n}");
    }
    let stats = dataset_stats(&summaries);
    assert_eq!(stats.group_sizes.values().sum::<usize>(), draws);
    assert!((stats.mean_persons_per_group - 7.0).abs() < 0.2);
    assert_eq!(stats.mean_track_length_seconds, 5.0);
}

#[test]
fn multi_group_scenes_count_every_person_once() {
    let mut c = SimulationConfig::preset(Preset::Rgb);
    c.catalog.characters = 200;
    let catalog = build_default_catalog(&c, &RngStream::new(3)).unwrap();
    for s in 0..50 {
        let scene = instantiate_scene(&c, &catalog, &RngStream::new(s)).unwrap();
        let mut ids: Vec<u32> = scene
            .groups
            .iter()
            .flat_map(|g| g.members.iter().map(|m| m.person_id))
            .collect();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert_eq!(scene.person_count(), n);
        let summary = SimSummary::from_scene(&scene, c.frames, c.fps);
        let stats = dataset_stats(&[summary]);
        assert_eq!(stats.persons_per_frame.get(&n), Some(&c.frames));
    }
}

/// Arc length of z = αx² + βx between `a` and `b` by Simpson's rule.
fn arc(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    let f = |x: f64| (1.0 + (2.0 * alpha * x + beta).powi(2)).sqrt();
    let n = 400;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (s * h / 3.0).abs()
}

#[test]
fn parabola_members_are_an_interval_apart_along_the_curve() {
    let mut rng = RngStream::new(9);
    for n in 3..=15 {
        for interval in [0.6, 1.0, 1.5] {
            let p = align(AlignmentShape::Parabola, n, interval, &mut rng).unwrap();
            let q: Vec<_> = p.iter().map(|m| m.position).collect();
            let (p0, p1, p2) = (q[0], q[n / 2], q[n - 1]);
            let d01 = (p1.z - p0.z) / (p1.x - p0.x);
            let d12 = (p2.z - p1.z) / (p2.x - p1.x);
            let alpha = (d12 - d01) / (p2.x - p0.x);
            let beta = d01 - alpha * (p0.x + p1.x);
            assert!((0.05..=0.3).contains(&alpha), "curvature {alpha}");
            for w in q.windows(2) {
                let len = arc(alpha, beta, w[0].x, w[1].x);
                assert!((len - interval).abs() < 1e-3, "n={n}: {len} vs {interval}");
            }
        }
    }
    assert!(GroupActivity::Queueing
        .spec()
        .allowed_alignments
        .contains(&AlignmentShape::Parabola));
}
