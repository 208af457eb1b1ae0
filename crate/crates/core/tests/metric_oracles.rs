use std::collections::BTreeMap;

use groupsim_core::authoring::GroupActivity;
use groupsim_core::geometry::Vec3;
use groupsim_core::metrics::{
    diversity, fid, multimodality, social_force_report, FeatureSet, ForceParams,
};
use groupsim_core::{GroupMotion, RngStream};

fn lcg_cloud(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut s = seed;
    let mut next = move || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| (0..dim).map(|_| next()).collect()).collect()
}

fn set(vectors: Vec<Vec<f64>>) -> FeatureSet {
    FeatureSet::new(None, vectors).unwrap()
}

#[test]
fn fid_of_a_set_and_its_double_is_zero() {
    let a = lcg_cloud(1, 80, 3);
    let doubled: Vec<Vec<f64>> = a.iter().chain(&a).cloned().collect();
    assert!(fid(&set(a.clone()), &set(doubled)).unwrap().distance.abs() < 1e-8);
}

#[test]
fn fid_is_symmetric_and_grows_with_translation() {
    let a = set(lcg_cloud(2, 120, 4));
    let b = lcg_cloud(3, 120, 4);
    let mut last = -1.0;
    for shift in [0.0, 0.5, 2.0, 8.0] {
        let moved = set(b
            .iter()
            .map(|v| v.iter().map(|x| x + shift).collect())
            .collect());
        let ab = fid(&a, &moved).unwrap().distance;
        let ba = fid(&moved, &a).unwrap().distance;
        assert!((ab - ba).abs() < 1e-8);
        assert!(ab > last, "{ab} after {last}");
        last = ab;
    }
}

#[test]
fn diversity_of_antipodal_points_matches_pair_distribution() {
    // half at +v, half at −v: a distinct pair crosses with probability
    // (n/2)·(n/2) / (n·(n−1)/2) / 2 = n / (2(n−1))
    let n = 10;
    let v = [3.0, 4.0];
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            v.iter().map(|x| s * x).collect()
        })
        .collect();
    let expected = 10.0 * n as f64 / (2.0 * (n as f64 - 1.0));
    let pairs = 20_000;
    let got = diversity(&set(vectors), pairs, &mut RngStream::new(4)).unwrap();
    // per-pair distances are 0 or 10, so σ ≤ 5
    assert!(
        (got - expected).abs() <= 3.0 * 5.0 / (pairs as f64).sqrt(),
        "{got} vs {expected}"
    );
}

#[test]
fn multimodality_collapses_to_diversity_for_one_class() {
    let one = set(lcg_cloud(5, 50, 2));
    let classes = BTreeMap::from([("only".to_string(), one.clone())]);
    let mm = multimodality(&classes, 5000, &mut RngStream::new(6)).unwrap();
    let div = diversity(&one, 5000, &mut RngStream::new(7)).unwrap();
    assert!((mm - div).abs() < 0.02, "{mm} vs {div}");
}

fn static_motion(points: &[Vec3], frames: usize) -> GroupMotion {
    GroupMotion::from_positions(GroupActivity::Talking, 30.0, &vec![points.to_vec(); frames])
        .unwrap()
}

#[test]
fn well_spaced_groups_feel_no_force() {
    let pts: Vec<Vec3> = (0..5)
        .map(|i| Vec3::new(3.0 * i as f64, 0.0, 0.0))
        .collect();
    let r = social_force_report(&static_motion(&pts, 30), &ForceParams::default());
    assert!(r.interaction_force < 1e-3 && r.total_force < 1e-3);
    assert_eq!((r.contact_force, r.collision_frequency), (0.0, 0.0));
}

#[test]
fn overlapped_pair_contact_force_is_stiffness_times_overlap() {
    let eps = 0.01;
    let pts = [Vec3::zeros(), Vec3::new(eps, 0.0, 0.0)];
    let p = ForceParams::default();
    let r = social_force_report(&static_motion(&pts, 10), &p);
    assert!((r.contact_force - p.k * (0.45 - eps)).abs() < 1e-6);
    assert_eq!(r.collision_frequency, 10.0);
}
