mod common;

use common::{run, walker, walking_group};
use groupsim_core::authoring::GroupActivity;
use groupsim_core::dynamics::{adjust_speeds, SpeedAdjustParams};
use groupsim_core::export::{decode_motion3d, encode_motion3d};
use groupsim_core::geometry::{rotate_yaw, Vec3};
use groupsim_core::metrics::{collision_frequency, contact_force, interaction_force, ForceParams};
use groupsim_core::GroupMotion;
use proptest::prelude::*;

fn ground() -> impl Strategy<Value = Vec3> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, z)| Vec3::new(x, 0.0, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn speed_update_ignores_list_order(
        people in prop::collection::vec((ground(), 0.0..360.0f64, 0.1..1.5f64), 2..9),
        rotation in 1usize..8,
    ) {
        let states: Vec<_> = people
            .iter()
            .enumerate()
            .map(|(i, (p, h, s))| walker(i as u32 + 1, *p * 0.3, *h, *s))
            .collect();
        let params = SpeedAdjustParams::default();
        let base = adjust_speeds(&states, &params);
        let mut shuffled = states.clone();
        shuffled.rotate_left(rotation % states.len());
        shuffled.reverse();
        let permuted = adjust_speeds(&shuffled, &params);
        for (state, speed) in shuffled.iter().zip(permuted) {
            prop_assert_eq!(speed, base[state.person_id as usize - 1]);
        }
    }

    #[test]
    fn forces_are_antisymmetric(pi in ground(), pj in ground(), ri in 0.1..0.4f64, rj in 0.1..0.4f64) {
        prop_assume!(pi != pj);
        let f = ForceParams::default();
        prop_assert_eq!(
            interaction_force(&pi, &pj, ri, rj, &f).unwrap(),
            -interaction_force(&pj, &pi, rj, ri, &f).unwrap()
        );
        prop_assert_eq!(
            contact_force(&pi, &pj, ri, rj, &f).unwrap(),
            -contact_force(&pj, &pi, rj, ri, &f).unwrap()
        );
    }

    #[test]
    fn interaction_decreases_with_distance(d in 0.05..3.0f64, step in 1e-3..1.0f64) {
        let f = ForceParams::default();
        let at = |d: f64| interaction_force(&Vec3::new(d, 0.0, 0.0), &Vec3::zeros(), 0.225, 0.225, &f)
            .unwrap()
            .norm();
        prop_assert!(at(d + step) < at(d));
    }

    #[test]
    fn collisions_ignore_rigid_motion(
        start in prop::collection::vec(ground(), 2..7),
        drift in prop::collection::vec(ground(), 2..7),
        yaw in 0.0..360.0f64,
        shift in ground(),
    ) {
        let n = start.len().min(drift.len());
        let frames: Vec<Vec<Vec3>> = (0..20)
            .map(|t| (0..n).map(|k| start[k] * 0.4 + drift[k] * (0.02 * t as f64)).collect())
            .collect();
        let motion = GroupMotion::from_positions(GroupActivity::Walking, 30.0, &frames).unwrap();
        let moved = motion.map_positions(|p| rotate_yaw(p, yaw) + shift);
        prop_assert_eq!(
            collision_frequency(&motion, 0.45).unwrap(),
            collision_frequency(&moved, 0.45).unwrap()
        );
    }

    #[test]
    fn speeds_stay_in_bounds(
        people in prop::collection::vec((ground(), 0.0..360.0f64, 0.5..1.5f64), 2..8),
    ) {
        let group = walking_group(
            people
                .iter()
                .enumerate()
                .map(|(i, (p, h, s))| walker(i as u32 + 1, *p * 0.4, *h, *s))
                .collect(),
        );
        let (_, end) = run(group, 60, 30.0, true);
        for c in &end.characters {
            prop_assert!(c.speed >= 0.1 - 1e-12 && c.speed <= c.init_speed);
        }
    }

    #[test]
    fn motion_files_round_trip(
        frames in prop::collection::vec(prop::collection::vec(ground(), 3), 1..10),
    ) {
        let motion = GroupMotion::from_positions(GroupActivity::Queueing, 20.0, &frames).unwrap();
        let bytes = encode_motion3d(&motion);
        let (header, back) = decode_motion3d(&bytes, std::path::Path::new("p.bin")).unwrap();
        prop_assert_eq!(header.frames, frames.len());
        prop_assert_eq!(back, motion);
    }
}
