mod common;

use hazardsim::human::{action_space, HumanAction};
use hazardsim::scenarios::{builtin, parse_scenario_str, Builtin};
use hazardsim::simulator::{SimState, SpeedGovernor, World, SUBSTEPS_PER_ACTION, SUBSTEP_S};
use proptest::prelude::*;
use std::f64::consts::PI;

const MAT_CELL: &str = r#"
format_version = 1
name = "mat-cell"

[human]
spawn_position_m = [0.0, 0.0]

[[robot]]
id = "arm"
base_position_m = [3.0, 0.0, 0.0]
stopping_time_s = 0.1

[[robot.joint]]
kind = "revolute"
axis = [0.0, 0.0, 1.0]
origin_m = [0.0, 0.0, 1.0]

[[robot.link]]
joint = 0
a_m = [0.0, 0.0, 0.0]
b_m = [0.5, 0.0, 0.0]
radius_m = 0.05
mass_kg = 20.0

[robot.trajectory]
cycle_s = 1.0

[[robot.trajectory.waypoint]]
time_s = 0.0
joints_deg_or_m = [0.0]

[[robot.trajectory.waypoint]]
time_s = 0.5
joints_deg_or_m = [180.0]

[[device]]
id = "mat"
kind = "pressure_mat"
center_m = [0.6, 0.0, 0.0]
half_extents_m = [0.2, 0.6, 0.02]
robots = ["arm"]
"#;

fn mat_world() -> World {
    parse_scenario_str(MAT_CELL, None).unwrap().world().unwrap()
}

fn act(s: &str) -> HumanAction {
    s.parse().unwrap()
}

#[test]
fn reset_is_the_initial_state() {
    for b in Builtin::ALL {
        let w = builtin(b).world().unwrap();
        let a = w.reset().unwrap();
        assert_eq!(a.tick, 0);
        assert_eq!(a.time_s(), 0.0);
        assert!(a.devices.iter().all(|d| !d));
        assert!(a
            .robots
            .iter()
            .all(|r| r.phase_s == 0.0 && r.governor.current == 1.0 && r.payload_kg == 0.0));
        assert_eq!(a.human, w.spawn);
        assert_eq!(a, w.reset().unwrap());
    }
}

#[test]
fn standing_still_advances_only_the_robot() {
    let w = mat_world();
    let s0 = w.reset().unwrap();
    let s1 = w.step(&s0, act("stop/upright"));
    assert_eq!(s1.human, s0.human);
    assert!((s1.robots[0].phase_s - 0.2).abs() < 1e-12);
    assert_eq!(s1.tick, SUBSTEPS_PER_ACTION as u64);
    assert!((s1.time_s() - 0.2).abs() < 1e-12);
}

#[test]
fn walking_forward_covers_032_m() {
    let w = common::fixture_world("always_safe.toml");
    let s0 = w.reset().unwrap();
    let s1 = w.step(&s0, act("forward/upright"));
    assert!((s1.human.x - 0.32).abs() < 1e-12 && s1.human.y.abs() < 1e-12);
    let s2 = w.step(&s0, act("left90/upright"));
    assert!((s2.human.y - 0.32).abs() < 1e-12 && s2.human.x.abs() < 1e-12);
}

#[test]
fn stepping_on_the_mat_stops_the_robot() {
    let w = mat_world();
    let mut state = w.reset().unwrap();
    let mut triggered_at = None;
    let mut ticks = Vec::new();
    for _ in 0..4 {
        state = w.step_observed(&state, act("forward/upright"), |s| ticks.push(s.clone()));
    }
    for s in &ticks {
        if s.devices[0] && triggered_at.is_none() {
            triggered_at = Some(s.tick);
            // target drops in the same substep the mat is triggered
            assert_eq!(s.robots[0].governor.target, 0.0);
        }
    }
    let t0 = triggered_at.expect("mat triggered");
    let stop_ticks = (0.1 / SUBSTEP_S).round() as u64;
    for s in &ticks {
        if s.tick >= t0 + stop_ticks - 1 {
            assert_eq!(s.robots[0].governor.current, 0.0, "tick {}", s.tick);
        }
    }
    // latched: walking away keeps it stopped
    let back = w.step(&w.step(&state, act("left90/upright")), act("left90/upright"));
    assert!(back.devices[0]);
    assert_eq!(back.robots[0].governor.current, 0.0);
}

#[test]
fn step_is_deterministic_and_markov() {
    let w = builtin(Builtin::S4).world().unwrap();
    let actions: Vec<HumanAction> = (0..8)
        .map(|i| HumanAction::from_index((i * 7 + 3) % 36).unwrap())
        .collect();
    let run = |from: &SimState, acts: &[HumanAction]| acts.iter().fold(from.clone(), |s, a| w.step(&s, *a));
    let s0 = w.reset().unwrap();
    let full_a = run(&s0, &actions);
    let full_b = run(&s0, &actions);
    assert_eq!(full_a, full_b);
    // save mid-episode, serialize and restore
    let mid = run(&s0, &actions[..4]);
    let saved = serde_json::to_string(&mid).unwrap();
    let restored: SimState = serde_json::from_str(&saved).unwrap();
    assert_eq!(run(&restored, &actions[4..]), full_a);
    for a in action_space() {
        assert_eq!(w.step(&mid, a), w.step(&mid.clone(), a));
    }
}

#[test]
fn point_speed_matches_rigid_rotation() {
    let w = mat_world();
    let mut s = w.reset().unwrap();
    s.robots[0].phase_s = 0.1;
    let shapes = w.robot_shapes(&s);
    let hazardsim::geometry::Shape::Capsule { a, b, .. } = shapes[0].shape else {
        panic!()
    };
    let p = a + (b - a) * 0.8;
    let r = (p - a).norm();
    let omega = PI / 0.5;
    let v = w.robot_point_speed(&s, 0, 0, &p);
    assert!((v - omega * r).abs() <= 0.02 * omega * r, "{v} vs {}", omega * r);

    s.robots[0].governor.current = 0.5;
    let half = w.robot_point_speed(&s, 0, 0, &p);
    assert!((half - 0.5 * v).abs() <= 0.02 * half);
    s.robots[0].governor.current = 0.0;
    assert_eq!(w.robot_point_speed(&s, 0, 0, &p), 0.0);
}

#[test]
fn s6_grasp_attaches_and_releases_payload() {
    let w = builtin(Builtin::S6).world().unwrap();
    let mut s = w.reset().unwrap();
    assert_eq!(s.robots[0].payload_kg, 0.0);
    let mut seen = Vec::new();
    for _ in 0..40 {
        s = w.step(&s, act("stop/upright"));
        seen.push((s.time_s(), s.robots[0].payload_kg));
    }
    assert!(seen.iter().any(|(_, p)| *p == 20.0));
    let first_loaded = seen.iter().find(|(_, p)| *p > 0.0).unwrap().0;
    assert!(first_loaded > 0.6 - 1e-9 && first_loaded <= 0.8 + 1e-9);
    assert_eq!(seen.last().unwrap().1, 0.0);
}

#[test]
fn turns_are_instant() {
    let w = common::fixture_world("always_safe.toml");
    let s0 = w.reset().unwrap();
    for (walk, deg) in [("left45", 45.0), ("right90", -90.0), ("stop", 0.0)] {
        let s = w.step(&s0, act(&format!("{walk}/upright")));
        assert!((s.human.heading - f64::to_radians(deg)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn governor_ramp_is_monotone_and_exact(ticks in 1u32..100) {
        let stopping = ticks as f64 * SUBSTEP_S;
        let mut g = SpeedGovernor::new(stopping);
        g.target = 0.0;
        let mut prev = g.current;
        let mut n = 0;
        while g.current > 0.0 {
            g.update(SUBSTEP_S);
            prop_assert!(g.current <= prev);
            prev = g.current;
            n += 1;
            prop_assert!(n <= ticks);
        }
        prop_assert_eq!(n, ticks);
    }

    #[test]
    fn step_is_bit_exact(seq in proptest::collection::vec(0usize..36, 1..8)) {
        let w = builtin(Builtin::S2).world().unwrap();
        let go = || seq.iter().fold(w.reset().unwrap(), |s, a| w.step(&s, HumanAction::from_index(*a).unwrap()));
        prop_assert_eq!(go(), go());
    }
}
