//! A scenario written inline: an unguarded robot arm next to a walkway,
//! parsed, validated and searched with both algorithms.
//!
//! ```text
//! cargo run --release --example custom_scenario
//! ```

use hazardsim::scenarios::{parse_scenario_str, ScenarioError};
use hazardsim::search::{search, Algorithm, SearchParams};

const CELL: &str = r#"
format_version = 1
name = "open-arm"
description = "A swinging arm beside a walkway with a scanner that only slows it."
expected_hazard = "Walking into the arm's sweep while it is slowed."

[human]
spawn_position_m = [-1.2, 0.0]

[[robot]]
id = "arm"
base_position_m = [1.4, 0.0, 0.0]
stopping_time_s = 0.2

[[robot.joint]]
kind = "revolute"
axis = [0.0, 0.0, 1.0]
origin_m = [0.0, 0.0, 1.0]

[[robot.link]]
joint = 0
a_m = [0.0, 0.0, 0.0]
b_m = [0.8, 0.0, 0.0]
radius_m = 0.06
mass_kg = 25.0

[robot.trajectory]
cycle_s = 2.0

[[robot.trajectory.waypoint]]
time_s = 0.0
joints_deg_or_m = [90.0]

[[robot.trajectory.waypoint]]
time_s = 1.0
joints_deg_or_m = [270.0]

[[device]]
id = "scanner"
kind = "scanner_zone"
region = { shape = "box", center_m = [1.4, 0.0, 0.05], half_extents_m = [1.0, 1.0, 0.05] }
robots = ["arm"]
effect_factor = 0.5
"#;

fn main() {
    let scenario = parse_scenario_str(CELL, None).expect("inline scenario is valid");
    let world = scenario.world().expect("scenario builds");
    for algo in Algorithm::ALL {
        let params = SearchParams {
            stop_on_first: true,
            ..SearchParams::default()
        };
        let result = search(&world, algo, &params).expect("search runs");
        match result.hazards.first() {
            Some(h) => println!(
                "{algo}: {} at {:.1} N in episode {}",
                h.body_region,
                h.force_n,
                result.first_hazard_iteration.unwrap()
            ),
            None => println!("{algo}: no hazard"),
        }
    }

    // a device guarding a robot that does not exist is reported by id
    let broken = CELL.replace("robots = [\"arm\"]", "robots = [\"gripper\"]");
    match parse_scenario_str(&broken, None) {
        Err(ScenarioError::Validation(problems)) => {
            for p in problems {
                println!("rejected: {p}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }
}
