//! Replays a scenario's pinned witness sequence and prints the danger index
//! and device states action by action.
//!
//! ```text
//! cargo run --release --example replay_hazard -- s4
//! ```

use hazardsim::scenarios::load;
use hazardsim::search::{replay, trace, SearchParams};
use hazardsim::simulator::SUBSTEPS_PER_ACTION;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "s1".into());
    let scenario = load(&spec).expect("scenario loads");
    let world = scenario.world().expect("scenario builds");
    let actions: Vec<usize> = scenario
        .witness_actions()
        .expect("witness parses")
        .iter()
        .map(|a| a.index())
        .collect();

    println!("{}: {}", scenario.name, scenario.expected_hazard);
    let rows = trace(&world, &actions).expect("trace runs");
    for (step, name) in scenario.witness.iter().enumerate() {
        let r = &rows[(step + 1) * SUBSTEPS_PER_ACTION];
        let speeds: Vec<String> = r
            .robots
            .iter()
            .map(|b| format!("{}={:.2}", b.id, b.speed_factor))
            .collect();
        println!(
            "{:>2} {:<28} t={:.2}s  pos=({:.2}, {:.2})  c_D={:.3} {:?}  speed {}  devices {:?}",
            step + 1,
            name,
            r.time_s,
            r.human.x,
            r.human.y,
            r.danger,
            r.case,
            speeds.join(" "),
            r.devices
        );
    }

    let rec = replay(&world, &actions, &SearchParams::default()).expect("replay runs");
    match rec.hazard {
        Some(h) => println!(
            "unsafe at step {}: {} hit by {} link {} at {:.2} m/s, {:.1} N > {:.0} N",
            h.step, h.body_region, h.robot, h.link, h.robot_speed_m_s, h.force_n, h.max_force_n
        ),
        None => println!("witness did not reach an unsafe state"),
    }
}
