#![allow(dead_code)]

pub mod reach_oracle;

use hazardsim::scenarios::{parse_scenario, Scenario};
use hazardsim::simulator::World;
use std::path::{Path, PathBuf};

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Scenario {
    parse_scenario(&fixture_path(name)).expect("fixture parses")
}

pub fn fixture_world(name: &str) -> World {
    fixture(name).world().expect("fixture builds")
}
