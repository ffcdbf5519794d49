//! Offline search for a short hazardous action sequence.
//!
//! Runs collect-all MCTS over many seeds and prints the shortest hazard
//! found (ties broken lexicographically by action index), formatted for the
//! `witness` field of a scenario file.
//!
//! ```text
//! cargo run --release --example find_witness -- s1 [seeds] [iterations]
//! ```

use hazardsim::human::HumanAction;
use hazardsim::scenarios::load;
use hazardsim::search::{mcts_search, SearchParams};
use rayon::prelude::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let Some(spec) = args.get(1) else {
        eprintln!("usage: find_witness <scenario> [seeds] [iterations]");
        std::process::exit(2);
    };
    let seeds: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(40);
    let iterations: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let scenario = load(spec).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    let world = scenario.world().expect("scenario builds");

    let best = (0..seeds)
        .into_par_iter()
        .filter_map(|seed| {
            let params = SearchParams {
                seed: 1000 + seed,
                max_iterations: iterations,
                ..SearchParams::default()
            };
            let result = mcts_search(&world, &params).expect("search runs");
            result
                .hazards
                .into_iter()
                .map(|h| h.actions)
                .min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)))
        })
        .min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));

    match best {
        Some(actions) => {
            let names: Vec<String> = actions
                .iter()
                .map(|i| format!("\"{}\"", HumanAction::from_index(*i).expect("valid index")))
                .collect();
            println!("witness = [{}]", names.join(", "));
        }
        None => {
            eprintln!("no hazard found");
            std::process::exit(1);
        }
    }
}
