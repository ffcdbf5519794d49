//! One MCTS search on a builtin scenario, listing every hazard it found.
//!
//! ```text
//! cargo run --release --example run_search -- s3 [seed]
//! ```

use hazardsim::human::HumanAction;
use hazardsim::scenarios::load;
use hazardsim::search::{mcts_search, SearchParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let spec = args.next().unwrap_or_else(|| "s1".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let scenario = load(&spec).expect("scenario loads");
    let world = scenario.world().expect("scenario builds");
    println!("{}: {}", scenario.name, scenario.description);

    let params = SearchParams {
        seed,
        ..SearchParams::default()
    };
    let result = mcts_search(&world, &params).expect("search runs");
    let stats = result.tree.as_ref().map(|t| t.stats()).expect("mcts keeps its tree");
    println!(
        "{} episodes, {} tree nodes, depth {}, {} reach samples",
        result.episodes.len(),
        stats.nodes,
        stats.max_depth,
        result.reach_samples
    );

    match result.first_hazard_iteration {
        Some(it) => println!("first hazard in episode {it}"),
        None => println!("no hazard within {} episodes", params.max_iterations),
    }
    for h in result.hazards.iter().take(10) {
        let actions: Vec<String> = h
            .actions
            .iter()
            .map(|&a| HumanAction::from_index(a).unwrap().to_string())
            .collect();
        println!(
            "  episode {:>3}: {} {:.1} N (limit {:.0} N) by {} [{}]",
            h.episode.unwrap_or(0),
            h.body_region,
            h.force_n,
            h.max_force_n,
            h.robot,
            actions.join(", ")
        );
    }
    if result.hazards.len() > 10 {
        println!("  ... {} more", result.hazards.len() - 10);
    }
}
