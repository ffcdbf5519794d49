//! MCTS against random search over seeded runs, printed as a T / sigma /
//! N_miss table.
//!
//! ```text
//! cargo run --release --example compare_random -- [runs] [scenario...]
//! ```

use hazardsim::cli::{bench, format_table};
use hazardsim::scenarios::Builtin;
use hazardsim::search::{Algorithm, SearchParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut scenarios: Vec<String> = args.collect();
    if scenarios.is_empty() {
        scenarios = Builtin::ALL.iter().map(|b| b.key().to_string()).collect();
    }

    let summary = bench(&scenarios, &Algorithm::ALL, runs, &SearchParams::default());
    print!("{}", format_table(&summary));

    let faster = scenarios
        .iter()
        .filter(|s| {
            let m = summary.cell(s, Algorithm::Mcts).and_then(|c| c.mean);
            let r = summary.cell(s, Algorithm::Random).and_then(|c| c.mean);
            match (m, r) {
                (Some(m), Some(r)) => m < r,
                (Some(_), None) => true,
                _ => false,
            }
        })
        .count();
    println!("mcts faster on {faster} of {} scenarios", scenarios.len());
}
