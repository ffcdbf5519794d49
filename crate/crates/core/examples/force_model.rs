//! Transient contact forces per body region and the speed at which each
//! region's limit is reached, with and without a payload.
//!
//! ```text
//! cargo run --example force_model -- [moving_mass_kg] [payload_kg]
//! ```

use hazardsim::safety::{collision_force, BodyRegionTable};

fn main() {
    let mut args = std::env::args().skip(1);
    let mass: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(30.0);
    let payload: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20.0);
    let table = BodyRegionTable::default();

    println!("robot moving mass {mass} kg, payload {payload} kg");
    println!(
        "{:<11} {:>8} {:>8} {:>8} {:>12} {:>12}",
        "region", "m_H kg", "k N/mm", "F_max N", "v_max m/s", "with load"
    );
    for p in table.iter() {
        // force is linear in speed, so one evaluation gives the limit
        let per_unit = collision_force(1.0, p, mass, 0.0).unwrap();
        let per_unit_loaded = collision_force(1.0, p, mass, payload).unwrap();
        println!(
            "{:<11} {:>8.1} {:>8.0} {:>8.0} {:>12.3} {:>12.3}",
            p.region.key(),
            p.effective_mass_kg,
            p.spring_constant_n_per_m / 1000.0,
            p.max_force_n,
            p.max_force_n / per_unit,
            p.max_force_n / per_unit_loaded
        );
    }

    let chest = table.get(hazardsim::safety::BodyRegion::Chest).unwrap();
    println!("\nchest force against speed:");
    for v in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let bare = collision_force(v, chest, mass, 0.0).unwrap();
        let loaded = collision_force(v, chest, mass, payload).unwrap();
        println!("  {v:.1} m/s: {bare:6.1} N, {loaded:6.1} N loaded");
    }
}
