//! Reachability of a robot link from a standing human, in the open and
//! behind a fence panel with a hole.
//!
//! ```text
//! cargo run --release --example reach_check
//! ```

use hazardsim::geometry::{Point, Shape, Vector};
use hazardsim::human::{reach_check, HumanModel, HumanPose, RobotLinkShape};

fn main() {
    let model = HumanModel::default();
    let body = model.body(&HumanPose::standing(0.0, 0.0, 0.0));
    let link = |x: f64| RobotLinkShape {
        robot: 0,
        link: 0,
        shape: Shape::capsule(Point::new(x, -0.5, 1.3), Point::new(x, 0.5, 1.3), 0.05),
    };
    // fence at x = 0.3 with a square hole centred at z = 1.3
    let fence = |hole: f64| {
        let h = hole / 2.0;
        vec![
            Shape::aabb(
                Point::new(0.3, 0.0, (1.3 - h) / 2.0),
                Vector::new(0.01, 1.0, (1.3 - h) / 2.0),
            ),
            Shape::aabb(
                Point::new(0.3, 0.0, (2.2 + 1.3 + h) / 2.0),
                Vector::new(0.01, 1.0, (2.2 - 1.3 - h) / 2.0),
            ),
            Shape::aabb(
                Point::new(0.3, (1.0 + h) / 2.0, 1.3),
                Vector::new(0.01, (1.0 - h) / 2.0, h),
            ),
            Shape::aabb(
                Point::new(0.3, -(1.0 + h) / 2.0, 1.3),
                Vector::new(0.01, (1.0 - h) / 2.0, h),
            ),
        ]
    };

    println!("arm reach from the shoulder: {:.3} m", model.arm.reach());
    for x in [0.4, 0.6, 0.8, 1.0] {
        let out = reach_check(
            &body,
            &model.arm,
            &[link(x)],
            &[],
            model.arm.sample_budget,
            0,
            |_, _| 0.0,
        );
        report(&format!("bar at x = {x:.1} m, no fence"), &out);
    }
    for hole in [0.4, 0.3, 0.2] {
        let out = reach_check(
            &body,
            &model.arm,
            &[link(0.6)],
            &fence(hole),
            model.arm.sample_budget,
            0,
            |_, _| 0.0,
        );
        report(&format!("bar at x = 0.6 m, {hole:.1} m hole"), &out);
    }
}

fn report(label: &str, out: &hazardsim::human::ReachOutcome) {
    match &out.result {
        Some(r) => println!(
            "{label}: touched with the {:?} {} after {} samples",
            r.side, r.region, out.samples_drawn
        ),
        None => println!("{label}: unreachable ({} samples)", out.samples_drawn),
    }
}
