use hazardsim::geometry::{distance, Point, Shape, Vector};
use hazardsim::human::{arm_shapes, ArmAngles, ArmModel, ArmSide, HumanBody};
use hazardsim::safety::CONTACT_TOLERANCE_M;

pub fn wall_with_opening(x: f64, oy: f64, oz: f64, size: f64) -> Vec<Shape> {
    let h = size / 2.0;
    let t = 0.01;
    let (y0, y1, z0, z1) = (-1.0, 1.0, 0.0, 2.2);
    vec![
        Shape::aabb(
            Point::new(x, (y0 + oy - h) / 2.0, 1.1),
            Vector::new(t, (oy - h - y0) / 2.0, 1.1),
        ),
        Shape::aabb(
            Point::new(x, (y1 + oy + h) / 2.0, 1.1),
            Vector::new(t, (y1 - oy - h) / 2.0, 1.1),
        ),
        Shape::aabb(
            Point::new(x, oy, (z0 + oz - h) / 2.0),
            Vector::new(t, h, (oz - h - z0) / 2.0),
        ),
        Shape::aabb(
            Point::new(x, oy, (z1 + oz + h) / 2.0),
            Vector::new(t, h, (z1 - oz - h) / 2.0),
        ),
    ]
}

pub fn config_touches(
    body: &HumanBody,
    arm: &ArmModel,
    side: ArmSide,
    angles: &ArmAngles,
    target: &Shape,
    barriers: &[Shape],
) -> bool {
    let shapes = arm_shapes(&body.shoulder(side), &body.torso, side, arm, angles);
    // the hand travels out along the arm, so its sphere swept over both
    // segments must stay clear of barriers too
    let Shape::Capsule { a: sh, b: elbow, .. } = shapes[0].shape else {
        panic!()
    };
    let Shape::Sphere { center: wrist, radius } = shapes[2].shape else {
        panic!()
    };
    let sweep = [Shape::capsule(sh, elbow, radius), Shape::capsule(elbow, wrist, radius)];
    shapes
        .iter()
        .any(|p| distance(&p.shape, target).distance <= CONTACT_TOLERANCE_M)
        && !shapes
            .iter()
            .map(|p| &p.shape)
            .chain(&sweep)
            .any(|p| barriers.iter().any(|b| distance(p, b).distance <= 0.0))
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Exhaustive search over a 5 degree joint grid of both arms.
pub fn grid_oracle(body: &HumanBody, arm: &ArmModel, target: &Shape, barriers: &[Shape]) -> bool {
    let step = 5f64.to_radians();
    let l = arm.limits;
    let (fl, ab, ro, el) = (
        grid(l.flexion[0], l.flexion[1], step),
        grid(l.abduction[0], l.abduction[1], step),
        grid(l.rotation[0], l.rotation[1], step),
        grid(l.elbow[0], l.elbow[1], step),
    );
    for side in [ArmSide::Left, ArmSide::Right] {
        let sh = body.shoulder(side);
        if hazardsim::geometry::point_distance(&sh, target).distance > arm.reach() {
            continue;
        }
        for &f in &fl {
            for &a in &ab {
                for &r in &ro {
                    for &e in &el {
                        let angles = ArmAngles {
                            flexion: f,
                            abduction: a,
                            rotation: r,
                            elbow: e,
                        };
                        if config_touches(body, arm, side, &angles, target, barriers) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}
