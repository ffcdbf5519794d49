use hazardsim::geometry::{distance, point_distance, segment_blocked, Point, Shape, Vector};
use nalgebra::Rotation3;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y, z)| Point::new(x, y, z))
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (point(), 0.01f64..0.5).prop_map(|(c, r)| Shape::sphere(c, r)),
        (point(), point(), 0.01f64..0.4).prop_map(|(a, b, r)| Shape::capsule(a, b, r)),
        (
            point(),
            (0.02f64..0.8, 0.02f64..0.8, 0.02f64..0.8),
            (-3.2f64..3.2, -1.5f64..1.5, -3.2f64..3.2)
        )
            .prop_map(|(c, (hx, hy, hz), (r, p, y))| Shape::cuboid(
                c,
                Vector::new(hx, hy, hz),
                Rotation3::from_euler_angles(r, p, y)
            )),
    ]
}

/// Closest distance from `p` to the segment `a`-`b` by dense sampling.
fn sampled_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    (0..=2000)
        .map(|i| (a + (b - a) * (i as f64 / 2000.0) - p).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `p` to a box by clamping in the box frame.
fn box_oracle(p: &Point, c: &Point, h: &Vector, rot: &Rotation3<f64>) -> f64 {
    let local = rot.inverse_transform_vector(&(p - c));
    let clamped = Vector::new(
        local.x.clamp(-h.x, h.x),
        local.y.clamp(-h.y, h.y),
        local.z.clamp(-h.z, h.z),
    );
    (local - clamped).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn distance_is_symmetric(a in shape(), b in shape()) {
        prop_assert_eq!(distance(&a, &b).distance, distance(&b, &a).distance);
    }

    #[test]
    fn witnesses_span_the_distance(a in shape(), b in shape()) {
        let c = distance(&a, &b);
        prop_assert!(c.distance >= 0.0);
        if c.distance > 0.0 {
            prop_assert!(((c.witness_a - c.witness_b).norm() - c.distance).abs() < 1e-9);
            prop_assert!(point_distance(&c.witness_a, &a).distance < 1e-7);
            prop_assert!(point_distance(&c.witness_b, &b).distance < 1e-7);
        }
    }

    #[test]
    fn translation_invariant(a in shape(), b in shape(), t in point()) {
        let d0 = distance(&a, &b).distance;
        let d1 = distance(&a.translated(&t.coords), &b.translated(&t.coords)).distance;
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn capsule_point_matches_sampling(a in point(), b in point(), r in 0.01f64..0.4, p in point()) {
        let exact = point_distance(&p, &Shape::capsule(a, b, r)).distance;
        let oracle = (sampled_segment_distance(&p, &a, &b) - r).max(0.0);
        // sampling over-estimates by at most half the sample spacing
        let slack = (b - a).norm() / 4000.0 + 1e-9;
        prop_assert!(exact <= oracle + 1e-9 && oracle - exact <= slack, "{exact} vs {oracle}");
    }

    #[test]
    fn box_point_matches_clamping(c in point(), (hx, hy, hz) in (0.02f64..0.8, 0.02f64..0.8, 0.02f64..0.8), (r, pi, y) in (-3.2f64..3.2, -1.5f64..1.5, -3.2f64..3.2), p in point()) {
        let h = Vector::new(hx, hy, hz);
        let rot = Rotation3::from_euler_angles(r, pi, y);
        let exact = point_distance(&p, &Shape::cuboid(c, h, rot)).distance;
        prop_assert!((exact - box_oracle(&p, &c, &h, &rot)).abs() < 1e-9);
    }

    #[test]
    fn sphere_box_is_point_box_minus_radius(c in point(), r in 0.01f64..0.5, bc in point(), (hx, hy, hz) in (0.02f64..0.8, 0.02f64..0.8, 0.02f64..0.8), yaw in -3.2f64..3.2) {
        let h = Vector::new(hx, hy, hz);
        let rot = Rotation3::from_euler_angles(0.0, 0.0, yaw);
        let exact = distance(&Shape::sphere(c, r), &Shape::cuboid(bc, h, rot)).distance;
        prop_assert!((exact - (box_oracle(&c, &bc, &h, &rot) - r).max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn capsule_capsule_bounded_by_samples(a0 in point(), a1 in point(), b0 in point(), b1 in point(), ra in 0.01f64..0.3, rb in 0.01f64..0.3) {
        let exact = distance(&Shape::capsule(a0, a1, ra), &Shape::capsule(b0, b1, rb)).distance;
        let sampled = (0..=400)
            .map(|i| sampled_segment_distance(&(a0 + (a1 - a0) * (i as f64 / 400.0)), &b0, &b1))
            .fold(f64::INFINITY, f64::min);
        let oracle = (sampled - ra - rb).max(0.0);
        let slack = (a1 - a0).norm() / 800.0 + (b1 - b0).norm() / 4000.0 + 1e-9;
        prop_assert!(exact <= oracle + 1e-9 && oracle - exact <= slack, "{exact} vs {oracle}");
    }

    #[test]
    fn segment_through_box_center_is_blocked(c in point(), (hx, hy, hz) in (0.02f64..0.8, 0.02f64..0.8, 0.02f64..0.8), dir in point()) {
        prop_assume!(dir.coords.norm() > 0.1);
        let b = Shape::aabb(c, Vector::new(hx, hy, hz));
        let d = dir.coords.normalize() * 3.0;
        prop_assert!(segment_blocked(&(c - d), &(c + d), &[b]));
    }
}

#[test]
fn analytic_fixtures() {
    let s = |x: f64| Shape::sphere(Point::new(x, 0.0, 0.0), 0.1);
    assert!((distance(&s(0.0), &s(1.0)).distance - 0.8).abs() < 1e-12);
    assert_eq!(distance(&s(0.0), &s(0.0)).distance, 0.0);
    let cap = Shape::capsule(Point::origin(), Point::new(0.0, 0.0, 1.0), 0.05);
    let ball = Shape::sphere(Point::new(0.2, 0.0, 0.5), 0.05);
    assert!((distance(&cap, &ball).distance - 0.1).abs() < 1e-12);
}

#[test]
fn segment_blocking_fixtures() {
    let wall = Shape::aabb(Point::new(1.0, 0.0, 1.0), Vector::new(0.01, 1.0, 1.0));
    let a = Point::new(0.0, 0.0, 1.0);
    assert!(segment_blocked(
        &a,
        &Point::new(2.0, 0.0, 1.0),
        std::slice::from_ref(&wall)
    ));
    assert!(!segment_blocked(
        &a,
        &Point::new(0.5, 0.0, 1.0),
        std::slice::from_ref(&wall)
    ));
    assert!(!segment_blocked(
        &a,
        &Point::new(2.0, 3.0, 1.0),
        std::slice::from_ref(&wall)
    ));
    // grazing the top face at z = 2 counts as blocked
    assert!(segment_blocked(
        &Point::new(0.0, 0.0, 2.0),
        &Point::new(2.0, 0.0, 2.0),
        std::slice::from_ref(&wall)
    ));
    assert!(!segment_blocked(&a, &a, std::slice::from_ref(&wall)));
}

#[test]
fn invalid_shapes_are_rejected() {
    assert!(Shape::sphere(Point::origin(), 0.0).validate().is_err());
    assert!(Shape::aabb(Point::origin(), Vector::new(0.1, -0.1, 0.1))
        .validate()
        .is_err());
    let skew = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0));
    assert!(Shape::cuboid(Point::origin(), Vector::new(0.1, 0.1, 0.1), skew)
        .validate()
        .is_err());
    assert!(Shape::capsule(Point::origin(), Point::new(1.0, 0.0, 0.0), 0.1)
        .validate()
        .is_ok());
}
