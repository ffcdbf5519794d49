//! Shape primitives and exact separation queries.
//!
//! Every shape is a convex "core" (point, segment or oriented box) swept by a
//! radius: spheres are points with a radius, capsules are segments with a
//! radius and boxes carry no radius. Distances are computed between cores with
//! closed-form closest-feature routines and the radii are subtracted
//! afterwards, so every query is exact up to floating point rounding.
//!
//! All lengths are in meters, in a right-handed z-up world frame.

use nalgebra::{Matrix3, Point3, Rotation3, Vector3};
use std::cmp::Ordering;

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}

/// A convex solid used for robot links, body parts and static structures.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere {
        center: Point,
        radius: f64,
    },
    Capsule {
        a: Point,
        b: Point,
        radius: f64,
    },
    Cuboid {
        center: Point,
        half_extents: Vector,
        rotation: Rotation3<f64>,
    },
}

/// Closest pair between two shapes. `distance` is zero for touching or
/// interpenetrating shapes, in which case the witnesses are only indicative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactInfo {
    pub distance: f64,
    pub witness_a: Point,
    pub witness_b: Point,
}

impl ContactInfo {
    fn swapped(self) -> Self {
        Self {
            distance: self.distance,
            witness_a: self.witness_b,
            witness_b: self.witness_a,
        }
    }
}

impl Shape {
    pub fn sphere(center: Point, radius: f64) -> Self {
        Shape::Sphere { center, radius }
    }

    pub fn capsule(a: Point, b: Point, radius: f64) -> Self {
        Shape::Capsule { a, b, radius }
    }

    pub fn cuboid(center: Point, half_extents: Vector, rotation: Rotation3<f64>) -> Self {
        Shape::Cuboid {
            center,
            half_extents,
            rotation,
        }
    }

    /// Axis-aligned box.
    pub fn aabb(center: Point, half_extents: Vector) -> Self {
        Self::cuboid(center, half_extents, Rotation3::identity())
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = |p: &Point| p.iter().all(|c| c.is_finite());
        match self {
            Shape::Sphere { center, radius } => {
                if !finite(center) {
                    return Err(GeometryError::InvalidShape("sphere center not finite".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(GeometryError::InvalidShape(format!(
                        "sphere radius must be > 0, got {radius}"
                    )));
                }
            }
            Shape::Capsule { a, b, radius } => {
                if !finite(a) || !finite(b) {
                    return Err(GeometryError::InvalidShape("capsule endpoint not finite".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(GeometryError::InvalidShape(format!(
                        "capsule radius must be > 0, got {radius}"
                    )));
                }
            }
            Shape::Cuboid {
                center,
                half_extents,
                rotation,
            } => {
                if !finite(center) {
                    return Err(GeometryError::InvalidShape("box center not finite".into()));
                }
                if !half_extents.iter().all(|h| *h > 0.0 && h.is_finite()) {
                    return Err(GeometryError::InvalidShape(format!(
                        "box half-extents must be > 0, got {:?}",
                        half_extents.as_slice()
                    )));
                }
                let m = rotation.matrix();
                let ortho = (m.transpose() * m - Matrix3::identity()).abs().max();
                if ortho > 1e-9 || (m.determinant() - 1.0).abs() > 1e-9 {
                    return Err(GeometryError::InvalidShape(
                        "box orientation is not a proper rotation".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn translated(&self, offset: &Vector) -> Self {
        match self {
            Shape::Sphere { center, radius } => Shape::Sphere {
                center: center + offset,
                radius: *radius,
            },
            Shape::Capsule { a, b, radius } => Shape::Capsule {
                a: a + offset,
                b: b + offset,
                radius: *radius,
            },
            Shape::Cuboid {
                center,
                half_extents,
                rotation,
            } => Shape::Cuboid {
                center: center + offset,
                half_extents: *half_extents,
                rotation: *rotation,
            },
        }
    }

    /// Representative interior point.
    pub fn centroid(&self) -> Point {
        match self {
            Shape::Sphere { center, .. } => *center,
            Shape::Capsule { a, b, .. } => nalgebra::center(a, b),
            Shape::Cuboid { center, .. } => *center,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Shape::Sphere { .. } => 0,
            Shape::Capsule { .. } => 1,
            Shape::Cuboid { .. } => 2,
        }
    }

    fn key(&self) -> Vec<f64> {
        match self {
            Shape::Sphere { center, radius } => vec![center.x, center.y, center.z, *radius],
            Shape::Capsule { a, b, radius } => vec![a.x, a.y, a.z, b.x, b.y, b.z, *radius],
            Shape::Cuboid {
                center,
                half_extents,
                rotation,
            } => {
                let mut k = vec![center.x, center.y, center.z];
                k.extend(half_extents.iter());
                k.extend(rotation.matrix().iter());
                k
            }
        }
    }

    fn core(&self) -> (Core, f64) {
        match self {
            Shape::Sphere { center, radius } => (Core::Point(*center), *radius),
            Shape::Capsule { a, b, radius } => (Core::Segment(*a, *b), *radius),
            Shape::Cuboid {
                center,
                half_extents,
                rotation,
            } => (
                Core::Obb(Obb {
                    center: *center,
                    half: *half_extents,
                    rot: *rotation,
                }),
                0.0,
            ),
        }
    }

    fn canonical_cmp(&self, other: &Shape) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| {
            let (ka, kb) = (self.key(), other.key());
            ka.iter()
                .zip(kb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Minimal Euclidean separation between two shapes.
///
/// The pair is put into a canonical order before evaluation so the result is
/// bit-for-bit symmetric in its arguments.
pub fn distance(a: &Shape, b: &Shape) -> ContactInfo {
    if a.canonical_cmp(b) == Ordering::Greater {
        return distance_ordered(b, a).swapped();
    }
    distance_ordered(a, b)
}

fn distance_ordered(a: &Shape, b: &Shape) -> ContactInfo {
    let (core_a, ra) = a.core();
    let (core_b, rb) = b.core();
    let (dc, pa, pb) = core_distance(&core_a, &core_b);
    inflate(dc, pa, pb, ra, rb)
}

fn inflate(dc: f64, pa: Point, pb: Point, ra: f64, rb: f64) -> ContactInfo {
    let gap = dc - ra - rb;
    if dc > 0.0 {
        let n = (pb - pa) / dc;
        if gap > 0.0 {
            return ContactInfo {
                distance: gap,
                witness_a: pa + n * ra,
                witness_b: pb - n * rb,
            };
        }
        return ContactInfo {
            distance: 0.0,
            witness_a: pa + n * ra.min(dc),
            witness_b: pb - n * rb.min(dc),
        };
    }
    ContactInfo {
        distance: 0.0,
        witness_a: pa,
        witness_b: pb,
    }
}

/// Distance from a point to a solid shape (zero inside).
pub fn point_distance(p: &Point, shape: &Shape) -> ContactInfo {
    let (core, r) = shape.core();
    let (dc, pa, pb) = core_distance(&Core::Point(*p), &core);
    inflate(dc, pa, pb, 0.0, r)
}

/// True iff the open segment `p`-`q` touches or passes through any barrier.
pub fn segment_blocked(p: &Point, q: &Point, barriers: &[Shape]) -> bool {
    let d = q - p;
    if d.norm_squared() == 0.0 {
        return false;
    }
    // open segment: drop the endpoints themselves
    let shrink = 1e-9;
    let p0 = p + d * shrink;
    let p1 = q - d * shrink;
    barriers.iter().any(|barrier| {
        let (core, r) = barrier.core();
        let (dc, _, _) = core_distance(&Core::Segment(p0, p1), &core);
        dc <= r
    })
}

#[derive(Debug, Clone, Copy)]
struct Obb {
    center: Point,
    half: Vector,
    rot: Rotation3<f64>,
}

impl Obb {
    fn to_local(&self, p: &Point) -> Vector {
        self.rot.inverse_transform_vector(&(p - self.center))
    }

    fn to_world(&self, v: &Vector) -> Point {
        self.center + self.rot * v
    }

    fn clamp_local(&self, v: &Vector) -> Vector {
        Vector::new(
            v.x.clamp(-self.half.x, self.half.x),
            v.y.clamp(-self.half.y, self.half.y),
            v.z.clamp(-self.half.z, self.half.z),
        )
    }

    fn local_vertices(&self) -> [Vector; 8] {
        let h = self.half;
        let mut out = [Vector::zeros(); 8];
        for (i, v) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *v = Vector::new(sx * h.x, sy * h.y, sz * h.z);
        }
        out
    }

    fn world_vertices(&self) -> [Point; 8] {
        self.local_vertices().map(|v| self.to_world(&v))
    }

    /// Vertex index pairs of the twelve edges (indices differ in one bit).
    fn edge_indices() -> [(usize, usize); 12] {
        let mut out = [(0, 0); 12];
        let mut n = 0;
        for i in 0..8usize {
            for bit in [1usize, 2, 4] {
                if i & bit == 0 {
                    out[n] = (i, i | bit);
                    n += 1;
                }
            }
        }
        out
    }

    fn axes(&self) -> [Vector; 3] {
        let m = self.rot.matrix();
        [
            m.column(0).into_owned(),
            m.column(1).into_owned(),
            m.column(2).into_owned(),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
enum Core {
    Point(Point),
    Segment(Point, Point),
    Obb(Obb),
}

fn core_distance(a: &Core, b: &Core) -> (f64, Point, Point) {
    let flip = |(d, x, y): (f64, Point, Point)| (d, y, x);
    match (a, b) {
        (Core::Point(p), Core::Point(q)) => ((q - p).norm(), *p, *q),
        (Core::Point(p), Core::Segment(s0, s1)) => {
            let c = closest_on_segment(p, s0, s1);
            ((c - p).norm(), *p, c)
        }
        (Core::Segment(..), Core::Point(_)) => flip(core_distance(b, a)),
        (Core::Point(p), Core::Obb(o)) => point_obb(p, o),
        (Core::Obb(_), Core::Point(_)) => flip(core_distance(b, a)),
        (Core::Segment(p0, p1), Core::Segment(q0, q1)) => {
            let (c1, c2) = closest_segment_segment(p0, p1, q0, q1);
            ((c2 - c1).norm(), c1, c2)
        }
        (Core::Segment(p0, p1), Core::Obb(o)) => segment_obb(p0, p1, o),
        (Core::Obb(_), Core::Segment(..)) => flip(core_distance(b, a)),
        (Core::Obb(o1), Core::Obb(o2)) => obb_obb(o1, o2),
    }
}

fn closest_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= PARALLEL_EPS * PARALLEL_EPS {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest points between segments `p1`-`q1` and `p2`-`q2`.
fn closest_segment_segment(p1: &Point, q1: &Point, p2: &Point, q2: &Point) -> (Point, Point) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let eps = PARALLEL_EPS * PARALLEL_EPS;
    let (s, t);
    if a <= eps && e <= eps {
        s = 0.0;
        t = 0.0;
    } else if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn point_obb(p: &Point, o: &Obb) -> (f64, Point, Point) {
    let local = o.to_local(p);
    let clamped = o.clamp_local(&local);
    let c = o.to_world(&clamped);
    ((local - clamped).norm(), *p, c)
}

/// Parametric entry point of a segment into a closed box, in local coordinates.
fn segment_enters_box(p0: &Vector, p1: &Vector, half: &Vector) -> Option<f64> {
    let d = p1 - p0;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..3 {
        if d[i].abs() < PARALLEL_EPS {
            if p0[i] < -half[i] || p0[i] > half[i] {
                return None;
            }
        } else {
            let mut ta = (-half[i] - p0[i]) / d[i];
            let mut tb = (half[i] - p0[i]) / d[i];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some(t0)
}

fn segment_obb(p0: &Point, p1: &Point, o: &Obb) -> (f64, Point, Point) {
    let l0 = o.to_local(p0);
    let l1 = o.to_local(p1);
    if let Some(t) = segment_enters_box(&l0, &l1, &o.half) {
        let hit = p0 + (p1 - p0) * t;
        return (0.0, hit, hit);
    }
    let mut best = point_obb(p0, o);
    let cand = point_obb(p1, o);
    if cand.0 < best.0 {
        best = cand;
    }
    let verts = o.world_vertices();
    for (i, j) in Obb::edge_indices() {
        let (c1, c2) = closest_segment_segment(p0, p1, &verts[i], &verts[j]);
        let d = (c2 - c1).norm();
        if d < best.0 {
            best = (d, c1, c2);
        }
    }
    best
}

fn obbs_overlap(a: &Obb, b: &Obb) -> bool {
    let aa = a.axes();
    let ba = b.axes();
    let t = b.center - a.center;
    let separated_on = |axis: &Vector| -> bool {
        let n2 = axis.norm_squared();
        if n2 < PARALLEL_EPS {
            return false;
        }
        let ra: f64 = (0..3).map(|i| a.half[i] * aa[i].dot(axis).abs()).sum();
        let rb: f64 = (0..3).map(|i| b.half[i] * ba[i].dot(axis).abs()).sum();
        t.dot(axis).abs() > ra + rb
    };
    for axis in aa.iter().chain(ba.iter()) {
        if separated_on(axis) {
            return false;
        }
    }
    for x in &aa {
        for y in &ba {
            if separated_on(&x.cross(y)) {
                return false;
            }
        }
    }
    true
}

fn obb_obb(a: &Obb, b: &Obb) -> (f64, Point, Point) {
    if obbs_overlap(a, b) {
        let (_, _, on_a) = point_obb(&b.center, a);
        return (0.0, on_a, on_a);
    }
    let va = a.world_vertices();
    let vb = b.world_vertices();
    let mut best = (f64::INFINITY, a.center, b.center);
    for p in &va {
        let (d, pa, pb) = point_obb(p, b);
        if d < best.0 {
            best = (d, pa, pb);
        }
    }
    for p in &vb {
        let (d, pb, pa) = point_obb(p, a);
        if d < best.0 {
            best = (d, pa, pb);
        }
    }
    for (i, j) in Obb::edge_indices() {
        for (k, l) in Obb::edge_indices() {
            let (c1, c2) = closest_segment_segment(&va[i], &va[j], &vb[k], &vb[l]);
            let d = (c2 - c1).norm();
            if d < best.0 {
                best = (d, c1, c2);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Unit;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn separated_spheres() {
        let a = Shape::sphere(p(0.0, 0.0, 0.0), 0.1);
        let b = Shape::sphere(p(1.0, 0.0, 0.0), 0.1);
        let c = distance(&a, &b);
        assert!((c.distance - 0.8).abs() < 1e-12);
        assert!((c.witness_a - p(0.1, 0.0, 0.0)).norm() < 1e-12);
        assert!((c.witness_b - p(0.9, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identical_spheres_touch() {
        let a = Shape::sphere(p(0.3, 0.2, 0.1), 0.1);
        assert_eq!(distance(&a, &a.clone()).distance, 0.0);
    }

    #[test]
    fn capsule_sphere() {
        let cap = Shape::capsule(p(0.0, 0.0, 0.0), p(0.0, 0.0, 1.0), 0.05);
        let s = Shape::sphere(p(0.2, 0.0, 0.5), 0.05);
        assert!((distance(&cap, &s).distance - 0.1).abs() < 1e-12);
        assert!((distance(&s, &cap).distance - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rotated_box_vs_point() {
        let rot = Rotation3::from_axis_angle(&Vector::z_axis(), std::f64::consts::FRAC_PI_4);
        let b = Shape::cuboid(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0), rot);
        // corner of the rotated box sits at x = sqrt(2)
        let c = point_distance(&p(2.0, 0.0, 0.0), &b);
        assert!((c.distance - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn capsule_through_box_is_zero() {
        let b = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(0.5, 0.5, 0.5));
        let cap = Shape::capsule(p(-2.0, 0.0, 0.0), p(2.0, 0.0, 0.0), 0.01);
        assert_eq!(distance(&cap, &b).distance, 0.0);
    }

    #[test]
    fn capsule_parallel_to_box_face() {
        let b = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(0.5, 0.5, 0.5));
        let cap = Shape::capsule(p(-0.2, 0.0, 1.0), p(0.2, 0.0, 1.0), 0.1);
        assert!((distance(&cap, &b).distance - 0.4).abs() < 1e-12);
    }

    #[test]
    fn box_box_edge_to_edge() {
        let a = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(0.5, 0.5, 0.5));
        let rot = Rotation3::from_axis_angle(&Vector::z_axis(), std::f64::consts::FRAC_PI_4);
        let b = Shape::cuboid(p(2.0, 0.0, 0.0), Vector::new(0.5, 0.5, 0.5), rot);
        let expected = 2.0 - 0.5 - 0.5 * 2f64.sqrt();
        assert!((distance(&a, &b).distance - expected).abs() < 1e-12);
    }

    #[test]
    fn skewed_boxes_overlap() {
        let a = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 0.1, 0.1));
        let axis = Unit::new_normalize(Vector::new(1.0, 1.0, 1.0));
        let b = Shape::cuboid(
            p(0.5, 0.0, 0.0),
            Vector::new(0.3, 0.3, 0.05),
            Rotation3::from_axis_angle(&axis, 0.7),
        );
        assert_eq!(distance(&a, &b).distance, 0.0);
    }

    #[test]
    fn blocked_through_interior() {
        let wall = Shape::aabb(p(0.0, 0.0, 1.0), Vector::new(0.05, 2.0, 1.0));
        assert!(segment_blocked(&p(-1.0, 0.0, 1.0), &p(1.0, 0.0, 1.0), &[wall.clone()]));
        assert!(!segment_blocked(&p(-1.0, 0.0, 2.5), &p(1.0, 0.0, 2.5), &[wall]));
    }

    #[test]
    fn grazing_counts_as_blocked() {
        let slab = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0));
        assert!(segment_blocked(&p(-3.0, 0.0, 1.0), &p(3.0, 0.0, 1.0), &[slab]));
    }

    #[test]
    fn degenerate_segment_not_blocked() {
        let slab = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0));
        assert!(!segment_blocked(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 0.0), &[slab]));
    }

    #[test]
    fn endpoint_contact_does_not_block() {
        // segment ends exactly on the face: open segment excludes it
        let slab = Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0));
        assert!(!segment_blocked(&p(1.0, 0.0, 0.0), &p(3.0, 0.0, 0.0), &[slab]));
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        assert!(Shape::sphere(p(0.0, 0.0, 0.0), 0.0).validate().is_err());
        assert!(Shape::capsule(p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), -1.0)
            .validate()
            .is_err());
        assert!(Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 0.0, 1.0))
            .validate()
            .is_err());
        let reflect = Rotation3::from_matrix_unchecked(Matrix3::from_diagonal(&Vector::new(1.0, 1.0, -1.0)));
        assert!(Shape::cuboid(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0), reflect)
            .validate()
            .is_err());
        assert!(Shape::aabb(p(0.0, 0.0, 0.0), Vector::new(1.0, 1.0, 1.0))
            .validate()
            .is_ok());
    }
}
