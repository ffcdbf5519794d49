//! Four-joint arm model and the sampled reachability check.
//!
//! The arm hangs from a shoulder anchor along the torso's down axis at zero
//! angles. Shoulder flexion swings it forward, abduction swings it outward,
//! upper-arm rotation spins it about its own axis and elbow flexion bends the
//! forearm. The hand is a bounding sphere on the wrist.

use super::{BodyShape, HumanBody, TorsoFrame};
use crate::geometry::{distance, point_distance, Point, Shape, Vector};
use crate::safety::{BodyRegion, CONTACT_TOLERANCE_M};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmSide {
    Left,
    Right,
}

impl ArmSide {
    fn sign(self) -> f64 {
        match self {
            ArmSide::Left => 1.0,
            ArmSide::Right => -1.0,
        }
    }
}

/// Joint ranges in radians, `[min, max]`. Mirrored for the right arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub flexion: [f64; 2],
    pub abduction: [f64; 2],
    pub rotation: [f64; 2],
    pub elbow: [f64; 2],
}

impl Default for JointLimits {
    fn default() -> Self {
        let r = |a: f64, b: f64| [a.to_radians(), b.to_radians()];
        Self {
            flexion: r(-60.0, 180.0),
            abduction: r(0.0, 135.0),
            rotation: r(-90.0, 90.0),
            elbow: r(0.0, 145.0),
        }
    }
}

impl JointLimits {
    pub fn as_array(&self) -> [[f64; 2]; 4] {
        [self.flexion, self.abduction, self.rotation, self.elbow]
    }

    pub fn contains(&self, a: &ArmAngles) -> bool {
        self.as_array()
            .iter()
            .zip(a.as_array())
            .all(|([lo, hi], v)| v >= *lo && v <= *hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmAngles {
    pub flexion: f64,
    pub abduction: f64,
    pub rotation: f64,
    pub elbow: f64,
}

impl ArmAngles {
    pub const ZERO: ArmAngles = ArmAngles {
        flexion: 0.0,
        abduction: 0.0,
        rotation: 0.0,
        elbow: 0.0,
    };

    pub fn as_array(&self) -> [f64; 4] {
        [self.flexion, self.abduction, self.rotation, self.elbow]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub upper_arm_length: f64,
    pub lower_arm_length: f64,
    pub hand_radius: f64,
    pub upper_arm_radius: f64,
    pub forearm_radius: f64,
    pub limits: JointLimits,
    /// Samples per shoulder per check.
    pub sample_budget: usize,
}

impl Default for ArmModel {
    fn default() -> Self {
        Self {
            upper_arm_length: 0.335,
            lower_arm_length: 0.264,
            hand_radius: 0.12,
            upper_arm_radius: 0.05,
            forearm_radius: 0.04,
            limits: JointLimits::default(),
            sample_budget: 1500,
        }
    }
}

impl ArmModel {
    /// Farthest any arm shape extends from the shoulder anchor.
    pub fn reach(&self) -> f64 {
        self.upper_arm_length + self.lower_arm_length + self.hand_radius
    }
}

/// Upper arm, forearm and hand shapes for one configuration.
pub fn arm_shapes(
    shoulder: &Point,
    torso: &TorsoFrame,
    side: ArmSide,
    arm: &ArmModel,
    angles: &ArmAngles,
) -> [BodyShape; 3] {
    let s = side.sign();
    let shoulder_rot = Rotation3::from_axis_angle(&Vector::x_axis(), s * angles.abduction)
        * Rotation3::from_axis_angle(&Vector::y_axis(), -angles.flexion)
        * Rotation3::from_axis_angle(&Vector::z_axis(), s * angles.rotation);
    let down = -Vector::z();
    let upper_local = shoulder_rot * down;
    let fore_local = shoulder_rot * (Rotation3::from_axis_angle(&Vector::y_axis(), -angles.elbow) * down);
    let to_world = |v: Vector| torso.forward * v.x + torso.left * v.y + torso.up * v.z;
    let elbow = shoulder + to_world(upper_local) * arm.upper_arm_length;
    let wrist = elbow + to_world(fore_local) * arm.lower_arm_length;
    [
        BodyShape {
            region: BodyRegion::UpperArm,
            shape: Shape::capsule(*shoulder, elbow, arm.upper_arm_radius),
        },
        BodyShape {
            region: BodyRegion::Forearm,
            shape: Shape::capsule(elbow, wrist, arm.forearm_radius),
        },
        BodyShape {
            region: BodyRegion::Hand,
            shape: Shape::sphere(wrist, arm.hand_radius),
        },
    ]
}

/// A robot link placed in the world, tagged with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotLinkShape {
    pub robot: usize,
    pub link: usize,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachResult {
    pub contact_point: Point,
    pub robot: usize,
    pub link: usize,
    pub region: BodyRegion,
    pub side: ArmSide,
    pub angles: ArmAngles,
    pub robot_point_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachOutcome {
    pub result: Option<ReachResult>,
    pub samples_drawn: usize,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Shifted Halton point `i` over the unit 4-cube.
fn halton4(i: u64, shift: &[f64; 4]) -> [f64; 4] {
    const BASES: [u64; 4] = [2, 3, 5, 7];
    std::array::from_fn(|d| {
        let v = radical_inverse(i + 1, BASES[d]) + shift[d];
        v - v.floor()
    })
}

/// Searches arm configurations of both arms for one that touches a robot
/// link without the arm or the hand's insertion path penetrating any
/// barrier.
///
/// Shoulders farther than the arm's reach from every link are skipped
/// without sampling. Samples follow a shifted Halton sequence over the joint
/// box, so the result is a pure function of the inputs and `seed`.
pub fn reach_check<F>(
    body: &HumanBody,
    arm: &ArmModel,
    robot_links: &[RobotLinkShape],
    barriers: &[Shape],
    sample_budget: usize,
    seed: u64,
    speed_at: F,
) -> ReachOutcome
where
    F: Fn(&RobotLinkShape, &Point) -> f64,
{
    let reach = arm.reach();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    let limits = arm.limits.as_array();
    let mut samples = 0;
    for side in [ArmSide::Left, ArmSide::Right] {
        let shoulder = body.shoulder(side);
        let near_links: Vec<&RobotLinkShape> = robot_links
            .iter()
            .filter(|l| point_distance(&shoulder, &l.shape).distance <= reach)
            .collect();
        if near_links.is_empty() {
            continue;
        }
        let near_barriers: Vec<&Shape> = barriers
            .iter()
            .filter(|b| point_distance(&shoulder, b).distance <= reach)
            .collect();
        for i in 0..sample_budget {
            samples += 1;
            let u = halton4(i as u64, &shift);
            let v: [f64; 4] = std::array::from_fn(|d| limits[d][0] + u[d] * (limits[d][1] - limits[d][0]));
            let angles = ArmAngles {
                flexion: v[0],
                abduction: v[1],
                rotation: v[2],
                elbow: v[3],
            };
            let shapes = arm_shapes(&shoulder, &body.torso, side, arm, &angles);
            if let Some(result) = touching(&shapes, &near_links, &near_barriers, side, &angles, &speed_at) {
                return ReachOutcome {
                    result: Some(result),
                    samples_drawn: samples,
                };
            }
        }
    }
    ReachOutcome {
        result: None,
        samples_drawn: samples,
    }
}

/// Volume the hand sweeps on its way out along the arm. A barrier opening
/// that admits the forearm but not the hand blocks this path.
pub fn insertion_path(shapes: &[BodyShape; 3]) -> [BodyShape; 2] {
    let (
        Shape::Capsule {
            a: shoulder, b: elbow, ..
        },
        Shape::Sphere { center: wrist, radius },
    ) = (&shapes[0].shape, &shapes[2].shape)
    else {
        unreachable!("arm shapes are two capsules and a sphere")
    };
    [
        BodyShape {
            region: BodyRegion::Hand,
            shape: Shape::capsule(*shoulder, *elbow, *radius),
        },
        BodyShape {
            region: BodyRegion::Hand,
            shape: Shape::capsule(*elbow, *wrist, *radius),
        },
    ]
}

fn touching<F>(
    shapes: &[BodyShape; 3],
    links: &[&RobotLinkShape],
    barriers: &[&Shape],
    side: ArmSide,
    angles: &ArmAngles,
    speed_at: &F,
) -> Option<ReachResult>
where
    F: Fn(&RobotLinkShape, &Point) -> f64,
{
    // hand first, then forearm, then upper arm
    let hit = shapes.iter().rev().find_map(|part| {
        links.iter().find_map(|link| {
            let c = distance(&part.shape, &link.shape);
            (c.distance <= CONTACT_TOLERANCE_M).then_some((part.region, *link, c.witness_b))
        })
    })?;
    let blocked = shapes
        .iter()
        .chain(&insertion_path(shapes))
        .any(|part| barriers.iter().any(|b| distance(&part.shape, b).distance <= 0.0));
    if blocked {
        return None;
    }
    let (region, link, point) = hit;
    Some(ReachResult {
        contact_point: point,
        robot: link.robot,
        link: link.link,
        region,
        side,
        angles: *angles,
        robot_point_speed: speed_at(link, &point),
    })
}
