//! The virtual human: action space, locomotion/posture and body geometry.

mod arm;

pub use arm::{
    arm_shapes, insertion_path, reach_check, ArmAngles, ArmModel, ArmSide, JointLimits, ReachOutcome, ReachResult,
    RobotLinkShape,
};

use crate::geometry::{distance, Point, Shape, Vector};
use crate::safety::BodyRegion;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Human walking speed, m/s.
pub const WALKING_SPEED: f64 = 1.6;
pub const ACTION_COUNT: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Walking {
    Stop,
    Forward,
    Left45,
    Left90,
    Right45,
    Right90,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBody {
    Upright,
    BendForward,
    BendLeft,
    BendRight,
    BendForwardRight,
    BendForwardLeft,
}

impl Walking {
    pub const ALL: [Walking; 6] = [
        Walking::Stop,
        Walking::Forward,
        Walking::Left45,
        Walking::Left90,
        Walking::Right45,
        Walking::Right90,
    ];

    /// Heading change applied at the start of the action, rad (left positive).
    pub fn turn(self) -> f64 {
        match self {
            Walking::Stop | Walking::Forward => 0.0,
            Walking::Left45 => PI / 4.0,
            Walking::Left90 => PI / 2.0,
            Walking::Right45 => -PI / 4.0,
            Walking::Right90 => -PI / 2.0,
        }
    }

    pub fn moves(self) -> bool {
        self != Walking::Stop
    }
}

impl UpperBody {
    pub const ALL: [UpperBody; 6] = [
        UpperBody::Upright,
        UpperBody::BendForward,
        UpperBody::BendLeft,
        UpperBody::BendRight,
        UpperBody::BendForwardRight,
        UpperBody::BendForwardLeft,
    ];

    /// Posture target as (pitch, roll); pitch bends forward, roll bends right.
    pub fn target(self, posture: &PostureConfig) -> (f64, f64) {
        let p = posture.forward_bend_rad;
        let r = posture.side_bend_rad;
        match self {
            UpperBody::Upright => (0.0, 0.0),
            UpperBody::BendForward => (p, 0.0),
            UpperBody::BendLeft => (0.0, -r),
            UpperBody::BendRight => (0.0, r),
            UpperBody::BendForwardRight => (p, r),
            UpperBody::BendForwardLeft => (p, -r),
        }
    }
}

/// One combined walking and upper-body motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HumanAction {
    pub walking: Walking,
    pub upper_body: UpperBody,
}

impl HumanAction {
    pub const fn new(walking: Walking, upper_body: UpperBody) -> Self {
        Self { walking, upper_body }
    }

    /// Index in `0..36`: walking-major, upper body minor, each in declaration order.
    pub fn index(self) -> usize {
        let w = Walking::ALL.iter().position(|x| *x == self.walking).unwrap();
        let u = UpperBody::ALL.iter().position(|x| *x == self.upper_body).unwrap();
        w * 6 + u
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < ACTION_COUNT).then(|| Self::new(Walking::ALL[index / 6], UpperBody::ALL[index % 6]))
    }
}

impl Walking {
    pub fn key(self) -> &'static str {
        match self {
            Walking::Stop => "stop",
            Walking::Forward => "forward",
            Walking::Left45 => "left45",
            Walking::Left90 => "left90",
            Walking::Right45 => "right45",
            Walking::Right90 => "right90",
        }
    }
}

impl UpperBody {
    pub fn key(self) -> &'static str {
        match self {
            UpperBody::Upright => "upright",
            UpperBody::BendForward => "bend_forward",
            UpperBody::BendLeft => "bend_left",
            UpperBody::BendRight => "bend_right",
            UpperBody::BendForwardRight => "bend_forward_right",
            UpperBody::BendForwardLeft => "bend_forward_left",
        }
    }
}

/// Formats as `walking/upper_body`, e.g. `left45/bend_forward`.
impl fmt::Display for HumanAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.walking.key(), self.upper_body.key())
    }
}

impl FromStr for HumanAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, u) = s
            .split_once('/')
            .ok_or_else(|| format!("action `{s}` is not of the form walking/upper_body"))?;
        let walking = Walking::ALL
            .into_iter()
            .find(|x| x.key() == w.trim())
            .ok_or_else(|| format!("unknown walking motion `{w}`"))?;
        let upper_body = UpperBody::ALL
            .into_iter()
            .find(|x| x.key() == u.trim())
            .ok_or_else(|| format!("unknown upper-body motion `{u}`"))?;
        Ok(Self::new(walking, upper_body))
    }
}

/// All 36 actions, position equal to `HumanAction::index`.
pub fn action_space() -> [HumanAction; ACTION_COUNT] {
    std::array::from_fn(|i| HumanAction::from_index(i).unwrap())
}

/// Planar pose and torso posture: the human part of the simulator state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl HumanPose {
    pub fn standing(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading,
            pitch: 0.0,
            roll: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureConfig {
    pub forward_bend_rad: f64,
    pub side_bend_rad: f64,
    /// Rate at which each posture angle approaches its target, rad/s.
    pub rate_rad_s: f64,
}

impl Default for PostureConfig {
    fn default() -> Self {
        Self {
            forward_bend_rad: 45f64.to_radians(),
            side_bend_rad: 30f64.to_radians(),
            rate_rad_s: 250f64.to_radians(),
        }
    }
}

/// Body dimensions, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyDims {
    pub hip_height: f64,
    pub foot_spacing: f64,
    pub leg_radius: f64,
    pub torso_length: f64,
    pub torso_radius: f64,
    pub shoulder_offset: f64,
    pub shoulder_half_width: f64,
    pub head_offset: f64,
    pub head_radius: f64,
}

impl Default for BodyDims {
    fn default() -> Self {
        Self {
            hip_height: 0.9,
            foot_spacing: 0.2,
            leg_radius: 0.07,
            torso_length: 0.5,
            torso_radius: 0.15,
            shoulder_offset: 0.48,
            shoulder_half_width: 0.2,
            head_offset: 0.72,
            head_radius: 0.11,
        }
    }
}

/// Orthonormal torso frame: forward, left, along-spine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsoFrame {
    pub forward: Vector,
    pub left: Vector,
    pub up: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyShape {
    pub region: BodyRegion,
    pub shape: Shape,
}

/// Placed body geometry for one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanBody {
    pub pose: HumanPose,
    pub shapes: Vec<BodyShape>,
    pub shoulders: [Point; 2],
    pub feet: [Point; 2],
    pub torso: TorsoFrame,
}

impl HumanBody {
    pub fn shoulder(&self, side: ArmSide) -> Point {
        match side {
            ArmSide::Left => self.shoulders[0],
            ArmSide::Right => self.shoulders[1],
        }
    }
}

/// Everything about the human that does not change during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct HumanModel {
    pub dims: BodyDims,
    pub posture: PostureConfig,
    pub arm: ArmModel,
}

impl HumanModel {
    pub fn torso_frame(pose: &HumanPose) -> TorsoFrame {
        let (sh, ch) = pose.heading.sin_cos();
        let f = Vector::new(ch, sh, 0.0);
        let l = Vector::new(-sh, ch, 0.0);
        let z = Vector::z();
        let (sp, cp) = pose.pitch.sin_cos();
        let (sr, cr) = pose.roll.sin_cos();
        // pitch about `l`, then roll about the pitched forward axis
        let f1 = f * cp - z * sp;
        let z1 = z * cp + f * sp;
        TorsoFrame {
            forward: f1,
            left: l * cr + z1 * sr,
            up: z1 * cr - l * sr,
        }
    }

    pub fn body(&self, pose: &HumanPose) -> HumanBody {
        let d = &self.dims;
        let frame = Self::torso_frame(pose);
        let (sh, ch) = pose.heading.sin_cos();
        let lateral = Vector::new(-sh, ch, 0.0);
        let ground = Point::new(pose.x, pose.y, 0.0);
        let hip = ground + Vector::z() * d.hip_height;
        let half = d.foot_spacing / 2.0;
        let feet = [ground + lateral * half, ground - lateral * half];
        let mut shapes = Vec::with_capacity(5);
        for foot in feet {
            shapes.push(BodyShape {
                region: BodyRegion::LowerLegs,
                shape: Shape::capsule(
                    foot + Vector::z() * d.leg_radius,
                    foot + Vector::z() * (d.hip_height - d.leg_radius),
                    d.leg_radius,
                ),
            });
        }
        let torso_low = hip + frame.up * (d.torso_radius * 0.6);
        let neck = hip + frame.up * d.torso_length;
        shapes.push(BodyShape {
            region: BodyRegion::Chest,
            shape: Shape::capsule(torso_low, neck, d.torso_radius),
        });
        shapes.push(BodyShape {
            region: BodyRegion::Head,
            shape: Shape::sphere(hip + frame.up * d.head_offset, d.head_radius),
        });
        let sh_center = hip + frame.up * d.shoulder_offset;
        HumanBody {
            pose: *pose,
            shapes,
            shoulders: [
                sh_center + frame.left * d.shoulder_half_width,
                sh_center - frame.left * d.shoulder_half_width,
            ],
            feet,
            torso: frame,
        }
    }

    fn penetrates(&self, pose: &HumanPose, obstacles: &[Shape]) -> bool {
        if obstacles.is_empty() {
            return false;
        }
        let body = self.body(pose);
        body.shapes
            .iter()
            .any(|b| obstacles.iter().any(|o| distance(&b.shape, o).distance <= 0.0))
    }

    /// Heading change at the start of an action. A turn that would swing
    /// the body into an obstacle is skipped.
    pub fn begin_action(&self, pose: &HumanPose, action: HumanAction, obstacles: &[Shape]) -> HumanPose {
        let mut out = *pose;
        out.heading = wrap_angle(pose.heading + action.walking.turn());
        if out != *pose && self.penetrates(&out, obstacles) {
            return *pose;
        }
        out
    }

    /// Advances posture and position for `dt` seconds. Moves that would make
    /// the body penetrate an obstacle are shortened to the last free position.
    pub fn advance(&self, pose: &HumanPose, action: HumanAction, dt: f64, obstacles: &[Shape]) -> HumanPose {
        let (tp, tr) = action.upper_body.target(&self.posture);
        let step = self.posture.rate_rad_s * dt;
        let bent = HumanPose {
            pitch: approach(pose.pitch, tp, step),
            roll: approach(pose.roll, tr, step),
            ..*pose
        };
        let mut current = if bent != *pose && self.penetrates(&bent, obstacles) {
            *pose
        } else {
            bent
        };
        if action.walking.moves() {
            let dist = WALKING_SPEED * dt;
            let moved = |frac: f64| HumanPose {
                x: current.x + current.heading.cos() * dist * frac,
                y: current.y + current.heading.sin() * dist * frac,
                ..current
            };
            let full = moved(1.0);
            if !self.penetrates(&full, obstacles) {
                current = full;
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..12 {
                    let mid = 0.5 * (lo + hi);
                    if self.penetrates(&moved(mid), obstacles) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                current = moved(lo);
            }
        }
        current
    }

    /// Executes a whole action of duration `dt` in one go.
    pub fn apply_action(&self, pose: &HumanPose, action: HumanAction, dt: f64, obstacles: &[Shape]) -> HumanPose {
        let turned = self.begin_action(pose, action, obstacles);
        self.advance(&turned, action, dt, obstacles)
    }
}

fn approach(value: f64, target: f64, step: f64) -> f64 {
    if (target - value).abs() <= step {
        target
    } else if target > value {
        value + step
    } else {
        value - step
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}
