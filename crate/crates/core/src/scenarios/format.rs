use super::ScenarioError;
use crate::geometry::{distance, Point, Shape, Vector};
use crate::human::{ArmModel, HumanAction, HumanModel, HumanPose, JointLimits};
use crate::safety::{BodyRegion, BodyRegionTable};
use crate::simulator::{
    DeviceKind, GraspEvent, Joint, JointKind, Link, RobotModel, SafetyDevice, StaticShape, Trajectory, Waypoint, World,
};
use nalgebra::{Isometry3, Rotation3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub expected_hazard: String,
    #[serde(default)]
    pub design_note: String,
    /// Pinned action sequence that reproduces the seeded hazard.
    #[serde(default)]
    pub witness: Vec<String>,
    /// Path of a body-region table; the bundled table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_region_table: Option<String>,
    pub human: HumanSpec,
    #[serde(default)]
    pub arm: ArmSpec,
    #[serde(default)]
    pub reach: ReachSpec,
    #[serde(default, rename = "static")]
    pub statics: Vec<StaticSpec>,
    #[serde(default, rename = "robot")]
    pub robots: Vec<RobotSpec>,
    #[serde(default, rename = "device")]
    pub devices: Vec<DeviceSpec>,
    #[serde(skip)]
    pub region_table: Option<BodyRegionTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanSpec {
    pub spawn_position_m: [f64; 2],
    #[serde(default)]
    pub spawn_heading_deg: f64,
}

fn d_upper() -> f64 {
    0.335
}
fn d_lower() -> f64 {
    0.264
}
fn d_hand() -> f64 {
    0.12
}
fn d_flex() -> [f64; 2] {
    [-60.0, 180.0]
}
fn d_abd() -> [f64; 2] {
    [0.0, 135.0]
}
fn d_rot() -> [f64; 2] {
    [-90.0, 90.0]
}
fn d_elbow() -> [f64; 2] {
    [0.0, 145.0]
}
fn d_budget() -> usize {
    1500
}
fn d_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default = "d_upper")]
    pub upper_arm_length_m: f64,
    #[serde(default = "d_lower")]
    pub lower_arm_length_m: f64,
    #[serde(default = "d_hand")]
    pub hand_radius_m: f64,
    #[serde(default = "d_flex")]
    pub flexion_limits_deg: [f64; 2],
    #[serde(default = "d_abd")]
    pub abduction_limits_deg: [f64; 2],
    #[serde(default = "d_rot")]
    pub rotation_limits_deg: [f64; 2],
    #[serde(default = "d_elbow")]
    pub elbow_limits_deg: [f64; 2],
}

impl Default for ArmSpec {
    fn default() -> Self {
        Self {
            upper_arm_length_m: d_upper(),
            lower_arm_length_m: d_lower(),
            hand_radius_m: d_hand(),
            flexion_limits_deg: d_flex(),
            abduction_limits_deg: d_abd(),
            rotation_limits_deg: d_rot(),
            elbow_limits_deg: d_elbow(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachSpec {
    #[serde(default = "d_budget")]
    pub sample_budget: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ReachSpec {
    fn default() -> Self {
        Self {
            sample_budget: d_budget(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeSpec {
    Sphere {
        center_m: [f64; 3],
        radius_m: f64,
    },
    Capsule {
        a_m: [f64; 3],
        b_m: [f64; 3],
        radius_m: f64,
    },
    Box {
        center_m: [f64; 3],
        half_extents_m: [f64; 3],
        #[serde(default)]
        rpy_deg: [f64; 3],
    },
}

fn pt(a: [f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

fn rpy(a: [f64; 3]) -> Rotation3<f64> {
    Rotation3::from_euler_angles(a[0].to_radians(), a[1].to_radians(), a[2].to_radians())
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Shape {
        match self {
            ShapeSpec::Sphere { center_m, radius_m } => Shape::sphere(pt(*center_m), *radius_m),
            ShapeSpec::Capsule { a_m, b_m, radius_m } => Shape::capsule(pt(*a_m), pt(*b_m), *radius_m),
            ShapeSpec::Box {
                center_m,
                half_extents_m,
                rpy_deg,
            } => Shape::cuboid(pt(*center_m), Vector::from(*half_extents_m), rpy(*rpy_deg)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSpec {
    pub name: String,
    #[serde(flatten)]
    pub shape: ShapeSpec,
    /// Whether the shape separates human and robot for the danger index.
    #[serde(default = "d_true")]
    pub barrier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub kind: JointKind,
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin_m: [f64; 3],
    #[serde(default)]
    pub origin_rpy_deg: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    /// Index of the joint whose frame carries the link.
    pub joint: usize,
    pub a_m: [f64; 3],
    pub b_m: [f64; 3],
    pub radius_m: f64,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSpec {
    pub time_s: f64,
    /// Degrees for revolute joints, meters for prismatic joints.
    pub joints_deg_or_m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attach_payload_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub release_payload: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub cycle_s: f64,
    #[serde(rename = "waypoint")]
    pub waypoints: Vec<WaypointSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub id: String,
    pub base_position_m: [f64; 3],
    #[serde(default)]
    pub base_yaw_deg: f64,
    pub stopping_time_s: f64,
    /// Overrides the sum of link masses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moving_mass_kg: Option<f64>,
    #[serde(rename = "joint")]
    pub joints: Vec<JointSpec>,
    #[serde(rename = "link")]
    pub links: Vec<LinkSpec>,
    pub trajectory: TrajectorySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceKindSpec {
    ScannerZone {
        region: ShapeSpec,
    },
    LightCurtain {
        center_m: [f64; 3],
        half_width_m: f64,
        half_height_m: f64,
        #[serde(default)]
        yaw_deg: f64,
    },
    PressureMat {
        center_m: [f64; 3],
        half_extents_m: [f64; 3],
        #[serde(default)]
        yaw_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: DeviceKindSpec,
    pub robots: Vec<String>,
    /// Speed factor while triggered; 0 stops the robot.
    #[serde(default)]
    pub effect_factor: f64,
    /// Defaults to latching for stop devices, non-latching otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latching: Option<bool>,
}

const CURTAIN_HALF_THICKNESS_M: f64 = 0.005;

impl DeviceSpec {
    fn latches(&self) -> bool {
        self.latching.unwrap_or(self.effect_factor == 0.0)
    }

    fn kind(&self) -> DeviceKind {
        match &self.kind {
            DeviceKindSpec::ScannerZone { region } => DeviceKind::ScannerZone {
                region: region.to_shape(),
            },
            DeviceKindSpec::LightCurtain {
                center_m,
                half_width_m,
                half_height_m,
                yaw_deg,
            } => DeviceKind::LightCurtain {
                panel: Shape::cuboid(
                    pt(*center_m),
                    Vector::new(*half_width_m, CURTAIN_HALF_THICKNESS_M, *half_height_m),
                    rpy([0.0, 0.0, *yaw_deg]),
                ),
            },
            DeviceKindSpec::PressureMat {
                center_m,
                half_extents_m,
                yaw_deg,
            } => DeviceKind::PressureMat {
                region: Shape::cuboid(pt(*center_m), Vector::from(*half_extents_m), rpy([0.0, 0.0, *yaw_deg])),
            },
        }
    }
}

impl Scenario {
    pub fn table(&self) -> BodyRegionTable {
        self.region_table.clone().unwrap_or_default()
    }

    pub fn witness_actions(&self) -> Result<Vec<HumanAction>, ScenarioError> {
        self.witness
            .iter()
            .map(|w| w.parse::<HumanAction>().map_err(ScenarioError::Parse))
            .collect()
    }

    pub fn human_model(&self) -> HumanModel {
        let a = &self.arm;
        let r = |v: [f64; 2]| [v[0].to_radians(), v[1].to_radians()];
        HumanModel {
            arm: ArmModel {
                upper_arm_length: a.upper_arm_length_m,
                lower_arm_length: a.lower_arm_length_m,
                hand_radius: a.hand_radius_m,
                limits: JointLimits {
                    flexion: r(a.flexion_limits_deg),
                    abduction: r(a.abduction_limits_deg),
                    rotation: r(a.rotation_limits_deg),
                    elbow: r(a.elbow_limits_deg),
                },
                sample_budget: self.reach.sample_budget,
                ..ArmModel::default()
            },
            ..HumanModel::default()
        }
    }

    pub fn spawn_pose(&self) -> HumanPose {
        HumanPose::standing(
            self.human.spawn_position_m[0],
            self.human.spawn_position_m[1],
            self.human.spawn_heading_deg.to_radians(),
        )
    }

    /// Every violation found, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.format_version != FORMAT_VERSION {
            v.push(format!(
                "format_version {} unsupported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.name.trim().is_empty() {
            v.push("name must not be empty".into());
        }
        for (i, w) in self.witness.iter().enumerate() {
            if let Err(e) = w.parse::<HumanAction>() {
                v.push(format!("witness[{i}]: {e}"));
            }
        }
        let a = &self.arm;
        for (name, val) in [
            ("arm.upper_arm_length_m", a.upper_arm_length_m),
            ("arm.lower_arm_length_m", a.lower_arm_length_m),
            ("arm.hand_radius_m", a.hand_radius_m),
        ] {
            if !(val > 0.0) {
                v.push(format!("{name} must be > 0"));
            }
        }
        for (name, [lo, hi]) in [
            ("arm.flexion_limits_deg", a.flexion_limits_deg),
            ("arm.abduction_limits_deg", a.abduction_limits_deg),
            ("arm.rotation_limits_deg", a.rotation_limits_deg),
            ("arm.elbow_limits_deg", a.elbow_limits_deg),
        ] {
            if !(lo <= hi) {
                v.push(format!("{name}: min {lo} exceeds max {hi}"));
            }
        }
        if self.reach.sample_budget == 0 {
            v.push("reach.sample_budget must be >= 1".into());
        }
        let table = self.table();
        for r in BodyRegion::ALL {
            if !table.contains(r) {
                v.push(format!("body-region table lacks region `{r}`"));
            }
        }
        for s in &self.statics {
            if let Err(e) = s.shape.to_shape().validate() {
                v.push(format!("static `{}`: {e}", s.name));
            }
        }
        let mut ids = HashSet::new();
        for r in &self.robots {
            if !ids.insert(r.id.as_str()) {
                v.push(format!("duplicate robot id `{}`", r.id));
            }
            self.robot_violations(r, &mut v);
        }
        let mut dev_ids = HashSet::new();
        for d in &self.devices {
            if !dev_ids.insert(d.id.as_str()) {
                v.push(format!("duplicate device id `{}`", d.id));
            }
            for rid in &d.robots {
                if !ids.contains(rid.as_str()) {
                    v.push(format!("device `{}` references unknown robot id `{rid}`", d.id));
                }
            }
            if !(0.0..=1.0).contains(&d.effect_factor) {
                v.push(format!("device `{}`: effect_factor must lie in [0, 1]", d.id));
            }
            let shape_ok = match d.kind() {
                DeviceKind::ScannerZone { region } | DeviceKind::PressureMat { region } => region.validate(),
                DeviceKind::LightCurtain { panel } => panel.validate(),
            };
            if let Err(e) = shape_ok {
                v.push(format!("device `{}`: {e}", d.id));
            }
        }
        let body = self.human_model().body(&self.spawn_pose());
        for s in &self.statics {
            let shape = s.shape.to_shape();
            if shape.validate().is_ok() && body.shapes.iter().any(|b| distance(&b.shape, &shape).distance <= 0.0) {
                v.push(format!("human spawn intersects static `{}`", s.name));
            }
        }
        v
    }

    fn robot_violations(&self, r: &RobotSpec, v: &mut Vec<String>) {
        let n = r.joints.len();
        if n == 0 {
            v.push(format!("robot `{}` has no joints", r.id));
        }
        if r.links.is_empty() {
            v.push(format!("robot `{}` has no links", r.id));
        }
        if r.stopping_time_s < 0.0 {
            v.push(format!("robot `{}`: stopping_time_s must be >= 0", r.id));
        }
        if let Some(m) = r.moving_mass_kg {
            if !(m > 0.0) {
                v.push(format!("robot `{}`: moving_mass_kg must be > 0", r.id));
            }
        }
        for (i, j) in r.joints.iter().enumerate() {
            if Vector::from(j.axis).norm() < 1e-9 {
                v.push(format!("robot `{}` joint {i}: zero axis", r.id));
            }
        }
        for (i, l) in r.links.iter().enumerate() {
            if l.joint >= n {
                v.push(format!("robot `{}` link {i}: joint {} out of range", r.id, l.joint));
            }
            if !(l.radius_m > 0.0) {
                v.push(format!("robot `{}` link {i}: radius_m must be > 0", r.id));
            }
            if !(l.mass_kg >= 0.0) {
                v.push(format!("robot `{}` link {i}: mass_kg must be >= 0", r.id));
            }
        }
        let mass = r
            .moving_mass_kg
            .unwrap_or_else(|| r.links.iter().map(|l| l.mass_kg).sum());
        if !(mass > 0.0) {
            v.push(format!("robot `{}`: moving mass must be > 0", r.id));
        }
        let t = &r.trajectory;
        if t.waypoints.is_empty() {
            v.push(format!("robot `{}`: trajectory has no waypoints", r.id));
            return;
        }
        if t.waypoints[0].time_s != 0.0 {
            v.push(format!("robot `{}`: first waypoint must be at time_s = 0", r.id));
        }
        for (i, w) in t.waypoints.iter().enumerate() {
            if w.joints_deg_or_m.len() != n {
                v.push(format!(
                    "robot `{}` waypoint {i}: {} joint values for {n} joints",
                    r.id,
                    w.joints_deg_or_m.len()
                ));
            }
            if i > 0 && !(w.time_s > t.waypoints[i - 1].time_s) {
                v.push(format!(
                    "robot `{}` waypoint {i}: timestamps must strictly increase",
                    r.id
                ));
            }
            if w.attach_payload_kg.is_some() && w.release_payload {
                v.push(format!("robot `{}` waypoint {i}: both attach and release", r.id));
            }
        }
        if !(t.cycle_s > t.waypoints.last().unwrap().time_s) {
            v.push(format!("robot `{}`: cycle_s must exceed the last waypoint time", r.id));
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(v))
        }
    }

    fn robot_model(r: &RobotSpec) -> RobotModel {
        let joints: Vec<Joint> = r
            .joints
            .iter()
            .map(|j| Joint {
                kind: j.kind,
                axis: Unit::new_normalize(Vector::from(j.axis)),
                origin: Isometry3::from_parts(
                    Translation3::from(Vector::from(j.origin_m)),
                    UnitQuaternion::from_rotation_matrix(&rpy(j.origin_rpy_deg)),
                ),
            })
            .collect();
        let convert = |vals: &[f64]| -> Vec<f64> {
            vals.iter()
                .zip(&joints)
                .map(|(v, j)| match j.kind {
                    JointKind::Revolute => v.to_radians(),
                    JointKind::Prismatic => *v,
                })
                .collect()
        };
        let waypoints = r
            .trajectory
            .waypoints
            .iter()
            .map(|w| Waypoint {
                time_s: w.time_s,
                joints: convert(&w.joints_deg_or_m),
                event: match (w.attach_payload_kg, w.release_payload) {
                    (Some(m), _) => Some(GraspEvent::Attach { mass_kg: m }),
                    (None, true) => Some(GraspEvent::Release),
                    _ => None,
                },
            })
            .collect();
        let links: Vec<Link> = r
            .links
            .iter()
            .map(|l| Link {
                joint: l.joint,
                a: pt(l.a_m),
                b: pt(l.b_m),
                radius: l.radius_m,
                mass_kg: l.mass_kg,
            })
            .collect();
        RobotModel {
            id: r.id.clone(),
            base: Isometry3::from_parts(
                Translation3::from(Vector::from(r.base_position_m)),
                UnitQuaternion::from_axis_angle(&Vector::z_axis(), r.base_yaw_deg.to_radians()),
            ),
            moving_mass_kg: r
                .moving_mass_kg
                .unwrap_or_else(|| links.iter().map(|l| l.mass_kg).sum()),
            joints,
            links,
            trajectory: Trajectory {
                waypoints,
                cycle_s: r.trajectory.cycle_s,
            },
            stopping_time_s: r.stopping_time_s,
        }
    }

    /// Compiles the scenario into an immutable simulation world.
    pub fn world(&self) -> Result<World, ScenarioError> {
        self.validate()?;
        let robots: Vec<RobotModel> = self.robots.iter().map(Self::robot_model).collect();
        let devices = self
            .devices
            .iter()
            .map(|d| SafetyDevice {
                id: d.id.clone(),
                kind: d.kind(),
                effect_factor: d.effect_factor,
                latching: d.latches(),
                robots: d
                    .robots
                    .iter()
                    .map(|id| robots.iter().position(|r| &r.id == id).unwrap())
                    .collect(),
            })
            .collect();
        let statics = self
            .statics
            .iter()
            .map(|s| StaticShape {
                name: s.name.clone(),
                shape: s.shape.to_shape(),
                barrier: s.barrier,
            })
            .collect();
        World::new(
            self.name.clone(),
            statics,
            robots,
            devices,
            self.human_model(),
            self.spawn_pose(),
            self.table(),
            self.reach.seed,
        )
        .map_err(|e| ScenarioError::Validation(vec![e.to_string()]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}
