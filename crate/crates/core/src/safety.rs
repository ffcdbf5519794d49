//! Body-region force model, the unsafe-state predicate and the danger index.
//!
//! Collision forces follow the two-body energy model of ISO/TS 15066 Annex A:
//! the robot's effective mass is half its moving mass plus payload, and the
//! peak force for a contact at speed `v` is `v * sqrt(mu * k)` with `mu` the
//! reduced mass of robot and body region. Only the speed magnitude enters.

use crate::geometry::{segment_blocked, Point, Shape};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Distances at or below this count as contact.
pub const CONTACT_TOLERANCE_M: f64 = 1e-3;
/// Upper bound of the proximity band of the danger index.
pub const PROXIMITY_RANGE_M: f64 = 1.5;
/// Danger value for separated or distant states; also the floor everywhere.
pub const SEPARATED_DANGER: f64 = 0.01;

const DEFAULT_TABLE: &str = include_str!("../data/body_regions.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SafetyError {
    #[error("degenerate mass: reduced mass undefined for m_H = {human_kg} kg, m_R = {robot_kg} kg")]
    DegenerateMass { human_kg: f64, robot_kg: f64 },
    #[error("no body-region parameters for region `{0}`")]
    UnknownRegion(String),
    #[error("body-region table line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyRegion {
    Head,
    Chest,
    UpperArm,
    Forearm,
    Hand,
    LowerLegs,
}

impl BodyRegion {
    pub const ALL: [BodyRegion; 6] = [
        BodyRegion::Head,
        BodyRegion::Chest,
        BodyRegion::UpperArm,
        BodyRegion::Forearm,
        BodyRegion::Hand,
        BodyRegion::LowerLegs,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BodyRegion::Head => "head",
            BodyRegion::Chest => "chest",
            BodyRegion::UpperArm => "upper_arm",
            BodyRegion::Forearm => "forearm",
            BodyRegion::Hand => "hand",
            BodyRegion::LowerLegs => "lower_legs",
        }
    }
}

impl fmt::Display for BodyRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BodyRegion {
    type Err = SafetyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BodyRegion::ALL
            .into_iter()
            .find(|r| r.key() == s)
            .ok_or_else(|| SafetyError::UnknownRegion(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyRegionParams {
    pub region: BodyRegion,
    pub effective_mass_kg: f64,
    pub spring_constant_n_per_m: f64,
    pub max_force_n: f64,
}

/// Per-region parameter table, loaded from the plain-text format in
/// `data/body_regions.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyRegionTable {
    rows: BTreeMap<BodyRegion, BodyRegionParams>,
}

impl Default for BodyRegionTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled body-region table is valid")
    }
}

impl BodyRegionTable {
    pub fn parse(text: &str) -> Result<Self, SafetyError> {
        let mut rows = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let cols: Vec<&str> = content.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(SafetyError::Table {
                    line,
                    message: format!("expected 4 columns, found {}", cols.len()),
                });
            }
            let region: BodyRegion = cols[0].parse().map_err(|_| SafetyError::Table {
                line,
                message: format!("unknown region `{}`", cols[0]),
            })?;
            let num = |s: &str, what: &str| -> Result<f64, SafetyError> {
                let v: f64 = s.parse().map_err(|_| SafetyError::Table {
                    line,
                    message: format!("{what}: `{s}` is not a number"),
                })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(SafetyError::Table {
                        line,
                        message: format!("{what} must be > 0"),
                    });
                }
                Ok(v)
            };
            let params = BodyRegionParams {
                region,
                effective_mass_kg: num(cols[1], "effective mass")?,
                spring_constant_n_per_m: num(cols[2], "spring constant")? * 1000.0,
                max_force_n: num(cols[3], "max force")?,
            };
            if rows.insert(region, params).is_some() {
                return Err(SafetyError::Table {
                    line,
                    message: format!("duplicate region `{region}`"),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn get(&self, region: BodyRegion) -> Result<&BodyRegionParams, SafetyError> {
        self.rows
            .get(&region)
            .ok_or_else(|| SafetyError::UnknownRegion(region.key().to_string()))
    }

    pub fn contains(&self, region: BodyRegion) -> bool {
        self.rows.contains_key(&region)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BodyRegionParams> {
        self.rows.values()
    }
}

/// Peak transient contact force for a robot point moving at `speed` m/s.
pub fn collision_force(
    speed: f64,
    region: &BodyRegionParams,
    robot_moving_mass_kg: f64,
    payload_kg: f64,
) -> Result<f64, SafetyError> {
    let human = region.effective_mass_kg;
    let robot = robot_moving_mass_kg / 2.0 + payload_kg;
    if human <= 0.0 || robot <= 0.0 {
        return Err(SafetyError::DegenerateMass {
            human_kg: human,
            robot_kg: robot,
        });
    }
    let reduced = 1.0 / (1.0 / human + 1.0 / robot);
    Ok(speed.abs() * (reduced * region.spring_constant_n_per_m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactSource {
    /// Overlap between a body shape and a robot link.
    Body,
    /// Arm configuration found by the reachability check.
    Reach,
}

/// A human-robot contact with everything the force model needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub region: BodyRegion,
    pub robot: String,
    pub link: usize,
    pub point: Point,
    pub robot_speed: f64,
    pub robot_moving_mass_kg: f64,
    pub payload_kg: f64,
    pub source: ContactSource,
    pub arm_angles_rad: Option<[f64; 4]>,
}

impl Contact {
    pub fn force(&self, table: &BodyRegionTable) -> Result<(f64, f64), SafetyError> {
        let params = table.get(self.region)?;
        let f = collision_force(self.robot_speed, params, self.robot_moving_mass_kg, self.payload_kg)?;
        Ok((f, params.max_force_n))
    }
}

/// Closest non-contacting human-robot pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Proximity {
    pub distance: f64,
    pub human_point: Point,
    pub robot_point: Point,
    pub region: BodyRegion,
    pub robot: String,
    pub link: usize,
    pub robot_speed: f64,
    pub robot_moving_mass_kg: f64,
    pub payload_kg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DangerCase {
    Contact,
    Proximity,
    Separated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DangerAssessment {
    pub case: DangerCase,
    pub danger: f64,
    pub distance_m: f64,
    pub force_n: f64,
    pub region: Option<BodyRegion>,
    pub robot: Option<String>,
    pub link: Option<usize>,
}

/// Logged unsafe state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReport {
    pub force_n: f64,
    pub body_region: BodyRegion,
    pub actions: Vec<usize>,
    pub max_force_n: f64,
    pub robot: String,
    pub link: usize,
    pub contact_point_m: [f64; 3],
    pub robot_speed_m_s: f64,
    pub payload_kg: f64,
    pub source: ContactSource,
    pub arm_angles_rad: Option<[f64; 4]>,
    pub step: usize,
    pub episode: Option<usize>,
}

/// Contact with the largest force ratio, with its force and limit.
fn most_severe<'a>(
    contacts: &'a [Contact],
    table: &BodyRegionTable,
) -> Result<Option<(&'a Contact, f64, f64)>, SafetyError> {
    let mut best: Option<(&Contact, f64, f64)> = None;
    for c in contacts {
        let (f, fmax) = c.force(table)?;
        if best.is_none_or(|(_, bf, bm)| f / fmax > bf / bm) {
            best = Some((c, f, fmax));
        }
    }
    Ok(best)
}

/// Report for the most severe contact whose force exceeds its region limit.
pub fn unsafe_contact(contacts: &[Contact], table: &BodyRegionTable) -> Result<Option<HazardReport>, SafetyError> {
    let Some((c, force, fmax)) = most_severe(contacts, table)? else {
        return Ok(None);
    };
    if force <= fmax {
        return Ok(None);
    }
    Ok(Some(HazardReport {
        force_n: force,
        body_region: c.region,
        actions: Vec::new(),
        max_force_n: fmax,
        robot: c.robot.clone(),
        link: c.link,
        contact_point_m: [c.point.x, c.point.y, c.point.z],
        robot_speed_m_s: c.robot_speed,
        payload_kg: c.payload_kg,
        source: c.source,
        arm_angles_rad: c.arm_angles_rad,
        step: 0,
        episode: None,
    }))
}

/// Danger index of a state given its contacts and closest pair.
///
/// Contact yields the force ratio (unbounded). Otherwise a pair within the
/// proximity range that is not cut by a barrier yields the virtual force
/// ratio damped by `exp(-d)` and capped at one. Everything else, and any
/// value below it, is `SEPARATED_DANGER`.
pub fn danger_index(
    contacts: &[Contact],
    closest: Option<&Proximity>,
    barriers: &[Shape],
    table: &BodyRegionTable,
) -> Result<DangerAssessment, SafetyError> {
    if let Some((c, force, fmax)) = most_severe(contacts, table)? {
        return Ok(DangerAssessment {
            case: DangerCase::Contact,
            danger: (force / fmax).max(SEPARATED_DANGER),
            distance_m: 0.0,
            force_n: force,
            region: Some(c.region),
            robot: Some(c.robot.clone()),
            link: Some(c.link),
        });
    }
    let Some(p) = closest else {
        return Ok(separated(f64::INFINITY, None));
    };
    if p.distance > PROXIMITY_RANGE_M || segment_blocked(&p.human_point, &p.robot_point, barriers) {
        return Ok(separated(p.distance, Some(p)));
    }
    let params = table.get(p.region)?;
    let virtual_force = collision_force(p.robot_speed, params, p.robot_moving_mass_kg, p.payload_kg)?;
    let danger = (virtual_force / params.max_force_n * (-p.distance).exp())
        .min(1.0)
        .max(SEPARATED_DANGER);
    Ok(DangerAssessment {
        case: DangerCase::Proximity,
        danger,
        distance_m: p.distance,
        force_n: virtual_force,
        region: Some(p.region),
        robot: Some(p.robot.clone()),
        link: Some(p.link),
    })
}

fn separated(distance: f64, p: Option<&Proximity>) -> DangerAssessment {
    DangerAssessment {
        case: DangerCase::Separated,
        danger: SEPARATED_DANGER,
        distance_m: distance,
        force_n: 0.0,
        region: p.map(|p| p.region),
        robot: p.map(|p| p.robot.clone()),
        link: p.map(|p| p.link),
    }
}
