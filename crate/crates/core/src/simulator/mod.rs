//! Deterministic kinematic workcell simulation.
//!
//! A [`World`] is immutable; all mutable quantities live in [`SimState`], so
//! `step` is a pure function of its arguments. One action lasts 200 ms and is
//! integrated in 10 ms substeps. Each substep moves the human, evaluates the
//! safety devices and speed governors, advances the robot trajectories and
//! finally applies grasp events, in that order.

mod devices;
mod robot;

pub use devices::{DeviceKind, SafetyDevice};
pub use robot::{GraspEvent, Joint, JointKind, Link, RobotModel, RobotState, SpeedGovernor, Trajectory, Waypoint};

use crate::geometry::{distance, Point, Shape};
use crate::human::{reach_check, HumanAction, HumanBody, HumanModel, HumanPose, ReachResult, RobotLinkShape};
use crate::safety::{
    danger_index, unsafe_contact, BodyRegionTable, Contact, ContactSource, DangerAssessment, HazardReport, Proximity,
    SafetyError, CONTACT_TOLERANCE_M,
};
use serde::{Deserialize, Serialize};

pub const ACTION_DURATION_S: f64 = 0.2;
pub const SUBSTEP_S: f64 = 0.01;
pub const SUBSTEPS_PER_ACTION: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Safety(#[from] SafetyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticShape {
    pub name: String,
    pub shape: Shape,
    /// Counts for the barrier-separation test of the danger index.
    pub barrier: bool,
}

/// Complete simulator snapshot. Cloning it and stepping the clone reproduces
/// the original evolution exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    /// Elapsed substeps since reset.
    pub tick: u64,
    pub human: HumanPose,
    pub robots: Vec<RobotState>,
    pub devices: Vec<bool>,
}

impl SimState {
    pub fn time_s(&self) -> f64 {
        self.tick as f64 * SUBSTEP_S
    }
}

/// Safety evaluation of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub danger: DangerAssessment,
    pub hazard: Option<HazardReport>,
    pub contacts: Vec<Contact>,
    pub closest: Option<Proximity>,
    pub reach_samples: usize,
}

#[derive(Debug, Clone)]
pub struct World {
    pub name: String,
    pub statics: Vec<StaticShape>,
    pub robots: Vec<RobotModel>,
    pub devices: Vec<SafetyDevice>,
    pub human: HumanModel,
    pub spawn: HumanPose,
    pub regions: BodyRegionTable,
    pub reach_seed: u64,
    solids: Vec<Shape>,
    barriers: Vec<Shape>,
}

impl World {
    pub fn new(
        name: impl Into<String>,
        statics: Vec<StaticShape>,
        robots: Vec<RobotModel>,
        devices: Vec<SafetyDevice>,
        human: HumanModel,
        spawn: HumanPose,
        regions: BodyRegionTable,
        reach_seed: u64,
    ) -> Result<Self, SimError> {
        for r in crate::safety::BodyRegion::ALL {
            if !regions.contains(r) {
                return Err(SimError::Safety(SafetyError::UnknownRegion(r.key().into())));
            }
        }
        for d in &devices {
            if let Some(bad) = d.robots.iter().find(|i| **i >= robots.len()) {
                return Err(SimError::InvalidScenario(format!(
                    "device `{}` guards unknown robot #{bad}",
                    d.id
                )));
            }
        }
        let solids = statics.iter().map(|s| s.shape.clone()).collect();
        let barriers = statics.iter().filter(|s| s.barrier).map(|s| s.shape.clone()).collect();
        Ok(Self {
            name: name.into(),
            statics,
            robots,
            devices,
            human,
            spawn,
            regions,
            reach_seed,
            solids,
            barriers,
        })
    }

    pub fn solids(&self) -> &[Shape] {
        &self.solids
    }

    pub fn barriers(&self) -> &[Shape] {
        &self.barriers
    }

    /// Initial state. Fails if the spawn pose penetrates static geometry or
    /// the initial state is already unsafe.
    pub fn reset(&self) -> Result<SimState, SimError> {
        let state = SimState {
            tick: 0,
            human: self.spawn,
            robots: self
                .robots
                .iter()
                .map(|r| RobotState {
                    phase_s: 0.0,
                    governor: SpeedGovernor::new(r.stopping_time_s),
                    payload_kg: 0.0,
                })
                .collect(),
            devices: vec![false; self.devices.len()],
        };
        let body = self.human.body(&state.human);
        for b in &body.shapes {
            for s in &self.statics {
                if distance(&b.shape, &s.shape).distance <= 0.0 {
                    return Err(SimError::InvalidScenario(format!(
                        "human spawn intersects static shape `{}`",
                        s.name
                    )));
                }
            }
        }
        if self.evaluate(&state)?.hazard.is_some() {
            return Err(SimError::InvalidScenario("initial state is already unsafe".into()));
        }
        Ok(state)
    }

    pub fn step(&self, state: &SimState, action: HumanAction) -> SimState {
        self.step_observed(state, action, |_| {})
    }

    /// Like [`World::step`], calling `observe` after every substep.
    pub fn step_observed<F: FnMut(&SimState)>(
        &self,
        state: &SimState,
        action: HumanAction,
        mut observe: F,
    ) -> SimState {
        let mut s = state.clone();
        s.human = self.human.begin_action(&s.human, action, &self.solids);
        let mut body = self.human.body(&s.human);
        for _ in 0..SUBSTEPS_PER_ACTION {
            self.substep(&mut s, action, &mut body);
            observe(&s);
        }
        s
    }

    fn substep(&self, s: &mut SimState, action: HumanAction, body: &mut HumanBody) {
        // 1. human
        s.human = self.human.advance(&s.human, action, SUBSTEP_S, &self.solids);
        let new_body = self.human.body(&s.human);

        // 2. devices and governors
        for (dev, trig) in self.devices.iter().zip(s.devices.iter_mut()) {
            *trig = dev.next_state(*trig, body, &new_body);
        }
        for (ri, rs) in s.robots.iter_mut().enumerate() {
            rs.governor.target = self
                .devices
                .iter()
                .zip(&s.devices)
                .filter(|(d, t)| **t && d.robots.contains(&ri))
                .map(|(d, _)| d.effect_factor)
                .fold(1.0, f64::min);
            rs.governor.update(SUBSTEP_S);
        }

        // 3. robots, 4. grasp events
        for (model, rs) in self.robots.iter().zip(s.robots.iter_mut()) {
            let advance = SUBSTEP_S * rs.governor.current;
            for ev in model.trajectory.events_crossed(rs.phase_s, advance) {
                match ev {
                    GraspEvent::Attach { mass_kg } => rs.payload_kg = mass_kg,
                    GraspEvent::Release => rs.payload_kg = 0.0,
                }
            }
            rs.phase_s = model.trajectory.wrap(rs.phase_s + advance);
        }
        s.tick += 1;
        *body = new_body;
    }

    pub fn robot_shapes(&self, state: &SimState) -> Vec<RobotLinkShape> {
        let mut out = Vec::new();
        for (ri, (model, rs)) in self.robots.iter().zip(&state.robots).enumerate() {
            for (li, shape) in model.link_shapes(rs.phase_s).into_iter().enumerate() {
                out.push(RobotLinkShape {
                    robot: ri,
                    link: li,
                    shape,
                });
            }
        }
        out
    }

    /// Speed of the robot material point at `point` on the given link.
    pub fn robot_point_speed(&self, state: &SimState, robot: usize, link: usize, point: &Point) -> f64 {
        self.robots[robot].point_speed(&state.robots[robot], link, point, SUBSTEP_S)
    }

    pub fn reach(&self, state: &SimState) -> Option<ReachResult> {
        let body = self.human.body(&state.human);
        let links = self.robot_shapes(state);
        self.reach_with(state, &body, &links).0
    }

    fn reach_with(&self, state: &SimState, body: &HumanBody, links: &[RobotLinkShape]) -> (Option<ReachResult>, usize) {
        let arm = &self.human.arm;
        let out = reach_check(
            body,
            arm,
            links,
            &self.solids,
            arm.sample_budget,
            self.reach_seed,
            |l, p| self.robot_point_speed(state, l.robot, l.link, p),
        );
        (out.result, out.samples_drawn)
    }

    fn contact(
        &self,
        state: &SimState,
        link: &RobotLinkShape,
        region: crate::safety::BodyRegion,
        point: Point,
    ) -> Contact {
        let model = &self.robots[link.robot];
        Contact {
            region,
            robot: model.id.clone(),
            link: link.link,
            point,
            robot_speed: self.robot_point_speed(state, link.robot, link.link, &point),
            robot_moving_mass_kg: model.moving_mass_kg,
            payload_kg: state.robots[link.robot].payload_kg,
            source: ContactSource::Body,
            arm_angles_rad: None,
        }
    }

    /// Contacts, closest pair, danger index and unsafe-state report of `state`.
    pub fn evaluate(&self, state: &SimState) -> Result<Evaluation, SimError> {
        let body = self.human.body(&state.human);
        let links = self.robot_shapes(state);
        let mut contacts = Vec::new();
        let mut closest: Option<(f64, Point, Point, crate::safety::BodyRegion, &RobotLinkShape)> = None;
        for part in &body.shapes {
            for link in &links {
                let c = distance(&part.shape, &link.shape);
                if c.distance <= CONTACT_TOLERANCE_M {
                    contacts.push(self.contact(state, link, part.region, c.witness_b));
                }
                if closest.as_ref().is_none_or(|(d, ..)| c.distance < *d) {
                    closest = Some((c.distance, c.witness_a, c.witness_b, part.region, link));
                }
            }
        }
        let (reach, reach_samples) = self.reach_with(state, &body, &links);
        if let Some(r) = reach {
            let link = links.iter().find(|l| l.robot == r.robot && l.link == r.link).unwrap();
            let mut c = self.contact(state, link, r.region, r.contact_point);
            c.source = ContactSource::Reach;
            c.arm_angles_rad = Some(r.angles.as_array());
            contacts.push(c);
        }
        let closest = closest.map(|(d, hp, rp, region, link)| {
            let model = &self.robots[link.robot];
            Proximity {
                distance: d,
                human_point: hp,
                robot_point: rp,
                region,
                robot: model.id.clone(),
                link: link.link,
                robot_speed: self.robot_point_speed(state, link.robot, link.link, &rp),
                robot_moving_mass_kg: model.moving_mass_kg,
                payload_kg: state.robots[link.robot].payload_kg,
            }
        });
        let danger = danger_index(&contacts, closest.as_ref(), &self.barriers, &self.regions)?;
        let hazard = unsafe_contact(&contacts, &self.regions)?;
        Ok(Evaluation {
            danger,
            hazard,
            contacts,
            closest,
            reach_samples,
        })
    }

    pub fn is_unsafe(&self, state: &SimState) -> Result<Option<HazardReport>, SimError> {
        Ok(self.evaluate(state)?.hazard)
    }

    pub fn danger_index(&self, state: &SimState) -> Result<DangerAssessment, SimError> {
        Ok(self.evaluate(state)?.danger)
    }
}
