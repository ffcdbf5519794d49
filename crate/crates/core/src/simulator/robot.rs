//! Serial-chain robots replaying cyclic joint trajectories.

use crate::geometry::{Point, Shape, Vector};
use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub kind: JointKind,
    pub axis: Unit<Vector>,
    /// Fixed transform from the parent frame to this joint's frame at zero.
    pub origin: Isometry3<f64>,
}

impl Joint {
    fn motion(&self, q: f64) -> Isometry3<f64> {
        match self.kind {
            JointKind::Revolute => {
                Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&self.axis, q))
            }
            JointKind::Prismatic => Isometry3::from_parts(
                Translation3::from(self.axis.into_inner() * q),
                UnitQuaternion::identity(),
            ),
        }
    }
}

/// Capsule rigidly attached to the frame after joint `joint`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub joint: usize,
    pub a: Point,
    pub b: Point,
    pub radius: f64,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspEvent {
    Attach { mass_kg: f64 },
    Release,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub time_s: f64,
    /// Radians for revolute joints, meters for prismatic ones.
    pub joints: Vec<f64>,
    pub event: Option<GraspEvent>,
}

/// Piecewise-linear cyclic trajectory. After the last waypoint the robot
/// moves back to the first one, arriving at `cycle_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    pub cycle_s: f64,
}

impl Trajectory {
    pub fn wrap(&self, phase: f64) -> f64 {
        let p = phase % self.cycle_s;
        if p < 0.0 {
            p + self.cycle_s
        } else {
            p
        }
    }

    pub fn sample(&self, phase: f64) -> Vec<f64> {
        let phase = self.wrap(phase);
        let wps = &self.waypoints;
        let n = wps.len();
        if n == 1 {
            return wps[0].joints.clone();
        }
        let i = wps.partition_point(|w| w.time_s <= phase).saturating_sub(1);
        let (from, to, t_end) = if i + 1 < n {
            (&wps[i], &wps[i + 1], wps[i + 1].time_s)
        } else {
            (&wps[n - 1], &wps[0], self.cycle_s)
        };
        let span = t_end - from.time_s;
        let s = if span > 0.0 {
            ((phase - from.time_s) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        from.joints
            .iter()
            .zip(&to.joints)
            .map(|(a, b)| a + (b - a) * s)
            .collect()
    }

    /// Events whose waypoint time lies in `(phase, phase + advance]` on the
    /// cyclic timeline.
    pub fn events_crossed(&self, phase: f64, advance: f64) -> impl Iterator<Item = GraspEvent> + '_ {
        let end = phase + advance;
        let cycle = self.cycle_s;
        self.waypoints.iter().filter_map(move |w| {
            let ev = w.event?;
            let hit = (w.time_s > phase && w.time_s <= end) || (w.time_s + cycle > phase && w.time_s + cycle <= end);
            (advance > 0.0 && hit).then_some(ev)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub id: String,
    pub base: Isometry3<f64>,
    pub joints: Vec<Joint>,
    pub links: Vec<Link>,
    pub trajectory: Trajectory,
    /// Ramp duration from full speed to standstill.
    pub stopping_time_s: f64,
    /// Moving mass M used by the force model.
    pub moving_mass_kg: f64,
}

impl RobotModel {
    /// World frame after each joint.
    pub fn frames(&self, q: &[f64]) -> Vec<Isometry3<f64>> {
        let mut out = Vec::with_capacity(self.joints.len());
        let mut t = self.base;
        for (joint, qi) in self.joints.iter().zip(q) {
            t = t * joint.origin * joint.motion(*qi);
            out.push(t);
        }
        out
    }

    pub fn frames_at(&self, phase: f64) -> Vec<Isometry3<f64>> {
        self.frames(&self.trajectory.sample(phase))
    }

    pub fn link_shapes_from(&self, frames: &[Isometry3<f64>]) -> Vec<Shape> {
        self.links
            .iter()
            .map(|l| {
                let f = &frames[l.joint];
                Shape::capsule(f * l.a, f * l.b, l.radius)
            })
            .collect()
    }

    pub fn link_shapes(&self, phase: f64) -> Vec<Shape> {
        self.link_shapes_from(&self.frames_at(phase))
    }

    /// Speed of the material point of `link` currently at `point`, by
    /// forward differencing the nominal trajectory over `dt` and scaling by
    /// the current speed factor.
    pub fn point_speed(&self, state: &RobotState, link: usize, point: &Point, dt: f64) -> f64 {
        let factor = state.governor.current;
        if factor == 0.0 {
            return 0.0;
        }
        let j = self.links[link].joint;
        let now = self.frames_at(state.phase_s)[j];
        let next = self.frames_at(self.trajectory.wrap(state.phase_s + dt))[j];
        let local = now.inverse_transform_point(point);
        let moved = next * local;
        (moved - point).norm() / dt * factor
    }
}

/// Linear speed ramp toward a target factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedGovernor {
    pub current: f64,
    pub target: f64,
    pub stopping_time_s: f64,
}

impl SpeedGovernor {
    pub fn new(stopping_time_s: f64) -> Self {
        Self {
            current: 1.0,
            target: 1.0,
            stopping_time_s,
        }
    }

    pub fn update(&mut self, dt: f64) {
        let diff = self.target - self.current;
        let step = if self.stopping_time_s > 0.0 {
            dt / self.stopping_time_s
        } else {
            f64::INFINITY
        };
        // snap within rounding so ramps end exactly on a substep boundary
        if diff.abs() <= step + 1e-9 {
            self.current = self.target;
        } else {
            self.current += step.copysign(diff);
        }
        self.current = self.current.clamp(0.0, 1.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Position along the cyclic trajectory, s.
    pub phase_s: f64,
    pub governor: SpeedGovernor,
    pub payload_kg: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotary() -> RobotModel {
        RobotModel {
            id: "r".into(),
            base: Isometry3::identity(),
            joints: vec![Joint {
                kind: JointKind::Revolute,
                axis: Vector::z_axis(),
                origin: Isometry3::identity(),
            }],
            links: vec![Link {
                joint: 0,
                a: Point::origin(),
                b: Point::new(1.0, 0.0, 0.0),
                radius: 0.05,
                mass_kg: 10.0,
            }],
            trajectory: Trajectory {
                waypoints: vec![
                    Waypoint {
                        time_s: 0.0,
                        joints: vec![0.0],
                        event: None,
                    },
                    Waypoint {
                        time_s: 1.0,
                        joints: vec![1.0],
                        event: Some(GraspEvent::Attach { mass_kg: 5.0 }),
                    },
                ],
                cycle_s: 2.0,
            },
            stopping_time_s: 0.5,
            moving_mass_kg: 10.0,
        }
    }

    #[test]
    fn interpolation_and_cycle() {
        let r = rotary();
        assert!((r.trajectory.sample(0.5)[0] - 0.5).abs() < 1e-12);
        assert!((r.trajectory.sample(1.5)[0] - 0.5).abs() < 1e-12);
        assert!((r.trajectory.sample(2.25)[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn point_speed_matches_rotation() {
        let r = rotary();
        let s = RobotState {
            phase_s: 0.3,
            governor: SpeedGovernor::new(0.5),
            payload_kg: 0.0,
        };
        let shapes = r.link_shapes(s.phase_s);
        let Shape::Capsule { b, .. } = shapes[0] else { panic!() };
        // 1 rad/s at radius 1 m
        let v = r.point_speed(&s, 0, &b, 0.01);
        assert!((v - 1.0).abs() < 0.02);
        let half = RobotState {
            governor: SpeedGovernor {
                current: 0.5,
                ..s.governor
            },
            ..s
        };
        assert!((r.point_speed(&half, 0, &b, 0.01) - 0.5).abs() < 0.01);
        let stopped = RobotState {
            governor: SpeedGovernor {
                current: 0.0,
                ..s.governor
            },
            ..s
        };
        assert_eq!(r.point_speed(&stopped, 0, &b, 0.01), 0.0);
    }

    #[test]
    fn events_fire_once_per_crossing() {
        let r = rotary();
        assert_eq!(r.trajectory.events_crossed(0.99, 0.01).count(), 1);
        assert_eq!(r.trajectory.events_crossed(1.0, 0.01).count(), 0);
        assert_eq!(r.trajectory.events_crossed(0.5, 0.0).count(), 0);
    }

    #[test]
    fn governor_ramps_linearly() {
        let mut g = SpeedGovernor::new(0.5);
        g.target = 0.0;
        let mut last = g.current;
        let mut steps = 0;
        while g.current > 0.0 {
            g.update(0.01);
            assert!(g.current <= last);
            last = g.current;
            steps += 1;
        }
        assert_eq!(steps, 50);
    }
}
