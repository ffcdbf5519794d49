//! Presence-sensing safety devices.

use crate::geometry::{distance, point_distance, segment_blocked, Shape};
use crate::human::HumanBody;

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceKind {
    /// Triggers while any body shape overlaps the protective field.
    ScannerZone { region: Shape },
    /// Vertical rectangle, stored as a thin box. Triggers when a body shape
    /// touches it or a body part's path over the last substep crosses it.
    LightCurtain { panel: Shape },
    /// Triggers while a foot point is on the mat.
    PressureMat { region: Shape },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyDevice {
    pub id: String,
    pub kind: DeviceKind,
    /// Speed factor imposed on the guarded robots while triggered.
    pub effect_factor: f64,
    /// Latched devices stay triggered until reset.
    pub latching: bool,
    /// Indices of guarded robots.
    pub robots: Vec<usize>,
}

impl SafetyDevice {
    pub fn detects(&self, previous: &HumanBody, current: &HumanBody) -> bool {
        match &self.kind {
            DeviceKind::ScannerZone { region } => current
                .shapes
                .iter()
                .any(|s| distance(&s.shape, region).distance <= 0.0),
            DeviceKind::PressureMat { region } => {
                current.feet.iter().any(|f| point_distance(f, region).distance <= 0.0)
            }
            DeviceKind::LightCurtain { panel } => {
                let panel = std::slice::from_ref(panel);
                current
                    .shapes
                    .iter()
                    .any(|s| distance(&s.shape, &panel[0]).distance <= 0.0)
                    || previous
                        .shapes
                        .iter()
                        .zip(&current.shapes)
                        .any(|(a, b)| segment_blocked(&a.shape.centroid(), &b.shape.centroid(), panel))
            }
        }
    }

    pub fn next_state(&self, triggered: bool, previous: &HumanBody, current: &HumanBody) -> bool {
        let now = self.detects(previous, current);
        if self.latching {
            triggered || now
        } else {
            now
        }
    }
}
