//! Re-execution of recorded action sequences.

use super::{new_record, record_step, EpisodeRecord, SearchError, SearchParams};
use crate::human::{HumanAction, HumanPose};
use crate::safety::DangerCase;
use crate::simulator::{SimState, World};
use serde::{Deserialize, Serialize};

pub const TRACE_SCHEMA: &str = "hazardsim-trace";
pub const TRACE_VERSION: u32 = 1;

fn action(index: usize) -> Result<HumanAction, SearchError> {
    HumanAction::from_index(index).ok_or_else(|| SearchError::Param(format!("action index {index} out of range")))
}

/// Replays `actions` from the initial state with the same per-step
/// evaluation as the searches, stopping at the first unsafe step.
pub fn replay(world: &World, actions: &[usize], params: &SearchParams) -> Result<EpisodeRecord, SearchError> {
    let mut rec = new_record(0);
    let mut state = world.reset()?;
    for (i, &a) in actions.iter().enumerate() {
        rec.actions.push(a);
        state = world.step(&state, action(a)?);
        let (unsafe_, _) = record_step(world, &state, i + 1, params, &mut rec)?;
        if unsafe_ {
            break;
        }
    }
    Ok(rec)
}

/// Differences between a recorded episode and its replay: terminal kind,
/// step count, hazard region and force (relative tolerance `rel_tol`).
pub fn divergences(recorded: &EpisodeRecord, replayed: &EpisodeRecord, rel_tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    if recorded.terminal != replayed.terminal {
        out.push(format!(
            "terminal {:?} replayed as {:?}",
            recorded.terminal, replayed.terminal
        ));
    }
    if recorded.danger.len() != replayed.danger.len() {
        out.push(format!(
            "{} steps replayed as {}",
            recorded.danger.len(),
            replayed.danger.len()
        ));
    }
    for (i, (a, b)) in recorded.danger.iter().zip(&replayed.danger).enumerate() {
        if (a - b).abs() > rel_tol * a.abs().max(b.abs()) {
            out.push(format!("step {}: danger {a} replayed as {b}", i + 1));
        }
    }
    match (&recorded.hazard, &replayed.hazard) {
        (Some(a), Some(b)) => {
            if a.body_region != b.body_region {
                out.push(format!("region {} replayed as {}", a.body_region, b.body_region));
            }
            if (a.force_n - b.force_n).abs() > rel_tol * a.force_n.abs().max(b.force_n.abs()) {
                out.push(format!("force {} N replayed as {} N", a.force_n, b.force_n));
            }
        }
        (Some(_), None) => out.push("recorded hazard not reproduced".into()),
        (None, Some(h)) => out.push(format!("unexpected hazard at step {}", h.step)),
        (None, None) => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRobot {
    pub id: String,
    pub phase_s: f64,
    pub speed_factor: f64,
    pub payload_kg: f64,
}

/// One simulator frame of a replay trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tick: u64,
    pub time_s: f64,
    /// Action being executed (one-based), 0 for the initial frame.
    pub step: usize,
    pub human: HumanPose,
    pub robots: Vec<TraceRobot>,
    pub devices: Vec<bool>,
    pub danger: f64,
    pub case: DangerCase,
    pub distance_m: f64,
    #[serde(rename = "unsafe")]
    pub is_unsafe: bool,
}

fn row(world: &World, state: &SimState, step: usize) -> Result<TraceRow, SearchError> {
    let eval = world.evaluate(state)?;
    Ok(TraceRow {
        tick: state.tick,
        time_s: state.time_s(),
        step,
        human: state.human,
        robots: world
            .robots
            .iter()
            .zip(&state.robots)
            .map(|(m, r)| TraceRobot {
                id: m.id.clone(),
                phase_s: r.phase_s,
                speed_factor: r.governor.current,
                payload_kg: r.payload_kg,
            })
            .collect(),
        devices: state.devices.clone(),
        danger: eval.danger.danger,
        case: eval.danger.case,
        distance_m: eval.danger.distance_m,
        is_unsafe: eval.hazard.is_some(),
    })
}

/// Frame-by-frame trace of `actions`: the initial frame plus one row per
/// substep, so `20 * actions.len() + 1` rows.
pub fn trace(world: &World, actions: &[usize]) -> Result<Vec<TraceRow>, SearchError> {
    let mut state = world.reset()?;
    let mut rows = vec![row(world, &state, 0)?];
    for (i, &a) in actions.iter().enumerate() {
        let mut err = None;
        state = world.step_observed(&state, action(a)?, |s| {
            if err.is_none() {
                match row(world, s, i + 1) {
                    Ok(r) => rows.push(r),
                    Err(e) => err = Some(e),
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(rows)
}
