//! Adversarial search for unsafe states.
//!
//! [`mcts_search`] runs Monte Carlo tree search with double progressive
//! widening over the human's 36 actions and uniform random rollouts below
//! the tree. [`random_search`] is the uniform baseline. Both are fully
//! deterministic given [`SearchParams::seed`]: episode `i` draws from its own
//! ChaCha8 stream, so results do not depend on execution order.

mod replay;
mod transcript;
mod tree;

pub use replay::{divergences, replay, trace, TraceRobot, TraceRow, TRACE_SCHEMA, TRACE_VERSION};
pub use transcript::{
    read_hazard_log, read_transcript, write_hazard_log, write_transcript, TranscriptEpisode, TranscriptHeader,
    HAZARD_LOG_SCHEMA, TRANSCRIPT_SCHEMA, TRANSCRIPT_VERSION,
};
pub use tree::{best_action, should_widen, Decision, Edge, Node, NodeId, Tree, TreeStats, ROOT};

use crate::human::{HumanAction, ACTION_COUNT};
use crate::safety::{DangerAssessment, DangerCase, HazardReport};
use crate::simulator::{SimError, SimState, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid search parameter: {0}")]
    Param(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mcts,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Mcts, Algorithm::Random];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Mcts => "mcts",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mcts" => Ok(Algorithm::Mcts),
            "random" => Ok(Algorithm::Random),
            _ => Err(format!("unknown algorithm `{s}` (expected mcts or random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Widening coefficient k.
    pub k_pw: f64,
    /// Widening exponent alpha.
    pub alpha: f64,
    /// Exploration constant c.
    pub exploration: f64,
    /// Reward R_E for reaching an unsafe state.
    pub unsafe_reward: f64,
    /// Episode horizon in actions.
    pub k_max: usize,
    /// Number of episodes.
    pub max_iterations: usize,
    pub seed: u64,
    /// End the search after the first episode that finds a hazard.
    pub stop_on_first: bool,
    /// Use `sqrt(ln N(s) / N(s,a))` instead of `sqrt(N(s) / N(s,a))`.
    pub log_uct: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            k_pw: 1.0,
            alpha: 0.5,
            exploration: 1.0,
            unsafe_reward: 1.0,
            k_max: 8,
            max_iterations: 320,
            seed: 0,
            stop_on_first: false,
            log_uct: false,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Param(m.into()));
        if !(self.k_pw.is_finite() && self.k_pw > 0.0) {
            return bad("k_pw must be positive");
        }
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.exploration.is_finite() && self.exploration >= 0.0) {
            return bad("c must be non-negative");
        }
        if !self.unsafe_reward.is_finite() {
            return bad("r_e must be finite");
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1");
        }
        Ok(())
    }

    /// Applies a `key=value` override (`k_pw`, `alpha`, `c`, `r_e`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SearchError> {
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| SearchError::Param(format!("`{key}` needs a number, got `{value}`")))?;
        match key.trim() {
            "k_pw" | "k" => self.k_pw = v,
            "alpha" => self.alpha = v,
            "c" => self.exploration = v,
            "r_e" => self.unsafe_reward = v,
            other => return Err(SearchError::Param(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }
}

/// Step reward: `R_E` on an unsafe state, `-1/c_D` at the horizon, else 0.
pub fn reward(step: usize, k_max: usize, danger: &DangerAssessment, is_unsafe: bool, unsafe_reward: f64) -> f64 {
    if is_unsafe {
        unsafe_reward
    } else if step >= k_max {
        -1.0 / danger.danger
    } else {
        0.0
    }
}

/// Deterministic generator of episode `episode` under `seed`.
pub fn episode_rng(seed: u64, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Unsafe,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Zero-based episode index.
    pub episode: usize,
    pub actions: Vec<usize>,
    /// Number of leading actions chosen by the tree policy.
    pub tree_depth: usize,
    pub danger: Vec<f64>,
    pub cases: Vec<DangerCase>,
    pub rewards: Vec<f64>,
    pub terminal: Terminal,
    pub hazard: Option<HazardReport>,
}

impl EpisodeRecord {
    /// Undiscounted reward sums from each step to the end.
    pub fn returns(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rewards.len()];
        let mut acc = 0.0;
        for i in (0..self.rewards.len()).rev() {
            acc += self.rewards[i];
            out[i] = acc;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub algorithm: Algorithm,
    pub params: SearchParams,
    pub episodes: Vec<EpisodeRecord>,
    pub hazards: Vec<HazardReport>,
    /// One-based index of the first episode that reached an unsafe state.
    pub first_hazard_iteration: Option<usize>,
    /// Final tree (MCTS only).
    pub tree: Option<Tree>,
    pub reach_samples: usize,
}

impl SearchResult {
    pub fn found(&self) -> bool {
        self.first_hazard_iteration.is_some()
    }
}

fn record_step(
    world: &World,
    state: &SimState,
    step: usize,
    params: &SearchParams,
    rec: &mut EpisodeRecord,
) -> Result<(bool, usize), SearchError> {
    let eval = world.evaluate(state)?;
    let unsafe_ = eval.hazard.is_some();
    rec.rewards
        .push(reward(step, params.k_max, &eval.danger, unsafe_, params.unsafe_reward));
    rec.danger.push(eval.danger.danger);
    rec.cases.push(eval.danger.case);
    if let Some(mut h) = eval.hazard {
        h.actions = rec.actions.clone();
        h.step = step;
        h.episode = Some(rec.episode);
        rec.hazard = Some(h);
        rec.terminal = Terminal::Unsafe;
    }
    Ok((unsafe_, eval.reach_samples))
}

fn new_record(episode: usize) -> EpisodeRecord {
    EpisodeRecord {
        episode,
        actions: Vec::new(),
        tree_depth: 0,
        danger: Vec::new(),
        cases: Vec::new(),
        rewards: Vec::new(),
        terminal: Terminal::Horizon,
        hazard: None,
    }
}

fn finish(
    algorithm: Algorithm,
    params: &SearchParams,
    episodes: Vec<EpisodeRecord>,
    tree: Option<Tree>,
    reach_samples: usize,
) -> SearchResult {
    let hazards: Vec<HazardReport> = episodes.iter().filter_map(|e| e.hazard.clone()).collect();
    let first = episodes.iter().find(|e| e.hazard.is_some()).map(|e| e.episode + 1);
    SearchResult {
        algorithm,
        params: *params,
        episodes,
        hazards,
        first_hazard_iteration: first,
        tree,
        reach_samples,
    }
}

/// Monte Carlo tree search with double progressive widening.
pub fn mcts_search(world: &World, params: &SearchParams) -> Result<SearchResult, SearchError> {
    params.validate()?;
    let initial = world.reset()?;
    let mut tree = Tree::new();
    let mut episodes = Vec::with_capacity(params.max_iterations);
    let mut samples = 0;
    for episode in 0..params.max_iterations {
        let mut rng = episode_rng(params.seed, episode);
        let mut rec = new_record(episode);
        let mut state = initial.clone();
        let mut node = ROOT;
        let mut in_tree = true;
        let mut path = Vec::new();
        for step in 1..=params.k_max {
            let action = if in_tree {
                let (a, _) = tree.select_action(node, params, &mut rng);
                let (child, is_new) = tree.descend(node, a);
                path.push((node, a));
                rec.tree_depth += 1;
                node = child;
                in_tree = !is_new;
                a
            } else {
                rng.gen_range(0..ACTION_COUNT)
            };
            rec.actions.push(action);
            state = world.step(&state, HumanAction::from_index(action).expect("action index in range"));
            let (unsafe_, n) = record_step(world, &state, step, params, &mut rec)?;
            samples += n;
            if unsafe_ {
                break;
            }
        }
        tree.backpropagate(&path, &rec.returns());
        let found = rec.hazard.is_some();
        episodes.push(rec);
        if found && params.stop_on_first {
            break;
        }
    }
    Ok(finish(Algorithm::Mcts, params, episodes, Some(tree), samples))
}

/// Uniform random baseline with the same episode budget and horizon.
pub fn random_search(world: &World, params: &SearchParams) -> Result<SearchResult, SearchError> {
    params.validate()?;
    let initial = world.reset()?;
    let mut episodes = Vec::with_capacity(params.max_iterations);
    let mut samples = 0;
    for episode in 0..params.max_iterations {
        let mut rng = episode_rng(params.seed, episode);
        let mut rec = new_record(episode);
        let mut state = initial.clone();
        for step in 1..=params.k_max {
            let action = rng.gen_range(0..ACTION_COUNT);
            rec.actions.push(action);
            state = world.step(&state, HumanAction::from_index(action).expect("action index in range"));
            let (unsafe_, n) = record_step(world, &state, step, params, &mut rec)?;
            samples += n;
            if unsafe_ {
                break;
            }
        }
        let found = rec.hazard.is_some();
        episodes.push(rec);
        if found && params.stop_on_first {
            break;
        }
    }
    Ok(finish(Algorithm::Random, params, episodes, None, samples))
}

pub fn search(world: &World, algorithm: Algorithm, params: &SearchParams) -> Result<SearchResult, SearchError> {
    match algorithm {
        Algorithm::Mcts => mcts_search(world, params),
        Algorithm::Random => random_search(world, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assessment(danger: f64) -> DangerAssessment {
        DangerAssessment {
            case: DangerCase::Separated,
            danger,
            distance_m: 3.0,
            force_n: 0.0,
            region: None,
            robot: None,
            link: None,
        }
    }

    #[test]
    fn reward_cases() {
        let a = assessment(0.01);
        assert_eq!(reward(3, 8, &a, true, 1.0), 1.0);
        assert_eq!(reward(8, 8, &a, true, 2.5), 2.5);
        assert_eq!(reward(3, 8, &a, false, 1.0), 0.0);
        assert!((reward(8, 8, &a, false, 1.0) + 100.0).abs() < 1e-9);
        assert!((reward(8, 8, &assessment(0.5), false, 1.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn returns_are_suffix_sums() {
        let mut r = new_record(0);
        r.rewards = vec![0.0, 0.0, -4.0];
        assert_eq!(r.returns(), vec![-4.0, -4.0, -4.0]);
    }

    #[test]
    fn param_overrides() {
        let mut p = SearchParams::default();
        p.set("k_pw", "2").unwrap();
        p.set("alpha", "0.25").unwrap();
        p.set("c", "0.5").unwrap();
        p.set("r_e", "10").unwrap();
        assert_eq!(
            (p.k_pw, p.alpha, p.exploration, p.unsafe_reward),
            (2.0, 0.25, 0.5, 10.0)
        );
        assert!(p.set("gamma", "1").is_err());
        assert!(p.set("c", "x").is_err());
        p.alpha = 2.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn episode_streams_differ() {
        let a: u64 = episode_rng(7, 0).gen();
        let b: u64 = episode_rng(7, 1).gen();
        let c: u64 = episode_rng(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
