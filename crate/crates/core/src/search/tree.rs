//! Search tree with progressive widening over the 36 human actions.
//!
//! Transitions are deterministic, so each tried action has exactly one
//! successor node and a node is identified by its action path from the root.

use super::SearchParams;
use crate::human::ACTION_COUNT;
use rand::Rng;
use serde::Serialize;

pub type NodeId = usize;
pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub action: usize,
    /// N(s,a)
    pub visits: u64,
    /// Q(s,a)
    pub value: f64,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    /// N(s): one for the initial visit plus one per action taken here.
    pub visits: u64,
    pub depth: usize,
    pub edges: Vec<Edge>,
}

impl Node {
    fn new(depth: usize) -> Self {
        Self {
            visits: 1,
            depth,
            edges: Vec::new(),
        }
    }

    pub fn edge(&self, action: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.action == action)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Widen,
    Revisit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub max_depth: usize,
    pub root_children: usize,
    pub root_visits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Default for Tree {
    fn default() -> Self {
        Self::new()
    }
}

/// Widening criterion |X(s)| < k * N(s)^alpha.
pub fn should_widen(tried: usize, visits: u64, k_pw: f64, alpha: f64) -> bool {
    (tried as f64) < k_pw * (visits as f64).powf(alpha)
}

impl Tree {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::new(0)],
        }
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Picks the action to take at `node`: a fresh uniformly sampled action
    /// while the widening criterion holds, otherwise the tried action
    /// maximizing `Q + c * sqrt(N(s) / N(s,a))` (lowest index on ties).
    pub fn select_action<R: Rng>(&self, node: NodeId, params: &SearchParams, rng: &mut R) -> (usize, Decision) {
        let n = &self.nodes[node];
        if n.edges.len() < ACTION_COUNT && should_widen(n.edges.len(), n.visits, params.k_pw, params.alpha) {
            loop {
                let a = rng.gen_range(0..ACTION_COUNT);
                if n.edge(a).is_none() {
                    return (a, Decision::Widen);
                }
            }
        }
        (best_action(n, params), Decision::Revisit)
    }

    /// Takes `action` at `node`, creating the edge and child if needed and
    /// incrementing N(s) and N(s,a). Returns the child and whether it is new.
    pub fn descend(&mut self, node: NodeId, action: usize) -> (NodeId, bool) {
        let next_id = self.nodes.len();
        let depth = self.nodes[node].depth + 1;
        let n = &mut self.nodes[node];
        n.visits += 1;
        if let Some(e) = n.edges.iter_mut().find(|e| e.action == action) {
            e.visits += 1;
            return (e.child, false);
        }
        n.edges.push(Edge {
            action,
            visits: 1,
            value: 0.0,
            child: next_id,
        });
        self.nodes.push(Node::new(depth));
        (next_id, true)
    }

    /// Incremental-mean update of Q along `path`, where `returns[i]` is the
    /// undiscounted reward sum from step `i` to the end of the episode.
    pub fn backpropagate(&mut self, path: &[(NodeId, usize)], returns: &[f64]) {
        for ((node, action), q) in path.iter().zip(returns).rev() {
            let edge = self.nodes[*node]
                .edges
                .iter_mut()
                .find(|e| e.action == *action)
                .expect("edge on backpropagated path");
            edge.value += (q - edge.value) / edge.visits as f64;
        }
    }

    /// Edge reached by following `path` from the root; the last element is
    /// the action of the returned edge.
    pub fn edge_by_path(&self, path: &[usize]) -> Option<&Edge> {
        let (last, prefix) = path.split_last()?;
        let mut node = ROOT;
        for a in prefix {
            node = self.nodes[node].edge(*a)?.child;
        }
        self.nodes[node].edge(*last)
    }

    pub fn stats(&self) -> TreeStats {
        TreeStats {
            nodes: self.nodes.len(),
            max_depth: self.nodes.iter().map(|n| n.depth).max().unwrap_or(0),
            root_children: self.nodes[ROOT].edges.len(),
            root_visits: self.nodes[ROOT].visits,
        }
    }

    /// Nodes breaking `|X(s)| <= ceil(k * N(s)^alpha)`, `|X(s)| <= 36` or
    /// `N(s) = 1 + sum N(s,a)`.
    pub fn invariant_violations(&self, k_pw: f64, alpha: f64) -> Vec<NodeId> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                let bound = (k_pw * (n.visits as f64).powf(alpha)).ceil() as usize;
                let sum: u64 = n.edges.iter().map(|e| e.visits).sum();
                n.edges.len() > bound || n.edges.len() > ACTION_COUNT || n.visits != sum + 1
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Revisit rule over the tried actions of `node`.
pub fn best_action(node: &Node, params: &SearchParams) -> usize {
    let n = node.visits as f64;
    let mut best: Option<(f64, usize)> = None;
    for e in &node.edges {
        let ratio = if params.log_uct {
            n.ln() / e.visits as f64
        } else {
            n / e.visits as f64
        };
        let score = e.value + params.exploration * ratio.sqrt();
        let better = match best {
            None => true,
            Some((s, a)) => score > s || (score == s && e.action < a),
        };
        if better {
            best = Some((score, e.action));
        }
    }
    best.expect("revisit requires at least one tried action").1
}
