//! Adversarial hazard search for human-robot workcells.
//!
//! A virtual human walks and bends through a kinematic model of a robot
//! workcell while a Monte Carlo tree search picks its actions so as to
//! provoke unsafe contacts, meaning contacts whose transferred force exceeds
//! the limit of the touched body region.
//!
//! * [`geometry`]: exact distances between spheres, capsules and boxes.
//! * [`human`]: the action space, the articulated body and the reach check.
//! * [`safety`]: collision forces, the danger index and hazard reports.
//! * [`simulator`]: robots, safety devices and the deterministic step.
//! * [`search`]: MCTS with progressive widening and a random baseline.
//! * [`scenarios`]: the TOML scenario format and six builtin workcells.
//! * [`cli`]: the `hazardsim` command line.
//!
//! ```
//! use hazardsim::scenarios::{builtin, Builtin};
//! use hazardsim::search::{mcts_search, SearchParams};
//!
//! let world = builtin(Builtin::S1).world().unwrap();
//! let params = SearchParams { max_iterations: 20, ..SearchParams::default() };
//! let result = mcts_search(&world, &params).unwrap();
//! assert_eq!(result.episodes.len(), 20);
//! ```

pub mod cli;
pub mod geometry;
pub mod human;
pub mod safety;
pub mod scenarios;
pub mod search;
pub mod simulator;
