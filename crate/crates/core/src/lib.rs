//! Semantic object-goal navigation engine.
//!
//! The crate is organized around the pipeline of a frontier-based semantic
//! navigation agent: per-floor occupancy grids with 2.5-D height layers
//! ([`grid`]), a hierarchical Floor→Region→Object scene graph ([`graph`]),
//! imagined completion of unexplored regions ([`imagine`]), dual
//! exploitation/exploration information gain for frontier selection
//! ([`gain`]), fast-marching planning with cross-floor stair climbing
//! ([`plan`]), the agent control loop ([`agent`]), a deterministic
//! procedural multi-floor gridworld ([`sim`]), and the benchmark harness
//! with SR/SPL/SoftSPL metrics ([`bench`]).

pub mod agent;
pub mod bench;
pub mod config;
pub mod fixtures;
pub mod gain;
pub mod geom;
pub mod graph;
pub mod grid;
pub mod imagine;
pub mod par;
pub mod plan;
pub mod sim;

pub use config::NavConfig;
