//! Skeletal linking structures for configurations of planar objects.
//!
//! The pipeline runs skeleton → linking → flow checks → integrals →
//! closeness and significance → proximity weights and tiered graph, with a
//! brute-force grid oracle for cross-checking volumes.

pub mod cli;
pub mod config_model;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod geom;
pub mod integrate;
pub mod invariants;
pub mod linking;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod proximity_graph;
pub mod skeleton;

pub use error::{Error, Result};
pub use geom::{pt, Point};
