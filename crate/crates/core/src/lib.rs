//! Rigidities of graphs with group actions, reduction graphs of curves
//! under base change, and Pfister-number bounds.

pub mod action;
pub mod graph;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod pfister;
pub mod reduction;
pub mod symmetry;

pub use action::{GGraph, PermGroup, Permutation, Rigidity};
pub use graph::{BipartiteDualGraph, MultiGraph};
