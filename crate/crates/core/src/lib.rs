//! Planning-corpus engine: typed-STRIPS PDDL, plan judging, corpus synthesis
//! for LLM planners, the LCCS reward and evaluation metrics.

pub mod augment;
pub mod catalog;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod exec;
pub mod fixtures;
pub mod nl;
pub mod pddl;
pub mod reward;
pub mod rng;
