//! Communication cost of distributing purified multipartite graph states.

pub mod analytic;
pub mod campaign;
pub mod graph;
pub mod noise;
pub mod purify;
pub mod stab;
pub mod strategy;
