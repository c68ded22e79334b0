pub mod dataset;
pub mod features;
pub mod history;
pub mod metrics;
pub mod patterns;
pub mod ranker;
pub mod roster;
pub mod simulation;
