//! Seeded experiment harness: scenario generators, the three studies,
//! flat-file reporting, and run configuration.

pub mod config;
pub mod report;
pub mod scenario;
pub mod study;
