//! SINR link-capacity toolkit: how many wireless links can share the
//! channel, under stochastic shadowing and Rayleigh fading.
//!
//! The crate is organized around a plain geometric model ([`model`]) and
//! layers on it:
//!
//! * [`shadowing`] — multiplicative gain perturbations (log-normal,
//!   heavy-tailed, degenerate) and the growth index of a distribution's
//!   upper tail;
//! * [`sched`] — feasibility-preserving schedulers: robustness partition,
//!   greedy cluster selection, and the equilength / general capacity
//!   pipelines;
//! * [`oracle`] — exact references: brute-force optimal selections and the
//!   spectral power-control criterion;
//! * [`rayleigh`] — probabilistic transmission under exponential fading:
//!   closed-form success probabilities, bounds, and Monte Carlo validation;
//! * [`experiments`] — reproducible simulation studies over generated
//!   scenarios, with CSV/JSON reporting.
//!
//! Randomized code draws through [`rng::substream`] so that results are
//! reproducible for a fixed seed regardless of thread count.

pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rayleigh;
pub mod rng;
pub mod sched;
pub mod shadowing;

pub use error::{Error, Result};
pub use experiments::config::{run, RunConfig, StudyKind};
pub use experiments::scenario::{generate, Scenario, ScenarioKind};
pub use experiments::study::{Row, StudyReport};
pub use model::{GainTable, Instance, Link, LinkId, Params, Point};
pub use oracle::{NonnegMatrix, Selection};
pub use rayleigh::{FadingReport, ProbVector};
pub use sched::{ClusterDecomposition, Partition, SelectionResult, StageCounters};
pub use shadowing::{Family, GnEstimate, ShadowingSpec};
