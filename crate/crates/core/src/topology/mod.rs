//! Strongly connected components, weakly connected graph sampling, and the
//! fixed point of repeated retweet-driven following.

mod closure;
mod curve;
mod sample;
mod scc;

use thiserror::Error;

use crate::graph::UserId;

pub use closure::{is_trf_equilibrium, reachable_followees, trf_closure, EQUILIBRIUM_TIME};
pub use curve::{scc_fraction_curve, CurvePoint, SamplingMethod};
pub use sample::{random_walk_sample, random_walk_sample_from, snowball_sample, snowball_sample_from, UndirectedView};
pub use scc::{tarjan_scc, SccResult};

/// Restart probability of the random-walk sampler.
pub const DEFAULT_RESTART: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("sample of size {target} unreachable from the start node")]
    Unreachable { target: usize },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}
