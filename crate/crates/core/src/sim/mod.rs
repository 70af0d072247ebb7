//! Event-driven generator of co-evolving tweet/retweet/follow dynamics.
//!
//! Users tweet as Poisson processes; followers retweet after a random
//! latency. A listener receiving a retweet of a speaker it does not follow
//! opens a retweet group for that speaker, observes the group with
//! probability `p` (drawn once per group), and while the group is open each
//! delivered retweet of an observed group triggers a follow with probability
//! `q`. Exogenous follows to second-hop accounts arrive independently.

mod config;
mod engine;
mod observer;
mod synth;

pub use config::{LatencyDist, DAY, HOUR, SimConfig, SimError, TrfModelParams};
pub use engine::{run_simulation, GroundTruthTrf, SimOutput, SimStats};
pub use observer::{poll_times, snapshot_observer};
pub use synth::{synth_graph, GraphFamily};
