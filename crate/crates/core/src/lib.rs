//! Co-evolutionary social network dynamics.
//!
//! Tweet, retweet and follow events over a temporal follower graph: a
//! seeded event-driven simulator of retweet-driven link creation, detectors
//! and estimators that recover those links from an event log or from polled
//! follower snapshots, the two-parameter observation/follow model with its
//! maximum-likelihood fit, logistic regression for factor analysis, and the
//! structural analyses (SCC, sampling, closure) describing where repeated
//! retweet-driven following takes a network.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `trf` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod detect;
pub mod event;
pub mod graph;
pub mod infer;
pub mod math;
pub mod rng;
pub mod sim;
pub mod topology;

pub use event::{Event, EventKind, EventLog, MsgId, Snapshot};
pub use graph::{GraphError, TemporalDigraph, Time, UserId};
