//! Reconstruction of retweet exposures, retweet groups and retweet-driven
//! follows from an event log or from polled follower snapshots, plus the
//! probability estimators and latency statistics built on them.
//!
//! Log replays evaluate every retweet against the graph state just before
//! that event in log order, so a follow stamped with the same time as the
//! retweet that caused it is still seen as coming after it.

mod estimate;
mod group;
mod latency;
mod replay;
mod tr;
mod trf;

use thiserror::Error;

pub use estimate::{estimate_from_tally, estimate_p_endo, estimate_p_exo, estimate_p_trf, EstimateRow, EstimateTable, RatioEstimate, Stratum};
pub use group::{
    for_each_group, group_retweets, retweet_groups, GroupDetail, GroupOptions, GroupTally, GroupTracker, RetweetGroup,
};
pub use latency::{empirical_cdf, latency_histograms, Cdf};
pub use tr::{extract_tr_events, qualifying_deliveries, Delivery, TrEvent};
pub use trf::{detect_from_snapshots, detect_trf, TrfDetection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("inconsistent log at event {index}: follow of an existing edge")]
    InconsistentLog { index: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("no tweet qualifies for the exogenous estimator")]
    NoQualifyingTweets,
    #[error("no retweet qualifies for the endogenous estimator")]
    NoQualifyingRetweets,
}
