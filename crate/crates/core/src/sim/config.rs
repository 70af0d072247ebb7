use thiserror::Error;

use crate::graph::{TemporalDigraph, Time};
use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Observation probability `p` and per-retweet follow probability `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrfModelParams {
    pub p: f64,
    pub q: f64,
}

impl TrfModelParams {
    /// Reciprocal class (speaker already follows listener), 24 h window.
    pub const RECIPROCAL_24H: TrfModelParams = TrfModelParams { p: 24.0e-4, q: 10.2 / 24.0 };
    /// Non-reciprocal class, 24 h window.
    pub const NONRECIPROCAL_24H: TrfModelParams = TrfModelParams { p: 0.7e-4, q: 0.16 / 0.7 };

    pub fn new(p: f64, q: f64) -> Result<Self, SimError> {
        let params = TrfModelParams { p, q };
        params.validate()?;
        Ok(params)
    }

    /// Builds from `p` and the single-retweet probability `p * q`.
    pub fn from_p_pq(p: f64, pq: f64) -> Result<Self, SimError> {
        if p <= 0.0 {
            return Err(SimError::InvalidConfig("p must be positive to derive q from p*q"));
        }
        Self::new(p, pq / p)
    }

    pub fn pq(&self) -> f64 {
        self.p * self.q
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return Err(SimError::InvalidConfig("p and q must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Retweet latency (seconds after the original tweet).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatencyDist {
    LogNormal { median: f64, sigma: f64 },
    Exponential { mean: f64 },
    Fixed(f64),
}

impl Default for LatencyDist {
    /// Median 10 minutes; sigma 1.2 puts about 93% of the mass under one
    /// hour.
    fn default() -> Self {
        LatencyDist::LogNormal { median: 600.0, sigma: 1.2 }
    }
}

impl LatencyDist {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = match *self {
            LatencyDist::LogNormal { median, sigma } => median > 0.0 && median.is_finite() && sigma > 0.0 && sigma.is_finite(),
            LatencyDist::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            LatencyDist::Fixed(x) => x > 0.0 && x.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig("retweet latency parameters must be positive and finite"))
        }
    }

    /// Fraction of latencies at or below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            LatencyDist::LogNormal { median, sigma } => math::normal_cdf((math::log(x) - math::log(median)) / sigma),
            LatencyDist::Exponential { mean } => -math::expm1(-x / mean),
            LatencyDist::Fixed(v) => {
                if x >= v {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub initial_graph: TemporalDigraph,
    /// Simulated horizon in seconds.
    pub duration: Time,
    /// Grouping and follow window in seconds.
    pub delta: Time,
    /// Per-user tweet rate (tweets per second).
    pub tweet_rate: f64,
    /// Probability that a receiver retweets a message.
    pub retweet_prob: f64,
    pub retweet_latency_dist: LatencyDist,
    pub params_reciprocal: TrfModelParams,
    pub params_nonreciprocal: TrfModelParams,
    /// Per-user rate of exogenous follows (follows per second).
    pub exo_follow_rate: f64,
    pub seed: u64,
    pub poll_interval: Time,
    /// When set, every receiver of a message (not only the author's
    /// followers) may retweet it.
    pub multi_hop: bool,
}

pub const HOUR: Time = 3600.0;
pub const DAY: Time = 86_400.0;

impl SimConfig {
    /// Defaults: one week, 24 h window, the 24 h reciprocity-split model
    /// parameters, lognormal latency, 5 minute polling.
    pub fn new(initial_graph: TemporalDigraph) -> Self {
        SimConfig {
            initial_graph,
            duration: 7.0 * DAY,
            delta: DAY,
            tweet_rate: 4.0 / DAY,
            retweet_prob: 0.05,
            retweet_latency_dist: LatencyDist::default(),
            params_reciprocal: TrfModelParams::RECIPROCAL_24H,
            params_nonreciprocal: TrfModelParams::NONRECIPROCAL_24H,
            exo_follow_rate: 0.0,
            seed: 0,
            poll_interval: 300.0,
            multi_hop: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        let nonneg = |x: f64| x >= 0.0 && x.is_finite();
        if !pos(self.duration) {
            return Err(SimError::InvalidConfig("duration must be positive"));
        }
        if !pos(self.delta) {
            return Err(SimError::InvalidConfig("delta must be positive"));
        }
        if !pos(self.poll_interval) {
            return Err(SimError::InvalidConfig("poll_interval must be positive"));
        }
        if !nonneg(self.tweet_rate) || !nonneg(self.exo_follow_rate) {
            return Err(SimError::InvalidConfig("rates must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.retweet_prob) {
            return Err(SimError::InvalidConfig("retweet_prob must lie in [0, 1]"));
        }
        self.retweet_latency_dist.validate()?;
        self.params_reciprocal.validate()?;
        self.params_nonreciprocal.validate()?;
        Ok(())
    }

    pub fn params(&self, reciprocal: bool) -> TrfModelParams {
        if reciprocal {
            self.params_reciprocal
        } else {
            self.params_nonreciprocal
        }
    }
}
