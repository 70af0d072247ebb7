use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use hashbrown::{HashMap, HashSet};

use super::group::{GroupTally, RetweetGroup};
use super::replay::{creation_times, eligible_listeners, replay, user_pair};
use super::DetectError;
use crate::event::{EventKind, EventLog, MsgId};
use crate::graph::{TemporalDigraph, Time, UserId};
use crate::math;

/// Reciprocity filter for group statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stratum {
    All,
    Reciprocal,
    NonReciprocal,
}

impl Stratum {
    pub fn class(self) -> Option<bool> {
        match self {
            Stratum::All => None,
            Stratum::Reciprocal => Some(true),
            Stratum::NonReciprocal => Some(false),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::All => "all",
            Stratum::Reciprocal => "reciprocal",
            Stratum::NonReciprocal => "nonreciprocal",
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stratum {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Stratum::All),
            "reciprocal" => Ok(Stratum::Reciprocal),
            "nonreciprocal" => Ok(Stratum::NonReciprocal),
            _ => Err("stratum must be all, reciprocal or nonreciprocal"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateRow {
    pub stratum: Stratum,
    /// Group size; 0 for the pooled row.
    pub n: u32,
    /// Groups of exactly this size.
    pub groups: u64,
    /// Of those, groups that ended in a follow.
    pub followers: u64,
    /// Probability of a follow after at most `n` received retweets.
    pub probability: f64,
    pub std_error: f64,
}

impl EstimateRow {
    /// Raw `followers / groups` of this row.
    pub fn fraction(&self) -> f64 {
        self.followers as f64 / self.groups as f64
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EstimateTable {
    pub rows: Vec<EstimateRow>,
}

/// Fraction of retweet groups that ended in a follow.
///
/// With `by_n = false` a single pooled row (`n = 0`) holds the plain
/// fraction. With `by_n = true` there is one row per observed group size.
/// Because a follow truncates its group, a group of size `n` with a follow
/// reached its follow at exactly the `n`-th retweet, while a group without
/// one survived `n` retweets. The per-row probability is therefore the
/// product-limit estimate `1 - prod_{k<=n} (1 - f_k / r_k)`, where `f_k`
/// counts follows at size `k` and `r_k` groups that reached `k` retweets;
/// standard errors follow Greenwood's formula. When every group has the
/// same size this equals the plain fraction.
pub fn estimate_p_trf(groups: &[RetweetGroup], stratum: Stratum, by_n: bool) -> Result<EstimateTable, DetectError> {
    estimate_from_tally(&GroupTally::from_groups(groups), stratum, by_n)
}

pub fn estimate_from_tally(tally: &GroupTally, stratum: Stratum, by_n: bool) -> Result<EstimateTable, DetectError> {
    let rows = tally.rows(stratum.class());
    let (total, follows) = rows.iter().fold((0u64, 0u64), |a, r| (a.0 + r.1, a.1 + r.2));
    if total == 0 {
        return Err(DetectError::EmptyInput);
    }
    if !by_n {
        let p = follows as f64 / total as f64;
        return Ok(EstimateTable {
            rows: alloc::vec![EstimateRow {
                stratum,
                n: 0,
                groups: total,
                followers: follows,
                probability: p,
                std_error: math::sqrt(p * (1.0 - p) / total as f64),
            }],
        });
    }
    let mut at_risk = total;
    let mut survival = 1.0;
    let mut greenwood = 0.0;
    let mut out = Vec::with_capacity(rows.len());
    for &(n, g, f) in &rows {
        // groups of smaller size have left the risk set already
        let r = at_risk as f64;
        let fk = f as f64;
        survival *= 1.0 - fk / r;
        if at_risk > f {
            greenwood += fk / (r * (r - fk));
        }
        out.push(EstimateRow {
            stratum,
            n,
            groups: g,
            followers: f,
            probability: 1.0 - survival,
            std_error: survival * math::sqrt(greenwood),
        });
        at_risk -= g;
    }
    Ok(EstimateTable { rows: out })
}

/// Mean of per-item ratios with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioEstimate {
    pub probability: f64,
    pub std_error: f64,
    /// Items averaged (tweets or retweets).
    pub count: usize,
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn finish(&self) -> RatioEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { (self.sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
        RatioEstimate { probability: mean, std_error: math::sqrt(var / n), count: self.n }
    }
}

fn followed_by(created: &HashMap<u64, Time>, l: UserId, s: UserId, deadline: Time) -> bool {
    matches!(created.get(&user_pair(l, s)), Some(&c) if c <= deadline)
}

/// Probability that a follower of a follower of S follows S within `delta`
/// of a tweet of S that nobody retweeted within `[t_s, t_s + delta]`.
///
/// The candidate set is fixed at `t_s`. Tweets whose window extends past the
/// last event of the log, and tweets with an empty candidate set, are
/// skipped.
pub fn estimate_p_exo(log: &EventLog, initial_graph: &TemporalDigraph, delta: Time) -> Result<RatioEstimate, DetectError> {
    let end = log.end_time().ok_or(DetectError::NoQualifyingTweets)?;
    let mut first_retweet: HashMap<MsgId, Time> = HashMap::new();
    for e in log {
        if let EventKind::Retweet { msg, .. } = e.kind {
            first_retweet.entry(msg).or_insert(e.t);
        }
    }
    let created = creation_times(log, initial_graph);
    let mut m = Moments::default();
    replay(log, initial_graph, |_, e, g| {
        let EventKind::Tweet { author, msg } = e.kind else { return Ok(()) };
        if e.t + delta > end {
            return Ok(());
        }
        if first_retweet.get(&msg).is_some_and(|&t| t <= e.t + delta) {
            return Ok(());
        }
        let phi = g.followers_of_followers(author, e.t).unwrap_or_default();
        if phi.is_empty() {
            return Ok(());
        }
        let hits = phi.iter().filter(|&&l| followed_by(&created, l, author, e.t + delta)).count();
        m.push(hits as f64 / phi.len() as f64);
        Ok(())
    })?;
    if m.n == 0 {
        return Err(DetectError::NoQualifyingTweets);
    }
    Ok(m.finish())
}

/// Probability that a follower of a follower of S who also follows the
/// repeater R follows S within `delta` of R's retweet of S.
///
/// The candidate set is fixed at the retweet time. Retweets whose window
/// extends past the last event of the log, and retweets with an empty
/// candidate set, are skipped.
pub fn estimate_p_endo(log: &EventLog, initial_graph: &TemporalDigraph, delta: Time) -> Result<RatioEstimate, DetectError> {
    let end = log.end_time().ok_or(DetectError::NoQualifyingRetweets)?;
    let created = creation_times(log, initial_graph);
    let mut m = Moments::default();
    let mut buf = Vec::new();
    replay(log, initial_graph, |_, e, g| {
        let EventKind::Retweet { repeater, origin_author: s, .. } = e.kind else { return Ok(()) };
        if e.t + delta > end {
            return Ok(());
        }
        eligible_listeners(g, repeater, s, e.t, &mut buf);
        let repeater_follows = g.edge_at(repeater, s, e.t).unwrap_or(false);
        if !repeater_follows {
            // Candidates must still be followers of some follower of S.
            let followers: HashSet<UserId> = g.followers_at(s, e.t).unwrap_or_default().into_iter().collect();
            buf.retain(|&(l, _)| {
                g.followees_at(l, e.t)
                    .map(|fs| fs.iter().any(|y| followers.contains(y)))
                    .unwrap_or(false)
            });
        }
        if buf.is_empty() {
            return Ok(());
        }
        let hits = buf.iter().filter(|&&(l, _)| followed_by(&created, l, s, e.t + delta)).count();
        m.push(hits as f64 / buf.len() as f64);
        Ok(())
    })?;
    if m.n == 0 {
        return Err(DetectError::NoQualifyingRetweets);
    }
    Ok(m.finish())
}
