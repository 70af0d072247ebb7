use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::{HashMap, HashSet};

use super::replay::{eligible_listeners, replay, user_pair};
use super::tr::TrEvent;
use super::DetectError;
use crate::event::{EventKind, EventLog, MsgId};
use crate::graph::{TemporalDigraph, Time, UserId};

/// Retweets of one speaker received by one listener within a window
/// anchored at the first of them.
#[derive(Clone, Debug, PartialEq)]
pub struct RetweetGroup {
    pub speaker: UserId,
    pub listener: UserId,
    /// Time of the first retweet in the group.
    pub t_r: Time,
    /// Deliveries in the group; deliveries after a follow are not counted.
    pub n: u32,
    /// The listener followed the speaker within `[t_r, t_r + delta]`.
    pub i_delta: bool,
    /// The speaker followed the listener at `t_r`.
    pub reciprocal: bool,
    pub detail: Option<GroupDetail>,
}

/// Per-group factors used for logistic regression.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GroupDetail {
    pub distinct_tweets: u32,
    pub distinct_repeaters: u32,
    /// Speaker follower count at `t_r`.
    pub speaker_followers: u32,
    /// Speaker followee count at `t_r`.
    pub speaker_followees: u32,
    /// Tweets posted by the speaker up to `t_r`.
    pub speaker_tweets: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GroupOptions {
    /// Collect [`GroupDetail`] for each group (costs memory per open group).
    pub detail: bool,
}

#[derive(Clone, Debug)]
struct OpenGroup {
    speaker: UserId,
    listener: UserId,
    t0: Time,
    n: u32,
    reciprocal: bool,
    members: Vec<(MsgId, UserId)>,
    detail: Option<GroupDetail>,
}

impl OpenGroup {
    fn close(self, i_delta: bool) -> RetweetGroup {
        let detail = self.detail.map(|mut d| {
            let mut msgs: Vec<MsgId> = self.members.iter().map(|m| m.0).collect();
            msgs.sort_unstable();
            msgs.dedup();
            let mut reps: Vec<UserId> = self.members.iter().map(|m| m.1).collect();
            reps.sort_unstable();
            reps.dedup();
            d.distinct_tweets = msgs.len() as u32;
            d.distinct_repeaters = reps.len() as u32;
            d
        });
        RetweetGroup {
            speaker: self.speaker,
            listener: self.listener,
            t_r: self.t0,
            n: self.n,
            i_delta,
            reciprocal: self.reciprocal,
            detail,
        }
    }
}

/// Incremental retweet grouping.
///
/// Feed deliveries and follows in time order (a delivery and a follow with
/// the same timestamp: delivery first). A group opens at the first delivery
/// for a (speaker, listener) pair, absorbs deliveries in `[t0, t0 + delta)`,
/// and closes with `i_delta = true` on a follow in `[t0, t0 + delta]`, or
/// with `i_delta = false` once the window has passed. After a follow, further
/// deliveries for that pair are ignored.
#[derive(Debug)]
pub struct GroupTracker {
    delta: Time,
    detail: bool,
    open: HashMap<u64, OpenGroup>,
    following: HashSet<u64>,
}

impl GroupTracker {
    pub fn new(delta: Time, options: GroupOptions) -> Self {
        GroupTracker {
            delta,
            detail: options.detail,
            open: HashMap::new(),
            following: HashSet::new(),
        }
    }

    pub fn open_groups(&self) -> usize {
        self.open.len()
    }

    /// Records a delivery. Returns the previous group of this pair if the
    /// delivery falls past its window. `opening` supplies reciprocity and
    /// detail when a new group is opened.
    pub fn deliver<F>(
        &mut self,
        speaker: UserId,
        listener: UserId,
        repeater: UserId,
        msg: MsgId,
        t: Time,
        opening: F,
    ) -> Option<RetweetGroup>
    where
        F: FnOnce() -> (bool, Option<GroupDetail>),
    {
        let key = user_pair(listener, speaker);
        if self.following.contains(&key) {
            return None;
        }
        let mut expired = None;
        if let Some(g) = self.open.get_mut(&key) {
            if t < g.t0 + self.delta {
                g.n += 1;
                if self.detail {
                    g.members.push((msg, repeater));
                }
                return None;
            }
            expired = self.open.remove(&key).map(|g| g.close(false));
        }
        let (reciprocal, detail) = opening();
        let mut members = Vec::new();
        if self.detail {
            members.push((msg, repeater));
        }
        self.open.insert(
            key,
            OpenGroup {
                speaker,
                listener,
                t0: t,
                n: 1,
                reciprocal,
                members,
                detail: if self.detail { Some(detail.unwrap_or_default()) } else { None },
            },
        );
        expired
    }

    /// Records `listener -> speaker` created at `t`.
    pub fn follow(&mut self, listener: UserId, speaker: UserId, t: Time) -> Option<RetweetGroup> {
        let key = user_pair(listener, speaker);
        self.following.insert(key);
        let g = self.open.remove(&key)?;
        let hit = t >= g.t0 && t <= g.t0 + self.delta;
        Some(g.close(hit))
    }

    /// Closes every group whose window ended strictly before `now`.
    pub fn flush_expired(&mut self, now: Time, out: &mut Vec<RetweetGroup>) {
        let delta = self.delta;
        let start = out.len();
        let keys: Vec<u64> = self
            .open
            .iter()
            .filter(|(_, g)| g.t0 + delta < now)
            .map(|(k, _)| *k)
            .collect();
        for k in keys {
            if let Some(g) = self.open.remove(&k) {
                out.push(g.close(false));
            }
        }
        out[start..].sort_by(group_order);
    }

    /// Closes all remaining groups.
    pub fn finish(mut self) -> Vec<RetweetGroup> {
        let mut out = Vec::new();
        self.flush_expired(f64::INFINITY, &mut out);
        out
    }
}

fn group_order(a: &RetweetGroup, b: &RetweetGroup) -> Ordering {
    a.t_r
        .total_cmp(&b.t_r)
        .then(a.speaker.cmp(&b.speaker))
        .then(a.listener.cmp(&b.listener))
}

/// Groups TR events given the follow times `(listener, speaker, t)`.
/// Output is sorted by first-retweet time, speaker, listener.
pub fn group_retweets(tr_events: &[TrEvent], follows: &[(UserId, UserId, Time)], delta: Time) -> Vec<RetweetGroup> {
    // (time, rank, index): deliveries rank before follows at equal times
    let mut items: Vec<(Time, u8, usize)> = Vec::with_capacity(tr_events.len() + follows.len());
    items.extend(tr_events.iter().enumerate().map(|(i, e)| (e.t_r, 0, i)));
    items.extend(follows.iter().enumerate().map(|(i, f)| (f.2, 1, i)));
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut tracker = GroupTracker::new(delta, GroupOptions::default());
    let mut out = Vec::new();
    for (_, rank, i) in items {
        let closed = if rank == 0 {
            let e = &tr_events[i];
            tracker.deliver(e.speaker, e.listener, e.repeater, e.msg, e.t_r, || (e.reciprocal, None))
        } else {
            let (listener, speaker, t) = follows[i];
            tracker.follow(listener, speaker, t)
        };
        out.extend(closed);
    }
    out.extend(tracker.finish());
    out.sort_by(group_order);
    out
}

/// Streams retweet groups from a log in bounded memory: groups are handed
/// to `sink` as they close.
pub fn for_each_group<F>(
    log: &EventLog,
    initial_graph: &TemporalDigraph,
    delta: Time,
    options: GroupOptions,
    mut sink: F,
) -> Result<(), DetectError>
where
    F: FnMut(RetweetGroup),
{
    let mut tracker = GroupTracker::new(delta, options);
    let mut buf = Vec::new();
    let mut flushed = Vec::new();
    let mut next_flush = delta;
    let mut tweets_by: HashMap<UserId, u32> = HashMap::new();
    replay(log, initial_graph, |_, e, g| {
        if e.t > next_flush {
            tracker.flush_expired(e.t, &mut flushed);
            flushed.drain(..).for_each(&mut sink);
            next_flush = e.t + delta;
        }
        match e.kind {
            EventKind::Tweet { author, .. } if options.detail => {
                *tweets_by.entry(author).or_default() += 1;
            }
            EventKind::Retweet { repeater, msg, origin_author, .. } => {
                eligible_listeners(g, repeater, origin_author, e.t, &mut buf);
                for &(listener, reciprocal) in &buf {
                    let opening = || {
                        let detail = options.detail.then(|| GroupDetail {
                            speaker_followers: g.followers_at(origin_author, e.t).map_or(0, |v| v.len() as u32),
                            speaker_followees: g.followees_at(origin_author, e.t).map_or(0, |v| v.len() as u32),
                            speaker_tweets: tweets_by.get(&origin_author).copied().unwrap_or(0),
                            ..GroupDetail::default()
                        });
                        (reciprocal, detail)
                    };
                    if let Some(closed) = tracker.deliver(origin_author, listener, repeater, msg, e.t, opening) {
                        sink(closed);
                    }
                }
            }
            EventKind::Follow { follower, followee } => {
                if let Some(closed) = tracker.follow(follower, followee, e.t) {
                    sink(closed);
                }
            }
            _ => {}
        }
        Ok(())
    })?;
    tracker.finish().into_iter().for_each(sink);
    Ok(())
}

/// All retweet groups of a log, sorted by first-retweet time, speaker,
/// listener.
pub fn retweet_groups(
    log: &EventLog,
    initial_graph: &TemporalDigraph,
    delta: Time,
    options: GroupOptions,
) -> Result<Vec<RetweetGroup>, DetectError> {
    let mut out = Vec::new();
    for_each_group(log, initial_graph, delta, options, |g| out.push(g))?;
    out.sort_by(group_order);
    Ok(out)
}

/// Group counts by reciprocity class and group size: the sufficient
/// statistics for every retweet-group probability estimate and fit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupTally {
    // [class][n] = (groups, groups with a follow); class 0 non-reciprocal
    counts: [Vec<(u64, u64)>; 2],
}

impl GroupTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_groups<'a>(groups: impl IntoIterator<Item = &'a RetweetGroup>) -> Self {
        let mut t = Self::new();
        for g in groups {
            t.record(g);
        }
        t
    }

    pub fn record(&mut self, g: &RetweetGroup) {
        self.add(g.reciprocal, g.n, 1, g.i_delta as u64);
    }

    pub fn add(&mut self, reciprocal: bool, n: u32, groups: u64, follows: u64) {
        let v = &mut self.counts[reciprocal as usize];
        let n = n as usize;
        if v.len() <= n {
            v.resize(n + 1, (0, 0));
        }
        v[n].0 += groups;
        v[n].1 += follows;
    }

    pub fn merge(&mut self, other: &GroupTally) {
        for class in 0..2 {
            for (n, &(g, f)) in other.counts[class].iter().enumerate() {
                if g > 0 || f > 0 {
                    self.add(class == 1, n as u32, g, f);
                }
            }
        }
    }

    /// `(n, groups, follows)` for every size with at least one group, for
    /// the classes selected by `reciprocal` (`None` pools both).
    pub fn rows(&self, reciprocal: Option<bool>) -> Vec<(u32, u64, u64)> {
        let len = self.counts[0].len().max(self.counts[1].len());
        let mut out = Vec::new();
        for n in 0..len {
            let mut g = 0;
            let mut f = 0;
            for class in 0..2 {
                if reciprocal.is_some_and(|r| r as usize != class) {
                    continue;
                }
                if let Some(&(cg, cf)) = self.counts[class].get(n) {
                    g += cg;
                    f += cf;
                }
            }
            if g > 0 {
                out.push((n as u32, g, f));
            }
        }
        out
    }

    /// Total `(groups, follows)`.
    pub fn total(&self, reciprocal: Option<bool>) -> (u64, u64) {
        self.rows(reciprocal)
            .iter()
            .fold((0, 0), |acc, r| (acc.0 + r.1, acc.1 + r.2))
    }
}
