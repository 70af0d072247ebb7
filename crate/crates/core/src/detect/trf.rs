use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use super::replay::{eligible_listeners, replay, user_pair};
use super::tr::Delivery;
use super::DetectError;
use crate::event::{EventKind, EventLog, Snapshot};
use crate::graph::{TemporalDigraph, Time, UserId};

/// A follow attributed to the most recent qualifying retweet delivery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrfDetection {
    pub speaker: UserId,
    pub repeater: UserId,
    pub listener: UserId,
    pub t_s: Time,
    pub t_r: Time,
    pub t_l: Time,
    pub latency: Time,
    pub reciprocal: bool,
}

#[derive(Clone, Copy)]
struct Last {
    repeater: UserId,
    t_s: Time,
    t_r: Time,
    reciprocal: bool,
}

/// Follows of `L -> S` within `delta` of a qualifying delivery of a retweet
/// of S to L, in log order. Among deliveries with the same timestamp, the
/// first one in log order is taken as the cause.
pub fn detect_trf(log: &EventLog, initial_graph: &TemporalDigraph, delta: Time) -> Result<Vec<TrfDetection>, DetectError> {
    let mut last: HashMap<u64, Last> = HashMap::new();
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut next_sweep = delta;
    replay(log, initial_graph, |_, e, g| {
        if e.t > next_sweep {
            last.retain(|_, d| e.t - d.t_r <= delta);
            next_sweep = e.t + delta;
        }
        match e.kind {
            EventKind::Retweet { repeater, origin_author, origin_t, .. } => {
                eligible_listeners(g, repeater, origin_author, e.t, &mut buf);
                for &(listener, reciprocal) in &buf {
                    let d = Last { repeater, t_s: origin_t, t_r: e.t, reciprocal };
                    last.entry(user_pair(listener, origin_author))
                        .and_modify(|x| {
                            if d.t_r > x.t_r {
                                *x = d;
                            }
                        })
                        .or_insert(d);
                }
            }
            EventKind::Follow { follower, followee } => {
                if let Some(d) = last.remove(&user_pair(follower, followee)) {
                    if e.t - d.t_r <= delta {
                        out.push(TrfDetection {
                            speaker: followee,
                            repeater: d.repeater,
                            listener: follower,
                            t_s: d.t_s,
                            t_r: d.t_r,
                            t_l: e.t,
                            latency: e.t - d.t_r,
                            reciprocal: d.reciprocal,
                        });
                    }
                }
            }
            EventKind::Tweet { .. } => {}
        }
        Ok(())
    })?;
    Ok(out)
}

/// Detection from polled follower lists. A user who first appears in a
/// speaker's follower list at poll `t_p` is a TRF when the latest qualifying
/// delivery `t_r <= t_p` satisfies `t_p - t_r <= delta`; `t_l` is reported
/// as `t_p`. The first snapshot of each speaker is the baseline.
///
/// Output is ordered by poll time, speaker, listener.
pub fn detect_from_snapshots(snapshots: &[Snapshot], deliveries: &[Delivery], delta: Time) -> Vec<TrfDetection> {
    // (listener, speaker) -> delivery indices in time order
    let mut by_pair: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut order: Vec<usize> = (0..deliveries.len()).collect();
    order.sort_by(|&a, &b| deliveries[a].t_r.total_cmp(&deliveries[b].t_r).then(a.cmp(&b)));
    for i in order {
        let d = &deliveries[i];
        by_pair.entry(user_pair(d.listener, d.speaker)).or_default().push(i);
    }

    let mut snaps: Vec<&Snapshot> = snapshots.iter().collect();
    snaps.sort_by(|a, b| a.user.cmp(&b.user).then(a.t.total_cmp(&b.t)));

    let mut out = Vec::new();
    let mut prev: Option<(UserId, HashSet<UserId>)> = None;
    for s in snaps {
        let current: HashSet<UserId> = s.followers.iter().copied().collect();
        if let Some((user, before)) = &prev {
            if *user == s.user {
                let mut fresh: Vec<UserId> = s.followers.iter().copied().filter(|f| !before.contains(f)).collect();
                fresh.sort_unstable();
                for listener in fresh {
                    let Some(list) = by_pair.get(&user_pair(listener, s.user)) else { continue };
                    // latest delivery at or before the poll; the first one
                    // among equal timestamps
                    let end = list.partition_point(|&i| deliveries[i].t_r <= s.t);
                    if end == 0 {
                        continue;
                    }
                    let t_last = deliveries[list[end - 1]].t_r;
                    let first = list[..end].partition_point(|&i| deliveries[i].t_r < t_last);
                    let d = &deliveries[list[first]];
                    if s.t - d.t_r <= delta {
                        out.push(TrfDetection {
                            speaker: s.user,
                            repeater: d.repeater,
                            listener,
                            t_s: d.t_s,
                            t_r: d.t_r,
                            t_l: s.t,
                            latency: s.t - d.t_r,
                            reciprocal: d.reciprocal,
                        });
                    }
                }
            }
        }
        prev = Some((s.user, current));
    }
    out.sort_by(|a, b| {
        a.t_l
            .total_cmp(&b.t_l)
            .then(a.speaker.cmp(&b.speaker))
            .then(a.listener.cmp(&b.listener))
    });
    out
}
