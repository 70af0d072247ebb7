use alloc::vec::Vec;

use crate::event::{EventKind, EventLog, Snapshot};
use crate::graph::{TemporalDigraph, Time, UserId};

/// Poll instants `k * poll_interval <= duration`, `k = 0, 1, ...`.
pub fn poll_times(poll_interval: Time, duration: Time) -> Vec<Time> {
    let mut out = Vec::new();
    if !(poll_interval > 0.0) || !(duration >= 0.0) {
        return out;
    }
    let mut k = 0u64;
    loop {
        let t = k as f64 * poll_interval;
        if t > duration {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

/// Polls the follower lists of `users` every `poll_interval` seconds, as a
/// measurement system querying the service would. Snapshots are ordered by
/// poll time, then user.
///
/// Follows that duplicate an existing edge are ignored; unknown users poll
/// as having no followers until someone follows them.
pub fn snapshot_observer(
    log: &EventLog,
    initial_graph: &TemporalDigraph,
    users: &[UserId],
    poll_interval: Time,
    duration: Time,
) -> Vec<Snapshot> {
    let mut users = users.to_vec();
    users.sort_unstable();
    users.dedup();
    let mut live = initial_graph.clone();
    let events = log.events();
    let mut next = 0;
    let mut out = Vec::new();
    for t in poll_times(poll_interval, duration) {
        while next < events.len() && events[next].t <= t {
            if let EventKind::Follow { follower, followee } = events[next].kind {
                let _ = live.add_follow(follower, followee, events[next].t);
            }
            next += 1;
        }
        for &user in &users {
            let followers = live.followers_at(user, t).unwrap_or_default();
            out.push(Snapshot { user, t, followers });
        }
    }
    out
}
