use alloc::vec::Vec;

use hashbrown::HashMap;

use super::DetectError;
use crate::event::{Event, EventKind, EventLog};
use crate::graph::{pair_key, TemporalDigraph, Time, UserId};

/// Walks `log` over a live copy of `initial`. `visit` sees each event with
/// the graph as it stood before that event; follows are applied afterwards.
pub(crate) fn replay<F>(log: &EventLog, initial: &TemporalDigraph, mut visit: F) -> Result<TemporalDigraph, DetectError>
where
    F: FnMut(usize, &Event, &TemporalDigraph) -> Result<(), DetectError>,
{
    let mut g = initial.clone();
    for (index, e) in log.iter().enumerate() {
        visit(index, e, &g)?;
        if let EventKind::Follow { follower, followee } = e.kind {
            g.add_follow(follower, followee, e.t)
                .map_err(|_| DetectError::InconsistentLog { index })?;
        }
    }
    Ok(g)
}

/// Listeners eligible for a retweet of `speaker` by `repeater` at `t`:
/// followers of the repeater at `t` that neither are nor follow the speaker.
/// Each entry carries whether the speaker follows the listener at `t`.
pub(crate) fn eligible_listeners(
    g: &TemporalDigraph,
    repeater: UserId,
    speaker: UserId,
    t: Time,
    out: &mut Vec<(UserId, bool)>,
) {
    out.clear();
    let Ok(r) = g.ix(repeater) else { return };
    let s = g.ix(speaker).ok();
    for &(l, c) in g.followers_raw(r) {
        if c > t {
            continue;
        }
        match s {
            Some(s) => {
                if l == s || g.edge_at_ix(l, s, t) {
                    continue;
                }
                out.push((g.id(l), g.edge_at_ix(s, l, t)));
            }
            None => out.push((g.id(l), false)),
        }
    }
}

/// Creation time of every edge in the initial graph or created by the log,
/// keyed by `(follower, followee)`.
pub(crate) fn creation_times(log: &EventLog, initial: &TemporalDigraph) -> HashMap<u64, Time> {
    let mut m = HashMap::new();
    for (a, b, t) in initial.edges() {
        m.insert(pair_key(a.0, b.0), t);
    }
    for e in log {
        if let EventKind::Follow { follower, followee } = e.kind {
            m.entry(pair_key(follower.0, followee.0)).or_insert(e.t);
        }
    }
    m
}

#[inline]
pub(crate) fn user_pair(a: UserId, b: UserId) -> u64 {
    pair_key(a.0, b.0)
}
