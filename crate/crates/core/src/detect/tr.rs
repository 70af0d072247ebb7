use alloc::vec::Vec;

use super::replay::{creation_times, eligible_listeners, replay, user_pair};
use super::DetectError;
use crate::event::{EventKind, EventLog, MsgId};
use crate::graph::{TemporalDigraph, Time, UserId};

/// One retweet delivered to an eligible listener.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Delivery {
    pub speaker: UserId,
    pub repeater: UserId,
    pub listener: UserId,
    pub msg: MsgId,
    pub t_s: Time,
    pub t_r: Time,
    /// Speaker followed listener at `t_r`.
    pub reciprocal: bool,
}

/// A delivery plus whether the listener followed the speaker within the
/// window `[t_r, t_r + delta]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrEvent {
    pub speaker: UserId,
    pub repeater: UserId,
    pub listener: UserId,
    pub msg: MsgId,
    pub t_s: Time,
    pub t_r: Time,
    pub reciprocal: bool,
    pub i_delta: bool,
}

impl TrEvent {
    pub fn delivery(&self) -> Delivery {
        Delivery {
            speaker: self.speaker,
            repeater: self.repeater,
            listener: self.listener,
            msg: self.msg,
            t_s: self.t_s,
            t_r: self.t_r,
            reciprocal: self.reciprocal,
        }
    }
}

/// Every retweet delivery to a listener that follows the repeater but not
/// the speaker, in log order (listeners ascending within one retweet).
pub fn qualifying_deliveries(log: &EventLog, initial_graph: &TemporalDigraph) -> Result<Vec<Delivery>, DetectError> {
    let mut out = Vec::new();
    let mut buf = Vec::new();
    replay(log, initial_graph, |_, e, g| {
        if let EventKind::Retweet { repeater, msg, origin_author, origin_t } = e.kind {
            eligible_listeners(g, repeater, origin_author, e.t, &mut buf);
            buf.sort_unstable_by_key(|x| x.0);
            out.extend(buf.iter().map(|&(listener, reciprocal)| Delivery {
                speaker: origin_author,
                repeater,
                listener,
                msg,
                t_s: origin_t,
                t_r: e.t,
                reciprocal,
            }));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn extract_tr_events(log: &EventLog, initial_graph: &TemporalDigraph, delta: Time) -> Result<Vec<TrEvent>, DetectError> {
    let deliveries = qualifying_deliveries(log, initial_graph)?;
    let created = creation_times(log, initial_graph);
    Ok(deliveries
        .into_iter()
        .map(|d| {
            let i_delta = matches!(created.get(&user_pair(d.listener, d.speaker)),
                Some(&t) if t >= d.t_r && t <= d.t_r + delta);
            TrEvent {
                speaker: d.speaker,
                repeater: d.repeater,
                listener: d.listener,
                msg: d.msg,
                t_s: d.t_s,
                t_r: d.t_r,
                reciprocal: d.reciprocal,
                i_delta,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Event;
    use alloc::vec;

    const L: UserId = UserId(3);
    const R: UserId = UserId(2);
    const S: UserId = UserId(1);

    fn base() -> TemporalDigraph {
        let mut g = TemporalDigraph::new();
        g.add_follow(L, R, 0.0).unwrap();
        g.add_follow(R, S, 0.0).unwrap();
        g
    }

    #[test]
    fn single_delivery_without_follow() {
        let log = EventLog::from_unsorted(vec![
            Event::tweet(0.0, S, MsgId(1)),
            Event::retweet(10.0, R, MsgId(1), S, 0.0),
        ]);
        let tr = extract_tr_events(&log, &base(), 3600.0).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!((tr[0].speaker, tr[0].repeater, tr[0].listener, tr[0].t_r, tr[0].i_delta), (S, R, L, 10.0, false));
    }

    #[test]
    fn follow_within_window_sets_indicator() {
        let log = EventLog::from_unsorted(vec![
            Event::tweet(0.0, S, MsgId(1)),
            Event::retweet(10.0, R, MsgId(1), S, 0.0),
            Event::follow(100.0, L, S),
        ]);
        let tr = extract_tr_events(&log, &base(), 3600.0).unwrap();
        assert!(tr[0].i_delta);
        let late = EventLog::from_unsorted(vec![
            Event::tweet(0.0, S, MsgId(1)),
            Event::retweet(10.0, R, MsgId(1), S, 0.0),
            Event::follow(3611.0, L, S),
        ]);
        assert!(!extract_tr_events(&late, &base(), 3600.0).unwrap()[0].i_delta);
    }

    #[test]
    fn listener_already_following_is_excluded() {
        let mut g = base();
        g.add_follow(L, S, 0.0).unwrap();
        let log = EventLog::from_unsorted(vec![
            Event::tweet(0.0, S, MsgId(1)),
            Event::retweet(10.0, R, MsgId(1), S, 0.0),
        ]);
        assert!(extract_tr_events(&log, &g, 3600.0).unwrap().is_empty());
    }

    #[test]
    fn duplicate_follow_is_inconsistent() {
        let log = EventLog::from_unsorted(vec![Event::follow(5.0, L, R)]);
        assert_eq!(extract_tr_events(&log, &base(), 10.0), Err(DetectError::InconsistentLog { index: 0 }));
    }

    #[test]
    fn reciprocity_is_recorded() {
        let mut g = base();
        g.add_follow(S, L, 0.0).unwrap();
        let log = EventLog::from_unsorted(vec![
            Event::tweet(0.0, S, MsgId(1)),
            Event::retweet(10.0, R, MsgId(1), S, 0.0),
        ]);
        assert!(qualifying_deliveries(&log, &g).unwrap()[0].reciprocal);
    }
}
