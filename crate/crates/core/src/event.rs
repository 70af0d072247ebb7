//! Timestamped tweet, retweet and follow events.
//!
//! Logs are ordered by time; simultaneous events are ordered by kind
//! (tweet, then retweet, then follow) and then by the acting user. Anything
//! still tied keeps its insertion order.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use hashbrown::HashMap;
use thiserror::Error;

use crate::graph::{Time, UserId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MsgId(pub u64);

impl fmt::Display for MsgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    Tweet {
        author: UserId,
        msg: MsgId,
    },
    /// Retweets carry the original author and tweet time so analyzers need
    /// not join against tweet records.
    Retweet {
        repeater: UserId,
        msg: MsgId,
        origin_author: UserId,
        origin_t: Time,
    },
    Follow {
        follower: UserId,
        followee: UserId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: Time,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogError {
    #[error("event {index} is out of order")]
    Unsorted { index: usize },
    #[error("event {index}: {reason}")]
    Invalid { index: usize, reason: &'static str },
    #[error("event {index}: message {msg} was already tweeted")]
    DuplicateMessage { index: usize, msg: MsgId },
    #[error("event {index}: retweet of unknown message {msg}")]
    UnknownMessage { index: usize, msg: MsgId },
}

impl Event {
    pub fn tweet(t: Time, author: UserId, msg: MsgId) -> Self {
        Event { t, kind: EventKind::Tweet { author, msg } }
    }

    pub fn retweet(t: Time, repeater: UserId, msg: MsgId, origin_author: UserId, origin_t: Time) -> Self {
        Event {
            t,
            kind: EventKind::Retweet { repeater, msg, origin_author, origin_t },
        }
    }

    pub fn follow(t: Time, follower: UserId, followee: UserId) -> Self {
        Event { t, kind: EventKind::Follow { follower, followee } }
    }

    /// Tie-break rank among simultaneous events.
    pub fn rank(&self) -> u8 {
        match self.kind {
            EventKind::Tweet { .. } => 0,
            EventKind::Retweet { .. } => 1,
            EventKind::Follow { .. } => 2,
        }
    }

    /// The acting user: author, repeater or follower.
    pub fn actor(&self) -> UserId {
        match self.kind {
            EventKind::Tweet { author, .. } => author,
            EventKind::Retweet { repeater, .. } => repeater,
            EventKind::Follow { follower, .. } => follower,
        }
    }

    /// Compares by the log's total order (time, kind rank, actor).
    pub fn order(&self, other: &Event) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.rank().cmp(&other.rank()))
            .then(self.actor().cmp(&other.actor()))
    }

    /// Per-record invariants: finite non-negative time, retweets strictly
    /// after their tweet, no self-follow.
    pub fn validate(&self) -> Result<(), &'static str> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err("timestamp must be finite and non-negative");
        }
        match self.kind {
            EventKind::Retweet { origin_t, repeater, origin_author, .. } => {
                if !origin_t.is_finite() || origin_t < 0.0 {
                    return Err("origin_t must be finite and non-negative");
                }
                if origin_t >= self.t {
                    return Err("retweet must strictly follow its tweet");
                }
                if repeater == origin_author {
                    return Err("author cannot retweet their own message");
                }
            }
            EventKind::Follow { follower, followee } if follower == followee => {
                return Err("self-follow");
            }
            _ => {}
        }
        Ok(())
    }
}

/// An ordered event sequence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps events that must already be in log order.
    pub fn from_sorted(events: Vec<Event>) -> Result<Self, LogError> {
        if let Some(index) = first_unsorted(&events) {
            return Err(LogError::Unsorted { index });
        }
        Ok(EventLog { events })
    }

    /// Stable-sorts arbitrary events into log order.
    pub fn from_unsorted(mut events: Vec<Event>) -> Self {
        events.sort_by(Event::order);
        EventLog { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Event> {
        self.events.iter()
    }

    /// Timestamp of the last event.
    pub fn end_time(&self) -> Option<Time> {
        self.events.last().map(|e| e.t)
    }

    /// Checks every record invariant plus message integrity: tweet ids are
    /// unique and every retweet references an earlier tweet by the stated
    /// author at the stated time.
    pub fn validate(&self) -> Result<(), LogError> {
        let mut tweets: HashMap<MsgId, (UserId, Time)> = HashMap::new();
        for (index, e) in self.events.iter().enumerate() {
            e.validate().map_err(|reason| LogError::Invalid { index, reason })?;
            match e.kind {
                EventKind::Tweet { author, msg } => {
                    if tweets.insert(msg, (author, e.t)).is_some() {
                        return Err(LogError::DuplicateMessage { index, msg });
                    }
                }
                EventKind::Retweet { msg, origin_author, origin_t, .. } => match tweets.get(&msg) {
                    None => return Err(LogError::UnknownMessage { index, msg }),
                    Some(&(a, t)) if a != origin_author || t != origin_t => {
                        return Err(LogError::Invalid { index, reason: "retweet origin disagrees with tweet" })
                    }
                    _ => {}
                },
                EventKind::Follow { .. } => {}
            }
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a Event;
    type IntoIter = core::slice::Iter<'a, Event>;
    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

/// Index of the first event that sorts before its predecessor.
pub fn first_unsorted(events: &[Event]) -> Option<usize> {
    events
        .windows(2)
        .position(|w| w[0].order(&w[1]) == Ordering::Greater)
        .map(|i| i + 1)
}

/// Merges two sorted logs; on ties, events from `a` come first.
pub fn merge_logs(a: &EventLog, b: &EventLog) -> EventLog {
    let (x, y) = (&a.events, &b.events);
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        if x[i].order(&y[j]) != Ordering::Greater {
            out.push(x[i]);
            i += 1;
        } else {
            out.push(y[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    EventLog { events: out }
}

/// A polled follower list.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub user: UserId,
    pub t: Time,
    /// Ascending, never contains `user`.
    pub followers: Vec<UserId>,
}
