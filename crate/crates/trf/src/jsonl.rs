//! JSON Lines event logs and snapshot streams.
//!
//! Field order is fixed (`t`, `kind`, then the kind's fields) and numbers
//! use the shortest decimal that round-trips, so equal logs serialize to
//! equal bytes.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde_json::{Map, Value};
use trf_core::event::first_unsorted;
use trf_core::{Event, EventKind, EventLog, MsgId, Snapshot, UserId};

use crate::FormatError;

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value, String> {
    obj.get(name).ok_or_else(|| format!("missing field `{name}`"))
}

fn num(obj: &Map<String, Value>, name: &str) -> Result<f64, String> {
    field(obj, name)?
        .as_f64()
        .ok_or_else(|| format!("field `{name}` must be a number"))
}

fn uint(obj: &Map<String, Value>, name: &str) -> Result<u64, String> {
    field(obj, name)?
        .as_u64()
        .ok_or_else(|| format!("field `{name}` must be a non-negative integer"))
}

fn user(obj: &Map<String, Value>, name: &str) -> Result<UserId, String> {
    let v = uint(obj, name)?;
    u32::try_from(v)
        .map(UserId)
        .map_err(|_| format!("field `{name}` exceeds the user id range"))
}

fn only_fields(obj: &Map<String, Value>, allowed: &[&str]) -> Result<(), String> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(format!("unexpected field `{k}`")),
        None => Ok(()),
    }
}

/// Parses one event record; the error is a human-readable reason.
pub fn parse_event_line(text: &str) -> Result<Event, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record must be a JSON object")?;
    let t = num(obj, "t")?;
    let kind = field(obj, "kind")?.as_str().ok_or("field `kind` must be a string")?;
    let event = match kind {
        "tweet" => {
            only_fields(obj, &["t", "kind", "author", "msg"])?;
            Event::tweet(t, user(obj, "author")?, MsgId(uint(obj, "msg")?))
        }
        "retweet" => {
            only_fields(obj, &["t", "kind", "repeater", "msg", "origin_author", "origin_t"])?;
            Event::retweet(
                t,
                user(obj, "repeater")?,
                MsgId(uint(obj, "msg")?),
                user(obj, "origin_author")?,
                num(obj, "origin_t")?,
            )
        }
        "follow" => {
            only_fields(obj, &["t", "kind", "follower", "followee"])?;
            Event::follow(t, user(obj, "follower")?, user(obj, "followee")?)
        }
        other => return Err(format!("unknown kind `{other}`")),
    };
    event.validate().map_err(str::to_string)?;
    Ok(event)
}

/// One event as a JSON line (without the newline).
pub fn serialize_event(e: &Event) -> String {
    let mut s = String::with_capacity(96);
    let _ = write!(s, "{{\"t\":{}", fmt_f64(e.t));
    let _ = match e.kind {
        EventKind::Tweet { author, msg } => write!(s, ",\"kind\":\"tweet\",\"author\":{author},\"msg\":{msg}"),
        EventKind::Retweet { repeater, msg, origin_author, origin_t } => write!(
            s,
            ",\"kind\":\"retweet\",\"repeater\":{repeater},\"msg\":{msg},\"origin_author\":{origin_author},\"origin_t\":{}",
            fmt_f64(origin_t)
        ),
        EventKind::Follow { follower, followee } => {
            write!(s, ",\"kind\":\"follow\",\"follower\":{follower},\"followee\":{followee}")
        }
    };
    s.push('}');
    s
}

/// Writes a log, one record per line. Rejects events out of log order.
pub fn write_log<W: Write>(events: &[Event], mut out: W) -> Result<(), FormatError> {
    if let Some(index) = first_unsorted(events) {
        return Err(FormatError::UnsortedInput { index });
    }
    for e in events {
        writeln!(out, "{}", serialize_event(e))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a log; blank lines are skipped. Lines are numbered from 1 in
/// errors.
pub fn read_log<R: BufRead>(input: R) -> Result<EventLog, FormatError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = parse_event_line(&line).map_err(|reason| FormatError::MalformedRecord { line: i + 1, reason })?;
        events.push(e);
    }
    EventLog::from_sorted(events).map_err(|e| match e {
        trf_core::event::LogError::Unsorted { index } => FormatError::UnsortedInput { index },
        other => FormatError::MalformedRecord { line: 0, reason: other.to_string() },
    })
}

pub fn serialize_snapshot(s: &Snapshot) -> String {
    let mut out = format!("{{\"user\":{},\"t\":{},\"followers\":[", s.user, fmt_f64(s.t));
    for (i, f) in s.followers.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{f}");
    }
    out.push_str("]}");
    out
}

pub fn parse_snapshot_line(text: &str) -> Result<Snapshot, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record must be a JSON object")?;
    only_fields(obj, &["user", "t", "followers"])?;
    let user = user(obj, "user")?;
    let t = num(obj, "t")?;
    if !t.is_finite() || t < 0.0 {
        return Err("timestamp must be finite and non-negative".into());
    }
    let list = field(obj, "followers")?.as_array().ok_or("field `followers` must be an array")?;
    let mut followers = Vec::with_capacity(list.len());
    for v in list {
        let id = v.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or("follower ids must be user ids")?;
        followers.push(UserId(id));
    }
    if followers.windows(2).any(|w| w[0] >= w[1]) {
        return Err("followers must be strictly ascending".into());
    }
    if followers.contains(&user) {
        return Err("a user cannot follow itself".into());
    }
    Ok(Snapshot { user, t, followers })
}

pub fn write_snapshots<W: Write>(snapshots: &[Snapshot], mut out: W) -> Result<(), FormatError> {
    for s in snapshots {
        writeln!(out, "{}", serialize_snapshot(s))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<Snapshot>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_snapshot_line(&line).map_err(|reason| FormatError::MalformedRecord { line: i + 1, reason })?);
    }
    Ok(out)
}
