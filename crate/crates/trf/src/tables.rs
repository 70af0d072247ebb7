//! CSV tables: graphs, ground truth, detections, estimates, fits, odds
//! ratios, SCC curves and regression feature tables.

use std::io::{Read, Write};

use trf_core::detect::{EstimateRow, RetweetGroup, Stratum, TrfDetection};
use trf_core::infer::OddsRatio;
use trf_core::sim::GroundTruthTrf;
use trf_core::topology::CurvePoint;
use trf_core::{TemporalDigraph, UserId};

use crate::jsonl::fmt_f64;
use crate::FormatError;

pub const GRAPH_HEADER: [&str; 3] = ["follower", "followee", "created_at"];
pub const TRUTH_HEADER: [&str; 8] = ["speaker", "repeater", "listener", "t_s", "t_r", "t_l", "n_received", "reciprocal"];
pub const DETECTION_HEADER: [&str; 8] = ["speaker", "repeater", "listener", "t_s", "t_r", "t_l", "latency", "reciprocal"];
pub const ESTIMATE_HEADER: [&str; 5] = ["stratum", "n", "groups", "followers", "probability"];
pub const FIT_HEADER: [&str; 6] = ["class", "delta", "p", "pq", "q", "nll"];
pub const ODDS_HEADER: [&str; 5] = ["factor", "odds_ratio", "ci_low", "ci_high", "p_value"];
pub const CURVE_HEADER: [&str; 5] = ["size", "mean_fraction", "ci_low", "ci_high", "repetitions"];
/// Per-group regression features; the label is whether the group ended in
/// a follow.
pub const FEATURE_HEADER: [&str; 8] = [
    "reciprocal",
    "n",
    "distinct_tweets",
    "distinct_repeaters",
    "speaker_followers",
    "speaker_followees",
    "speaker_tweets",
    "label",
];

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>, FormatError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(FormatError::MalformedRecord {
            line: 1,
            reason: format!("expected header `{}`", header.join(",")),
        });
    }
    Ok(r)
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, name: &str) -> Result<T, FormatError> {
    rec.get(col)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FormatError::MalformedRecord { line: line_of(rec), reason: format!("bad `{name}` value") })
}

fn parse_bool(rec: &csv::StringRecord, col: usize, name: &str) -> Result<bool, FormatError> {
    match rec.get(col) {
        Some("1") | Some("true") => Ok(true),
        Some("0") | Some("false") => Ok(false),
        _ => Err(FormatError::MalformedRecord { line: line_of(rec), reason: format!("bad `{name}` value") }),
    }
}

pub fn read_graph<R: Read>(input: R) -> Result<TemporalDigraph, FormatError> {
    let mut r = reader(input, &GRAPH_HEADER)?;
    let mut g = TemporalDigraph::new();
    for rec in r.records() {
        let rec = rec?;
        let a: u32 = parse(&rec, 0, "follower")?;
        let b: u32 = parse(&rec, 1, "followee")?;
        let t: f64 = parse(&rec, 2, "created_at")?;
        g.add_follow(UserId(a), UserId(b), t)
            .map_err(|e| FormatError::MalformedRecord { line: line_of(&rec), reason: e.to_string() })?;
    }
    Ok(g)
}

pub fn write_graph<W: Write>(g: &TemporalDigraph, out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &GRAPH_HEADER)?;
    for (a, b, t) in g.edges() {
        w.write_record([a.to_string(), b.to_string(), fmt_f64(t)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ground_truth<W: Write>(truth: &[GroundTruthTrf], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &TRUTH_HEADER)?;
    for x in truth {
        w.write_record([
            x.speaker.to_string(),
            x.repeater.to_string(),
            x.listener.to_string(),
            fmt_f64(x.t_s),
            fmt_f64(x.t_r),
            fmt_f64(x.t_l),
            x.n_received.to_string(),
            bit(x.reciprocal).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_detections<W: Write>(detections: &[TrfDetection], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &DETECTION_HEADER)?;
    for x in detections {
        w.write_record([
            x.speaker.to_string(),
            x.repeater.to_string(),
            x.listener.to_string(),
            fmt_f64(x.t_s),
            fmt_f64(x.t_r),
            fmt_f64(x.t_l),
            fmt_f64(x.latency),
            bit(x.reciprocal).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_estimates<W: Write>(rows: &[EstimateRow], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &ESTIMATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.stratum.name().to_string(),
            r.n.to_string(),
            r.groups.to_string(),
            r.followers.to_string(),
            fmt_f64(r.probability),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(stratum, n, groups, followers)` rows of an estimate table.
pub fn read_estimates<R: Read>(input: R) -> Result<Vec<(Stratum, u32, u64, u64)>, FormatError> {
    let mut r = reader(input, &ESTIMATE_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let stratum: Stratum = rec
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e: &str| FormatError::MalformedRecord { line: line_of(&rec), reason: e.to_string() })?;
        out.push((stratum, parse(&rec, 1, "n")?, parse(&rec, 2, "groups")?, parse(&rec, 3, "followers")?));
    }
    Ok(out)
}

/// One fitted class: `(class, delta, p, q, nll)`.
pub fn write_fit<W: Write>(rows: &[(&str, f64, f64, f64, f64)], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &FIT_HEADER)?;
    for &(class, delta, p, q, nll) in rows {
        w.write_record([class.to_string(), fmt_f64(delta), fmt_f64(p), fmt_f64(p * q), fmt_f64(q), fmt_f64(nll)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_odds<W: Write>(names: &[String], odds: &[OddsRatio], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &ODDS_HEADER)?;
    for o in odds {
        w.write_record([
            names[o.factor - 1].clone(),
            fmt_f64(o.odds_ratio),
            fmt_f64(o.ci_low),
            fmt_f64(o.ci_high),
            fmt_f64(o.p_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(points: &[CurvePoint], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &CURVE_HEADER)?;
    for p in points {
        w.write_record([
            p.size.to_string(),
            fmt_f64(p.mean_fraction),
            fmt_f64(p.ci_low),
            fmt_f64(p.ci_high),
            p.repetitions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Feature row of a group with collected detail.
pub fn group_features(g: &RetweetGroup) -> [f64; 7] {
    let d = g.detail.unwrap_or_default();
    [
        g.reciprocal as u8 as f64,
        g.n as f64,
        d.distinct_tweets as f64,
        d.distinct_repeaters as f64,
        d.speaker_followers as f64,
        d.speaker_followees as f64,
        d.speaker_tweets as f64,
    ]
}

pub fn write_features<W: Write>(groups: &[RetweetGroup], out: W) -> Result<(), FormatError> {
    let mut w = writer(out, &FEATURE_HEADER)?;
    for g in groups {
        let mut rec: Vec<String> = group_features(g).iter().map(|&v| fmt_f64(v)).collect();
        rec.push(bit(g.i_delta).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A regression table: any numeric columns followed by a final `label`
/// column (0/1 or true/false).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

pub fn read_features<R: Read>(input: R) -> Result<FeatureTable, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 2 || header.get(cols - 1) != Some("label") {
        return Err(FormatError::MalformedRecord { line: 1, reason: "last column must be `label`".into() });
    }
    let names: Vec<String> = header.iter().take(cols - 1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut row = Vec::with_capacity(cols - 1);
        for (c, name) in names.iter().enumerate() {
            let v: f64 = parse(&rec, c, name)?;
            if !v.is_finite() {
                return Err(FormatError::MalformedRecord { line: line_of(&rec), reason: format!("non-finite `{name}`") });
            }
            row.push(v);
        }
        rows.push(row);
        labels.push(parse_bool(&rec, cols - 1, "label")?);
    }
    Ok(FeatureTable { names, rows, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let mut g = TemporalDigraph::new();
        g.add_follow(UserId(2), UserId(1), 0.0).unwrap();
        g.add_follow(UserId(1), UserId(3), 12.5).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "follower,followee,created_at\n1,3,12.5\n2,1,0.0\n");
        assert_eq!(read_graph(&buf[..]).unwrap().edges(), g.edges());
    }

    #[test]
    fn graph_errors_carry_lines() {
        let err = read_graph("follower,followee,created_at\n1,2,0\n3,3,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::MalformedRecord { line: 3, .. }), "{err:?}");
        assert!(read_graph("a,b,c\n".as_bytes()).is_err());
    }

    #[test]
    fn features_need_label() {
        let t = read_features("x,y,label\n1,2,1\n0,1.5,false\n".as_bytes()).unwrap();
        assert_eq!(t.names, ["x", "y"]);
        assert_eq!(t.labels, [true, false]);
        assert!(read_features("x,y\n1,2\n".as_bytes()).is_err());
    }
}
