//! Flat `key = value` experiment configuration.
//!
//! Keys are the simulator's configuration fields. `#` starts a comment.
//! Numbers may be written as a quotient (`4/86400`) for readability.
//!
//! ```text
//! initial_graph = synth:random:1000:0.01     # or a graph CSV path
//! retweet_latency_dist = lognormal:600:1.2   # exponential:<mean> | fixed:<secs>
//! params_reciprocal = p=24.0e-4 pq=10.2e-4   # or p=<p> q=<q>
//! multi_hop = false
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use trf_core::sim::{synth_graph, GraphFamily, LatencyDist, SimConfig, TrfModelParams};
use trf_core::TemporalDigraph;

use crate::tables::read_graph;
use crate::FormatError;

/// The bundled configuration: the source of every default.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.conf");

pub const KEYS: [&str; 13] = [
    "initial_graph",
    "duration",
    "delta",
    "tweet_rate",
    "retweet_prob",
    "retweet_latency_dist",
    "params_reciprocal",
    "params_nonreciprocal",
    "exo_follow_rate",
    "seed",
    "poll_interval",
    "multi_hop",
    "monitored",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Entries {
    values: BTreeMap<String, String>,
}

fn bad(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::MalformedRecord { line, reason: reason.into() }
}

impl Entries {
    /// Parses config text. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad(i + 1, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(bad(i + 1, format!("unknown key `{k}`")));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(bad(i + 1, format!("key `{k}` given twice")));
            }
        }
        Ok(Entries { values })
    }

    /// Bundled defaults overlaid with `text`.
    pub fn with_defaults(text: &str) -> Result<Self, FormatError> {
        let mut base = Entries::parse(DEFAULT_CONFIG)?;
        let over = Entries::parse(text)?;
        base.values.extend(over.values);
        Ok(base)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn require(&self, key: &str) -> Result<&str, FormatError> {
        self.get(key).ok_or_else(|| bad(0, format!("missing key `{key}`")))
    }

    fn number(&self, key: &str) -> Result<f64, FormatError> {
        parse_number(self.require(key)?).ok_or_else(|| bad(0, format!("`{key}` must be a number")))
    }
}

/// A float, or a quotient `a/b` of floats.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

pub fn parse_latency(s: &str) -> Option<LatencyDist> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["lognormal", m, sd] => Some(LatencyDist::LogNormal { median: parse_number(m)?, sigma: parse_number(sd)? }),
        ["exponential", m] => Some(LatencyDist::Exponential { mean: parse_number(m)? }),
        ["fixed", x] => Some(LatencyDist::Fixed(parse_number(x)?)),
        _ => None,
    }
}

/// `p=<p> q=<q>` or `p=<p> pq=<p*q>`.
pub fn parse_params(s: &str) -> Option<TrfModelParams> {
    let mut p = None;
    let mut q = None;
    let mut pq = None;
    for tok in s.split_whitespace() {
        let (k, v) = tok.split_once('=')?;
        let v = parse_number(v)?;
        match k {
            "p" => p = Some(v),
            "q" => q = Some(v),
            "pq" => pq = Some(v),
            _ => return None,
        }
    }
    let p = p?;
    let params = match (q, pq) {
        (Some(q), None) => TrfModelParams::new(p, q).ok()?,
        (None, Some(pq)) => TrfModelParams::from_p_pq(p, pq).ok()?,
        _ => return None,
    };
    Some(params)
}

/// Where the initial graph comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Synth { family: GraphFamily, size: usize, edge_prob: f64 },
}

impl GraphSource {
    /// `synth:<family>:<size>[:<edge_prob>]` or a path, resolved against
    /// `base`.
    pub fn parse(s: &str, base: &Path) -> Result<Self, FormatError> {
        if let Some(rest) = s.strip_prefix("synth:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let err = || bad(0, format!("bad synthetic graph `{s}`"));
            let family: GraphFamily = parts.first().ok_or_else(err)?.parse().map_err(|_| err())?;
            let size: usize = parts.get(1).and_then(|x| x.parse().ok()).ok_or_else(err)?;
            let edge_prob = match parts.get(2) {
                Some(x) => parse_number(x).ok_or_else(err)?,
                None => 0.0,
            };
            if parts.len() > 3 {
                return Err(err());
            }
            return Ok(GraphSource::Synth { family, size, edge_prob });
        }
        Ok(GraphSource::File(base.join(s)))
    }

    pub fn load(&self, seed: u64) -> Result<TemporalDigraph, FormatError> {
        match self {
            GraphSource::File(path) => load_graph(path),
            GraphSource::Synth { family, size, edge_prob } => {
                synth_graph(*family, *size, *edge_prob, seed).map_err(|e| bad(0, e.to_string()))
            }
        }
    }
}

pub fn load_graph(path: &Path) -> Result<TemporalDigraph, FormatError> {
    let f = File::open(path).map_err(|e| FormatError::io_at(path, e))?;
    read_graph(BufReader::new(f)).map_err(|e| e.in_file(path))
}

/// Builds a simulator configuration; file paths resolve against `base`.
pub fn build_sim_config(entries: &Entries, base: &Path) -> Result<SimConfig, FormatError> {
    let seed: u64 = entries
        .require("seed")?
        .parse()
        .map_err(|_| bad(0, "`seed` must be an unsigned integer"))?;
    let source = GraphSource::parse(entries.require("initial_graph")?, base)?;
    let mut cfg = SimConfig::new(source.load(seed)?);
    cfg.seed = seed;
    cfg.duration = entries.number("duration")?;
    cfg.delta = entries.number("delta")?;
    cfg.tweet_rate = entries.number("tweet_rate")?;
    cfg.retweet_prob = entries.number("retweet_prob")?;
    cfg.exo_follow_rate = entries.number("exo_follow_rate")?;
    cfg.poll_interval = entries.number("poll_interval")?;
    cfg.retweet_latency_dist = parse_latency(entries.require("retweet_latency_dist")?)
        .ok_or_else(|| bad(0, "bad `retweet_latency_dist`"))?;
    cfg.params_reciprocal =
        parse_params(entries.require("params_reciprocal")?).ok_or_else(|| bad(0, "bad `params_reciprocal`"))?;
    cfg.params_nonreciprocal =
        parse_params(entries.require("params_nonreciprocal")?).ok_or_else(|| bad(0, "bad `params_nonreciprocal`"))?;
    cfg.multi_hop = match entries.require("multi_hop")? {
        "true" | "1" => true,
        "false" | "0" => false,
        _ => return Err(bad(0, "`multi_hop` must be true or false")),
    };
    cfg.validate().map_err(|e| bad(0, e.to_string()))?;
    Ok(cfg)
}
