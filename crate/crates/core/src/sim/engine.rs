use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use hashbrown::{HashMap, HashSet};
use rand::Rng as _;
use rand_distr::{Distribution, Exp, LogNormal};

use super::config::{LatencyDist, SimConfig, SimError};
use crate::event::{Event, EventLog, MsgId};
use crate::graph::{pair_key, Ix, TemporalDigraph, Time, UserId};
use crate::math;
use crate::rng::{substream, Rng};

/// A retweet-caused follow as generated by the simulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruthTrf {
    pub speaker: UserId,
    pub repeater: UserId,
    pub listener: UserId,
    pub t_s: Time,
    pub t_r: Time,
    pub t_l: Time,
    /// Retweets the listener had received in the triggering group.
    pub n_received: u32,
    /// Speaker followed listener at `t_r`.
    pub reciprocal: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimStats {
    pub tweets: u64,
    pub retweets: u64,
    /// Retweet deliveries to any follower of the repeater.
    pub deliveries: u64,
    /// Deliveries to listeners not following the speaker.
    pub eligible_deliveries: u64,
    /// Groups opened, indexed `[non-reciprocal, reciprocal]`.
    pub groups_opened: [u64; 2],
    pub trf_follows: u64,
    pub exo_follows: u64,
    /// Exogenous draws dropped because the pair had a retweet delivery in
    /// the preceding window.
    pub exo_suppressed: u64,
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub log: EventLog,
    /// In the order their follows appear in the log.
    pub truth: Vec<GroundTruthTrf>,
    pub stats: SimStats,
    pub final_graph: TemporalDigraph,
}

#[derive(Clone, Copy)]
struct PendingRetweet {
    t: Time,
    repeater: UserId,
    repeater_ix: Ix,
    msg: u64,
    seq: u64,
}

impl PartialEq for PendingRetweet {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for PendingRetweet {}
impl PartialOrd for PendingRetweet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PendingRetweet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.repeater.cmp(&other.repeater))
            .then(self.seq.cmp(&other.seq))
    }
}

#[derive(Clone, Copy)]
struct OpenGroup {
    t0: Time,
    n: u32,
    observed: bool,
    reciprocal: bool,
}

enum Latency {
    LogNormal(LogNormal<f64>),
    Exp(Exp<f64>),
    Fixed(f64),
}

impl Latency {
    fn new(d: LatencyDist) -> Self {
        match d {
            LatencyDist::LogNormal { median, sigma } => {
                Latency::LogNormal(LogNormal::new(math::log(median), sigma).expect("validated"))
            }
            LatencyDist::Exponential { mean } => Latency::Exp(Exp::new(1.0 / mean).expect("validated")),
            LatencyDist::Fixed(x) => Latency::Fixed(x),
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            Latency::LogNormal(d) => d.sample(rng),
            Latency::Exp(d) => d.sample(rng),
            Latency::Fixed(x) => *x,
        }
    }
}

struct Streams {
    tweets: Rng,
    retweet: Rng,
    latency: Rng,
    observe: Rng,
    follow: Rng,
    exo: Rng,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    graph: TemporalDigraph,
    rng: Streams,
    latency: Latency,
    pending: BinaryHeap<Reverse<PendingRetweet>>,
    seq: u64,
    // msg id -> (author, tweet time)
    messages: Vec<(Ix, Time)>,
    // multi-hop: (msg, user) pairs that already made their retweet decision
    decided: HashSet<(u64, Ix)>,
    groups: HashMap<u64, OpenGroup>,
    // (listener, speaker) -> last eligible delivery time; kept only when
    // exogenous follows are enabled
    last_delivery: HashMap<u64, Time>,
    events: Vec<Event>,
    truth: Vec<GroundTruthTrf>,
    stats: SimStats,
    buf: Vec<Ix>,
}

/// Runs one seeded simulation. Identical configurations produce identical
/// outputs.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutput, SimError> {
    cfg.validate()?;
    let seed = cfg.seed;
    let mut sim = Sim {
        cfg,
        graph: cfg.initial_graph.clone(),
        rng: Streams {
            tweets: substream(seed, "sim/tweets"),
            retweet: substream(seed, "sim/retweet"),
            latency: substream(seed, "sim/latency"),
            observe: substream(seed, "sim/observe"),
            follow: substream(seed, "sim/follow"),
            exo: substream(seed, "sim/exo"),
        },
        latency: Latency::new(cfg.retweet_latency_dist),
        pending: BinaryHeap::new(),
        seq: 0,
        messages: Vec::new(),
        decided: HashSet::new(),
        groups: HashMap::new(),
        last_delivery: HashMap::new(),
        events: Vec::new(),
        truth: Vec::new(),
        stats: SimStats::default(),
        buf: Vec::new(),
    };
    sim.run();
    let Sim { graph, events, mut truth, stats, .. } = sim;
    // same (stable) order as the follows in the log
    truth.sort_by(|a, b| a.t_l.total_cmp(&b.t_l).then(a.listener.cmp(&b.listener)));
    Ok(SimOutput {
        log: EventLog::from_unsorted(events),
        truth,
        stats,
        final_graph: graph,
    })
}

impl Sim<'_> {
    fn run(&mut self) {
        let n_users = self.graph.node_count();
        let duration = self.cfg.duration;
        let tweet_clock = exp_clock(self.cfg.tweet_rate * n_users as f64);
        let exo_clock = exp_clock(self.cfg.exo_follow_rate * n_users as f64);

        let mut next_tweet = next_arrival(0.0, &tweet_clock, &mut self.rng.tweets);
        let mut next_exo = next_arrival(0.0, &exo_clock, &mut self.rng.exo);
        let mut next_sweep = self.cfg.delta;

        loop {
            let next_rt = self.pending.peek().map_or(f64::INFINITY, |p| p.0.t);
            let t = next_tweet.min(next_rt).min(next_exo);
            if !(t <= duration) {
                break;
            }
            if t >= next_sweep {
                self.sweep(t);
                next_sweep = t + self.cfg.delta;
            }
            if next_tweet <= next_rt && next_tweet <= next_exo {
                let author = self.rng.tweets.random_range(0..n_users) as Ix;
                self.tweet(t, author);
                next_tweet = next_arrival(t, &tweet_clock, &mut self.rng.tweets);
            } else if next_rt <= next_exo {
                let Reverse(p) = self.pending.pop().expect("peeked");
                self.retweet(p);
            } else {
                let user = self.rng.exo.random_range(0..n_users) as Ix;
                self.exogenous(t, user);
                next_exo = next_arrival(t, &exo_clock, &mut self.rng.exo);
            }
        }
    }

    /// Drops expired groups and stale delivery stamps.
    fn sweep(&mut self, now: Time) {
        let delta = self.cfg.delta;
        self.groups.retain(|_, g| g.t0 + delta > now);
        self.last_delivery.retain(|_, &mut t| now - t <= delta);
    }

    fn tweet(&mut self, t: Time, author: Ix) {
        let msg = self.messages.len() as u64;
        self.messages.push((author, t));
        self.stats.tweets += 1;
        self.events.push(Event::tweet(t, self.graph.id(author), MsgId(msg)));
        self.buf.clear();
        self.buf.extend(self.graph.followers_raw(author).iter().map(|&(x, _)| x));
        let receivers = core::mem::take(&mut self.buf);
        for &r in &receivers {
            if self.cfg.multi_hop {
                self.decided.insert((msg, r));
            }
            self.consider_retweet(t, r, msg);
        }
        self.buf = receivers;
    }

    fn consider_retweet(&mut self, now: Time, user: Ix, msg: u64) {
        if self.cfg.retweet_prob > 0.0 && self.rng.retweet.random_bool(self.cfg.retweet_prob) {
            let t_s = self.messages[msg as usize].1;
            let t = now + self.latency.sample(&mut self.rng.latency);
            if t <= self.cfg.duration && t > t_s {
                self.seq += 1;
                self.pending.push(Reverse(PendingRetweet {
                    t,
                    repeater: self.graph.id(user),
                    repeater_ix: user,
                    msg,
                    seq: self.seq,
                }));
            }
        }
    }

    fn retweet(&mut self, p: PendingRetweet) {
        let t = p.t;
        let r = p.repeater_ix;
        let (s, t_s) = self.messages[p.msg as usize];
        let speaker = self.graph.id(s);
        self.stats.retweets += 1;
        self.events.push(Event::retweet(t, p.repeater, MsgId(p.msg), speaker, t_s));

        let mut listeners = core::mem::take(&mut self.buf);
        listeners.clear();
        listeners.extend(self.graph.followers_raw(r).iter().map(|&(x, _)| x));
        let delta = self.cfg.delta;
        let track_last = self.cfg.exo_follow_rate > 0.0;
        for &l in &listeners {
            if l == s {
                continue;
            }
            self.stats.deliveries += 1;
            if self.cfg.multi_hop && self.decided.insert((p.msg, l)) {
                self.consider_retweet(t, l, p.msg);
            }
            if self.graph.has_edge_ix(l, s) {
                continue;
            }
            self.stats.eligible_deliveries += 1;
            let key = pair_key(l, s);
            if track_last {
                self.last_delivery.insert(key, t);
            }
            let group = match self.groups.get_mut(&key) {
                Some(g) if t < g.t0 + delta => {
                    g.n += 1;
                    *g
                }
                _ => {
                    let reciprocal = self.graph.has_edge_ix(s, l);
                    let params = self.cfg.params(reciprocal);
                    let observed = self.rng.observe.random_bool(params.p);
                    self.stats.groups_opened[reciprocal as usize] += 1;
                    let g = OpenGroup { t0: t, n: 1, observed, reciprocal };
                    self.groups.insert(key, g);
                    g
                }
            };
            if group.observed && self.rng.follow.random_bool(self.cfg.params(group.reciprocal).q) {
                self.groups.remove(&key);
                // reported class is the state at the triggering delivery,
                // which is what a log-based detector sees
                let reciprocal_now = self.graph.has_edge_ix(s, l);
                self.graph.insert_ix(l, s, t);
                let listener = self.graph.id(l);
                self.events.push(Event::follow(t, listener, speaker));
                self.truth.push(GroundTruthTrf {
                    speaker,
                    repeater: p.repeater,
                    listener,
                    t_s,
                    t_r: t,
                    t_l: t,
                    n_received: group.n,
                    reciprocal: reciprocal_now,
                });
                self.stats.trf_follows += 1;
            }
        }
        self.buf = listeners;
    }

    fn exogenous(&mut self, t: Time, l: Ix) {
        // candidates: followees of followees that `l` does not follow yet
        let mut cands = Vec::new();
        for &(y, _) in self.graph.followees_raw(l) {
            for &(x, _) in self.graph.followees_raw(y) {
                if x != l && !self.graph.has_edge_ix(l, x) {
                    cands.push(x);
                }
            }
        }
        if cands.is_empty() {
            return;
        }
        cands.sort_unstable();
        cands.dedup();
        let s = cands[self.rng.exo.random_range(0..cands.len())];
        let key = pair_key(l, s);
        if let Some(&last) = self.last_delivery.get(&key) {
            if t - last <= self.cfg.delta {
                self.stats.exo_suppressed += 1;
                return;
            }
        }
        self.groups.remove(&key);
        self.graph.insert_ix(l, s, t);
        self.events.push(Event::follow(t, self.graph.id(l), self.graph.id(s)));
        self.stats.exo_follows += 1;
    }
}

fn exp_clock(rate: f64) -> Option<Exp<f64>> {
    if rate > 0.0 {
        Exp::new(rate).ok()
    } else {
        None
    }
}

fn next_arrival(now: Time, clock: &Option<Exp<f64>>, rng: &mut Rng) -> Time {
    match clock {
        Some(d) => now + d.sample(rng),
        None => f64::INFINITY,
    }
}
