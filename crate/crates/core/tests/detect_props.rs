mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use trf_core::detect::{
    detect_trf, estimate_p_endo, estimate_p_exo, estimate_p_trf, extract_tr_events, group_retweets, retweet_groups,
    DetectError, GroupOptions, Stratum,
};
use trf_core::sim::{run_simulation, SimConfig, TrfModelParams, DAY};
use trf_core::{Event, EventKind, EventLog, MsgId, TemporalDigraph, UserId};

#[derive(Clone, Copy, Debug)]
struct Dv {
    pos: usize,
    t: f64,
    s: u32,
    r: u32,
    l: u32,
    t_s: f64,
    recip: bool,
}

/// Replays the log naively over an edge set and lists every qualifying
/// delivery and every follow with its log position.
fn naive_scan(log: &EventLog, g0: &TemporalDigraph) -> (Vec<Dv>, Vec<(usize, f64, u32, u32)>) {
    let mut edges: BTreeSet<(u32, u32)> = g0.edges().iter().map(|e| (e.0 .0, e.1 .0)).collect();
    let mut users: BTreeSet<u32> = g0.users().iter().map(|u| u.0).collect();
    let mut dv = Vec::new();
    let mut fl = Vec::new();
    for (pos, e) in log.iter().enumerate() {
        match e.kind {
            EventKind::Retweet { repeater, origin_author, origin_t, .. } => {
                let (s, r) = (origin_author.0, repeater.0);
                for &l in &users {
                    if l != s && l != r && edges.contains(&(l, r)) && !edges.contains(&(l, s)) {
                        dv.push(Dv { pos, t: e.t, s, r, l, t_s: origin_t, recip: edges.contains(&(s, l)) });
                    }
                }
            }
            EventKind::Follow { follower, followee } => {
                edges.insert((follower.0, followee.0));
                users.insert(follower.0);
                users.insert(followee.0);
                fl.push((pos, e.t, follower.0, followee.0));
            }
            EventKind::Tweet { author, .. } => {
                users.insert(author.0);
            }
        }
    }
    (dv, fl)
}

/// (speaker, listener, t0, n, i_delta, reciprocal) by greedy windows per pair.
fn naive_groups(dv: &[Dv], fl: &[(usize, f64, u32, u32)], delta: f64) -> Vec<(u32, u32, f64, u32, bool, bool)> {
    let pairs: BTreeSet<(u32, u32)> = dv.iter().map(|d| (d.s, d.l)).collect();
    let mut out = Vec::new();
    for (s, l) in pairs {
        // (pos, kind, t, recip): kind 0 delivery, 1 follow
        let mut items: Vec<(usize, u8, f64, bool)> =
            dv.iter().filter(|d| (d.s, d.l) == (s, l)).map(|d| (d.pos, 0, d.t, d.recip)).collect();
        items.extend(fl.iter().filter(|f| (f.2, f.3) == (l, s)).map(|f| (f.0, 1, f.1, false)));
        items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut open: Option<(f64, u32, bool)> = None;
        for (_, kind, t, recip) in items {
            if kind == 1 {
                if let Some((t0, n, rc)) = open.take() {
                    out.push((s, l, t0, n, t <= t0 + delta, rc));
                }
                break;
            }
            match open {
                Some((t0, ref mut n, _)) if t < t0 + delta => *n += 1,
                _ => {
                    if let Some((t0, n, rc)) = open.take() {
                        out.push((s, l, t0, n, false, rc));
                    }
                    open = Some((t, 1, recip));
                }
            }
        }
        if let Some((t0, n, rc)) = open {
            out.push((s, l, t0, n, false, rc));
        }
    }
    out
}

/// Product-limit rows `(n, groups, follows, probability)`.
fn naive_product_limit(groups: &[(u32, u32, f64, u32, bool, bool)], class: Option<bool>) -> Vec<(u32, u64, u64, f64)> {
    let gs: Vec<_> = groups.iter().filter(|g| class.is_none_or(|c| g.5 == c)).collect();
    let sizes: BTreeSet<u32> = gs.iter().map(|g| g.3).collect();
    let max = sizes.iter().copied().max().unwrap_or(0);
    let mut surv = 1.0;
    let mut out = Vec::new();
    for k in 1..=max {
        let at_risk = gs.iter().filter(|g| g.3 >= k).count() as f64;
        let f = gs.iter().filter(|g| g.3 == k && g.4).count();
        if at_risk > 0.0 {
            surv *= 1.0 - f as f64 / at_risk;
        }
        if sizes.contains(&k) {
            out.push((k, gs.iter().filter(|g| g.3 == k).count() as u64, f as u64, 1.0 - surv));
        }
    }
    out
}

fn log_case() -> impl Strategy<Value = (Vec<(u32, u32)>, Vec<(u8, u32, u32, u32)>)> {
    let users = 6u32;
    (
        prop::collection::vec((0..users, 0..users), 0..15),
        // (kind, a, b, time): kind 0 tweet by a, 1 retweet by a of tweet #b, 2 follow a -> b
        prop::collection::vec((0u8..3, 0..users, 0..users, 0u32..40), 0..100),
    )
}

fn build_log(init: &[(u32, u32)], raw: &[(u8, u32, u32, u32)]) -> (TemporalDigraph, EventLog) {
    let mut g = TemporalDigraph::new();
    for u in 0..6 {
        g.add_user(UserId(u));
    }
    for &(a, b) in init {
        if a != b && g.created_at(UserId(a), UserId(b)).is_none() {
            g.add_follow(UserId(a), UserId(b), 0.0).unwrap();
        }
    }
    let mut tweets: Vec<(f64, u32, u64)> = Vec::new();
    let mut events = Vec::new();
    for &(kind, a, _, t) in raw {
        if kind == 0 {
            let id = tweets.len() as u64;
            tweets.push((t as f64, a, id));
            events.push(Event::tweet(t as f64, UserId(a), MsgId(id)));
        }
    }
    for &(kind, a, b, t) in raw {
        let t = t as f64 + 0.5;
        match kind {
            1 if !tweets.is_empty() => {
                let (ts, author, id) = tweets[b as usize % tweets.len()];
                if ts < t && author != a {
                    events.push(Event::retweet(t, UserId(a), MsgId(id), UserId(author), ts));
                }
            }
            2 if a != b => events.push(Event::follow(t, UserId(a), UserId(b))),
            _ => {}
        }
    }
    let log = EventLog::from_unsorted(events);
    // drop follows of edges that already exist at that point in the log
    let mut live = g.clone();
    let kept: Vec<Event> = log
        .into_events()
        .into_iter()
        .filter(|e| match e.kind {
            EventKind::Follow { follower, followee } => live.add_follow(follower, followee, e.t).is_ok(),
            _ => true,
        })
        .collect();
    (g, EventLog::from_sorted(kept).unwrap())
}

const DELTA: f64 = 8.0;

proptest! {
    #[test]
    fn stratified_estimates_match_rescan((init, raw) in log_case()) {
        let (g, log) = build_log(&init, &raw);
        let (dv, fl) = naive_scan(&log, &g);
        let expect = naive_groups(&dv, &fl, DELTA);
        let groups = retweet_groups(&log, &g, DELTA, GroupOptions::default()).unwrap();
        let mut got: Vec<_> = groups.iter().map(|g| (g.speaker.0, g.listener.0, g.t_r, g.n, g.i_delta, g.reciprocal)).collect();
        let mut want = expect.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(&got, &want);

        for stratum in [Stratum::All, Stratum::Reciprocal, Stratum::NonReciprocal] {
            let rows = naive_product_limit(&expect, stratum.class());
            match estimate_p_trf(&groups, stratum, true) {
                Ok(table) => {
                    prop_assert_eq!(table.rows.len(), rows.len());
                    for (r, w) in table.rows.iter().zip(&rows) {
                        prop_assert_eq!((r.n, r.groups, r.followers), (w.0, w.1, w.2));
                        prop_assert!((r.probability - w.3).abs() < 1e-12);
                    }
                }
                Err(e) => {
                    prop_assert_eq!(e, DetectError::EmptyInput);
                    prop_assert!(rows.is_empty());
                }
            }
        }

        // each TR event sits in at most one group: sizes never exceed the events
        let tr = extract_tr_events(&log, &g, DELTA).unwrap();
        prop_assert_eq!(tr.len(), dv.len());
        let follows: Vec<(UserId, UserId, f64)> = fl.iter().map(|f| (UserId(f.2), UserId(f.3), f.1)).collect();
        prop_assert_eq!(&group_retweets(&tr, &follows, DELTA), &groups);
        prop_assert!(groups.iter().map(|g| g.n as usize).sum::<usize>() <= tr.len());
        for e in &tr {
            let hit = fl.iter().any(|f| (f.2, f.3) == (e.listener.0, e.speaker.0) && f.1 >= e.t_r && f.1 <= e.t_r + DELTA);
            prop_assert_eq!(e.i_delta, hit);
        }
    }

    #[test]
    fn detections_match_rescan((init, raw) in log_case()) {
        let (g, log) = build_log(&init, &raw);
        let (dv, fl) = naive_scan(&log, &g);
        let mut want = Vec::new();
        for &(pos, t, l, s) in &fl {
            // most recent qualifying delivery before the follow; earliest in
            // log order among equal times
            let best = dv
                .iter()
                .filter(|d| d.pos < pos && (d.s, d.l) == (s, l) && t - d.t <= DELTA)
                .fold(None::<&Dv>, |acc, d| match acc {
                    Some(a) if a.t >= d.t => Some(a),
                    _ => Some(d),
                });
            if let Some(d) = best {
                want.push((s, d.r, l, d.t_s, d.t, t, d.recip));
            }
        }
        let got: Vec<_> = detect_trf(&log, &g, DELTA)
            .unwrap()
            .iter()
            .map(|d| (d.speaker.0, d.repeater.0, d.listener.0, d.t_s, d.t_r, d.t_l, d.reciprocal))
            .collect();
        let sort = |mut v: Vec<(u32, u32, u32, f64, f64, f64, bool)>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        prop_assert_eq!(sort(got), sort(want));
    }

    #[test]
    fn ratio_estimates_are_probabilities((init, raw) in log_case()) {
        let (g, log) = build_log(&init, &raw);
        for r in [estimate_p_exo(&log, &g, DELTA), estimate_p_endo(&log, &g, DELTA)].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&r.probability));
        }
        let no_rt = EventLog::from_sorted(
            log.iter().copied().filter(|e| !matches!(e.kind, EventKind::Retweet { .. })).collect(),
        ).unwrap();
        prop_assert_eq!(estimate_p_endo(&no_rt, &g, DELTA), Err(DetectError::NoQualifyingRetweets));
    }
}

/// Sinks `c`, middle layer `b` each following `k` sinks, and listeners
/// each following one middle node. A listener's only exogenous candidates
/// are the `k` sinks behind its middle node, and sinks have no followees,
/// so following one never adds new candidates.
fn layered(listeners: u32, mid: u32, sinks: u32, k: u32, seed: u64) -> TemporalDigraph {
    use rand::Rng as _;
    let mut rng = common::rng(seed);
    let mut g = TemporalDigraph::new();
    for u in 0..listeners + mid + sinks {
        g.add_user(UserId(u));
    }
    let c0 = listeners + mid;
    for b in 0..mid {
        let mut picked = BTreeSet::new();
        while picked.len() < k as usize {
            picked.insert(rng.random_range(0..sinks));
        }
        for c in picked {
            g.add_follow(UserId(listeners + b), UserId(c0 + c), 0.0).unwrap();
        }
    }
    for a in 0..listeners {
        g.add_follow(UserId(a), UserId(listeners + rng.random_range(0..mid)), 0.0).unwrap();
    }
    g
}

#[test]
fn exogenous_estimate_matches_poisson_thinning() {
    let g = layered(3000, 300, 300, 5, 11);
    let mut cfg = SimConfig::new(g);
    cfg.seed = 11;
    cfg.duration = 6.0 * DAY;
    cfg.tweet_rate = 0.5 / DAY;
    cfg.retweet_prob = 0.0;
    cfg.exo_follow_rate = 0.5 / DAY;
    let out = run_simulation(&cfg).unwrap();
    let est = estimate_p_exo(&out.log, &cfg.initial_graph, cfg.delta).unwrap();

    // Oracle: a listener with c candidates follows a given one within the
    // window with probability 1 - exp(-rate * delta / c); average over the
    // same qualifying (tweet, listener) pairs the estimator uses.
    let end = out.log.end_time().unwrap();
    let mut live = cfg.initial_graph.clone();
    let mut ratios = Vec::new();
    let events: Vec<Event> = out.log.iter().copied().collect();
    for e in &events {
        match e.kind {
            EventKind::Follow { follower, followee } => live.add_follow(follower, followee, e.t).unwrap(),
            EventKind::Tweet { author, .. } if e.t + cfg.delta <= end => {
                let phi = live.followers_of_followers(author, e.t).unwrap();
                if phi.is_empty() {
                    continue;
                }
                let sum: f64 = phi
                    .iter()
                    .map(|&l| {
                        let fees = live.followees_at(l, e.t).unwrap();
                        let mut cand = BTreeSet::new();
                        for &f in &fees {
                            cand.extend(live.followees_at(f, e.t).unwrap());
                        }
                        cand.remove(&l);
                        let c = cand.iter().filter(|x| !fees.contains(x)).count() as f64;
                        1.0 - (-cfg.exo_follow_rate * cfg.delta / c).exp()
                    })
                    .sum();
                ratios.push(sum / phi.len() as f64);
            }
            _ => {}
        }
    }
    assert_eq!(ratios.len(), est.count);
    let oracle = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(
        (est.probability - oracle).abs() < 3.0 * est.std_error,
        "estimate {} +- {} vs {}",
        est.probability,
        est.std_error,
        oracle
    );
}

#[test]
fn simulated_detections_are_follows() {
    let g = common::random_graph(&mut common::rng(3), 150, 0.04).0;
    let mut cfg = SimConfig::new(g);
    cfg.seed = 3;
    cfg.duration = 3.0 * DAY;
    cfg.exo_follow_rate = 1.0 / DAY;
    cfg.params_reciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    cfg.retweet_prob = 0.2;
    let out = run_simulation(&cfg).unwrap();
    let follows: BTreeMap<(UserId, UserId), f64> = out
        .log
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::Follow { follower, followee } => Some(((follower, followee), e.t)),
            _ => None,
        })
        .collect();
    let det = detect_trf(&out.log, &cfg.initial_graph, cfg.delta).unwrap();
    assert!(!det.is_empty());
    for d in det {
        assert_eq!(follows[&(d.listener, d.speaker)], d.t_l);
        assert!(!cfg.initial_graph.edge_at(d.listener, d.speaker, d.t_r).unwrap());
        assert!(d.latency >= 0.0 && d.latency <= cfg.delta);
    }
}
