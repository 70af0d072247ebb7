mod common;

use std::collections::{BTreeMap, HashMap};

use trf_core::detect::{retweet_groups, GroupOptions};
use trf_core::sim::{run_simulation, snapshot_observer, synth_graph, GraphFamily, SimConfig, TrfModelParams, DAY};
use trf_core::{EventKind, TemporalDigraph, UserId};

fn base(graph: TemporalDigraph, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(graph);
    cfg.seed = seed;
    cfg.duration = 2.0 * DAY;
    cfg.tweet_rate = 2.0 / DAY;
    cfg.retweet_prob = 0.1;
    cfg
}

fn random(n: usize, p: f64, seed: u64) -> TemporalDigraph {
    synth_graph(GraphFamily::Random, n, p, seed).unwrap()
}

#[test]
fn zero_p_never_follows() {
    let mut cfg = base(random(300, 0.03, 1), 1);
    cfg.params_reciprocal = TrfModelParams::new(0.0, 0.9).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(0.0, 0.9).unwrap();
    let out = run_simulation(&cfg).unwrap();
    assert!(out.stats.groups_opened.iter().sum::<u64>() > 1000);
    assert!(out.truth.is_empty());
    assert_eq!(out.stats.trf_follows, 0);
}

#[test]
fn certain_follow_fires_on_first_delivery() {
    let mut cfg = base(random(300, 0.03, 2), 2);
    cfg.params_reciprocal = TrfModelParams::new(1.0, 1.0).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(1.0, 1.0).unwrap();
    let out = run_simulation(&cfg).unwrap();
    let opened: u64 = out.stats.groups_opened.iter().sum();
    assert!(opened > 100);
    assert_eq!(out.truth.len() as u64, opened);
    assert!(out.truth.iter().all(|t| t.n_received == 1 && t.t_l == t.t_r));
}

#[test]
fn first_retweet_follow_rate_matches_pq() {
    // Every group gets a follow at its first retweet with probability p*q,
    // whatever happens afterwards: a binomial oracle over opened groups.
    let mut cfg = base(random(1000, 0.02, 3), 3);
    cfg.params_reciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    let out = run_simulation(&cfg).unwrap();
    let opened: u64 = out.stats.groups_opened.iter().sum();
    assert!(opened >= 100_000, "only {opened} groups");
    let first = out.truth.iter().filter(|t| t.n_received == 1).count() as f64;
    let frac = first / opened as f64;
    let se = (0.25 * 0.75 / opened as f64).sqrt();
    assert!((frac - 0.25).abs() < 3.0 * se, "fraction {frac}, se {se}");
}

#[test]
fn follows_stay_inside_their_group_window() {
    let mut cfg = base(random(400, 0.03, 4), 4);
    cfg.params_reciprocal = TrfModelParams::new(0.6, 0.2).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(0.6, 0.2).unwrap();
    let out = run_simulation(&cfg).unwrap();
    assert!(out.truth.len() > 50);
    let groups = retweet_groups(&out.log, &cfg.initial_graph, cfg.delta, GroupOptions::default()).unwrap();
    let followed: HashMap<(UserId, UserId), f64> =
        groups.iter().filter(|g| g.i_delta).map(|g| ((g.speaker, g.listener), g.t_r)).collect();
    for t in &out.truth {
        let open = followed[&(t.speaker, t.listener)];
        assert!(t.t_l - open <= cfg.delta && t.t_l >= open);
        assert!(t.t_s < t.t_r && t.t_r <= t.t_l);
    }
    // replaying every follow onto the initial graph never duplicates an edge
    let mut g = cfg.initial_graph.clone();
    for e in out.log.iter() {
        if let EventKind::Follow { follower, followee } = e.kind {
            g.add_follow(follower, followee, e.t).unwrap();
        }
    }
    assert_eq!(g.edge_count(), out.final_graph.edge_count());
}

#[test]
fn identical_seeds_identical_runs() {
    let mut cfg = base(random(200, 0.05, 5), 5);
    cfg.exo_follow_rate = 0.5 / DAY;
    cfg.params_reciprocal = TrfModelParams::new(0.3, 0.3).unwrap();
    let a = run_simulation(&cfg).unwrap();
    let b = run_simulation(&cfg).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.truth, b.truth);
    assert_eq!(a.stats, b.stats);
    cfg.seed = 6;
    assert_ne!(run_simulation(&cfg).unwrap().log, a.log);
}

#[test]
fn exogenous_follow_counts_are_poisson() {
    // Dense enough that no listener runs out of candidates; no retweets, so
    // nothing is suppressed and per-user counts are Poisson(rate * T).
    let n = 2000;
    let mut cfg = base(random(n, 0.01, 7), 7);
    cfg.retweet_prob = 0.0;
    cfg.tweet_rate = 0.0;
    cfg.exo_follow_rate = 1.0 / DAY;
    cfg.duration = 5.0 * DAY;
    let out = run_simulation(&cfg).unwrap();
    let mut counts = vec![0f64; n];
    for e in out.log.iter() {
        if let EventKind::Follow { follower, .. } = e.kind {
            counts[follower.0 as usize] += 1.0;
        }
    }
    let lambda = cfg.exo_follow_rate * cfg.duration;
    let total: f64 = counts.iter().sum();
    let mean = total / n as f64;
    assert!((total - lambda * n as f64).abs() < 4.0 * (lambda * n as f64).sqrt(), "total {total}");
    // index of dispersion: sum (x - mean)^2 / mean ~ chi2(n - 1)
    let d: f64 = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / mean;
    let df = (n - 1) as f64;
    assert!((d - df).abs() < 4.0 * (2.0 * df).sqrt(), "dispersion {d} vs {df}");
}

#[test]
fn snapshot_diffs_recover_follow_times() {
    let mut cfg = base(random(300, 0.03, 8), 8);
    cfg.exo_follow_rate = 1.0 / DAY;
    cfg.params_reciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    cfg.params_nonreciprocal = TrfModelParams::new(0.5, 0.5).unwrap();
    cfg.poll_interval = 600.0;
    let out = run_simulation(&cfg).unwrap();
    let users = cfg.initial_graph.users();
    let snaps = snapshot_observer(&out.log, &cfg.initial_graph, &users, cfg.poll_interval, cfg.duration);
    let mut seen: BTreeMap<UserId, (f64, Vec<UserId>)> = BTreeMap::new();
    let mut recovered = BTreeMap::new();
    for s in &snaps {
        if let Some((_, prev)) = seen.get(&s.user) {
            for f in s.followers.iter().filter(|f| prev.binary_search(f).is_err()) {
                recovered.insert((*f, s.user), s.t);
            }
        }
        seen.insert(s.user, (s.t, s.followers.clone()));
    }
    let mut follows = BTreeMap::new();
    for e in out.log.iter() {
        if let EventKind::Follow { follower, followee } = e.kind {
            // the first poll at or after t = 0 is the baseline
            if e.t > 0.0 {
                follows.insert((follower, followee), e.t);
            }
        }
    }
    assert!(follows.len() > 100);
    assert_eq!(recovered.keys().collect::<Vec<_>>(), follows.keys().collect::<Vec<_>>());
    for (k, t) in &follows {
        let tp = recovered[k];
        assert!(tp >= *t && tp - t < cfg.poll_interval);
    }
}

#[test]
fn synthetic_families() {
    let cyc = synth_graph(GraphFamily::Cycle, 5, 0.0, 0).unwrap();
    assert_eq!(cyc.edge_count(), 5);
    let dag = synth_graph(GraphFamily::DagHierarchy, 40, 0.1, 3).unwrap();
    let scc = trf_core::topology::tarjan_scc(&dag);
    assert_eq!(scc.largest(), 1);
    assert!(dag.users().iter().any(|u| dag.followees_at(*u, 0.0).unwrap().is_empty()));
    let a = synth_graph(GraphFamily::Random, 30, 0.1, 9).unwrap();
    let b = synth_graph(GraphFamily::Random, 30, 0.1, 9).unwrap();
    assert_eq!(a.edges(), b.edges());
}
