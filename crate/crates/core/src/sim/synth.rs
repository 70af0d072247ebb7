use rand::Rng as _;

use super::config::SimError;
use crate::graph::{TemporalDigraph, UserId};
use crate::math;
use crate::rng::{substream, Rng};

/// Synthetic initial topologies. Users are numbered `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFamily {
    /// `i -> i+1 (mod size)`.
    Cycle,
    /// Node 0 is the root sink; node `i` follows `(i-1)/2` plus every lower
    /// node with probability `edge_prob`. Acyclic and weakly connected.
    DagHierarchy,
    /// Each unordered pair becomes a mutual follow with probability
    /// `edge_prob`.
    ReciprocalPairs,
    /// Each ordered pair is an edge with probability `edge_prob`.
    Random,
}

impl core::str::FromStr for GraphFamily {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "cycle" => Ok(GraphFamily::Cycle),
            "dag_hierarchy" => Ok(GraphFamily::DagHierarchy),
            "reciprocal_pairs" => Ok(GraphFamily::ReciprocalPairs),
            "random" => Ok(GraphFamily::Random),
            _ => Err(SimError::InvalidConfig("unknown graph family")),
        }
    }
}

/// Generates a deterministic graph; all edges are created at time 0.
pub fn synth_graph(kind: GraphFamily, size: usize, edge_prob: f64, seed: u64) -> Result<TemporalDigraph, SimError> {
    if size == 0 || size > u32::MAX as usize {
        return Err(SimError::InvalidConfig("graph size must be at least 1"));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(SimError::InvalidConfig("edge_prob must lie in [0, 1]"));
    }
    let mut rng = substream(seed, "graph");
    let mut g = TemporalDigraph::new();
    for i in 0..size {
        g.add_user(UserId(i as u32));
    }
    let ix = |i: usize| i as u32;
    match kind {
        GraphFamily::Cycle => {
            if size >= 2 {
                for i in 0..size {
                    g.insert_ix(ix(i), ix((i + 1) % size), 0.0);
                }
            }
        }
        GraphFamily::DagHierarchy => {
            for i in 1..size {
                let parent = (i - 1) / 2;
                g.insert_ix(ix(i), ix(parent), 0.0);
                for j in sparse_indices(&mut rng, i as u64, edge_prob) {
                    let j = j as usize;
                    if j != parent {
                        g.insert_ix(ix(i), ix(j), 0.0);
                    }
                }
            }
        }
        GraphFamily::ReciprocalPairs => {
            for i in 0..size {
                for d in sparse_indices(&mut rng, (size - i - 1) as u64, edge_prob) {
                    let j = i + 1 + d as usize;
                    g.insert_ix(ix(i), ix(j), 0.0);
                    g.insert_ix(ix(j), ix(i), 0.0);
                }
            }
        }
        GraphFamily::Random => {
            for i in 0..size {
                for d in sparse_indices(&mut rng, (size - 1) as u64, edge_prob) {
                    let j = d as usize;
                    let j = if j >= i { j + 1 } else { j };
                    g.insert_ix(ix(i), ix(j), 0.0);
                }
            }
        }
    }
    Ok(g)
}

/// Indices in `0..len` selected independently with probability `prob`, by
/// geometric skipping.
fn sparse_indices(rng: &mut Rng, len: u64, prob: f64) -> alloc::vec::Vec<u64> {
    let mut out = alloc::vec::Vec::new();
    if prob <= 0.0 || len == 0 {
        return out;
    }
    if prob >= 1.0 {
        out.extend(0..len);
        return out;
    }
    let log_q = math::log1p(-prob);
    let mut i: u64 = 0;
    loop {
        let u: f64 = rng.random::<f64>();
        // 1 - u lies in (0, 1]
        let skip = math::floor(math::log(1.0 - u) / log_q);
        if !(skip < (len - i) as f64) {
            break;
        }
        i += skip as u64;
        out.push(i);
        i += 1;
        if i >= len {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::tarjan_scc;

    #[test]
    fn cycle_has_one_component() {
        let g = synth_graph(GraphFamily::Cycle, 5, 0.0, 0).unwrap();
        assert_eq!(g.edge_count(), 5);
        let scc = tarjan_scc(&g);
        assert_eq!(scc.sizes, alloc::vec![5]);
    }

    #[test]
    fn hierarchy_is_acyclic_with_a_sink() {
        let g = synth_graph(GraphFamily::DagHierarchy, 40, 0.1, 3).unwrap();
        let scc = tarjan_scc(&g);
        assert_eq!(scc.sizes.len(), 40);
        assert!(g.followees_at(UserId(0), 0.0).unwrap().is_empty());
    }

    #[test]
    fn random_is_deterministic() {
        let a = synth_graph(GraphFamily::Random, 30, 0.1, 9).unwrap();
        let b = synth_graph(GraphFamily::Random, 30, 0.1, 9).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = synth_graph(GraphFamily::Random, 30, 0.1, 10).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn random_density_matches_edge_prob() {
        let g = synth_graph(GraphFamily::Random, 400, 0.05, 1).unwrap();
        let m = g.edge_count() as f64;
        let expected = 400.0 * 399.0 * 0.05;
        let sd = math::sqrt(expected * 0.95);
        assert!((m - expected).abs() < 4.0 * sd, "{m} vs {expected}");
        let full = synth_graph(GraphFamily::Random, 6, 1.0, 1).unwrap();
        assert_eq!(full.edge_count(), 30);
    }

    #[test]
    fn reciprocal_pairs_are_mutual() {
        let g = synth_graph(GraphFamily::ReciprocalPairs, 50, 0.1, 2).unwrap();
        for (a, b, _) in g.edges() {
            assert!(g.edge_at(b, a, 0.0).unwrap());
        }
        assert!(synth_graph(GraphFamily::Random, 0, 0.1, 0).is_err());
    }
}
