use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::TopologyError;
use crate::graph::{Ix, TemporalDigraph, Time, UserId};

/// Creation time stamped on edges added by [`trf_closure`]; later than any
/// simulated time.
pub const EQUILIBRIUM_TIME: Time = f64::MAX;

fn reach_ix(graph: &TemporalDigraph, x: Ix, seen: &mut Vec<bool>, out: &mut Vec<Ix>) {
    seen.iter_mut().for_each(|s| *s = false);
    out.clear();
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in graph.followees_raw(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                out.push(w);
                queue.push_back(w);
            }
        }
    }
}

/// Everyone `x` reaches through followee edges, ascending. Contains `x`
/// itself only when `x` lies on a directed cycle.
pub fn reachable_followees(graph: &TemporalDigraph, x: UserId) -> Result<Vec<UserId>, TopologyError> {
    let v = graph.ix(x).map_err(|_| TopologyError::UnknownUser(x))?;
    let mut seen = vec![false; graph.node_count()];
    let mut out = Vec::new();
    reach_ix(graph, v, &mut seen, &mut out);
    let mut ids: Vec<UserId> = out.into_iter().map(|i| graph.id(i)).collect();
    ids.sort_unstable();
    Ok(ids)
}

/// The graph in which every user follows everyone it reaches: the fixed
/// point of following speakers whose messages arrive through followees.
/// Added edges carry [`EQUILIBRIUM_TIME`].
pub fn trf_closure(graph: &TemporalDigraph) -> TemporalDigraph {
    let mut out = graph.clone();
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut reach = Vec::new();
    for x in 0..n as Ix {
        reach_ix(graph, x, &mut seen, &mut reach);
        for &y in &reach {
            if y != x && !graph.has_edge_ix(x, y) {
                out.insert_ix(x, y, EQUILIBRIUM_TIME);
            }
        }
    }
    out
}

/// True when following everyone reachable would add no edge.
pub fn is_trf_equilibrium(graph: &TemporalDigraph) -> bool {
    // transitive iff every two-step path is short-cut
    let n = graph.node_count() as Ix;
    (0..n).all(|x| {
        graph.followees_raw(x).iter().all(|&(y, _)| {
            graph
                .followees_raw(y)
                .iter()
                .all(|&(z, _)| z == x || graph.has_edge_ix(x, z))
        })
    })
}
