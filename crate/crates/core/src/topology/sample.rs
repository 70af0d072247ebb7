use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::Rng as _;

use super::TopologyError;
use crate::graph::{TemporalDigraph, UserId};
use crate::rng::{substream, Rng};

/// The graph with edge directions dropped, over users in ascending order.
#[derive(Clone, Debug)]
pub struct UndirectedView {
    nodes: Vec<UserId>,
    pos: HashMap<UserId, u32>,
    // sorted, deduplicated neighbor lists
    adj: Vec<Vec<u32>>,
}

impl UndirectedView {
    pub fn new(graph: &TemporalDigraph) -> Self {
        let nodes = graph.users();
        let pos: HashMap<UserId, u32> = nodes.iter().enumerate().map(|(i, &u)| (u, i as u32)).collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        for (a, b, _) in graph.edges() {
            let (x, y) = (pos[&a], pos[&b]);
            adj[x as usize].push(y);
            adj[y as usize].push(x);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        UndirectedView { nodes, pos, adj }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    fn index(&self, u: UserId) -> Result<u32, TopologyError> {
        self.pos.get(&u).copied().ok_or(TopologyError::UnknownUser(u))
    }

    fn check_target(&self, target: usize) -> Result<(), TopologyError> {
        if target == 0 || target > self.nodes.len() {
            return Err(TopologyError::InvalidInput("target size must lie in 1..=node count"));
        }
        Ok(())
    }

    /// Size of the weakly connected component holding `start`, capped at
    /// `cap`.
    fn reach(&self, start: u32, cap: usize) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start as usize] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    if count >= cap {
                        return count;
                    }
                    queue.push_back(w);
                }
            }
        }
        count
    }

    fn finish(&self, picked: impl IntoIterator<Item = u32>) -> Vec<UserId> {
        let mut out: Vec<UserId> = picked.into_iter().map(|i| self.nodes[i as usize]).collect();
        out.sort_unstable();
        out
    }

    /// Random walk from `start` that jumps back to `start` with probability
    /// `restart` at each step, until `target` distinct users were visited.
    pub fn random_walk_from(
        &self,
        start: UserId,
        target: usize,
        restart: f64,
        rng: &mut Rng,
    ) -> Result<Vec<UserId>, TopologyError> {
        self.check_target(target)?;
        if !(0.0..1.0).contains(&restart) {
            return Err(TopologyError::InvalidInput("restart probability must lie in [0, 1)"));
        }
        let s = self.index(start)?;
        if self.reach(s, target) < target {
            return Err(TopologyError::Unreachable { target });
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut picked = vec![s];
        seen[s as usize] = true;
        // generous cap; the walk is confined to a component that is large
        // enough, so this only trips on pathological restart settings
        let cap = 1000usize.saturating_mul(self.nodes.len()).max(1_000_000);
        let mut v = s;
        let mut steps = 0usize;
        while picked.len() < target {
            steps += 1;
            if steps > cap {
                return Err(TopologyError::Unreachable { target });
            }
            let nb = &self.adj[v as usize];
            if nb.is_empty() || (restart > 0.0 && rng.random_bool(restart)) {
                v = s;
                continue;
            }
            v = nb[rng.random_range(0..nb.len())];
            if !seen[v as usize] {
                seen[v as usize] = true;
                picked.push(v);
            }
        }
        Ok(self.finish(picked))
    }

    /// Breadth-first layers from `start`; the last layer is truncated to its
    /// smallest user ids.
    pub fn snowball_from(&self, start: UserId, target: usize) -> Result<Vec<UserId>, TopologyError> {
        self.check_target(target)?;
        let s = self.index(start)?;
        let mut seen = vec![false; self.nodes.len()];
        seen[s as usize] = true;
        let mut picked = vec![s];
        let mut layer = vec![s];
        while picked.len() < target {
            let mut next = Vec::new();
            for &v in &layer {
                for &w in &self.adj[v as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return Err(TopologyError::Unreachable { target });
            }
            // positions follow ascending user order
            next.sort_unstable();
            let take = (target - picked.len()).min(next.len());
            picked.extend_from_slice(&next[..take]);
            layer = next;
        }
        Ok(self.finish(picked))
    }

    pub(crate) fn pick_start(&self, rng: &mut Rng) -> UserId {
        self.nodes[rng.random_range(0..self.nodes.len())]
    }
}

/// Random-walk sample with a start node drawn from `seed`.
pub fn random_walk_sample(
    graph: &TemporalDigraph,
    target_size: usize,
    restart_prob: f64,
    seed: u64,
) -> Result<Vec<UserId>, TopologyError> {
    let view = UndirectedView::new(graph);
    if view.is_empty() {
        return Err(TopologyError::InvalidInput("empty graph"));
    }
    let mut rng = substream(seed, "sample/random_walk");
    let start = view.pick_start(&mut rng);
    view.random_walk_from(start, target_size, restart_prob, &mut rng)
}

pub fn random_walk_sample_from(
    graph: &TemporalDigraph,
    start: UserId,
    target_size: usize,
    restart_prob: f64,
    seed: u64,
) -> Result<Vec<UserId>, TopologyError> {
    let mut rng = substream(seed, "sample/random_walk");
    UndirectedView::new(graph).random_walk_from(start, target_size, restart_prob, &mut rng)
}

/// Snowball (breadth-first) sample from a start node drawn from `seed`.
pub fn snowball_sample(graph: &TemporalDigraph, target_size: usize, seed: u64) -> Result<Vec<UserId>, TopologyError> {
    let view = UndirectedView::new(graph);
    if view.is_empty() {
        return Err(TopologyError::InvalidInput("empty graph"));
    }
    let mut rng = substream(seed, "sample/snowball");
    let start = view.pick_start(&mut rng);
    view.snowball_from(start, target_size)
}

pub fn snowball_sample_from(graph: &TemporalDigraph, start: UserId, target_size: usize) -> Result<Vec<UserId>, TopologyError> {
    UndirectedView::new(graph).snowball_from(start, target_size)
}
