use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{TemporalDigraph, UserId};

/// Strongly connected components.
#[derive(Clone, Debug, PartialEq)]
pub struct SccResult {
    /// Users in ascending order.
    pub nodes: Vec<UserId>,
    /// Component id of `nodes[i]`; ids are assigned in order of completion.
    pub component: Vec<u32>,
    /// Size of each component, indexed by id.
    pub sizes: Vec<usize>,
    /// Largest component size over node count (0 for an empty graph).
    pub largest_fraction: f64,
}

impl SccResult {
    pub fn component_of(&self, user: UserId) -> Option<u32> {
        self.nodes.binary_search(&user).ok().map(|i| self.component[i])
    }

    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }
}

const UNVISITED: u32 = u32::MAX;

/// Tarjan's algorithm with an explicit stack; runs in `O(V + E)` without
/// recursion. Roots are tried in ascending user order and edges in
/// ascending followee order, so the labelling is deterministic.
pub fn tarjan_scc(graph: &TemporalDigraph) -> SccResult {
    let nodes = graph.users();
    let n = nodes.len();
    // dense adjacency over the ascending order
    let pos: hashbrown::HashMap<UserId, u32> = nodes.iter().enumerate().map(|(i, &u)| (u, i as u32)).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(graph.edge_count());
    offsets.push(0usize);
    for &u in &nodes {
        let ix = graph.ix(u).expect("listed user");
        let start = targets.len();
        targets.extend(graph.followees_raw(ix).iter().map(|&(v, _)| pos[&graph.id(v)]));
        targets[start..].sort_unstable();
        offsets.push(targets.len());
    }

    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, next edge offset)
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut sizes = Vec::new();
    let mut counter = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, offsets[root as usize]));
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let vu = v as usize;
            if *edge < offsets[vu + 1] {
                let w = targets[*edge];
                *edge += 1;
                let wu = w as usize;
                if index[wu] == UNVISITED {
                    index[wu] = counter;
                    low[wu] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[wu] = true;
                    call.push((w, offsets[wu]));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let pu = parent as usize;
                low[pu] = low[pu].min(low[vu]);
            }
            if low[vu] == index[vu] {
                let id = sizes.len() as u32;
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w as usize] = false;
                    component[w as usize] = id;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                sizes.push(size);
            }
        }
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    SccResult {
        largest_fraction: if n == 0 { 0.0 } else { largest as f64 / n as f64 },
        nodes,
        component,
        sizes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u32, edges: &[(u32, u32)]) -> TemporalDigraph {
        let mut g = TemporalDigraph::new();
        for i in 0..n {
            g.add_user(UserId(i));
        }
        for &(a, b) in edges {
            g.add_follow(UserId(a), UserId(b), 0.0).unwrap();
        }
        g
    }

    #[test]
    fn five_cycle() {
        let r = tarjan_scc(&graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]));
        assert_eq!(r.sizes, vec![5]);
        assert_eq!(r.largest_fraction, 1.0);
    }

    #[test]
    fn chain_is_singletons() {
        let r = tarjan_scc(&graph(3, &[(0, 1), (1, 2)]));
        assert_eq!(r.sizes, vec![1, 1, 1]);
        assert!((r.largest_fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deep_path_does_not_recurse() {
        let n = 200_000u32;
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).chain([(n - 1, 0)]).collect();
        let r = tarjan_scc(&graph(n, &edges));
        assert_eq!(r.sizes, vec![n as usize]);
    }
}
