//! Temporal directed follower graph.
//!
//! An edge `a -> b` means `a` follows `b` (`a` receives `b`'s tweets). Every
//! edge carries its creation time and exists at every `t >= created_at`;
//! edges are never removed.

use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use thiserror::Error;

/// Timestamps are seconds since the start of a run.
pub type Time = f64;

/// Opaque user identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for UserId {
    fn from(v: u32) -> Self {
        UserId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("user {0} cannot follow themselves")]
    SelfEdge(UserId),
    #[error("edge {0} -> {1} already exists")]
    DuplicateEdge(UserId, UserId),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("invalid edge creation time {0}")]
    InvalidTime(Time),
}

/// Dense node index used internally and by the simulator hot paths.
pub(crate) type Ix = u32;

#[inline]
pub(crate) fn pair_key(a: Ix, b: Ix) -> u64 {
    ((a as u64) << 32) | b as u64
}

#[derive(Clone, Debug, Default)]
pub struct TemporalDigraph {
    index: HashMap<UserId, Ix>,
    ids: Vec<UserId>,
    // followers[v]: nodes following v, in insertion order
    followers: Vec<Vec<(Ix, Time)>>,
    // followees[v]: nodes v follows, in insertion order
    followees: Vec<Vec<(Ix, Time)>>,
    edges: HashMap<u64, Time>,
}

impl TemporalDigraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a user; a no-op when already present.
    pub fn add_user(&mut self, id: UserId) {
        self.ensure(id);
    }

    pub fn contains_user(&self, id: UserId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All registered users, ascending.
    pub fn users(&self) -> Vec<UserId> {
        let mut v = self.ids.clone();
        v.sort_unstable();
        v
    }

    pub fn add_follow(&mut self, follower: UserId, followee: UserId, t: Time) -> Result<(), GraphError> {
        if follower == followee {
            return Err(GraphError::SelfEdge(follower));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(GraphError::InvalidTime(t));
        }
        let a = self.ensure(follower);
        let b = self.ensure(followee);
        if self.edges.contains_key(&pair_key(a, b)) {
            return Err(GraphError::DuplicateEdge(follower, followee));
        }
        self.insert_ix(a, b, t);
        Ok(())
    }

    /// Creation time of `a -> b`, if the edge exists at any time.
    pub fn created_at(&self, a: UserId, b: UserId) -> Option<Time> {
        let a = *self.index.get(&a)?;
        let b = *self.index.get(&b)?;
        self.edges.get(&pair_key(a, b)).copied()
    }

    pub fn edge_at(&self, a: UserId, b: UserId, t: Time) -> Result<bool, GraphError> {
        let ia = self.ix(a)?;
        let ib = self.ix(b)?;
        Ok(self.edge_at_ix(ia, ib, t))
    }

    /// Followers of `user` at time `t`, ascending.
    pub fn followers_at(&self, user: UserId, t: Time) -> Result<Vec<UserId>, GraphError> {
        let v = self.ix(user)?;
        Ok(self.collect_at(&self.followers[v as usize], t))
    }

    /// Followees of `user` at time `t`, ascending.
    pub fn followees_at(&self, user: UserId, t: Time) -> Result<Vec<UserId>, GraphError> {
        let v = self.ix(user)?;
        Ok(self.collect_at(&self.followees[v as usize], t))
    }

    /// Followers of followers of `s` at `t`, excluding `s` and its direct
    /// followers.
    pub fn followers_of_followers(&self, s: UserId, t: Time) -> Result<Vec<UserId>, GraphError> {
        let v = self.ix(s)?;
        let mut out: Vec<UserId> = self
            .fof_ix(v, t)
            .into_iter()
            .map(|x| self.ids[x as usize])
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Every edge as `(follower, followee, created_at)`, sorted by follower
    /// then followee.
    pub fn edges(&self) -> Vec<(UserId, UserId, Time)> {
        let mut out = Vec::with_capacity(self.edges.len());
        for (a, list) in self.followees.iter().enumerate() {
            for &(b, t) in list {
                out.push((self.ids[a], self.ids[b as usize], t));
            }
        }
        out.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        out
    }

    /// Copy of the graph restricted to edges created at or before `t`.
    pub fn at(&self, t: Time) -> TemporalDigraph {
        let mut g = TemporalDigraph::new();
        for id in self.users() {
            g.add_user(id);
        }
        for (a, b, c) in self.edges() {
            if c <= t {
                g.insert_ix(g.index[&a], g.index[&b], c);
            }
        }
        g
    }

    /// Subgraph induced by `nodes`; unknown ids are ignored.
    pub fn induced(&self, nodes: &[UserId]) -> TemporalDigraph {
        let mut g = TemporalDigraph::new();
        let mut sorted: Vec<UserId> = nodes.iter().copied().filter(|u| self.contains_user(*u)).collect();
        sorted.sort_unstable();
        sorted.dedup();
        for &u in &sorted {
            g.add_user(u);
        }
        for &u in &sorted {
            let a = self.index[&u];
            for &(b, t) in &self.followees[a as usize] {
                let w = self.ids[b as usize];
                if let Some(&gb) = g.index.get(&w) {
                    let ga = g.index[&u];
                    g.insert_ix(ga, gb, t);
                }
            }
        }
        g
    }

    // ---- dense-index access ----

    pub(crate) fn ix(&self, id: UserId) -> Result<Ix, GraphError> {
        self.index.get(&id).copied().ok_or(GraphError::UnknownUser(id))
    }

    #[inline]
    pub(crate) fn id(&self, ix: Ix) -> UserId {
        self.ids[ix as usize]
    }

    pub(crate) fn ensure(&mut self, id: UserId) -> Ix {
        if let Some(&ix) = self.index.get(&id) {
            return ix;
        }
        let ix = self.ids.len() as Ix;
        self.index.insert(id, ix);
        self.ids.push(id);
        self.followers.push(Vec::new());
        self.followees.push(Vec::new());
        ix
    }

    #[inline]
    pub(crate) fn followers_raw(&self, v: Ix) -> &[(Ix, Time)] {
        &self.followers[v as usize]
    }

    #[inline]
    pub(crate) fn followees_raw(&self, v: Ix) -> &[(Ix, Time)] {
        &self.followees[v as usize]
    }

    #[inline]
    pub(crate) fn has_edge_ix(&self, a: Ix, b: Ix) -> bool {
        self.edges.contains_key(&pair_key(a, b))
    }

    #[inline]
    pub(crate) fn edge_at_ix(&self, a: Ix, b: Ix, t: Time) -> bool {
        matches!(self.edges.get(&pair_key(a, b)), Some(&c) if c <= t)
    }

    /// Inserts `a -> b` without validation; callers guarantee the edge is new.
    pub(crate) fn insert_ix(&mut self, a: Ix, b: Ix, t: Time) {
        self.edges.insert(pair_key(a, b), t);
        self.followees[a as usize].push((b, t));
        self.followers[b as usize].push((a, t));
    }

    /// Followers of followers of `v` at `t` (unordered, deduplicated).
    pub(crate) fn fof_ix(&self, v: Ix, t: Time) -> Vec<Ix> {
        let mut out = Vec::new();
        for &(y, ty) in &self.followers[v as usize] {
            if ty > t {
                continue;
            }
            for &(x, tx) in &self.followers[y as usize] {
                if tx <= t && x != v && !self.edge_at_ix(x, v, t) {
                    out.push(x);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_at(&self, list: &[(Ix, Time)], t: Time) -> Vec<UserId> {
        let mut out: Vec<UserId> = list
            .iter()
            .filter(|(_, c)| *c <= t)
            .map(|(x, _)| self.ids[*x as usize])
            .collect();
        out.sort_unstable();
        out
    }
}
