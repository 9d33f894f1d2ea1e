//! Simple undirected graphs on dense vertex ids `0..n`.
//!
//! A [`Graph`] is immutable once built. Edits ([`Graph::remove_edges`],
//! [`Graph::add_tree_vertices`]) return a fresh graph and leave the input
//! untouched, so graphs can be shared freely across verification passes.

use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GraphError;

pub type Edge = (usize, usize);

/// Simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

/// Length of the shortest cycle, or `Infinite` for a forest.
///
/// Deliberately not an integer: code that does arithmetic on a girth has to
/// handle the forest case explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub min_degree: usize,
    pub max_degree: usize,
    pub is_regular: bool,
    /// Common degree when the graph is regular.
    pub degree: Option<usize>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicate
    /// edges (in either orientation) and out-of-range ids.
    pub fn new(n: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::OutOfRange { id, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Self {
            n,
            adj,
            edge_count: edges.len(),
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds from adjacency lists produced by a trusted constructor.
    /// Lists are sorted here; symmetry and simplicity are re-checked.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = adj.len();
        let mut total = 0;
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
            if list.binary_search(&u).is_ok() {
                return Err(GraphError::SelfLoop(u));
            }
            if let Some(&v) = list.iter().find(|&&v| v >= n) {
                return Err(GraphError::OutOfRange { id: v, n });
            }
            total += list.len();
        }
        for u in 0..n {
            for &v in &adj[u] {
                if adj[v].binary_search(&u).is_err() {
                    return Err(GraphError::MissingEdge(v, u));
                }
            }
        }
        Ok(Self {
            n,
            adj,
            edge_count: total / 2,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let min_degree = self.adj.iter().map(Vec::len).min().unwrap_or(0);
        let max_degree = self.adj.iter().map(Vec::len).max().unwrap_or(0);
        let is_regular = min_degree == max_degree;
        DegreeProfile {
            min_degree,
            max_degree,
            is_regular,
            degree: is_regular.then_some(min_degree),
        }
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        self.degree_profile().degree
    }

    /// Full scan of the symmetry, simplicity and edge-count invariants.
    pub fn check_invariants(&self) -> bool {
        let mut total = 0;
        for u in 0..self.n {
            let list = &self.adj[u];
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in list {
                if v >= self.n || v == u || self.adj[v].binary_search(&u).is_err() {
                    return false;
                }
            }
            total += list.len();
        }
        total == 2 * self.edge_count
    }

    /// BFS distances from `root`; `None` for unreachable vertices.
    pub fn distances_from(&self, root: usize) -> Vec<Option<usize>> {
        self.distances_avoiding(root, &[])
    }

    /// BFS distances from `root` in the graph with the `blocked` vertices
    /// deleted. `blocked` must be sorted; `root` must not be blocked.
    pub fn distances_avoiding(&self, root: usize, blocked: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let is_blocked = |v: usize| blocked.binary_search(&v).is_ok();
        dist[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &y in &self.adj[x] {
                if dist[y].is_none() && !is_blocked(y) {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Vertices at distance exactly `r` from `u`.
    pub fn sphere(&self, u: usize, r: usize) -> VertexSet {
        let dist = self.distances_from(u);
        VertexSet((0..self.n).filter(|&v| dist[v] == Some(r)).collect())
    }

    /// Vertices at distance at most `r` from `u`.
    pub fn ball(&self, u: usize, r: usize) -> VertexSet {
        let dist = self.distances_from(u);
        VertexSet(
            (0..self.n)
                .filter(|&v| dist[v].is_some_and(|d| d <= r))
                .collect(),
        )
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    /// Two-colouring test over every component.
    pub fn is_bipartite(&self) -> bool {
        let mut colour: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                let cx = colour[x].unwrap();
                for &y in &self.adj[x] {
                    match colour[y] {
                        None => {
                            colour[y] = Some(!cx);
                            queue.push_back(y);
                        }
                        Some(cy) if cy == cx => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Exact girth by a BFS from every vertex.
    ///
    /// From a root, each non-tree edge `(x, y)` closes a walk of length
    /// `dist(x) + dist(y) + 1` that contains a cycle, and a root lying on a
    /// shortest cycle sees exactly the girth. Roots are processed in parallel
    /// and a BFS stops once its depth can no longer improve the best value.
    pub fn girth(&self) -> Girth {
        let best = AtomicUsize::new(usize::MAX);
        (0..self.n).into_par_iter().for_each_init(
            || {
                (
                    vec![usize::MAX; self.n],
                    vec![usize::MAX; self.n],
                    VecDeque::new(),
                )
            },
            |(dist, parent, queue), root| {
                let found = self.shortest_cycle_through_bfs(root, dist, parent, queue, &best);
                best.fetch_min(found, Ordering::Relaxed);
            },
        );
        match best.into_inner() {
            usize::MAX => Girth::Infinite,
            g => Girth::Finite(g),
        }
    }

    fn shortest_cycle_through_bfs(
        &self,
        root: usize,
        dist: &mut [usize],
        parent: &mut [usize],
        queue: &mut VecDeque<usize>,
        best: &AtomicUsize,
    ) -> usize {
        let mut local = usize::MAX;
        let mut touched = vec![root];
        dist[root] = 0;
        parent[root] = usize::MAX;
        queue.clear();
        queue.push_back(root);
        'bfs: while let Some(x) = queue.pop_front() {
            let bound = local.min(best.load(Ordering::Relaxed));
            if bound != usize::MAX && 2 * dist[x] + 1 >= bound {
                break 'bfs;
            }
            for &y in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    touched.push(y);
                    queue.push_back(y);
                } else if parent[x] != y {
                    local = local.min(dist[x] + dist[y] + 1);
                }
            }
        }
        for v in touched {
            dist[v] = usize::MAX;
            parent[v] = usize::MAX;
        }
        local
    }

    /// Returns a new graph without the given edges. Every edge must exist.
    pub fn remove_edges(&self, edges: &[Edge]) -> Result<Graph, GraphError> {
        let mut adj = self.adj.clone();
        for &(u, v) in edges {
            if u >= self.n || v >= self.n {
                return Err(GraphError::OutOfRange {
                    id: u.max(v),
                    n: self.n,
                });
            }
            let pu = adj[u]
                .binary_search(&v)
                .map_err(|_| GraphError::MissingEdge(u, v))?;
            adj[u].remove(pu);
            let pv = adj[v]
                .binary_search(&u)
                .map_err(|_| GraphError::MissingEdge(u, v))?;
            adj[v].remove(pv);
        }
        Ok(Graph {
            n: self.n,
            adj,
            edge_count: self.edge_count - edges.len(),
        })
    }

    /// Returns a new graph with `new_count` fresh vertices `n..n+new_count`
    /// and the given extra edges, which may touch old and fresh vertices.
    pub fn add_tree_vertices(
        &self,
        new_count: usize,
        new_edges: &[Edge],
    ) -> Result<Graph, GraphError> {
        let n = self.n + new_count;
        let mut adj = self.adj.clone();
        adj.resize(n, Vec::new());
        for &(u, v) in new_edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::OutOfRange { id, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Graph {
            n,
            adj,
            edge_count: self.edge_count + new_edges.len(),
        })
    }

    /// Subgraph induced on `vertices`, relabelled to `0..vertices.len()` in
    /// the set's ascending order.
    pub fn induced_subgraph(&self, vertices: &VertexSet) -> Graph {
        let ids = vertices.as_slice();
        let adj = ids
            .iter()
            .map(|&u| {
                self.adj[u]
                    .iter()
                    .filter_map(|v| ids.binary_search(v).ok())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            n: ids.len(),
            adj,
            edge_count,
        }
    }
}

impl Default for Graph {
    fn default() -> Self {
        Graph::empty(0)
    }
}

impl VertexSet {
    /// Validates that `ids` is sorted, distinct and below `n`.
    pub fn new(ids: Vec<usize>, n: usize) -> Result<Self, GraphError> {
        if let Some(&id) = ids.iter().find(|&&id| id >= n) {
            return Err(GraphError::OutOfRange { id, n });
        }
        if let Some(w) = ids.windows(2).find(|w| w[0] >= w[1]) {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("vertex set not strictly ascending at {}", w[1]),
            });
        }
        Ok(Self(ids))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.iter().filter(|&v| !other.contains(v)).collect()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut ids: Vec<usize> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Girth::Infinite)
    }

    /// `girth >= bound`; an infinite girth exceeds every real bound.
    pub fn at_least(self, bound: f64) -> bool {
        match self {
            Girth::Finite(g) => g as f64 >= bound,
            Girth::Infinite => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("infinite"),
        }
    }
}

// Finite girths serialise as integers, infinite girth as the string "infinite".
impl Serialize for Girth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Girth::Finite(g) => s.serialize_u64(*g as u64),
            Girth::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Girth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(g) => Ok(Girth::Finite(g as usize)),
            Raw::Str(s) if s == "infinite" => Ok(Girth::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid girth {s:?}"))),
        }
    }
}

/// The Petersen graph: outer 5-cycle `0..5`, spokes `i -- i+5`, inner
/// pentagram on `5..10`.
pub fn petersen() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::new(10, &edges).expect("petersen edge list is simple")
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<Edge> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    Graph::new(n, &edges).expect("complete graph edge list is simple")
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<Edge> = (0..n)
        .map(|i| (i.min((i + 1) % n), i.max((i + 1) % n)))
        .collect();
    Graph::new(n, &edges).expect("cycle needs n >= 3")
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<Edge> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges).expect("path edge list is simple")
}
