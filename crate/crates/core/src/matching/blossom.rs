//! Maximum-cardinality matching in general graphs via Edmonds' blossom
//! contraction, O(n³).

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

const NONE: usize = usize::MAX;

/// Scan order for the search. `None` keeps ascending ids; a seed permutes
/// vertices and neighbour lists to sample a different matching.
fn scan_order(g: &Graph, seed: Option<u64>) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut adj: Vec<Vec<usize>> = (0..n).map(|u| g.neighbors(u).to_vec()).collect();
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        for list in &mut adj {
            list.shuffle(&mut rng);
        }
    }
    (order, adj)
}

struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        let n = adj.len();
        Self {
            adj,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn greedy(&mut self, order: &[usize]) {
        for &u in order {
            if self.mate[u] != NONE {
                continue;
            }
            if let Some(&v) = self.adj[u].iter().find(|&&v| self.mate[v] == NONE) {
                self.mate[u] = v;
                self.mate[v] = u;
            }
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Grows an alternating tree from `root`; returns the free vertex that
    /// ends an augmenting path, if any.
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for i in 0..self.adj[v].len() {
                let to = self.adj[v][i];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for w in 0..n {
                        if self.in_blossom[self.base[w]] {
                            self.base[w] = cur;
                            if !self.used[w] {
                                self.used[w] = true;
                                self.queue.push_back(w);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let m = self.mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

/// Mate array of a maximum matching (`None` for unmatched vertices).
pub fn maximum_matching(g: &Graph, seed: Option<u64>) -> Vec<Option<usize>> {
    let (order, adj) = scan_order(g, seed);
    let mut b = Blossom::new(&adj);
    b.greedy(&order);
    for &u in &order {
        if b.mate[u] == NONE {
            if let Some(end) = b.find_path(u) {
                b.augment(end);
            }
        }
    }
    b.mate
        .into_iter()
        .map(|m| (m != NONE).then_some(m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, petersen};

    fn size(mate: &[Option<usize>]) -> usize {
        mate.iter().filter(|m| m.is_some()).count() / 2
    }

    #[test]
    fn known_sizes() {
        assert_eq!(size(&maximum_matching(&complete(4), None)), 2);
        assert_eq!(size(&maximum_matching(&complete(5), None)), 2);
        assert_eq!(size(&maximum_matching(&petersen(), None)), 5);
        assert_eq!(size(&maximum_matching(&cycle(7), None)), 3);
        for seed in 0..20 {
            assert_eq!(size(&maximum_matching(&petersen(), Some(seed))), 5);
        }
    }

    #[test]
    fn blossom_needed() {
        // Triangle 0-1-2 with pendant 3 on 0 and pendant 4 on 2 (via 1-2
        // greedy trap): maximum matching has size 2 and greedy from the
        // ascending order would already find it, so add a longer tail.
        let g = Graph::new(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (0, 5)]).unwrap();
        assert_eq!(size(&maximum_matching(&g, None)), 3);
    }
}
