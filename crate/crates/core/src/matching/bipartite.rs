//! Hopcroft–Karp maximum bipartite matching.

use std::collections::VecDeque;

use crate::graph::{Edge, VertexSet};

const NONE: usize = usize::MAX;

/// Outcome of a left-saturating matching search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BipartiteOutcome {
    /// `(left, right)` pairs, one per left vertex, in ascending left order.
    Saturating(Vec<Edge>),
    /// No matching saturates `left`; `hall_violator` is a set of left
    /// vertices with fewer than `|hall_violator|` neighbours.
    Deficient {
        matched: usize,
        hall_violator: VertexSet,
        neighbourhood: VertexSet,
    },
}

/// Maximum matching between `left` and `right` over `edges`, each given as
/// `(left_vertex, right_vertex)` in the caller's id space. Left vertices are
/// scanned in the given order and their candidate lists in edge order, so
/// the result is deterministic.
pub fn hopcroft_karp(left: &[usize], right: &[usize], edges: &[Edge]) -> BipartiteOutcome {
    let lpos = |v: usize| left.iter().position(|&x| x == v);
    let rpos = |v: usize| right.iter().position(|&x| x == v);
    let mut adj = vec![Vec::new(); left.len()];
    for &(a, b) in edges {
        if let (Some(i), Some(j)) = (lpos(a), rpos(b)) {
            if !adj[i].contains(&j) {
                adj[i].push(j);
            }
        }
    }

    let (nl, nr) = (left.len(), right.len());
    let mut match_l = vec![NONE; nl];
    let mut match_r = vec![NONE; nr];
    let mut dist = vec![0usize; nl];

    loop {
        // Layered BFS from free left vertices.
        let mut queue = VecDeque::new();
        for i in 0..nl {
            if match_l[i] == NONE {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_r[j];
                if k == NONE {
                    found = true;
                } else if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        for i in 0..nl {
            if match_l[i] == NONE {
                augment(i, &adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }

    let matched = match_l.iter().filter(|&&m| m != NONE).count();
    if matched == nl {
        let mut pairs: Vec<Edge> = (0..nl).map(|i| (left[i], right[match_l[i]])).collect();
        pairs.sort_unstable();
        return BipartiteOutcome::Saturating(pairs);
    }

    // König: left vertices reachable from a free left vertex by alternating
    // paths form a Hall violator.
    let mut seen_l = vec![false; nl];
    let mut seen_r = vec![false; nr];
    let mut queue: VecDeque<usize> = (0..nl).filter(|&i| match_l[i] == NONE).collect();
    for &i in &queue {
        seen_l[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen_r[j] {
                seen_r[j] = true;
                let k = match_r[j];
                if k != NONE && !seen_l[k] {
                    seen_l[k] = true;
                    queue.push_back(k);
                }
            }
        }
    }
    BipartiteOutcome::Deficient {
        matched,
        hall_violator: (0..nl).filter(|&i| seen_l[i]).map(|i| left[i]).collect(),
        neighbourhood: (0..nr).filter(|&j| seen_r[j]).map(|j| right[j]).collect(),
    }
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for idx in 0..adj[i].len() {
        let j = adj[i][idx];
        let k = match_r[j];
        if k == NONE || (dist[k] == dist[i] + 1 && augment(k, adj, match_l, match_r, dist)) {
            match_l[i] = j;
            match_r[j] = i;
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

/// Saturating matching of `left` into `right`, or `None`.
pub fn bipartite_perfect_matching(
    left: &VertexSet,
    right: &VertexSet,
    edges: &[Edge],
) -> Option<Vec<Edge>> {
    match hopcroft_karp(left.as_slice(), right.as_slice(), edges) {
        BipartiteOutcome::Saturating(m) => Some(m),
        BipartiteOutcome::Deficient { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k33() {
        let left: VertexSet = [0, 1, 2].into_iter().collect();
        let right: VertexSet = [3, 4, 5].into_iter().collect();
        let edges: Vec<Edge> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        let m = bipartite_perfect_matching(&left, &right, &edges).unwrap();
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn isolated_left_vertex() {
        let left: Vec<usize> = vec![0, 1];
        let right: Vec<usize> = vec![2, 3];
        match hopcroft_karp(&left, &right, &[(0, 2), (0, 3)]) {
            BipartiteOutcome::Deficient {
                matched,
                hall_violator,
                neighbourhood,
            } => {
                assert_eq!(matched, 1);
                assert!(hall_violator.contains(1));
                assert!(neighbourhood.len() < hall_violator.len());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hall_violator_on_shared_neighbour() {
        // Left {0,1,2} all see only {3,4}.
        let edges = [(0, 3), (1, 3), (1, 4), (2, 4)];
        match hopcroft_karp(&[0, 1, 2], &[3, 4, 5], &edges) {
            BipartiteOutcome::Deficient {
                hall_violator,
                neighbourhood,
                ..
            } => {
                assert_eq!(hall_violator.len(), 3);
                assert_eq!(neighbourhood.as_slice(), &[3, 4]);
            }
            other => panic!("{other:?}"),
        }
    }
}
