//! Independent reference implementations shared by the oracle and
//! acceptance suites.
#![allow(dead_code)]

use forge_core::graph::Graph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Shortest simple cycle by enumerating paths that start at their smallest
/// vertex, pruned at the best length found so far.
pub fn brute_girth(g: &Graph) -> Option<usize> {
    let a = adjacency(g);
    let n = a.len();
    let mut best = usize::MAX;
    let mut on_path = vec![false; n];
    fn extend(
        a: &[Vec<bool>],
        start: usize,
        last: usize,
        len: usize,
        on_path: &mut [bool],
        best: &mut usize,
    ) {
        if len >= *best {
            return;
        }
        for next in 0..a.len() {
            if !a[last][next] {
                continue;
            }
            if next == start && len >= 3 {
                *best = (*best).min(len);
            } else if next > start && !on_path[next] {
                on_path[next] = true;
                extend(a, start, next, len + 1, on_path, best);
                on_path[next] = false;
            }
        }
    }
    for s in 0..n {
        on_path[s] = true;
        extend(&a, s, s, 1, &mut on_path, &mut best);
        on_path[s] = false;
    }
    (best != usize::MAX).then_some(best)
}

pub fn brute_has_perfect_matching(a: &[Vec<bool>], used: &mut [bool]) -> bool {
    let Some(u) = used.iter().position(|&x| !x) else {
        return true;
    };
    used[u] = true;
    for v in u + 1..a.len() {
        if a[u][v] && !used[v] {
            used[v] = true;
            if brute_has_perfect_matching(a, used) {
                used[v] = false;
                used[u] = false;
                return true;
            }
            used[v] = false;
        }
    }
    used[u] = false;
    false
}

/// Eigenvalues by cyclic Jacobi rotations, ascending.
pub fn jacobi(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn dense(g: &Graph) -> Vec<Vec<f64>> {
    adjacency(g)
        .into_iter()
        .map(|row| row.into_iter().map(|b| f64::from(u8::from(b))).collect())
        .collect()
}
