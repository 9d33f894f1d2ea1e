//! Tree surgery on a `(d+1)`-regular host graph `H`.
//!
//! The depth-`r` ball around a root `u` is a `d`-ary tree `T1` with leaf set
//! `L1`. A matching `M ⊆ E(H)` pairs `L1` with a set `L2` at distance
//! `r + 1`. After deleting `M`, a fresh `d`-ary tree `T2` is glued onto `L1`
//! (its leaf bijection searched so that `T1 ∪ T2` has large girth) and a
//! second fresh tree `T3` is glued onto `L2`, restoring every degree.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::Check;
use crate::error::GraphError;
use crate::graph::{Edge, Girth, Graph, VertexSet};
use crate::matching::{hopcroft_karp, BipartiteOutcome, Matching};

pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurgeryError {
    #[error("host graph is not regular")]
    NotRegular,
    #[error("host graph must be (d+1)-regular with d >= 2, got degree {0}")]
    DegreeTooSmall(usize),
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("root {root} out of range for {n} vertices")]
    BadRoot { root: usize, n: usize },
    #[error("girth(H) = {girth} does not exceed 4r = {}", 4 * radius)]
    GirthTooSmall { girth: Girth, radius: usize },
    #[error("ball of radius {radius} around {root} is not a tree")]
    BallNotTree { root: usize, radius: usize },
    #[error("expected {expected} leaves at distance {radius}, found {found}")]
    LeafCount {
        expected: usize,
        found: usize,
        radius: usize,
    },
    #[error(
        "no matching saturates L1: {hall_violator:?} sees only {neighbourhood:?} at distance r+1"
    )]
    NoSaturatingMatching {
        hall_violator: VertexSet,
        neighbourhood: VertexSet,
    },
    #[error("pairing search exhausted after {} attempts: best girth {} < target {}", state.attempts, state.best_girth_found, state.target)]
    PairingSearchExhausted { state: PairingSearchState },
    #[error("leaf set has {found} vertices, tree needs {expected}")]
    LeafSetSize { expected: usize, found: usize },
    #[error("step {step}: {source}")]
    Graph {
        step: &'static str,
        #[source]
        source: GraphError,
    },
}

fn graph_step(step: &'static str) -> impl FnOnce(GraphError) -> SurgeryError {
    move |source| SurgeryError::Graph { step, source }
}

/// `(d+1) d^(r-1)`, the leaf count of a depth-`r` `d`-ary tree.
pub fn leaf_count(d: usize, r: usize) -> usize {
    (d + 1) * d.pow(r as u32 - 1)
}

/// `1 + Σ_{1 ≤ l ≤ r−1} (d+1) d^(l−1)`, summed term by term.
pub fn internal_count(d: usize, r: usize) -> usize {
    1 + (1..r).map(|l| (d + 1) * d.pow(l as u32 - 1)).sum::<usize>()
}

/// `⌈2 log_{2d−1}((d+1) d^(r−1))⌉`.
pub fn pairing_girth_target(d: usize, r: usize) -> usize {
    let x = 2.0 * (leaf_count(d, r) as f64).ln() / ((2 * d - 1) as f64).ln();
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Shape of an abstract `d`-ary tree of depth `r`: internal vertices are
/// numbered `0..internal` in BFS order (root 0), and leaf slot `i` hangs off
/// internal vertex `leaf_parent[i]`.
struct TreeShape {
    internal: usize,
    internal_edges: Vec<Edge>,
    leaf_parent: Vec<usize>,
}

impl TreeShape {
    fn new(d: usize, r: usize) -> Self {
        let mut internal_edges = Vec::new();
        let mut level: Vec<usize> = vec![0];
        let mut next = 1;
        for depth in 1..r {
            let mut below = Vec::new();
            for &v in &level {
                let children = if depth == 1 { d + 1 } else { d };
                for _ in 0..children {
                    internal_edges.push((v, next));
                    below.push(next);
                    next += 1;
                }
            }
            level = below;
        }
        let per_parent = if r == 1 { d + 1 } else { d };
        let leaf_parent = level
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, per_parent))
            .collect();
        Self {
            internal: next,
            internal_edges,
            leaf_parent,
        }
    }

    /// Edges with internals relabelled from `offset` and leaf slot `i`
    /// attached to `leaves[i]`.
    fn edges(&self, offset: usize, leaves: &[usize]) -> Vec<Edge> {
        self.internal_edges
            .iter()
            .map(|&(a, b)| (a + offset, b + offset))
            .chain(
                self.leaf_parent
                    .iter()
                    .zip(leaves)
                    .map(|(&p, &leaf)| (leaf, p + offset)),
            )
            .collect()
    }
}

/// `T1`: the tree induced by the radius-`r` ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallTree {
    pub root: usize,
    pub radius: usize,
    pub edges: Vec<Edge>,
    pub vertices: VertexSet,
    /// `L1`, the sphere of radius `r`.
    pub leaves: VertexSet,
    /// `V1 = V(T1) ∖ L1`.
    pub interior: VertexSet,
}

fn host_degree(h: &Graph) -> Result<usize, SurgeryError> {
    let degree = h.regular_degree().ok_or(SurgeryError::NotRegular)?;
    if degree < 3 {
        return Err(SurgeryError::DegreeTooSmall(degree));
    }
    Ok(degree - 1)
}

/// Extracts `T1` after checking `girth(H) > 4r`.
pub fn extract_ball_tree(h: &Graph, u: usize, r: usize) -> Result<BallTree, SurgeryError> {
    let girth = h.girth();
    extract_ball_tree_with_girth(h, u, r, girth)
}

fn extract_ball_tree_with_girth(
    h: &Graph,
    u: usize,
    r: usize,
    girth: Girth,
) -> Result<BallTree, SurgeryError> {
    let d = host_degree(h)?;
    if r == 0 {
        return Err(SurgeryError::ZeroRadius);
    }
    if u >= h.vertex_count() {
        return Err(SurgeryError::BadRoot {
            root: u,
            n: h.vertex_count(),
        });
    }
    if !girth.at_least((4 * r + 1) as f64) {
        return Err(SurgeryError::GirthTooSmall { girth, radius: r });
    }
    let vertices = h.ball(u, r);
    let edges: Vec<Edge> = vertices
        .iter()
        .flat_map(|a| {
            h.neighbors(a)
                .iter()
                .filter(move |&&b| b > a)
                .map(move |&b| (a, b))
        })
        .filter(|&(_, b)| vertices.contains(b))
        .collect();
    if edges.len() + 1 != vertices.len() {
        return Err(SurgeryError::BallNotTree { root: u, radius: r });
    }
    let leaves = h.sphere(u, r);
    let expected = leaf_count(d, r);
    if leaves.len() != expected {
        return Err(SurgeryError::LeafCount {
            expected,
            found: leaves.len(),
            radius: r,
        });
    }
    let interior = vertices.difference(&leaves);
    Ok(BallTree {
        root: u,
        radius: r,
        edges,
        vertices,
        leaves,
        interior,
    })
}

/// Chooses `L2 ⊆ sphere(u, r+1)` and a matching `M ⊆ E(H)` saturating `L1`.
///
/// `L1` is scanned in ascending order, or in a seeded permutation.
pub fn select_l2_and_matching(
    h: &Graph,
    l1: &VertexSet,
    u: usize,
    r: usize,
    seed: Option<u64>,
) -> Result<(VertexSet, Matching), SurgeryError> {
    let outer = h.sphere(u, r + 1);
    let mut left: Vec<usize> = l1.iter().collect();
    if let Some(seed) = seed {
        left.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let edges: Vec<Edge> = left
        .iter()
        .flat_map(|&a| {
            h.neighbors(a)
                .iter()
                .filter(|&&b| outer.contains(b))
                .map(move |&b| (a, b))
        })
        .collect();
    match hopcroft_karp(&left, outer.as_slice(), &edges) {
        BipartiteOutcome::Saturating(pairs) => {
            let l2: VertexSet = pairs.iter().map(|&(_, b)| b).collect();
            Ok((l2, Matching::new(pairs)))
        }
        BipartiteOutcome::Deficient {
            hall_violator,
            neighbourhood,
            ..
        } => Err(SurgeryError::NoSaturatingMatching {
            hall_violator,
            neighbourhood,
        }),
    }
}

/// Progress of the randomized leaf-bijection search for `T2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingSearchState {
    pub attempts: usize,
    pub max_attempts: usize,
    pub best_girth_found: Girth,
    pub target: usize,
    pub seed: u64,
    /// Leaf set in tree-slot order for the best bijection seen.
    pub best_bijection: Vec<usize>,
    pub succeeded: bool,
}

impl PairingSearchState {
    pub fn new(target: usize, seed: u64, max_attempts: usize) -> Self {
        Self {
            attempts: 0,
            max_attempts,
            best_girth_found: Girth::Finite(0),
            target,
            seed,
            best_bijection: Vec::new(),
            succeeded: false,
        }
    }
}

/// Glues a fresh depth-`r` `d`-ary tree onto `leafset`.
///
/// With a `search`, leaf bijections are tried (identity first, then seeded
/// shuffles) until the subgraph induced on `region ∪ V(tree)` has girth at
/// least `search.target`. Without one, the identity bijection is used.
/// Returns the new graph and the tree's vertex set (fresh internals plus
/// leaves).
pub fn attach_tree_with_girth_target(
    g_partial: &Graph,
    leafset: &VertexSet,
    d: usize,
    r: usize,
    region: &VertexSet,
    search: Option<&mut PairingSearchState>,
) -> Result<(Graph, VertexSet), SurgeryError> {
    let shape = TreeShape::new(d, r);
    if leafset.len() != shape.leaf_parent.len() {
        return Err(SurgeryError::LeafSetSize {
            expected: shape.leaf_parent.len(),
            found: leafset.len(),
        });
    }
    let offset = g_partial.vertex_count();
    let fresh = offset..offset + shape.internal;
    let tree_vertices: VertexSet = fresh.clone().chain(leafset.iter()).collect();

    let leaves: Vec<usize> = match search {
        None => leafset.iter().collect(),
        Some(state) => {
            let base = g_partial.induced_subgraph(region);
            let region_ids = region.as_slice();
            let mut rng = ChaCha8Rng::seed_from_u64(state.seed);
            let mut order: Vec<usize> = leafset.iter().collect();
            loop {
                if state.attempts >= state.max_attempts {
                    return Err(SurgeryError::PairingSearchExhausted {
                        state: state.clone(),
                    });
                }
                if state.attempts > 0 {
                    order.shuffle(&mut rng);
                }
                state.attempts += 1;
                let girth = union_girth(&base, region_ids, &shape, &order)?;
                if state.best_bijection.is_empty() || girth > state.best_girth_found {
                    state.best_girth_found = girth;
                    state.best_bijection = order.clone();
                }
                if girth.at_least(state.target as f64) {
                    state.succeeded = true;
                    break order;
                }
            }
        }
    };
    let g = g_partial
        .add_tree_vertices(shape.internal, &shape.edges(offset, &leaves))
        .map_err(graph_step("attach tree"))?;
    Ok((g, tree_vertices))
}

/// Girth of the region graph with the tree glued on via `leaves`; the
/// leaves must lie inside the region.
fn union_girth(
    base: &Graph,
    region_ids: &[usize],
    shape: &TreeShape,
    leaves: &[usize],
) -> Result<Girth, SurgeryError> {
    let local: Vec<usize> = leaves
        .iter()
        .map(|v| {
            region_ids
                .binary_search(v)
                .expect("leaves lie in the region")
        })
        .collect();
    let union = base
        .add_tree_vertices(shape.internal, &shape.edges(base.vertex_count(), &local))
        .map_err(graph_step("pairing girth check"))?;
    Ok(union.girth())
}

/// Output of the full surgery together with all bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryResult {
    #[serde(skip)]
    pub graph: Graph,
    pub root: usize,
    pub radius: usize,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub girth_h: Girth,
    /// `r / log_d(n)`.
    pub alpha_effective: f64,
    pub l1: VertexSet,
    pub l2: VertexSet,
    pub v1: VertexSet,
    pub matching: Matching,
    pub t1_vertices: VertexSet,
    pub t2_vertices: VertexSet,
    pub t3_vertices: VertexSet,
    pub s_gadget: VertexSet,
    pub pairing: PairingSearchState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurgeryOptions {
    pub seed: u64,
    pub max_attempts: usize,
    /// Permute the `L1` scan when selecting `L2`.
    pub shuffle_l2: bool,
}

impl Default for SurgeryOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            shuffle_l2: false,
        }
    }
}

/// Runs the whole surgery on `h` at root `u` and radius `r`.
pub fn construct(
    h: &Graph,
    u: usize,
    r: usize,
    opts: &SurgeryOptions,
) -> Result<SurgeryResult, SurgeryError> {
    let d = host_degree(h)?;
    let n = h.vertex_count();
    let girth_h = h.girth();
    let t1 = extract_ball_tree_with_girth(h, u, r, girth_h)?;
    let l2_seed = opts.shuffle_l2.then_some(opts.seed);
    let (l2, matching) = select_l2_and_matching(h, &t1.leaves, u, r, l2_seed)?;

    let without_m = h
        .remove_edges(matching.edges())
        .map_err(graph_step("remove matching"))?;
    let mut pairing =
        PairingSearchState::new(pairing_girth_target(d, r), opts.seed, opts.max_attempts);
    let (with_t2, t2_vertices) = attach_tree_with_girth_target(
        &without_m,
        &t1.leaves,
        d,
        r,
        &t1.vertices,
        Some(&mut pairing),
    )?;
    let (graph, t3_vertices) =
        attach_tree_with_girth_target(&with_t2, &l2, d, r, &VertexSet::default(), None)?;

    let s_gadget = t1
        .vertices
        .union(&t2_vertices)
        .union(&t3_vertices)
        .union(&l2);
    Ok(SurgeryResult {
        m: graph.vertex_count(),
        graph,
        root: u,
        radius: r,
        d,
        n,
        girth_h,
        alpha_effective: r as f64 / ((n as f64).ln() / (d as f64).ln()),
        l1: t1.leaves,
        l2,
        v1: t1.interior,
        matching,
        t1_vertices: t1.vertices,
        t2_vertices,
        t3_vertices,
        s_gadget,
        pairing,
    })
}

/// Largest `r` with `4r < girth(H)` (0 when none).
pub fn max_feasible_radius(girth: Girth) -> Option<usize> {
    match girth {
        Girth::Finite(g) => Some(g.saturating_sub(1) / 4),
        Girth::Infinite => None,
    }
}

/// Whether all pairwise distances within `set`, measured in `h` with the
/// vertices of `removed` deleted, exceed `bound`. Returns the smallest
/// distance seen (`None` when all pairs are disconnected).
pub fn min_pairwise_distance_avoiding(
    h: &Graph,
    set: &VertexSet,
    removed: &VertexSet,
) -> Option<usize> {
    set.iter()
        .filter_map(|a| {
            let dist = h.distances_avoiding(a, removed.as_slice());
            set.iter().filter(|&b| b != a).filter_map(|b| dist[b]).min()
        })
        .min()
}

impl SurgeryResult {
    /// Structural invariants: regularity, vertex count, matching placement,
    /// freshness and the distance property within `L1` in `H ∖ V1`.
    pub fn structural_checks(&self, h: &Graph) -> Vec<Check> {
        let d = self.d;
        let r = self.radius;
        let leaves = leaf_count(d, r);
        let internal = internal_count(d, r);
        let expected_m = self.n + 2 * internal;
        let g = &self.graph;

        let fresh2: VertexSet = self.t2_vertices.iter().filter(|&v| v >= self.n).collect();
        let fresh3: VertexSet = self.t3_vertices.iter().filter(|&v| v >= self.n).collect();
        let matching_between = self.matching.edges().iter().all(|&(a, b)| {
            (self.l1.contains(a) && self.l2.contains(b))
                || (self.l1.contains(b) && self.l2.contains(a))
        }) && self.matching.len() == leaves;

        let l1_dist = min_pairwise_distance_avoiding(h, &self.l1, &self.v1);
        let as_f = |x: Option<usize>| x.map_or(f64::INFINITY, |x| x as f64);

        let s_bound = 4 * leaves + 2 * internal;
        vec![
            Check::flag("G is (d+1)-regular", g.regular_degree() == Some(d + 1)),
            Check::eq(
                "m = n + 2 (1 + sum (d+1) d^(l-1))",
                self.m as f64,
                expected_m as f64,
                0.0,
            ),
            Check::eq(
                "|L1| = (d+1) d^(r-1)",
                self.l1.len() as f64,
                leaves as f64,
                0.0,
            ),
            Check::eq(
                "|L2| = (d+1) d^(r-1)",
                self.l2.len() as f64,
                leaves as f64,
                0.0,
            ),
            Check::flag(
                "M is a perfect matching between L1 and L2",
                matching_between,
            ),
            Check::flag("M is contained in E(H)", self.matching.is_valid_in(h)),
            Check::flag(
                "M is disjoint from E(G)",
                self.matching
                    .edges()
                    .iter()
                    .all(|&(a, b)| !g.has_edge(a, b)),
            ),
            Check::flag(
                "T2, T3 internals fresh and disjoint",
                fresh2.len() == internal && fresh3.len() == internal && fresh2.is_disjoint(&fresh3),
            ),
            Check::gt(
                "min distance within L1 in H - V1 > 2r",
                as_f(l1_dist),
                2.0 * r as f64,
            ),
            Check::ge(
                "girth(T1 u T2) >= 2 log_(2d-1)((d+1) d^(r-1))",
                self.pairing
                    .best_girth_found
                    .finite()
                    .map_or(f64::INFINITY, |x| x as f64),
                2.0 * (leaves as f64).ln() / ((2 * d - 1) as f64).ln(),
                0.0,
            ),
            Check::le(
                "|S| <= 4 (d+1) d^(r-1) + 2 (fresh internals)",
                self.s_gadget.len() as f64,
                s_bound as f64,
                0.0,
            ),
        ]
    }

    /// The same distance property for `L2`. It needs more girth than the
    /// surgery requires and fails on small hosts such as Petersen.
    pub fn l2_distance_check(&self, h: &Graph) -> Check {
        let dist = min_pairwise_distance_avoiding(h, &self.l2, &self.v1);
        Check::gt(
            "min distance within L2 in H - V1 > 2r",
            dist.map_or(f64::INFINITY, |x| x as f64),
            2.0 * self.radius as f64,
        )
    }

    /// `|S| / m^alpha_effective`.
    pub fn gadget_ratio(&self) -> f64 {
        self.s_gadget.len() as f64 / (self.m as f64).powf(self.alpha_effective)
    }

    /// Exact girth of `G` against the surgery's girth lower bounds.
    pub fn check_girth_bound(&self) -> (Girth, Vec<Check>) {
        let girth = self.graph.girth();
        (
            girth,
            girth_bound_checks(
                girth,
                self.d,
                self.radius,
                self.n,
                self.m,
                self.alpha_effective,
            ),
        )
    }
}

pub fn girth_bound_checks(
    girth: Girth,
    d: usize,
    r: usize,
    n: usize,
    m: usize,
    alpha: f64,
) -> Vec<Check> {
    let log_base = ((2 * d - 1) as f64).ln();
    let g = girth.finite().map_or(f64::INFINITY, |g| g as f64);
    let leaves = leaf_count(d, r) as f64;
    let grown_n = (1.0 + 1.0 / d as f64) * n as f64;
    vec![
        Check::ge(
            "girth(G) >= 2 log_(2d-1)((d+1) d^(r-1))",
            g,
            2.0 * leaves.ln() / log_base,
            0.0,
        ),
        Check::ge(
            "girth(G) >= 2 alpha log_(2d-1)((1 + 1/d) n)",
            g,
            2.0 * alpha * grown_n.ln() / log_base,
            0.0,
        ),
        Check::ge(
            "girth(G) >= 2 alpha log_(2d-1)(m)",
            g,
            2.0 * alpha * (m as f64).ln() / log_base,
            0.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::petersen;

    #[test]
    fn counts() {
        assert_eq!(leaf_count(2, 1), 3);
        assert_eq!(leaf_count(2, 2), 6);
        assert_eq!(internal_count(2, 1), 1);
        assert_eq!(internal_count(2, 2), 4);
        assert_eq!(internal_count(3, 3), 1 + 4 + 12);
        assert_eq!(pairing_girth_target(2, 1), 2);
        // 2 log_25(14) = 1.64
        assert_eq!(pairing_girth_target(13, 1), 2);
    }

    #[test]
    fn tree_shape_is_d_ary() {
        for (d, r) in [(2, 1), (2, 2), (3, 3), (4, 2)] {
            let shape = TreeShape::new(d, r);
            assert_eq!(shape.internal, internal_count(d, r));
            assert_eq!(shape.leaf_parent.len(), leaf_count(d, r));
            let leaves: Vec<usize> = (0..leaf_count(d, r)).map(|i| shape.internal + i).collect();
            let total = shape.internal + leaves.len();
            let t = Graph::new(total, &shape.edges(0, &leaves)).unwrap();
            assert_eq!(t.girth(), Girth::Infinite);
            assert!(t.is_connected());
            for v in 0..shape.internal {
                assert_eq!(t.degree(v), d + 1);
            }
            for &l in &leaves {
                assert_eq!(t.degree(l), 1);
                assert_eq!(t.distances_from(0)[l], Some(r));
            }
        }
    }

    #[test]
    fn petersen_ball_tree() {
        let p = petersen();
        for u in 0..10 {
            let t = extract_ball_tree(&p, u, 1).unwrap();
            assert_eq!(t.leaves.len(), 3);
            assert_eq!(t.edges.len(), 3);
            assert_eq!(t.interior.as_slice(), &[u]);
        }
        assert!(matches!(
            extract_ball_tree(&p, 0, 2),
            Err(SurgeryError::GirthTooSmall { .. })
        ));
        assert!(matches!(
            extract_ball_tree(&p, 0, 0),
            Err(SurgeryError::ZeroRadius)
        ));
    }

    #[test]
    fn petersen_l2() {
        let p = petersen();
        let t = extract_ball_tree(&p, 0, 1).unwrap();
        let (l2, m) = select_l2_and_matching(&p, &t.leaves, 0, 1, None).unwrap();
        assert_eq!(l2.len(), 3);
        assert_eq!(m.len(), 3);
        assert!(m.is_valid_in(&p));
        let sphere2 = p.sphere(0, 2);
        assert!(l2.iter().all(|v| sphere2.contains(v)));
        // Tree-like ball: each leaf has exactly d = 2 neighbours at distance 2.
        for l in t.leaves.iter() {
            assert_eq!(
                p.neighbors(l)
                    .iter()
                    .filter(|&&x| sphere2.contains(x))
                    .count(),
                2
            );
        }
    }

    #[test]
    fn petersen_surgery() {
        let p = petersen();
        let res = construct(&p, 0, 1, &SurgeryOptions::default()).unwrap();
        assert_eq!(res.m, 12);
        assert_eq!(res.graph.regular_degree(), Some(3));
        assert!(res.pairing.succeeded);
        assert_eq!(res.pairing.attempts, 1);
        for c in res.structural_checks(&p) {
            assert!(c.pass, "{c:?}");
        }
        // Any two vertices of Petersen are within distance 2.
        assert!(!res.l2_distance_check(&p).pass);
        let (girth, bounds) = res.check_girth_bound();
        assert!(girth.finite().is_some());
        assert!(bounds[0].pass);
        assert_eq!(res.s_gadget.len(), 4 + 1 + 1 + 3);
    }

    #[test]
    fn leafset_mismatch() {
        let p = petersen();
        let leaves: VertexSet = [1, 2].into_iter().collect();
        assert!(matches!(
            attach_tree_with_girth_target(&p, &leaves, 2, 1, &VertexSet::default(), None),
            Err(SurgeryError::LeafSetSize {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn exhausted_search_reports_best() {
        // Unreachable target forces exhaustion.
        let p = petersen();
        let t = extract_ball_tree(&p, 0, 1).unwrap();
        let mut state = PairingSearchState::new(100, 7, 5);
        let err = attach_tree_with_girth_target(&p, &t.leaves, 2, 1, &t.vertices, Some(&mut state))
            .unwrap_err();
        match err {
            SurgeryError::PairingSearchExhausted { state } => {
                assert_eq!(state.attempts, 5);
                assert_eq!(state.best_girth_found, Girth::Finite(4));
                assert_eq!(state.best_bijection.len(), 3);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn max_radius() {
        assert_eq!(max_feasible_radius(Girth::Finite(6)), Some(1));
        assert_eq!(max_feasible_radius(Girth::Finite(4)), Some(0));
        assert_eq!(max_feasible_radius(Girth::Finite(9)), Some(2));
    }
}
