//! Removal of perfect matchings (1-factors) from regular graphs, with the
//! spectral sufficient condition for a 1-factor recorded as a certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::blossom::maximum_matching;
use crate::check::Check;
use crate::error::GraphError;
use crate::graph::{Edge, Girth, Graph};
use crate::spectral::{
    eigensystem, EigenOptions, EigenSystem, SpectralDiagnostics, SpectralError, RESIDUAL_TOL,
};

/// Pairwise vertex-disjoint edges `(u, v)` with `u < v`, ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching(Vec<Edge>);

impl Matching {
    /// Normalises orientation and order; does not validate disjointness.
    pub fn new(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut e: Vec<Edge> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        e.sort_unstable();
        Self(e)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Disjointness plus membership of every edge in `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        let mut used = vec![false; g.vertex_count()];
        for &(u, v) in &self.0 {
            if u == v || !g.has_edge(u, v) || used[u] || used[v] {
                return false;
            }
            used[u] = true;
            used[v] = true;
        }
        true
    }

    pub fn is_perfect_in(&self, g: &Graph) -> bool {
        self.is_valid_in(g) && 2 * self.0.len() == g.vertex_count()
    }
}

/// A perfect matching of `g`, or `None` when `g` has none.
///
/// With `seed = None` vertices are scanned in ascending order; a seed
/// permutes the scan to sample other 1-factors.
pub fn perfect_matching(g: &Graph, seed: Option<u64>) -> Option<Matching> {
    if g.vertex_count() % 2 == 1 {
        return None;
    }
    let mate = maximum_matching(g, seed);
    if mate.iter().any(Option::is_none) {
        return None;
    }
    Some(Matching::new(
        mate.iter()
            .enumerate()
            .filter_map(|(u, m)| m.filter(|&v| u < v).map(|v| (u, v))),
    ))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeelError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph has an odd number of vertices ({0})")]
    OddOrder(usize),
    #[error("d must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("target degree {target} exceeds current degree {degree}")]
    TargetTooLarge { target: usize, degree: usize },
    #[error(
        "no perfect matching at degree {degree}; lambda_3 = {lambda3:.6} vs threshold {threshold:.6} \
         (sufficient condition {}) after {} completed peels",
        if *certificate_ok { "held: inconsistent" } else { "failed as well" },
        trace.steps.len()
    )]
    NoPerfectMatching {
        degree: usize,
        lambda3: f64,
        threshold: f64,
        certificate_ok: bool,
        trace: Box<PeelTrace>,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Largest admissible `λ₃` guaranteeing a 1-factor in a `(d+1)`-regular
/// graph on an even number of vertices.
pub fn cgh_threshold(d: usize) -> Result<f64, PeelError> {
    let df = d as f64;
    match d {
        0 | 1 => Err(PeelError::DegreeTooSmall(d)),
        2 => Ok(2.85577),
        _ if d % 2 == 1 => Ok((df - 1.0 + ((df + 1.0).powi(2) + 12.0).sqrt()) / 2.0),
        _ => Ok((df - 2.0 + ((df + 2.0).powi(2) + 16.0).sqrt()) / 2.0),
    }
}

/// Spectral summary of one graph in a peel sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSnapshot {
    pub degree: usize,
    pub lambda: f64,
    pub lambda3: f64,
    pub girth: Girth,
}

impl SpectralSnapshot {
    pub fn of(g: &Graph, eig: &EigenSystem) -> Result<Self, PeelError> {
        let degree = g.regular_degree().ok_or(PeelError::NotRegular)?;
        Ok(Self {
            degree,
            lambda: eig.lambda_second(degree as f64)?,
            lambda3: eig.lambda_third()?,
            girth: g.girth(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeelStep {
    pub before: SpectralSnapshot,
    pub after: SpectralSnapshot,
    pub matching: Matching,
    /// Threshold for `λ₃(before)` at `d = before.degree − 1`; `None` when
    /// `d < 2`, where no threshold is defined.
    pub cgh_threshold: Option<f64>,
    pub certificate_ok: bool,
    /// Accuracy of the decomposition of the peeled graph.
    pub diagnostics: SpectralDiagnostics,
}

impl PeelStep {
    /// Weyl-step and monotonicity checks for this peel.
    pub fn checks(&self) -> Vec<Check> {
        let tol = RESIDUAL_TOL * self.before.degree as f64;
        vec![
            Check::le(
                "lambda(G - M) <= lambda(G) + 1",
                self.after.lambda,
                self.before.lambda + 1.0,
                tol,
            ),
            Check::le(
                "lambda3(G - M) <= lambda3(G) + 1",
                self.after.lambda3,
                self.before.lambda3 + 1.0,
                tol,
            ),
            Check::eq(
                "degree drops by one",
                self.after.degree as f64,
                self.before.degree as f64 - 1.0,
                0.0,
            ),
            Check::flag(
                "girth(G - M) >= girth(G)",
                self.after.girth >= self.before.girth,
            ),
        ]
    }

    /// The spectral sufficient condition for the matching that was removed.
    /// Only a certificate: a matching may exist without it.
    pub fn certificate_check(&self) -> Option<Check> {
        let tol = RESIDUAL_TOL * self.before.degree as f64;
        self.cgh_threshold
            .map(|t| Check::le("lambda3(G) <= CGH threshold", self.before.lambda3, t, tol))
    }
}

/// Record of an iterated peel. Degrees decrease by exactly one per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeelTrace {
    pub initial: SpectralSnapshot,
    pub steps: Vec<PeelStep>,
}

impl PeelTrace {
    pub fn final_snapshot(&self) -> SpectralSnapshot {
        self.steps.last().map_or(self.initial, |s| s.after)
    }

    pub fn is_well_formed(&self) -> bool {
        let mut prev = self.initial;
        for s in &self.steps {
            if s.before != prev || s.after.degree + 1 != s.before.degree {
                return false;
            }
            prev = s.after;
        }
        true
    }
}

pub struct PeelOutcome {
    pub graph: Graph,
    pub eigen: EigenSystem,
    pub step: PeelStep,
}

/// Removes one perfect matching from a regular graph whose spectrum is
/// already known. The spectral certificate is recorded but not required:
/// a found matching is authoritative.
pub fn peel_with_spectrum(
    g: &Graph,
    eig: &EigenSystem,
    seed: Option<u64>,
    opts: &EigenOptions,
) -> Result<PeelOutcome, PeelError> {
    let before = SpectralSnapshot::of(g, eig)?;
    peel_from_snapshot(
        g,
        before,
        seed,
        opts,
        &PeelTrace {
            initial: before,
            steps: vec![],
        },
    )
}

fn peel_from_snapshot(
    g: &Graph,
    before: SpectralSnapshot,
    seed: Option<u64>,
    opts: &EigenOptions,
    trace_so_far: &PeelTrace,
) -> Result<PeelOutcome, PeelError> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return Err(PeelError::OddOrder(n));
    }
    let threshold = before
        .degree
        .checked_sub(1)
        .and_then(|d| cgh_threshold(d).ok());
    let certificate_ok = threshold.is_some_and(|t| before.lambda3 <= t);
    let matching = perfect_matching(g, seed).ok_or_else(|| PeelError::NoPerfectMatching {
        degree: before.degree,
        lambda3: before.lambda3,
        threshold: threshold.unwrap_or(f64::NAN),
        certificate_ok,
        trace: Box::new(trace_so_far.clone()),
    })?;
    let graph = g.remove_edges(matching.edges())?;
    let eigen = eigensystem(&graph, opts)?;
    let after = SpectralSnapshot::of(&graph, &eigen)?;
    let diagnostics = eigen.diagnostics().clone();
    Ok(PeelOutcome {
        graph,
        eigen,
        step: PeelStep {
            before,
            after,
            matching,
            cgh_threshold: threshold,
            certificate_ok,
            diagnostics,
        },
    })
}

/// Removes one perfect matching from a `(d+1)`-regular graph.
pub fn peel_one_factor(
    g: &Graph,
    seed: Option<u64>,
    opts: &EigenOptions,
) -> Result<PeelOutcome, PeelError> {
    let eig = eigensystem(g, opts)?;
    peel_with_spectrum(g, &eig, seed, opts)
}

pub struct PeelResult {
    pub graph: Graph,
    pub eigen: EigenSystem,
    pub trace: PeelTrace,
}

/// Peels 1-factors until the graph is `(target_d + 1)`-regular.
///
/// Step `i` uses seed `seed + i` when a seed is given.
pub fn peel_to_degree(
    g: &Graph,
    target_d: usize,
    seed: Option<u64>,
    opts: &EigenOptions,
) -> Result<PeelResult, PeelError> {
    g.regular_degree().ok_or(PeelError::NotRegular)?;
    let eig = eigensystem(g, opts)?;
    peel_to_degree_with_spectrum(g, eig, target_d, seed, opts)
}

/// [`peel_to_degree`] for a graph whose spectrum is already known.
pub fn peel_to_degree_with_spectrum(
    g: &Graph,
    mut eigen: EigenSystem,
    target_d: usize,
    seed: Option<u64>,
    opts: &EigenOptions,
) -> Result<PeelResult, PeelError> {
    let degree = g.regular_degree().ok_or(PeelError::NotRegular)?;
    let target = target_d + 1;
    if target > degree {
        return Err(PeelError::TargetTooLarge { target, degree });
    }
    if g.vertex_count() % 2 == 1 && target < degree {
        return Err(PeelError::OddOrder(g.vertex_count()));
    }
    let initial = SpectralSnapshot::of(g, &eigen)?;
    let mut trace = PeelTrace {
        initial,
        steps: Vec::new(),
    };
    let mut graph = g.clone();
    while trace.final_snapshot().degree > target {
        let step_seed = seed.map(|s| s.wrapping_add(trace.steps.len() as u64));
        let out = peel_from_snapshot(&graph, trace.final_snapshot(), step_seed, opts, &trace)?;
        graph = out.graph;
        eigen = out.eigen;
        trace.steps.push(out.step);
    }
    Ok(PeelResult {
        graph,
        eigen,
        trace,
    })
}

/// Which seed-expander statement a peeled graph is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedBound {
    /// Consecutive primes `p_j < p_next` with `d ∈ [p_j, p_next]`.
    ConsecutivePrimes { p_j: u64, p_next: u64 },
    /// Prime `p` and anchor `t ≤ p` with `d ∈ [t, p]`.
    NearPrime { p: u64, t: u64 },
}

/// `5/(2√6) − 1 ≈ 0.0206`.
pub fn near_prime_gap_constant() -> f64 {
    5.0 / (2.0 * 6f64.sqrt()) - 1.0
}

/// Hypothesis and spectral-bound checks for the final graph of a peel,
/// which is `(d+1)`-regular.
pub fn check_prop_lambda_bounds(trace: &PeelTrace, bound: &SeedBound) -> Vec<Check> {
    let fin = trace.final_snapshot();
    let d = fin.degree.saturating_sub(1);
    let df = d as f64;
    let tol = RESIDUAL_TOL * fin.degree as f64;
    match *bound {
        SeedBound::ConsecutivePrimes { p_j, p_next } => vec![
            Check::lt(
                "p_(j+1) - p_j < p_j / 5",
                (p_next - p_j) as f64,
                p_j as f64 / 5.0,
            ),
            Check::flag("p_j <= d <= p_(j+1)", (p_j..=p_next).contains(&(d as u64))),
            Check::le(
                "lambda(H) <= (2/5) d + 2 sqrt(d)",
                fin.lambda,
                0.4 * df + 2.0 * df.sqrt(),
                tol,
            ),
        ],
        SeedBound::NearPrime { p, t } => vec![
            Check::lt(
                "p - t < (5/(2 sqrt 6) - 1) sqrt(t)",
                p as f64 - t as f64,
                near_prime_gap_constant() * (t as f64).sqrt(),
            ),
            Check::flag("t <= d <= p", (t..=p).contains(&(d as u64))),
            Check::le(
                "lambda(H) <= (5/sqrt 6) sqrt(d)",
                fin.lambda,
                5.0 / 6f64.sqrt() * df.sqrt(),
                tol,
            ),
        ],
    }
}

/// Girth lower bounds for the peeled graph `H` on `n` vertices:
/// `girth(H) ≥ (2/3)(log d / log p) log_d n` and the weaker form with
/// `log p_j` (or `log t`) in place of `log d`.
pub fn check_prop_girth_bounds(girth: Girth, d: usize, n: usize, bound: &SeedBound) -> Vec<Check> {
    let (top, low) = match *bound {
        SeedBound::ConsecutivePrimes { p_j, p_next } => (p_next, p_j),
        SeedBound::NearPrime { p, t } => (p, t),
    };
    let log_d_n = (n as f64).ln() / (d as f64).ln();
    let strong = 2.0 / 3.0 * (d as f64).ln() / (top as f64).ln() * log_d_n;
    let weak = 2.0 / 3.0 * (low as f64).ln() / (top as f64).ln() * log_d_n;
    let g = girth.finite().map_or(f64::INFINITY, |g| g as f64);
    vec![
        Check::ge("girth(H) >= (2/3)(log d / log p) log_d n", g, strong, 0.0),
        Check::ge("girth(H) >= (2/3)(log p_low / log p) log_d n", g, weak, 0.0),
    ]
}
