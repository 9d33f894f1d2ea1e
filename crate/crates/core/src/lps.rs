//! Lubotzky–Phillips–Sarnak Cayley graphs `X^{p,q}` over `PSL(2, q)`.
//!
//! Vertices are the `q(q²−1)/2` elements of `PSL(2, q)`, realised as classes
//! of `GL(2, q)` matrices modulo scalars whose determinant is a nonzero
//! square. Each class is stored by its canonical representative: the matrix
//! scaled so that its first nonzero entry (row-major) equals 1. Vertex ids
//! follow the lexicographic order of canonical representatives.
//!
//! The `p + 1` generators come from the integer quaternions of norm `p`
//! with `a0 > 0` odd and `a1, a2, a3` even.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GraphError;
use crate::graph::Graph;

/// Moduli at or above this bound are rejected so that products of two
/// residues stay far below `u64::MAX`.
pub const MAX_MODULUS: u64 = 1 << 15;

/// Refuse to materialise more vertices than this.
pub const MAX_VERTICES: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpsError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{name} = {value} must be congruent to 1 mod 4")]
    NotOneModFour { name: &'static str, value: u64 },
    #[error("p and q must differ (both {0})")]
    EqualPrimes(u64),
    #[error("q = {q} must exceed 2*sqrt(p) = {bound:.4}")]
    ModulusTooSmall { q: u64, bound: f64 },
    #[error("q = {0} exceeds the supported modulus bound 2^15")]
    ModulusTooLarge(u64),
    #[error(
        "legendre({p}, {q}) = {symbol}: only the non-bipartite PSL case (symbol +1) is supported"
    )]
    NotQuadraticResidue { p: u64, q: u64, symbol: i8 },
    #[error("graph would have {0} vertices, above the supported maximum")]
    TooManyVertices(u64),
    #[error("generator {tuple:?} does not map into PSL(2, q)")]
    GeneratorOutsidePsl { tuple: [i64; 4] },
    #[error("generator images are not distinct non-identity elements (q too small for p?)")]
    DegenerateGenerators,
    #[error("expected {expected} generators, found {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Largest prime strictly below `n`.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..n).rev().find(|&k| is_prime(k))
}

/// Smallest prime strictly above `n`.
pub fn next_prime(n: u64) -> u64 {
    (n + 1..).find(|&k| is_prime(k)).unwrap()
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Legendre symbol `(a | q)` by Euler's criterion.
pub fn legendre(a: i64, q: u64) -> Result<i8, LpsError> {
    if q == 2 || !is_prime(q) {
        return Err(LpsError::NotPrime(q));
    }
    let r = a.rem_euclid(q as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    })
}

/// Smallest `x` with `x² ≡ −1 (mod q)`.
pub fn sqrt_minus_one(q: u64) -> Result<u64, LpsError> {
    if !is_prime(q) {
        return Err(LpsError::NotPrime(q));
    }
    if q % 4 != 1 {
        return Err(LpsError::NotOneModFour {
            name: "q",
            value: q,
        });
    }
    Ok((1..q)
        .find(|&x| x * x % q == q - 1)
        .expect("q = 1 mod 4 has sqrt(-1)"))
}

/// Integer quaternion `a0 + a1 i + a2 j + a3 k` of norm `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuaternionGenerator(pub [i64; 4]);

impl QuaternionGenerator {
    pub fn norm(&self) -> i64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn conjugate(&self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        Self([a0, -a1, -a2, -a3])
    }
}

/// All `(a0, a1, a2, a3)` with `a0 > 0` odd, the rest even, and squared
/// norm `p`, in ascending tuple order.
pub fn enumerate_generators(p: u64) -> Result<Vec<QuaternionGenerator>, LpsError> {
    if !is_prime(p) {
        return Err(LpsError::NotPrime(p));
    }
    if p % 4 != 1 {
        return Err(LpsError::NotOneModFour {
            name: "p",
            value: p,
        });
    }
    let p = p as i64;
    let bound = (p as f64).sqrt().floor() as i64;
    let mut out = Vec::new();
    for a0 in (1..=bound).step_by(2) {
        for a1 in (-bound..=bound).filter(|a| a % 2 == 0) {
            for a2 in (-bound..=bound).filter(|a| a % 2 == 0) {
                for a3 in (-bound..=bound).filter(|a| a % 2 == 0) {
                    if a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3 == p {
                        out.push(QuaternionGenerator([a0, a1, a2, a3]));
                    }
                }
            }
        }
    }
    if out.len() != p as usize + 1 {
        return Err(LpsError::GeneratorCount {
            expected: p as usize + 1,
            found: out.len(),
        });
    }
    Ok(out)
}

/// Validated `(p, q)` pair for the non-bipartite LPS construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsParams {
    pub p: u64,
    pub q: u64,
    pub i_sqrt: u64,
}

impl LpsParams {
    pub fn new(p: u64, q: u64) -> Result<Self, LpsError> {
        for v in [p, q] {
            if !is_prime(v) {
                return Err(LpsError::NotPrime(v));
            }
        }
        if p % 4 != 1 {
            return Err(LpsError::NotOneModFour {
                name: "p",
                value: p,
            });
        }
        if q % 4 != 1 {
            return Err(LpsError::NotOneModFour {
                name: "q",
                value: q,
            });
        }
        if p == q {
            return Err(LpsError::EqualPrimes(p));
        }
        if q >= MAX_MODULUS {
            return Err(LpsError::ModulusTooLarge(q));
        }
        let bound = 2.0 * (p as f64).sqrt();
        if (q as f64) <= bound {
            return Err(LpsError::ModulusTooSmall { q, bound });
        }
        let symbol = legendre(p as i64, q)?;
        if symbol != 1 {
            return Err(LpsError::NotQuadraticResidue { p, q, symbol });
        }
        let n = q * (q * q - 1) / 2;
        if n > MAX_VERTICES {
            return Err(LpsError::TooManyVertices(n));
        }
        Ok(Self {
            p,
            q,
            i_sqrt: sqrt_minus_one(q)?,
        })
    }

    /// `|PSL(2, q)| = q(q² − 1)/2`.
    pub fn vertex_count(&self) -> usize {
        (self.q * (self.q * self.q - 1) / 2) as usize
    }

    pub fn degree(&self) -> usize {
        self.p as usize + 1
    }
}

/// Row-major 2×2 matrix over `F_q`.
type Mat2 = [u64; 4];

struct ProjectiveGroup {
    q: u64,
    inverses: Vec<u64>,
    is_square: Vec<bool>,
}

impl ProjectiveGroup {
    fn new(q: u64) -> Self {
        let mut inverses = vec![0; q as usize];
        for x in 1..q {
            inverses[x as usize] = pow_mod(x, q - 2, q);
        }
        let mut is_square = vec![false; q as usize];
        for x in 1..q {
            is_square[(x * x % q) as usize] = true;
        }
        Self {
            q,
            inverses,
            is_square,
        }
    }

    /// Scales so the first nonzero entry is 1. `None` for the zero matrix.
    fn canonical(&self, m: Mat2) -> Option<Mat2> {
        let lead = *m.iter().find(|&&x| x != 0)?;
        let inv = self.inverses[lead as usize];
        Some(m.map(|x| x * inv % self.q))
    }

    fn det(&self, m: Mat2) -> u64 {
        let q = self.q;
        (m[0] * m[3] % q + q - m[1] * m[2] % q) % q
    }

    fn in_psl(&self, m: Mat2) -> bool {
        self.is_square[self.det(m) as usize]
    }

    fn mul(&self, a: Mat2, b: Mat2) -> Mat2 {
        let q = self.q;
        [
            (a[0] * b[0] + a[1] * b[2]) % q,
            (a[0] * b[1] + a[1] * b[3]) % q,
            (a[2] * b[0] + a[3] * b[2]) % q,
            (a[2] * b[1] + a[3] * b[3]) % q,
        ]
    }

    /// Canonical representatives of `PSL(2, q)` in lexicographic order.
    fn elements(&self) -> Vec<Mat2> {
        let q = self.q;
        let mut out = Vec::with_capacity((q * (q * q - 1) / 2) as usize);
        // Leading zero: (0, 1, c, d) with det = -c.
        for c in 0..q {
            for d in 0..q {
                let m = [0, 1, c, d];
                if self.in_psl(m) {
                    out.push(m);
                }
            }
        }
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let m = [1, b, c, d];
                    if self.in_psl(m) {
                        out.push(m);
                    }
                }
            }
        }
        out
    }

    fn key(&self, m: Mat2) -> u64 {
        let q = self.q;
        ((m[0] * q + m[1]) * q + m[2]) * q + m[3]
    }
}

/// Image of a quaternion in `PGL(2, q)`: `[[a0 + i a1, a2 + i a3], [−a2 + i a3, a0 − i a1]]`.
fn generator_matrix(g: &QuaternionGenerator, params: &LpsParams) -> Mat2 {
    let q = params.q as i64;
    let i = params.i_sqrt as i64;
    let [a0, a1, a2, a3] = g.0;
    let r = |x: i64| x.rem_euclid(q) as u64;
    [
        r(a0 + i * a1),
        r(a2 + i * a3),
        r(-a2 + i * a3),
        r(a0 - i * a1),
    ]
}

/// Sidecar metadata written next to a constructed LPS graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpsSidecar {
    pub p: u64,
    pub q: u64,
    pub n: usize,
    pub degree: usize,
    pub i_sqrt: u64,
    pub generator_tuples: Vec<[i64; 4]>,
}

impl LpsSidecar {
    pub fn new(params: &LpsParams, generators: &[QuaternionGenerator]) -> Self {
        Self {
            p: params.p,
            q: params.q,
            n: params.vertex_count(),
            degree: params.degree(),
            i_sqrt: params.i_sqrt,
            generator_tuples: generators.iter().map(|g| g.0).collect(),
        }
    }
}

/// Builds the `(p+1)`-regular Cayley graph of `PSL(2, q)`.
pub fn build_lps_graph(params: &LpsParams) -> Result<Graph, LpsError> {
    let generators = enumerate_generators(params.p)?;
    let group = ProjectiveGroup::new(params.q);
    let mut images = Vec::with_capacity(generators.len());
    for g in &generators {
        let m = group
            .canonical(generator_matrix(g, params))
            .filter(|&m| group.in_psl(m))
            .ok_or(LpsError::GeneratorOutsidePsl { tuple: g.0 })?;
        images.push(m);
    }
    let mut distinct = images.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != images.len() || distinct.contains(&[1, 0, 0, 1]) {
        return Err(LpsError::DegenerateGenerators);
    }

    let elements = group.elements();
    debug_assert_eq!(elements.len(), params.vertex_count());
    let index: HashMap<u64, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, &m)| (group.key(m), i))
        .collect();

    let adj: Vec<Vec<usize>> = elements
        .par_iter()
        .map(|&x| {
            images
                .iter()
                .map(|&s| {
                    let y = group
                        .canonical(group.mul(x, s))
                        .expect("product of invertibles");
                    index[&group.key(y)]
                })
                .collect()
        })
        .collect();
    let graph = Graph::from_adjacency(adj)?;
    if graph.regular_degree() != Some(params.degree()) {
        return Err(LpsError::DegenerateGenerators);
    }
    Ok(graph)
}
