//! Dense adjacency spectra, second/third eigenvalue magnitudes and
//! eigenspace localization.
//!
//! The decomposition is a full symmetric one (Householder tridiagonalization
//! followed by an implicit tridiagonal eigensolver, via `faer`) because the
//! localization census needs whole eigenspaces, including the multiple
//! eigenvalues that tree gadgets create. It always runs sequentially so that
//! repeated runs are bit-for-bit reproducible.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::{Mat, Par};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::Check;
use crate::graph::{Graph, VertexSet};

pub const DEFAULT_EIG_CAP: usize = 15_000;
pub const EIG_CAP_ENV: &str = "FORGE_EIG_CAP";

/// Relative residual tolerance: `‖A v − λ v‖∞ ≤ RESIDUAL_TOL · (d+1)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-6;
/// Relative tolerance on `Σλ² = 2|E|`, scaled by `|E|`.
pub const TRACE_SQUARE_TOL: f64 = 1e-4;
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Eigenvalues closer than `GROUPING_TOL · (d+1)` share an eigenspace.
pub const GROUPING_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(
        "graph has {n} vertices, above the eigensolver cap {cap} (set {EIG_CAP_ENV} to override)"
    )]
    CapExceeded { n: usize, cap: usize },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("top eigenvalue {found} differs from the expected {expected} (graph disconnected or not regular?)")]
    TopMismatch { expected: f64, found: f64 },
    #[error("need at least {need} eigenvalues, have {have}")]
    TooSmall { need: usize, have: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    pub cap: usize,
    /// Absolute grouping tolerance; defaults to `GROUPING_TOL · max_degree`.
    pub group_tolerance: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_EIG_CAP,
            group_tolerance: None,
        }
    }
}

impl EigenOptions {
    /// Default options with the cap taken from `FORGE_EIG_CAP` when set.
    pub fn from_env() -> Self {
        let cap = std::env::var(EIG_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_EIG_CAP);
        Self {
            cap,
            ..Self::default()
        }
    }
}

/// Full spectrum of a symmetric matrix with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Mat<f64>,
    groups: Vec<(usize, usize)>,
    group_tolerance: f64,
    diagnostics: SpectralDiagnostics,
}

/// Measured accuracy of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDiagnostics {
    pub n: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub max_residual: f64,
    pub orthonormality_error: f64,
    pub trace: f64,
    pub trace_of_square: f64,
}

impl SpectralDiagnostics {
    /// Residual, orthonormality and trace identity checks.
    pub fn checks(&self) -> Vec<Check> {
        let scale = self.max_degree.max(1) as f64;
        let m = self.edge_count as f64;
        vec![
            Check::le(
                "max eigen-residual <= 1e-8 (d+1)",
                self.max_residual,
                RESIDUAL_TOL * scale,
                0.0,
            ),
            Check::le(
                "orthonormality error",
                self.orthonormality_error,
                ORTHONORMALITY_TOL,
                0.0,
            ),
            Check::le(
                "|sum of eigenvalues| (trace 0)",
                self.trace.abs(),
                TRACE_TOL,
                0.0,
            ),
            Check::le(
                "|sum of squared eigenvalues - 2|E||",
                (self.trace_of_square - 2.0 * m).abs(),
                TRACE_SQUARE_TOL * m.max(1.0),
                0.0,
            ),
        ]
    }
}

/// Eigenvalues and eigenvectors of a dense symmetric matrix, ascending.
fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), SpectralError> {
    let n = a.nrows();
    let mut u = Mat::<f64>::zeros(n, n);
    let mut s = Diag::<f64>::zeros(n);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|_| SpectralError::NoConvergence)?;
    let values = (0..n).map(|i| s.column_vector()[i]).collect();
    Ok((values, u))
}

fn column(m: &Mat<f64>, k: usize) -> &[f64] {
    m.col(k)
        .try_as_col_major()
        .expect("owned matrices are column-major")
        .as_slice()
}

/// Adjacency eigendecomposition of `g` with accuracy diagnostics.
pub fn eigensystem(g: &Graph, opts: &EigenOptions) -> Result<EigenSystem, SpectralError> {
    let n = g.vertex_count();
    if n > opts.cap {
        return Err(SpectralError::CapExceeded { n, cap: opts.cap });
    }
    let mut a = Mat::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let (values, vectors) = symmetric_eigen(&a)?;
    drop(a);

    let max_degree = g.degree_profile().max_degree;
    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in values.iter().enumerate() {
        let v = column(&vectors, k);
        for x in 0..n {
            let av: f64 = g.neighbors(x).iter().map(|&y| v[y]).sum();
            max_residual = max_residual.max((av - lambda * v[x]).abs());
        }
    }
    let gram = vectors.transpose() * &vectors;
    let mut orthonormality_error: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality_error = orthonormality_error.max((gram[(i, j)] - target).abs());
        }
    }
    drop(gram);

    let group_tolerance = opts
        .group_tolerance
        .unwrap_or(GROUPING_TOL * max_degree.max(1) as f64);
    let diagnostics = SpectralDiagnostics {
        n,
        edge_count: g.edge_count(),
        max_degree,
        max_residual,
        orthonormality_error,
        trace: values.iter().sum(),
        trace_of_square: values.iter().map(|x| x * x).sum(),
    };
    Ok(EigenSystem {
        groups: group_indices(&values, group_tolerance),
        values,
        vectors,
        group_tolerance,
        diagnostics,
    })
}

/// Splits ascending `values` into maximal runs whose consecutive gaps are at
/// most `tol`.
fn group_indices(values: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            groups.push((start, k));
            start = k;
        }
    }
    groups
}

impl EigenSystem {
    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Unit eigenvector for `values()[k]`.
    pub fn vector(&self, k: usize) -> &[f64] {
        column(&self.vectors, k)
    }

    /// Eigenspaces as half-open index ranges into `values()`.
    pub fn groups(&self) -> &[(usize, usize)] {
        &self.groups
    }

    pub fn group_tolerance(&self) -> f64 {
        self.group_tolerance
    }

    pub fn diagnostics(&self) -> &SpectralDiagnostics {
        &self.diagnostics
    }

    pub fn top(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// Whether the top eigenvector has constant sign (Perron vector).
    pub fn top_vector_constant_sign(&self) -> bool {
        let Some(k) = self.values.len().checked_sub(1) else {
            return false;
        };
        let v = self.vector(k);
        v.iter().all(|&x| x > 0.0) || v.iter().all(|&x| x < 0.0)
    }

    /// Largest `|λ|` after discarding one copy of the top eigenvalue, which
    /// must equal `expected_top` (the degree of a connected regular graph).
    pub fn lambda_second(&self, expected_top: f64) -> Result<f64, SpectralError> {
        let n = self.values.len();
        if n < 2 {
            return Err(SpectralError::TooSmall { need: 2, have: n });
        }
        let top = self.top();
        if (top - expected_top).abs() > RESIDUAL_TOL * expected_top.abs().max(1.0) {
            return Err(SpectralError::TopMismatch {
                expected: expected_top,
                found: top,
            });
        }
        Ok(self.values[..n - 1]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs())))
    }

    /// Third largest `|λ|`, multiplicities counted.
    pub fn lambda_third(&self) -> Result<f64, SpectralError> {
        let n = self.values.len();
        if n < 3 {
            return Err(SpectralError::TooSmall { need: 3, have: n });
        }
        let mut mags: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        Ok(mags[2])
    }

    /// Maximum of `‖v_S‖²` over unit vectors of every eigenspace.
    ///
    /// For an orthonormal eigenspace basis `B`, the maximum equals the top
    /// eigenvalue of `B_Sᵀ B_S`, where `B_S` keeps the rows in `S`; the
    /// witness is `B c` for the corresponding unit eigenvector `c`.
    pub fn eigenspace_masses(&self, s: &VertexSet) -> Vec<LocalizationRecord> {
        self.groups
            .iter()
            .map(|&(lo, hi)| self.eigenspace_mass(lo, hi, s))
            .collect()
    }

    fn eigenspace_mass(&self, lo: usize, hi: usize, s: &VertexSet) -> LocalizationRecord {
        let dim = hi - lo;
        let n = self.values.len();
        let eigenvalue = self.values[lo..hi].iter().sum::<f64>() / dim as f64;
        let coeffs: Vec<f64> = if dim == 1 {
            vec![1.0]
        } else {
            let gram = Mat::<f64>::from_fn(dim, dim, |i, j| {
                let (vi, vj) = (self.vector(lo + i), self.vector(lo + j));
                s.iter().map(|x| vi[x] * vj[x]).sum()
            });
            let (_, vecs) = symmetric_eigen(&gram).expect("small symmetric eigenproblem");
            column(&vecs, dim - 1).to_vec()
        };
        let mut witness = vec![0.0; n];
        for (c, k) in coeffs.iter().zip(lo..hi) {
            for (w, x) in witness.iter_mut().zip(self.vector(k)) {
                *w += c * x;
            }
        }
        let norm = witness.iter().map(|x| x * x).sum::<f64>().sqrt();
        witness.iter_mut().for_each(|x| *x /= norm);
        let mass = s
            .iter()
            .map(|x| witness[x] * witness[x])
            .sum::<f64>()
            .clamp(0.0, 1.0);
        LocalizationRecord {
            eigenvalue,
            eigenspace_dim: dim,
            mass,
            witness,
        }
    }

    /// Eigenspaces whose maximal mass on `s` is at least `epsilon`, by mass
    /// descending (ties by eigenvalue ascending).
    pub fn localization_census(&self, s: &VertexSet, epsilon: f64) -> Vec<LocalizationRecord> {
        let mut records: Vec<_> = self
            .eigenspace_masses(s)
            .into_iter()
            .filter(|r| r.mass >= epsilon)
            .collect();
        records.sort_by(|a, b| {
            b.mass
                .total_cmp(&a.mass)
                .then(a.eigenvalue.total_cmp(&b.eigenvalue))
        });
        records
    }
}

/// Most localized unit vector of one eigenspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationRecord {
    pub eigenvalue: f64,
    pub eigenspace_dim: usize,
    pub mass: f64,
    #[serde(skip)]
    pub witness: Vec<f64>,
}

impl LocalizationRecord {
    /// `‖A w − λ w‖∞` for the witness against the graph it came from.
    pub fn witness_residual(&self, g: &Graph) -> f64 {
        (0..g.vertex_count())
            .map(|x| {
                let aw: f64 = g.neighbors(x).iter().map(|&y| self.witness[y]).sum();
                (aw - self.eigenvalue * self.witness[x]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn witness_mass(&self, s: &VertexSet) -> f64 {
        s.iter().map(|x| self.witness[x] * self.witness[x]).sum()
    }
}

/// Lower bound on the support of an `ε`-localized eigenvector of a
/// `(d+1)`-regular graph: `|S| ≥ ε d^{(ε/4)·girth} / (2d²)`.
pub fn gs_bound_check(epsilon: f64, d: usize, girth: usize, s_size: usize) -> Check {
    let d = d as f64;
    let rhs = epsilon * d.powf(epsilon / 4.0 * girth as f64) / (2.0 * d * d);
    Check::ge(
        "|S| >= eps d^(eps girth/4) / (2 d^2)",
        s_size as f64,
        rhs,
        0.0,
    )
}

/// Spectrum of the radial quotient of a depth-`r` tree gadget whose root has
/// `d+1` children and whose other internal vertices have `d` children: the
/// `(r+1)×(r+1)` tridiagonal matrix with zero diagonal, root coupling
/// `√(d+1)` and all other couplings `√d`. Ascending.
pub fn tree_spectrum_oracle(d: usize, r: usize) -> Vec<f64> {
    let k = r + 1;
    let m = Mat::<f64>::from_fn(k, k, |i, j| {
        if i.abs_diff(j) != 1 {
            0.0
        } else if i.min(j) == 0 {
            ((d + 1) as f64).sqrt()
        } else {
            (d as f64).sqrt()
        }
    });
    symmetric_eigen(&m)
        .expect("small tridiagonal eigenproblem")
        .0
}
