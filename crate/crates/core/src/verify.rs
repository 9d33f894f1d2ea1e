//! Parameter gates, the end-to-end pipeline and its JSON report.
//!
//! The pipeline builds (or reads) a seed graph, peels it to degree `d+1`,
//! performs the tree surgery and measures the spectrum of the result. Every
//! inequality it evaluates is stored as a [`Check`] grouped into sections.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::Check;
use crate::graph::{Girth, Graph};
use crate::io::read_graph;
use crate::lps::{build_lps_graph, is_prime, next_prime, prev_prime, LpsParams};
use crate::matching::{
    check_prop_girth_bounds, check_prop_lambda_bounds, near_prime_gap_constant,
    peel_to_degree_with_spectrum, PeelTrace, SeedBound, SpectralSnapshot,
};
use crate::spectral::{
    eigensystem, gs_bound_check, tree_spectrum_oracle, EigenOptions, EigenSystem,
    LocalizationRecord, SpectralDiagnostics, RESIDUAL_TOL,
};
use crate::surgery::{
    construct, max_feasible_radius, SurgeryOptions, SurgeryResult, DEFAULT_MAX_ATTEMPTS,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_BETA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Thm12,
    Thm14,
    Freeform,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "thm12" => Ok(Mode::Thm12),
            "thm14" => Ok(Mode::Thm14),
            "freeform" => Ok(Mode::Freeform),
            _ => Err(format!(
                "unknown mode {s:?} (expected thm12, thm14 or freeform)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Thm12 => "thm12",
            Mode::Thm14 => "thm14",
            Mode::Freeform => "freeform",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error(
        "{p_j} and {p_next} are not consecutive primes (next prime after {p_j} is {expected})"
    )]
    NotConsecutive {
        p_j: u64,
        p_next: u64,
        expected: u64,
    },
    #[error("d = {d} outside [{lo}, {hi}]")]
    DegreeOutOfRange { d: usize, lo: u64, hi: u64 },
    #[error("need an odd prime p and 2 <= t <= p, got t = {t}, p = {p}")]
    BadAnchor { t: u64, p: u64 },
}

fn alpha_range_checks(alpha: f64) -> Vec<Check> {
    vec![
        Check::gt("alpha > 0", alpha, 0.0),
        Check::lt("alpha < 1/6", alpha, 1.0 / 6.0),
    ]
}

/// `log 29 / (6 log 31) ≈ 0.163`.
pub fn remark_alpha_constant() -> f64 {
    29f64.ln() / (6.0 * 31f64.ln())
}

/// Hypotheses of the consecutive-prime theorem for `d ∈ [p_j, p_next]`.
pub fn gate_thm12(d: usize, p_j: u64, p_next: u64, alpha: f64) -> Result<Vec<Check>, GateError> {
    for p in [p_j, p_next] {
        if !is_prime(p) {
            return Err(GateError::NotPrime(p));
        }
    }
    let expected = next_prime(p_j);
    if expected != p_next {
        return Err(GateError::NotConsecutive {
            p_j,
            p_next,
            expected,
        });
    }
    if !(p_j..=p_next).contains(&(d as u64)) {
        return Err(GateError::DegreeOutOfRange {
            d,
            lo: p_j,
            hi: p_next,
        });
    }
    let mut checks = alpha_range_checks(alpha);
    checks.push(Check::gt(
        "log p_j / log p_(j+1) > 6 alpha",
        (p_j as f64).ln() / (p_next as f64).ln(),
        6.0 * alpha,
    ));
    checks.push(Check::lt(
        "p_(j+1) - p_j < p_j / 5",
        (p_next - p_j) as f64,
        p_j as f64 / 5.0,
    ));
    if d >= 29 {
        checks.push(Check::lt(
            "alpha < log 29 / (6 log 31)",
            alpha,
            remark_alpha_constant(),
        ));
    }
    Ok(checks)
}

/// Hypotheses of the near-prime theorem for `d ∈ [t, p]`.
pub fn gate_thm14(d: usize, t: u64, p: u64, alpha: f64) -> Result<Vec<Check>, GateError> {
    if !is_prime(p) || p == 2 {
        return Err(GateError::NotPrime(p));
    }
    if t < 2 || t > p {
        return Err(GateError::BadAnchor { t, p });
    }
    if !(t..=p).contains(&(d as u64)) {
        return Err(GateError::DegreeOutOfRange { d, lo: t, hi: p });
    }
    let mut checks = alpha_range_checks(alpha);
    checks.push(Check::lt(
        "p - t < (5/(2 sqrt 6) - 1) sqrt(t)",
        (p - t) as f64,
        near_prime_gap_constant() * (t as f64).sqrt(),
    ));
    checks.push(Check::gt(
        "log t / log p > 6 alpha",
        (t as f64).ln() / (p as f64).ln(),
        6.0 * alpha,
    ));
    Ok(checks)
}

/// `b(d) = (3d − 1)/√(d(2d − 1))`.
pub fn b_constant(d: usize) -> f64 {
    let d = d as f64;
    (3.0 * d - 1.0) / (d * (2.0 * d - 1.0)).sqrt()
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_max_attempts() -> usize {
    DEFAULT_MAX_ATTEMPTS
}

fn default_mode() -> Mode {
    Mode::Freeform
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// LPS generator prime; the seed graph is `(p+1)`-regular.
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub q: Option<u64>,
    /// Lower anchor of the near-prime theorem.
    #[serde(default)]
    pub t: Option<u64>,
    /// Lower consecutive prime; defaults to the prime preceding `p`.
    #[serde(default)]
    pub p_j: Option<u64>,
    /// Target degree parameter: the final graph is `(d+1)`-regular.
    #[serde(default)]
    pub d: Option<usize>,
    /// Surgery radius; defaults to the largest `r` with `4r < girth(H)`.
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub root: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    /// Host graph `H` read from an edge list instead of LPS plus peeling.
    #[serde(default)]
    pub input_graph: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            p: None,
            q: None,
            t: None,
            p_j: None,
            d: None,
            r: None,
            root: 0,
            epsilon: DEFAULT_EPSILON,
            beta: DEFAULT_BETA,
            seed: 0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            input_graph: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Gates,
    Build,
    Peel,
    Surgery,
    Spectrum,
    Census,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// How a section's verdicts count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Holds for every valid input; a failure is a defect.
    Exact,
    /// Asymptotic or hypothesis-dependent claim measured on this instance.
    Instance,
    /// Recorded only; excluded from the overall verdict.
    Advisory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub name: String,
    pub basis: Basis,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSummary {
    pub source: Option<String>,
    pub seed_degree: Option<usize>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub alpha_effective: Option<f64>,
    pub girth_seed: Option<Girth>,
    pub girth_h: Option<Girth>,
    pub girth_g: Option<Girth>,
    pub lambda_seed: Option<f64>,
    pub lambda_h: Option<f64>,
    pub lambda_g: Option<f64>,
    pub lambda3_g: Option<f64>,
    pub b_d: Option<f64>,
    pub s_size: Option<usize>,
    /// `|S| / m^alpha_effective`.
    pub gadget_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeelStepSummary {
    pub degree_before: usize,
    pub degree_after: usize,
    pub lambda_before: f64,
    pub lambda_after: f64,
    pub lambda3_before: f64,
    pub lambda3_after: f64,
    pub cgh_threshold: Option<f64>,
    pub certificate_ok: bool,
    pub girth_after: Girth,
    pub matching_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeelSummary {
    pub initial: SpectralSnapshot,
    pub steps: Vec<PeelStepSummary>,
}

impl PeelSummary {
    fn of(trace: &PeelTrace) -> Self {
        Self {
            initial: trace.initial,
            steps: trace
                .steps
                .iter()
                .map(|s| PeelStepSummary {
                    degree_before: s.before.degree,
                    degree_after: s.after.degree,
                    lambda_before: s.before.lambda,
                    lambda_after: s.after.lambda,
                    lambda3_before: s.before.lambda3,
                    lambda3_after: s.after.lambda3,
                    cgh_threshold: s.cgh_threshold,
                    certificate_ok: s.certificate_ok,
                    girth_after: s.after.girth,
                    matching_size: s.matching.len(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusSummary {
    pub epsilon: f64,
    /// `max(epsilon, 10 |S| / m)`; detections must exceed it strictly.
    pub threshold: f64,
    pub s_size: usize,
    pub m: usize,
    pub records: Vec<LocalizationRecord>,
    pub distinct_eigenvalues: usize,
    /// Eigenspaces whose mass exceeds `epsilon` alone.
    pub above_epsilon: usize,
    /// Largest eigenspace mass on `S`.
    pub max_mass: f64,
    /// `⌊alpha_effective · log_d m⌋`.
    pub requested: usize,
    /// `min(r, requested)`.
    pub target: usize,
    /// Radial tree-gadget eigenvalues, for matching detections by eye.
    pub tree_hints: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub pass: bool,
    pub checks_total: usize,
    pub checks_counted: usize,
    /// `section: claim` of every counted check that failed.
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub completed_stages: Vec<Stage>,
    pub failure: Option<StageFailure>,
    pub summary: InstanceSummary,
    pub notes: Vec<String>,
    pub sections: Vec<Section>,
    pub peel: Option<PeelSummary>,
    pub surgery: Option<SurgeryResult>,
    pub census: Option<CensusSummary>,
    pub verdict: Verdict,
    /// Wall-clock milliseconds per stage; absent from the canonical form.
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl VerificationReport {
    fn new(config: PipelineConfig) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            completed_stages: Vec::new(),
            failure: None,
            summary: InstanceSummary::default(),
            notes: Vec::new(),
            sections: Vec::new(),
            peel: None,
            surgery: None,
            census: None,
            verdict: Verdict {
                pass: false,
                checks_total: 0,
                checks_counted: 0,
                failed: Vec::new(),
            },
            timings_ms: Some(BTreeMap::new()),
        }
    }

    /// Verdict recomputed from the stored sections and failure.
    pub fn compute_verdict(&self) -> Verdict {
        let counted = self.sections.iter().filter(|s| s.basis != Basis::Advisory);
        let failed: Vec<String> = counted
            .clone()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(move |c| format!("{}: {}", s.name, c.claim))
            })
            .collect();
        Verdict {
            pass: self.failure.is_none() && failed.is_empty(),
            checks_total: self.sections.iter().map(|s| s.checks.len()).sum(),
            checks_counted: counted.map(|s| s.checks.len()).sum(),
            failed,
        }
    }

    /// 0 when everything passed, 1 when a counted check failed, 2 when a
    /// stage aborted.
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            2
        } else if self.verdict.pass {
            0
        } else {
            1
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// All checks whose claim contains `needle`, across sections.
    pub fn find_checks<'a>(&'a self, needle: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.sections
            .iter()
            .flat_map(|s| &s.checks)
            .filter(move |c| c.claim.contains(needle))
    }

    /// The report without timings, which is byte-stable across runs.
    pub fn canonical(&self) -> Self {
        Self {
            timings_ms: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn canonical_json(&self) -> String {
        self.canonical().to_json()
    }

    fn push(&mut self, name: impl Into<String>, basis: Basis, checks: Vec<Check>) {
        self.sections.push(Section {
            name: name.into(),
            basis,
            checks,
        });
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation: {0}")]
    Schema(String),
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<(), ReportError> {
    write_atomic(path, &report.to_json())
}

/// Strict typed parse of a report file plus consistency of every stored
/// verdict with its stored operands.
pub fn validate_report_schema(path: &Path) -> Result<VerificationReport, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    validate_report_str(&text)
}

pub fn validate_report_str(text: &str) -> Result<VerificationReport, ReportError> {
    let schema = |m: String| ReportError::Schema(m);
    let report: VerificationReport =
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(schema(format!(
            "unsupported schema_version {}",
            report.schema_version
        )));
    }
    for s in &report.sections {
        for c in &s.checks {
            if !c.is_consistent() {
                return Err(schema(format!(
                    "{}: stored verdict of {:?} disagrees with its sides",
                    s.name, c.claim
                )));
            }
        }
    }
    if report.compute_verdict() != report.verdict {
        return Err(schema("overall verdict disagrees with the sections".into()));
    }
    Ok(report)
}

/// Every graph produced by a run, for callers that persist them.
pub struct PipelineOutput {
    pub report: VerificationReport,
    /// `H`, the `(d+1)`-regular host.
    pub host: Option<Graph>,
    /// `G`, the host after surgery.
    pub graph: Option<Graph>,
}

pub fn run_pipeline(config: PipelineConfig) -> VerificationReport {
    run_pipeline_with(config, &EigenOptions::from_env()).report
}

pub fn run_pipeline_with(config: PipelineConfig, opts: &EigenOptions) -> PipelineOutput {
    let mut run = Run {
        report: VerificationReport::new(config.clone()),
        opts: *opts,
        host: None,
        graph: None,
    };
    if let Err(failure) = run.execute(&config) {
        run.report.failure = Some(failure);
    }
    run.report.verdict = run.report.compute_verdict();
    PipelineOutput {
        report: run.report,
        host: run.host,
        graph: run.graph,
    }
}

struct Run {
    report: VerificationReport,
    opts: EigenOptions,
    host: Option<Graph>,
    graph: Option<Graph>,
}

fn fail(stage: Stage) -> impl Fn(String) -> StageFailure {
    move |message| StageFailure { stage, message }
}

fn girth_f64(g: Girth) -> f64 {
    g.finite().map_or(f64::INFINITY, |x| x as f64)
}

/// Degree, vertex count and (for LPS) parameters known before heavy work.
struct Plan {
    lps: Option<LpsParams>,
    input: Option<Graph>,
    n: usize,
    seed_degree: usize,
    d: usize,
}

impl Run {
    fn timed<T>(
        &mut self,
        stage: Stage,
        f: impl FnOnce(&mut Self) -> Result<T, StageFailure>,
    ) -> Result<T, StageFailure> {
        let start = Instant::now();
        let out = f(self);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if let Some(t) = self.report.timings_ms.as_mut() {
            *t.entry(stage.to_string()).or_default() += ms;
        }
        if out.is_ok() {
            self.report.completed_stages.push(stage);
        }
        out
    }

    fn execute(&mut self, cfg: &PipelineConfig) -> Result<(), StageFailure> {
        let plan = self.timed(Stage::Load, |_| load(cfg))?;
        self.report.summary.source = Some(if plan.lps.is_some() { "lps" } else { "file" }.into());
        self.report.summary.n = Some(plan.n);
        self.report.summary.d = Some(plan.d);
        self.report.summary.seed_degree = Some(plan.seed_degree);

        let mut gated = false;
        if let Some(r) = cfg.r {
            self.timed(Stage::Gates, |run| run.gates(cfg, &plan, r))?;
            gated = true;
        }

        let (host, host_eigen) = self.timed(Stage::Build, |run| run.build(cfg, &plan))?;
        let (host, host_eigen) =
            self.timed(Stage::Peel, |run| run.peel(cfg, &plan, host, host_eigen))?;

        let r = match cfg.r {
            Some(r) => r,
            None => {
                let r = max_feasible_radius(host.girth()).unwrap_or(0);
                self.report.notes.push(format!(
                    "radius r = {r} chosen as the largest with 4r < girth(H)"
                ));
                r
            }
        };
        self.report.summary.r = Some(r);
        if !gated {
            self.timed(Stage::Gates, |run| run.gates(cfg, &plan, r))?;
        }
        drop(host_eigen);

        let surgery = self.timed(Stage::Surgery, |run| run.surgery(cfg, &host, r))?;
        self.host = Some(host);
        let eigen = self.timed(Stage::Spectrum, |run| run.spectrum(cfg, &surgery))?;
        self.timed(Stage::Census, |run| run.census(cfg, &surgery, &eigen))?;
        self.graph = Some(surgery.graph.clone());
        self.report.surgery = Some(surgery);
        Ok(())
    }

    fn gates(&mut self, cfg: &PipelineConfig, plan: &Plan, r: usize) -> Result<(), StageFailure> {
        let alpha = alpha_effective(r, plan.n, plan.d);
        let basis = if cfg.mode == Mode::Freeform {
            Basis::Advisory
        } else {
            Basis::Instance
        };
        let thm12 = cfg.p.map(|p| {
            let p_j = cfg.p_j.or_else(|| prev_prime(p)).unwrap_or(p);
            gate_thm12(plan.d, p_j, p, alpha)
        });
        let thm14 = match (cfg.p, cfg.t) {
            (Some(p), Some(t)) => Some(gate_thm14(plan.d, t, p, alpha)),
            _ => None,
        };
        for (mode, name, gate) in [
            (Mode::Thm12, "gates: consecutive primes", thm12),
            (Mode::Thm14, "gates: near prime", thm14),
        ] {
            let required = cfg.mode == mode;
            match gate {
                Some(Ok(checks)) => {
                    let basis = if required { basis } else { Basis::Advisory };
                    self.report.push(name, basis, checks);
                }
                Some(Err(e)) if required => return Err(fail(Stage::Gates)(e.to_string())),
                Some(Err(e)) => self
                    .report
                    .notes
                    .push(format!("{name} not applicable: {e}")),
                None if required => {
                    let need = if mode == Mode::Thm12 { "p" } else { "p and t" };
                    return Err(fail(Stage::Gates)(format!(
                        "mode {mode} needs {need} in the config"
                    )));
                }
                None => {}
            }
        }
        Ok(())
    }

    fn build(
        &mut self,
        cfg: &PipelineConfig,
        plan: &Plan,
    ) -> Result<(Graph, EigenSystem), StageFailure> {
        let err = fail(Stage::Build);
        let g = match (&plan.lps, &plan.input) {
            (Some(params), _) => build_lps_graph(params).map_err(|e| err(e.to_string()))?,
            (None, Some(g)) => g.clone(),
            (None, None) => unreachable!("load yields a source"),
        };
        let eig = eigensystem(&g, &self.opts).map_err(|e| err(e.to_string()))?;
        self.spectral_sections("seed graph", &g, &eig);
        let girth = g.girth();
        let lambda = eig
            .lambda_second(plan.seed_degree as f64)
            .map_err(|e| err(e.to_string()))?;
        self.report.summary.girth_seed = Some(girth);
        self.report.summary.lambda_seed = Some(lambda);
        if let Some(params) = plan.lps {
            let p = params.p as f64;
            let n = g.vertex_count();
            self.report.push(
                "seed graph: LPS properties",
                Basis::Exact,
                vec![
                    Check::eq(
                        "n = q(q^2 - 1)/2",
                        n as f64,
                        params.vertex_count() as f64,
                        0.0,
                    ),
                    Check::flag(
                        "R is (p+1)-regular",
                        g.regular_degree() == Some(params.degree()),
                    ),
                    Check::flag("R is connected", g.is_connected()),
                    Check::flag("R is not bipartite", !g.is_bipartite()),
                    Check::le(
                        "lambda(R) <= 2 sqrt(p)",
                        lambda,
                        2.0 * p.sqrt(),
                        RESIDUAL_TOL * (p + 1.0),
                    ),
                    Check::ge(
                        "girth(R) >= (2/3) log_p n",
                        girth_f64(girth),
                        2.0 / 3.0 * (n as f64).ln() / p.ln(),
                        0.0,
                    ),
                ],
            );
        } else if cfg.d.is_some_and(|d| d + 1 != plan.seed_degree) {
            self.report
                .notes
                .push("input graph is peeled to the requested degree".to_string());
        }
        Ok((g, eig))
    }

    fn peel(
        &mut self,
        cfg: &PipelineConfig,
        plan: &Plan,
        g: Graph,
        eig: EigenSystem,
    ) -> Result<(Graph, EigenSystem), StageFailure> {
        let err = fail(Stage::Peel);
        let result = peel_to_degree_with_spectrum(&g, eig, plan.d, Some(cfg.seed), &self.opts)
            .map_err(|e| err(e.to_string()))?;
        for (i, step) in result.trace.steps.iter().enumerate() {
            let name = format!("peel step {}", i + 1);
            self.report.push(
                format!("{name}: Weyl and girth"),
                Basis::Exact,
                step.checks(),
            );
            self.report.push(
                format!("{name}: spectral invariants"),
                Basis::Exact,
                step.diagnostics.checks(),
            );
            if let Some(c) = step.certificate_check() {
                self.report.push(
                    format!("{name}: 1-factor certificate"),
                    Basis::Advisory,
                    vec![c],
                );
            }
        }
        let h = result.graph;
        let fin = result.trace.final_snapshot();
        self.report.summary.girth_h = Some(fin.girth);
        self.report.summary.lambda_h = Some(fin.lambda);

        let mut structure = vec![
            Check::flag("H is (d+1)-regular", h.regular_degree() == Some(plan.d + 1)),
            Check::flag("H is connected", h.is_connected()),
            Check::flag("H is not bipartite", !h.is_bipartite()),
        ];
        if let Some(params) = plan.lps {
            let bound = 2.0 / 3.0 * (plan.n as f64).ln() / (params.p as f64).ln();
            structure.push(Check::ge(
                "girth(H) >= (2/3) log_p n",
                girth_f64(fin.girth),
                bound,
                0.0,
            ));
            let steps = result.trace.steps.len() as f64;
            let p = params.p as f64;
            structure.push(Check::le(
                "lambda(H) <= 2 sqrt(p) + (peel count)",
                fin.lambda,
                2.0 * p.sqrt() + steps,
                RESIDUAL_TOL * (p + 1.0),
            ));
        }
        self.report.push("host graph", Basis::Exact, structure);

        if let Some(bound) = seed_bound(cfg, plan) {
            let lam = check_prop_lambda_bounds(&result.trace, &bound);
            let girth = check_prop_girth_bounds(fin.girth, plan.d, plan.n, &bound);
            let basis = match (cfg.mode, bound) {
                (Mode::Thm12, SeedBound::ConsecutivePrimes { .. })
                | (Mode::Thm14, SeedBound::NearPrime { .. }) => Basis::Instance,
                _ => Basis::Advisory,
            };
            self.report.push(
                "host graph: seed expander bounds",
                basis,
                [lam, girth].concat(),
            );
        }
        self.report.peel = Some(PeelSummary::of(&result.trace));
        Ok((h, result.eigen))
    }

    fn surgery(
        &mut self,
        cfg: &PipelineConfig,
        h: &Graph,
        r: usize,
    ) -> Result<SurgeryResult, StageFailure> {
        let err = fail(Stage::Surgery);
        if r == 0 {
            return Err(err(format!(
                "no feasible radius: girth(H) = {} <= 4",
                h.girth()
            )));
        }
        let opts = SurgeryOptions {
            seed: cfg.seed,
            max_attempts: cfg.max_attempts,
            shuffle_l2: false,
        };
        let res = construct(h, cfg.root, r, &opts).map_err(|e| err(e.to_string()))?;
        self.report
            .push("surgery: structure", Basis::Exact, res.structural_checks(h));
        self.report.push(
            "surgery: L2 spacing",
            Basis::Advisory,
            vec![res.l2_distance_check(h)],
        );
        let (girth, bounds) = res.check_girth_bound();
        let (exact, instance) = bounds.split_at(1);
        self.report
            .push("surgery: girth of G", Basis::Exact, exact.to_vec());
        self.report.push(
            "surgery: girth of G against alpha",
            Basis::Instance,
            instance.to_vec(),
        );
        let s = &mut self.report.summary;
        s.m = Some(res.m);
        s.girth_g = Some(girth);
        s.alpha_effective = Some(res.alpha_effective);
        s.s_size = Some(res.s_gadget.len());
        s.gadget_ratio = Some(res.gadget_ratio());
        Ok(res)
    }

    fn spectrum(
        &mut self,
        cfg: &PipelineConfig,
        res: &SurgeryResult,
    ) -> Result<EigenSystem, StageFailure> {
        let err = fail(Stage::Spectrum);
        let g = &res.graph;
        let eig = eigensystem(g, &self.opts).map_err(|e| err(e.to_string()))?;
        self.spectral_sections("G", g, &eig);
        let d = res.d;
        let df = d as f64;
        let tol = RESIDUAL_TOL * (df + 1.0);
        let lambda = eig
            .lambda_second(df + 1.0)
            .map_err(|e| err(e.to_string()))?;
        let lambda3 = eig.lambda_third().map_err(|e| err(e.to_string()))?;
        let b = b_constant(d);
        self.report.summary.lambda_g = Some(lambda);
        self.report.summary.lambda3_g = Some(lambda3);
        self.report.summary.b_d = Some(b);

        let b2 = b_constant(2);
        let closed = 5.0 / 6f64.sqrt();
        self.report.push(
            "constants",
            Basis::Exact,
            vec![
                Check::eq("b(2) = 5/sqrt 6", b2, closed, 1e-12),
                Check::lt("b(2) < b(d) + beta", b2, b + cfg.beta),
                Check::le("b(d) <= 3/sqrt 2", b, 3.0 / 2f64.sqrt(), 0.0),
            ],
        );
        let basis = if cfg.mode == Mode::Thm14 {
            Basis::Instance
        } else {
            Basis::Advisory
        };
        self.report.push(
            "G: spectral radius bounds",
            basis,
            vec![
                Check::le(
                    "lambda(G) <= (3/sqrt 2) sqrt(d)",
                    lambda,
                    3.0 / 2f64.sqrt() * df.sqrt(),
                    tol,
                ),
                Check::le(
                    "lambda(G) <= (b(d) + beta) sqrt(d)",
                    lambda,
                    (b + cfg.beta) * df.sqrt(),
                    tol,
                ),
            ],
        );
        Ok(eig)
    }

    fn census(
        &mut self,
        cfg: &PipelineConfig,
        res: &SurgeryResult,
        eig: &EigenSystem,
    ) -> Result<(), StageFailure> {
        let s = &res.s_gadget;
        let m = res.m;
        let d = res.d;
        let threshold = cfg.epsilon.max(10.0 * s.len() as f64 / m as f64);
        let all = eig.localization_census(s, cfg.epsilon);
        let above_epsilon = all.iter().filter(|rec| rec.mass > cfg.epsilon).count();
        let max_mass = eig
            .eigenspace_masses(s)
            .iter()
            .map(|rec| rec.mass)
            .fold(0.0, f64::max);
        let records: Vec<LocalizationRecord> =
            all.into_iter().filter(|rec| rec.mass > threshold).collect();
        let girth = res
            .graph
            .girth()
            .finite()
            .ok_or_else(|| fail(Stage::Census)("G has no cycle".into()))?;
        let requested = (res.alpha_effective * (m as f64).ln() / (d as f64).ln())
            .floor()
            .max(0.0) as usize;
        let target = res.radius.min(requested);
        let count = records.len() as f64;
        self.report.push(
            "census: localized eigenvalue count",
            Basis::Instance,
            vec![
                Check::ge(
                    "localized count >= min(r, floor(alpha log_d m))",
                    count,
                    target as f64,
                    0.0,
                ),
                Check::ge("localized count >= r", count, res.radius as f64, 0.0),
            ],
        );
        let tol = RESIDUAL_TOL * (d as f64 + 1.0);
        let mut per_record = Vec::new();
        for rec in &records {
            per_record.push(gs_bound_check(cfg.epsilon, d, girth, s.len()));
            per_record.push(Check::le(
                format!("witness residual at {:.6}", rec.eigenvalue),
                rec.witness_residual(&res.graph),
                tol,
                0.0,
            ));
        }
        self.report
            .push("census: detections", Basis::Exact, per_record);
        self.report.census = Some(CensusSummary {
            epsilon: cfg.epsilon,
            threshold,
            s_size: s.len(),
            m,
            distinct_eigenvalues: records.len(),
            above_epsilon,
            max_mass,
            records,
            requested,
            target,
            tree_hints: tree_spectrum_oracle(d, res.radius),
        });
        Ok(())
    }

    fn spectral_sections(&mut self, name: &str, g: &Graph, eig: &EigenSystem) {
        self.report.push(
            format!("{name}: spectral invariants"),
            Basis::Exact,
            eig.diagnostics().checks(),
        );
        self.report.push(
            format!("{name}: Perron"),
            Basis::Exact,
            perron_checks(g, eig),
        );
    }
}

/// Top eigenvalue `d+1` with a constant-sign eigenvector.
pub fn perron_checks(g: &Graph, eig: &EigenSystem) -> Vec<Check> {
    let diag: &SpectralDiagnostics = eig.diagnostics();
    let top = diag.max_degree as f64;
    vec![
        Check::eq(
            "top eigenvalue = d+1",
            eig.top(),
            top,
            RESIDUAL_TOL * top.max(1.0),
        ),
        Check::flag(
            "top eigenvector has constant sign",
            g.is_connected() && eig.top_vector_constant_sign(),
        ),
    ]
}

/// `r / log_d(n)`.
pub fn alpha_effective(r: usize, n: usize, d: usize) -> f64 {
    r as f64 * (d as f64).ln() / (n as f64).ln()
}

fn seed_bound(cfg: &PipelineConfig, plan: &Plan) -> Option<SeedBound> {
    let p = plan.lps?.p;
    match (cfg.mode, cfg.t) {
        (Mode::Thm14, Some(t)) | (Mode::Freeform, Some(t)) => Some(SeedBound::NearPrime { p, t }),
        _ => cfg
            .p_j
            .or_else(|| prev_prime(p))
            .map(|p_j| SeedBound::ConsecutivePrimes { p_j, p_next: p }),
    }
}

fn load(cfg: &PipelineConfig) -> Result<Plan, StageFailure> {
    let err = fail(Stage::Load);
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(err(format!(
            "epsilon must lie in (0, 1), got {}",
            cfg.epsilon
        )));
    }
    if cfg.beta.is_nan() || cfg.beta <= 0.0 {
        return Err(err(format!("beta must be positive, got {}", cfg.beta)));
    }
    let (lps, input, n, seed_degree) = match (&cfg.input_graph, cfg.p, cfg.q) {
        (Some(path), _, _) => {
            let g = read_graph(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
            let degree = g
                .regular_degree()
                .ok_or_else(|| err(format!("{} is not regular", path.display())))?;
            (None, Some(g.clone()), g.vertex_count(), degree)
        }
        (None, Some(p), Some(q)) => {
            let params = LpsParams::new(p, q).map_err(|e| err(e.to_string()))?;
            (Some(params), None, params.vertex_count(), params.degree())
        }
        _ => return Err(err("config needs either input_graph or both p and q".into())),
    };
    let d = cfg.d.unwrap_or(seed_degree.saturating_sub(1));
    if d < 2 {
        return Err(err(format!("d must be at least 2, got {d}")));
    }
    if d + 1 > seed_degree {
        return Err(err(format!(
            "d + 1 = {} exceeds the seed degree {seed_degree}",
            d + 1
        )));
    }
    Ok(Plan {
        lps,
        input,
        n,
        seed_degree,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm12_gate_examples() {
        let c = gate_thm12(30, 29, 31, 0.15).unwrap();
        assert!(c.iter().all(|c| c.pass), "{c:?}");
        assert!(c.iter().any(|c| c.claim.contains("log 29")));
        let c = gate_thm12(30, 29, 31, 1.0 / 6.0).unwrap();
        assert!(!c.iter().find(|c| c.claim == "alpha < 1/6").unwrap().pass);
        let c = gate_thm12(13, 13, 17, 0.1).unwrap();
        assert!(
            !c.iter()
                .find(|c| c.claim.starts_with("p_(j+1) - p_j"))
                .unwrap()
                .pass
        );
        assert!(matches!(
            gate_thm12(13, 13, 19, 0.1),
            Err(GateError::NotConsecutive { expected: 17, .. })
        ));
        assert!(matches!(
            gate_thm12(20, 13, 17, 0.1),
            Err(GateError::DegreeOutOfRange { .. })
        ));
        assert!(matches!(
            gate_thm12(13, 15, 17, 0.1),
            Err(GateError::NotPrime(15))
        ));
    }

    #[test]
    fn thm14_gate_examples() {
        let c = gate_thm14(13, 13, 13, 0.15).unwrap();
        assert!(c.iter().all(|c| c.pass), "{c:?}");
        let c = gate_thm14(29, 29, 31, 0.1).unwrap();
        assert!(
            !c.iter()
                .find(|c| c.claim.starts_with("p - t"))
                .unwrap()
                .pass
        );
        let alpha = (29f64.ln() / 31f64.ln()) / 6.0;
        let c = gate_thm14(30, 29, 31, alpha).unwrap();
        assert!(
            !c.iter()
                .find(|c| c.claim.starts_with("log t"))
                .unwrap()
                .pass
        );
        assert!(gate_thm14(13, 1, 13, 0.1).is_err());
        assert!(gate_thm14(13, 13, 15, 0.1).is_err());
        assert!(gate_thm14(20, 13, 17, 0.1).is_err());
    }

    #[test]
    fn b_of_two() {
        assert!((b_constant(2) - 5.0 / 6f64.sqrt()).abs() < 1e-12);
        for d in 2..100 {
            assert!(b_constant(d) < b_constant(d + 1));
            assert!(b_constant(d) < 3.0 / 2f64.sqrt());
        }
    }

    #[test]
    fn mode_parse() {
        for m in [Mode::Thm12, Mode::Thm14, Mode::Freeform] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("thm13".parse::<Mode>().is_err());
    }

    #[test]
    fn config_defaults_and_strictness() {
        let c = PipelineConfig::from_json(r#"{"p": 13, "q": 17}"#).unwrap();
        assert_eq!(c.epsilon, DEFAULT_EPSILON);
        assert_eq!(c.mode, Mode::Freeform);
        assert!(PipelineConfig::from_json(r#"{"p": 13, "qq": 17}"#).is_err());
    }

    #[test]
    fn load_errors_are_stage_zero() {
        let mut cfg = PipelineConfig::new(Mode::Freeform);
        cfg.input_graph = Some("/nonexistent/graph.txt".into());
        let rep = run_pipeline_with(cfg, &EigenOptions::default()).report;
        assert_eq!(rep.failure.as_ref().unwrap().stage, Stage::Load);
        assert_eq!(rep.exit_code(), 2);
        assert!(rep.completed_stages.is_empty());
    }
}
