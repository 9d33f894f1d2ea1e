//! Exit criteria for the whole pipeline. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any criterion fails.

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use forge_core::check::Check;
use forge_core::graph::{petersen, Girth, Graph, VertexSet};
use forge_core::io::to_edge_list_string;
use forge_core::lps::{build_lps_graph, LpsParams};
use forge_core::matching::{peel_to_degree_with_spectrum, perfect_matching};
use forge_core::spectral::{eigensystem, EigenOptions, EigenSystem, RESIDUAL_TOL};
use forge_core::surgery::{construct, max_feasible_radius, SurgeryOptions};
use forge_core::verify::{b_constant, run_pipeline_with, Mode, PipelineConfig, PipelineOutput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

use common::{adjacency, brute_girth, brute_has_perfect_matching, dense, jacobi, random_graph};

const EPSILON: f64 = 0.25;

/// Named sub-results of one criterion.
#[derive(Default)]
struct Findings {
    items: Vec<(String, bool, String)>,
}

impl Findings {
    fn record(&mut self, what: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.items.push((what.into(), ok, detail.into()));
    }

    fn check(&mut self, c: &Check) {
        self.record(
            c.claim.clone(),
            c.pass,
            format!(
                "{} {:?} {} (margin {:.3e})",
                c.lhs, c.relation, c.rhs, c.margin
            ),
        );
    }

    fn pass(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|i| i.1)
    }
}

fn run_criterion(id: u32, title: &str, f: impl FnOnce(&mut Findings)) -> bool {
    let mut findings = Findings::default();
    let panicked = catch_unwind(AssertUnwindSafe(|| f(&mut findings))).err();
    if let Some(p) = &panicked {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        findings.record("completed without panic", false, msg);
    }
    let pass = findings.pass();
    println!(
        "criterion {id} [{}] {title}",
        if pass { "PASS" } else { "FAIL" }
    );
    for (what, ok, detail) in &findings.items {
        println!("    {} {what}: {detail}", if *ok { "ok  " } else { "FAIL" });
    }
    pass
}

struct Lps {
    graph: Graph,
    eigen: EigenSystem,
    build_time: Duration,
    eigen_time: Duration,
}

fn lps_13_17() -> Lps {
    let params = LpsParams::new(13, 17).unwrap();
    let start = Instant::now();
    let graph = build_lps_graph(&params).unwrap();
    let build_time = start.elapsed();
    let start = Instant::now();
    let eigen = eigensystem(&graph, &EigenOptions::default()).unwrap();
    Lps {
        graph,
        eigen,
        build_time,
        eigen_time: start.elapsed(),
    }
}

fn lps_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::new(Mode::Thm14);
    cfg.p = Some(13);
    cfg.q = Some(17);
    cfg.t = Some(13);
    cfg.d = Some(13);
    cfg.epsilon = EPSILON;
    cfg
}

fn petersen_config(dir: &std::path::Path) -> PipelineConfig {
    let path = dir.join("petersen.txt");
    forge_core::io::write_graph(&petersen(), &path).unwrap();
    let mut cfg = PipelineConfig::new(Mode::Freeform);
    cfg.input_graph = Some(path);
    cfg.r = Some(1);
    cfg.epsilon = EPSILON;
    cfg
}

fn pipeline(cfg: PipelineConfig) -> PipelineOutput {
    run_pipeline_with(cfg, &EigenOptions::default())
}

fn lps_properties(lps: &Lps, f: &mut Findings) {
    let g = &lps.graph;
    f.record(
        "n = 2448",
        g.vertex_count() == 2448,
        g.vertex_count().to_string(),
    );
    f.record(
        "14-regular",
        g.regular_degree() == Some(14),
        format!("{:?}", g.regular_degree()),
    );
    f.record("connected", g.is_connected(), "");
    f.record("not bipartite", !g.is_bipartite(), "");
    f.record(
        "built in < 30 s",
        lps.build_time < Duration::from_secs(30),
        format!("{:.2?}", lps.build_time),
    );
    f.record(
        "eigendecomposition in < 10 min",
        lps.eigen_time < Duration::from_secs(600),
        format!("{:.2?}", lps.eigen_time),
    );
    let tol = RESIDUAL_TOL * 14.0;
    let diag = lps.eigen.diagnostics();
    f.check(&Check::le(
        "max residual <= 1e-8 (d+1)",
        diag.max_residual,
        tol,
        0.0,
    ));
    let lambda = lps.eigen.lambda_second(14.0).unwrap();
    f.check(&Check::le(
        "lambda(R) <= 2 sqrt 13",
        lambda,
        2.0 * 13f64.sqrt(),
        tol,
    ));
    let bound = (2.0 / 3.0 * 2448f64.ln() / 13f64.ln()).ceil();
    let girth = g.girth();
    f.record(
        format!("girth(R) >= ceil((2/3) log_13 2448) = {bound}"),
        girth.finite().is_some_and(|k| k as f64 >= bound),
        format!("girth {girth}"),
    );
}

fn peel_14_to_13(lps: &Lps, f: &mut Findings) {
    let res = peel_to_degree_with_spectrum(
        &lps.graph,
        lps.eigen.clone(),
        12,
        Some(0),
        &EigenOptions::default(),
    )
    .unwrap();
    let step = &res.trace.steps[0];
    f.record(
        "perfect matching found",
        step.matching.is_perfect_in(&lps.graph),
        format!("{} edges", step.matching.len()),
    );
    f.record(
        "13-regular result",
        res.graph.regular_degree() == Some(13),
        format!("{:?}", res.graph.regular_degree()),
    );
    for c in step.checks() {
        f.check(&c);
    }
    match step.certificate_check() {
        Some(c) => f.record(
            "spectral 1-factor certificate recorded",
            step.certificate_ok == c.pass,
            format!("{}: {} <= {} is {}", c.claim, c.lhs, c.rhs, c.pass),
        ),
        None => f.record(
            "spectral 1-factor certificate recorded",
            false,
            "no threshold",
        ),
    }
}

fn oracle_suites(f: &mut Findings) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x61636365);
    let mut girth_mismatch = 0;
    for i in 0..500 {
        let g = random_graph(&mut rng, 1 + i % 12, [0.15, 0.25, 0.4, 0.6][i % 4]);
        let expected = brute_girth(&g).map_or(Girth::Infinite, Girth::Finite);
        girth_mismatch += usize::from(g.girth() != expected);
    }
    f.record(
        "girth vs cycle enumeration, 500 graphs n <= 12",
        girth_mismatch == 0,
        format!("{girth_mismatch} mismatches"),
    );

    let mut matching_mismatch = 0;
    for i in 0..500 {
        let n = 1 + i % 10;
        let g = random_graph(&mut rng, n, [0.2, 0.35, 0.5, 0.7][i % 4]);
        let exists = brute_has_perfect_matching(&adjacency(&g), &mut vec![false; n]);
        let found = perfect_matching(&g, Some(i as u64));
        let valid = found.as_ref().is_none_or(|m| m.is_perfect_in(&g));
        matching_mismatch += usize::from(exists != found.is_some() || !valid);
    }
    f.record(
        "blossom vs exhaustive search, 500 graphs n <= 10",
        matching_mismatch == 0,
        format!("{matching_mismatch} mismatches"),
    );

    let p = petersen();
    let eig = eigensystem(&p, &EigenOptions::default()).unwrap();
    let known = [-2.0, -2.0, -2.0, -2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0];
    let err = eig
        .values()
        .iter()
        .zip(known)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let jacobi_err = eig
        .values()
        .iter()
        .zip(jacobi(dense(&p)))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    f.check(&Check::le(
        "Petersen spectrum {-2^4, 1^5, 3}",
        err,
        1e-8,
        0.0,
    ));
    f.check(&Check::le(
        "Petersen spectrum vs Jacobi",
        jacobi_err,
        1e-8,
        0.0,
    ));
}

/// BFS distances from `root` in `h` with `blocked` removed.
fn bfs_avoiding(h: &Graph, root: usize, blocked: &VertexSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; h.vertex_count()];
    dist[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in h.neighbors(u) {
            if dist[v].is_none() && !blocked.contains(v) {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn petersen_surgery(f: &mut Findings) {
    let h = petersen();
    let res = construct(&h, 0, 1, &SurgeryOptions::default()).unwrap();
    let g = &res.graph;
    f.record(
        "m = 12",
        res.m == 12 && g.vertex_count() == 12,
        res.m.to_string(),
    );
    f.record("G is 3-regular", g.regular_degree() == Some(3), "");
    f.record(
        "M is a subset of E(H)",
        res.matching.edges().iter().all(|&(a, b)| h.has_edge(a, b)),
        format!("{:?}", res.matching.edges()),
    );
    f.record(
        "M is removed from G",
        res.matching.edges().iter().all(|&(a, b)| !g.has_edge(a, b)),
        "",
    );
    let checks = res.structural_checks(&h);
    let pairing = checks
        .iter()
        .find(|c| c.claim.starts_with("girth(T1 u T2)"))
        .unwrap();
    f.check(pairing);
    f.record(
        "pairing girth target is 2",
        (pairing.rhs - 2.0).abs() < 1e-12,
        pairing.rhs.to_string(),
    );

    let mut min = usize::MAX;
    for a in res.l1.iter() {
        let dist = bfs_avoiding(&h, a, &res.v1);
        for b in res.l1.iter().filter(|&b| b != a) {
            min = min.min(dist[b].unwrap_or(usize::MAX));
        }
    }
    f.record(
        "pairwise L1 distance in H - V1 > 2r",
        min > 2,
        format!("min distance {min}"),
    );
    let lib = checks
        .iter()
        .find(|c| c.claim.starts_with("min distance within L1"))
        .unwrap();
    f.record(
        "library distance agrees with BFS",
        lib.lhs == min as f64 && lib.pass,
        lib.lhs.to_string(),
    );
}

fn localization(label: &str, out: &PipelineOutput, f: &mut Findings) {
    let rep = &out.report;
    let Some(census) = &rep.census else {
        f.record(
            format!("{label}: census ran"),
            false,
            format!("{:?}", rep.failure),
        );
        return;
    };
    let r = rep.summary.r.unwrap();
    let expected = EPSILON.max(10.0 * census.s_size as f64 / census.m as f64);
    f.record(
        format!("{label}: threshold max(0.25, 10|S|/m)"),
        census.threshold == expected,
        format!(
            "|S| = {}, m = {}, threshold {}",
            census.s_size, census.m, census.threshold
        ),
    );
    let above = census
        .records
        .iter()
        .filter(|rec| rec.mass > expected)
        .count();
    f.record(
        format!("{label}: distinct eigenvalues above threshold >= r = {r}"),
        above >= r && above == census.distinct_eigenvalues,
        format!("{above} found, largest mass {:.4}", census.max_mass),
    );
    let detections = rep.section("census: detections").unwrap();
    let gs: Vec<&Check> = detections
        .checks
        .iter()
        .filter(|c| c.claim.starts_with("|S| >="))
        .collect();
    f.record(
        format!("{label}: every detection passes the support bound with positive margin"),
        gs.len() == above && gs.iter().all(|c| c.pass && c.margin > 0.0),
        gs.iter()
            .map(|c| format!("{:.3}", c.margin))
            .collect::<Vec<_>>()
            .join(", "),
    );
}

fn radius_bound(out: &PipelineOutput, f: &mut Findings) {
    let rep = &out.report;
    let s = &rep.summary;
    let feasible = max_feasible_radius(s.girth_h.unwrap());
    f.record(
        "r is the largest feasible radius",
        s.r.is_some() && s.r == feasible,
        format!("r = {:?}, girth(H) = {:?}", s.r, s.girth_h),
    );
    f.record("d = 13", s.d == Some(13), format!("{:?}", s.d));
    match out
        .graph
        .as_ref()
        .map(|g| eigensystem(g, &EigenOptions::default()))
    {
        Some(Ok(eig)) => {
            let lambda = eig.lambda_second(14.0).unwrap();
            f.check(&Check::le(
                "lambda(G) <= (3/sqrt 2) sqrt 13",
                lambda,
                3.0 / 2f64.sqrt() * 13f64.sqrt(),
                RESIDUAL_TOL * 14.0,
            ));
        }
        other => f.record(
            "G available",
            false,
            format!("{:?}", other.map(|r| r.err())),
        ),
    }
    let recorded = rep.find_checks("lambda(G) <= (3/sqrt 2)").next();
    f.record(
        "verdict recorded in report",
        recorded.is_some(),
        format!("{:?}", recorded.map(|c| c.pass)),
    );
    f.check(&Check::eq(
        "b(2) = 5/sqrt 6",
        b_constant(2),
        5.0 / 6f64.sqrt(),
        1e-12,
    ));
}

fn determinism(label: &str, a: &PipelineOutput, b: &PipelineOutput, f: &mut Findings) {
    f.record(
        format!("{label}: canonical reports byte-identical"),
        a.report.canonical_json() == b.report.canonical_json(),
        format!("{} bytes", a.report.canonical_json().len()),
    );
    let bytes = |g: &Option<Graph>| g.as_ref().map(to_edge_list_string);
    f.record(
        format!("{label}: graph files byte-identical"),
        bytes(&a.graph).is_some()
            && bytes(&a.graph) == bytes(&b.graph)
            && bytes(&a.host) == bytes(&b.host),
        "",
    );
}

fn spectral_invariants(label: &str, out: &PipelineOutput, f: &mut Findings) {
    let rep = &out.report;
    let sections: Vec<_> = rep
        .sections
        .iter()
        .filter(|s| s.name.ends_with("spectral invariants"))
        .collect();
    let steps = rep.peel.as_ref().map_or(0, |p| p.steps.len());
    f.record(
        format!("{label}: every graph decomposed"),
        sections.len() == steps + 2 && rep.failure.is_none(),
        sections
            .iter()
            .map(|s| s.name.as_str())
            .collect::<Vec<_>>()
            .join(", "),
    );
    for s in sections {
        for c in &s.checks {
            f.record(
                format!("{label}: {}: {}", s.name, c.claim),
                c.pass,
                format!("{:.3e} <= {:.3e}", c.lhs, c.rhs),
            );
        }
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let lps = lps_13_17();
    let lps_a = pipeline(lps_config());
    let lps_b = pipeline(lps_config());
    let pet_a = pipeline(petersen_config(dir.path()));
    let pet_b = pipeline(petersen_config(dir.path()));

    let results = [
        run_criterion(1, "LPS X^{13,17} construction", |f| lps_properties(&lps, f)),
        run_criterion(2, "peel X^{13,17} from degree 14 to 13", |f| {
            peel_14_to_13(&lps, f)
        }),
        run_criterion(3, "oracle equivalence", oracle_suites),
        run_criterion(4, "tree surgery on Petersen", petersen_surgery),
        run_criterion(5, "eigenvector localization", |f| {
            localization("Petersen", &pet_a, f);
            localization("X^{13,17}", &lps_a, f);
        }),
        run_criterion(6, "spectral radius of G", |f| radius_bound(&lps_a, f)),
        run_criterion(7, "determinism", |f| {
            determinism("Petersen", &pet_a, &pet_b, f);
            determinism("X^{13,17}", &lps_a, &lps_b, f);
        }),
        run_criterion(8, "spectral invariants on every graph", |f| {
            spectral_invariants("Petersen", &pet_a, f);
            spectral_invariants("X^{13,17}", &lps_a, f);
        }),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
