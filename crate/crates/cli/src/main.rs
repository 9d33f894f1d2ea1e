//! `forge`: build LPS graphs, peel 1-factors, run the tree surgery and
//! verify the whole pipeline.
//!
//! Exit status is 0 when every counted check passes, 1 when one fails and 2
//! when a stage cannot run at all.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use forge_core::check::Check;
use forge_core::graph::{Girth, Graph};
use forge_core::io::{read_graph, to_edge_list_string};
use forge_core::lps::{build_lps_graph, enumerate_generators, LpsParams, LpsSidecar};
use forge_core::matching::{peel_to_degree, PeelTrace};
use forge_core::spectral::EigenOptions;
use forge_core::surgery::{construct, SurgeryOptions, SurgeryResult, DEFAULT_MAX_ATTEMPTS};
use forge_core::verify::{run_pipeline_with, write_atomic, Mode, PipelineConfig, ReportError};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "High-girth regular graphs with localized eigenvectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Thm12,
    Thm14,
    Freeform,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Thm12 => Mode::Thm12,
            ModeArg::Thm14 => Mode::Thm14,
            ModeArg::Freeform => Mode::Freeform,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the LPS Cayley graph X^{p,q}.
    Lps {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// JSON sidecar; defaults to `<output>.json`.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Remove perfect matchings until the graph has the target degree.
    Peel {
        #[arg(long)]
        input: PathBuf,
        /// Degree of the output graph.
        #[arg(long)]
        target_degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output graph; defaults to `<input>.peeled.txt`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON trace; defaults to `<output>.json`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replace the ball around a root by the tree gadget.
    Surgery {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: usize,
        /// Output graph; defaults to `<input>.surgery.txt`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON result; defaults to `<output>.json`.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the whole pipeline and write a verification report.
    Verify {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Leave out wall-clock timings so reruns are byte-identical.
        #[arg(long)]
        canonical: bool,
        /// Also write the final graph G.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Also write the host graph H.
        #[arg(long)]
        host_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Lps { p, q, output, json } => lps(p, q, &output, json),
        Command::Peel {
            input,
            target_degree,
            seed,
            output,
            trace,
        } => {
            let output = output.unwrap_or_else(|| with_suffix(&input, ".peeled.txt"));
            peel(&input, target_degree, seed, &output, trace)
        }
        Command::Surgery {
            input,
            root,
            radius,
            seed,
            max_attempts,
            output,
            json,
        } => {
            let output = output.unwrap_or_else(|| with_suffix(&input, ".surgery.txt"));
            let opts = SurgeryOptions {
                seed,
                max_attempts,
                shuffle_l2: false,
            };
            surgery(&input, root, radius, &opts, &output, json)
        }
        Command::Verify {
            mode,
            config,
            output,
            canonical,
            graph_out,
            host_out,
        } => verify(
            mode.into(),
            &config,
            &output,
            canonical,
            graph_out,
            host_out,
        ),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text).map_err(report_err)
}

fn write_graph_atomic(path: &Path, g: &Graph) -> Result<()> {
    write_atomic(path, &to_edge_list_string(g)).map_err(report_err)
}

fn report_err(e: ReportError) -> anyhow::Error {
    anyhow::Error::new(e)
}

fn load(path: &Path) -> Result<Graph> {
    read_graph(path).with_context(|| format!("reading {}", path.display()))
}

fn verdict(checks: &[&Check]) -> u8 {
    if checks.iter().all(|c| c.pass) {
        0
    } else {
        1
    }
}

#[derive(Serialize)]
struct LpsOutput {
    #[serde(flatten)]
    params: LpsSidecar,
    edges: usize,
    girth: Girth,
    connected: bool,
    bipartite: bool,
}

fn lps(p: u64, q: u64, output: &Path, json: Option<PathBuf>) -> Result<u8> {
    let params = LpsParams::new(p, q)?;
    let start = Instant::now();
    let g = build_lps_graph(&params)?;
    eprintln!(
        "built X^{{{p},{q}}}: {} vertices in {:.2?}",
        g.vertex_count(),
        start.elapsed()
    );
    let sidecar = LpsOutput {
        params: LpsSidecar::new(&params, &enumerate_generators(p)?),
        edges: g.edge_count(),
        girth: g.girth(),
        connected: g.is_connected(),
        bipartite: g.is_bipartite(),
    };
    write_graph_atomic(output, &g)?;
    write_json(
        &json.unwrap_or_else(|| with_suffix(output, ".json")),
        &sidecar,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct PeelOutput<'a> {
    input: &'a Path,
    target_degree: usize,
    seed: u64,
    trace: &'a PeelTrace,
    checks: Vec<Vec<Check>>,
    certificates: Vec<Option<Check>>,
    spectral_invariants: Vec<Vec<Check>>,
}

fn peel(
    input: &Path,
    target_degree: usize,
    seed: u64,
    output: &Path,
    trace_path: Option<PathBuf>,
) -> Result<u8> {
    let g = load(input)?;
    let target_d = target_degree
        .checked_sub(1)
        .context("target degree must be at least 1")?;
    let result = peel_to_degree(&g, target_d, Some(seed), &EigenOptions::from_env())?;
    let steps = &result.trace.steps;
    let out = PeelOutput {
        input,
        target_degree,
        seed,
        trace: &result.trace,
        checks: steps.iter().map(|s| s.checks()).collect(),
        certificates: steps.iter().map(|s| s.certificate_check()).collect(),
        spectral_invariants: steps.iter().map(|s| s.diagnostics.checks()).collect(),
    };
    write_graph_atomic(output, &result.graph)?;
    write_json(
        &trace_path.unwrap_or_else(|| with_suffix(output, ".json")),
        &out,
    )?;
    let counted: Vec<&Check> = out
        .checks
        .iter()
        .chain(&out.spectral_invariants)
        .flatten()
        .collect();
    Ok(verdict(&counted))
}

#[derive(Serialize)]
struct SurgeryOutput<'a> {
    result: &'a SurgeryResult,
    girth_g: Girth,
    gadget_ratio: f64,
    structure: Vec<Check>,
    l2_spacing: Check,
    girth_bounds: Vec<Check>,
}

fn surgery(
    input: &Path,
    root: usize,
    radius: usize,
    opts: &SurgeryOptions,
    output: &Path,
    json: Option<PathBuf>,
) -> Result<u8> {
    let h = load(input)?;
    let res = construct(&h, root, radius, opts)?;
    let (girth_g, girth_bounds) = res.check_girth_bound();
    let out = SurgeryOutput {
        result: &res,
        girth_g,
        gadget_ratio: res.gadget_ratio(),
        structure: res.structural_checks(&h),
        l2_spacing: res.l2_distance_check(&h),
        girth_bounds,
    };
    write_graph_atomic(output, &res.graph)?;
    write_json(&json.unwrap_or_else(|| with_suffix(output, ".json")), &out)?;
    let counted: Vec<&Check> = out.structure.iter().chain(&out.girth_bounds[..1]).collect();
    Ok(verdict(&counted))
}

fn verify(
    mode: Mode,
    config_path: &Path,
    output: &Path,
    canonical: bool,
    graph_out: Option<PathBuf>,
    host_out: Option<PathBuf>,
) -> Result<u8> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let mut config = PipelineConfig::from_json(&text)
        .with_context(|| format!("parsing {}", config_path.display()))?;
    config.mode = mode;
    if let Some(p) = config.input_graph.as_mut().filter(|p| p.is_relative()) {
        if let Some(dir) = config_path.parent() {
            *p = dir.join(&*p);
        }
    }
    let out = run_pipeline_with(config, &EigenOptions::from_env());
    let report = if canonical {
        out.report.canonical()
    } else {
        out.report
    };
    write_atomic(output, &report.to_json()).map_err(report_err)?;
    if let (Some(path), Some(g)) = (graph_out, &out.graph) {
        write_graph_atomic(&path, g)?;
    }
    if let (Some(path), Some(h)) = (host_out, &out.host) {
        write_graph_atomic(&path, h)?;
    }
    if let Some(f) = &report.failure {
        eprintln!("stage {} failed: {}", f.stage, f.message);
    }
    for claim in &report.verdict.failed {
        eprintln!("fail: {claim}");
    }
    Ok(report.exit_code() as u8)
}
