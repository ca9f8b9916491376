//! `monocycle` command-line front end.
//!
//! Every subcommand writes one JSON document to stdout (and to `--out` when
//! given). Exit codes: 0 success, 1 negative result, 2 usage error, 3 capacity.

use clap::{Args, Parser, Subcommand, ValueEnum};
use monocycle::absorbing::{self, AbsorbError, AbsorbParams, AbsorbingPath, Host};
use monocycle::cluster::{self, ClusterError, ClusterGraph};
use monocycle::extremal::{self, BlockModel, ExtremalError, Fill, SearchParams, Target};
use monocycle::hamiltonicity::{self as ham, HamError};
use monocycle::matching::{self, HallOutcome, LemmaOutcome, MatchingError, TutteVerdict};
use monocycle::path_partition::{self, CorollaryError};
use monocycle::robustness::{self, PerturbationParams, RobustError, Verdict, DEFAULT_BUDGET};
use monocycle::solver::{self, PartitionCertificate};
use monocycle::{generate, Colour, ColouredGraph, GraphError, VertexSet, View};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "monocycle", version, about = "Red/blue cycle partitions of 2-coloured graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the JSON output to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wrap the payload in a run report with recomputed verification status.
    #[arg(long, global = true)]
    report: bool,
    /// Include wall time in the run report (breaks byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    /// Colour view: R, B or U (union).
    #[arg(long, global = true, value_enum)]
    view: Option<ViewArg>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    rho: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ViewArg {
    #[value(name = "R")]
    R,
    #[value(name = "B")]
    B,
    #[value(name = "U")]
    U,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> View {
        match v {
            ViewArg::R => View::Red,
            ViewArg::B => View::Blue,
            ViewArg::U => View::Union,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact red/blue cycle partition (n <= 24).
    Solve { graph: PathBuf },
    /// Check a partition certificate against a graph.
    Verify { graph: PathBuf, certificate: PathBuf },
    /// Random graphs with minimum degree ceil(3n/4), solved exactly.
    Scan {
        /// Inclusive range such as 8..12, or a single n.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Maximum matching of a colour view.
    Matching { graph: PathBuf },
    /// Exhaustive Tutte-condition check (n <= 24).
    Tutte { graph: PathBuf },
    /// Matching lemmas with stability fallbacks.
    Lemma {
        #[command(subcommand)]
        which: LemmaCmd,
    },
    /// Path partition into an empty pair and a Hamilton path.
    PathPartition {
        graph: PathBuf,
        /// Parts file with the bipartition V1, V2; runs the bipartite corollary with --k.
        #[arg(long)]
        bipartition: Option<PathBuf>,
    },
    /// Robustness checks.
    Robust {
        #[command(subcommand)]
        which: RobustCmd,
    },
    /// Absorbing paths.
    Absorb {
        #[command(subcommand)]
        which: AbsorbCmd,
    },
    /// Blow up a cluster graph and convert a connected matching into a cycle.
    Convert {
        cluster: PathBuf,
    },
    /// Block models for sharpness examples.
    Family {
        #[command(subcommand)]
        which: FamilyCmd,
    },
    /// Random 2-coloured graph.
    Gen {
        #[arg(long)]
        n: usize,
        /// Minimum degree; switches to the min-degree generator.
        #[arg(long)]
        delta: Option<usize>,
        /// Probability an edge is red (min-degree generator) or red-only.
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        /// Edge probability for the uniform generator.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Probability an edge carries both colours (uniform generator).
        #[arg(long, default_value_t = 0.0)]
        both: f64,
    },
    /// Hamiltonicity facts about one colour view (n <= 24).
    Ham {
        graph: PathBuf,
        /// Hamilton path endpoints instead of a cycle.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        between: Option<Vec<usize>>,
        /// Parts file for the bipartite degree condition.
        #[arg(long)]
        bipartition: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum LemmaCmd {
    /// Balanced tripartite matching lemma (exact with --exact).
    Tripartite {
        graph: PathBuf,
        parts: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Hall-type dichotomy for a bipartite graph.
    Hall { graph: PathBuf, parts: PathBuf },
    /// Bipartite technical lemma.
    Biptech { graph: PathBuf, parts: PathBuf },
}

#[derive(Subcommand, Debug)]
enum RobustCmd {
    /// Check (alpha, k) robustness of a vertex subset (default: all vertices).
    Check {
        graph: PathBuf,
        /// Reference order n in alpha n^l (default: graph order).
        #[arg(long)]
        nref: Option<usize>,
        /// Parts file whose first part is F.
        #[arg(long)]
        subset: Option<PathBuf>,
        /// Parts file with X, Y for the weak variant.
        #[arg(long)]
        bipartition: Option<PathBuf>,
    },
    /// Perturb the graph and re-check at the degraded parameters.
    Perturb {
        graph: PathBuf,
        #[arg(long)]
        bipartition: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct AbsorbOpts {
    /// Gadget order l (default: smallest uniform l for strong, 2 for weak).
    #[arg(long)]
    l: Option<usize>,
    /// Anchor sampling probability (default rho / 8l^2).
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum AbsorbCmd {
    /// Build an absorbing path in a graph.
    Build {
        graph: PathBuf,
        #[arg(long)]
        bipartition: Option<PathBuf>,
        #[command(flatten)]
        opts: AbsorbOpts,
    },
    /// Build, then absorb random admissible sets and re-verify each result.
    Test {
        graph: PathBuf,
        #[arg(long)]
        bipartition: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        opts: AbsorbOpts,
    },
    /// `test` on K_n (strong) or K_{n/2,n/2} (weak).
    Demo {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        weak: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        opts: AbsorbOpts,
    },
}

#[derive(Subcommand, Debug)]
enum FamilyCmd {
    /// Exhaustive search for block models meeting a caption target.
    Search {
        /// Target such as "4m+1,3m".
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 4)]
        max_blocks: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        probes: Vec<i64>,
        #[arg(long, default_value_t = 2)]
        max_offset: i64,
        #[arg(long, default_value_t = 16)]
        fills: usize,
        #[arg(long, default_value_t = 1)]
        limit: usize,
        /// Allow arbitrarily coloured regions.
        #[arg(long)]
        arbitrary: bool,
    },
    /// Check a model (file or --known name) for sharpness.
    Verify {
        model: Option<PathBuf>,
        #[arg(long)]
        known: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        m: Vec<i64>,
        #[arg(long, default_value_t = 16)]
        fills: usize,
    },
    /// Instantiate a model as a graph.
    Emit {
        model: Option<PathBuf>,
        #[arg(long)]
        known: Option<String>,
        #[arg(long)]
        m: i64,
        /// red, blue, or seeded (uses --seed).
        #[arg(long, default_value = "seeded")]
        fill: String,
    },
}

/// A finished command: exit code, payload, and recomputed verification status.
struct Done {
    code: u8,
    payload: Value,
    verified: Option<bool>,
}

impl Done {
    fn ok(payload: Value) -> Done {
        Done { code: 0, payload, verified: None }
    }

    fn verified(mut self, v: bool) -> Done {
        self.verified = Some(v);
        self
    }
}

/// A failed command; still reported as JSON on stdout.
struct Fail {
    code: u8,
    kind: &'static str,
    message: String,
}

type Res = Result<Done, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail { code: 2, kind: "usage", message: msg.into() }
}

fn capacity(msg: impl Into<String>) -> Fail {
    Fail { code: 3, kind: "capacity", message: msg.into() }
}

fn negative(kind: &'static str, msg: impl Into<String>) -> Fail {
    Fail { code: 1, kind, message: msg.into() }
}

impl From<GraphError> for Fail {
    fn from(e: GraphError) -> Fail {
        Fail { code: 2, kind: e.code(), message: e.to_string() }
    }
}

impl From<HamError> for Fail {
    fn from(e: HamError) -> Fail {
        match e {
            HamError::Capacity { .. } => capacity(e.to_string()),
            _ => usage(e.to_string()),
        }
    }
}

impl From<MatchingError> for Fail {
    fn from(e: MatchingError) -> Fail {
        match e {
            MatchingError::Capacity { .. } => capacity(e.to_string()),
            MatchingError::Premise(_) => usage(e.to_string()),
            MatchingError::LemmaFalsified(_) => negative("lemma-falsified", e.to_string()),
        }
    }
}

impl From<RobustError> for Fail {
    fn from(e: RobustError) -> Fail {
        match e {
            RobustError::Budget(_) => capacity(e.to_string()),
            RobustError::Invalid(_) => usage(e.to_string()),
        }
    }
}

impl From<AbsorbError> for Fail {
    fn from(e: AbsorbError) -> Fail {
        match e {
            AbsorbError::Capacity(_) => capacity(e.to_string()),
            AbsorbError::Robust(r) => r.into(),
            AbsorbError::Invalid(_) | AbsorbError::Unbalanced { .. } | AbsorbError::NotAdjacent { .. } | AbsorbError::GadgetUsed(_) => {
                usage(e.to_string())
            }
            _ => negative("absorb-failed", e.to_string()),
        }
    }
}

impl From<ClusterError> for Fail {
    fn from(e: ClusterError) -> Fail {
        match e {
            ClusterError::Invalid(_) | ClusterError::Disconnected => usage(e.to_string()),
            ClusterError::Robust(r) => r.into(),
            ClusterError::Splice { .. } => negative("splice", e.to_string()),
            _ => negative("conversion-failed", e.to_string()),
        }
    }
}

impl From<ExtremalError> for Fail {
    fn from(e: ExtremalError) -> Fail {
        match e {
            ExtremalError::Ham(h) => h.into(),
            _ => usage(e.to_string()),
        }
    }
}

impl From<CorollaryError> for Fail {
    fn from(e: CorollaryError) -> Fail {
        match e {
            CorollaryError::Ham(h) => h.into(),
            CorollaryError::Premise(_) => usage(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<ColouredGraph, Fail> {
    Ok(ColouredGraph::from_json(&read(path)?)?)
}

#[derive(Deserialize)]
struct PartsFile {
    parts: Vec<Vec<usize>>,
    eps: Option<f64>,
}

fn read_parts(path: &Path, n: usize) -> Result<(Vec<VertexSet>, Option<f64>), Fail> {
    let pf: PartsFile = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("parts file: {e}")))?;
    let mut sets = Vec::new();
    for p in &pf.parts {
        if let Some(&v) = p.iter().find(|&&v| v >= n) {
            return Err(usage(format!("part vertex {v} out of range for n = {n}")));
        }
        sets.push(VertexSet::from_vertices(n, p.iter().copied()));
    }
    Ok((sets, pf.eps))
}

fn two_parts(path: &Path, n: usize) -> Result<(VertexSet, VertexSet, Option<f64>), Fail> {
    let (mut parts, eps) = read_parts(path, n)?;
    if parts.len() != 2 {
        return Err(usage(format!("expected 2 parts, got {}", parts.len())));
    }
    let y = parts.pop().unwrap();
    let x = parts.pop().unwrap();
    Ok((x, y, eps))
}

fn budget() -> Result<u64, Fail> {
    match std::env::var("MONOCYCLE_BUDGET") {
        Ok(s) => s.trim().parse().map_err(|_| usage(format!("MONOCYCLE_BUDGET={s:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable payload")
}

fn graph_value(g: &ColouredGraph) -> Value {
    serde_json::from_str(&g.to_json()).expect("graph JSON")
}

fn parse_range(s: &str) -> Result<Vec<usize>, Fail> {
    let bad = || usage(format!("bad range {s:?}; use A..B or A"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

fn is_cycle_in(g: &ColouredGraph, view: View, seq: &[usize], closed: bool) -> bool {
    let mut seen = VertexSet::empty(g.n());
    if !seq.iter().all(|&v| v < g.n() && seen.insert(v)) {
        return false;
    }
    let steps = seq.windows(2).all(|w| g.has_edge(w[0], w[1], view));
    steps && (!closed || seq.len() < 3 || g.has_edge(seq[0], seq[seq.len() - 1], view))
}

fn run(cmd: &Cmd, gl: &Global) -> Res {
    let view: View = gl.view.map(View::from).unwrap_or(View::Red);
    match cmd {
        Cmd::Solve { graph } => {
            let g = read_graph(graph)?;
            match solver::solve(&g)? {
                Some(cert) => {
                    let ok = solver::verify(&g, &cert).is_ok();
                    Ok(Done::ok(to_value(&cert)).verified(ok))
                }
                None => Ok(Done { code: 1, payload: json!({"result": "none"}), verified: None }),
            }
        }
        Cmd::Verify { graph, certificate } => {
            let g = read_graph(graph)?;
            let cert: PartitionCertificate =
                serde_json::from_str(&read(certificate)?).map_err(|e| usage(format!("certificate: {e}")))?;
            Ok(match solver::verify(&g, &cert) {
                Ok(()) => Done::ok(json!({"valid": true})).verified(true),
                Err(f) => Done { code: 1, payload: json!({"valid": false, "reason": f.to_string()}), verified: Some(false) },
            })
        }
        Cmd::Scan { n, trials } => {
            let ns = parse_range(n)?;
            if let Some(&bad) = ns.iter().find(|&&k| k < 4) {
                return Err(usage(format!("scan needs n >= 4, got {bad}")));
            }
            let mut records = Vec::new();
            let mut all_ok = true;
            for &k in &ns {
                log::info!("scanning n = {k}, {trials} trials");
                let inst = solver::scan_instances(k, *trials, gl.seed)?;
                let yes = inst.iter().filter(|(_, c)| c.is_some()).count();
                all_ok &= inst.iter().all(|(g, c)| c.as_ref().is_none_or(|c| solver::verify(g, c).is_ok()));
                let no_instances: Vec<Value> = inst.iter().filter(|(_, c)| c.is_none()).map(|(g, _)| graph_value(g)).collect();
                records.push(solver::ScanRecord {
                    n: k,
                    trials: *trials,
                    min_degree: (3 * k).div_ceil(4),
                    yes,
                    no: inst.len() - yes,
                    no_instances,
                });
            }
            let report = solver::ScanReport { seed: gl.seed, records };
            Ok(Done::ok(to_value(&report)).verified(all_ok))
        }
        Cmd::Matching { graph } => {
            let g = read_graph(graph)?;
            let m = matching::max_matching(&g, view);
            let valid = m.is_valid(&g, view);
            Ok(Done::ok(json!({"size": m.size(), "perfect": m.is_perfect(g.n()), "edges": m.edges})).verified(valid))
        }
        Cmd::Tutte { graph } => {
            let g = read_graph(graph)?;
            let v = matching::tutte_oracle(&g, view)?;
            let perfect = matching::max_matching(&g, view).is_perfect(g.n());
            let code = u8::from(v != TutteVerdict::Ok);
            Ok(Done { code, verified: Some(perfect == (v == TutteVerdict::Ok)), payload: to_value(&v) })
        }
        Cmd::Lemma { which } => lemma(which, gl, view),
        Cmd::PathPartition { graph, bipartition } => {
            let g = read_graph(graph)?;
            match bipartition {
                None => {
                    let pp = path_partition::partition_empty_pair_path(&g, view);
                    let ok = pp.is_valid(&g, view);
                    Ok(Done::ok(to_value(&pp)).verified(ok))
                }
                Some(p) => {
                    let (v1, v2, _) = two_parts(p, g.n())?;
                    let k = gl.k.ok_or_else(|| usage("the corollary needs --k"))?;
                    match path_partition::bipartite_corollary(&g, view, &v1, &v2, k)? {
                        Some(pair) => {
                            let ok = pair.x1.iter().all(|&a| pair.x2.iter().all(|&b| !g.has_edge(a, b, view)));
                            Ok(Done::ok(to_value(&pair)).verified(ok))
                        }
                        None => Ok(Done { code: 1, payload: json!({"result": "undersized"}), verified: None }),
                    }
                }
            }
        }
        Cmd::Robust { which } => robust(which, gl, view),
        Cmd::Absorb { which } => absorb(which, gl, view),
        Cmd::Convert { cluster } => convert(cluster, gl, view),
        Cmd::Family { which } => family(which, gl),
        Cmd::Gen { n, delta, bias, p, both } => {
            let g = match delta {
                Some(d) => generate::random_min_degree_graph(*n, *d, *bias, gl.seed)?,
                None => {
                    if *n == 0 {
                        return Err(usage("n must be positive"));
                    }
                    generate::random_graph(*n, *p, *bias, *both, gl.seed)
                }
            };
            Ok(Done::ok(graph_value(&g)))
        }
        Cmd::Ham { graph, between, bipartition } => hamiltonicity(graph, between.as_deref(), bipartition.as_deref(), view),
    }
}

fn lemma(which: &LemmaCmd, gl: &Global, view: View) -> Res {
    let outcome_code = |matched: bool| u8::from(!matched);
    match which {
        LemmaCmd::Tripartite { graph, parts, exact } => {
            let g = read_graph(graph)?;
            let (parts, file_eps) = read_parts(parts, g.n())?;
            if *exact {
                let m = matching::tripartite_exact(&g, view, &parts)?;
                let ok = m.is_valid(&g, view) && m.is_perfect(g.n());
                return Ok(Done::ok(json!({"outcome": "matching", "edges": m.edges})).verified(ok));
            }
            let eps = gl.eps.or(file_eps).ok_or_else(|| usage("needs --eps or an eps in the parts file"))?;
            let out = matching::tripartite_stability(&g, view, &parts, eps)?;
            let (code, ok) = match &out {
                LemmaOutcome::Matching(m) => (0, m.is_valid(&g, view) && m.is_perfect(g.n())),
                LemmaOutcome::Witness(w) => (1, w.verify(&g, view, &parts)),
                LemmaOutcome::Exhausted { .. } => (1, true),
            };
            Ok(Done { code, payload: to_value(&out), verified: Some(ok) })
        }
        LemmaCmd::Hall { graph, parts } => {
            let g = read_graph(graph)?;
            let (x1, x2, file_eps) = two_parts(parts, g.n())?;
            let eps = gl.eps.or(file_eps).ok_or_else(|| usage("needs --eps or an eps in the parts file"))?;
            let out = matching::hall_dichotomy(&g, view, &x1, &x2, eps)?;
            let (matched, ok) = match &out {
                HallOutcome::Matching(m) => (true, m.is_valid(&g, view) && m.is_perfect(g.n())),
                HallOutcome::EmptyPair { a1, a2, .. } => (false, a1.iter().all(|&a| a2.iter().all(|&b| !g.has_edge(a, b, view)))),
                HallOutcome::Exhausted { .. } => (false, true),
            };
            Ok(Done { code: outcome_code(matched), payload: to_value(&out), verified: Some(ok) })
        }
        LemmaCmd::Biptech { graph, parts } => {
            let g = read_graph(graph)?;
            let (x1, x2, file_eps) = two_parts(parts, g.n())?;
            let eps = gl.eps.or(file_eps).ok_or_else(|| usage("needs --eps or an eps in the parts file"))?;
            let out = matching::bipartite_technical(&g, view, &x1, &x2, eps)?;
            let (matched, ok) = match &out {
                LemmaOutcome::Matching(m) => (true, m.is_valid(&g, view)),
                LemmaOutcome::Witness(_) | LemmaOutcome::Exhausted { .. } => (false, true),
            };
            Ok(Done { code: outcome_code(matched), payload: to_value(&out), verified: Some(ok) })
        }
    }
}

fn robust(which: &RobustCmd, gl: &Global, view: View) -> Res {
    let alpha = gl.alpha.ok_or_else(|| usage("needs --alpha"))?;
    let k = gl.k.ok_or_else(|| usage("needs --k"))?;
    let budget = budget()?;
    match which {
        RobustCmd::Check { graph, nref, subset, bipartition } => {
            let g = read_graph(graph)?;
            let f = match subset {
                Some(p) => read_parts(p, g.n())?.0.into_iter().next().ok_or_else(|| usage("empty subset file"))?,
                None => g.vertices(),
            };
            let bip = bipartition.as_deref().map(|p| two_parts(p, g.n())).transpose()?;
            let check = robustness::check_robust(
                &g,
                view,
                &f,
                alpha,
                k,
                nref.unwrap_or(g.n()),
                bip.as_ref().map(|(x, y, _)| (x, y)),
                budget,
            )?;
            let code = u8::from(check.verdict == Verdict::None);
            Ok(Done { code, payload: to_value(&check), verified: None })
        }
        RobustCmd::Perturb { graph, bipartition, beta, trials } => {
            let g = read_graph(graph)?;
            let bip = bipartition.as_deref().map(|p| two_parts(p, g.n())).transpose()?;
            let params = PerturbationParams { alpha, k, beta: *beta, trials: *trials, seed: gl.seed, budget };
            let report = robustness::perturbation_suite(&g, view, &g.vertices(), bip.as_ref().map(|(x, y, _)| (x, y)), &params);
            let code = u8::from(report.failures() > 0);
            Ok(Done { code, payload: json!({"failures": report.failures(), "trials": to_value(&report.trials)}), verified: None })
        }
    }
}

fn build_path(host: &Host, opts: &AbsorbOpts, gl: &Global, alpha_default: f64) -> Result<AbsorbingPath, Fail> {
    let alpha = gl.alpha.unwrap_or(alpha_default);
    let rho = gl.rho.unwrap_or(0.3);
    let l = match (opts.l, host.mode()) {
        (Some(l), _) => l,
        (None, absorbing::Mode::Weak) => 2,
        (None, absorbing::Mode::Strong) => {
            absorbing::find_uniform_l(host, gl.k.unwrap_or(3), alpha * alpha, 20, gl.seed, budget()?)?.l
        }
    };
    let mut params = AbsorbParams::new(alpha, rho, l, gl.seed);
    params.p = opts.p;
    Ok(absorbing::build_absorbing_path(host, &params)?)
}

fn host_for(g: &ColouredGraph, view: View, bipartition: Option<&Path>) -> Result<Host, Fail> {
    match bipartition {
        None => Ok(Host::strong(g, view, &g.vertices())),
        Some(p) => {
            let (x, y, _) = two_parts(p, g.n())?;
            Ok(Host::weak(g, view, &x, &y)?)
        }
    }
}

fn absorb_trials(host: &Host, path: &AbsorbingPath, trials: usize, seed: u64) -> Done {
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    for t in 0..trials {
        let w = path.random_admissible(host, seed.wrapping_add(t as u64));
        sizes.push(w.len());
        let res = path.absorb_set(host, &w).map_err(|e| e.to_string()).and_then(|out| path.verify_absorption(host, &out, &w));
        if let Err(e) = res {
            failures.push(json!({"trial": t, "w": w, "error": e}));
        }
    }
    let payload = json!({
        "mode": path.mode,
        "l": path.l,
        "path_len": path.path().len(),
        "gadgets": path.gadgets.len(),
        "capacity": path.capacity,
        "trials": trials,
        "w_sizes": sizes,
        "failures": failures,
    });
    Done { code: u8::from(!failures.is_empty()), payload, verified: Some(path.check(host).is_ok()) }
}

fn absorb(which: &AbsorbCmd, gl: &Global, view: View) -> Res {
    match which {
        AbsorbCmd::Build { graph, bipartition, opts } => {
            let g = read_graph(graph)?;
            let host = host_for(&g, view, bipartition.as_deref())?;
            let path = build_path(&host, opts, gl, 0.5)?;
            let ok = path.check(&host).is_ok();
            Ok(Done::ok(path.to_json()).verified(ok))
        }
        AbsorbCmd::Test { graph, bipartition, trials, opts } => {
            let g = read_graph(graph)?;
            let host = host_for(&g, view, bipartition.as_deref())?;
            let path = build_path(&host, opts, gl, 0.5)?;
            Ok(absorb_trials(&host, &path, *trials, gl.seed))
        }
        AbsorbCmd::Demo { n, weak, trials, opts } => {
            if *n < 4 || (*weak && n % 2 == 1) {
                return Err(usage("demo needs n >= 4, even in weak mode"));
            }
            let mut opts = opts.clone();
            opts.p = opts.p.or(Some(0.2));
            let (host, alpha) = if *weak {
                let h = n / 2;
                let g = ColouredGraph::from_edges(*n, (0..h).flat_map(|i| (h..*n).map(move |j| (i, j, monocycle::Mark::Blue))));
                let x = VertexSet::from_vertices(*n, 0..h);
                let y = VertexSet::from_vertices(*n, h..*n);
                (Host::weak(&g, View::Blue, &x, &y)?, 0.2)
            } else {
                let g = ColouredGraph::complete(*n, monocycle::Mark::Red);
                opts.l = opts.l.or(Some(1));
                (Host::strong(&g, View::Red, &g.vertices()), 0.5)
            };
            let path = build_path(&host, &opts, gl, alpha)?;
            Ok(absorb_trials(&host, &path, *trials, gl.seed))
        }
    }
}

fn convert(path: &Path, gl: &Global, view: View) -> Res {
    let colour = match view {
        View::Red => Colour::Red,
        View::Blue => Colour::Blue,
        View::Union => return Err(usage("convert needs --view R or B")),
    };
    let eps = gl.eps.unwrap_or(0.1);
    let cg = ClusterGraph::from_json(&read(path)?)?;
    let (g, map) = cluster::blow_up(&cg, gl.seed);
    let cm = cluster::find_connected_matching(&cg.as_graph(), colour);
    let conv = cluster::matching_to_cycle(&g, &map, &cg, &cm, eps, &VertexSet::empty(g.n()), None)?;
    let ok = is_cycle_in(&g, view, &conv.sequence, conv.closed) && conv.covered >= conv.floor;
    let payload = json!({
        "matching": cm.edges,
        "sequence": conv.sequence,
        "closed": conv.closed,
        "covered": conv.covered,
        "u_size": conv.u_size,
        "floor": conv.floor,
        "coverage": conv.coverage(),
    });
    Ok(Done::ok(payload).verified(ok))
}

fn load_model(model: Option<&Path>, known: Option<&str>) -> Result<BlockModel, Fail> {
    match (model, known) {
        (Some(p), None) => Ok(BlockModel::from_json(&read(p)?)?),
        (None, Some(name)) => extremal::known_models()
            .remove(name)
            .ok_or_else(|| usage(format!("unknown model {name:?}; known: {:?}", extremal::known_models().keys().collect::<Vec<_>>()))),
        _ => Err(usage("give a model file or --known, not both")),
    }
}

fn family(which: &FamilyCmd, gl: &Global) -> Res {
    match which {
        FamilyCmd::Search { target, max_blocks, probes, max_offset, fills, limit, arbitrary } => {
            let target = Target::parse(target).ok_or_else(|| usage(format!("bad target {target:?}; use e.g. 4m+1,3m")))?;
            let params = SearchParams {
                max_blocks: *max_blocks,
                probes: probes.clone(),
                target,
                max_offset: *max_offset,
                seeds: *fills,
                limit: *limit,
                arbitrary: *arbitrary,
            };
            let models = extremal::search_models(&params)?;
            let mut ok = true;
            for mdl in &models {
                for &m in probes {
                    ok &= extremal::verify_sharpness(mdl, m, *fills)?.pass;
                }
            }
            let payload = json!({"models": models.iter().map(BlockModel::to_json).collect::<Vec<_>>()});
            Ok(Done { code: u8::from(models.is_empty()), payload, verified: Some(ok) })
        }
        FamilyCmd::Verify { model, known, m, fills } => {
            let mdl = load_model(model.as_deref(), known.as_deref())?;
            let reports = m.iter().map(|&mm| extremal::verify_sharpness(&mdl, mm, *fills)).collect::<Result<Vec<_>, _>>()?;
            let pass = reports.iter().all(|r| r.pass);
            Ok(Done { code: u8::from(!pass), payload: extremal::report_json(&mdl, &reports), verified: None })
        }
        FamilyCmd::Emit { model, known, m, fill } => {
            let mdl = load_model(model.as_deref(), known.as_deref())?;
            let fill = match fill.as_str() {
                "red" => Fill::AllRed,
                "blue" => Fill::AllBlue,
                "seeded" => Fill::Seeded(gl.seed),
                other => return Err(usage(format!("unknown fill {other:?}"))),
            };
            let g = extremal::instantiate(&mdl, *m, fill)?;
            Ok(Done::ok(graph_value(&g)))
        }
    }
}

fn hamiltonicity(graph: &Path, between: Option<&[usize]>, bipartition: Option<&Path>, view: View) -> Res {
    let g = read_graph(graph)?;
    let all = g.vertices();
    if let Some([a, b]) = between {
        let p = ham::hamilton_path_between(&g, view, &all, *a, *b)?;
        let ok = p.as_ref().is_none_or(|p| p.len() == g.n() && is_cycle_in(&g, view, p, false));
        let code = u8::from(p.is_none());
        return Ok(Done { code, payload: json!({"path": p}), verified: Some(ok) });
    }
    let cycle = ham::mono_cycle_on(&g, view, &all)?;
    let mut degrees = g.degree_sequence(view);
    degrees.sort_unstable();
    let chvatal = ham::chvatal_guarantees(&degrees).ok();
    let bip_chvatal = match bipartition {
        Some(p) => {
            let (x, y, _) = two_parts(p, g.n())?;
            let seq = |s: &VertexSet| {
                let mut d: Vec<usize> = s.iter().map(|v| g.degree(v, view)).collect();
                d.sort_unstable();
                d
            };
            ham::chvatal_bipartite_guarantees(&seq(&x), &seq(&y)).ok()
        }
        None => None,
    };
    let payload = json!({
        "n": g.n(),
        "hamiltonian": cycle.is_some(),
        "cycle": cycle,
        "longest_path": ham::longest_path(&g, view)?,
        "chvatal": chvatal,
        "bipartite_chvatal": bip_chvatal,
        "bondy_premise": ham::bondy_premise(&g, view),
        "pancyclic": ham::is_pancyclic(&g, view)?,
        "cycle_lengths": ham::cycle_lengths(&g, view)?,
    });
    let ok = cycle.as_ref().is_none_or(|c| c.len() == g.n() && is_cycle_in(&g, view, c, true));
    Ok(Done { code: u8::from(cycle.is_none()), payload, verified: Some(ok) })
}

fn cmd_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Solve { .. } => "solve",
        Cmd::Verify { .. } => "verify",
        Cmd::Scan { .. } => "scan",
        Cmd::Matching { .. } => "matching",
        Cmd::Tutte { .. } => "tutte",
        Cmd::Lemma { .. } => "lemma",
        Cmd::PathPartition { .. } => "path-partition",
        Cmd::Robust { .. } => "robust",
        Cmd::Absorb { .. } => "absorb",
        Cmd::Convert { .. } => "convert",
        Cmd::Family { .. } => "family",
        Cmd::Gen { .. } => "gen",
        Cmd::Ham { .. } => "ham",
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    println!("{text}");
    if let Some(p) = out {
        std::fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let version = e.kind() == clap::error::ErrorKind::DisplayVersion;
            let _ = e.print();
            return ExitCode::from(if version { 0 } else { 2 });
        }
    };
    let gl = &cli.global;
    if let Some(t) = gl.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let start = Instant::now();
    let result = run(&cli.cmd, gl);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (code, payload, verified) = match result {
        Ok(d) => (d.code, d.payload, d.verified),
        Err(f) => {
            log::error!("{}", f.message);
            (f.code, json!({"error": f.kind, "message": f.message}), None)
        }
    };
    if gl.timing {
        log::info!("wall time {wall_ms:.1} ms");
    }
    let doc = if gl.report {
        let mut r = json!({
            "subcommand": cmd_name(&cli.cmd),
            "parameters": argv[1..].to_vec(),
            "seed": gl.seed,
            "exit": code,
            "result": payload,
            "verified": verified,
        });
        if gl.timing {
            r["wall_ms"] = json!(wall_ms);
        }
        r
    } else {
        payload
    };
    if let Err(e) = emit(&doc.to_string(), gl.out.as_deref()) {
        log::error!("{e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
