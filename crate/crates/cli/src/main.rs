mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qcap_core::codes::{self, CodeJson};
use qcap_core::composer::{self, PlanError};
use qcap_core::galois::smallest_field_at_least;
use qcap_core::graph::bounds::{capacity_upper_bound_with, DEFAULT_WHEEL_MAX_NODES};
use qcap_core::graph::maximal::DEFAULT_MAXIMAL_MAX_NODES;
use qcap_core::graph::{self, ones, RawGraph};
use qcap_core::quantum::{self, QuantumLimits, DEFAULT_DENSITY_LIMIT, DEFAULT_SUPPORT_LIMIT};
use qcap_core::{CodeError, Gf, GraphError, SecureCode, StorageGraph};

use report::{Failure, Outcome, Report};

const EXIT_CODES: &str = "\
Exit codes:
  0  every requested check passed
  1  a check failed (see the report)
  2  usage error: unknown flag, missing or conflicting arguments
  3  an input file could not be read or parsed
  4  an enumeration or size limit was exceeded
  5  invalid input: malformed graph or code, unsupported parameters

Environment:
  QCAP_ORACLE_LIMIT  default cap on q^(k+delta) for `code oracle`";

#[derive(Debug, Parser)]
#[command(name = "qcap", version, about = "Capacity bounds, secure codes and plans for quantum storage graphs")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    /// Print a short text summary instead of JSON
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(subcommand)]
    Graph(GraphCmd),
    #[command(subcommand)]
    Code(CodeCmd),
    #[command(subcommand)]
    Quantum(QuantumCmd),
    #[command(subcommand)]
    Plan(PlanCmd),
}

#[derive(Debug, Subcommand)]
enum GraphCmd {
    /// Report every structural violation
    Validate { file: PathBuf },
    /// Do all decoding sets pairwise intersect
    Feasible { file: PathBuf },
    /// Intersection and wheel upper bounds with witnesses
    Bounds {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WHEEL_MAX_NODES)]
        wheel_max_nodes: usize,
    },
    /// Exact capacity for N <= 4 or at most three decoding sets
    Capacity { file: PathBuf },
    /// Strong maximality with a violating subset
    Maximal {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAXIMAL_MAX_NODES)]
        max_nodes: usize,
    },
}

#[derive(Debug, Subcommand)]
enum CodeCmd {
    /// Build a code from one of the families and write it as JSON
    Construct(ConstructArgs),
    /// Rank checks for every decoding set
    Verify { code: PathBuf, graph: PathBuf },
    /// Exhaustive check over all (a, b)
    Oracle {
        code: PathBuf,
        graph: PathBuf,
        /// Cap on q^(k+delta)
        #[arg(long)]
        limit: Option<u128>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Family {
    Mds,
    Wheel,
    Fano,
    Intersection,
    Feasibility,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Node count N (mds, wheel)
    #[arg(long)]
    n: Option<usize>,
    /// Decoding set size K (mds)
    #[arg(long = "k-param")]
    k_param: Option<usize>,
    /// Wheel component 1, 2 or 3
    #[arg(long)]
    variant: Option<u8>,
    /// Number of base decoding sets (intersection)
    #[arg(long)]
    delta: Option<usize>,
    /// Sets per node (intersection)
    #[arg(long)]
    m: Option<usize>,
    /// Field order
    #[arg(long, conflicts_with_all = ["p", "deg"])]
    q: Option<u32>,
    /// Field characteristic, with --deg
    #[arg(long, requires = "deg")]
    p: Option<u32>,
    /// Extension degree, with --p
    #[arg(long, requires = "p")]
    deg: Option<u32>,
    /// Required for intersection
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    retries: u32,
    /// Input graph (feasibility)
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Also write the matching graph here
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum QuantumCmd {
    /// Recovery and security certificates for every decoding set
    Check {
        code: PathBuf,
        graph: PathBuf,
        /// Cap on q^delta and q^k
        #[arg(long)]
        limit: Option<u128>,
        /// Cap on q^(erased width)
        #[arg(long)]
        density_limit: Option<u128>,
    },
}

#[derive(Debug, Subcommand)]
enum PlanCmd {
    /// Layered MDS plan
    Mds {
        graph: PathBuf,
        #[arg(long)]
        q: Option<u32>,
    },
    /// Wheel component mix
    Wheel {
        graph: PathBuf,
        #[arg(long)]
        q: Option<u32>,
    },
    /// Plan for N <= 4 or at most three decoding sets
    Small {
        graph: PathBuf,
        #[arg(long)]
        q: Option<u32>,
    },
}

/// Input bytes read so far, in order, for the digest.
#[derive(Default)]
struct Inputs(Vec<Vec<u8>>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Failure::Parse(format!("{}: not UTF-8", path.display())))?;
        self.0.push(bytes);
        Ok(text)
    }

    fn raw_graph(&mut self, path: &Path) -> Result<RawGraph, Failure> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }

    fn graph(&mut self, path: &Path) -> Result<StorageGraph, Failure> {
        graph::validate_graph(self.raw_graph(path)?).map_err(graph_failure)
    }

    fn code(&mut self, path: &Path) -> Result<SecureCode, Failure> {
        let text = self.read(path)?;
        let j: CodeJson =
            serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        SecureCode::from_json(&j).map_err(code_failure)
    }
}

fn graph_failure(e: GraphError) -> Failure {
    match e {
        GraphError::TooManyNodes { .. } => Failure::Limit(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn code_failure(e: CodeError) -> Failure {
    match e {
        CodeError::LimitExceeded { .. } => Failure::Limit(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn plan_failure(e: PlanError) -> Failure {
    match e {
        PlanError::Code(c) => code_failure(c),
        PlanError::Graph(g) => graph_failure(g),
        other => Failure::Invalid(other.to_string()),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn field(q: Option<u32>, p: Option<u32>, deg: Option<u32>, at_least: usize) -> Result<Gf, Failure> {
    let bad = |e: qcap_core::galois::GaloisError| Failure::Invalid(e.to_string());
    match (q, p, deg) {
        (Some(q), _, _) => Gf::of_order(q).map_err(bad),
        (None, Some(p), Some(m)) => Gf::new(p, m).map_err(bad),
        _ => {
            let (p, m) = smallest_field_at_least(at_least as u32)
                .ok_or_else(|| Failure::Invalid(format!("no built-in field of order >= {at_least}")))?;
            Gf::new(p, m).map_err(bad)
        }
    }
}

fn need<T>(x: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    x.ok_or_else(|| Failure::Usage(format!("--family {family} needs {flag}")))
}

fn run_graph(cmd: &GraphCmd, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    match cmd {
        GraphCmd::Validate { file } => {
            let raw = inputs.raw_graph(file)?;
            let (nodes, sets) = (raw.nodes.len(), raw.decoding_sets.len());
            let violations = match graph::validate_graph(raw) {
                Ok(_) => Vec::new(),
                Err(GraphError::Invalid(v)) => v,
                Err(e) => return Err(graph_failure(e)),
            };
            let valid = violations.is_empty();
            Ok(Outcome {
                results: json!({ "valid": valid, "nodes": nodes, "decoding_sets": sets, "violations": violations }),
                passed: valid,
            })
        }
        GraphCmd::Feasible { file } => {
            let g = inputs.graph(file)?;
            let f = graph::is_feasible(&g);
            Ok(Outcome { results: to_value(&f), passed: f.feasible })
        }
        GraphCmd::Bounds { file, wheel_max_nodes } => {
            let g = inputs.graph(file)?;
            let intersection = graph::intersection_bound(&g).ok();
            let (wheel, wheel_note) = match graph::wheel_bound_search(&g, *wheel_max_nodes) {
                Ok(w) => (w, None),
                Err(e) => (None, Some(e.to_string())),
            };
            let upper = capacity_upper_bound_with(&g, *wheel_max_nodes);
            let rechecked = upper.recheck(&g).map(|v| v == upper.value).unwrap_or(false);
            Ok(Outcome {
                results: json!({
                    "intersection": intersection,
                    "wheel": wheel,
                    "wheel_skipped": wheel_note,
                    "upper_bound": upper,
                    "rechecked": rechecked,
                }),
                passed: rechecked,
            })
        }
        GraphCmd::Capacity { file } => {
            let g = inputs.graph(file)?;
            let c = graph::capacity_small(&g).map_err(graph_failure)?;
            Ok(Outcome {
                results: json!({ "capacity": c.value, "formula": c.formula, "certificate": c.certificate }),
                passed: true,
            })
        }
        GraphCmd::Maximal { file, max_nodes } => {
            let g = inputs.graph(file)?;
            let m = graph::is_strongly_maximal(&g, *max_nodes).map_err(graph_failure)?;
            Ok(Outcome { results: to_value(&m), passed: m.strongly_maximal })
        }
    }
}

fn write_json<T: Serialize>(path: &Path, x: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(x).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn construct(a: &ConstructArgs, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    let mut extra = json!({});
    let (code, g) = match a.family {
        Family::Mds => {
            let n = need(a.n, "--n", "mds")?;
            let k = need(a.k_param, "--k-param", "mds")?;
            let f = field(a.q, a.p, a.deg, n)?;
            let code = codes::construct_mds_uniform(n, k, &f).map_err(code_failure)?;
            (code, graph::mds_graph(n, k, &ones(n)).map_err(graph_failure)?)
        }
        Family::Wheel => {
            let n = need(a.n, "--n", "wheel")?;
            let v = a.variant.unwrap_or(1);
            let f = field(a.q, a.p, a.deg, n)?;
            let code = codes::construct_wheel_component(n, v, &f).map_err(code_failure)?;
            (code, graph::wheel_graph(&ones(n)).map_err(graph_failure)?)
        }
        Family::Fano => {
            let f = field(a.q, a.p, a.deg, 2)?;
            (codes::construct_fano(&f).map_err(code_failure)?, graph::fano_graph(&ones(7)).map_err(graph_failure)?)
        }
        Family::Intersection => {
            let d = need(a.delta, "--delta", "intersection")?;
            let m = need(a.m, "--m", "intersection")?;
            let seed = need(a.seed, "--seed", "intersection")?;
            let bound = codes::intersection_field_bound(d, m);
            let f = field(a.q, a.p, a.deg, bound as usize + 1)?;
            let build = codes::construct_intersection(d, m, &f, seed, a.retries).map_err(code_failure)?;
            extra = json!({ "seed": build.seed, "attempts": build.attempts, "field_bound": bound });
            let g = graph::intersection_graph(d, m, &ones(graph::families::binomial(d, m))).map_err(graph_failure)?;
            (build.code, g)
        }
        Family::Feasibility => {
            let path = need(a.graph.as_ref(), "--graph", "feasibility")?;
            let g = inputs.graph(path)?;
            (codes::construct_feasibility(&g).map_err(code_failure)?, g)
        }
    };
    let report = codes::verify_code(&code, &g).map_err(code_failure)?;
    write_json(&a.output, &code.to_json())?;
    if let Some(p) = &a.graph_out {
        write_json(p, &g)?;
    }
    let mut results = json!({
        "family": a.family,
        "output": a.output.display().to_string(),
        "graph_output": a.graph_out.as_ref().map(|p| p.display().to_string()),
        "field": code.field().spec(),
        "k": code.k(),
        "delta": code.delta(),
        "kappa": code.kappa(),
        "node_widths": code.node_widths(),
        "rate": codes::rate(&code),
        "verification": report,
    });
    if let (Value::Object(r), Value::Object(e)) = (&mut results, extra) {
        r.extend(e);
    }
    let passed = report.pass && report.preconditions_ok;
    Ok(Outcome { results, passed })
}

fn oracle_limit(flag: Option<u128>) -> Result<u128, Failure> {
    if let Some(l) = flag {
        return Ok(l);
    }
    match std::env::var("QCAP_ORACLE_LIMIT") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("QCAP_ORACLE_LIMIT={s:?} is not a non-negative integer"))),
        Err(_) => Ok(codes::DEFAULT_ORACLE_LIMIT),
    }
}

fn run_code(cmd: &CodeCmd, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    match cmd {
        CodeCmd::Construct(a) => construct(a, inputs),
        CodeCmd::Verify { code, graph } => {
            let code = inputs.code(code)?;
            let g = inputs.graph(graph)?;
            let r = codes::verify_code(&code, &g).map_err(code_failure)?;
            let checks = 2 * r.edges.len();
            let passed_checks: usize = r.edges.iter().map(|e| e.decode_ok as usize + e.security_ok as usize).sum();
            let passed = r.pass && r.preconditions_ok;
            let mut results = to_value(&r);
            results["checks"] = json!(checks);
            results["checks_passed"] = json!(passed_checks);
            Ok(Outcome { results, passed })
        }
        CodeCmd::Oracle { code, graph, limit } => {
            let limit = oracle_limit(*limit)?;
            let code = inputs.code(code)?;
            let g = inputs.graph(graph)?;
            let verdicts = codes::entropy_oracle_all(&code, &g, limit).map_err(code_failure)?;
            let mut edges = Vec::new();
            let mut agree = true;
            for v in &verdicts {
                let (d, _) = codes::verify_decoding(&code, &g, &v.edge).map_err(code_failure)?;
                let (s, _) = codes::verify_security(&code, &g, &v.edge).map_err(code_failure)?;
                let same = d == v.decodable && s == v.secure;
                agree &= same;
                let mut e = to_value(v);
                e["agrees_with_ranks"] = json!(same);
                edges.push(e);
            }
            let passed = verdicts.iter().all(|v| v.decodable && v.secure);
            Ok(Outcome {
                results: json!({ "limit": limit.to_string(), "edges": edges, "agrees_with_ranks": agree }),
                passed,
            })
        }
    }
}

fn run_quantum(cmd: &QuantumCmd, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    let QuantumCmd::Check { code, graph, limit, density_limit } = cmd;
    let limits = QuantumLimits {
        support: limit.unwrap_or(DEFAULT_SUPPORT_LIMIT),
        density: density_limit.unwrap_or(DEFAULT_DENSITY_LIMIT),
    };
    let code = inputs.code(code)?;
    let g = inputs.graph(graph)?;
    let mut certs = Vec::new();
    for e in g.decoding_sets() {
        let mut c = quantum::verify_quantum_recovery_with(&code, &g, e, &limits).map_err(code_failure)?;
        c.security_ok = match quantum::verify_quantum_security_with(&code, &g, e, &limits) {
            Ok(s) => Some(s),
            Err(CodeError::LimitExceeded { .. }) => None,
            Err(other) => return Err(code_failure(other)),
        };
        certs.push(c);
    }
    let passed = certs.iter().all(|c| c.factorization_ok && c.security_ok != Some(false));
    let skipped = certs.iter().filter(|c| c.security_ok.is_none()).count();
    Ok(Outcome { results: json!({ "certificates": certs, "security_skipped": skipped }), passed })
}

fn run_plan(cmd: &PlanCmd, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    let (path, q) = match cmd {
        PlanCmd::Mds { graph, q } | PlanCmd::Wheel { graph, q } | PlanCmd::Small { graph, q } => (graph, *q),
    };
    let g = inputs.graph(path)?;
    let f = field(q, None, None, g.n().max(3))?;
    let plan = match cmd {
        PlanCmd::Mds { .. } => composer::mds_plan_for_graph(&g, &f),
        PlanCmd::Wheel { .. } => composer::wheel_plan_for_graph(&g, &f),
        PlanCmd::Small { .. } => composer::small_graph_plan(&g, &f),
    }
    .map_err(plan_failure)?;
    let valid = composer::validate_plan(&plan);
    let upper = capacity_upper_bound_with(&g, DEFAULT_WHEEL_MAX_NODES);
    let rate = composer::plan_rate(&plan);
    Ok(Outcome {
        results: json!({
            "rate": rate,
            "valid": valid.is_ok(),
            "invalid_reason": valid.as_ref().err().map(|e| e.to_string()),
            "upper_bound": upper.value,
            "meets_upper_bound": rate == upper.value,
            "plan": plan.to_json(),
        }),
        passed: valid.is_ok(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut inputs = Inputs::default();
    let outcome = match &cli.command {
        Command::Graph(c) => run_graph(c, &mut inputs),
        Command::Code(c) => run_code(c, &mut inputs),
        Command::Quantum(c) => run_quantum(c, &mut inputs),
        Command::Plan(c) => run_plan(c, &mut inputs),
    };
    if let Err(e) = &outcome {
        eprintln!("qcap: {e}");
    }
    let report = Report::new(argv, &inputs.0, outcome);
    if cli.pretty {
        print!("{}", report.to_pretty());
    } else {
        println!("{}", report.to_json());
    }
    ExitCode::from(report.exit_code as u8)
}
