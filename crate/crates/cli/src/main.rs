use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use expander_potts::generators::GeneratorSpec;
use expander_potts::oracle::{exact_log_z, exact_log_z_psi, exact_log_z_star, min_edge_expansion};
use expander_potts::partition::{partition_into_expanders, verify_partition, ExpanderPartition, PartitionParams};
use expander_potts::potts::{
    approx_z_expander, approx_z_good_parts, approx_z_sse, approx_z_with_partition, CertifiedPartition,
    PottsResult,
};
use expander_potts::{Budgets, Error, Graph, Parts, VertexSet};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "expander-potts", version, about = "Expander partitions and Potts partition-function approximation")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a graph into expanders and verify the certificates.
    Partition {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
    },
    /// Approximate log Z.
    Potts(PottsArgs),
    /// Exact log Z by enumeration.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        beta: f64,
        /// Also report log Z* and every log Z^psi for this partition.
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Approximate, compute exactly, and compare against the reported bound.
    Verify(PottsArgs),
    /// Write a generated graph as an edge list.
    Generate {
        /// random-regular(n,d), clique-chain(t,s,bridges), cycle(n) or complete(n).
        spec: GeneratorSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Edge-list file.
    #[arg(required_unless_present = "generate", conflicts_with = "generate")]
    path: Option<PathBuf>,
    /// Generate the input instead, e.g. `random-regular(10,3)`.
    #[arg(long)]
    generate: Option<GeneratorSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Input {
    fn load(&self) -> anyhow::Result<Graph> {
        match (&self.path, &self.generate) {
            (Some(p), _) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(expander_potts::graph::parse_edge_list(&text).map_err(Error::from)?)
            }
            (None, Some(spec)) => spec.generate(self.seed).map_err(|e| match e {
                expander_potts::generators::GeneratorError::Graph(g) => Error::from(g).into(),
                other => anyhow!(Error::Precondition(other.to_string())),
            }),
            (None, None) => bail!(Error::Precondition("no input graph".into())),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PipelineMode {
    /// Partition with Algorithm-1 constants, threshold from the spectrum.
    Sse,
    /// Certified partition: from --partition, or the parts found for --k.
    Partition,
    /// Whole graph as one part, with expansion --alpha.
    Expander,
}

#[derive(Args)]
struct PottsArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    eps: f64,
    /// Default: partition when --k or --partition is given, else expander.
    #[arg(long, value_enum)]
    mode: Option<PipelineMode>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// Edge expansion for expander mode; computed exactly when omitted.
    #[arg(long)]
    alpha: Option<f64>,
    /// Partition file, one part per line as whitespace-separated vertex ids.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Parts below eta*n vertices are treated separately (partition mode).
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, global = true)]
    budget_colourings: Option<f64>,
    #[arg(long, global = true)]
    budget_polymers: Option<usize>,
    #[arg(long, global = true)]
    budget_families: Option<u64>,
    #[arg(long, global = true)]
    budget_subset_vertices: Option<usize>,
    #[arg(long, global = true)]
    budget_kway_vertices: Option<usize>,
    #[arg(long, global = true)]
    budget_restricted_size: Option<usize>,
    #[arg(long, global = true)]
    budget_clusters: Option<u64>,
    #[arg(long, global = true)]
    budget_ground_states: Option<f64>,
    /// Multiplier c in the partition iteration budget c*k*n*m.
    #[arg(long, global = true)]
    budget_iterations: Option<u64>,
}

impl BudgetArgs {
    fn resolve(&self) -> Budgets {
        let mut b = Budgets::default();
        macro_rules! apply {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag {
                    eprintln!(
                        "WARNING: --{} overrides the default budget {} with {}",
                        stringify!($flag).replace('_', "-"),
                        b.$field,
                        v
                    );
                    b.$field = v;
                }
            )*};
        }
        apply!(
            budget_colourings => colourings,
            budget_polymers => polymers,
            budget_families => families,
            budget_subset_vertices => subset_vertices,
            budget_kway_vertices => kway_vertices,
            budget_restricted_size => restricted_size,
            budget_clusters => clusters,
            budget_ground_states => ground_states,
            budget_iterations => iteration_factor
        );
        b
    }
}

/// Exit status and output of a finished command.
struct Report {
    json: Value,
    text: String,
    ok: bool,
    /// Print `text` whatever the format.
    raw: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let budgets = cli.budgets.resolve();
    match run(&cli.command, &budgets) {
        Ok(report) => {
            let body = match cli.format {
                _ if report.raw => report.text,
                Format::Json => serde_json::to_string_pretty(&report.json).expect("serializable") + "\n",
                Format::Text => report.text,
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(if report.ok { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Budget { .. }) => 3,
        Some(Error::InvariantViolated(_)) => 2,
        _ => 1,
    }
}

fn run(command: &Command, budgets: &Budgets) -> anyhow::Result<Report> {
    match command {
        Command::Partition { input, k, c } => cmd_partition(&input.load()?, *k, *c, budgets),
        Command::Potts(args) => {
            let g = args.input.load()?;
            let r = approximate(&g, args, budgets)?;
            Ok(Report { text: potts_text(&r), json: envelope("potts", &r), ok: true, raw: false })
        }
        Command::Oracle { input, q, beta, partition } => cmd_oracle(&input.load()?, *q, *beta, partition.as_ref(), budgets),
        Command::Verify(args) => cmd_verify(&args.input.load()?, args, budgets),
        Command::Generate { spec, seed, output } => {
            let g = spec.generate(*seed).map_err(|e| Error::Precondition(e.to_string()))?;
            let text = g.to_edge_list();
            let Some(path) = output else {
                // without a file the edge list itself is the output
                return Ok(Report { json: Value::Null, text, ok: true, raw: true });
            };
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            Ok(Report {
                json: json!({
                    "schemaVersion": SCHEMA_VERSION,
                    "command": "generate",
                    "spec": spec.to_string(),
                    "seed": seed,
                    "n": g.n(),
                    "m": g.m(),
                    "edgeList": text,
                }),
                text: format!("wrote {} vertices, {} edges to {}\n", g.n(), g.m(), path.display()),
                ok: true,
                raw: false,
            })
        }
    }
}

fn envelope<T: Serialize>(command: &str, payload: &T) -> Value {
    let mut v = serde_json::to_value(payload).expect("serializable");
    if let Value::Object(map) = &mut v {
        map.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
        map.insert("command".into(), json!(command));
    }
    v
}

fn cmd_partition(g: &Graph, k: usize, c: f64, budgets: &Budgets) -> anyhow::Result<Report> {
    let params = PartitionParams { k, c, iteration_factor: budgets.iteration_factor };
    let p = partition_into_expanders(g, &params)?;
    let report = verify_partition(g, &p.parts, k, &p.constants, budgets)?;
    let mut text = format!(
        "k = {k}, C = {c}: {} part(s); lambda_k = {:.6e}\nphi_in = {:.6e}, phi_out = {:.6e}, tau = {:.6}\n",
        p.ell(),
        p.lambda[k - 1],
        p.constants.phi_in,
        p.constants.phi_out,
        p.constants.tau
    );
    for (i, r) in report.parts.iter().enumerate() {
        text += &format!(
            "part {i}: {} vertices, outer {:.6}, min degree ratio {}/{}, inner {}, outer {}, degree {}\n",
            r.size,
            r.outer.value(),
            r.min_degree.inside,
            r.min_degree.degree,
            ok_word(r.inner_ok),
            ok_word(r.outer_ok),
            ok_word(r.degree_ok)
        );
    }
    text += &format!("verification: {}\n", if report.passed { "PASS" } else { "FAIL" });
    Ok(Report {
        json: json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "partition",
            "ell": p.ell(),
            "partition": p,
            "verification": report,
        }),
        text,
        ok: report.passed,
        raw: false,
    })
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn read_partition(path: &PathBuf, n: usize) -> anyhow::Result<Vec<VertexSet>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let set = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::NotAPartition(format!("line {}: expected vertex ids", i + 1)))?;
        sets.push(VertexSet::from(set));
    }
    Parts::new(n, sets.clone()).map_err(Error::NotAPartition)?;
    Ok(sets)
}

fn approximate(g: &Graph, args: &PottsArgs, budgets: &Budgets) -> anyhow::Result<PottsResult> {
    if !(args.eps > 0.0) {
        bail!(Error::Precondition(format!("eps = {} must be positive", args.eps)));
    }
    let mode = args.mode.unwrap_or(if args.k.is_some() || args.partition.is_some() {
        PipelineMode::Partition
    } else {
        PipelineMode::Expander
    });
    let (q, beta, eps) = (args.q, args.beta, args.eps);
    Ok(match mode {
        PipelineMode::Sse => {
            let k = args.k.ok_or_else(|| Error::Precondition("sse mode needs --k".into()))?;
            approx_z_sse(g, k, q, beta, eps, args.c, budgets)?
        }
        PipelineMode::Expander => {
            let alpha = match args.alpha {
                Some(a) => a,
                None => {
                    let (b, s, _) = min_edge_expansion(g, budgets)?;
                    b as f64 / s as f64
                }
            };
            approx_z_expander(g, q, beta, eps, alpha, budgets)?
        }
        PipelineMode::Partition => {
            let mut found: Option<ExpanderPartition> = None;
            let sets = match (&args.partition, args.k) {
                (Some(path), _) => read_partition(path, g.n())?,
                (None, Some(k)) => {
                    let params = PartitionParams { k, c: args.c, iteration_factor: budgets.iteration_factor };
                    let p = partition_into_expanders(g, &params)?;
                    let sets = p.parts.clone();
                    found = Some(p);
                    sets
                }
                (None, None) => bail!(Error::Precondition("partition mode needs --partition or --k".into())),
            };
            let cert = CertifiedPartition::certify(g, sets, budgets)?;
            let mut r = match args.eta {
                Some(eta) => approx_z_with_partition(g, &cert, q, beta, eps, eta, budgets)?,
                None => approx_z_good_parts(g, &cert, q, beta, eps, budgets)?,
            };
            r.partition = found;
            r
        }
    })
}

fn potts_text(r: &PottsResult) -> String {
    let mode = serde_json::to_value(r.mode).expect("serializable");
    format!(
        "log Z ~ {:.12}\neps bound {:.3e}\nmode {}\nground states {}\ntruncation depth {}\nclusters evaluated {}\nbeta threshold {:.6e}\n",
        r.log_z,
        r.eps_bound,
        mode.as_str().unwrap_or_default(),
        r.ground_states,
        r.truncation_depth,
        r.clusters_evaluated,
        r.beta_threshold
    )
}

fn cmd_oracle(g: &Graph, q: usize, beta: f64, partition: Option<&PathBuf>, budgets: &Budgets) -> anyhow::Result<Report> {
    if q < 2 {
        bail!(Error::Precondition(format!("q = {q} must be at least 2")));
    }
    let log_z = exact_log_z(g, q, beta, budgets)?;
    let mut text = format!("log Z = {log_z:.12}\n");
    let mut out = json!({
        "schemaVersion": SCHEMA_VERSION,
        "command": "oracle",
        "mode": "oracle",
        "logZ": log_z,
        "epsBound": 0.0,
        "groundStates": 0,
        "truncationDepth": 0,
        "clustersEvaluated": 0,
        "perPsi": [],
    });
    if let Some(path) = partition {
        let parts = Parts::new(g.n(), read_partition(path, g.n())?).map_err(Error::NotAPartition)?;
        let ell = parts.len() as u32;
        let total = q.checked_pow(ell).filter(|&t| t as f64 <= budgets.ground_states).ok_or(Error::Budget {
            what: "ground states",
            needed: (q as f64).powi(ell as i32),
            limit: budgets.ground_states,
        })?;
        let mut per = Vec::new();
        for index in 0..total {
            let mut colours = vec![0usize; ell as usize];
            let mut x = index;
            for c in colours.iter_mut().rev() {
                *c = x % q;
                x /= q;
            }
            let lz = exact_log_z_psi(g, &parts, &colours, q, beta, budgets)?;
            per.push(json!({ "colours": colours, "logZpsi": lz }));
        }
        let star = exact_log_z_star(g, &parts, q, beta, budgets)?;
        text += &format!("log Z* = {star:.12}\n");
        out["groundStates"] = json!(total);
        out["perPsi"] = json!(per);
        out["logZStar"] = json!(star);
    }
    Ok(Report { json: out, text, ok: true, raw: false })
}

fn cmd_verify(g: &Graph, args: &PottsArgs, budgets: &Budgets) -> anyhow::Result<Report> {
    let r = approximate(g, args, budgets)?;
    let exact = exact_log_z(g, args.q, args.beta, budgets)?;
    let error = (r.log_z - exact).abs();
    let passed = error <= r.eps_bound;
    let text = format!(
        "{}log Z exact {exact:.12}\nerror {error:.3e} against bound {:.3e}: {}\n",
        potts_text(&r),
        r.eps_bound,
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(Report {
        json: json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "verify",
            "passed": passed,
            "logZ": r.log_z,
            "logZExact": exact,
            "error": error,
            "epsBound": r.eps_bound,
            "mode": r.mode,
            "approximation": r,
        }),
        text,
        ok: passed,
        raw: false,
    })
}
