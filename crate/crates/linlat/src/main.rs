//! Command-line surface for the workbench.
//!
//! Exit codes: 0 success/pass, 1 verification failed, 2 usage error,
//! 3 budget exhausted, 4 instance outside the desk guard.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use linlat::families::{union_of_levels, Family, FamilyDoc};
use linlat::lattice::build_lattice;
use linlat::lym;
use linlat::posets::{named_poset, parse_poset_dsl, PosetSpec};
use linlat::qarith::{q_binomial, rational_string};
use linlat::report::{document, render, RunConfig};
use linlat::search::verify::{verify_theorem, TheoremVerdict, VerifyError, VerifyParams};
use linlat::search::{solve, SearchBudget, SearchMode, SearchProblem};

#[derive(Parser)]
#[command(name = "linlat", version, about = "Exact forbidden-subposet workbench for the linear lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gaussian binomial [n choose k]_q exactly.
    Qbinom { n: u32, k: u32, q: u32 },
    /// Exact extremal search over L(n, q).
    Search(SearchArgs),
    /// Run a named verification pipeline (thm_1.4, thm_1.5, thm_1.6,
    /// thm_1.7, thm_4.2, lemma_3.2, lemma_4.2, eq1, double_chain,
    /// pushdown_suite, ma_bound, lym_sweep, basis_map, bounds).
    Verify(VerifyArgs),
    /// Computations on simple families and chain structures.
    #[command(subcommand)]
    Lym(LymCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format for stdout.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the machine-readable document to this path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u64,
    /// Comma-separated named patterns: V:k, L:l, B, Y:k, Y':k, C:h.
    #[arg(long, value_delimiter = ',')]
    forbid: Vec<String>,
    /// Additional patterns in the inline DSL
    /// ("elements: a,b; relations: a<b"), repeatable.
    #[arg(long = "forbid-dsl")]
    forbid_dsl: Vec<String>,
    /// Forbid induced copies instead of weak subposet copies.
    #[arg(long)]
    induced: bool,
    /// Inclusive dimension filter, e.g. 1..2 (default 0..n).
    #[arg(long)]
    dims: Option<String>,
    /// Enumerate every extremal family, not just the optimum.
    #[arg(long)]
    enumerate_extremal: bool,
    /// Node budget per search pass.
    #[arg(long)]
    budget_nodes: Option<u64>,
    /// Worker threads; the output does not depend on it.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Restrict the first included element to level representatives
    /// (max-size mode, n = 3 only).
    #[arg(long)]
    symmetry: bool,
    /// Seed echoed into the report (search itself is deterministic).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Theorem id, e.g. thm_1.4 or eq1.
    id: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// Sample count for randomized suites.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum LymCmd {
    /// Exact alpha of a chain structure (I:n, D:n, K:n:k, M:n).
    Alpha {
        #[arg(long)]
        structure: String,
        #[arg(long, value_delimiter = ',')]
        forbid: Vec<String>,
        #[arg(long)]
        induced: bool,
        #[arg(long)]
        budget_nodes: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// LYM inequality verdict for a family against a chain structure.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        structure: String,
        #[arg(long, value_delimiter = ',')]
        forbid: Vec<String>,
        #[arg(long)]
        induced: bool,
        /// Family file in the JSON family format.
        #[arg(long)]
        family: Option<PathBuf>,
        /// Or a comma-separated union of levels, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact check of the chain-count identity at odd n.
    Eq1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        q: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Enumerate maximal chains of L(n, q) and compare with [n]_q!.
    Chains {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Brute-force alpha on a k-interval chain vs the closed form.
    Interval {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Single named pattern.
        #[arg(long)]
        forbid: String,
        #[command(flatten)]
        out: OutputArgs,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_GUARD: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Qbinom { n, k, q } => {
            if k > n {
                return Err(format!("qbinom needs k <= n (got n={n}, k={k})"));
            }
            if !(2..=16).contains(&q) {
                return Err(format!("qbinom needs 2 <= q <= 16 (got {q})"));
            }
            println!("{}", q_binomial(n, k, q));
            Ok(0)
        }
        Command::Search(args) => run_search(args),
        Command::Verify(args) => run_verify(args),
        Command::Lym(cmd) => run_lym(cmd),
    }
}

fn parse_patterns(named: &[String], dsl: &[String]) -> Result<Vec<PosetSpec>, String> {
    let mut out = Vec::new();
    for s in named {
        out.push(named_poset(s).map_err(|e| e.to_string())?);
    }
    for s in dsl {
        out.push(parse_poset_dsl(s).map_err(|e| e.to_string())?);
    }
    if out.is_empty() {
        return Err("no forbidden patterns given".into());
    }
    Ok(out)
}

fn parse_dims(spec: &Option<String>, n: usize) -> Result<(usize, usize), String> {
    match spec {
        None => Ok((0, n)),
        Some(s) => {
            let (lo, hi) = s
                .split_once("..")
                .ok_or_else(|| format!("dims must look like lo..hi (got {s:?})"))?;
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad dims lower bound in {s:?}"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad dims upper bound in {s:?}"))?;
            if lo > hi || hi > n {
                return Err(format!("dims {lo}..{hi} out of range for n={n}"));
            }
            Ok((lo, hi))
        }
    }
}

fn emit(out: &OutputArgs, config: &RunConfig, result: Value, text: String) -> Result<(), String> {
    let doc = document(config, result);
    let rendered = render(&doc);
    if let Some(path) = &out.output {
        std::fs::write(path, &rendered).map_err(|e| format!("cannot write {path:?}: {e}"))?;
    }
    match out.format {
        Format::Json => print!("{rendered}"),
        Format::Text => println!("{text}"),
    }
    Ok(())
}

fn run_search(args: SearchArgs) -> Result<u8, String> {
    let forbidden = parse_patterns(&args.forbid, &args.forbid_dsl)?;
    let dims = parse_dims(&args.dims, args.n)?;
    let lattice = Arc::new(build_lattice(args.n, args.q).map_err(|e| e.to_string())?);
    let mut forbidden_names: Vec<String> = args.forbid.clone();
    forbidden_names.extend(args.forbid_dsl.iter().map(|s| format!("dsl:{s}")));

    let problem = SearchProblem {
        lattice,
        forbidden,
        induced: args.induced,
        dim_range: dims,
        mode: if args.enumerate_extremal {
            SearchMode::EnumerateExtremal
        } else {
            SearchMode::MaxSize
        },
        budget: SearchBudget { max_nodes: args.budget_nodes },
        threads: args.threads,
        symmetry_reduction: args.symmetry,
    };
    let report = solve(&problem);

    let config = RunConfig {
        command: "search".into(),
        n: Some(args.n),
        q: Some(args.q),
        dims: Some(dims),
        forbidden: forbidden_names,
        induced: Some(args.induced),
        enumerate_extremal: Some(args.enumerate_extremal),
        budget_nodes: args.budget_nodes,
        seed: Some(args.seed),
        ..Default::default()
    };
    let extremal_docs: Option<Vec<FamilyDoc>> = report
        .extremal
        .as_ref()
        .map(|fams| fams.iter().map(Family::to_doc).collect());
    let result = json!({
        "optimum": report.optimum,
        "completed": report.completed,
        "nodes": report.stats.nodes,
        "bound_pruned": report.stats.bound_pruned,
        "infeasible_skips": report.stats.infeasible_skips,
        "extremal": extremal_docs,
        "notes": report.notes,
    });
    let mut text = format!(
        "optimum {} ({})",
        report.optimum,
        if report.completed { "exact" } else { "budget exhausted; lower bound" }
    );
    if let Some(fams) = &report.extremal {
        text.push_str(&format!("\nextremal families: {}", fams.len()));
    }
    text.push_str(&format!("\nnodes: {}", report.stats.nodes));
    emit(&args.out, &config, result, text)?;
    Ok(if report.completed { 0 } else { EXIT_BUDGET })
}

fn run_verify(args: VerifyArgs) -> Result<u8, String> {
    let params = VerifyParams {
        n: args.n,
        q: args.q,
        k: args.k,
        l: args.l,
        samples: args.samples,
        seed: args.seed,
        threads: args.threads,
        budget: SearchBudget { max_nodes: args.budget_nodes },
    };
    let config = RunConfig {
        command: format!("verify {}", args.id),
        n: args.n,
        q: args.q,
        k: args.k,
        l: args.l,
        samples: Some(args.samples),
        seed: Some(args.seed),
        budget_nodes: args.budget_nodes,
        ..Default::default()
    };
    match verify_theorem(&args.id, &params) {
        Ok(verdict) => {
            let code = if verdict.pass { 0 } else { EXIT_FAIL };
            let text = render_verdict(&verdict);
            let result = serde_json::to_value(&verdict).expect("serializable");
            emit(&args.out, &config, result, text)?;
            Ok(code)
        }
        Err(VerifyError::OutOfGuard(msg)) => {
            eprintln!("out of guard: {msg}");
            Ok(EXIT_GUARD)
        }
        Err(VerifyError::Budget(msg)) => {
            eprintln!("budget exhausted: {msg}");
            Ok(EXIT_BUDGET)
        }
        Err(VerifyError::Invalid(msg)) => Err(msg),
    }
}

fn render_verdict(v: &TheoremVerdict) -> String {
    let mut text = format!("{}: {}", v.id, if v.pass { "PASS" } else { "FAIL" });
    for n in &v.notes {
        text.push_str(&format!("\nnote: {n}"));
    }
    text.push_str(&format!(
        "\ndetails: {}",
        serde_json::to_string(&v.details).expect("serializable")
    ));
    text
}

fn parse_structure(spec: &str) -> Result<(String, lym::SimpleFamily), String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || format!("unknown structure {spec:?}; expected I:n, D:n, K:n:k, or M:n");
    let family = match parts.as_slice() {
        ["I", n] => lym::cyclic_intervals(n.parse().map_err(|_| bad())?),
        ["D", n] => lym::double_chain(n.parse().map_err(|_| bad())?),
        ["K", n, k] => {
            lym::k_interval_chain(n.parse().map_err(|_| bad())?, k.parse().map_err(|_| bad())?)
        }
        ["M", n] => Ok(lym::maximal_chain_family(n.parse().map_err(|_| bad())?)),
        _ => return Err(bad()),
    };
    Ok((spec.to_string(), family.map_err(|e| e.to_string())?))
}

fn run_lym(cmd: LymCmd) -> Result<u8, String> {
    match cmd {
        LymCmd::Alpha { structure, forbid, induced, budget_nodes, out } => {
            let (name, h) = parse_structure(&structure)?;
            let forbidden = parse_patterns(&forbid, &[])?;
            let config = RunConfig {
                command: "lym alpha".into(),
                structure: Some(name),
                forbidden: forbid,
                induced: Some(induced),
                budget_nodes,
                ..Default::default()
            };
            match lym::alpha(&h, &forbidden, induced, budget_nodes) {
                Ok(a) => {
                    emit(&out, &config, json!({ "alpha": a }), format!("alpha = {a}"))?;
                    Ok(0)
                }
                Err(lym::LymError::BudgetExceeded(n)) => {
                    eprintln!("budget exhausted after {n} nodes");
                    Ok(EXIT_BUDGET)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        LymCmd::Check { n, q, structure, forbid, induced, family, levels, out } => {
            let (name, h) = parse_structure(&structure)?;
            let forbidden = parse_patterns(&forbid, &[])?;
            let lattice = Arc::new(build_lattice(n, q).map_err(|e| e.to_string())?);
            let fam = if let Some(path) = family {
                let raw = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read {path:?}: {e}"))?;
                let doc: FamilyDoc =
                    serde_json::from_str(&raw).map_err(|e| format!("bad family file: {e}"))?;
                Family::from_doc(Arc::clone(&lattice), &doc).map_err(|e| e.to_string())?
            } else {
                union_of_levels(Arc::clone(&lattice), &levels).map_err(|e| e.to_string())?
            };
            let config = RunConfig {
                command: "lym check".into(),
                n: Some(n),
                q: Some(q),
                structure: Some(name),
                forbidden: forbid,
                induced: Some(induced),
                ..Default::default()
            };
            let verdict = lym::lym_check(&fam, &h, &forbidden, induced).map_err(|e| e.to_string())?;
            let lhs = rational_string(&verdict.lhs);
            let result = json!({
                "lhs": lhs,
                "alpha": verdict.alpha,
                "holds": verdict.holds,
            });
            let text = format!(
                "lhs = {lhs}, alpha = {}: {}",
                verdict.alpha,
                if verdict.holds { "inequality holds" } else { "VIOLATION" }
            );
            emit(&out, &config, result, text)?;
            Ok(if verdict.holds { 0 } else { EXIT_FAIL })
        }
        LymCmd::Eq1 { n, q, out } => {
            let v = lym::eq1_identity_check(n, q).map_err(|e| e.to_string())?;
            let config = RunConfig {
                command: "lym eq1".into(),
                n: Some(n as usize),
                q: Some(q as u64),
                ..Default::default()
            };
            let result = json!({
                "lhs": v.lhs.to_string(),
                "rhs": v.rhs.to_string(),
                "holds": v.holds,
            });
            let text = format!(
                "{} = {}: {}",
                v.lhs,
                v.rhs,
                if v.holds { "identity holds" } else { "MISMATCH" }
            );
            emit(&out, &config, result, text)?;
            Ok(if v.holds { 0 } else { EXIT_FAIL })
        }
        LymCmd::Chains { n, q, out } => {
            let lattice = build_lattice(n, q).map_err(|e| e.to_string())?;
            let chains = match lym::maximal_chains(&lattice) {
                Ok(c) => c,
                Err(lym::LymError::TooLarge(msg)) => {
                    eprintln!("out of guard: {msg}");
                    return Ok(EXIT_GUARD);
                }
                Err(e) => return Err(e.to_string()),
            };
            let expected = linlat::qarith::q_factorial(n as u32, q as u32);
            let holds = expected == num_bigint::BigUint::from(chains.len());
            let config = RunConfig {
                command: "lym chains".into(),
                n: Some(n),
                q: Some(q),
                ..Default::default()
            };
            let result = json!({
                "count": chains.len(),
                "q_factorial": expected.to_string(),
                "holds": holds,
            });
            let text = format!("{} maximal chains; [n]_q! = {expected}", chains.len());
            emit(&out, &config, result, text)?;
            Ok(if holds { 0 } else { EXIT_FAIL })
        }
        LymCmd::Interval { k, n, forbid, out } => {
            let p = named_poset(&forbid).map_err(|e| e.to_string())?;
            let v = lym::interval_chain_alpha_check(k, n, &p).map_err(|e| e.to_string())?;
            let config = RunConfig {
                command: "lym interval".into(),
                n: Some(n),
                k: Some(k),
                forbidden: vec![forbid],
                ..Default::default()
            };
            let result = json!({
                "brute": v.brute,
                "closed_form": rational_string(&v.closed_form),
                "integral": v.integral,
                "attained": v.attained,
                "within": v.within,
            });
            let text = format!(
                "brute = {}, closed form = {}{}",
                v.brute,
                rational_string(&v.closed_form),
                if v.attained {
                    " (attained)"
                } else if v.integral {
                    " (not attained)"
                } else {
                    " (non-integral; recorded as an upper value)"
                }
            );
            emit(&out, &config, result, text)?;
            Ok(if v.within { 0 } else { EXIT_FAIL })
        }
    }
}
