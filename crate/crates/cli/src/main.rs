//! `implog` — batch front end for the tree/dag proof tools.
//!
//! Exit status: 0 on success, 1 on a negative verdict (unproved, unverified,
//! incorrect), 2 on bad input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use implog::bench::{self, BenchConfig};
use implog::compress;
use implog::dag::{self, DagDeduction, DagJson};
use implog::dot;
use implog::encode;
use implog::lm::{self, LmConfig, LmProof};
use implog::tree::{self, TreeDeduction, TreeJson};
use implog::{Formula, FullFormula, Sequent};

#[derive(Parser)]
#[command(name = "implog", version, about = "Tree- and dag-like natural deduction for implicational minimal logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Input file (JSON deduction, LM proof, formula text or graph).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Search depth bound is this multiple of the goal's weight.
    #[arg(long, global = true, default_value_t = 2)]
    bound_mult: u64,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    count: usize,
    #[arg(long, global = true, default_value_t = 40)]
    max_weight: u64,
    #[arg(long, global = true, default_value_t = 4)]
    max_n: usize,
    /// Formula or sequent, e.g. `"=> p->p"`.
    #[arg(long, global = true)]
    goal: Option<String>,
    /// Record wall-clock times in bench output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula, sequent or full-language formula.
    Parse,
    /// Check a tree deduction and whether it proves its conclusion.
    CheckTree,
    /// Check the structure of a dag-like deduction.
    CheckDag,
    /// Search for an LM proof of the goal.
    ProveLm,
    /// Turn an LM proof (or a goal, proved first) into a tree deduction.
    Translate,
    /// Compress a tree deduction into a certified dag.
    Compress,
    /// Decide whether a dag-like deduction proves its conclusion.
    Verify,
    /// Unfold a dag-like deduction back into a tree.
    Unfold,
    /// Encode Hamiltonicity of a digraph as a formula.
    EncodeHam,
    /// Run the seeded pipeline corpus and report metrics.
    Bench,
}

/// Input problems map to exit status 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(InputError(e.into()))
}

struct Out {
    body: String,
    ok: bool,
    note: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.opts, &out.body) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if let Some(n) = out.note {
                eprintln!("{n}");
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let input = e.downcast_ref::<InputError>().is_some();
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}

fn emit(opts: &Opts, body: &str) -> anyhow::Result<()> {
    match &opts.output {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn read_input(opts: &Opts) -> anyhow::Result<(String, String)> {
    let p = opts.input.as_ref().ok_or_else(|| input_err(anyhow!("--input is required")))?;
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(input_err)?;
    Ok((p.display().to_string(), text))
}

fn read_json<T: serde::de::DeserializeOwned>(opts: &Opts) -> anyhow::Result<T> {
    let (name, text) = read_input(opts)?;
    serde_json::from_str(&text).map_err(|e| input_err(anyhow!("{name}:{}:{}: {e}", e.line(), e.column())))
}

/// Text from `--goal`, else the contents of `--input`.
fn goal_text(opts: &Opts) -> anyhow::Result<(String, String)> {
    match &opts.goal {
        Some(g) => Ok(("--goal".into(), g.clone())),
        None => read_input(opts),
    }
}

fn parse_goal(name: &str, text: &str) -> anyhow::Result<Sequent> {
    let text = text.trim();
    let r = if text.contains("=>") { Sequent::parse(text) } else { Formula::parse(text).map(Sequent::goal) };
    r.map_err(|e| input_err(anyhow!("{name}: {e}")))
}

fn read_tree(opts: &Opts) -> anyhow::Result<TreeDeduction> {
    let j: TreeJson = read_json(opts)?;
    TreeDeduction::from_json(&j).map_err(input_err)
}

fn read_dag(opts: &Opts) -> anyhow::Result<DagDeduction> {
    let j: DagJson = read_json(opts)?;
    DagDeduction::from_json(&j).map_err(input_err)
}

fn pretty(v: &impl serde::Serialize) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn tree_out(opts: &Opts, t: &TreeDeduction) -> anyhow::Result<String> {
    match opts.format {
        Format::Dot => Ok(dot::tree_to_dot(t)),
        Format::Text => Ok(format!("{}\nnodes {} height {} weight {}\n", t.conclusion(), t.len(), t.height(), t.weight())),
        Format::Json => pretty(&t.to_json()),
    }
}

fn dag_out(opts: &Opts, d: &DagDeduction) -> anyhow::Result<String> {
    match opts.format {
        Format::Dot => Ok(dot::dag_to_dot(d)),
        Format::Text => Ok(format!("{}\nnodes {} edges {} height {} weight {}\n", d.conclusion(), d.len(), d.edge_count(), d.height(), d.weight())),
        Format::Json => pretty(&d.to_json()),
    }
}

fn lm_config(opts: &Opts) -> anyhow::Result<LmConfig> {
    if opts.bound_mult == 0 {
        return Err(input_err(anyhow!("--bound-mult must be at least 1")));
    }
    Ok(LmConfig { bound_mult: opts.bound_mult, ..LmConfig::default() })
}

fn prove(opts: &Opts) -> anyhow::Result<Result<LmProof, String>> {
    let (name, text) = goal_text(opts)?;
    let goal = parse_goal(&name, &text)?;
    let s = lm::prove_with(&goal, &lm_config(opts)?)?;
    Ok(match s.proof {
        Some(p) => Ok(p),
        None => Err(match s.caveat {
            Some(c) => c,
            None => format!("unproved at bound {}", s.bound),
        }),
    })
}

fn run(cli: &Cli) -> anyhow::Result<Out> {
    let opts = &cli.opts;
    let ok = |body| Ok(Out { body, ok: true, note: None });
    match cli.cmd {
        Cmd::Parse => {
            let (name, text) = goal_text(opts)?;
            let text = text.trim();
            if let Ok(f) = Formula::parse(text) {
                return ok(match opts.format {
                    Format::Json => pretty(&json!({"kind": "formula", "formula": f, "weight": f.weight()}))?,
                    _ => format!("{f}\n"),
                });
            }
            if let Ok(s) = Sequent::parse(text) {
                return ok(match opts.format {
                    Format::Json => pretty(&json!({"kind": "sequent", "sequent": s, "weight": s.weight()}))?,
                    _ => format!("{s}\n"),
                });
            }
            let f = FullFormula::parse(text).map_err(|e| input_err(anyhow!("{name}: {e}")))?;
            ok(match opts.format {
                Format::Json => pretty(&json!({"kind": "full", "formula": f, "size": f.size()}))?,
                _ => format!("{f}\n"),
            })
        }
        Cmd::CheckTree => {
            let t = read_tree(opts)?;
            let report = tree::check_tree(&t);
            let proves = tree::proves_tree(&t);
            let body = match opts.format {
                Format::Json => pretty(&json!({
                    "locally_correct": report.locally_correct,
                    "proves": proves,
                    "violations": report.violations,
                    "open": lm::open_assumptions(&t),
                    "metrics": report.locally_correct.then(|| tree::tree_metrics(&t)),
                }))?,
                Format::Dot => dot::tree_to_dot(&t),
                Format::Text => {
                    let mut s = format!("locally correct: {}\nproves: {proves}\n", report.locally_correct);
                    for v in &report.violations {
                        s += &format!("node {}: {}\n", v.node, v.reason);
                    }
                    s
                }
            };
            Ok(Out { body, ok: proves, note: (!proves).then(|| "tree does not prove its conclusion".into()) })
        }
        Cmd::CheckDag => {
            let d = read_dag(opts)?;
            let report = dag::check_dag(&d);
            let body = match opts.format {
                Format::Dot => dot::dag_to_dot(&d),
                _ => pretty(&report)?,
            };
            Ok(Out { body, ok: report.correct, note: (!report.correct).then(|| "dag is not locally correct".into()) })
        }
        Cmd::ProveLm => match prove(opts)? {
            Ok(p) => ok(match opts.format {
                Format::Dot => bail!(input_err(anyhow!("dot output is not available for LM proofs"))),
                Format::Text => format!("proved: {} (height {}, size {})\n", p.conclusion, p.height(), p.size()),
                Format::Json => pretty(&p)?,
            }),
            Err(msg) => Ok(Out { body: String::new(), ok: false, note: Some(msg) }),
        },
        Cmd::Translate => {
            let p = if opts.input.is_some() && opts.goal.is_none() {
                let p: LmProof = read_json(opts)?;
                let r = lm::check_lm_report(&p);
                if !r.valid {
                    let why: Vec<String> = r.violations.iter().map(|v| format!("at {:?}: {}", v.path, v.reason)).collect();
                    return Err(input_err(anyhow!("invalid LM proof: {}", why.join("; "))));
                }
                p
            } else {
                match prove(opts)? {
                    Ok(p) => p,
                    Err(msg) => return Ok(Out { body: String::new(), ok: false, note: Some(msg) }),
                }
            };
            let t = lm::translate_lm_to_nd(&p)?;
            ok(tree_out(opts, &t)?)
        }
        Cmd::Compress => {
            let t = read_tree(opts)?;
            if !tree::check_tree(&t).locally_correct || !tree::proves_tree(&t) {
                return Err(input_err(anyhow!("input tree does not prove its conclusion")));
            }
            let c = compress::compress_and_certify(&t)?;
            let body = match opts.format {
                Format::Text => pretty(&c.metrics)?,
                _ => dag_out(opts, &c.dag)?,
            };
            let note = (!c.verified).then(|| "compressed dag failed verification".to_string());
            Ok(Out { body, ok: c.verified, note })
        }
        Cmd::Verify => {
            let d = read_dag(opts)?;
            let report = dag::check_dag(&d);
            if !report.correct {
                let body = pretty(&report)?;
                return Ok(Out { body, ok: false, note: Some("dag is not locally correct".into()) });
            }
            let v = dag::verify_dag_report(&d)?;
            let body = match opts.format {
                Format::Text => format!(
                    "proves: {}\nA_f-correct: {}\nopen: {:?}\nsteps: {}\n",
                    v.proves,
                    v.af_correct,
                    v.open.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    v.steps
                ),
                _ => pretty(&v)?,
            };
            Ok(Out { body, ok: v.proves, note: (!v.proves).then(|| "not verified".into()) })
        }
        Cmd::Unfold => {
            let d = read_dag(opts)?;
            let report = dag::check_dag(&d);
            if !report.correct {
                return Err(input_err(anyhow!("dag is not locally correct: {}", report.violations.first().map_or("", |v| v.reason.as_str()))));
            }
            let t = dag::unfold_dag(&d)?;
            ok(tree_out(opts, &t)?)
        }
        Cmd::EncodeHam => {
            let (name, text) = read_input(opts)?;
            let g = encode::parse_graph(&text).map_err(|e| input_err(anyhow!("{name}: {e}")))?;
            if g.n() > opts.max_n.max(encode::ORACLE_MAX_N) {
                return Err(input_err(anyhow!("{name}: {} vertices exceeds the supported maximum", g.n())));
            }
            let enc = encode::encode_alpha(&g);
            let rho = encode::rho_g(&g);
            let hamiltonian = encode::hamiltonicity_oracle(&g).ok();
            ok(match opts.format {
                Format::Json => pretty(&json!({
                    "vertices": g.n(),
                    "hamiltonian": hamiltonian,
                    "alpha": enc.alpha,
                    "alpha_size": enc.alpha.size(),
                    "rho": rho,
                    "rho_weight": rho.weight(),
                }))?,
                Format::Text => format!("{rho}\n"),
                Format::Dot => bail!(input_err(anyhow!("dot output is not available for encodings"))),
            })
        }
        Cmd::Bench => {
            if opts.bound_mult == 0 {
                return Err(input_err(anyhow!("--bound-mult must be at least 1")));
            }
            let cfg = BenchConfig {
                seed: opts.seed,
                count: opts.count,
                max_weight: opts.max_weight,
                bound_mult: opts.bound_mult,
                max_n: opts.max_n,
                timing: opts.timing,
                ..BenchConfig::default()
            };
            let r = bench::bench_corpus(&cfg)?;
            let good = r.verified_fraction == 1.0 && r.bound_fraction == 1.0;
            let body = match opts.format {
                Format::Text => r.summary(),
                _ => pretty(&r)?,
            };
            Ok(Out { body, ok: good, note: (!good).then(|| "some instances failed verification or the size bounds".into()) })
        }
    }
}
