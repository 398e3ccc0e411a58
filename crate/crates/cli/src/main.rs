//! `hurewicz-kit`: construct, inspect, verify and export.
//!
//! Exit status: 0 on success, 1 when a verification suite records a failure,
//! 2 on usage or capacity errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hurewicz_core::alphabet::{alphabets, enumerate_nodes, Caps, Node, PointPrefix};
use hurewicz_core::cascade::{verify_cascade, CascadeParams, Checker};
use hurewicz_core::coding::show_seq;
use hurewicz_core::departure::{BranchIndex, Model};
use hurewicz_core::fault::Fault;
use hurewicz_core::good_sequence::{
    disagreement_witness, verify_good_suite, GoodSuiteParams, IndexMapBig, WitnessCase,
};
use hurewicz_core::outcome::Outcome;
use hurewicz_core::relations::{psi, t_chain, t_graph};
use hurewicz_core::report::Report;
use hurewicz_core::verifier::{
    verify_arrival_scan, verify_departure, verify_no_isolated, ArrivalParams, DepartureParams,
    NoIsolatedParams,
};
use hurewicz_core::Nat;
use num_bigint::BigUint;

#[derive(Parser)]
#[command(
    name = "hurewicz-kit",
    version,
    about = "Prime-power coded branch maps, their relations, and the checks behind them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    OffByOneRewrite,
    DroppedNonOnes,
    NonStrictEpsilon,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::OffByOneRewrite => Fault::OffByOneRewrite,
            FaultArg::DroppedNonOnes => Fault::DroppedNonOnes,
            FaultArg::NonStrictEpsilon => Fault::NonStrictEpsilon,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// The alphabets A_0, ..., A_{depth-1} with provenance of each member.
    Alphabets {
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// All nodes of A_0 × ... × A_{length-1}.
    Nodes {
        #[arg(long)]
        length: usize,
    },
    /// Single branch maps f_{s,t}.
    Branch {
        #[command(subcommand)]
        action: BranchAction,
    },
    /// The graph of T on nodes of one length.
    Relations {
        #[arg(long)]
        length: usize,
    },
    /// ψ(s, t) and its witness branch.
    Psi { s: String, t: String },
    /// A T-chain from s to t.
    Chain { s: String, t: String },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// The source coordinate σ_s(k).
    Sigma { s: String, k: String },
    /// An extension of u on which h_s and h_t differ.
    Witness {
        s: String,
        t: String,
        /// Binary word to extend.
        #[arg(long, default_value = "")]
        u: String,
    },
}

#[derive(Subcommand)]
enum BranchAction {
    /// Must-be-1 and must-not-be-1 coordinates of D_{f_{s,t}}.
    Constraints { s: String, t: String },
    /// f_{s,t}(x) for x = point⌢1^ω (or the bare prefix).
    Apply {
        s: String,
        t: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        bare: bool,
    },
    /// The branch t with x ∈ D_{f_{s,t}}, found greedily.
    Find {
        s: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        bare: bool,
    },
}

#[derive(Subcommand)]
enum Suite {
    Departure {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 1_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
    NoIsolated {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 20)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    ArrivalScan {
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        horizon: u64,
        #[arg(long, default_value_t = 2)]
        max_chain: usize,
    },
    #[command(name = "good-suite")]
    Good {
        #[arg(long, default_value_t = 3)]
        max_s_len: usize,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        #[arg(long, default_value_t = 4)]
        max_entry: u64,
        #[arg(long, default_value_t = 12)]
        max_u_len: usize,
    },
    Cascade {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
}

/// A command's result in every format it supports.
struct Output {
    text: String,
    json: String,
    dot: Option<String>,
    failed: bool,
}

impl Output {
    fn plain(text: String, json: Value) -> Output {
        Output {
            text,
            json: pretty(&json),
            dot: None,
            failed: false,
        }
    }

    fn report(r: &Report) -> Output {
        Output {
            text: r.to_text(),
            json: r.to_json(),
            dot: None,
            failed: !r.passed(),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_seq<T>(raw: &str, parse: impl Fn(&str) -> Option<T>) -> anyhow::Result<Vec<T>> {
    let inner = raw
        .trim()
        .trim_start_matches(['(', '<'])
        .trim_end_matches([')', '>'])
        .trim();
    if inner.is_empty() || inner == "-" {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| parse(p.trim()).ok_or_else(|| anyhow!("not a natural number: {p:?} in {raw:?}")))
        .collect()
}

fn parse_nats(raw: &str) -> anyhow::Result<Vec<Nat>> {
    parse_seq(raw, |p| p.parse().ok())
}

fn parse_u64s(raw: &str) -> anyhow::Result<Vec<u64>> {
    parse_seq(raw, |p| p.parse().ok())
}

fn parse_bits(raw: &str) -> anyhow::Result<Vec<bool>> {
    raw.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(anyhow!("binary word expected, found {c:?}")),
        })
        .collect()
}

fn point(raw: &str, bare: bool) -> anyhow::Result<PointPrefix> {
    Ok(PointPrefix::new(parse_nats(raw)?, !bare))
}

fn show_prefix(x: &PointPrefix) -> String {
    format!(
        "{}{}",
        show_seq(&x.entries),
        if x.tail_ones { "⌢1^ω" } else { "" }
    )
}

fn strings(v: &[Nat]) -> Vec<String> {
    v.iter().map(Nat::to_string).collect()
}

fn outcome_word<T>(o: &Outcome<T>) -> &'static str {
    match o {
        Outcome::Yes(_) => "yes",
        Outcome::No => "no",
        Outcome::Unknown => "unknown",
    }
}

fn cmd_alphabets(depth: usize) -> anyhow::Result<Output> {
    let alphs = alphabets(depth, &Caps::default())?;
    let mut text = String::new();
    let mut levels = Vec::new();
    for a in &alphs {
        text.push_str(&format!("A_{} ({} members)\n", a.level, a.len()));
        let mut members = Vec::new();
        for v in &a.members {
            let from = a.provenance(v);
            match &from {
                Some(u) => text.push_str(&format!(
                    "  {v} = {}  from u = {}\n",
                    v.factored(),
                    show_seq(u)
                )),
                None => text.push_str(&format!("  {v}\n")),
            }
            members.push(json!({
                "value": v.to_string(),
                "factored": v.factored(),
                "provenance": from.map(|u| strings(&u)),
            }));
        }
        levels.push(json!({ "level": a.level, "members": members }));
    }
    Ok(Output::plain(text, json!({ "alphabets": levels })))
}

fn cmd_nodes(length: usize) -> anyhow::Result<Output> {
    let nodes = enumerate_nodes(length, &Caps::default())?;
    let text: String = nodes.iter().map(|n| format!("{}\n", show_seq(n))).collect();
    let list: Vec<Vec<String>> = nodes.iter().map(|n| strings(n)).collect();
    Ok(Output::plain(
        text,
        json!({ "length": length, "count": nodes.len(), "nodes": list }),
    ))
}

fn cmd_branch(action: BranchAction) -> anyhow::Result<Output> {
    let model = Model::default();
    match action {
        BranchAction::Constraints { s, t } => {
            let b = BranchIndex::new(parse_nats(&s)?, parse_nats(&t)?)?;
            let c = model.constraints(&b);
            let text = format!(
                "branch {b}\nones: {}\nnon_ones: {}\n",
                strings(&c.ones).join(", "),
                strings(&c.non_ones).join(", ")
            );
            Ok(Output::plain(
                text,
                json!({ "branch": b.to_string(), "ones": strings(&c.ones), "non_ones": strings(&c.non_ones) }),
            ))
        }
        BranchAction::Apply {
            s,
            t,
            point: raw,
            bare,
        } => {
            let b = BranchIndex::new(parse_nats(&s)?, parse_nats(&t)?)?;
            let x = point(&raw, bare)?;
            let y = model.apply(&b, &x)?;
            let text = format!("{} -> {}\n", show_prefix(&x), show_prefix(&y));
            Ok(Output::plain(
                text,
                json!({ "branch": b.to_string(), "input": strings(&x.entries), "output": strings(&y.entries), "tail_ones": y.tail_ones }),
            ))
        }
        BranchAction::Find {
            s,
            point: raw,
            bare,
        } => {
            let s = parse_nats(&s)?;
            let x = point(&raw, bare)?;
            let found = model.find_branch(&s, &x);
            let word = outcome_word(&found);
            let t = found.yes().map(|t| strings(&t));
            let text = match &t {
                Some(t) => format!("t = <{}>\n", t.join(",")),
                None => format!("{word}\n"),
            };
            Ok(Output::plain(
                text,
                json!({ "s": strings(&s), "outcome": word, "t": t }),
            ))
        }
    }
}

fn cmd_relations(length: usize) -> anyhow::Result<Output> {
    let g = t_graph(length, &Caps::default())?;
    let mut text = format!(
        "length {length}: {} nodes, {} edges, {} loops\n",
        g.nodes.len(),
        g.edges.len(),
        g.loops.len()
    );
    for e in &g.edges {
        text.push_str(&format!(
            "  {} -- {}  psi = {}\n",
            show_seq(&g.nodes[e.a]),
            show_seq(&g.nodes[e.b]),
            e.psi
        ));
    }
    let edges: Vec<Value> = g
        .edges
        .iter()
        .map(|e| json!({ "a": strings(&g.nodes[e.a]), "b": strings(&g.nodes[e.b]), "psi": e.psi }))
        .collect();
    let loops: Vec<Vec<String>> = g.loops.iter().map(|&i| strings(&g.nodes[i])).collect();
    let nodes: Vec<Vec<String>> = g.nodes.iter().map(|n| strings(n)).collect();
    let value = json!({ "schema": hurewicz_core::report::SCHEMA, "length": length, "nodes": nodes, "edges": edges, "loops": loops });
    Ok(Output {
        text,
        json: pretty(&value),
        dot: Some(g.to_dot()),
        failed: false,
    })
}

fn same_length(s: &Node, t: &Node) -> anyhow::Result<()> {
    if s.len() != t.len() {
        bail!("nodes must have equal length ({} vs {})", s.len(), t.len());
    }
    Ok(())
}

fn cmd_psi(s: &str, t: &str) -> anyhow::Result<Output> {
    let (s, t) = (parse_nats(s)?, parse_nats(t)?);
    same_length(&s, &t)?;
    Ok(match psi(&s, &t)? {
        Some((n, w)) => Output::plain(
            format!("{n} witness {}\n", w.branch),
            json!({ "psi": n, "witness": w.branch.to_string() }),
        ),
        None => Output::plain("none\n".into(), json!({ "psi": null })),
    })
}

fn cmd_chain(s: &str, t: &str) -> anyhow::Result<Output> {
    let (s, t) = (parse_nats(s)?, parse_nats(t)?);
    same_length(&s, &t)?;
    let g = t_graph(s.len(), &Caps::default())?;
    if g.node_index(&s).is_none() || g.node_index(&t).is_none() {
        bail!(
            "both arguments must be nodes of A_0 × ... × A_{}",
            s.len().saturating_sub(1)
        );
    }
    Ok(match t_chain(&s, &t, &g) {
        Some(chain) => {
            let text = chain
                .iter()
                .map(|n| show_seq(n))
                .collect::<Vec<_>>()
                .join(" -- ")
                + "\n";
            let list: Vec<Vec<String>> = chain.iter().map(|n| strings(n)).collect();
            Output::plain(text, json!({ "chain": list }))
        }
        None => Output::plain("none\n".into(), json!({ "chain": null })),
    })
}

fn cmd_verify(suite: Suite) -> anyhow::Result<Output> {
    let caps = Caps::default();
    let report = match suite {
        Suite::Departure {
            depth,
            horizon,
            samples,
            seed,
            fault,
        } => {
            let model = fault.map_or(Model::default(), |f| Model::with_fault(f.into()));
            verify_departure(
                DepartureParams {
                    depth,
                    horizon,
                    samples,
                    seed,
                },
                model,
                &caps,
            )?
        }
        Suite::NoIsolated {
            depth,
            horizon,
            samples,
            seed,
        } => verify_no_isolated(
            NoIsolatedParams {
                depth,
                horizon,
                samples,
                seed,
            },
            &caps,
        )?,
        Suite::ArrivalScan {
            depth,
            horizon,
            max_chain,
        } => verify_arrival_scan(
            ArrivalParams {
                depth,
                horizon,
                max_chain,
            },
            &caps,
        )?,
        Suite::Good {
            max_s_len,
            horizon,
            max_entry,
            max_u_len,
        } => verify_good_suite(GoodSuiteParams {
            max_s_len,
            horizon,
            max_entry,
            max_u_len,
            ..GoodSuiteParams::default()
        })?,
        Suite::Cascade {
            trials,
            seed,
            depth,
            fault,
        } => {
            let params = CascadeParams {
                trials,
                seed,
                max_depth: depth,
                ..CascadeParams::default()
            };
            verify_cascade(params, Checker::with_fault(fault.map(Fault::from)))?
        }
    };
    Ok(Output::report(&report))
}

fn cmd_sigma(s: &str, k: &str) -> anyhow::Result<Output> {
    let s = parse_u64s(s)?;
    let k: BigUint = k
        .parse()
        .with_context(|| format!("not a natural number: {k:?}"))?;
    let v = IndexMapBig::new(&s)?.sigma(&k)?;
    Ok(Output::plain(
        format!("{v}\n"),
        json!({ "s": s, "k": k.to_string(), "sigma": v.to_string() }),
    ))
}

fn cmd_witness(s: &str, t: &str, u: &str) -> anyhow::Result<Output> {
    let (s, t, u) = (parse_u64s(s)?, parse_u64s(t)?, parse_bits(u)?);
    let w = disagreement_witness::<BigUint>(&s, &t, &u)?;
    let case = match w.case {
        WitnessCase::Divergence { m } => format!("first divergence at {m}"),
        WitnessCase::Prefix => "strict prefix".to_string(),
    };
    let bits: String = w
        .prefix
        .bits
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    let text = format!(
        "case: {case}\nn = {}\nk = {}\nsource for s: {}\nsource for t: {}\nprefix: {bits}\n",
        w.n, w.k, w.source_s, w.source_t
    );
    let value = json!({
        "case": case,
        "n": w.n,
        "k": w.k.to_string(),
        "source_s": w.source_s.to_string(),
        "source_t": w.source_t.to_string(),
        "prefix": bits,
    });
    Ok(Output::plain(text, value))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let out = match cli.command {
        Command::Alphabets { depth } => cmd_alphabets(depth)?,
        Command::Nodes { length } => cmd_nodes(length)?,
        Command::Branch { action } => cmd_branch(action)?,
        Command::Relations { length } => cmd_relations(length)?,
        Command::Psi { s, t } => cmd_psi(&s, &t)?,
        Command::Chain { s, t } => cmd_chain(&s, &t)?,
        Command::Verify { suite } => cmd_verify(suite)?,
        Command::Sigma { s, k } => cmd_sigma(&s, &k)?,
        Command::Witness { s, t, u } => cmd_witness(&s, &t, &u)?,
    };
    let body = match cli.format {
        Format::Text => out.text,
        Format::Json => out.json,
        Format::Dot => out
            .dot
            .ok_or_else(|| anyhow!("this command has no DOT rendering"))?,
    };
    match &cli.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{body}"),
    }
    Ok(!out.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
