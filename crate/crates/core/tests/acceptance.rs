//! One PASS/FAIL line per acceptance criterion, each within its runtime budget.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use hurewicz_core::alphabet::{alphabets, enumerate_nodes, Caps, PointPrefix};
use hurewicz_core::cascade::{verify_cascade, CascadeParams, Checker};
use hurewicz_core::coding::{decode, encode};
use hurewicz_core::departure::{BranchIndex, Model};
use hurewicz_core::enumeration::sorted_below;
use hurewicz_core::fault::Fault;
use hurewicz_core::good_sequence::{verify_good_suite, GoodSuiteParams};
use hurewicz_core::outcome::Outcome;
use hurewicz_core::relations::{edge_set, t_graph, t_graph_pairwise};
use hurewicz_core::report::{Report, Status};
use hurewicz_core::verifier::{
    verify_arrival_scan, verify_departure, verify_no_isolated, ArrivalParams, DepartureParams,
    NoIsolatedParams,
};
use hurewicz_core::Nat;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn checks_pass(r: &Report, names: &[&str]) -> Result<String, String> {
    let mut counts = Vec::new();
    for name in names {
        let c = r
            .check(name)
            .ok_or_else(|| format!("missing check {name}"))?;
        if c.status != Status::Pass {
            let ce: Vec<String> = r
                .counterexamples
                .iter()
                .filter(|e| e.check == *name)
                .take(2)
                .map(|e| format!("{} -> {}", e.input, e.observed))
                .collect();
            return Err(format!(
                "{name} is {:?} ({} failed) {}",
                c.status,
                c.failed,
                ce.join("; ")
            ));
        }
        counts.push(format!("{name} {}", c.passed));
    }
    Ok(counts.join(", "))
}

fn from_checks(r: &Report, names: &[&str]) -> Verdict {
    match checks_pass(r, names) {
        Ok(d) => verdict(r.passed(), d),
        Err(e) => verdict(false, e),
    }
}

/// `J` straight from the definition, over the first four primes.
fn j_oracle(s: &[u64]) -> BigUint {
    if s.is_empty() {
        return BigUint::from(0u32);
    }
    s.iter()
        .zip([2u32, 3, 5, 7])
        .fold(BigUint::from(1u32), |acc, (&e, q)| {
            acc * BigUint::from(q).pow(e as u32 + 1)
        })
}

fn criterion_coding() -> Verdict {
    let mut all: Vec<Vec<u64>> = vec![Vec::new()];
    let mut frontier = all.clone();
    for _ in 0..4 {
        let next: Vec<Vec<u64>> = frontier
            .iter()
            .flat_map(|s| (0..8).map(move |v| [s.clone(), vec![v]].concat()))
            .collect();
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let mut codes = HashSet::new();
    let mut bad = Vec::new();
    for s in &all {
        let nats: Vec<Nat> = s.iter().map(|&v| Nat::from(v)).collect();
        let c = encode(&nats);
        if c.to_biguint() != Some(j_oracle(s)) {
            bad.push(format!("J{s:?} = {c}"));
        }
        if decode(&c).as_deref() != Some(&nats[..]) {
            bad.push(format!("round trip {s:?}"));
        }
        codes.insert(c);
    }
    let ok = all.len() == 4681 && codes.len() == 4681 && bad.is_empty();
    verdict(
        ok,
        format!(
            "{} sequences, {} distinct codes, {} mismatches{}",
            all.len(),
            codes.len(),
            bad.len(),
            first_of(&bad)
        ),
    )
}

fn criterion_alphabet() -> Verdict {
    let alphs = match alphabets(5, &Caps::default()) {
        Ok(a) => a,
        Err(e) => return verdict(false, e.to_string()),
    };
    let sizes: Vec<usize> = alphs.iter().map(|a| a.len()).collect();
    let small = |i: usize| {
        alphs[i]
            .members
            .iter()
            .map(|v| v.as_u64())
            .collect::<Option<Vec<u64>>>()
    };
    let mut ok = sizes == [2, 3, 7, 43, 1807]
        && small(0) == Some(vec![1, 4])
        && small(1) == Some(vec![1, 36, 288]);
    let mut checked = 0;
    for a in &alphs {
        for v in a.members.iter().filter(|v| !v.is_one()) {
            let Some(seq) = decode(v) else {
                ok = false;
                continue;
            };
            let (last, u) = seq.split_last().expect("nonzero codes are nonempty");
            let valid = last.is_one()
                && u.len() == a.level
                && u.iter().enumerate().all(|(j, x)| alphs[j].contains(x));
            ok &= valid;
            checked += 1;
        }
    }
    verdict(
        ok,
        format!("sizes {sizes:?}, {checked} provenances decoded to u⌢1"),
    )
}

fn criterion_departure(r: &Report) -> Verdict {
    from_checks(
        r,
        &[
            "domain-membership",
            "lex-increase",
            "stabilization",
            "alphabet-closure",
            "stability-bound",
            "nested-domains",
            "branch-disjointness",
            "injectivity",
        ],
    )
}

/// Every `t` of length `|s|+1` meeting the domain constraints at `u⌢1^ω`.
/// Once a candidate `t(j) = p` reads 1 at its must-be-1 coordinate, any larger
/// `t(j)` forbids that coordinate, so the scan at each level stops there.
fn domain_branches(s: &[u64], u: &[Nat]) -> Vec<Vec<u64>> {
    let read = |q: &BigUint| -> bool {
        match usize::try_from(q) {
            Ok(i) if i < u.len() => u[i].is_one(),
            _ => true,
        }
    };
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u64>> = vec![Vec::new()];
    while let Some(t) = stack.pop() {
        let j = t.len();
        if j == s.len() + 1 {
            out.push(t);
            continue;
        }
        for p in 0.. {
            let coord = j_oracle_long(&[&s[..j], &t[..], &[p]].concat());
            if read(&coord) {
                stack.push([t.clone(), vec![p]].concat());
                break;
            }
        }
    }
    out
}

fn j_oracle_long(s: &[u64]) -> BigUint {
    let mut primes = Vec::new();
    let mut n = 2u32;
    while primes.len() < s.len() {
        if primes.iter().all(|&p| !n.is_multiple_of(p)) {
            primes.push(n);
        }
        n += 1;
    }
    if s.is_empty() {
        return BigUint::from(0u32);
    }
    s.iter()
        .zip(primes)
        .fold(BigUint::from(1u32), |acc, (&e, q)| {
            acc * BigUint::from(q).pow(e as u32 + 1)
        })
}

fn criterion_density() -> Verdict {
    let caps = Caps::default();
    let model = Model::default();
    let levels: Vec<Vec<u64>> = sorted_below(10_000, None)
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let mut placed = 0u64;
    let mut bad = Vec::new();
    for p in 0..=4 {
        for u in enumerate_nodes(p, &caps).expect("depth within caps") {
            let x = PointPrefix::with_tail(u.clone());
            for s in &levels {
                let expected = domain_branches(s, &u);
                let snat: Vec<Nat> = s.iter().map(|&v| Nat::from(v)).collect();
                let found = match model.find_branch(&snat, &x) {
                    Outcome::Yes(t) => t
                        .iter()
                        .map(|v| v.as_u64().expect("small"))
                        .collect::<Vec<u64>>(),
                    other => {
                        bad.push(format!("s = {s:?}, u = {u:?}: {other:?}"));
                        continue;
                    }
                };
                let b = BranchIndex::from_u64(s, &found).expect("valid branch");
                if expected.len() == 1 && expected[0] == found && model.in_domain(&x, &b).is_yes() {
                    placed += 1;
                } else {
                    bad.push(format!(
                        "s = {s:?}, u = {u:?}: oracle {expected:?}, greedy {found:?}"
                    ));
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{placed} (node, s) placements over {} levels, {} mismatches{}",
            levels.len(),
            bad.len(),
            first_of(&bad)
        ),
    )
}

fn criterion_relations(r: &Report) -> Verdict {
    let base = from_checks(
        r,
        &[
            "psi-loop-zero",
            "psi-extension",
            "antisymmetry",
            "powers-of-two",
            "forest",
            "edge-census",
        ],
    );
    if !base.ok {
        return base;
    }
    let caps = Caps::default();
    let fast = t_graph(4, &caps).expect("within caps");
    let pairwise = t_graph_pairwise(4, &caps).expect("within caps");
    let same = edge_set(&fast) == edge_set(&pairwise) && fast.loops == pairwise.loops;
    let census = t_graph(3, &caps).expect("within caps").edges.len();
    verdict(
        same && census == 6,
        format!(
            "{}; length 4: {} edges, {} loops, pairwise agrees: {same}; length 3 census {census}",
            base.detail,
            fast.edges.len(),
            fast.loops.len()
        ),
    )
}

fn criterion_good() -> Verdict {
    match verify_good_suite(GoodSuiteParams::default()) {
        Ok(r) => from_checks(
            &r,
            &[
                "sigma-injective",
                "convergence",
                "witness",
                "closed-form",
                "totality",
            ],
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_cascade() -> Verdict {
    match verify_cascade(CascadeParams::default(), Checker::HONEST) {
        Ok(r) => from_checks(
            &r,
            &[
                "generator",
                "separation",
                "distinct-values",
                "epsilon-monotone",
                "strictness",
            ],
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn small_departure(seed: u64) -> DepartureParams {
    DepartureParams {
        depth: 3,
        horizon: 10_000,
        samples: 300,
        seed,
    }
}

fn criterion_mutations() -> Verdict {
    let caps = Caps::default();
    let cascade = CascadeParams {
        trials: 1_000,
        ..CascadeParams::default()
    };
    let mut parts = Vec::new();
    let mut ok = verify_departure(small_departure(0), Model::default(), &caps)
        .is_ok_and(|r| r.passed())
        && verify_cascade(cascade, Checker::HONEST).is_ok_and(|r| r.passed());
    for fault in Fault::ALL {
        let report = match fault {
            Fault::NonStrictEpsilon => verify_cascade(cascade, Checker::with_fault(Some(fault))),
            _ => verify_departure(small_departure(0), Model::with_fault(fault), &caps),
        };
        let caught = match report {
            Ok(r) if !r.passed() => r
                .counterexamples
                .first()
                .map(|c| format!("{}: {}", c.check, c.input)),
            _ => None,
        };
        ok &= caught.is_some();
        parts.push(format!(
            "{} caught by {}",
            fault.name(),
            caught.unwrap_or_else(|| "nothing".into())
        ));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_determinism() -> Verdict {
    let caps = Caps::default();
    type Run<'a> = (&'a str, Box<dyn Fn() -> String>);
    let runs: Vec<Run> = vec![
        (
            "departure",
            Box::new(move || {
                verify_departure(small_departure(7), Model::default(), &caps)
                    .unwrap()
                    .to_json()
            }),
        ),
        (
            "no-isolated",
            Box::new(move || {
                verify_no_isolated(
                    NoIsolatedParams {
                        depth: 2,
                        horizon: 10_000,
                        samples: 8,
                        seed: 7,
                    },
                    &caps,
                )
                .unwrap()
                .to_json()
            }),
        ),
        (
            "arrival-scan",
            Box::new(move || {
                verify_arrival_scan(
                    ArrivalParams {
                        depth: 3,
                        horizon: 64,
                        max_chain: 2,
                    },
                    &caps,
                )
                .unwrap()
                .to_json()
            }),
        ),
        (
            "good-suite",
            Box::new(|| {
                let p = GoodSuiteParams {
                    horizon: 10_000,
                    max_u_len: 8,
                    ..GoodSuiteParams::default()
                };
                verify_good_suite(p).unwrap().to_json()
            }),
        ),
        (
            "cascade",
            Box::new(|| {
                verify_cascade(
                    CascadeParams {
                        trials: 500,
                        seed: 7,
                        ..CascadeParams::default()
                    },
                    Checker::HONEST,
                )
                .unwrap()
                .to_json()
            }),
        ),
    ];
    let mut same = Vec::new();
    let mut ok = true;
    for (name, run) in &runs {
        let (a, b) = (run(), run());
        ok &= a == b && !a.is_empty();
        same.push(format!(
            "{name} {}",
            if a == b { "identical" } else { "DIFFERS" }
        ));
    }
    verdict(ok, same.join(", "))
}

fn main() -> ExitCode {
    let caps = Caps::default();
    let started = Instant::now();
    let departure = verify_departure(
        DepartureParams {
            depth: 4,
            horizon: 10_000,
            samples: 1_000,
            seed: 0,
        },
        Model::default(),
        &caps,
    )
    .expect("departure suite runs");
    let departure_time = started.elapsed();
    type Criterion<'a> = (u32, &'a str, u64, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        (1, "coding", 5, Box::new(criterion_coding)),
        (2, "alphabets", 10, Box::new(criterion_alphabet)),
        (
            3,
            "departure axioms",
            60,
            Box::new(|| criterion_departure(&departure)),
        ),
        (4, "density", 60, Box::new(criterion_density)),
        (
            5,
            "relation axioms",
            300,
            Box::new(|| criterion_relations(&departure)),
        ),
        (6, "good sequence", 120, Box::new(criterion_good)),
        (7, "cascade", 120, Box::new(criterion_cascade)),
        (
            8,
            "mutation sensitivity",
            600,
            Box::new(criterion_mutations),
        ),
        (9, "determinism", 600, Box::new(criterion_determinism)),
    ];
    let mut failures = 0;
    for (n, name, budget, run) in criteria {
        let t = Instant::now();
        let v = run();
        // The shared departure report counts toward the criteria that read it.
        let elapsed = t.elapsed()
            + if matches!(n, 3 | 5) {
                departure_time
            } else {
                Duration::ZERO
            };
        let ok = v.ok && elapsed.as_secs_f64() < budget as f64;
        failures += u32::from(!ok);
        println!(
            "{} criterion {n} ({name}): {} [{:.2}s, budget {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

fn first_of(bad: &[String]) -> String {
    bad.first()
        .map(|b| format!(", first: {b}"))
        .unwrap_or_default()
}
