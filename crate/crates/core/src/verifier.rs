//! Finite-depth verification suites for the branch maps and their relations.
//!
//! Every check is a finite statement about disagreement indices, cylinder
//! constraints or node relations; limit properties are represented by their
//! finite shadows with explicit index bounds.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{
    alphabets, enumerate_nodes, first_disagreement, Alphabet, Caps, Disagreement, MembershipOracle,
    Node, PointPrefix,
};
use crate::coding::{show_seq, snoc};
use crate::departure::{branches_below, clash, BranchIndex, CylinderConstraint, Model};
use crate::enumeration::e;
use crate::error::{Error, Result};
use crate::nat::Nat;
use crate::outcome::Outcome;
use crate::relations::{
    graph_from_images, positive_powers_of_two_below, r_images, verify_forest, witnesses, Images,
};
use crate::report::Report;

/// Relation and density checks enumerate every node; beyond this length the
/// node count (over three million at length 5) is out of reach.
pub const NODE_SCAN_LIMIT: usize = 4;

/// Random non-1 fillers are only drawn below this coordinate.
const RANDOM_FILL_BELOW: usize = 48;

/// Builds points inside branch domains.
struct Sampler {
    alphs: Vec<Alphabet>,
}

impl Sampler {
    fn new(caps: &Caps) -> Result<Sampler> {
        Ok(Sampler {
            alphs: alphabets(caps.max_depth.min(5), caps)?,
        })
    }

    fn member(&self, i: usize, prefix: &[Nat], rng: &mut ChaCha8Rng, non_one: bool) -> Nat {
        match self.alphs.get(i) {
            Some(a) => {
                let lo = usize::from(non_one);
                a.members[rng.gen_range(lo..a.len())].clone()
            }
            None => Nat::encode(&snoc(prefix, Nat::ONE)),
        }
    }

    /// A point of the domain described by `c`, explicit up to `top`.
    fn in_domain(&self, c: &CylinderConstraint, top: usize, rng: &mut ChaCha8Rng) -> PointPrefix {
        let ones: BTreeSet<usize> = c.ones.iter().filter_map(Nat::as_usize).collect();
        let non_ones: BTreeSet<usize> = c.non_ones.iter().filter_map(Nat::as_usize).collect();
        let mut entries: Vec<Nat> = Vec::with_capacity(top + 1);
        for i in 0..=top {
            let v = if ones.contains(&i) {
                Nat::ONE
            } else if non_ones.contains(&i) {
                self.member(i, &entries, rng, true)
            } else if i < RANDOM_FILL_BELOW && rng.gen_bool(0.4) {
                self.member(i, &entries, rng, false)
            } else {
                Nat::ONE
            };
            entries.push(v);
        }
        PointPrefix::with_tail(entries).normalized()
    }
}

fn same_point(x: &PointPrefix, y: &PointPrefix) -> bool {
    first_disagreement(x, y) == Disagreement::Equal
}

fn show_point(x: &PointPrefix) -> String {
    const SHOWN: usize = 12;
    let mut s = if x.len() > SHOWN {
        let head = show_seq(&x.entries[..SHOWN]);
        format!("{}, … {} entries>", &head[..head.len() - 1], x.len())
    } else {
        show_seq(&x.entries)
    };
    if x.tail_ones {
        s.push_str("⌢1^ω");
    }
    s
}

fn parent(b: &BranchIndex) -> Option<BranchIndex> {
    let k = b.s().len();
    if k == 0 {
        return None;
    }
    BranchIndex::new(b.s()[..k - 1].to_vec(), b.t()[..k].to_vec()).ok()
}

fn top_usize(b: &BranchIndex) -> Result<usize> {
    let top = b.top();
    top.as_usize().ok_or(Error::Horizon {
        required: top.to_string(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct DepartureParams {
    pub depth: usize,
    pub horizon: u64,
    pub samples: u64,
    pub seed: u64,
}

/// Branch axioms on sampled domain points, density of the glued domains on
/// every node, and the relation axioms on all nodes up to `depth`.
pub fn verify_departure(params: DepartureParams, model: Model, caps: &Caps) -> Result<Report> {
    caps.check_depth(params.depth)?;
    caps.check_horizon(params.horizon)?;
    let mut r = Report::new("departure");
    r.param("depth", params.depth as u64)
        .param("horizon", params.horizon)
        .param("samples", params.samples)
        .param("seed", params.seed)
        .param("fault", model.fault.map(|f| f.name()).unwrap_or("none"));
    for (name, note) in [
        (
            "domain-membership",
            "sampled points satisfy their branch constraints",
        ),
        ("lex-increase", "x <_lex f(x)"),
        ("stabilization", "f(x)(q) = x(q) for q > J(s⌢t)"),
        ("alphabet-closure", "rewritten value at q lies in A_q"),
        (
            "injectivity",
            "distinct sampled inputs of a branch have distinct images",
        ),
        (
            "stability-bound",
            "f_{s⌢n,t⌢m}(x), f_{s,t}(x) agree below J(s⌢n⌢t⌢m)",
        ),
        (
            "nested-domains",
            "constraints of (s,t) are contained in those of (s⌢n,t⌢m)",
        ),
        (
            "branch-disjointness",
            "branches with equal s have clashing constraints",
        ),
        ("density", "u⌢1^ω lies in exactly one branch domain per s"),
    ] {
        r.declare(name, note);
    }
    let branches = branches_below(params.horizon);
    if params.depth > 0 {
        branch_checks(&mut r, &branches, params, model, caps)?;
        structural_checks(&mut r, &branches, model);
        density_checks(
            &mut r,
            &branches,
            params.depth.min(NODE_SCAN_LIMIT),
            model,
            caps,
        )?;
    }
    relation_checks(&mut r, params.depth.min(NODE_SCAN_LIMIT), caps)?;
    Ok(r.finish())
}

fn branch_checks(
    r: &mut Report,
    branches: &[BranchIndex],
    params: DepartureParams,
    model: Model,
    caps: &Caps,
) -> Result<()> {
    if branches.is_empty() {
        return Ok(());
    }
    let sampler = Sampler::new(caps)?;
    let mut oracle = MembershipOracle::new();
    let per_branch = params.samples.div_ceil(branches.len() as u64).max(1);
    for (bi, b) in branches.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(
            params
                .seed
                .wrapping_mul(0x9E37_79B9)
                .wrapping_add(bi as u64),
        );
        let top = top_usize(b)?;
        let c = model.constraints(b);
        let up = parent(b);
        let mut seen: Vec<(PointPrefix, PointPrefix)> = Vec::new();
        for _ in 0..per_branch {
            let x = sampler.in_domain(&c, top, &mut rng);
            let ctx = || format!("branch {b}, x = {}", show_point(&x));
            r.expect(
                "domain-membership",
                model.in_domain(&x, b).is_yes(),
                ctx,
                || "outside".into(),
            );
            let y = match model.apply(b, &x) {
                Ok(y) => y,
                Err(err) => {
                    r.fail("domain-membership", ctx(), err.to_string());
                    continue;
                }
            };
            let d = first_disagreement(&x, &y);
            let lex_ok = match d {
                Disagreement::At(k) => x.get(k) < y.get(k),
                _ => false,
            };
            r.expect("lex-increase", lex_ok, ctx, || {
                format!("first disagreement {d:?}")
            });
            let far = (top + 1..x.len().max(y.len()) + 1).find(|&i| x.get(i) != y.get(i));
            r.expect("stabilization", far.is_none(), ctx, || {
                format!("changed coordinate {far:?}")
            });
            for q in &c.ones {
                let qi = q.as_usize().expect("below horizon");
                let v = y.get(qi).expect("tail convention");
                let ok = oracle.is_member(&v, qi);
                r.expect("alphabet-closure", ok, ctx, || {
                    format!("f(x)({qi}) = {v} not in A_{qi}")
                });
            }
            if let Some(p) = &up {
                r.expect(
                    "nested-domains",
                    model.in_domain(&x, p).is_yes(),
                    ctx,
                    || format!("x outside {p}"),
                );
                match model.apply(p, &x) {
                    Ok(yp) => {
                        let dp = first_disagreement(&y, &yp);
                        let ok = match dp {
                            Disagreement::At(k) => k >= top,
                            Disagreement::Equal => true,
                            Disagreement::Unknown => false,
                        };
                        r.expect("stability-bound", ok, ctx, || {
                            format!("against {p}: {dp:?}, bound {top}")
                        });
                    }
                    Err(err) => r.fail("stability-bound", ctx(), err.to_string()),
                }
            }
            for (x0, y0) in &seen {
                if !same_point(x0, &x) && same_point(y0, &y) {
                    r.fail(
                        "injectivity",
                        format!(
                            "branch {b}, x = {}, x' = {}",
                            show_point(x0),
                            show_point(&x)
                        ),
                        format!("common image {}", show_point(&y)),
                    );
                }
            }
            r.pass("injectivity");
            seen.push((x, y));
        }
    }
    Ok(())
}

fn structural_checks(r: &mut Report, branches: &[BranchIndex], model: Model) {
    let cons: Vec<CylinderConstraint> = branches.iter().map(|b| model.constraints(b)).collect();
    for (b, c) in branches.iter().zip(&cons) {
        if let Some(p) = parent(b) {
            let pc = model.constraints(&p);
            let ok = pc.ones.iter().all(|q| c.ones.contains(q))
                && pc.non_ones.iter().all(|q| c.non_ones.contains(q));
            r.expect(
                "nested-domains",
                ok,
                || format!("{p} vs {b}"),
                || "constraint not inherited".into(),
            );
        }
    }
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            if branches[i].s() != branches[j].s() {
                continue;
            }
            let ok = clash(&cons[i], &cons[j]).is_some();
            r.expect(
                "branch-disjointness",
                ok,
                || format!("{} and {}", branches[i], branches[j]),
                || "no coordinate is forced to 1 by one and forbidden by the other".into(),
            );
        }
    }
}

fn density_checks(
    r: &mut Report,
    branches: &[BranchIndex],
    depth: usize,
    model: Model,
    caps: &Caps,
) -> Result<()> {
    let mut by_s: BTreeMap<Vec<Nat>, Vec<&BranchIndex>> = BTreeMap::new();
    for b in branches {
        by_s.entry(b.s().to_vec()).or_default().push(b);
    }
    for p in 0..=depth {
        for u in enumerate_nodes(p, caps)? {
            let x = PointPrefix::with_tail(u.clone());
            for (s, group) in &by_s {
                let ctx = || format!("s = {}, x = {}", show_seq(s), show_point(&x));
                let found = match model.find_branch(s, &x) {
                    Outcome::Yes(t) => BranchIndex::new(s.clone(), t)?,
                    other => {
                        r.fail("density", ctx(), format!("greedy search gave {other:?}"));
                        continue;
                    }
                };
                let mut hits = group
                    .iter()
                    .filter(|b| model.in_domain(&x, b).is_yes())
                    .count();
                if !group.contains(&&found) {
                    hits += 1;
                }
                r.expect("density", hits == 1, ctx, || {
                    format!("{hits} branch domains contain x (greedy {found})")
                });
            }
        }
    }
    Ok(())
}

/// Relation axioms at every length up to `depth`.
fn relation_checks(r: &mut Report, depth: usize, caps: &Caps) -> Result<()> {
    for (name, note) in [
        ("psi-loop-zero", "s R s implies psi(s,s) = 0"),
        ("psi-extension", "s⌢j R t⌢j implies psi(s⌢j,t⌢j) = psi(s,t)"),
        ("antisymmetry", "s R t and t R s imply s = t"),
        (
            "powers-of-two",
            "s R s iff no positive power of 2 below |s| indexes a 1 of s",
        ),
        ("forest", "T without loops is acyclic"),
        ("edge-census", "six non-loop T edges at length 3"),
    ] {
        r.declare(name, note);
    }
    let mut prev: Option<(Vec<Node>, Images)> = None;
    for p in 0..=depth {
        let (nodes, images) = r_images(p, caps)?;
        for (i, out) in images.iter().enumerate() {
            let s = &nodes[i];
            let has_loop = out.iter().any(|&(j, _)| j == i);
            if let Some(&(_, rank)) = out.iter().find(|&&(j, _)| j == i) {
                r.expect(
                    "psi-loop-zero",
                    rank == 0,
                    || show_seq(s),
                    || format!("psi = {rank}"),
                );
            }
            let expect_loop = positive_powers_of_two_below(p)
                .iter()
                .all(|&q| !s[q].is_one());
            r.expect(
                "powers-of-two",
                has_loop == expect_loop,
                || show_seq(s),
                || format!("loop = {has_loop}"),
            );
            for &(j, _) in out {
                if j != i && images[j].iter().any(|&(k, _)| k == i) {
                    r.fail(
                        "antisymmetry",
                        format!("{} and {}", show_seq(s), show_seq(&nodes[j])),
                        "related both ways",
                    );
                } else {
                    r.pass("antisymmetry");
                }
            }
            if let Some((pnodes, pimages)) = &prev {
                for &(j, rank) in out {
                    let t = &nodes[j];
                    if s[p - 1] != t[p - 1] {
                        continue;
                    }
                    let pi = pnodes
                        .binary_search(&s[..p - 1].to_vec())
                        .expect("parent node");
                    let pj = pnodes
                        .binary_search(&t[..p - 1].to_vec())
                        .expect("parent node");
                    let parent_psi = pimages[pi].iter().find(|&&(k, _)| k == pj).map(|&(_, r)| r);
                    r.expect(
                        "psi-extension",
                        parent_psi == Some(rank),
                        || format!("{} R {}", show_seq(s), show_seq(t)),
                        || format!("psi = {rank}, parent psi = {parent_psi:?}"),
                    );
                }
            }
        }
        let g = graph_from_images(p, nodes.clone(), &images);
        let f = verify_forest(&g);
        r.expect(
            "forest",
            f.acyclic,
            || format!("length {p}"),
            || {
                let cyc: Vec<String> = f.cycle.iter().map(|&i| show_seq(&g.nodes[i])).collect();
                format!("cycle {}", cyc.join(" - "))
            },
        );
        if p == 3 {
            r.expect(
                "edge-census",
                g.edges.len() == 6,
                || "length 3".into(),
                || format!("{} edges", g.edges.len()),
            );
        }
        prev = Some((nodes, images));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct NoIsolatedParams {
    pub depth: usize,
    pub horizon: u64,
    pub samples: u64,
    pub seed: u64,
}

/// Extensions tried per branch, and the glued maps tried per point.
const EXTENSIONS: u64 = 3;
const GLUED_MAPS: u64 = 48;
const EQUICONTINUITY_PRECISION: usize = 40;

/// Finite shadows of "f_{s⌢n}(x) → f_s(x)" (no isolated points), of the
/// equicontinuity of (f_n) at x, and of the power-of-2 argument that keeps
/// limits of graph points off the diagonal.
pub fn verify_no_isolated(params: NoIsolatedParams, caps: &Caps) -> Result<Report> {
    caps.check_depth(params.depth)?;
    caps.check_horizon(params.horizon)?;
    let mut r = Report::new("no-isolated");
    r.param("depth", params.depth as u64)
        .param("horizon", params.horizon)
        .param("samples", params.samples)
        .param("seed", params.seed);
    r.declare(
        "approximation",
        "f_{s⌢n,t'}(x) agrees with f_{s,t}(x) below J(s⌢n⌢t') and differs at it",
    );
    r.declare("convergence", "agreement length grows with n");
    r.declare("equicontinuity", "each f_n(x)⌈p is a witness image of x⌈p");
    r.declare(
        "power-of-two-shadow",
        "every f_n rewrites the first power-of-2 coordinate of x holding 1 alike",
    );
    let branches = branches_below(params.horizon);
    let sampler = Sampler::new(caps)?;
    let glued: Vec<Vec<Nat>> = (0..GLUED_MAPS).map(e).collect::<Result<_>>()?;
    let eq_witnesses: Vec<_> = (1..=EQUICONTINUITY_PRECISION).map(witnesses).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let free = CylinderConstraint {
        ones: vec![],
        non_ones: vec![],
    };
    for _ in 0..params.samples {
        let x = sampler.in_domain(&free, params.depth.max(1) * 8, &mut rng);
        let ctx = show_point(&x);
        for b in &branches {
            if !Model::HONEST.in_domain(&x, b).is_yes() {
                continue;
            }
            let y = Model::HONEST.apply(b, &x)?;
            let mut last: Option<usize> = None;
            let mut conclusive = false;
            for n in 0..EXTENSIONS {
                let s_ext = snoc(b.s(), Nat::small(n));
                let Outcome::Yes(t_ext) = Model::HONEST.find_branch(&s_ext, &x) else {
                    r.fail(
                        "approximation",
                        format!("{ctx}, {b}, n = {n}"),
                        "no extension branch contains x",
                    );
                    continue;
                };
                let ext = BranchIndex::new(s_ext, t_ext)?;
                let bound = ext.top();
                if bound.as_u64().is_none_or(|v| v >= params.horizon) {
                    r.inconclusive("approximation");
                    continue;
                }
                conclusive = true;
                let bound = bound.as_usize().expect("below horizon");
                let nested = ext.t()[..b.t().len()] == *b.t();
                let ye = Model::HONEST.apply(&ext, &x)?;
                let d = first_disagreement(&ye, &y);
                let ok = nested && d == Disagreement::At(bound);
                r.expect(
                    "approximation",
                    ok,
                    || format!("{ctx}, {b} vs {ext}"),
                    || format!("{d:?}, bound {bound}"),
                );
                if let Some(prev) = last {
                    r.expect(
                        "convergence",
                        bound > prev,
                        || format!("{ctx}, {b}, n = {n}"),
                        || format!("{bound} after {prev}"),
                    );
                }
                last = Some(bound);
            }
            if !conclusive {
                r.inconclusive("convergence");
            }
        }
        let q = (1..)
            .map(|k| 1usize << k)
            .find(|&q| x.get(q).is_some_and(|v| v.is_one()))
            .expect("tail of 1s");
        let expect_q = Nat::encode(&snoc(&x.restrict(q).expect("tail"), Nat::ONE));
        let mut seen: Vec<BTreeSet<Vec<Nat>>> = vec![BTreeSet::new(); EQUICONTINUITY_PRECISION];
        for (n, s) in glued.iter().enumerate() {
            let Outcome::Yes(t) = Model::HONEST.find_branch(s, &x) else {
                r.fail(
                    "equicontinuity",
                    format!("{ctx}, n = {n}"),
                    "point outside D_{f_n}",
                );
                continue;
            };
            let b = BranchIndex::new(s.clone(), t)?;
            if b.top().as_u64().is_none_or(|v| v > caps.max_horizon) {
                r.inconclusive("equicontinuity");
                r.inconclusive("power-of-two-shadow");
                continue;
            }
            let y = Model::HONEST.apply(&b, &x)?;
            r.expect(
                "power-of-two-shadow",
                y.get(q) == Some(expect_q.clone()),
                || format!("{ctx}, n = {n}"),
                || format!("f_n(x)({q}) = {:?}", y.get(q)),
            );
            for (k, set) in seen.iter_mut().enumerate() {
                set.insert(y.restrict(k + 1).expect("tail"));
            }
        }
        for (k, set) in seen.iter().enumerate() {
            let p = k + 1;
            let xp = x.restrict(p).expect("tail");
            let images: BTreeSet<Vec<Nat>> = eq_witnesses[k]
                .iter()
                .filter_map(|w| w.image(&xp))
                .collect();
            let ok = set.is_subset(&images);
            r.expect(
                "equicontinuity",
                ok,
                || format!("{ctx}, p = {p}"),
                || {
                    format!(
                        "{} prefixes observed, {} admissible",
                        set.len(),
                        images.len()
                    )
                },
            );
        }
    }
    Ok(r.finish())
}

/// `f_b^{-1}(y)`, when `y` is in the image of `f_b`.
pub fn invert(model: Model, b: &BranchIndex, y: &PointPrefix) -> Result<Option<PointPrefix>> {
    let mut z = y.clone();
    for q in model.constraints(b).ones {
        let qi = q.as_usize().ok_or(Error::Horizon {
            required: q.to_string(),
        })?;
        z.set(qi, Nat::ONE);
    }
    if !model.in_domain(&z, b).is_yes() {
        return Ok(None);
    }
    let back = model.apply(b, &z)?;
    Ok(same_point(&back, y).then(|| z.normalized()))
}

/// `f_{b_0}^{-1} f_{b_1} f_{b_2}^{-1} ... f_{b_{2k-1}}(x)`, innermost last.
pub fn compose_alternating(chain: &[BranchIndex], x: &PointPrefix) -> Result<Option<PointPrefix>> {
    let mut z = x.clone();
    for (i, b) in chain.iter().enumerate().rev() {
        let next = if i % 2 == 1 {
            match Model::HONEST.apply(b, &z) {
                Ok(y) => Some(y.normalized()),
                Err(Error::OutsideDomain) => None,
                Err(err) => return Err(err),
            }
        } else {
            invert(Model::HONEST, b, &z)?
        };
        match next {
            Some(v) => z = v,
            None => return Ok(None),
        }
    }
    Ok(Some(z))
}

#[derive(Clone, Copy, Debug)]
pub struct ArrivalParams {
    pub depth: usize,
    pub horizon: u64,
    pub max_chain: usize,
}

/// Exploratory scan: alternating compositions of branch maps with no two
/// consecutive equal terms, evaluated at every `u⌢1^ω` of the given depth.
/// Records which compositions are defined somewhere and whether any acts as the
/// identity on all sampled points of its domain.
pub fn verify_arrival_scan(params: ArrivalParams, caps: &Caps) -> Result<Report> {
    caps.check_depth(params.depth)?;
    caps.check_horizon(params.horizon)?;
    let mut r = Report::new("arrival-scan");
    r.param("depth", params.depth as u64)
        .param("horizon", params.horizon)
        .param("max_chain", params.max_chain as u64);
    r.declare_exploratory(
        "nonempty-composition",
        "composition defined at some sampled point",
    );
    r.declare_exploratory(
        "identity-on-sample",
        "composition fixes every sampled point where it is defined",
    );
    let branches = branches_below(params.horizon);
    let points: Vec<PointPrefix> = enumerate_nodes(params.depth.min(NODE_SCAN_LIMIT), caps)?
        .into_iter()
        .map(PointPrefix::with_tail)
        .collect();
    for k in 1..=params.max_chain {
        let mut chain: Vec<usize> = Vec::with_capacity(2 * k);
        scan_chains(&mut r, &branches, &points, 2 * k, &mut chain)?;
    }
    Ok(r.finish())
}

fn scan_chains(
    r: &mut Report,
    branches: &[BranchIndex],
    points: &[PointPrefix],
    len: usize,
    chain: &mut Vec<usize>,
) -> Result<()> {
    if chain.len() == len {
        let bs: Vec<BranchIndex> = chain.iter().map(|&i| branches[i].clone()).collect();
        let mut defined = 0u64;
        let mut fixed = 0u64;
        for x in points {
            if let Some(z) = compose_alternating(&bs, x)? {
                defined += 1;
                if same_point(&z, x) {
                    fixed += 1;
                }
            }
        }
        let label = || {
            bs.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        if defined > 0 {
            r.pass("nonempty-composition");
            if fixed == defined {
                r.fail(
                    "identity-on-sample",
                    label(),
                    format!("fixes all {defined} points of its sampled domain"),
                );
            } else {
                r.pass("identity-on-sample");
            }
        }
        return Ok(());
    }
    for i in 0..branches.len() {
        if chain.last() == Some(&i) {
            continue;
        }
        chain.push(i);
        scan_chains(r, branches, points, len, chain)?;
        chain.pop();
    }
    Ok(())
}
