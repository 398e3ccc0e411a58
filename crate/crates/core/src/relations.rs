//! The relations `R_n`, `R`, `ψ`, `T` on nodes of equal length, `T`-chains and
//! the forest property.
//!
//! `s R t` holds when some branch map sends a point of `N_s` into `N_t`. Only
//! constrained coordinates below `|s|` matter: the others can always be filled
//! (by 1, or by a non-1 member, as required). The finitely many truncations of
//! branches to indices below `L` are the effective witnesses for length `L`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::alphabet::{enumerate_nodes, Caps, Node};
use crate::coding::{concat, show_seq, snoc};
use crate::departure::BranchIndex;
use crate::enumeration::e_inv;
use crate::error::{Error, Result};
use crate::nat::Nat;

/// A branch truncated to its constrained coordinates below `length`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// A branch realizing this truncation with the least possible `s`.
    pub branch: BranchIndex,
    /// First level `j` whose must-be-1 coordinate is `>= length`, if any.
    pub cut: Option<usize>,
    pub ones: Vec<usize>,
    pub non_ones: Vec<usize>,
}

impl Witness {
    pub fn rank(&self) -> u64 {
        e_inv(self.branch.s()).expect("witness codes are small")
    }

    /// The image of `s` below its length, if `s` satisfies the constraints.
    pub fn image(&self, s: &[Nat]) -> Option<Node> {
        if self.non_ones.iter().any(|&q| s[q].is_one()) || self.ones.iter().any(|&q| !s[q].is_one())
        {
            return None;
        }
        let mut t = s.to_vec();
        for &q in &self.ones {
            t[q] = Nat::encode(&snoc(&s[..q], Nat::ONE));
        }
        Some(t)
    }

    /// Whether this witness carries `s` onto `t`.
    pub fn relates(&self, s: &[Nat], t: &[Nat]) -> bool {
        if self.non_ones.iter().any(|&q| s[q].is_one()) {
            return false;
        }
        let mut k = 0;
        for (q, (a, b)) in s.iter().zip(t).enumerate() {
            if self.ones.get(k) == Some(&q) {
                k += 1;
                if !a.is_one() || *b != Nat::encode(&snoc(&s[..q], Nat::ONE)) {
                    return false;
                }
            } else if a != b {
                return false;
            }
        }
        true
    }
}

fn below(c: &Nat, len: usize) -> Option<usize> {
    c.as_usize().filter(|&v| v < len)
}

/// All effective witnesses for nodes of length `len`.
pub fn witnesses(len: usize) -> Vec<Witness> {
    let mut out = Vec::new();
    walk(&mut Vec::new(), &mut Vec::new(), &[], &[], len, &mut out);
    out
}

fn walk(
    sigma: &mut Vec<Nat>,
    tau: &mut Vec<Nat>,
    ones: &[usize],
    non_ones: &[usize],
    len: usize,
    out: &mut Vec<Witness>,
) {
    let base = concat(sigma, tau);
    let mut level_non_ones = non_ones.to_vec();
    let mut m = 0u64;
    loop {
        let c = Nat::encode(&snoc(&base, Nat::small(m)));
        let Some(q) = below(&c, len) else { break };
        // t(j) = m makes q a must-be-1 coordinate.
        let mut now_ones = ones.to_vec();
        now_ones.push(q);
        let t_full = snoc(tau, Nat::small(m));
        out.push(Witness {
            branch: BranchIndex::new(sigma.clone(), t_full.clone()).expect("lengths match"),
            cut: None,
            ones: now_ones.clone(),
            non_ones: level_non_ones.clone(),
        });
        let mut a = 0u64;
        loop {
            let s_ext = snoc(sigma, Nat::small(a));
            let first = Nat::encode(&snoc(&concat(&s_ext, &t_full), Nat::ZERO));
            if below(&first, len).is_none() {
                break;
            }
            sigma.push(Nat::small(a));
            tau.push(Nat::small(m));
            walk(sigma, tau, &now_ones, &level_non_ones, len, out);
            sigma.pop();
            tau.pop();
            a += 1;
        }
        level_non_ones.push(q);
        m += 1;
    }
    // t(j) >= m: the must-be-1 coordinate of this level lies beyond the node.
    out.push(Witness {
        branch: BranchIndex::new(sigma.clone(), snoc(tau, Nat::small(m))).expect("lengths match"),
        cut: Some(sigma.len()),
        ones: ones.to_vec(),
        non_ones: level_non_ones,
    });
}

fn check_lengths(s: &[Nat], t: &[Nat]) -> Result<()> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: t.len(),
        });
    }
    Ok(())
}

/// `s R t`, with every witness that realizes it.
pub fn rel_r(s: &[Nat], t: &[Nat]) -> Result<(bool, Vec<Witness>)> {
    check_lengths(s, t)?;
    let found: Vec<Witness> = witnesses(s.len())
        .into_iter()
        .filter(|w| w.relates(s, t))
        .collect();
    Ok((!found.is_empty(), found))
}

/// `ψ(s, t) = min{n : s R_n t}` with a witness attaining it.
pub fn psi(s: &[Nat], t: &[Nat]) -> Result<Option<(u64, Witness)>> {
    let (_, found) = rel_r(s, t)?;
    Ok(found
        .into_iter()
        .map(|w| (w.rank(), w))
        .min_by_key(|(r, _)| *r))
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub psi: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationGraph {
    pub length: usize,
    pub nodes: Vec<Node>,
    /// Unordered, `a < b`, sorted.
    pub edges: Vec<Edge>,
    /// Nodes `s` with `s R s`.
    pub loops: Vec<usize>,
}

/// Per node, the related nodes with the least witness rank.
pub type Images = Vec<Vec<(usize, u64)>>;

/// Nodes of length `p` with, for each, the nodes it relates to under `R` and
/// the least witness rank achieving it.
pub fn r_images(p: usize, caps: &Caps) -> Result<(Vec<Node>, Images)> {
    let nodes = enumerate_nodes(p, caps)?;
    let index: HashMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let ws = witnesses(p);
    let ranks: Vec<u64> = ws.iter().map(Witness::rank).collect();
    let mut images = Vec::with_capacity(nodes.len());
    for s in &nodes {
        let mut out: Vec<(usize, u64)> = Vec::new();
        for (w, &r) in ws.iter().zip(&ranks) {
            let Some(t) = w.image(s) else { continue };
            let j = *index.get(&t).expect("images stay in the product");
            match out.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 = entry.1.min(r),
                None => out.push((j, r)),
            }
        }
        out.sort_unstable();
        images.push(out);
    }
    Ok((nodes, images))
}

/// The graph of `T` on nodes of length `p`, built from witness images.
pub fn t_graph(p: usize, caps: &Caps) -> Result<RelationGraph> {
    let (nodes, images) = r_images(p, caps)?;
    Ok(graph_from_images(p, nodes, &images))
}

pub fn graph_from_images(
    p: usize,
    nodes: Vec<Node>,
    images: &[Vec<(usize, u64)>],
) -> RelationGraph {
    let mut edges: HashMap<(usize, usize), u64> = HashMap::new();
    let mut loops = Vec::new();
    for (i, out) in images.iter().enumerate() {
        for &(j, r) in out {
            if i == j {
                loops.push(i);
            } else {
                let e = edges.entry((i.min(j), i.max(j))).or_insert(r);
                *e = (*e).min(r);
            }
        }
    }
    let mut edges: Vec<Edge> = edges
        .into_iter()
        .map(|((a, b), psi)| Edge { a, b, psi })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));
    RelationGraph {
        length: p,
        nodes,
        edges,
        loops,
    }
}

/// The same graph by testing `rel_r` on every ordered pair.
pub fn t_graph_pairwise(p: usize, caps: &Caps) -> Result<RelationGraph> {
    let nodes = enumerate_nodes(p, caps)?;
    let ws = witnesses(p);
    let mut edges = Vec::new();
    let mut loops = Vec::new();
    for (i, s) in nodes.iter().enumerate() {
        for (j, t) in nodes.iter().enumerate().skip(i) {
            let fwd = ws
                .iter()
                .filter(|w| w.relates(s, t))
                .map(Witness::rank)
                .min();
            let bwd = ws
                .iter()
                .filter(|w| w.relates(t, s))
                .map(Witness::rank)
                .min();
            let best = match (fwd, bwd) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            match best {
                Some(_) if i == j => loops.push(i),
                Some(psi) => edges.push(Edge { a: i, b: j, psi }),
                None => {}
            }
        }
    }
    Ok(RelationGraph {
        length: p,
        nodes,
        edges,
        loops,
    })
}

impl RelationGraph {
    pub fn node_index(&self, n: &[Nat]) -> Option<usize> {
        self.nodes.binary_search_by(|m| m.as_slice().cmp(n)).ok()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }

    /// Graphviz rendering; loops are drawn as self-edges and `ψ` labels edges.
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph T{} {{\n", self.length);
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{}\"];\n", show_seq(n)));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -- n{} [label=\"psi={}\"];\n",
                e.a, e.b, e.psi
            ));
        }
        for &l in &self.loops {
            out.push_str(&format!("  n{l} -- n{l} [style=dashed];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// The repetition-free `T`-chain from `s` to `t`, found by breadth-first search.
pub fn t_chain(s: &[Nat], t: &[Nat], g: &RelationGraph) -> Option<Vec<Node>> {
    let from = g.node_index(s)?;
    let to = g.node_index(t)?;
    let adj = g.adjacency();
    let mut prev = vec![usize::MAX; g.nodes.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path.into_iter().map(|i| g.nodes[i].clone()).collect());
        }
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestReport {
    pub nodes: usize,
    pub edges: usize,
    pub loops: usize,
    pub components: usize,
    pub acyclic: bool,
    /// Closed walk through the first cycle found, as node indices.
    pub cycle: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }
}

/// Union-find acyclicity check of the non-loop edges.
pub fn verify_forest(g: &RelationGraph) -> ForestReport {
    let n = g.nodes.len();
    let mut uf = UnionFind {
        parent: (0..n).collect(),
    };
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cycle = Vec::new();
    let mut components = n;
    for e in &g.edges {
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        if ra == rb {
            cycle = tree_path(&tree, e.b, e.a);
            cycle.push(e.b);
            break;
        }
        uf.parent[ra] = rb;
        components -= 1;
        tree[e.a].push(e.b);
        tree[e.b].push(e.a);
    }
    ForestReport {
        nodes: n,
        edges: g.edges.len(),
        loops: g.loops.len(),
        components,
        acyclic: cycle.is_empty(),
        cycle,
    }
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev: HashMap<usize, usize> = HashMap::from([(from, from)]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &v in &adj[u] {
            if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(v) {
                slot.insert(u);
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Indices `2, 4, 8, ...` below `len`.
pub fn positive_powers_of_two_below(len: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |p| p.checked_mul(2))
        .take_while(|&p| p < len)
        .collect()
}

/// Edge set as a set of node pairs, for comparing graphs.
pub fn edge_set(g: &RelationGraph) -> HashSet<(Node, Node)> {
    g.edges
        .iter()
        .map(|e| (g.nodes[e.a].clone(), g.nodes[e.b].clone()))
        .collect()
}
