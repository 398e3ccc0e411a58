//! Synthetic metric cascades: values `l_y(x)` at one point `x`, for `y` in a finite
//! tree of sequences, checked against the strict ε-bound on child edges and the
//! separation inequality `d(l_s, l_t) ≥ ⅓ d(l_{s⌈i+1}, l_{s⌈i})` it implies.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fault::Fault;
use crate::report::Report;

/// Ordered field used for distances.
pub trait Scalar: Clone + PartialOrd + Signed + FromPrimitive + fmt::Debug + fmt::Display {}

impl<T> Scalar for T where T: Clone + PartialOrd + Signed + FromPrimitive + fmt::Debug + fmt::Display
{}

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("small integers embed")
}

fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

fn show(y: &[u64]) -> String {
    let v: Vec<String> = y.iter().map(u64::to_string).collect();
    format!("<{}>", v.join(","))
}

#[derive(Clone, Debug)]
enum Geometry<T> {
    /// Points of the plane under the sup metric.
    Points(Vec<[T; 2]>),
    /// Explicit symmetric table keyed by `(min, max)` node index.
    Table(HashMap<(usize, usize), T>),
}

/// Distances between the values `l_y(x)` for finitely many `y`.
#[derive(Clone, Debug)]
pub struct CascadeSample<T> {
    nodes: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
    geometry: Geometry<T>,
    /// Distance from each node to its parent, when known.
    gaps: Vec<Option<T>>,
}

pub type ExactCascade = CascadeSample<BigRational>;
pub type FloatCascade = CascadeSample<f64>;

impl<T: Scalar> CascadeSample<T> {
    /// Nodes placed at points of the plane; the node set must be prefix-closed.
    pub fn from_points(entries: Vec<(Vec<u64>, [T; 2])>) -> Result<CascadeSample<T>> {
        let mut nodes = Vec::with_capacity(entries.len());
        let mut points = Vec::with_capacity(entries.len());
        let mut index = HashMap::new();
        for (y, p) in entries {
            if index.insert(y.clone(), nodes.len()).is_some() {
                return Err(Error::Invalid(format!("node {} listed twice", show(&y))));
            }
            nodes.push(y);
            points.push(p);
        }
        for y in &nodes {
            if let Some((_, parent)) = y.split_last() {
                if !index.contains_key(parent) {
                    return Err(Error::MissingEntry(format!("parent of {}", show(y))));
                }
            }
        }
        Ok(CascadeSample::assemble(
            nodes,
            index,
            Geometry::Points(points),
        ))
    }

    fn assemble(
        nodes: Vec<Vec<u64>>,
        index: HashMap<Vec<u64>, usize>,
        geometry: Geometry<T>,
    ) -> CascadeSample<T> {
        let mut sample = CascadeSample {
            nodes,
            index,
            geometry,
            gaps: Vec::new(),
        };
        sample.gaps = (0..sample.nodes.len())
            .map(|i| sample.parent_gap(i))
            .collect();
        sample
    }

    fn parent_gap(&self, i: usize) -> Option<T> {
        let (_, parent) = self.nodes[i].split_last()?;
        self.dist_idx(i, *self.index.get(parent)?)
    }

    /// Nodes given only through a partial table of nonnegative distances.
    pub fn from_table(entries: Vec<(Vec<u64>, Vec<u64>, T)>) -> Result<CascadeSample<T>> {
        let mut nodes: Vec<Vec<u64>> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut table = HashMap::new();
        for (a, b, d) in entries {
            if d.is_negative() {
                return Err(Error::Invalid(format!("negative distance {d}")));
            }
            let mut slot = |y: Vec<u64>| {
                *index.entry(y.clone()).or_insert_with(|| {
                    nodes.push(y);
                    nodes.len() - 1
                })
            };
            let (ia, ib) = (slot(a), slot(b));
            if ia == ib && !d.is_zero() {
                return Err(Error::Invalid("self-distance must vanish".into()));
            }
            if let Some(old) = table.insert((ia.min(ib), ia.max(ib)), d.clone()) {
                if old != d {
                    return Err(Error::Invalid("conflicting table entries".into()));
                }
            }
        }
        Ok(CascadeSample::assemble(
            nodes,
            index,
            Geometry::Table(table),
        ))
    }

    fn point(&self, y: &[u64]) -> Option<&[T; 2]> {
        match &self.geometry {
            Geometry::Points(p) => self.index.get(y).map(|&i| &p[i]),
            Geometry::Table(_) => None,
        }
    }

    fn place(&mut self, y: Vec<u64>, at: [T; 2]) {
        let Geometry::Points(p) = &mut self.geometry else {
            unreachable!("placing needs points")
        };
        p.push(at);
        self.index.insert(y.clone(), self.nodes.len());
        self.nodes.push(y);
        self.gaps.push(self.parent_gap(self.nodes.len() - 1));
    }

    pub fn nodes(&self) -> &[Vec<u64>] {
        &self.nodes
    }

    pub fn contains(&self, y: &[u64]) -> bool {
        self.index.contains_key(y)
    }

    fn idx(&self, y: &[u64]) -> Result<usize> {
        self.index
            .get(y)
            .copied()
            .ok_or_else(|| Error::MissingEntry(format!("node {}", show(y))))
    }

    fn dist_idx(&self, a: usize, b: usize) -> Option<T> {
        if a == b {
            return Some(T::zero());
        }
        match &self.geometry {
            Geometry::Points(p) => {
                let dx = (p[a][0].clone() - p[b][0].clone()).abs();
                let dy = (p[a][1].clone() - p[b][1].clone()).abs();
                Some(max_of(dx, dy))
            }
            Geometry::Table(t) => t.get(&(a.min(b), a.max(b))).cloned(),
        }
    }

    /// `d(l_y(x), l_z(x))`.
    pub fn distance(&self, y: &[u64], z: &[u64]) -> Result<T> {
        let (a, b) = (self.idx(y)?, self.idx(z)?);
        self.dist_idx(a, b)
            .ok_or_else(|| Error::MissingEntry(format!("d({}, {})", show(y), show(z))))
    }

    /// `d(l_y(x), l_{y⌈|y|-1}(x))` for nonempty `y`.
    pub fn gap(&self, y: &[u64]) -> Result<T> {
        let i = self.idx(y)?;
        match &self.gaps[i] {
            Some(g) => Ok(g.clone()),
            None if y.is_empty() => Err(Error::Invalid("the root has no parent".into())),
            None => Err(Error::MissingEntry(format!("d({}, parent)", show(y)))),
        }
    }

    /// Triangle inequality over every fully tabulated triple.
    pub fn is_metric(&self) -> bool {
        let n = self.nodes.len();
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.dist_idx(a, b) else {
                    continue;
                };
                for c in 0..n {
                    if let (Some(ac), Some(cb)) = (self.dist_idx(a, c), self.dist_idx(c, b)) {
                        if ab > ac + cb {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// `ε(s⌢k)`: the least of `2^{-k}`, `¼ d(l_{s⌈i+1}, l_{s⌈i})` for `i < |s|`, and
/// `¼ d(l_{s⌢j}, l_s)` over the siblings `j < k` present in the sample.
pub fn epsilon<T: Scalar>(sample: &CascadeSample<T>, s: &[u64], k: u64) -> Result<T> {
    epsilon_limited(sample, s, k, k)
}

/// As [`epsilon`], with siblings restricted to `j < min(k, limit)`.
pub fn epsilon_limited<T: Scalar>(
    sample: &CascadeSample<T>,
    s: &[u64],
    k: u64,
    limit: u64,
) -> Result<T> {
    let two: T = int(2);
    let mut power = T::one();
    for _ in 0..k.min(4096) {
        power = power / two.clone();
    }
    // ¼ distributes over the minimum of the tree distances.
    let mut least: Option<T> = None;
    let mut admit = |d: T| {
        least = Some(match least.take() {
            Some(m) => min_of(m, d),
            None => d,
        })
    };
    for i in 1..=s.len() {
        admit(sample.gap(&s[..i])?);
    }
    let mut child = s.to_vec();
    child.push(0);
    for j in 0..k.min(limit) {
        *child.last_mut().expect("nonempty") = j;
        if sample.contains(&child) {
            admit(sample.gap(&child)?);
        }
    }
    Ok(match least {
        Some(m) => min_of(power, m / int::<T>(4)),
        None => power,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    /// `d(l_{s⌢k}, l_s)` is not below `ε(s⌢k)`.
    Bound {
        node: Vec<u64>,
        distance: T,
        epsilon: T,
    },
    /// `l_{s⌢k}` coincides with the value at an ancestor.
    Collapse { node: Vec<u64>, ancestor: Vec<u64> },
}

impl<T: fmt::Display> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound {
                node,
                distance,
                epsilon,
            } => {
                write!(
                    f,
                    "d(l_{}, parent) = {distance} not below ε = {epsilon}",
                    show(node)
                )
            }
            Violation::Collapse { node, ancestor } => {
                write!(f, "l_{} = l_{}", show(node), show(ancestor))
            }
        }
    }
}

/// Checks the child-edge conditions, optionally with a planted fault.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Checker {
    pub fault: Option<Fault>,
}

impl Checker {
    pub const HONEST: Checker = Checker { fault: None };

    pub fn with_fault(fault: Option<Fault>) -> Checker {
        Checker { fault }
    }

    fn strict(self) -> bool {
        self.fault != Some(Fault::NonStrictEpsilon)
    }

    /// First non-root node breaking the ε-bound or separating from no ancestor.
    pub fn first_violation<T: Scalar>(
        self,
        sample: &CascadeSample<T>,
    ) -> Result<Option<Violation<T>>> {
        for y in sample.nodes() {
            let Some((&k, s)) = y.split_last() else {
                continue;
            };
            let d = sample.gap(y)?;
            let eps = epsilon(sample, s, k)?;
            let within = if self.strict() { d < eps } else { d <= eps };
            if !within {
                return Ok(Some(Violation::Bound {
                    node: y.clone(),
                    distance: d,
                    epsilon: eps,
                }));
            }
            if d.is_zero() {
                return Ok(Some(Violation::Collapse {
                    node: y.clone(),
                    ancestor: s.to_vec(),
                }));
            }
            for i in 0..s.len() {
                if sample.distance(y, &s[..i])?.is_zero() {
                    return Ok(Some(Violation::Collapse {
                        node: y.clone(),
                        ancestor: s[..i].to_vec(),
                    }));
                }
            }
        }
        Ok(None)
    }

    pub fn check_conditions_d_e<T: Scalar>(self, sample: &CascadeSample<T>) -> Result<bool> {
        Ok(self.first_violation(sample)?.is_none())
    }
}

pub fn check_conditions_d_e<T: Scalar>(sample: &CascadeSample<T>) -> Result<bool> {
    Checker::HONEST.check_conditions_d_e(sample)
}

fn validate_triple(s: &[u64], t: &[u64], i: usize) -> Result<()> {
    if i >= s.len().min(t.len()) || s[..i] != t[..i] || s[i] >= t[i] {
        return Err(Error::Invalid(format!(
            "need s⌈i = t⌈i and s(i) < t(i): {}, {}, {i}",
            show(s),
            show(t)
        )));
    }
    Ok(())
}

/// `d(l_s, l_t) - ⅓ d(l_{s⌈i+1}, l_{s⌈i})`.
pub fn lemma12_margin<T: Scalar>(
    sample: &CascadeSample<T>,
    s: &[u64],
    t: &[u64],
    i: usize,
) -> Result<T> {
    validate_triple(s, t, i)?;
    let lhs = sample.distance(s, t)?;
    let gap = sample.distance(&s[..=i], &s[..i])?;
    Ok(lhs - gap / int::<T>(3))
}

pub fn check_lemma12<T: Scalar>(
    sample: &CascadeSample<T>,
    s: &[u64],
    t: &[u64],
    i: usize,
) -> Result<bool> {
    Ok(!lemma12_margin(sample, s, t, i)?.is_negative())
}

/// Every `(s, t, i)` with `s⌈i = t⌈i` and `s(i) < t(i)` among the sample's nodes.
pub fn eligible_triples<T: Scalar>(sample: &CascadeSample<T>) -> Vec<(usize, usize, usize)> {
    let nodes = sample.nodes();
    let mut out = Vec::new();
    for (a, s) in nodes.iter().enumerate() {
        for (b, t) in nodes.iter().enumerate() {
            if let Some(i) = s.iter().zip(t).position(|(x, y)| x != y) {
                if s[i] < t[i] {
                    out.push((a, b, i));
                }
            }
        }
    }
    out
}

/// Denominator of the dyadic fractions drawn by the generator.
const GRAIN: i64 = 1024;

fn dyadic<T: Scalar>(num: i64) -> T {
    int::<T>(num) / int::<T>(GRAIN)
}

/// Full tree of depth `depth` with children `1..=branching`, each child placed at
/// sup-distance `r < ε(s⌢k)` from its parent. Values stay dyadic, hence exact.
pub fn gen_cascade<T: Scalar>(seed: u64, depth: usize, branching: u64) -> CascadeSample<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = [
        dyadic::<T>(rng.gen_range(0..=GRAIN)),
        dyadic::<T>(rng.gen_range(0..=GRAIN)),
    ];
    let mut sample = CascadeSample::from_points(vec![(Vec::new(), root)]).expect("root only");
    let mut frontier: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &frontier {
            let parent = sample.point(s).expect("placed").clone();
            for k in 1..=branching {
                let eps = epsilon(&sample, s, k).expect("ancestors placed");
                let r = eps * dyadic::<T>(rng.gen_range(1..GRAIN));
                let along = rng.gen_range(0..2usize);
                let sign: T = if rng.gen_bool(0.5) {
                    T::one()
                } else {
                    -T::one()
                };
                let free = r.clone() * dyadic::<T>(rng.gen_range(-GRAIN..=GRAIN));
                let mut p = parent.clone();
                p[along] = p[along].clone() + sign * r;
                p[1 - along] = p[1 - along].clone() + free;
                let mut child = s.clone();
                child.push(k);
                sample.place(child.clone(), p);
                next.push(child);
            }
        }
        frontier = next;
    }
    sample
}

/// Moves `node` along the ray from its parent to distance exactly `ε`.
pub fn tighten<T: Scalar>(sample: &CascadeSample<T>, node: &[u64]) -> Result<CascadeSample<T>> {
    let Geometry::Points(points) = &sample.geometry else {
        return Err(Error::Invalid("tightening needs placed points".into()));
    };
    let (&k, s) = node
        .split_last()
        .ok_or_else(|| Error::Invalid("root has no parent".into()))?;
    let (c, p) = (sample.idx(node)?, sample.idx(s)?);
    let r = sample.distance(node, s)?;
    if r.is_zero() {
        return Err(Error::Invalid("child sits on its parent".into()));
    }
    let eps = epsilon(sample, s, k)?;
    let scale = eps / r;
    let mut moved = points.clone();
    for axis in 0..2 {
        let offset = points[c][axis].clone() - points[p][axis].clone();
        moved[c][axis] = points[p][axis].clone() + offset * scale.clone();
    }
    Ok(CascadeSample::assemble(
        sample.nodes.clone(),
        sample.index.clone(),
        Geometry::Points(moved),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct CascadeParams {
    pub trials: u64,
    pub seed: u64,
    pub max_depth: usize,
    pub max_branching: u64,
}

impl Default for CascadeParams {
    fn default() -> CascadeParams {
        CascadeParams {
            trials: 10_000,
            seed: 0,
            max_depth: 4,
            max_branching: 4,
        }
    }
}

/// Shape of trial `n`: depth in `0..=max_depth`, branching in `1..=max_branching`.
pub fn trial_shape(params: &CascadeParams, trial: u64) -> (u64, usize, u64) {
    let seed = params.seed.wrapping_add(trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let depth = rng.gen_range(0..=params.max_depth);
    let branching = rng.gen_range(1..=params.max_branching.max(1));
    (seed, depth, branching)
}

/// Exact-arithmetic cascade suite.
pub fn verify_cascade(params: CascadeParams, checker: Checker) -> Result<Report> {
    let mut r = Report::new("cascade");
    r.param("trials", params.trials)
        .param("seed", params.seed)
        .param("max_depth", params.max_depth as u64)
        .param("max_branching", params.max_branching)
        .param("arithmetic", "exact-rational")
        .param("fault", checker.fault.map_or("none", Fault::name));
    r.declare(
        "generator",
        "generated cascades meet the child-edge conditions",
    );
    r.declare(
        "separation",
        "conditions hold ⇒ d(l_s, l_t) ≥ ⅓ d(l_{s⌈i+1}, l_{s⌈i}) on every eligible triple",
    );
    r.declare(
        "distinct-values",
        "conditions hold ⇒ l_s ≠ l_t whenever s ≠ t",
    );
    r.declare("epsilon-monotone", "admitting more siblings never raises ε");
    r.declare("strictness", "a child at distance exactly ε is rejected");
    for trial in 0..params.trials {
        let (seed, depth, branching) = trial_shape(&params, trial);
        let sample: ExactCascade = gen_cascade(seed, depth, branching);
        let ctx = || format!("seed {seed}, depth {depth}, branching {branching}");
        let holds = match checker.first_violation(&sample)? {
            None => {
                r.pass("generator");
                true
            }
            Some(v) => {
                r.fail("generator", ctx(), v.to_string());
                false
            }
        };
        if holds {
            separation(&mut r, &sample, ctx)?;
        }
        for y in sample.nodes() {
            let Some((&k, s)) = y.split_last() else {
                continue;
            };
            let mut prev = epsilon_limited(&sample, s, k, 0)?;
            for limit in 1..=k {
                let cur = epsilon_limited(&sample, s, k, limit)?;
                if cur > prev {
                    r.fail(
                        "epsilon-monotone",
                        format!("{}, node {}", ctx(), show(y)),
                        format!("{prev} then {cur}"),
                    );
                }
                prev = cur;
            }
            r.pass("epsilon-monotone");
        }
        // The last node is a leaf and the last of its siblings, so moving it
        // changes no other bound.
        if let Some(leaf) = sample.nodes().last().filter(|y| !y.is_empty()) {
            let tight = tighten(&sample, leaf)?;
            let accepted = checker.check_conditions_d_e(&tight)?;
            r.expect(
                "strictness",
                !accepted,
                || format!("{}, node {} moved to distance ε", ctx(), show(leaf)),
                || "checker accepted d = ε".into(),
            );
        }
    }
    Ok(r.finish())
}

/// Coordinates times their least common denominator.
fn common_scale(sample: &ExactCascade) -> Option<Vec<[BigInt; 2]>> {
    let Geometry::Points(p) = &sample.geometry else {
        return None;
    };
    let l = p
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    Some(
        p.iter()
            .map(|pt| [0, 1].map(|a| pt[a].numer() * (&l / pt[a].denom())))
            .collect(),
    )
}

/// Both separation checks over every pair. Both sides of each inequality are
/// distances, so they run on the common-denominator integers.
fn separation(r: &mut Report, sample: &ExactCascade, ctx: impl Fn() -> String) -> Result<()> {
    let scaled = common_scale(sample)
        .ok_or_else(|| Error::Invalid("separation needs placed points".into()))?;
    let small: Option<Vec<[i128; 2]>> = scaled
        .iter()
        .map(|pt| Some([pt[0].to_i128()?, pt[1].to_i128()?]))
        .collect();
    match small.filter(|pts| pts.iter().flatten().all(|c| c.unsigned_abs() < 1 << 120)) {
        Some(pts) => separation_in(r, sample, &pts, ctx),
        None => separation_in(r, sample, &scaled, ctx),
    }
}

fn separation_in<I: Clone + Ord + Signed>(
    r: &mut Report,
    sample: &ExactCascade,
    pts: &[[I; 2]],
    ctx: impl Fn() -> String,
) -> Result<()> {
    let nodes = sample.nodes();
    let d = |a: usize, b: usize| {
        let dx = (pts[a][0].clone() - pts[b][0].clone()).abs();
        let dy = (pts[a][1].clone() - pts[b][1].clone()).abs();
        dx.max(dy)
    };
    // gaps[a][i] = d(l_{y⌈i+1}, l_{y⌈i}) for y = nodes[a]
    let gaps: Vec<Vec<I>> = nodes
        .iter()
        .map(|y| {
            (0..y.len())
                .map(|i| {
                    d(
                        sample.idx(&y[..=i]).expect("prefix-closed"),
                        sample.idx(&y[..i]).expect("prefix-closed"),
                    )
                })
                .collect()
        })
        .collect();
    let three = I::one() + I::one() + I::one();
    let (mut separated, mut distinct) = (0u64, 0u64);
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let dab = d(a, b);
            if dab.is_zero() {
                r.fail(
                    "distinct-values",
                    format!("{}, {} vs {}", ctx(), show(&nodes[a]), show(&nodes[b])),
                    "equal values",
                );
            } else {
                distinct += 1;
            }
            let Some(i) = nodes[a].iter().zip(&nodes[b]).position(|(x, y)| x != y) else {
                continue;
            };
            let (lo, hi) = if nodes[a][i] < nodes[b][i] {
                (a, b)
            } else {
                (b, a)
            };
            if dab * three.clone() >= gaps[lo][i] {
                separated += 1;
            } else {
                let margin = lemma12_margin(sample, &nodes[lo], &nodes[hi], i)?;
                r.fail(
                    "separation",
                    format!(
                        "{}, s = {}, t = {}, i = {i}",
                        ctx(),
                        show(&nodes[lo]),
                        show(&nodes[hi])
                    ),
                    format!("margin {margin}"),
                );
            }
        }
    }
    r.pass_n("separation", separated);
    r.pass_n("distinct-values", distinct);
    Ok(())
}
