//! The alphabets `A_i = {1} ∪ {J(u⌢1) : u ∈ A_0 × ... × A_{i-1}}`, nodes of their
//! product, and points of the product given by finite prefixes.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coding::snoc;
use crate::error::{Error, Result};
use crate::nat::Nat;

pub const DEFAULT_MAX_DEPTH: usize = 5;
pub const DEFAULT_MAX_HORIZON: u64 = 1_000_000;

/// A node `u ∈ A_0 × ... × A_{p-1}`.
pub type Node = Vec<Nat>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub max_depth: usize,
    pub max_horizon: u64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            max_depth: DEFAULT_MAX_DEPTH,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }
}

impl Caps {
    pub fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.max_depth {
            return Err(Error::Capacity {
                what: "depth",
                requested: depth as u64,
                limit: self.max_depth as u64,
            });
        }
        Ok(())
    }

    pub fn check_horizon(&self, horizon: u64) -> Result<()> {
        if horizon > self.max_horizon {
            return Err(Error::Capacity {
                what: "horizon",
                requested: horizon,
                limit: self.max_horizon,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Alphabet {
    pub level: usize,
    /// Sorted ascending; `members[0] == 1`.
    pub members: Vec<Nat>,
}

impl Alphabet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &Nat) -> bool {
        self.members.binary_search(v).is_ok()
    }

    /// The node `u` with `v = J(u⌢1)`, or `None` for the member 1.
    pub fn provenance(&self, v: &Nat) -> Option<Node> {
        let mut seq = v.decode()?;
        seq.pop();
        Some(seq)
    }
}

/// `A_0, ..., A_{depth-1}`, each sorted.
pub fn alphabets(depth: usize, caps: &Caps) -> Result<Vec<Alphabet>> {
    caps.check_depth(depth)?;
    let mut out: Vec<Alphabet> = Vec::with_capacity(depth);
    for level in 0..depth {
        let mut members: Vec<Nat> = product(&out)
            .into_iter()
            .map(|u| Nat::encode(&snoc(&u, Nat::ONE)))
            .collect();
        members.push(Nat::ONE);
        members.sort();
        out.push(Alphabet { level, members });
    }
    Ok(out)
}

/// All nodes of length `p` in lexicographic order.
pub fn enumerate_nodes(p: usize, caps: &Caps) -> Result<Vec<Node>> {
    caps.check_depth(p)?;
    Ok(product(&alphabets(p, caps)?))
}

/// Lexicographic product of the given alphabets, in order.
pub fn product(alphs: &[Alphabet]) -> Vec<Node> {
    let mut nodes: Vec<Node> = vec![Vec::new()];
    for a in alphs {
        let mut next = Vec::with_capacity(nodes.len() * a.len());
        for u in &nodes {
            for m in &a.members {
                next.push(snoc(u, m.clone()));
            }
        }
        nodes = next;
    }
    nodes
}

pub fn lex_compare(x: &[Nat], y: &[Nat]) -> Result<Ordering> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.cmp(y))
}

/// Membership test for arbitrary levels, memoized across calls.
///
/// `v ∈ A_i` iff `v = 1` or `v` decodes to `u⌢1` with `|u| = i` and `u(p) ∈ A_p`.
#[derive(Default)]
pub struct MembershipOracle {
    memo: HashMap<(Nat, usize), bool>,
}

impl MembershipOracle {
    pub fn new() -> MembershipOracle {
        MembershipOracle::default()
    }

    pub fn is_member(&mut self, v: &Nat, level: usize) -> bool {
        if v.is_one() {
            return true;
        }
        if v.is_zero() {
            return false;
        }
        if let Some(&known) = self.memo.get(&(v.clone(), level)) {
            return known;
        }
        let ok = match v.code_seq() {
            Some(seq) => self.check_seq(seq, level),
            None => match v.decode() {
                Some(seq) => self.check_seq(&seq, level),
                None => false,
            },
        };
        self.memo.insert((v.clone(), level), ok);
        ok
    }

    fn check_seq(&mut self, seq: &[Nat], level: usize) -> bool {
        seq.len() == level + 1
            && seq[level].is_one()
            && seq[..level]
                .iter()
                .enumerate()
                .all(|(p, e)| self.is_member(e, p))
    }
}

/// A point of the product space known through a finite prefix. With
/// `tail_ones` set it denotes `entries⌢1^ω`; otherwise coordinates past the
/// prefix are unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointPrefix {
    pub entries: Vec<Nat>,
    pub tail_ones: bool,
}

impl PointPrefix {
    pub fn new(entries: Vec<Nat>, tail_ones: bool) -> PointPrefix {
        PointPrefix { entries, tail_ones }
    }

    /// The point `u⌢1^ω`.
    pub fn with_tail(entries: Vec<Nat>) -> PointPrefix {
        PointPrefix {
            entries,
            tail_ones: true,
        }
    }

    pub fn bare(entries: Vec<Nat>) -> PointPrefix {
        PointPrefix {
            entries,
            tail_ones: false,
        }
    }

    /// The constant point `1^ω`.
    pub fn ones() -> PointPrefix {
        PointPrefix::with_tail(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Nat> {
        match self.entries.get(i) {
            Some(v) => Some(v.clone()),
            None if self.tail_ones => Some(Nat::ONE),
            None => None,
        }
    }

    /// Coordinate at an arbitrary (possibly symbolic) index.
    pub fn get_at(&self, i: &Nat) -> Option<Nat> {
        match i.as_usize() {
            Some(i) => self.get(i),
            None if self.tail_ones => Some(Nat::ONE),
            None => None,
        }
    }

    /// `x⌈n`, padded with 1s from the tail when needed.
    pub fn restrict(&self, n: usize) -> Option<Vec<Nat>> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Writes `v` at coordinate `i`, materializing tail 1s up to `i`.
    pub fn set(&mut self, i: usize, v: Nat) {
        if i >= self.entries.len() {
            self.entries.resize(i + 1, Nat::ONE);
        }
        self.entries[i] = v;
    }

    /// Drops trailing 1s covered by the tail convention.
    pub fn normalized(mut self) -> PointPrefix {
        if self.tail_ones {
            while self.entries.last().is_some_and(Nat::is_one) {
                self.entries.pop();
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Disagreement {
    /// The denoted points first differ at this index.
    At(usize),
    /// The denoted points are equal.
    Equal,
    /// Equal on the readable range, which ends before a difference is certain.
    Unknown,
}

pub fn first_disagreement(x: &PointPrefix, y: &PointPrefix) -> Disagreement {
    let n = x.len().max(y.len());
    for i in 0..n {
        match (x.get(i), y.get(i)) {
            (Some(a), Some(b)) if a != b => return Disagreement::At(i),
            (Some(_), Some(_)) => {}
            _ => return Disagreement::Unknown,
        }
    }
    if x.tail_ones && y.tail_ones {
        Disagreement::Equal
    } else {
        Disagreement::Unknown
    }
}

/// The ultrametric `d(x,y) = 2^(-Δ(x,y))`, `0` for equal points.
pub fn distance<T>(d: Disagreement) -> Option<T>
where
    T: Zero + One + Clone + std::ops::Div<Output = T> + std::ops::Add<Output = T>,
{
    match d {
        Disagreement::Equal => Some(T::zero()),
        Disagreement::At(k) => {
            let two = T::one() + T::one();
            Some(T::one() / num_traits::pow(two, k))
        }
        Disagreement::Unknown => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::seq;
    use num_rational::BigRational;
    use std::collections::HashSet;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn small_alphabets() {
        let a = alphabets(2, &caps()).unwrap();
        assert_eq!(a[0].members, seq(&[1, 4]));
        assert_eq!(a[1].members, seq(&[1, 36, 288]));
        assert!(alphabets(6, &caps()).is_err());
        assert!(alphabets(0, &caps()).unwrap().is_empty());
    }

    #[test]
    fn sizes_and_provenance() {
        let a = alphabets(5, &caps()).unwrap();
        let sizes: Vec<usize> = a.iter().map(Alphabet::len).collect();
        assert_eq!(sizes, vec![2, 3, 7, 43, 1807]);
        for (i, al) in a.iter().enumerate() {
            let mut seen = HashSet::new();
            for m in &al.members {
                assert!(seen.insert(m.clone()));
                if m.is_one() {
                    continue;
                }
                let u = al.provenance(m).unwrap();
                assert_eq!(u.len(), i);
                for (p, e) in u.iter().enumerate() {
                    assert!(a[p].contains(e));
                }
            }
            assert!(al.members.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn oracle_agrees_with_tables() {
        let a = alphabets(4, &caps()).unwrap();
        let mut o = MembershipOracle::new();
        for al in &a {
            for m in &al.members {
                assert!(o.is_member(m, al.level));
            }
        }
        assert!(!o.is_member(&Nat::small(900), 1));
        assert!(!o.is_member(&Nat::small(36 * 5), 2));
        assert!(!o.is_member(&Nat::small(5), 0));
    }

    #[test]
    fn nodes_sorted() {
        for p in 0..=4 {
            let nodes = enumerate_nodes(p, &caps()).unwrap();
            let expect = [1, 2, 6, 42, 1806][p];
            assert_eq!(nodes.len(), expect);
            assert!(nodes
                .windows(2)
                .all(|w| lex_compare(&w[0], &w[1]) == Ok(Ordering::Less)));
        }
    }

    #[test]
    fn lex_examples() {
        assert_eq!(
            lex_compare(&seq(&[1, 1, 1]), &seq(&[1, 1, 1])),
            Ok(Ordering::Equal)
        );
        assert_eq!(
            lex_compare(&seq(&[1, 1, 1]), &seq(&[1, 1, 900])),
            Ok(Ordering::Less)
        );
        assert_eq!(
            lex_compare(&seq(&[4, 1, 1]), &seq(&[1, 288, 1])),
            Ok(Ordering::Greater)
        );
        assert!(lex_compare(&seq(&[1]), &seq(&[1, 1])).is_err());
    }

    #[test]
    fn disagreement_examples() {
        let x = PointPrefix::with_tail(seq(&[1, 1, 1]));
        let y = PointPrefix::with_tail(seq(&[1, 1, 900]));
        assert_eq!(first_disagreement(&x, &x), Disagreement::Equal);
        assert_eq!(first_disagreement(&x, &y), Disagreement::At(2));
        assert_eq!(
            first_disagreement(&x, &PointPrefix::ones()),
            Disagreement::Equal
        );
        let b = PointPrefix::bare(seq(&[1, 1, 1]));
        assert_eq!(first_disagreement(&b, &b), Disagreement::Unknown);
        assert_eq!(distance::<f64>(Disagreement::At(2)), Some(0.25));
        assert_eq!(
            distance::<BigRational>(Disagreement::At(3)),
            Some(BigRational::new(1.into(), 8.into()))
        );
    }
}
