//! Branch maps `f_{s,t}` on the product of the alphabets.
//!
//! The domain of `f_{s,t}` is the clopen set of points `α` with
//! `α(J[s⌈j⌢t⌈(j+1)]) = 1` and `α(J[s⌈j⌢t⌈j⌢p]) ≠ 1` for `j ≤ |s|`, `p < t(j)`.
//! The map rewrites each must-be-1 coordinate `q` to `J(α⌈q⌢1)` and leaves the
//! others alone. For a fixed `s` the domains over `t` are pairwise disjoint,
//! and gluing them gives `f_n` with `s = e(n)`.
//!
//! The constrained indices interleave as
//! `o_{j-1} < n_{j,0} < ... < n_{j,t(j)-1} < o_j` with `o_j = J[s⌈j⌢t⌈(j+1)]`
//! and `n_{j,p} = J[s⌈j⌢t⌈j⌢p]`.

use serde::Serialize;

use crate::alphabet::PointPrefix;
use crate::coding::{concat, show_seq, snoc};
use crate::enumeration::{e, sorted_below};
use crate::error::{Error, Result};
use crate::fault::Fault;
use crate::nat::Nat;
use crate::outcome::Outcome;

/// Entries of `t` above this are rejected: the scan over `p < t(j)` would not end.
pub const MAX_T_ENTRY: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BranchIndex {
    s: Vec<Nat>,
    t: Vec<Nat>,
}

impl BranchIndex {
    pub fn new(s: Vec<Nat>, t: Vec<Nat>) -> Result<BranchIndex> {
        if t.len() != s.len() + 1 {
            return Err(Error::LengthMismatch {
                left: s.len() + 1,
                right: t.len(),
            });
        }
        if let Some(bad) = t
            .iter()
            .find(|v| v.as_u64().is_none_or(|v| v > MAX_T_ENTRY))
        {
            return Err(Error::Capacity {
                what: "branch entry t(j)",
                requested: bad.as_u64().unwrap_or(u64::MAX),
                limit: MAX_T_ENTRY,
            });
        }
        Ok(BranchIndex { s, t })
    }

    pub fn from_u64(s: &[u64], t: &[u64]) -> Result<BranchIndex> {
        BranchIndex::new(crate::coding::seq(s), crate::coding::seq(t))
    }

    pub fn s(&self) -> &[Nat] {
        &self.s
    }

    pub fn t(&self) -> &[Nat] {
        &self.t
    }

    fn t_at(&self, j: usize) -> u64 {
        self.t[j].as_u64().expect("validated on construction")
    }

    /// `J(s⌢t)`, the largest coordinate the map rewrites.
    pub fn top(&self) -> Nat {
        Nat::encode(&concat(&self.s, &self.t))
    }

    /// `(s⌢n, t⌢m)`.
    pub fn extend(&self, n: Nat, m: u64) -> Result<BranchIndex> {
        BranchIndex::new(snoc(&self.s, n), snoc(&self.t, Nat::small(m)))
    }

    /// `o_j = J[s⌈j⌢t⌈(j+1)]`.
    pub fn ones_index(&self, j: usize) -> Nat {
        Nat::encode(&concat(&self.s[..j], &self.t[..=j]))
    }

    /// `n_{j,p} = J[s⌈j⌢t⌈j⌢p]`.
    pub fn non_ones_index(&self, j: usize, p: u64) -> Nat {
        Nat::encode(&snoc(&concat(&self.s[..j], &self.t[..j]), Nat::small(p)))
    }
}

impl std::fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", show_seq(&self.s), show_seq(&self.t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CylinderConstraint {
    /// Strictly increasing; entry `j` is `o_j`.
    pub ones: Vec<Nat>,
    /// Strictly increasing.
    pub non_ones: Vec<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteMap {
    /// Coordinates whose value becomes `J(α⌈q⌢1)`, strictly increasing.
    pub modified: Vec<Nat>,
}

/// The branch construction, optionally with an injected fault.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub fault: Option<Fault>,
}

impl Model {
    pub const HONEST: Model = Model { fault: None };

    pub fn with_fault(fault: Fault) -> Model {
        Model { fault: Some(fault) }
    }

    pub fn constraints(&self, b: &BranchIndex) -> CylinderConstraint {
        let mut ones = Vec::with_capacity(b.t.len());
        let mut non_ones = Vec::new();
        for j in 0..b.t.len() {
            if self.fault != Some(Fault::DroppedNonOnes) {
                for p in 0..b.t_at(j) {
                    non_ones.push(b.non_ones_index(j, p));
                }
            }
            ones.push(b.ones_index(j));
        }
        CylinderConstraint { ones, non_ones }
    }

    pub fn rewrite_map(&self, b: &BranchIndex) -> RewriteMap {
        RewriteMap {
            modified: self.constraints(b).ones,
        }
    }

    pub fn in_domain(&self, x: &PointPrefix, b: &BranchIndex) -> Outcome<()> {
        in_constraint(x, &self.constraints(b))
    }

    /// `f_{s,t}(x)`. Needs `x` readable up to `J(s⌢t)`; the error names the
    /// coordinate that must be readable otherwise.
    pub fn apply(&self, b: &BranchIndex, x: &PointPrefix) -> Result<PointPrefix> {
        let c = self.constraints(b);
        match in_constraint(x, &c) {
            Outcome::Yes(()) => {}
            Outcome::No => return Err(Error::OutsideDomain),
            Outcome::Unknown => {
                return Err(Error::Horizon {
                    required: b.top().to_string(),
                });
            }
        }
        let mut out = x.clone();
        for q in &c.ones {
            let qi = q.as_usize().ok_or_else(|| Error::Capacity {
                what: "rewritten coordinate",
                requested: q.as_u64().unwrap_or(u64::MAX),
                limit: usize::MAX as u64,
            })?;
            let prefix = x.restrict(qi).ok_or_else(|| Error::Horizon {
                required: q.to_string(),
            })?;
            let mut v = Nat::encode(&snoc(&prefix, Nat::ONE));
            if self.fault == Some(Fault::OffByOneRewrite) {
                if let Some(w) = v.checked_succ() {
                    v = w;
                }
            }
            out.set(qi, v);
        }
        Ok(out)
    }

    /// Greedy search for the unique `t` with `x ∈ D_{f_{s,t}}`:
    /// `t(j)` is the least `p` with `x(J[s⌈j⌢t⌈j⌢p]) = 1`.
    pub fn find_branch(&self, s: &[Nat], x: &PointPrefix) -> Outcome<Vec<Nat>> {
        let mut t: Vec<Nat> = Vec::with_capacity(s.len() + 1);
        for j in 0..=s.len() {
            let base = concat(&s[..j], &t);
            let mut p = 0u64;
            loop {
                if p > MAX_T_ENTRY {
                    return Outcome::Unknown;
                }
                let idx = Nat::encode(&snoc(&base, Nat::small(p)));
                match x.get_at(&idx) {
                    None => return Outcome::Unknown,
                    Some(v) if v.is_one() => break,
                    Some(_) => p += 1,
                }
            }
            t.push(Nat::small(p));
        }
        let b = BranchIndex::new(s.to_vec(), t.clone()).expect("greedy t is bounded");
        match self.in_domain(x, &b) {
            Outcome::Yes(()) => Outcome::Yes(t),
            Outcome::No => Outcome::No,
            Outcome::Unknown => Outcome::Unknown,
        }
    }

    /// `f_n(x)`: the branch of `e(n)` containing `x`, then its map.
    pub fn apply_fn(&self, n: u64, x: &PointPrefix) -> Result<Outcome<(BranchIndex, PointPrefix)>> {
        let s = e(n)?;
        let t = match self.find_branch(&s, x) {
            Outcome::Yes(t) => t,
            Outcome::No => return Ok(Outcome::No),
            Outcome::Unknown => return Ok(Outcome::Unknown),
        };
        let b = BranchIndex::new(s, t)?;
        match self.apply(&b, x) {
            Ok(y) => Ok(Outcome::Yes((b, y))),
            Err(Error::Horizon { .. }) => Ok(Outcome::Unknown),
            Err(Error::OutsideDomain) => Ok(Outcome::No),
            Err(other) => Err(other),
        }
    }
}

fn in_constraint(x: &PointPrefix, c: &CylinderConstraint) -> Outcome<()> {
    let mut unknown = false;
    for q in &c.ones {
        match x.get_at(q) {
            Some(v) if !v.is_one() => return Outcome::No,
            Some(_) => {}
            None => unknown = true,
        }
    }
    for q in &c.non_ones {
        match x.get_at(q) {
            Some(v) if v.is_one() => return Outcome::No,
            Some(_) => {}
            None => unknown = true,
        }
    }
    if unknown {
        Outcome::Unknown
    } else {
        Outcome::Yes(())
    }
}

pub fn constraints(b: &BranchIndex) -> CylinderConstraint {
    Model::HONEST.constraints(b)
}

pub fn in_domain(x: &PointPrefix, b: &BranchIndex) -> Outcome<()> {
    Model::HONEST.in_domain(x, b)
}

pub fn apply(b: &BranchIndex, x: &PointPrefix) -> Result<PointPrefix> {
    Model::HONEST.apply(b, x)
}

pub fn find_branch(s: &[Nat], x: &PointPrefix) -> Outcome<Vec<Nat>> {
    Model::HONEST.find_branch(s, x)
}

pub fn apply_fn(n: u64, x: &PointPrefix) -> Result<Outcome<(BranchIndex, PointPrefix)>> {
    Model::HONEST.apply_fn(n, x)
}

/// Every branch with `J(s⌢t) < horizon`, by increasing `J(s⌢t)`.
pub fn branches_below(horizon: u64) -> Vec<BranchIndex> {
    sorted_below(horizon, None)
        .into_iter()
        .filter(|(_, w)| w.len() % 2 == 1)
        .map(|(_, w)| {
            let k = w.len() / 2;
            BranchIndex::from_u64(&w[..k], &w[k..]).expect("odd split")
        })
        .collect()
}

/// A coordinate where one constraint demands 1 and the other forbids it.
pub fn clash(a: &CylinderConstraint, b: &CylinderConstraint) -> Option<Nat> {
    a.ones
        .iter()
        .find(|q| b.non_ones.contains(q))
        .or_else(|| b.ones.iter().find(|q| a.non_ones.contains(q)))
        .cloned()
}
