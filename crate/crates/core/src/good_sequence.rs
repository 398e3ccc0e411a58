//! Index-substitution maps `h_s` on binary sequences, `s` over positive integers.
//!
//! With `m_j = J(s⌈j)/q_{j-1}`, `h_s(x)(k) = x(σ_s(k))` where `σ_s(k) = k` unless
//! some `1 ≤ j ≤ |s|` has `m_j | k+1`; then, for the largest such `i` and
//! `k + 1 = m_i q`, `σ_s(k) = J(s⌈i) q - m_i - 1`.
//!
//! Indices grow like products of prime powers, so the arithmetic is generic:
//! `u128` for speed, `BigUint` when nothing may overflow.

use std::fmt::Display;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::primes::nth_prime;
use crate::report::Report;

/// Unsigned integer types usable as coordinate indices.
pub trait Index:
    Clone + Ord + Display + Integer + CheckedAdd + CheckedMul + CheckedSub + FromPrimitive + ToPrimitive
{
}

impl<T> Index for T where
    T: Clone
        + Ord
        + Display
        + Integer
        + CheckedAdd
        + CheckedMul
        + CheckedSub
        + FromPrimitive
        + ToPrimitive
{
}

fn overflow() -> Error {
    Error::Capacity {
        what: "index arithmetic",
        requested: u64::MAX,
        limit: u64::MAX,
    }
}

fn lift<T: Index>(v: u64) -> T {
    T::from_u64(v).expect("every index type holds u64")
}

fn prime_pow<T: Index>(p: usize, e: u64) -> Result<T> {
    let q: T = lift(nth_prime(p));
    let mut acc = T::one();
    for _ in 0..e {
        acc = acc.checked_mul(&q).ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// `J(s)` in `T`.
pub fn code<T: Index>(s: &[u64]) -> Result<T> {
    if s.is_empty() {
        return Ok(T::zero());
    }
    let mut acc = T::one();
    for (p, &v) in s.iter().enumerate() {
        let f = prime_pow::<T>(p, v.checked_add(1).ok_or_else(overflow)?)?;
        acc = acc.checked_mul(&f).ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// `σ_s` for a fixed `s`.
#[derive(Clone, Debug)]
pub struct IndexMap<T> {
    s: Vec<u64>,
    /// `J(s⌈j)` for `j = 1..=|s|`.
    codes: Vec<T>,
    /// `m_j = J(s⌈j) / q_{j-1}` for `j = 1..=|s|`.
    moduli: Vec<T>,
}

impl<T: Index> IndexMap<T> {
    pub fn new(s: &[u64]) -> Result<IndexMap<T>> {
        if s.contains(&0) {
            return Err(Error::Invalid(format!("entries must be positive: {s:?}")));
        }
        let mut codes = Vec::with_capacity(s.len());
        let mut moduli = Vec::with_capacity(s.len());
        for j in 1..=s.len() {
            let c: T = code(&s[..j])?;
            moduli.push(c.clone() / lift::<T>(nth_prime(j - 1)));
            codes.push(c);
        }
        Ok(IndexMap {
            s: s.to_vec(),
            codes,
            moduli,
        })
    }

    pub fn s(&self) -> &[u64] {
        &self.s
    }

    /// Source coordinate `σ_s(k)`.
    pub fn sigma(&self, k: &T) -> Result<T> {
        let k1 = k.checked_add(&T::one()).ok_or_else(overflow)?;
        for i in (0..self.s.len()).rev() {
            let (q, r) = k1.div_rem(&self.moduli[i]);
            if r.is_zero() {
                let v = self.codes[i].checked_mul(&q).ok_or_else(overflow)?;
                return v
                    .checked_sub(&self.moduli[i])
                    .and_then(|v| v.checked_sub(&T::one()))
                    .ok_or_else(overflow);
            }
        }
        Ok(k.clone())
    }

    /// Whether `σ_s(k) = k` by the residue rule alone.
    pub fn fixes_by_residue(&self, k: &T) -> bool {
        let k1 = k.clone() + T::one();
        self.moduli.iter().all(|m| !k1.is_multiple_of(m))
    }
}

pub type IndexMapU128 = IndexMap<u128>;
pub type IndexMapBig = IndexMap<BigUint>;

pub fn sigma<T: Index>(s: &[u64], k: &T) -> Result<T> {
    IndexMap::<T>::new(s)?.sigma(k)
}

/// A binary sequence known through a prefix, optionally continued periodically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BitPrefix {
    pub bits: Vec<bool>,
    pub period: Option<Vec<bool>>,
}

impl BitPrefix {
    pub fn finite(bits: Vec<bool>) -> BitPrefix {
        BitPrefix { bits, period: None }
    }

    pub fn periodic(bits: Vec<bool>, period: Vec<bool>) -> BitPrefix {
        assert!(!period.is_empty(), "period must be nonempty");
        BitPrefix {
            bits,
            period: Some(period),
        }
    }

    pub fn get<T: Index>(&self, i: &T) -> Option<bool> {
        if let Some(b) = i.to_usize().and_then(|u| self.bits.get(u)) {
            return Some(*b);
        }
        let period = self.period.as_ref()?;
        let off = i.clone() - lift::<T>(self.bits.len() as u64);
        let r = off.mod_floor(&lift::<T>(period.len() as u64));
        Some(period[r.to_usize().expect("below period length")])
    }
}

/// `h_s(x)(k)`.
pub fn h_eval<T: Index>(map: &IndexMap<T>, x: &BitPrefix, k: &T) -> Result<Outcome<bool>> {
    let src = map.sigma(k)?;
    Ok(match x.get(&src) {
        Some(b) => Outcome::Yes(b),
        None => Outcome::Unknown,
    })
}

/// `J(s⌢k)/q_{|s|} - 1`: `h_{s⌢k}` and `h_s` agree on all smaller coordinates.
pub fn convergence_bound<T: Index>(s: &[u64], k: u64) -> Result<T> {
    let mut ext = s.to_vec();
    ext.push(k);
    let c: T = code(&ext)?;
    Ok(c / lift::<T>(nth_prime(s.len())) - T::one())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessCase {
    /// `s` and `t` first differ at `m`.
    Divergence { m: usize },
    /// One is a strict prefix of the other.
    Prefix,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisagreementWitness<T> {
    pub case: WitnessCase,
    /// The `n` in `k_n`.
    pub n: u32,
    pub k: T,
    pub source_s: T,
    pub source_t: T,
    /// Extends `u`; `h_s` and `h_t` differ at `k` on every continuation.
    pub prefix: BitPrefix,
}

/// Largest exponent tried when pushing the source indices past `|u|`.
const MAX_N: u32 = 256;

/// Builds `x ⊇ u` and `k` with `h_s(x)(k) ≠ h_t(x)(k)`, following the two cases
/// of the density argument: `k_n = (J(t⌈m+1)/q_m) q_{m+2}^n - 1` at a first
/// divergence `m` with `s(m) < t(m)`, or `k_n = (J(t)/q_{|t|-1}) q_{|t|+1}^n - 1`
/// when `s` is a strict prefix of `t` (roles swapped as needed).
pub fn disagreement_witness<T: Index>(
    s: &[u64],
    t: &[u64],
    u: &[bool],
) -> Result<DisagreementWitness<T>> {
    if s == t {
        return Err(Error::Invalid("sequences must differ".into()));
    }
    let m = s.iter().zip(t).position(|(a, b)| a != b);
    // (lo, hi) with lo(m) < hi(m), or lo a strict prefix of hi.
    let (_, hi, case) = match m {
        Some(m) if s[m] < t[m] => (s, t, WitnessCase::Divergence { m }),
        Some(m) => (t, s, WitnessCase::Divergence { m }),
        None if s.len() < t.len() => (s, t, WitnessCase::Prefix),
        None => (t, s, WitnessCase::Prefix),
    };
    let (base, prime): (T, usize) = match case {
        WitnessCase::Divergence { m } => (code::<T>(&hi[..=m])? / lift::<T>(nth_prime(m)), m + 2),
        WitnessCase::Prefix => (
            code::<T>(hi)? / lift::<T>(nth_prime(hi.len() - 1)),
            hi.len() + 1,
        ),
    };
    let map_s = IndexMap::<T>::new(s)?;
    let map_t = IndexMap::<T>::new(t)?;
    let floor: T = lift(u.len() as u64);
    for n in 0..=MAX_N {
        let k = base
            .checked_mul(&prime_pow::<T>(prime, u64::from(n))?)
            .ok_or_else(overflow)?
            - T::one();
        let (a, b) = (map_s.sigma(&k)?, map_t.sigma(&k)?);
        if a < floor || b < floor || a == b {
            continue;
        }
        let top = a.clone().max(b.clone()).to_usize().ok_or_else(overflow)?;
        let mut bits = u.to_vec();
        bits.resize(top + 1, false);
        bits[b.to_usize().expect("below top")] = true;
        return Ok(DisagreementWitness {
            case,
            n,
            k,
            source_s: a,
            source_t: b,
            prefix: BitPrefix::finite(bits),
        });
    }
    Err(Error::Capacity {
        what: "witness exponent n",
        requested: u64::from(MAX_N) + 1,
        limit: u64::from(MAX_N),
    })
}

/// All sequences with entries in `1..=max_entry` and length `<= max_len`.
pub fn positive_seqs(max_entry: u64, max_len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for v in 1..=max_entry {
                let mut e = s.clone();
                e.push(v);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct GoodSuiteParams {
    /// σ-injectivity and convergence range over entries `1..=max_entry`.
    pub max_entry: u64,
    pub max_s_len: usize,
    pub horizon: u64,
    /// Witness pairs range over entries `1..=witness_entry`, lengths `<= witness_len`.
    pub witness_entry: u64,
    pub witness_len: usize,
    pub max_u_len: usize,
}

impl Default for GoodSuiteParams {
    fn default() -> GoodSuiteParams {
        GoodSuiteParams {
            max_entry: 4,
            max_s_len: 3,
            horizon: 100_000,
            witness_entry: 3,
            witness_len: 2,
            max_u_len: 12,
        }
    }
}

fn fmt_seq(s: &[u64]) -> String {
    let v: Vec<String> = s.iter().map(u64::to_string).collect();
    format!("<{}>", v.join(","))
}

/// Finite shadows of conditions (a)-(d) for the maps `h_s`.
pub fn verify_good_suite(params: GoodSuiteParams) -> Result<Report> {
    let mut r = Report::new("good-suite");
    r.param("max_entry", params.max_entry)
        .param("max_s_len", params.max_s_len as u64)
        .param("horizon", params.horizon)
        .param("witness_entry", params.witness_entry)
        .param("witness_len", params.witness_len as u64)
        .param("max_u_len", params.max_u_len as u64);
    r.declare(
        "totality",
        "every h_s is defined on all of 2^ω: σ_s(k) exists for each k",
    );
    r.declare(
        "sigma-injective",
        "σ_s injective on [0, horizon), so h_s is continuous and open",
    );
    r.declare("residue-fixed", "σ_s(k) = k when k+1 avoids every modulus");
    r.declare("arbitrary-precision", "u128 and BigUint index maps agree");
    r.declare("convergence", "σ_{s⌢k} = σ_s below J(s⌢k)/q_{|s|} - 1");
    r.declare(
        "witness",
        "h_s and h_t differ at k on the returned extension of u",
    );
    r.declare(
        "closed-form",
        "source indices match the closed forms of the density argument",
    );
    let seqs = positive_seqs(params.max_entry, params.max_s_len);
    for s in &seqs {
        let map = IndexMapU128::new(s)?;
        let big = IndexMapBig::new(s)?;
        let mut values: Vec<u128> = Vec::with_capacity(params.horizon as usize);
        let mut total = true;
        for k in 0..u128::from(params.horizon) {
            match map.sigma(&k) {
                Ok(v) => {
                    if map.fixes_by_residue(&k) && v != k {
                        r.fail(
                            "residue-fixed",
                            format!("s = {}, k = {k}", fmt_seq(s)),
                            format!("σ = {v}"),
                        );
                    }
                    values.push(v);
                }
                Err(err) => {
                    total = false;
                    r.fail(
                        "totality",
                        format!("s = {}, k = {k}", fmt_seq(s)),
                        err.to_string(),
                    );
                }
            }
        }
        r.expect("totality", total, || fmt_seq(s), String::new);
        r.pass("residue-fixed");
        for k in (0..params.horizon).step_by(997) {
            let a = map.sigma(&u128::from(k))?;
            let b = big.sigma(&BigUint::from(k))?;
            r.expect(
                "arbitrary-precision",
                BigUint::from(a) == b,
                || format!("s = {}, k = {k}", fmt_seq(s)),
                || format!("u128 {a}, BigUint {b}"),
            );
        }
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let dup = sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]);
        r.expect(
            "sigma-injective",
            dup.is_none(),
            || fmt_seq(s),
            || format!("source {dup:?} hit twice"),
        );
        if s.len() < params.max_s_len {
            for k in 1..=params.max_entry + 2 {
                let mut ext = s.clone();
                ext.push(k);
                let map_ext = IndexMapU128::new(&ext)?;
                let bound = convergence_bound::<u128>(s, k)?;
                let upto = bound.min(u128::from(params.horizon));
                let first = (0..upto).find(|n| map_ext.sigma(n).ok() != map.sigma(n).ok());
                r.expect(
                    "convergence",
                    first.is_none(),
                    || format!("s = {}, k = {k}", fmt_seq(s)),
                    || format!("disagreement at {first:?} below bound {bound}"),
                );
            }
        }
    }
    let wseqs = positive_seqs(params.witness_entry, params.witness_len);
    let us = all_bit_words(params.max_u_len);
    for s in &wseqs {
        for t in &wseqs {
            if s == t {
                continue;
            }
            closed_form_check(&mut r, s, t)?;
            let map_s = IndexMapU128::new(s)?;
            let map_t = IndexMapU128::new(t)?;
            for u in &us {
                let ctx = || {
                    format!(
                        "s = {}, t = {}, u = {}",
                        fmt_seq(s),
                        fmt_seq(t),
                        bits_str(u)
                    )
                };
                match disagreement_witness::<u128>(s, t, u) {
                    Ok(w) => {
                        let extends = w.prefix.bits.starts_with(u);
                        let hs = h_eval(&map_s, &w.prefix, &w.k)?;
                        let ht = h_eval(&map_t, &w.prefix, &w.k)?;
                        let ok = extends && hs.is_yes() && ht.is_yes() && hs != ht;
                        r.expect("witness", ok, ctx, || {
                            format!("k = {}, h_s {hs:?}, h_t {ht:?}", w.k)
                        });
                    }
                    Err(err) => r.fail("witness", ctx(), err.to_string()),
                }
            }
        }
    }
    Ok(r.finish())
}

fn closed_form_check(r: &mut Report, s: &[u64], t: &[u64]) -> Result<()> {
    let w = disagreement_witness::<BigUint>(s, t, &[])?;
    let (lo, hi) = match w.case {
        WitnessCase::Divergence { m } if s[m] < t[m] => (s, t),
        WitnessCase::Prefix if s.len() < t.len() => (s, t),
        _ => (t, s),
    };
    let (src_lo, src_hi) = if lo == s {
        (&w.source_s, &w.source_t)
    } else {
        (&w.source_t, &w.source_s)
    };
    let qn = |p: usize| prime_pow::<BigUint>(p, u64::from(w.n));
    let q = |p: usize| BigUint::from(nth_prime(p));
    let (expect_lo, expect_hi) = match w.case {
        WitnessCase::Divergence { m } => {
            let jl: BigUint = code(&lo[..=m])?;
            let jh: BigUint = code(&hi[..=m])?;
            let gap = prime_pow::<BigUint>(m, hi[m] - lo[m])?;
            (
                &jl * gap * qn(m + 2)? - &jl / q(m) - 1u32,
                &jh * qn(m + 2)? - &jh / q(m) - 1u32,
            )
        }
        WitnessCase::Prefix => {
            let jh: BigUint = code(hi)?;
            let hi_src = &jh * qn(hi.len() + 1)? - &jh / q(hi.len() - 1) - 1u32;
            let lo_src = if lo.is_empty() {
                w.k.clone()
            } else {
                let jl: BigUint = code(lo)?;
                let mut f = &jl * q(lo.len() - 1);
                for (p, &v) in hi.iter().enumerate().take(hi.len() - 1).skip(lo.len()) {
                    f *= prime_pow::<BigUint>(p, v + 1)?;
                }
                f *= prime_pow::<BigUint>(hi.len() - 1, hi[hi.len() - 1])?;
                f * qn(hi.len() + 1)? - &jl / q(lo.len() - 1) - 1u32
            };
            (lo_src, hi_src)
        }
    };
    let ok = *src_lo == expect_lo && *src_hi == expect_hi;
    r.expect(
        "closed-form",
        ok,
        || format!("s = {}, t = {}, n = {}", fmt_seq(s), fmt_seq(t), w.n),
        || format!("sources ({src_lo}, {src_hi}), closed forms ({expect_lo}, {expect_hi})"),
    );
    Ok(())
}

fn all_bit_words(max_len: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        for bits in 0u32..(1u32 << len) {
            out.push((0..len).map(|i| bits >> i & 1 == 1).collect());
        }
    }
    out
}

fn bits_str(u: &[bool]) -> String {
    u.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_examples() {
        for k in 0..50u128 {
            assert_eq!(sigma::<u128>(&[], &k).unwrap(), k);
        }
        assert_eq!(sigma::<u128>(&[1], &3).unwrap(), 5);
        assert_eq!(sigma::<u128>(&[1], &2).unwrap(), 2);
        assert_eq!(sigma::<u128>(&[1], &1).unwrap(), 1);
        assert_eq!(sigma::<u128>(&[1], &5).unwrap(), 9);
        assert!(IndexMapU128::new(&[1, 0]).is_err());
    }

    #[test]
    fn h_eval_examples() {
        let x = BitPrefix::finite((0..20).map(|i| i % 3 == 0).collect());
        let id = IndexMapU128::new(&[]).unwrap();
        let one = IndexMapU128::new(&[1]).unwrap();
        for k in 0..20u128 {
            assert_eq!(h_eval(&id, &x, &k).unwrap(), Outcome::Yes(k % 3 == 0));
        }
        assert_eq!(h_eval(&one, &x, &1).unwrap(), Outcome::Yes(false));
        assert_eq!(h_eval(&one, &x, &5).unwrap(), Outcome::Yes(true));
        assert_eq!(h_eval(&one, &x, &11).unwrap(), Outcome::Unknown);
        let periodic = BitPrefix::periodic(vec![true], vec![false, true]);
        assert_eq!(h_eval(&one, &periodic, &11).unwrap(), Outcome::Yes(false));
        assert_eq!(h_eval(&one, &periodic, &2).unwrap(), Outcome::Yes(true));
    }

    #[test]
    fn bounds() {
        assert_eq!(convergence_bound::<u128>(&[1], 1).unwrap(), 11);
        assert_eq!(convergence_bound::<u128>(&[1], 2).unwrap(), 35);
        for k in 1..10 {
            assert!(
                convergence_bound::<u128>(&[2, 1], k + 1).unwrap()
                    > convergence_bound::<u128>(&[2, 1], k).unwrap()
            );
        }
    }

    #[test]
    fn witness_examples() {
        let w = disagreement_witness::<u128>(&[1], &[2], &[]).unwrap();
        assert_eq!(w.case, WitnessCase::Divergence { m: 0 });
        assert_eq!(w.k, 4 * 5u128.pow(w.n) - 1);
        assert_eq!(w.source_s, 8 * 5u128.pow(w.n) - 3);
        assert_eq!(w.source_t, 8 * 5u128.pow(w.n) - 5);
        let w2 = disagreement_witness::<u128>(&[1], &[1, 1], &[true, false, true]).unwrap();
        assert_eq!(w2.case, WitnessCase::Prefix);
        assert!(w2.prefix.bits.starts_with(&[true, false, true]));
        let hs = h_eval(&IndexMapU128::new(&[1]).unwrap(), &w2.prefix, &w2.k).unwrap();
        let ht = h_eval(&IndexMapU128::new(&[1, 1]).unwrap(), &w2.prefix, &w2.k).unwrap();
        assert_ne!(hs, ht);
    }

    #[test]
    fn small_suite_passes() {
        let params = GoodSuiteParams {
            max_entry: 2,
            max_s_len: 2,
            horizon: 2_000,
            witness_entry: 2,
            witness_len: 2,
            max_u_len: 4,
        };
        let r = verify_good_suite(params).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }

    proptest! {
        #[test]
        fn sigma_never_shrinks(s in proptest::collection::vec(1u64..5, 0..4), k in 0u64..1_000_000) {
            let v = sigma::<u128>(&s, &u128::from(k)).unwrap();
            prop_assert!(v >= u128::from(k));
            prop_assert_eq!(BigUint::from(v), sigma::<BigUint>(&s, &BigUint::from(k)).unwrap());
        }
    }
}
