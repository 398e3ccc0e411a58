//! Arbitrary-size natural numbers with a symbolic form for huge prime-power codes.
//!
//! Members of the alphabets quickly outgrow any explicit representation: the
//! fourth alphabet already holds values such as `2^2 * 3^2 * 5^(c+1) * 7^2` with
//! `c` a 140-digit number. A [`Nat`] is therefore one of
//!
//! * an explicit integer of at most [`EXPLICIT_BITS`] bits, or
//! * the code `J(s)` of a sequence `s`, kept as `s` itself.
//!
//! The split is canonical (codes above the bit limit are always symbolic, every
//! other value is explicit), so structural equality is numeric equality. The
//! order is numeric too; it is decided from certified log-tower enclosures and
//! falls back on exact arithmetic when those overlap.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::magnitude::Mag;
use crate::primes::{log2_prime, nth_prime};

/// Values with more bits than this are only ever held symbolically.
pub const EXPLICIT_BITS: u64 = 8192;

/// Exact materialization is attempted below this many bits.
const MATERIALIZE_BITS: f64 = 1.6e7;

#[derive(Clone)]
pub struct Nat(Repr);

#[derive(Clone)]
enum Repr {
    Small(u64),
    Big(BigUint),
    Code(Arc<CodeData>),
}

struct CodeData {
    seq: Box<[Nat]>,
    hash: u64,
    mag: OnceLock<Mag>,
}

impl Nat {
    pub const ZERO: Nat = Nat(Repr::Small(0));
    pub const ONE: Nat = Nat(Repr::Small(1));

    pub fn small(v: u64) -> Nat {
        Nat(Repr::Small(v))
    }

    pub fn from_biguint(b: BigUint) -> Nat {
        if let Some(v) = b.to_u64() {
            return Nat(Repr::Small(v));
        }
        if b.bits() > EXPLICIT_BITS {
            if let Some(seq) = factor_code(&b) {
                return Nat::symbolic(seq);
            }
        }
        Nat(Repr::Big(b))
    }

    /// The prime-power code `J(seq)`: 0 for the empty sequence, otherwise
    /// `q_0^(seq[0]+1) * ... * q_{n-1}^(seq[n-1]+1)`.
    pub fn encode(seq: &[Nat]) -> Nat {
        if seq.is_empty() {
            return Nat::ZERO;
        }
        let mut estimate = 0.0f64;
        let mut huge = false;
        for (p, e) in seq.iter().enumerate() {
            match &e.0 {
                Repr::Small(v) => estimate += (*v as f64 + 1.0) * log2_prime(p).1,
                _ => {
                    huge = true;
                    break;
                }
            }
            if estimate > EXPLICIT_BITS as f64 + 8.0 {
                huge = true;
                break;
            }
        }
        if !huge {
            let value = materialize(
                seq.iter()
                    .enumerate()
                    .map(|(p, e)| (p, e.as_u64().unwrap() + 1)),
            );
            if value.bits() <= EXPLICIT_BITS {
                return Nat::from_biguint(value);
            }
        }
        Nat::symbolic(seq.to_vec())
    }

    fn symbolic(seq: Vec<Nat>) -> Nat {
        let mut h = DefaultHasher::new();
        seq.len().hash(&mut h);
        for e in &seq {
            e.hash(&mut h);
        }
        Nat(Repr::Code(Arc::new(CodeData {
            seq: seq.into_boxed_slice(),
            hash: h.finish(),
            mag: OnceLock::new(),
        })))
    }

    /// Inverse of [`Nat::encode`]; `None` when `self` is not a code.
    pub fn decode(&self) -> Option<Vec<Nat>> {
        match &self.0 {
            Repr::Small(0) => Some(Vec::new()),
            Repr::Small(v) => factor_code_u64(*v),
            Repr::Big(b) => factor_code(b),
            Repr::Code(c) => Some(c.seq.to_vec()),
        }
    }

    /// The sequence behind a symbolic code, without copying.
    pub fn code_seq(&self) -> Option<&[Nat]> {
        match &self.0 {
            Repr::Code(c) => Some(&c.seq),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Small(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        self.as_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn to_biguint(&self) -> Option<BigUint> {
        match &self.0 {
            Repr::Small(v) => Some(BigUint::from(*v)),
            Repr::Big(b) => Some(b.clone()),
            Repr::Code(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1))
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.0, Repr::Code(_))
    }

    /// `self + 1` for explicit values; symbolic codes have no explicit successor.
    pub fn checked_succ(&self) -> Option<Nat> {
        self.to_biguint().map(|b| Nat::from_biguint(b + 1u32))
    }

    /// Prime-power factorization `q_0^a·q_1^b·...` when `self` is a nonzero code,
    /// otherwise the decimal form. Symbolic exponents print as `(e+1)`; output
    /// past a few thousand characters is elided.
    pub fn factored(&self) -> String {
        let mut out = String::new();
        match self.decode() {
            Some(seq) if !seq.is_empty() => render_factors(&seq, &mut out, FACTORED_BUDGET),
            _ => self.render(&mut out, FACTORED_BUDGET),
        }
        out
    }

    fn render(&self, out: &mut String, limit: usize) {
        match &self.0 {
            Repr::Small(v) => out.push_str(&v.to_string()),
            Repr::Big(b) => out.push_str(&b.to_string()),
            Repr::Code(c) => {
                out.push('[');
                render_factors(&c.seq, out, limit);
                out.push(']');
            }
        }
    }

    pub(crate) fn mag(&self) -> Mag {
        match &self.0 {
            Repr::Small(v) => Mag::exact(*v as f64),
            Repr::Big(b) => Mag::from_biguint(b),
            Repr::Code(c) => *c.mag.get_or_init(|| Mag::exp2_of(log2_of_code(&c.seq))),
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Nat {
        Nat::small(v)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Nat {
        Nat::from_biguint(b)
    }
}

impl FromStr for Nat {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Nat, Self::Err> {
        s.trim().parse::<BigUint>().map(Nat::from_biguint)
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Nat) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            (Repr::Code(a), Repr::Code(b)) => {
                Arc::ptr_eq(a, b) || (a.hash == b.hash && a.seq == b.seq)
            }
            _ => false,
        }
    }
}

impl Eq for Nat {}

impl Hash for Nat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
            Repr::Code(c) => {
                2u8.hash(state);
                c.hash.hash(state);
            }
        }
    }
}

impl Ord for Nat {
    /// Numeric order. Panics only if neither the enclosures nor exact arithmetic
    /// (up to ~16 million bits) can separate two distinct values.
    fn cmp(&self, other: &Nat) -> Ordering {
        cmp_nat(self, other)
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Nat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
            Repr::Code(_) => {
                let mut out = String::new();
                self.render(&mut out, DISPLAY_BUDGET);
                f.write_str(&out)
            }
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

const DISPLAY_BUDGET: usize = 240;
const FACTORED_BUDGET: usize = 4096;

// Shared subterms make full expansion exponential, hence the budget.
fn render_factors(seq: &[Nat], out: &mut String, limit: usize) {
    for (p, e) in seq.iter().enumerate() {
        if out.len() > limit {
            out.push_str("·…");
            return;
        }
        if p > 0 {
            out.push('·');
        }
        out.push_str(&format!("{}^", nth_prime(p)));
        match e.checked_succ() {
            Some(x) if !x.is_symbolic() => out.push_str(&x.to_string()),
            _ => {
                out.push('(');
                e.render(out, limit);
                out.push_str("+1)");
            }
        }
    }
}

fn materialize(exps: impl Iterator<Item = (usize, u64)>) -> BigUint {
    let mut acc = BigUint::one();
    for (p, e) in exps {
        if e > 0 {
            acc *= BigUint::from(nth_prime(p)).pow(e as u32);
        }
    }
    acc
}

fn factor_code_u64(mut n: u64) -> Option<Vec<Nat>> {
    let mut out = Vec::new();
    for i in 0.. {
        let q = nth_prime(i);
        let mut e = 0u64;
        while n.is_multiple_of(q) {
            n /= q;
            e += 1;
        }
        if e == 0 {
            return None;
        }
        out.push(Nat::small(e - 1));
        if n == 1 {
            return Some(out);
        }
    }
    unreachable!()
}

fn factor_code(n: &BigUint) -> Option<Vec<Nat>> {
    if n.is_zero() {
        return Some(Vec::new());
    }
    if let Some(v) = n.to_u64() {
        return factor_code_u64(v);
    }
    let mut rem = n.clone();
    let mut out = Vec::new();
    for i in 0.. {
        let q = BigUint::from(nth_prime(i));
        let mut e = 0u64;
        loop {
            let (d, r) = rem.div_rem(&q);
            if !r.is_zero() {
                break;
            }
            rem = d;
            e += 1;
        }
        if e == 0 {
            return None;
        }
        out.push(Nat::small(e - 1));
        if rem.is_one() {
            return Some(out);
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Ordering

fn c_scale(m: Mag, p: usize) -> Mag {
    let (lo, hi) = log2_prime(p);
    m.scale_log2(
        lo.log2() * (1.0 - 1e-15),
        hi.log2() * (1.0 + 1e-15) + 1e-300,
    )
}

/// Enclosure of `e + 1` for a sequence entry `e`.
fn mag_succ(e: &Nat) -> Mag {
    match e.0 {
        Repr::Small(v) => Mag::exact(v as f64 + 1.0),
        // e >= 2^64, so the +1 vanishes inside the outward rounding.
        _ => e.mag(),
    }
}

fn log2_of_code(seq: &[Nat]) -> Mag {
    seq.iter()
        .enumerate()
        .map(|(p, e)| c_scale(mag_succ(e), p))
        .reduce(Mag::add)
        .expect("codes are nonempty")
}

fn cmp_nat(a: &Nat, b: &Nat) -> Ordering {
    match (&a.0, &b.0) {
        (Repr::Small(x), Repr::Small(y)) => return x.cmp(y),
        (Repr::Small(_), Repr::Big(_)) => return Ordering::Less,
        (Repr::Big(_), Repr::Small(_)) => return Ordering::Greater,
        (Repr::Big(x), Repr::Big(y)) => return x.cmp(y),
        _ => {}
    }
    if a == b {
        return Ordering::Equal;
    }
    if let Some(o) = a.mag().compare(b.mag()) {
        return o;
    }
    match (a.decode(), b.decode()) {
        (Some(sa), Some(sb)) => cmp_code_seqs(&sa, &sb),
        _ => {
            let ea = exact_value(a);
            let eb = exact_value(b);
            match (ea, eb) {
                (Some(x), Some(y)) => x.cmp(&y),
                _ => panic!("cannot order {a} and {b}"),
            }
        }
    }
}

fn exact_value(n: &Nat) -> Option<BigUint> {
    match &n.0 {
        Repr::Code(c) => {
            if n.mag().log2_upper() > MATERIALIZE_BITS {
                return None;
            }
            let exps: Option<Vec<(usize, u64)>> = c
                .seq
                .iter()
                .enumerate()
                .map(|(p, e)| e.as_u64().map(|v| (p, v + 1)))
                .collect();
            exps.map(|e| materialize(e.into_iter()))
        }
        _ => n.to_biguint(),
    }
}

/// Exponent of `q_p` in `J(seq)`: absent positions contribute 0.
#[derive(Clone, Copy)]
enum Exp<'a> {
    Absent,
    Entry(&'a Nat),
}

fn exp_at(seq: &[Nat], p: usize) -> Exp<'_> {
    seq.get(p).map_or(Exp::Absent, Exp::Entry)
}

fn exp_eq(a: Exp, b: Exp) -> bool {
    match (a, b) {
        (Exp::Absent, Exp::Absent) => true,
        (Exp::Entry(x), Exp::Entry(y)) => x == y,
        _ => false,
    }
}

fn cmp_exp(a: Exp, b: Exp) -> Ordering {
    match (a, b) {
        (Exp::Absent, Exp::Absent) => Ordering::Equal,
        (Exp::Absent, Exp::Entry(_)) => Ordering::Less,
        (Exp::Entry(_), Exp::Absent) => Ordering::Greater,
        (Exp::Entry(x), Exp::Entry(y)) => cmp_nat(x, y),
    }
}

/// `|a - b|` as an exact integer when both exponents are explicit.
fn exact_exp_diff(a: Exp, b: Exp) -> Option<u64> {
    let v = |e: Exp| match e {
        Exp::Absent => Some(0u64),
        Exp::Entry(x) => x.as_u64().and_then(|v| v.checked_add(1)),
    };
    Some(v(a)?.abs_diff(v(b)?))
}

/// Enclosure of `|a - b|` for distinct exponents.
fn diff_mag(a: Exp, b: Exp) -> Mag {
    if let Some(d) = exact_exp_diff(a, b) {
        return Mag::exact(d as f64);
    }
    match (a, b) {
        (Exp::Absent, Exp::Entry(x)) | (Exp::Entry(x), Exp::Absent) => mag_succ(x),
        (Exp::Entry(x), Exp::Entry(y)) => diff_mag_nat(x, y),
        (Exp::Absent, Exp::Absent) => unreachable!("equal exponents"),
    }
}

fn diff_mag_nat(x: &Nat, y: &Nat) -> Mag {
    if let (Some(bx), Some(by)) = (x.to_biguint(), y.to_biguint()) {
        let d = if bx > by { bx - by } else { by - bx };
        return Mag::from_biguint(&d);
    }
    let (big, small) = if cmp_nat(x, y) == Ordering::Greater {
        (x, y)
    } else {
        (y, x)
    };
    let (mb, ms) = (big.mag(), small.mag());
    if mb.at_least_double(ms) {
        return mb.halve_lower();
    }
    if let (Some(sb), Some(ss)) = (big.code_seq(), small.code_seq()) {
        return code_diff_mag(sb, ss);
    }
    match (exact_value(big), exact_value(small)) {
        (Some(vb), Some(vs)) => Mag::from_biguint(&(vb - vs)),
        _ => panic!("cannot bound {big} - {small}"),
    }
}

/// Enclosure of `|J(a) - J(b)|` for distinct sequences, via the common factor
/// `G` and the coprime cofactors `A'`, `B'` with `J(a) = G A'`, `J(b) = G B'`.
fn code_diff_mag(a: &[Nat], b: &[Nat]) -> Mag {
    let len = a.len().max(b.len());
    let mut log_g: Option<Mag> = None;
    let mut log_a: Option<Mag> = None;
    let mut log_b: Option<Mag> = None;
    let mut exact = true;
    let mut exps_a = Vec::new();
    let mut exps_b = Vec::new();
    for p in 0..len {
        let (ea, eb) = (exp_at(a, p), exp_at(b, p));
        let (lesser, ord) = match cmp_exp(ea, eb) {
            Ordering::Less => (ea, Ordering::Less),
            Ordering::Greater => (eb, Ordering::Greater),
            Ordering::Equal => (ea, Ordering::Equal),
        };
        if let Exp::Entry(m) = lesser {
            let term = c_scale(mag_succ(m), p);
            log_g = Some(log_g.map_or(term, |g| g.add(term)));
        }
        if ord == Ordering::Equal {
            continue;
        }
        let term = c_scale(diff_mag(ea, eb), p);
        match exact_exp_diff(ea, eb) {
            Some(d) if ord == Ordering::Greater => exps_a.push((p, d)),
            Some(d) => exps_b.push((p, d)),
            None => exact = false,
        }
        let side = if ord == Ordering::Greater {
            &mut log_a
        } else {
            &mut log_b
        };
        *side = Some(side.map_or(term, |s| s.add(term)));
    }
    let zero = Mag::exact(0.0);
    let (la, lb) = (log_a.unwrap_or(zero), log_b.unwrap_or(zero));
    let (va, vb) = (Mag::exp2_of(la), Mag::exp2_of(lb));
    let log_diff = if va.at_least_double(vb) {
        va.halve_lower().log2()
    } else if vb.at_least_double(va) {
        vb.halve_lower().log2()
    } else if exact && la.add(lb).log2_upper() < MATERIALIZE_BITS.log2() {
        let xa = materialize(exps_a.into_iter());
        let xb = materialize(exps_b.into_iter());
        let d = if xa > xb { xa - xb } else { xb - xa };
        Mag::from_biguint(&d).log2()
    } else {
        panic!("cannot bound a difference of codes");
    };
    Mag::exp2_of(match log_g {
        Some(g) => g.add(log_diff),
        None => log_diff,
    })
}

/// Order of `J(a)` and `J(b)`: the sign of `sum_p (ea_p - eb_p) log q_p`.
pub(crate) fn cmp_code_seqs(a: &[Nat], b: &[Nat]) -> Ordering {
    let len = a.len().max(b.len());
    let mut pos: Option<Mag> = None;
    let mut neg: Option<Mag> = None;
    let mut exact = true;
    let mut exps_pos = Vec::new();
    let mut exps_neg = Vec::new();
    for p in 0..len {
        let (ea, eb) = (exp_at(a, p), exp_at(b, p));
        if exp_eq(ea, eb) {
            continue;
        }
        let ord = cmp_exp(ea, eb);
        let term = c_scale(diff_mag(ea, eb), p);
        match exact_exp_diff(ea, eb) {
            Some(d) if ord == Ordering::Greater => exps_pos.push((p, d)),
            Some(d) => exps_neg.push((p, d)),
            None => exact = false,
        }
        let side = if ord == Ordering::Greater {
            &mut pos
        } else {
            &mut neg
        };
        *side = Some(side.map_or(term, |s| s.add(term)));
    }
    let (p, n) = match (pos, neg) {
        (None, None) => return Ordering::Equal,
        (Some(_), None) => return Ordering::Greater,
        (None, Some(_)) => return Ordering::Less,
        (Some(p), Some(n)) => (p, n),
    };
    if let Some(o) = p.compare(n) {
        return o;
    }
    if exact && p.add(n).log2_upper() < MATERIALIZE_BITS.log2() {
        return materialize(exps_pos.into_iter()).cmp(&materialize(exps_neg.into_iter()));
    }
    panic!("cannot order two codes");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> Vec<Nat> {
        v.iter().map(|&x| Nat::small(x)).collect()
    }

    #[test]
    fn encode_small_examples() {
        assert_eq!(Nat::encode(&[]), Nat::ZERO);
        assert_eq!(Nat::encode(&seq(&[1])), Nat::small(4));
        assert_eq!(Nat::encode(&seq(&[4, 1])), Nat::small(288));
        assert_eq!(Nat::encode(&seq(&[1, 1, 1])), Nat::small(900));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(Nat::small(0).decode(), Some(vec![]));
        assert_eq!(Nat::small(36).decode(), Some(seq(&[1, 1])));
        assert_eq!(Nat::small(10).decode(), None);
        assert_eq!(Nat::small(1).decode(), None);
        assert_eq!(Nat::small(3).decode(), None);
    }

    #[test]
    fn huge_codes_are_symbolic_and_round_trip() {
        let c = Nat::encode(&seq(&[1, 1, 7200, 1]));
        assert!(c.is_symbolic());
        assert_eq!(c.decode(), Some(seq(&[1, 1, 7200, 1])));
        let mid = Nat::encode(&seq(&[1, 1, 900, 1]));
        assert!(!mid.is_symbolic());
        assert_eq!(mid.decode(), Some(seq(&[1, 1, 900, 1])));
    }

    #[test]
    fn canonical_boundary() {
        // 2^8191 has 8192 bits and stays explicit; 2^8192 does not.
        let at = Nat::encode(&seq(&[8190]));
        assert!(!at.is_symbolic());
        let over = Nat::encode(&seq(&[8191]));
        assert!(over.is_symbolic());
        let from_int = Nat::from_biguint(BigUint::one() << 8192usize);
        assert_eq!(from_int, over);
    }

    #[test]
    fn tower_comparisons() {
        let big_c = Nat::encode(&seq(&[4, 288, 1]));
        let u = Nat::encode(&[Nat::ONE, Nat::ONE, big_c.clone(), Nat::ONE, Nat::ONE]);
        let v = Nat::encode(&seq(&[1, 1, 1, 44100, 1]));
        assert!(u > v);
        let w = Nat::encode(&[Nat::small(4), Nat::ONE, big_c, Nat::ONE, Nat::ONE]);
        assert!(w > u);
        assert!(Nat::ONE < v);
    }

    #[test]
    fn nested_close_codes() {
        // Differ only in the low-order exponents of a shared tower entry.
        let c = Nat::encode(&seq(&[1, 36, 1]));
        let d1 = Nat::encode(&[Nat::ONE, Nat::ONE, c.clone(), Nat::ONE]);
        let d2 = Nat::encode(&[Nat::small(4), Nat::ONE, c.clone(), Nat::ONE]);
        assert!(d1 < d2);
        let x = Nat::encode(&[Nat::small(4), Nat::ONE, Nat::ONE, d1.clone(), Nat::ONE]);
        let y = Nat::encode(&[Nat::ONE, Nat::ONE, Nat::ONE, d2.clone(), Nat::ONE]);
        assert!(x < y);
        let z = Nat::encode(&[Nat::ONE, Nat::small(36), Nat::ONE, d1.clone(), Nat::ONE]);
        assert!(z > x);
    }
}
