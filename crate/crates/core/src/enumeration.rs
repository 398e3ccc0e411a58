//! Enumerations of finite sequences by increasing code.
//!
//! `e(n)` is the `n`-th sequence in order of `J`; since `J(s⌢n) > J(s)` this
//! satisfies `e⁻¹(s) < e⁻¹(s⌢n)`, and `J(∅) = 0` gives `e(0) = ∅`. `Ψ(n, p)` pairs
//! `e(n)` with the `p`-th sequence of length `|e(n)| + 1`, again by `J`.

use crate::coding::seq;
use crate::error::{Error, Result};
use crate::nat::Nat;
use crate::primes::nth_prime;

fn code_u64(s: &[Nat]) -> Result<u64> {
    Nat::encode(s).as_u64().ok_or(Error::Capacity {
        what: "code of enumerated sequence",
        requested: u64::MAX,
        limit: u64::MAX,
    })
}

/// Visits every nonempty sequence of length `<= max_len` (or exactly `len`)
/// with code below `bound`, as `(code, seq)`.
fn walk(bound: u64, exact_len: Option<usize>, visit: &mut dyn FnMut(u64, &[u64])) {
    fn rec(
        p: usize,
        prod: u64,
        bound: u64,
        exact_len: Option<usize>,
        cur: &mut Vec<u64>,
        visit: &mut dyn FnMut(u64, &[u64]),
    ) {
        let q = nth_prime(p);
        let mut v = prod;
        let mut e = 0u64;
        loop {
            v = match v.checked_mul(q) {
                Some(v) if v < bound => v,
                _ => return,
            };
            cur.push(e);
            if exact_len.is_none_or(|l| l == cur.len()) {
                visit(v, cur);
            }
            if exact_len.is_none_or(|l| cur.len() < l) {
                rec(p + 1, v, bound, exact_len, cur, visit);
            }
            cur.pop();
            e += 1;
        }
    }
    rec(0, 1, bound, exact_len, &mut Vec::new(), visit);
}

/// Sequences (of length `len`, if given) with code below `bound`, sorted by code.
pub fn sorted_below(bound: u64, len: Option<usize>) -> Vec<(u64, Vec<u64>)> {
    let mut out = Vec::new();
    if len.is_none_or(|l| l == 0) && bound > 0 {
        out.push((0, Vec::new()));
    }
    if len != Some(0) {
        walk(bound, len, &mut |c, s| out.push((c, s.to_vec())));
    }
    out.sort_unstable();
    out
}

fn nth_by_code(n: u64, len: Option<usize>) -> Result<Vec<Nat>> {
    if len == Some(0) {
        return if n == 0 {
            Ok(Vec::new())
        } else {
            Err(Error::Invalid("only one sequence has length 0".into()))
        };
    }
    let mut bound = 64u64;
    loop {
        let all = sorted_below(bound, len);
        if let Some((_, s)) = all.get(n as usize) {
            return Ok(seq(s));
        }
        bound = bound.checked_mul(4).ok_or(Error::Capacity {
            what: "enumeration rank",
            requested: n,
            limit: all.len() as u64,
        })?;
    }
}

fn rank_by_code(s: &[Nat], len: Option<usize>) -> Result<u64> {
    if s.is_empty() {
        return Ok(0);
    }
    let c = code_u64(s)?;
    let mut count = u64::from(len.is_none());
    walk(c, len, &mut |_, _| count += 1);
    Ok(count)
}

/// The `n`-th finite sequence by increasing code.
pub fn e(n: u64) -> Result<Vec<Nat>> {
    nth_by_code(n, None)
}

/// Position of `s` in the enumeration [`e`].
pub fn e_inv(s: &[Nat]) -> Result<u64> {
    rank_by_code(s, None)
}

/// The `p`-th sequence of length `len` by increasing code.
pub fn nth_of_length(len: usize, p: u64) -> Result<Vec<Nat>> {
    nth_by_code(p, Some(len))
}

pub fn rank_of_length(t: &[Nat]) -> Result<u64> {
    rank_by_code(t, Some(t.len()))
}

/// `Ψ(n, p) = (e(n), p-th sequence of length |e(n)| + 1)`.
pub fn psi_pair(n: u64, p: u64) -> Result<(Vec<Nat>, Vec<Nat>)> {
    let s = e(n)?;
    let t = nth_of_length(s.len() + 1, p)?;
    Ok((s, t))
}

/// `θ = Ψ⁻¹`.
pub fn theta(s: &[Nat], t: &[Nat]) -> Result<(u64, u64)> {
    if t.len() != s.len() + 1 {
        return Err(Error::LengthMismatch {
            left: s.len() + 1,
            right: t.len(),
        });
    }
    Ok((e_inv(s)?, rank_of_length(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::encode;
    use proptest::prelude::*;

    // Oracle: scan integers and keep those that decode.
    fn codes_by_scan(limit: u64) -> Vec<Vec<Nat>> {
        (0..limit).filter_map(|c| Nat::small(c).decode()).collect()
    }

    #[test]
    fn first_terms() {
        assert_eq!(e(0).unwrap(), seq(&[]));
        assert_eq!(e(1).unwrap(), seq(&[0]));
        assert_eq!(e(2).unwrap(), seq(&[1]));
        assert_eq!(e(3).unwrap(), seq(&[0, 0]));
        assert_eq!(e(4).unwrap(), seq(&[2]));
    }

    #[test]
    fn matches_scan() {
        let scanned = codes_by_scan(20_000);
        for (n, s) in scanned.iter().enumerate() {
            assert_eq!(&e(n as u64).unwrap(), s);
            assert_eq!(e_inv(s).unwrap(), n as u64);
        }
    }

    #[test]
    fn prefix_monotone() {
        for n in 0..300 {
            let s = e(n).unwrap();
            for k in 0..4 {
                let mut ext = s.clone();
                ext.push(Nat::small(k));
                assert!(e_inv(&ext).unwrap() > n);
            }
        }
    }

    #[test]
    fn psi_theta_inverse() {
        for n in 0..20 {
            for p in 0..20 {
                let (s, t) = psi_pair(n, p).unwrap();
                assert_eq!(theta(&s, &t).unwrap(), (n, p));
            }
        }
        let (s, t) = psi_pair(0, 0).unwrap();
        assert!(s.is_empty());
        assert_eq!(t, seq(&[0]));
        let (_, t) = psi_pair(1, 1).unwrap();
        assert_eq!(encode(&t), Nat::small(12));
    }

    proptest! {
        #[test]
        fn rank_round_trip(v in proptest::collection::vec(0u64..6, 1..4)) {
            let s = seq(&v);
            let n = e_inv(&s).unwrap();
            prop_assert_eq!(e(n).unwrap(), s.clone());
            let r = rank_of_length(&s).unwrap();
            prop_assert_eq!(nth_of_length(s.len(), r).unwrap(), s);
        }
    }
}
