//! The prime-power code `J(s) = q_0^(s(0)+1) ... q_{n-1}^(s(n-1)+1)`, `J(()) = 0`.

use crate::nat::Nat;

/// A finite sequence of naturals.
pub type FiniteSeq = Vec<Nat>;

pub fn encode(s: &[Nat]) -> Nat {
    Nat::encode(s)
}

/// `J(s)` for a sequence of machine integers.
pub fn encode_u64(s: &[u64]) -> Nat {
    Nat::encode(&seq(s))
}

/// Inverse of [`encode`]; `None` for values that are not codes (including 1).
pub fn decode(c: &Nat) -> Option<FiniteSeq> {
    c.decode()
}

pub fn seq(s: &[u64]) -> FiniteSeq {
    s.iter().map(|&v| Nat::small(v)).collect()
}

/// `s` followed by `n`.
pub fn snoc(s: &[Nat], n: Nat) -> FiniteSeq {
    let mut out = Vec::with_capacity(s.len() + 1);
    out.extend_from_slice(s);
    out.push(n);
    out
}

/// `s` followed by `t`.
pub fn concat(s: &[Nat], t: &[Nat]) -> FiniteSeq {
    let mut out = Vec::with_capacity(s.len() + t.len());
    out.extend_from_slice(s);
    out.extend_from_slice(t);
    out
}

/// Angle-bracket rendering, `<1,4>`; the empty sequence prints as `<>`.
pub fn show_seq(s: &[Nat]) -> String {
    let inner: Vec<String> = s.iter().map(|e| e.to_string()).collect();
    format!("<{}>", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use std::collections::HashSet;

    use crate::primes::nth_prime;

    fn all_small_seqs() -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..4 {
            let mut next = Vec::new();
            for s in &frontier {
                for v in 0..8u64 {
                    let mut t: Vec<u64> = s.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    // Independent oracle: direct product with big integers.
    fn oracle(s: &[u64]) -> BigUint {
        if s.is_empty() {
            return BigUint::from(0u32);
        }
        s.iter()
            .enumerate()
            .fold(BigUint::from(1u32), |acc, (i, &v)| {
                acc * BigUint::from(nth_prime(i)).pow(v as u32 + 1)
            })
    }

    #[test]
    fn exhaustive_domain() {
        let all = all_small_seqs();
        assert_eq!(all.len(), 4681);
        let mut seen = HashSet::new();
        for s in &all {
            let c = encode_u64(s);
            assert_eq!(c.to_biguint().unwrap(), oracle(s));
            assert!(seen.insert(c.clone()));
            assert_eq!(decode(&c), Some(seq(s)));
            if !s.is_empty() && s.len() < 4 {
                for n in 0..8 {
                    let mut t = s.clone();
                    t.push(n);
                    assert!(encode_u64(&t) > c);
                }
            }
        }
    }

    #[test]
    fn order_matches_oracle() {
        let all = all_small_seqs();
        let sample: Vec<_> = all.iter().step_by(7).collect();
        for a in &sample {
            for b in sample.iter().step_by(13) {
                let got = crate::nat::cmp_code_seqs(&seq(a), &seq(b));
                assert_eq!(got, oracle(a).cmp(&oracle(b)), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn spec_examples() {
        assert_eq!(encode(&[]), Nat::ZERO);
        assert_eq!(encode_u64(&[1]), Nat::small(4));
        assert_eq!(encode_u64(&[4, 1]), Nat::small(288));
        assert_eq!(decode(&Nat::small(36)), Some(seq(&[1, 1])));
        assert_eq!(decode(&Nat::small(10)), None);
    }

    proptest! {
        #[test]
        fn round_trip(s in proptest::collection::vec(0u64..2000, 0..6)) {
            let c = encode_u64(&s);
            prop_assert_eq!(decode(&c), Some(seq(&s)));
        }

        #[test]
        fn order_agrees_with_exact_values(
            a in proptest::collection::vec(0u64..3000, 1..5),
            b in proptest::collection::vec(0u64..3000, 1..5),
        ) {
            prop_assert_eq!(crate::nat::cmp_code_seqs(&seq(&a), &seq(&b)), oracle(&a).cmp(&oracle(&b)));
            prop_assert_eq!(encode_u64(&a).cmp(&encode_u64(&b)), oracle(&a).cmp(&oracle(&b)));
        }
    }
}
