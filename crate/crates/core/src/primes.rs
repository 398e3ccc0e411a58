//! Memoized incremental sieve for the prime sequence q_0 = 2, q_1 = 3, ...

use std::sync::{OnceLock, RwLock};

static TABLE: OnceLock<RwLock<Vec<u64>>> = OnceLock::new();

fn table() -> &'static RwLock<Vec<u64>> {
    TABLE.get_or_init(|| RwLock::new(vec![2, 3, 5, 7, 11, 13]))
}

/// The `(n+1)`-th prime, so `nth_prime(0) == 2`.
pub fn nth_prime(n: usize) -> u64 {
    if let Some(&p) = table().read().expect("prime table poisoned").get(n) {
        return p;
    }
    let mut guard = table().write().expect("prime table poisoned");
    while guard.len() <= n {
        let target = (guard.len() * 2).max(n + 1);
        extend_to_count(&mut guard, target);
    }
    guard[n]
}

/// Primes `q_0..q_{count-1}` as a fresh vector.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count > 0 {
        nth_prime(count - 1);
    }
    table().read().expect("prime table poisoned")[..count].to_vec()
}

/// Outward-rounded bounds on `log2(q_n)`.
pub(crate) fn log2_prime(n: usize) -> (f64, f64) {
    let l = (nth_prime(n) as f64).log2();
    (l * (1.0 - 1e-15), l * (1.0 + 1e-15))
}

// Segmented extension: sieve the window above the current largest prime until
// `primes` holds at least `count` entries.
fn extend_to_count(primes: &mut Vec<u64>, count: usize) {
    while primes.len() < count {
        let lo = primes.last().copied().unwrap_or(1) + 1;
        let span = lo as usize;
        let hi = lo + span as u64;
        let mut composite = vec![false; span];
        for &p in primes.iter() {
            if p * p >= hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        // Primes below sqrt(hi) are all known because lo - 1 >= last prime and
        // hi <= 2 * lo, so sqrt(hi) < lo whenever lo >= 4.
        for (i, &c) in composite.iter().enumerate() {
            if !c {
                primes.push(lo + i as u64);
            }
        }
    }
}
