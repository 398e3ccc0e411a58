//! Certified enclosures of very large positive reals.
//!
//! A [`Mag`] at level `k` states `lo <= log2^k(R) <= hi`, where `log2^0` is the
//! identity. Every operation rounds outward, so a strict separation of two
//! enclosures proves the order of the underlying reals.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

const LIFT_ABOVE: f64 = 1e150;
const REL: f64 = 4e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Mag {
    level: u32,
    lo: f64,
    hi: f64,
}

fn down(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        x
    } else {
        x - x.abs() * REL - 1e-300
    }
}

fn up(x: f64) -> f64 {
    if x == f64::INFINITY {
        x
    } else {
        x + x.abs() * REL + 1e-300
    }
}

fn log2_down(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        down(x.log2())
    }
}

fn log2_up(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        up(x.log2())
    }
}

impl Mag {
    pub(crate) fn exact(x: f64) -> Mag {
        Mag {
            level: 0,
            lo: down(x),
            hi: up(x),
        }
        .normalized()
    }

    pub(crate) fn interval(lo: f64, hi: f64) -> Mag {
        Mag {
            level: 0,
            lo: down(lo),
            hi: up(hi),
        }
        .normalized()
    }

    pub(crate) fn from_biguint(n: &BigUint) -> Mag {
        let bits = n.bits();
        if bits <= 1000 {
            let v = n.to_f64().unwrap_or(f64::INFINITY);
            return Mag::exact(v);
        }
        // n = m * 2^shift + r with m holding the top 64 bits.
        let shift = bits - 64;
        let m = (n >> shift).to_u64().expect("top 64 bits");
        let lo = (m as f64).log2() + shift as f64;
        let hi = ((m as f64) + 1.0).log2() + shift as f64;
        Mag {
            level: 1,
            lo: down(lo),
            hi: up(hi),
        }
        .normalized()
    }

    /// `R` given an enclosure of `log2(R)`.
    pub(crate) fn exp2_of(log: Mag) -> Mag {
        if log.level == 0 && log.hi < 1000.0 {
            return Mag::interval(log.lo.exp2(), log.hi.exp2());
        }
        Mag {
            level: log.level + 1,
            lo: log.lo,
            hi: log.hi,
        }
    }

    /// Enclosure of `log2(R)`; requires `R >= 1` to be meaningful.
    pub(crate) fn log2(self) -> Mag {
        if self.level >= 1 {
            Mag {
                level: self.level - 1,
                lo: self.lo,
                hi: self.hi,
            }
        } else {
            Mag {
                level: 0,
                lo: log2_down(self.lo).max(0.0),
                hi: log2_up(self.hi).max(0.0),
            }
        }
    }

    fn lifted(self) -> Mag {
        Mag {
            level: self.level + 1,
            lo: log2_down(self.lo),
            hi: log2_up(self.hi),
        }
    }

    fn at_level(self, level: u32) -> Mag {
        let mut m = self;
        while m.level < level {
            m = m.lifted();
        }
        m
    }

    fn normalized(self) -> Mag {
        let mut m = self;
        while m.hi > LIFT_ABOVE {
            m = m.lifted();
        }
        m
    }

    /// Multiplication by a constant `c >= 1` given as bounds on `log2(c)`.
    pub(crate) fn scale_log2(self, lc_lo: f64, lc_hi: f64) -> Mag {
        match self.level {
            0 => Mag {
                level: 0,
                lo: down(self.lo * lc_lo.exp2()),
                hi: up(self.hi * lc_hi.exp2()),
            }
            .normalized(),
            1 => Mag {
                level: 1,
                lo: down(self.lo + lc_lo),
                hi: up(self.hi + lc_hi),
            }
            .normalized(),
            _ => {
                // log2^k(R c) exceeds log2^k(R) by at most lc / (2^lo ln 2) once
                // the intermediate iterated logs are all at least 2^lo >= 2.
                let bump = if self.lo >= 1.0 {
                    lc_hi / (self.lo.exp2() * std::f64::consts::LN_2)
                } else {
                    f64::INFINITY
                };
                Mag {
                    level: self.level,
                    lo: self.lo,
                    hi: up(self.hi + bump),
                }
            }
        }
    }

    /// Division by 2, affecting only the lower bound.
    pub(crate) fn halve_lower(self) -> Mag {
        match self.level {
            0 => Mag {
                level: 0,
                lo: down(self.lo / 2.0),
                hi: self.hi,
            },
            1 => Mag {
                level: 1,
                lo: down(self.lo - 1.0),
                hi: self.hi,
            },
            _ => {
                // log2(log2 R - 1) >= log2 log2 R - 2 / (log2 R ln 2) for log2 R >= 2.
                let drop = if self.lo >= 1.0 {
                    2.0 / (self.lo.exp2() * std::f64::consts::LN_2)
                } else {
                    f64::INFINITY
                };
                Mag {
                    level: self.level,
                    lo: down(self.lo - drop),
                    hi: self.hi,
                }
            }
        }
    }

    /// Sum of two positive reals.
    pub(crate) fn add(self, other: Mag) -> Mag {
        let level = self.level.max(other.level);
        if level == 0 {
            return Mag {
                level: 0,
                lo: down(self.lo + other.lo),
                hi: up(self.hi + other.hi),
            }
            .normalized();
        }
        let a = self.at_level(level);
        let b = other.at_level(level);
        // max(A, B) <= A + B <= 2 max(A, B)
        let top = Mag {
            level,
            lo: a.lo.max(b.lo),
            hi: a.hi.max(b.hi),
        };
        top.scale_log2(1.0, 1.0).with_lo(top.lo)
    }

    fn with_lo(self, lo: f64) -> Mag {
        Mag { lo, ..self }
    }

    /// Certified order of the enclosed reals, or `None` when the enclosures overlap.
    pub(crate) fn compare(self, other: Mag) -> Option<Ordering> {
        let level = self.level.max(other.level);
        let a = self.at_level(level);
        let b = other.at_level(level);
        if a.hi < b.lo {
            Some(Ordering::Less)
        } else if b.hi < a.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Upper bound on `log2(R)` when it fits in an `f64`.
    pub(crate) fn log2_upper(self) -> f64 {
        match self.level {
            0 => log2_up(self.hi),
            1 => self.hi,
            _ => f64::INFINITY,
        }
    }

    /// True when `self` is certified to be at least twice `other`.
    pub(crate) fn at_least_double(self, other: Mag) -> bool {
        self.compare(other.scale_log2(1.0, 1.0)) == Some(Ordering::Greater)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values_compare() {
        assert_eq!(
            Mag::exact(3.0).compare(Mag::exact(4.0)),
            Some(Ordering::Less)
        );
        assert_eq!(Mag::exact(4.0).compare(Mag::exact(4.0)), None);
    }

    #[test]
    fn big_values_lift() {
        let n = BigUint::from(3u32).pow(5000);
        let m = Mag::from_biguint(&n);
        assert_eq!(m.level, 1);
        let expect = 5000.0 * 3f64.log2();
        assert!(m.lo <= expect && expect <= m.hi);
        let n2 = BigUint::from(3u32).pow(5001);
        assert_eq!(m.compare(Mag::from_biguint(&n2)), Some(Ordering::Less));
    }

    #[test]
    fn mixed_levels() {
        let small = Mag::exact(1e100);
        let huge = Mag::exp2_of(Mag::exact(1e200));
        assert_eq!(small.compare(huge), Some(Ordering::Less));
        assert_eq!(
            huge.add(small)
                .compare(small.scale_log2(1e10f64.log2() - 1e-9, 1e10f64.log2() + 1e-9)),
            Some(Ordering::Greater)
        );
    }

    #[test]
    fn sums_bracket() {
        let a = Mag::exact(5.0).add(Mag::exact(7.0));
        assert_eq!(a.compare(Mag::exact(11.9)), Some(Ordering::Greater));
        assert_eq!(a.compare(Mag::exact(12.1)), Some(Ordering::Less));
        let big = Mag::exp2_of(Mag::exact(5000.0));
        let s = big.add(big);
        assert_eq!(s.compare(Mag::exp2_of(Mag::exact(5000.5))), None);
        assert_eq!(
            s.compare(Mag::exp2_of(Mag::exact(5001.5))),
            Some(Ordering::Less)
        );
    }
}
