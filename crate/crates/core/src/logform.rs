//! Exact arithmetic on sums of weighted logarithms.
//!
//! An entropy of a rational pmf is `Σ w_n log2(n)` for finitely many integers
//! `n` with rational weights. Whether two such sums are equal as real numbers
//! is decidable: factor every integer over a set of pairwise coprime bases
//! and compare the collected weights, since the logarithms of pairwise
//! coprime integers greater than one are linearly independent over the
//! rationals.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::rat_to_f64;

const SMALL_PRIME_LIMIT: u32 = 1000;

fn small_primes() -> &'static [u32] {
    static PRIMES: std::sync::OnceLock<Vec<u32>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; SMALL_PRIME_LIMIT as usize + 1];
        let mut out = Vec::new();
        for p in 2..=SMALL_PRIME_LIMIT as usize {
            if sieve[p] {
                out.push(p as u32);
                for m in (p * p..=SMALL_PRIME_LIMIT as usize).step_by(p) {
                    sieve[m] = false;
                }
            }
        }
        out
    })
}

/// `Σ w · log2(base)`, split into small-prime bases and larger cofactors
/// that have no prime factor below 1000.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogForm {
    primes: BTreeMap<u32, BigRational>,
    cofactors: BTreeMap<BigUint, BigRational>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, BigRational>, key: K, w: BigRational) {
    if w.is_zero() {
        return;
    }
    let entry = map.entry(key).or_insert_with(BigRational::zero);
    *entry += w;
}

fn log2_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap().log2()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

impl LogForm {
    pub fn zero() -> Self {
        LogForm::default()
    }

    /// Adds `w · log2(n)` for a positive integer `n`.
    pub fn add_log(&mut self, n: &BigUint, w: &BigRational) {
        if w.is_zero() || n.is_one() {
            return;
        }
        assert!(!n.is_zero(), "log of zero");
        if let Some(mut v) = n.to_u64() {
            for &p in small_primes() {
                let p64 = u64::from(p);
                if p64 * p64 > v {
                    break;
                }
                let mut e = 0i64;
                while v % p64 == 0 {
                    v /= p64;
                    e += 1;
                }
                if e > 0 {
                    bump(&mut self.primes, p, w * BigRational::from_integer(e.into()));
                }
            }
            if v > 1 {
                if v <= u64::from(SMALL_PRIME_LIMIT) {
                    bump(&mut self.primes, v as u32, w.clone());
                } else {
                    bump(&mut self.cofactors, BigUint::from(v), w.clone());
                }
            }
            return;
        }
        let mut rest = n.clone();
        for &p in small_primes() {
            let bp = BigUint::from(p);
            let mut e = 0i64;
            loop {
                let (q, r) = rest.div_rem(&bp);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                bump(&mut self.primes, p, w * BigRational::from_integer(e.into()));
            }
        }
        if !rest.is_one() {
            bump(&mut self.cofactors, rest, w.clone());
        }
    }

    /// Adds `w · log2(r)` for a positive rational `r`.
    pub fn add_log_rational(&mut self, r: &BigRational, w: &BigRational) {
        assert!(r.is_positive(), "log of a non-positive value");
        let n = r.numer().magnitude();
        let d = r.denom().magnitude();
        self.add_log(n, w);
        self.add_log(d, &-w);
    }

    /// Adds `-p log2 p` (zero for `p = 0`).
    pub fn add_neg_plogp(&mut self, p: &BigRational) {
        if p.is_zero() {
            return;
        }
        self.add_log_rational(p, &-p);
    }

    /// Entropy in bits of an exact pmf given by its nonzero masses.
    pub fn entropy<'a>(masses: impl IntoIterator<Item = &'a BigRational>) -> Self {
        let mut out = LogForm::zero();
        for p in masses {
            out.add_neg_plogp(p);
        }
        out
    }

    /// `self += scale · other`
    pub fn add_scaled(&mut self, other: &LogForm, scale: i64) {
        let s = BigRational::from_integer(scale.into());
        for (p, w) in &other.primes {
            bump(&mut self.primes, *p, w * &s);
        }
        for (n, w) in &other.cofactors {
            bump(&mut self.cofactors, n.clone(), w * &s);
        }
    }

    /// Linear combination `Σ c_i · f_i`.
    pub fn combine<'a>(terms: impl IntoIterator<Item = (i64, &'a LogForm)>) -> Self {
        let mut out = LogForm::zero();
        for (c, f) in terms {
            out.add_scaled(f, c);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        let a: f64 = self.primes.iter().map(|(p, w)| rat_to_f64(w) * f64::from(*p).log2()).sum();
        let b: f64 = self.cofactors.iter().map(|(n, w)| rat_to_f64(w) * log2_biguint(n)).sum();
        a + b
    }

    /// Weights over a pairwise coprime basis; empty exactly when the form is
    /// the real number zero.
    pub fn canonical(&self) -> BTreeMap<BigUint, BigRational> {
        let mut out: BTreeMap<BigUint, BigRational> = BTreeMap::new();
        for (p, w) in &self.primes {
            bump(&mut out, BigUint::from(*p), w.clone());
        }
        let live: Vec<(&BigUint, &BigRational)> = self.cofactors.iter().filter(|(_, w)| !w.is_zero()).collect();
        let base = coprime_base(live.iter().map(|(n, _)| (*n).clone()));
        for (n, w) in live {
            let mut rest = n.clone();
            for b in &base {
                let mut e = 0i64;
                loop {
                    let (q, r) = rest.div_rem(b);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    bump(&mut out, b.clone(), w * BigRational::from_integer(e.into()));
                }
            }
            debug_assert!(rest.is_one(), "coprime base does not cover {n}");
        }
        out.retain(|_, w| !w.is_zero());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.primes.values().all(Zero::is_zero) && self.canonical().is_empty()
    }

    pub fn exactly_equals(&self, other: &LogForm) -> bool {
        LogForm::combine([(1, self), (-1, other)]).is_zero()
    }
}

/// Refines `nums` into pairwise coprime integers greater than one such that
/// every input is a product of powers of them.
pub fn coprime_base(nums: impl IntoIterator<Item = BigUint>) -> Vec<BigUint> {
    let mut base: Vec<BigUint> = Vec::new();
    for n in nums {
        let mut pending = vec![n];
        while let Some(x) = pending.pop() {
            if x.is_one() || x.is_zero() {
                continue;
            }
            match base.iter().position(|b| !b.gcd(&x).is_one()) {
                None => base.push(x),
                Some(i) => {
                    let b = base.swap_remove(i);
                    if b == x {
                        base.push(b);
                        continue;
                    }
                    let g = b.gcd(&x);
                    pending.push(&b / &g);
                    pending.push(&x / &g);
                    pending.push(g);
                }
            }
        }
    }
    base.sort();
    base
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn binary_entropy_value() {
        let h = LogForm::entropy(&[rat(1, 10), rat(9, 10)]);
        assert!((h.to_f64() - 0.4689955935892812).abs() < 1e-14);
        assert!(!h.is_zero());
    }

    #[test]
    fn detects_hidden_equalities() {
        // log 6 = log 2 + log 3
        let mut f = LogForm::zero();
        f.add_log(&u(6), &rat(1, 1));
        f.add_log(&u(2), &rat(-1, 1));
        f.add_log(&u(3), &rat(-1, 1));
        assert!(f.is_zero());
        // large cofactors: log(p*q) - log p - log q with p, q > 1000 primes
        let (p, q) = (u(1_000_003), u(998_244_353));
        let mut g = LogForm::zero();
        g.add_log(&(&p * &q), &rat(2, 3));
        g.add_log(&p, &rat(-2, 3));
        g.add_log(&q, &rat(-2, 3));
        assert!(g.is_zero());
        g.add_log(&q, &rat(1, 1000));
        assert!(!g.is_zero());
    }

    #[test]
    fn uniform_entropy_is_log_of_size() {
        let third = rat(1, 3);
        let h = LogForm::entropy(&[third.clone(), third.clone(), third]);
        let mut log3 = LogForm::zero();
        log3.add_log(&u(3), &rat(1, 1));
        assert!(h.exactly_equals(&log3));
    }

    #[test]
    fn coprime_base_covers_inputs() {
        let base = coprime_base([u(12), u(18), u(35)]);
        for (i, a) in base.iter().enumerate() {
            for b in &base[i + 1..] {
                assert!(a.gcd(b).is_one());
            }
        }
        assert_eq!(base, vec![u(2), u(3), u(35)]);
        let big = u(1_000_003) * u(1_000_033);
        let base = coprime_base([big.clone() * u(1_000_003), big]);
        assert_eq!(base, vec![u(1_000_003), u(1_000_033)]);
    }
}
