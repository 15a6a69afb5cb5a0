//! Binomials, the Moebius function and rotation classes of binary vectors.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Longest bit-vector handled by the cycle-class enumeration.
pub const MAX_BITS: usize = 63;

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k).to_f64().expect("binomial fits in f64")
}

pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn moebius(k: usize) -> Result<i8> {
    if k == 0 {
        return Err(Error::InvalidParameter("moebius is defined for k >= 1".into()));
    }
    let mut rest = k;
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            rest /= p;
            if rest.is_multiple_of(p) {
                return Ok(0);
            }
            sign = -sign;
        }
        p += 1;
    }
    if rest > 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// Number of rotation classes of length-`n` binary vectors with weight `r` and order `e`.
///
/// Coefficient of `x^r` in `(1/e) * sum_{d | e} mu(e/d) (1 + x^{n/d})^d`, expanded
/// exactly. Zero when `e` does not divide `n`.
pub fn cycle_class_count(n: usize, r: usize, e: usize) -> Result<BigUint> {
    if n == 0 || e == 0 {
        return Err(Error::InvalidParameter("n and e must be positive".into()));
    }
    if r > n {
        return Err(Error::InvalidParameter(format!("weight r={r} exceeds n={n}")));
    }
    if !n.is_multiple_of(e) {
        return Ok(BigUint::zero());
    }
    let mut poly = vec![BigInt::zero(); n + 1];
    for d in divisors(e) {
        let mu = moebius(e / d)?;
        if mu == 0 {
            continue;
        }
        let step = n / d;
        for k in 0..=d {
            let term = BigInt::from(binomial(d, k));
            if mu > 0 {
                poly[k * step] += term;
            } else {
                poly[k * step] -= term;
            }
        }
    }
    let e_big = BigInt::from(e);
    let coeff = &poly[r];
    debug_assert!((coeff % &e_big).is_zero(), "R_e has integer coefficients");
    let count = coeff / e_big;
    debug_assert!(!count.is_negative());
    Ok(count.to_biguint().unwrap_or_default())
}

/// `N_r`, the number of rotation classes of weight `r`.
pub fn cycle_class_total(n: usize, r: usize) -> Result<BigUint> {
    divisors(n).into_iter().map(|e| cycle_class_count(n, r, e)).sum()
}

/// A rotation class of length-`n` bit-vectors, held by its canonical member.
///
/// Position 0 is the leftmost (most significant) bit, so the canonical member,
/// the lexicographically smallest rotation, is also the numerically smallest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleClass {
    n: usize,
    bits: u64,
    order: usize,
}

impl CycleClass {
    pub fn representative(&self) -> u64 {
        self.bits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Number of distinct rotations; always divides `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Positions holding a one, ascending.
    pub fn positions(&self) -> Vec<usize> {
        ones_positions(self.bits, self.n)
    }

    pub fn bitstring(&self) -> String {
        (0..self.n).map(|p| if bit_at(self.bits, self.n, p) { '1' } else { '0' }).collect()
    }

    /// Every member of the class, each exactly once.
    pub fn members(&self) -> Vec<u64> {
        let mut v = self.bits;
        (0..self.order)
            .map(|_| {
                let cur = v;
                v = rotate_left(v, self.n);
                cur
            })
            .collect()
    }
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn bit_at(v: u64, n: usize, position: usize) -> bool {
    v >> (n - 1 - position) & 1 == 1
}

pub(crate) fn ones_positions(v: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&p| bit_at(v, n, p)).collect()
}

fn rotate_left(v: u64, n: usize) -> u64 {
    ((v << 1) | (v >> (n - 1))) & mask(n)
}

/// Smallest rotation of `v` and the number of distinct rotations.
pub(crate) fn canonical_rotation(v: u64, n: usize) -> (u64, usize) {
    let mut best = v;
    let mut cur = v;
    for k in 1..=n {
        cur = rotate_left(cur, n);
        if cur == v {
            return (best, k);
        }
        best = best.min(cur);
    }
    unreachable!("rotating n times returns to the start")
}

/// One canonical representative per rotation class of weight `r`, ascending.
pub fn enumerate_cycle_representatives(n: usize, r: usize) -> Result<Vec<CycleClass>> {
    if n == 0 || n > MAX_BITS {
        return Err(Error::InvalidParameter(format!("n={n} must be in 1..={MAX_BITS}")));
    }
    if r > n {
        return Err(Error::InvalidParameter(format!("weight r={r} exceeds n={n}")));
    }
    let mut classes = Vec::new();
    for v in WeightedMasks::new(n, r) {
        let (canon, order) = canonical_rotation(v, n);
        if canon == v {
            classes.push(CycleClass { n, bits: v, order });
        }
    }
    Ok(classes)
}

/// All `n`-bit masks of popcount `r` in increasing order (Gosper's hack).
struct WeightedMasks {
    next: Option<u64>,
    limit: u64,
}

impl WeightedMasks {
    fn new(n: usize, r: usize) -> Self {
        let first = if r == 0 { 0 } else { mask(r) };
        WeightedMasks { next: Some(first), limit: mask(n) }
    }
}

impl Iterator for WeightedMasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let ripple = cur.checked_add(c);
            ripple.and_then(|ripple| {
                let succ = (((ripple ^ cur) >> 2) / c) | ripple;
                (succ <= self.limit).then_some(succ)
            })
        };
        Some(cur)
    }
}
