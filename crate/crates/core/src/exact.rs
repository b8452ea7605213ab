//! Exact scalar arithmetic shared by every module.
//!
//! Two representations carry all load-bearing comparisons:
//!
//! * [`Dyadic`] — fixed-point binary rationals `num / 2^shift`, used for the
//!   archimedean ambient coordinates so that nearest-integer distances and
//!   tie-breaks are decided without rounding.
//! * [`Monomial`] — a positive real stored as a product of prime powers with
//!   rational exponents, e.g. `3^{-2} * 4096^{-9/10}`. Quasi-norms, balanced
//!   thickening functions, and the product identities they must satisfy all
//!   live in this form; comparison reduces to big-integer cross powers and is
//!   therefore exact.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Workhorse rational for interface values (bounds, heights, errors).
pub type Rat = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

pub fn big_rat(r: &Rat) -> BigRational {
    BigRational::new((*r.numer()).into(), (*r.denom()).into())
}

// ---------------------------------------------------------------------------
// Dyadic fixed point
// ---------------------------------------------------------------------------

/// Exact binary fixed-point number `num / 2^shift`.
#[derive(Clone, Copy, Debug)]
pub struct Dyadic {
    pub num: i128,
    pub shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, shift: 0 };

    pub fn new(num: i128, shift: u32) -> Self {
        Dyadic { num, shift }.normalized()
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: n as i128, shift: 0 }
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            self.shift = 0;
            return self;
        }
        while self.shift > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.shift -= 1;
        }
        self
    }

    fn aligned(a: Dyadic, b: Dyadic) -> (i128, i128, u32) {
        let s = a.shift.max(b.shift);
        (a.num << (s - a.shift), b.num << (s - b.shift), s)
    }

    pub fn add(self, other: Dyadic) -> Dyadic {
        let (x, y, s) = Dyadic::aligned(self, other);
        Dyadic::new(x + y, s)
    }

    pub fn sub(self, other: Dyadic) -> Dyadic {
        let (x, y, s) = Dyadic::aligned(self, other);
        Dyadic::new(x - y, s)
    }

    pub fn mul(self, other: Dyadic) -> Dyadic {
        Dyadic::new(self.num * other.num, self.shift + other.shift)
    }

    pub fn mul_int(self, k: i64) -> Dyadic {
        Dyadic::new(self.num * k as i128, self.shift)
    }

    pub fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, shift: self.shift }
    }

    pub fn abs(self) -> Dyadic {
        Dyadic { num: self.num.abs(), shift: self.shift }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Nearest integer; on a half-integer tie returns the smaller integer.
    pub fn round_nearest_tie_down(self) -> i64 {
        if self.shift == 0 {
            return self.num as i64;
        }
        let den: i128 = 1 << self.shift;
        let floor = self.num.div_euclid(den);
        let frac_twice = 2 * (self.num - floor * den); // in [0, 2*den)
        let up = match frac_twice.cmp(&den) {
            Ordering::Greater => 1,
            _ => 0, // ties go down
        };
        (floor + up) as i64
    }

    /// Distance to the nearest integer.
    pub fn dist_to_int(self) -> Dyadic {
        let n = self.round_nearest_tie_down();
        self.sub(Dyadic::from_int(n)).abs()
    }

    pub fn to_rat(self) -> Rat {
        let den = 1i128 << self.shift;
        Rat::new(
            i64::try_from(self.num).expect("dyadic numerator exceeds i64"),
            i64::try_from(den).expect("dyadic denominator exceeds i64"),
        )
    }

    pub fn to_big_rational(self) -> BigRational {
        BigRational::new(self.num.into(), (1i128 << self.shift).into())
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1i128 << self.shift) as f64
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (x, y, _) = Dyadic::aligned(*self, *other);
        x.cmp(&y)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1i128 << self.shift)
        }
    }
}

/// Compare a dyadic against a rational bound without rounding.
pub fn dyadic_cmp_rat(d: &Dyadic, r: &Rat) -> Ordering {
    // d = a / 2^s vs r = p/q  <=>  a*q vs p * 2^s
    if d.shift < 64 {
        let a = d.num;
        let q = *r.denom() as i128;
        let p = *r.numer() as i128;
        if let (Some(lhs), Some(rhs)) = (a.checked_mul(q), p.checked_mul(1i128 << d.shift)) {
            return lhs.cmp(&rhs);
        }
    }
    d.to_big_rational().cmp(&big_rat(r))
}

// ---------------------------------------------------------------------------
// Prime-power monomials
// ---------------------------------------------------------------------------

/// A strictly positive real of the form `prod p_i^{e_i}` with `p_i` prime and
/// `e_i` rational. Closed under multiplication, division, and rational powers;
/// ordering is decided exactly by clearing exponent denominators and comparing
/// big-integer products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    // prime -> exponent, exponents never zero
    factors: BTreeMap<u64, Rat>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: BTreeMap::new() }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Monomial for a positive integer.
    pub fn from_u64(n: u64) -> Self {
        assert!(n > 0, "monomial base must be positive");
        let mut m = Monomial::one();
        for (p, k) in factorize(n) {
            m.factors.insert(p, Rat::from_integer(k as i64));
        }
        m
    }

    /// Monomial for a positive rational.
    pub fn from_rat(r: &Rat) -> Self {
        assert!(r.is_positive(), "monomial value must be positive");
        let num = Monomial::from_u64(*r.numer() as u64);
        let den = Monomial::from_u64(*r.denom() as u64);
        num.div(&den)
    }

    /// `base^exp` for a positive integer base.
    pub fn pow_of(base: u64, exp: Rat) -> Self {
        Monomial::from_u64(base).pow(exp)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (p, e) in &other.factors {
            let cur = factors.entry(*p).or_insert_with(Rat::zero);
            *cur += e;
            if cur.is_zero() {
                factors.remove(p);
            }
        }
        Monomial { factors }
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.recip())
    }

    pub fn pow(&self, exp: Rat) -> Monomial {
        if exp.is_zero() {
            return Monomial::one();
        }
        Monomial {
            factors: self.factors.iter().map(|(p, e)| (*p, e * exp)).collect(),
        }
    }

    pub fn recip(&self) -> Monomial {
        self.pow(Rat::from_integer(-1))
    }

    /// Exact value as a rational, when all exponents are integral.
    pub fn to_rat(&self) -> Option<BigRational> {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (p, e) in &self.factors {
            if !e.is_integer() {
                return None;
            }
            let k = e.to_integer();
            let pw = BigUint::from(*p).pow(k.unsigned_abs() as u32);
            if k >= 0 {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        Some(BigRational::new(num.into(), den.into()))
    }

    pub fn to_f64(&self) -> f64 {
        self.factors
            .iter()
            .map(|(p, e)| (*p as f64).powf(e.to_f64().unwrap()))
            .product()
    }

    fn log2(&self) -> f64 {
        self.factors
            .iter()
            .map(|(p, e)| (*p as f64).log2() * e.to_f64().unwrap())
            .sum()
    }

    /// Exact comparison against 1.
    pub fn cmp_one(&self) -> Ordering {
        if self.factors.is_empty() {
            return Ordering::Equal;
        }
        // Fast screen: when the logarithm is far from zero the sign is already
        // decided; the threshold leaves four orders of magnitude of headroom
        // over worst-case f64 accumulation at desk-scale exponents.
        let log = self.log2();
        if log.abs() > 1e-6 {
            return if log > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        // Clear denominators: compare prod p^{e_i * D} vs 1 with integers.
        let d = self.factors.values().fold(1i64, |acc, e| acc.lcm(e.denom()));
        let mut lhs = BigUint::one();
        let mut rhs = BigUint::one();
        for (p, e) in &self.factors {
            let k = (e * d).to_integer();
            let pw = BigUint::from(*p).pow(k.unsigned_abs() as u32);
            if k >= 0 {
                lhs *= pw;
            } else {
                rhs *= pw;
            }
        }
        lhs.cmp(&rhs)
    }

    pub fn cmp(&self, other: &Monomial) -> Ordering {
        self.div(other).cmp_one()
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        self.div(&Monomial::from_rat(r)).cmp_one()
    }

    /// `floor(self * 2^scale)` via binary search on exact powers.
    pub fn floor_scaled(&self, scale: u32) -> BigUint {
        let d = self.factors.values().fold(1i64, |acc, e| acc.lcm(e.denom())) as u32;
        // self^d = num/den in integers; y = floor(2^scale * self) satisfies
        // y^d * den <= 2^{scale*d} * num < (y+1)^d * den.
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (p, e) in &self.factors {
            let k = (e * d as i64).to_integer();
            let pw = BigUint::from(*p).pow(k.unsigned_abs() as u32);
            if k >= 0 {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        let target = (BigUint::one() << (scale as usize * d as usize)) * num;
        let guess = (self.to_f64() * 2f64.powi(scale as i32)).max(0.0);
        let mut lo = BigUint::zero();
        let mut hi = BigUint::from((guess.min(1e30) * 2.0 + 2.0) as u128).max(BigUint::one());
        while hi.pow(d) * &den <= target {
            hi <<= 1;
        }
        while lo < hi {
            let mid: BigUint = (&lo + &hi + 1u32) >> 1;
            if mid.pow(d) * &den <= target {
                lo = mid;
            } else {
                hi = mid - 1u32;
            }
        }
        lo
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (p, e) in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e.is_integer() {
                write!(f, "{}^{}", p, e.to_integer())?;
            } else {
                write!(f, "{}^({})", p, e)?;
            }
        }
        Ok(())
    }
}

/// A positive threshold with a precomputed dyadic bracket, so that the hot
/// comparison `err < bound` is an integer compare except when `err` lands in
/// the one-ulp ambiguity band, where it falls back to the exact test.
#[derive(Clone, Debug)]
pub struct CachedBound {
    pub bound: Monomial,
    floor_scaled: u128,
    bits: u32,
}

impl CachedBound {
    pub fn new(bound: Monomial) -> Self {
        let bits = 48;
        let f = bound.floor_scaled(bits);
        let floor_scaled = f.to_u128().unwrap_or(u128::MAX);
        CachedBound { bound, floor_scaled, bits }
    }

    /// Exact `err < bound`.
    pub fn gt(&self, err: &Dyadic) -> bool {
        if err.num <= 0 {
            return true; // thresholds are strictly positive
        }
        if err.shift <= self.bits {
            let scaled = (err.num as u128) << (self.bits - err.shift);
            if scaled < self.floor_scaled {
                return true;
            }
            if scaled > self.floor_scaled {
                return false;
            }
        }
        // ambiguity band (or unusually fine err): decide exactly
        self.bound.cmp_rat(&err.to_rat()) == Ordering::Greater
    }
}

/// A nonnegative value: zero, or a positive monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosReal {
    Zero,
    Pos(Monomial),
}

impl PosReal {
    pub fn from_rat(r: &Rat) -> PosReal {
        if r.is_zero() {
            PosReal::Zero
        } else {
            PosReal::Pos(Monomial::from_rat(r))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            PosReal::Zero => 0.0,
            PosReal::Pos(m) => m.to_f64(),
        }
    }

    pub fn cmp(&self, other: &PosReal) -> Ordering {
        match (self, other) {
            (PosReal::Zero, PosReal::Zero) => Ordering::Equal,
            (PosReal::Zero, PosReal::Pos(_)) => Ordering::Less,
            (PosReal::Pos(_), PosReal::Zero) => Ordering::Greater,
            (PosReal::Pos(a), PosReal::Pos(b)) => a.cmp(b),
        }
    }
}

/// Trial-division factorization; bases here are ring moduli, schedule bases,
/// and small integer coordinates, so inputs stay small.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

pub fn is_prime_power(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_rounding_and_distance() {
        let x = Dyadic::new(7, 3); // 7/8
        assert_eq!(x.round_nearest_tie_down(), 1);
        assert_eq!(x.dist_to_int(), Dyadic::new(1, 3));
        // exact tie 1/2 rounds to the smaller integer
        assert_eq!(Dyadic::new(1, 1).round_nearest_tie_down(), 0);
        assert_eq!(Dyadic::new(-1, 1).round_nearest_tie_down(), -1);
        assert_eq!(Dyadic::new(3, 1).round_nearest_tie_down(), 1);
        assert_eq!(Dyadic::new(-3, 1).round_nearest_tie_down(), -2);
        assert_eq!(Dyadic::new(13, 2).round_nearest_tie_down(), 3);
    }

    #[test]
    fn monomial_cross_power_equality() {
        // |4|^{3/4} == |2|^{3/2} because 4^3 = 2^6
        let a = Monomial::pow_of(4, rat(3, 4));
        let b = Monomial::pow_of(2, rat(3, 2));
        assert_eq!(a.cmp(&b), Ordering::Equal);
        assert_eq!(a, b); // canonical prime form
    }

    #[test]
    fn monomial_comparisons() {
        let a = Monomial::pow_of(3, rat(-2, 1)).mul(&Monomial::pow_of(81, rat(-3, 1)));
        let b = Monomial::pow_of(3, rat(-14, 1));
        assert_eq!(a.cmp(&b), Ordering::Equal);
        let c = Monomial::pow_of(5, rat(-2, 3));
        let d = Monomial::pow_of(5, rat(-1, 2));
        assert_eq!(c.cmp(&d), Ordering::Less);
        assert_eq!(Monomial::from_rat(&rat(7, 5)).cmp_rat(&rat(7, 5)), Ordering::Equal);
        // near-tie that defeats the f64 screen: 2^30 vs 2^30 * (1 + 0)
        let e = Monomial::pow_of(1024, rat(3, 1));
        let f = Monomial::pow_of(2, rat(30, 1));
        assert_eq!(e.cmp(&f), Ordering::Equal);
    }

    #[test]
    fn monomial_floor_scaled() {
        // floor(2^10 * 2^{-1/2}) = floor(724.07...) = 724
        let m = Monomial::pow_of(2, rat(-1, 2));
        assert_eq!(m.floor_scaled(10), BigUint::from(724u32));
        assert_eq!(Monomial::one().floor_scaled(4), BigUint::from(16u32));
    }

    #[test]
    fn factorization_predicates() {
        assert!(is_prime(2) && is_prime(97));
        assert!(!is_prime(1) && !is_prime(91));
        assert!(is_prime_power(8) && is_prime_power(27) && is_prime_power(5));
        assert!(!is_prime_power(6) && !is_prime_power(1));
    }

    #[test]
    fn dyadic_vs_rational() {
        let d = Dyadic::new(387011787, 32);
        assert_eq!(dyadic_cmp_rat(&d, &rat(1, 5)), Ordering::Less);
        assert_eq!(dyadic_cmp_rat(&d, &rat(1, 12)), Ordering::Greater);
    }
}
