//! Truncated p-adic integers as digit vectors.
//!
//! A `PadicInt` holds the first `L` base-p digits of an element of Z_p, i.e.
//! the residue mod `p^L`. Addition, negation, and multiplication by rational
//! integers are exact mod `p^L`; only the valuation query can fall below the
//! truncation floor, and that case is reported, never silently zeroed.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicInt {
    pub p: u64,
    digits: Vec<u32>,
}

impl PadicInt {
    pub fn zero(p: u64, precision: usize) -> Self {
        PadicInt { p, digits: vec![0; precision] }
    }

    pub fn from_digits(p: u64, digits: Vec<u32>) -> Self {
        for d in &digits {
            assert!((*d as u64) < p, "digit {d} out of range for p={p}");
        }
        PadicInt { p, digits }
    }

    /// Embed a rational integer at the given precision.
    pub fn from_int(p: u64, precision: usize, n: i64) -> Self {
        let mut x = PadicInt::zero(p, precision);
        let mut m = n.unsigned_abs();
        for i in 0..precision {
            x.digits[i] = (m % p) as u32;
            m /= p;
        }
        if n < 0 {
            x.neg()
        } else {
            x
        }
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero_truncated(&self) -> bool {
        self.digits.iter().all(|d| *d == 0)
    }

    /// Index of the first nonzero digit; `None` when every retained digit is
    /// zero (the value is divisible by `p^L`).
    pub fn valuation(&self) -> Option<usize> {
        self.digits.iter().position(|d| *d != 0)
    }

    pub fn add(&self, other: &PadicInt) -> PadicInt {
        assert_eq!(self.p, other.p);
        let n = self.precision().min(other.precision());
        let mut out = vec![0u32; n];
        let mut carry = 0u64;
        for i in 0..n {
            let s = self.digits[i] as u64 + other.digits[i] as u64 + carry;
            out[i] = (s % self.p) as u32;
            carry = s / self.p;
        }
        PadicInt { p: self.p, digits: out }
    }

    /// `p^L - x` mod `p^L`.
    pub fn neg(&self) -> PadicInt {
        match self.valuation() {
            None => self.clone(),
            Some(v) => {
                let mut out = self.digits.clone();
                out[v] = (self.p - self.digits[v] as u64) as u32;
                for d in out.iter_mut().skip(v + 1) {
                    *d = (self.p - 1 - *d as u64) as u32;
                }
                PadicInt { p: self.p, digits: out }
            }
        }
    }

    pub fn mul_int(&self, k: i64) -> PadicInt {
        let mut out = vec![0u32; self.precision()];
        let mag = k.unsigned_abs();
        let mut carry = 0u128;
        for i in 0..self.precision() {
            let s = self.digits[i] as u128 * mag as u128 + carry;
            out[i] = (s % self.p as u128) as u32;
            carry = s / self.p as u128;
        }
        let r = PadicInt { p: self.p, digits: out };
        if k < 0 {
            r.neg()
        } else {
            r
        }
    }

    pub fn sub_int(&self, k: i64) -> PadicInt {
        self.add(&PadicInt::from_int(self.p, self.precision(), k).neg())
    }

    /// Residue mod `p^k` as an ordinary integer, `k` digits.
    pub fn residue(&self, k: usize) -> u128 {
        assert!(k <= self.precision());
        let mut acc = 0u128;
        for i in (0..k).rev() {
            acc = acc * self.p as u128 + self.digits[i] as u128;
        }
        acc
    }
}
