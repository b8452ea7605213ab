//! Polynomials over a prime field and truncated Laurent series in `1/X`.
//!
//! `FPoly` plays the role of the integers: coefficients ascend from the
//! constant term and the leading coefficient is nonzero. `LaurentSeries` is a
//! finite window of a Laurent series: an exact polynomial part plus `valid`
//! known coefficients of `X^{-1}, X^{-2}, ...`. Multiplying by a polynomial of
//! degree `d` shifts `d` unknown deep-tail coefficients into view, so the
//! product's `valid` shrinks by `d`; norm queries below the remaining window
//! report a below-floor status instead of inventing zeros.

use super::RingError;

fn add_mod(a: u64, b: u64, t: u64) -> u64 {
    (a + b) % t
}

fn mul_mod(a: u64, b: u64, t: u64) -> u64 {
    (a * b) % t
}

/// Polynomial over F_t, ascending coefficients, trimmed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FPoly {
    pub t: u64,
    pub coeffs: Vec<u64>,
}

impl FPoly {
    pub fn zero(t: u64) -> Self {
        FPoly { t, coeffs: Vec::new() }
    }

    pub fn new(t: u64, mut coeffs: Vec<u64>) -> Self {
        for c in &coeffs {
            assert!(*c < t, "coefficient {c} out of range for field size {t}");
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FPoly { t, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// `t^deg`, the absolute value inherited from the Laurent field; 0 for 0.
    pub fn height(&self) -> u64 {
        match self.degree() {
            None => 0,
            Some(d) => self.t.pow(d as u32),
        }
    }

    pub fn add(&self, o: &FPoly) -> FPoly {
        assert_eq!(self.t, o.t);
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = o.coeffs.get(i).copied().unwrap_or(0);
            *slot = add_mod(a, b, self.t);
        }
        FPoly::new(self.t, out)
    }

    pub fn mul(&self, o: &FPoly) -> FPoly {
        assert_eq!(self.t, o.t);
        if self.is_zero() || o.is_zero() {
            return FPoly::zero(self.t);
        }
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(*a, *b, self.t), self.t);
            }
        }
        FPoly::new(self.t, out)
    }
}

/// Truncated Laurent series: polynomial part plus `tail[l-1]` = coefficient of
/// `X^{-l}` for `l = 1..=valid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub t: u64,
    pub poly: FPoly,
    pub tail: Vec<u64>,
}

impl LaurentSeries {
    pub fn zero(t: u64, precision: usize) -> Self {
        LaurentSeries { t, poly: FPoly::zero(t), tail: vec![0; precision] }
    }

    pub fn from_tail(t: u64, tail: Vec<u64>) -> Self {
        for c in &tail {
            assert!(*c < t);
        }
        LaurentSeries { t, poly: FPoly::zero(t), tail }
    }

    pub fn valid(&self) -> usize {
        self.tail.len()
    }

    /// Member of the closed unit ball (zero polynomial part).
    pub fn in_unit_ball(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &LaurentSeries) -> LaurentSeries {
        assert_eq!(self.t, o.t);
        let valid = self.valid().min(o.valid());
        let tail = (0..valid)
            .map(|l| add_mod(self.tail[l], o.tail[l], self.t))
            .collect();
        LaurentSeries { t: self.t, poly: self.poly.add(&o.poly), tail }
    }

    /// Multiply by a polynomial. Coefficient of `X^k` in the product is
    /// `sum_i q_i * a_{k-i}` over the full window; tail knowledge shrinks by
    /// `deg q`.
    pub fn mul_poly(&self, q: &FPoly) -> LaurentSeries {
        assert_eq!(self.t, q.t);
        let t = self.t;
        if q.is_zero() {
            return LaurentSeries::zero(t, self.valid());
        }
        let d = q.degree().unwrap();
        assert!(
            d <= self.valid(),
            "multiplier degree {d} exceeds the {}-coefficient tail window",
            self.valid()
        );
        let coeff_at = |k: i64| -> u64 {
            // full coefficient of X^k in self (poly part and known tail)
            if k >= 0 {
                self.poly.coeffs.get(k as usize).copied().unwrap_or(0)
            } else {
                let l = (-k) as usize;
                if l <= self.tail.len() {
                    self.tail[l - 1]
                } else {
                    0 // outside the window; only used for positions we keep
                }
            }
        };
        let poly_deg_bound = self.poly.coeffs.len() as i64 + d as i64;
        let mut poly = vec![0u64; poly_deg_bound.max(0) as usize];
        for (k, slot) in poly.iter_mut().enumerate() {
            let mut acc = 0u64;
            for (i, qi) in q.coeffs.iter().enumerate() {
                acc = add_mod(acc, mul_mod(*qi, coeff_at(k as i64 - i as i64), t), t);
            }
            *slot = acc;
        }
        let new_valid = self.valid().saturating_sub(d);
        let mut tail = vec![0u64; new_valid];
        for l in 1..=new_valid {
            let mut acc = 0u64;
            for (i, qi) in q.coeffs.iter().enumerate() {
                acc = add_mod(acc, mul_mod(*qi, coeff_at(-(l as i64) - i as i64), t), t);
            }
            tail[l - 1] = acc;
        }
        LaurentSeries { t, poly: FPoly::new(t, poly), tail }
    }

    /// Split into (fractional part, polynomial part).
    pub fn split(&self) -> (LaurentSeries, FPoly) {
        (
            LaurentSeries { t: self.t, poly: FPoly::zero(self.t), tail: self.tail.clone() },
            self.poly.clone(),
        )
    }

    /// Valuation of the fractional part: smallest `l` with a nonzero `X^{-l}`
    /// coefficient, i.e. `|<x>| = t^{-l}`. `Ok(None)` means every known tail
    /// coefficient vanishes (value below `t^{-valid}`).
    pub fn frac_valuation(&self) -> Option<usize> {
        self.tail.iter().position(|c| *c != 0).map(|i| i + 1)
    }
}

/// Multiplication needs a prime field; counting and sampling work for any
/// prime power.
pub fn require_prime_field(t: u64) -> Result<(), RingError> {
    if crate::exact::is_prime(t) {
        Ok(())
    } else {
        Err(RingError::InvalidDescriptor(format!(
            "field size {t} is not prime; Laurent arithmetic supports prime fields only"
        )))
    }
}

/// All polynomials over F_t with degree <= `max_deg` (including zero).
pub fn enumerate_polys(t: u64, max_deg: usize) -> Vec<FPoly> {
    let n = max_deg + 1;
    let total = (t as u128).pow(n as u32);
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut c = code;
        let mut coeffs = vec![0u64; n];
        for slot in coeffs.iter_mut() {
            *slot = (c % t as u128) as u64;
            c /= t as u128;
        }
        out.push(FPoly::new(t, coeffs));
    }
    out
}
