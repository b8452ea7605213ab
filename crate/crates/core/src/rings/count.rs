//! Closed-form shell counts for each ring's integer lattice, cross-checkable
//! against brute-force enumeration.

use super::{RingDescriptor, RingError, RingKind};
use crate::exact::Rat;
use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Cardinality of `{q : ||q||_inf = height}`.
    Exact,
    /// Cardinality of `{q : ||q||_inf <= height}` (including 0).
    AtMost,
}

fn pow_big(base: u64, e: u32) -> BigUint {
    BigUint::from(base).pow(e)
}

/// `#{q in Z^d : |q|_inf <= s}` per coordinate block of `d` integers.
fn int_box(s: i64, d: u32) -> BigUint {
    if s < 0 {
        return BigUint::zero();
    }
    pow_big((2 * s + 1) as u64, d)
}

/// Number of ring integers in one coordinate with sup norm at most `h`,
/// where `h` is given in the ring's height scale.
fn one_coord_at_most(ring: &RingDescriptor, h: &Rat) -> Result<BigUint, RingError> {
    match ring.kind {
        RingKind::Real | RingKind::Padic => {
            let s = rat_floor(h);
            Ok(int_box(s, 1))
        }
        RingKind::Complex => {
            let s = rat_floor(h);
            Ok(int_box(s, 2))
        }
        RingKind::Quaternion => {
            // doubled coordinates: evens within |x|<=2h and odds within the same
            let s2 = rat_floor(&(h * Rat::from_integer(2)));
            if s2 < 0 {
                return Ok(BigUint::zero());
            }
            let evens = (s2 / 2) * 2 + 1; // count of even integers in [-s2, s2]
            let odds = ((s2 + 1) / 2) * 2; // count of odd integers in [-s2, s2]
            Ok(pow_big(evens as u64, 4) + pow_big(odds as u64, 4))
        }
        RingKind::Laurent => {
            // heights are powers of t: h = t^r admits degrees <= r
            if h < &Rat::from_integer(1) {
                return Ok(BigUint::one()); // only the zero polynomial
            }
            let r = laurent_log(ring.t, h)?;
            Ok(pow_big(ring.t, r + 1))
        }
    }
}

fn rat_floor(h: &Rat) -> i64 {
    h.floor().to_integer()
}

fn laurent_log(t: u64, h: &Rat) -> Result<u32, RingError> {
    if !h.is_integer() {
        return Err(RingError::UnattainableHeight(format!("{h} (not a power of {t})")));
    }
    let mut v = h.to_integer() as u64;
    let mut r = 0u32;
    while v > 1 {
        if v % t != 0 {
            return Err(RingError::UnattainableHeight(format!("{h} (not a power of {t})")));
        }
        v /= t;
        r += 1;
    }
    Ok(r)
}

/// Validate that `height` is actually attained by the ring's norm.
fn check_attainable(ring: &RingDescriptor, height: &Rat) -> Result<(), RingError> {
    let bad = |msg: &str| Err(RingError::UnattainableHeight(format!("{height} ({msg})")));
    match ring.kind {
        RingKind::Real | RingKind::Padic | RingKind::Complex => {
            if !height.is_integer() || height < &Rat::zero() {
                return bad("expected a nonnegative integer");
            }
        }
        RingKind::Quaternion => {
            let doubled = height * Rat::from_integer(2);
            if !doubled.is_integer() || height < &Rat::zero() {
                return bad("expected a nonnegative half-integer");
            }
        }
        RingKind::Laurent => {
            if height.is_zero() {
                return Ok(());
            }
            laurent_log(ring.t, height)?;
        }
    }
    Ok(())
}

/// The next height below `height` in the ring's value set (for shell
/// differencing): integers step by 1, quaternions by 1/2, Laurent by a factor
/// of `t`.
fn previous_height(ring: &RingDescriptor, height: &Rat) -> Option<Rat> {
    if height.is_zero() {
        return None;
    }
    match ring.kind {
        RingKind::Real | RingKind::Padic | RingKind::Complex => {
            Some(height - Rat::from_integer(1))
        }
        RingKind::Quaternion => Some(height - Rat::new(1, 2)),
        RingKind::Laurent => {
            if height == &Rat::from_integer(1) {
                Some(Rat::zero())
            } else {
                Some(height / Rat::from_integer(ring.t as i64))
            }
        }
    }
}

/// Count lattice vectors of `m` ring coordinates with sup norm equal to (or
/// at most) the given height, by closed form.
pub fn count_shell(
    ring: &RingDescriptor,
    m: usize,
    height: Rat,
    mode: CountMode,
) -> Result<BigUint, RingError> {
    ring.validate()?;
    check_attainable(ring, &height)?;
    let at_most = |h: &Rat| -> Result<BigUint, RingError> {
        Ok(one_coord_at_most(ring, h)?.pow(m as u32))
    };
    match mode {
        CountMode::AtMost => at_most(&height),
        CountMode::Exact => {
            let outer = at_most(&height)?;
            match previous_height(ring, &height) {
                None => Ok(outer), // the zero shell
                Some(prev) => Ok(outer - at_most(&prev)?),
            }
        }
    }
}
