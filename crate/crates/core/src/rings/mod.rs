//! The five arithmetic substrates: reals, p-adics, complex numbers,
//! quaternions, and Laurent series over a finite field.
//!
//! Each ring provides an exact "integer" type, an ambient completion at a
//! fixed working precision, norms, nearest-integer reduction into the
//! fundamental domain, uniform sampling of that domain, and shell counts.
//! Everything is immutable and pure; sampling takes an explicit seed.

pub mod count;
pub mod padic;
pub mod poly;
pub mod quaternion;
pub mod sample;
pub mod text;

pub use count::{count_shell, CountMode};
pub use padic::PadicInt;
pub use poly::{FPoly, LaurentSeries};
pub use quaternion::{hurwitz_units, nearest_hurwitz, Hurwitz};
pub use sample::{sample_uniform, PointMatrix};

use crate::exact::{is_prime, is_prime_power, Dyadic, Rat};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("invalid ring descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("height {0} is not attained by this ring's norm")]
    UnattainableHeight(String),
    #[error("value indistinguishable from 0 at working precision: {0}")]
    PrecisionExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("operation applied to a point of the wrong ring: {0}")]
    KindMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Real,
    Padic,
    Complex,
    Quaternion,
    Laurent,
}

/// Which arithmetic substrate, plus its parameters and working precision.
///
/// `precision` is the number of retained digits (p-adic), tail coefficients
/// (Laurent), or fixed-point bits (real, complex, quaternion).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    pub kind: RingKind,
    pub p: u64,
    pub t: u64,
    pub precision: u32,
}

impl RingDescriptor {
    pub fn real() -> Self {
        RingDescriptor { kind: RingKind::Real, p: 0, t: 0, precision: 32 }
    }

    pub fn complex() -> Self {
        RingDescriptor { kind: RingKind::Complex, p: 0, t: 0, precision: 32 }
    }

    pub fn quaternion() -> Self {
        RingDescriptor { kind: RingKind::Quaternion, p: 0, t: 0, precision: 32 }
    }

    pub fn padic(p: u64, precision: u32) -> Self {
        RingDescriptor { kind: RingKind::Padic, p, t: 0, precision }
    }

    pub fn laurent(t: u64, precision: u32) -> Self {
        RingDescriptor { kind: RingKind::Laurent, p: 0, t, precision }
    }

    pub fn validate(&self) -> Result<(), RingError> {
        if self.precision == 0 {
            return Err(RingError::InvalidDescriptor("precision must be >= 1".into()));
        }
        match self.kind {
            RingKind::Padic => {
                if !is_prime(self.p) {
                    return Err(RingError::InvalidDescriptor(format!("{} is not prime", self.p)));
                }
            }
            RingKind::Laurent => {
                if !is_prime_power(self.t) {
                    return Err(RingError::InvalidDescriptor(format!(
                        "{} is not a prime power",
                        self.t
                    )));
                }
            }
            RingKind::Real | RingKind::Complex | RingKind::Quaternion => {
                if self.precision > 48 {
                    return Err(RingError::InvalidDescriptor(
                        "fixed-point precision above 48 bits is unsupported".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Real dimension of one ambient coordinate (2 for complex, 4 for
    /// quaternions, 1 otherwise); the delta of the coordinate measure is this
    /// times `m`.
    pub fn real_dim(&self) -> u32 {
        match self.kind {
            RingKind::Complex => 2,
            RingKind::Quaternion => 4,
            _ => 1,
        }
    }
}

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

/// An exact integer of the ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntegerPoint {
    Real(i64),
    /// A rational integer viewed inside Z_p.
    Padic(i64),
    Gauss { re: i64, im: i64 },
    Hurwitz(Hurwitz),
    Poly(FPoly),
}

impl IntegerPoint {
    pub fn is_zero(&self) -> bool {
        match self {
            IntegerPoint::Real(a) | IntegerPoint::Padic(a) => *a == 0,
            IntegerPoint::Gauss { re, im } => *re == 0 && *im == 0,
            IntegerPoint::Hurwitz(h) => h.is_zero(),
            IntegerPoint::Poly(p) => p.is_zero(),
        }
    }

    /// Sup-norm height of the point, in the ring's own absolute value.
    pub fn height(&self) -> Rat {
        match self {
            IntegerPoint::Real(a) | IntegerPoint::Padic(a) => Rat::from_integer(a.abs()),
            IntegerPoint::Gauss { re, im } => Rat::from_integer(re.abs().max(im.abs())),
            IntegerPoint::Hurwitz(h) => h.sup_norm(),
            IntegerPoint::Poly(p) => Rat::from_integer(p.height() as i64),
        }
    }
}

/// A point of the ambient completion at working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmbientPoint {
    Real(Dyadic),
    Padic(PadicInt),
    Complex { re: Dyadic, im: Dyadic },
    Quaternion([Dyadic; 4]),
    Laurent(LaurentSeries),
}

impl AmbientPoint {
    pub fn kind(&self) -> RingKind {
        match self {
            AmbientPoint::Real(_) => RingKind::Real,
            AmbientPoint::Padic(_) => RingKind::Padic,
            AmbientPoint::Complex { .. } => RingKind::Complex,
            AmbientPoint::Quaternion(_) => RingKind::Quaternion,
            AmbientPoint::Laurent(_) => RingKind::Laurent,
        }
    }

    pub fn zero(ring: &RingDescriptor) -> AmbientPoint {
        match ring.kind {
            RingKind::Real => AmbientPoint::Real(Dyadic::ZERO),
            RingKind::Padic => AmbientPoint::Padic(PadicInt::zero(ring.p, ring.precision as usize)),
            RingKind::Complex => AmbientPoint::Complex { re: Dyadic::ZERO, im: Dyadic::ZERO },
            RingKind::Quaternion => AmbientPoint::Quaternion([Dyadic::ZERO; 4]),
            RingKind::Laurent => {
                AmbientPoint::Laurent(LaurentSeries::zero(ring.t, ring.precision as usize))
            }
        }
    }

    pub fn add(&self, other: &AmbientPoint) -> AmbientPoint {
        match (self, other) {
            (AmbientPoint::Real(a), AmbientPoint::Real(b)) => AmbientPoint::Real(a.add(*b)),
            (AmbientPoint::Padic(a), AmbientPoint::Padic(b)) => AmbientPoint::Padic(a.add(b)),
            (AmbientPoint::Complex { re: ar, im: ai }, AmbientPoint::Complex { re: br, im: bi }) => {
                AmbientPoint::Complex { re: ar.add(*br), im: ai.add(*bi) }
            }
            (AmbientPoint::Quaternion(a), AmbientPoint::Quaternion(b)) => {
                AmbientPoint::Quaternion([
                    a[0].add(b[0]),
                    a[1].add(b[1]),
                    a[2].add(b[2]),
                    a[3].add(b[3]),
                ])
            }
            (AmbientPoint::Laurent(a), AmbientPoint::Laurent(b)) => {
                AmbientPoint::Laurent(a.add(b))
            }
            _ => panic!("cannot add points of different ring kinds"),
        }
    }

    /// Left multiplication by a ring integer: `q * x`.
    pub fn mul_integer_left(&self, q: &IntegerPoint) -> AmbientPoint {
        match (q, self) {
            (IntegerPoint::Real(k), AmbientPoint::Real(x)) => AmbientPoint::Real(x.mul_int(*k)),
            (IntegerPoint::Padic(k), AmbientPoint::Padic(x)) => AmbientPoint::Padic(x.mul_int(*k)),
            (IntegerPoint::Gauss { re: a, im: b }, AmbientPoint::Complex { re, im }) => {
                AmbientPoint::Complex {
                    re: re.mul_int(*a).sub(im.mul_int(*b)),
                    im: re.mul_int(*b).add(im.mul_int(*a)),
                }
            }
            (IntegerPoint::Hurwitz(h), AmbientPoint::Quaternion(x)) => {
                // (H/2) * x: multiply doubled coordinates, then halve.
                let hd = h.coords();
                AmbientPoint::Quaternion(quaternion::quat_mul_dyadic(&hd, x))
            }
            (IntegerPoint::Poly(p), AmbientPoint::Laurent(x)) => {
                AmbientPoint::Laurent(x.mul_poly(p))
            }
            _ => panic!("integer point kind does not match ambient point kind"),
        }
    }

    /// Right multiplication `x * q`; differs from left only for quaternions.
    pub fn mul_integer_right(&self, q: &IntegerPoint) -> AmbientPoint {
        match (q, self) {
            (IntegerPoint::Hurwitz(h), AmbientPoint::Quaternion(x)) => {
                let hd = h.coords();
                AmbientPoint::Quaternion(quaternion::quat_mul_dyadic(x, &hd))
            }
            _ => self.mul_integer_left(q),
        }
    }
}

// ---------------------------------------------------------------------------
// Reduction and norms
// ---------------------------------------------------------------------------

/// Fractional part in the fundamental domain and the nearest integer.
///
/// Tie-breaking is lexicographic on (doubled) integer coordinates. Z_p is its
/// own fundamental domain, so p-adic reduction is the identity.
pub fn reduce(x: &AmbientPoint) -> (AmbientPoint, IntegerPoint) {
    match x {
        AmbientPoint::Real(v) => {
            let n = v.round_nearest_tie_down();
            (AmbientPoint::Real(v.sub(Dyadic::from_int(n))), IntegerPoint::Real(n))
        }
        AmbientPoint::Padic(_) => (x.clone(), IntegerPoint::Padic(0)),
        AmbientPoint::Complex { re, im } => {
            let a = re.round_nearest_tie_down();
            let b = im.round_nearest_tie_down();
            (
                AmbientPoint::Complex {
                    re: re.sub(Dyadic::from_int(a)),
                    im: im.sub(Dyadic::from_int(b)),
                },
                IntegerPoint::Gauss { re: a, im: b },
            )
        }
        AmbientPoint::Quaternion(v) => {
            let h = nearest_hurwitz(v);
            let hc = h.coords();
            let frac = [
                v[0].sub(hc[0]),
                v[1].sub(hc[1]),
                v[2].sub(hc[2]),
                v[3].sub(hc[3]),
            ];
            (AmbientPoint::Quaternion(frac), IntegerPoint::Hurwitz(h))
        }
        AmbientPoint::Laurent(v) => {
            let (frac, int) = v.split();
            (AmbientPoint::Laurent(frac), IntegerPoint::Poly(int))
        }
    }
}

/// A norm value that may sit below the truncation floor of an ultrametric
/// ring: the numeric value is then an upper bound, not an exact value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormValue {
    pub value: Rat,
    pub below_floor: bool,
}

impl NormValue {
    fn exact(value: Rat) -> Self {
        NormValue { value, below_floor: false }
    }
}

/// Absolute value of an ambient point (sup norm over real coordinates for the
/// archimedean rings, `p^{-v}` / `t^{-v}` for the ultrametric ones).
pub fn abs(x: &AmbientPoint) -> NormValue {
    match x {
        AmbientPoint::Real(v) => NormValue::exact(v.abs().to_rat()),
        AmbientPoint::Complex { re, im } => NormValue::exact(re.abs().max(im.abs()).to_rat()),
        AmbientPoint::Quaternion(v) => {
            NormValue::exact(v.iter().map(|c| c.abs()).max().unwrap().to_rat())
        }
        AmbientPoint::Padic(v) => match v.valuation() {
            Some(val) => NormValue::exact(Rat::new(1, v.p.pow(val as u32) as i64)),
            None => NormValue {
                value: Rat::new(1, v.p.pow(v.precision() as u32) as i64),
                below_floor: true,
            },
        },
        AmbientPoint::Laurent(v) => {
            if !v.poly.is_zero() {
                NormValue::exact(Rat::from_integer(v.poly.height() as i64))
            } else {
                match v.frac_valuation() {
                    Some(l) => NormValue::exact(Rat::new(1, v.t.pow(l as u32) as i64)),
                    None => NormValue {
                        value: Rat::new(1, v.t.pow(v.valid() as u32) as i64),
                        below_floor: true,
                    },
                }
            }
        }
    }
}

/// Distance from `x` to the ring's integer lattice, in the metric the
/// linear-form systems use (sup metric for archimedean rings, the ultrametric
/// absolute value of the fractional part otherwise).
///
/// For p-adic points the rational integers are dense, so the unrestricted
/// distance is 0; height-capped nearest integers live in the solver.
pub fn dist_to_integers(x: &AmbientPoint) -> NormValue {
    match x {
        AmbientPoint::Real(v) => NormValue::exact(v.dist_to_int().to_rat()),
        AmbientPoint::Complex { re, im } => {
            NormValue::exact(re.dist_to_int().max(im.dist_to_int()).to_rat())
        }
        AmbientPoint::Quaternion(v) => NormValue::exact(quaternion::hurwitz_dist_sup(v).to_rat()),
        AmbientPoint::Padic(_) => NormValue::exact(Rat::new(0, 1)),
        AmbientPoint::Laurent(v) => match v.frac_valuation() {
            Some(l) => NormValue::exact(Rat::new(1, v.t.pow(l as u32) as i64)),
            None => NormValue {
                value: Rat::new(1, v.t.pow(v.valid() as u32) as i64),
                below_floor: true,
            },
        },
    }
}

/// Squared Euclidean distance from a quaternion point to the Hurwitz lattice.
pub fn hurwitz_dist2(x: &AmbientPoint) -> Result<Rat, RingError> {
    match x {
        AmbientPoint::Quaternion(v) => Ok(quaternion::hurwitz_dist2(v).to_rat()),
        _ => Err(RingError::KindMismatch("hurwitz_dist2 needs a quaternion point".into())),
    }
}

/// `|x|_p = p^{-v}` with below-floor reporting; see `PadicInt::valuation`.
pub fn padic_abs(x: &PadicInt) -> NormValue {
    abs(&AmbientPoint::Padic(x.clone()))
}

/// `|n|_p` for a rational integer.
pub fn padic_abs_int(n: i64, p: u64) -> Rat {
    if n == 0 {
        return Rat::new(0, 1);
    }
    let mut n = n.unsigned_abs();
    let mut v = 0u32;
    while n % p as u64 == 0 {
        n /= p as u64;
        v += 1;
    }
    Rat::new(1, p.pow(v) as i64)
}
