//! Seeded uniform sampling of each ring's fundamental domain.
//!
//! All draws go through a counter-based ChaCha stream keyed by the caller's
//! seed, so a sample matrix is a pure function of (ring, shape, seed). The
//! quaternion case rejects from the bounding cube into the Voronoi cell of 0,
//! which keeps the draw uniform for the Haar measure on that cell.

use super::quaternion::in_voronoi_cell;
use super::{AmbientPoint, LaurentSeries, PadicInt, RingDescriptor, RingKind};
use crate::exact::Dyadic;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Row-major matrix of ambient points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMatrix {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<AmbientPoint>,
}

impl PointMatrix {
    pub fn at(&self, row: usize, col: usize) -> &AmbientPoint {
        &self.entries[row * self.n + col]
    }

    /// Column `j` as a vector of length `m`.
    pub fn column(&self, col: usize) -> Vec<&AmbientPoint> {
        (0..self.m).map(|i| self.at(i, col)).collect()
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn unit_dyadic(rng: &mut ChaCha8Rng, bits: u32) -> Dyadic {
    // uniform on [0, 1) with `bits` fractional bits
    let raw = rng.next_u64() >> (64 - bits);
    Dyadic::new(raw as i128, bits)
}

fn centered_dyadic(rng: &mut ChaCha8Rng, bits: u32) -> Dyadic {
    // uniform on [-1/2, 1/2)
    let raw = rng.next_u64() >> (64 - bits);
    Dyadic::new(raw as i128 - (1i128 << (bits - 1)), bits)
}

fn digit(rng: &mut ChaCha8Rng, base: u64) -> u32 {
    // Modulo bias is below 2^-32 for the small bases used here.
    (rng.next_u64() % base) as u32
}

pub fn sample_point(ring: &RingDescriptor, rng: &mut ChaCha8Rng) -> AmbientPoint {
    let bits = ring.precision;
    match ring.kind {
        RingKind::Real => AmbientPoint::Real(unit_dyadic(rng, bits)),
        RingKind::Complex => AmbientPoint::Complex {
            re: unit_dyadic(rng, bits),
            im: unit_dyadic(rng, bits),
        },
        RingKind::Quaternion => loop {
            let x = [
                centered_dyadic(rng, bits),
                centered_dyadic(rng, bits),
                centered_dyadic(rng, bits),
                centered_dyadic(rng, bits),
            ];
            if in_voronoi_cell(&x) {
                return AmbientPoint::Quaternion(x);
            }
        },
        RingKind::Padic => {
            let digits = (0..ring.precision).map(|_| digit(rng, ring.p)).collect();
            AmbientPoint::Padic(PadicInt::from_digits(ring.p, digits))
        }
        RingKind::Laurent => {
            let tail = (0..ring.precision).map(|_| digit(rng, ring.t) as u64).collect();
            AmbientPoint::Laurent(LaurentSeries::from_tail(ring.t, tail))
        }
    }
}

/// Deterministic uniform sample of an `m x n` matrix over the ring's
/// fundamental domain.
pub fn sample_uniform(ring: &RingDescriptor, shape: (usize, usize), seed: u64) -> PointMatrix {
    let (m, n) = shape;
    let mut rng = rng_for(seed, 0);
    let entries = (0..m * n).map(|_| sample_point(ring, &mut rng)).collect();
    PointMatrix { m, n, entries }
}
