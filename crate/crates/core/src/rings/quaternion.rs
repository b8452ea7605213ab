//! Hurwitz integer arithmetic in doubled coordinates.
//!
//! A Hurwitz integer `(a + bi + cj + dk)/2` with `a ≡ b ≡ c ≡ d (mod 2)` is
//! stored as the integer quadruple `(a, b, c, d)`. Keeping the doubled form
//! makes products, norms, and parity checks pure integer arithmetic.

use crate::exact::{Dyadic, Rat};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hurwitz {
    /// Doubled coordinates; all four share the same parity.
    pub d: [i64; 4],
}

impl Hurwitz {
    pub const ZERO: Hurwitz = Hurwitz { d: [0, 0, 0, 0] };

    pub fn new(d: [i64; 4]) -> Self {
        let h = Hurwitz { d };
        debug_assert!(h.parity_ok(), "mixed parity in Hurwitz coordinates: {d:?}");
        h
    }

    /// Lipschitz integer (whole coordinates).
    pub fn from_ints(a: i64, b: i64, c: i64, dd: i64) -> Self {
        Hurwitz::new([2 * a, 2 * b, 2 * c, 2 * dd])
    }

    pub fn parity_ok(&self) -> bool {
        let r = self.d[0].rem_euclid(2);
        self.d.iter().all(|x| x.rem_euclid(2) == r)
    }

    pub fn is_zero(&self) -> bool {
        self.d == [0, 0, 0, 0]
    }

    pub fn neg(&self) -> Hurwitz {
        Hurwitz { d: [-self.d[0], -self.d[1], -self.d[2], -self.d[3]] }
    }

    pub fn conj(&self) -> Hurwitz {
        Hurwitz { d: [self.d[0], -self.d[1], -self.d[2], -self.d[3]] }
    }

    pub fn add(&self, o: &Hurwitz) -> Hurwitz {
        Hurwitz::new([
            self.d[0] + o.d[0],
            self.d[1] + o.d[1],
            self.d[2] + o.d[2],
            self.d[3] + o.d[3],
        ])
    }

    /// Quaternion product. In doubled coordinates the raw product is four
    /// times the true value, so the doubled result is the raw product halved;
    /// the congruence condition makes that division exact.
    pub fn mul(&self, o: &Hurwitz) -> Hurwitz {
        let raw = quat_mul_i64(&self.d, &o.d);
        debug_assert!(raw.iter().all(|x| x % 2 == 0));
        Hurwitz::new([raw[0] / 2, raw[1] / 2, raw[2] / 2, raw[3] / 2])
    }

    /// Squared Euclidean norm, `|q|^2 = (a^2+b^2+c^2+d^2)/4` in halves.
    pub fn norm2(&self) -> Rat {
        let s: i64 = self.d.iter().map(|x| x * x).sum();
        Rat::new(s, 4)
    }

    /// Sup norm `max |coordinate|` as a rational (half-integral).
    pub fn sup_norm(&self) -> Rat {
        let m = self.d.iter().map(|x| x.abs()).max().unwrap();
        Rat::new(m, 2)
    }

    pub fn coords(&self) -> [Dyadic; 4] {
        [
            Dyadic::new(self.d[0] as i128, 1),
            Dyadic::new(self.d[1] as i128, 1),
            Dyadic::new(self.d[2] as i128, 1),
            Dyadic::new(self.d[3] as i128, 1),
        ]
    }
}

fn quat_mul_i64(a: &[i64; 4], b: &[i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Quaternion product of ambient (dyadic) quadruples.
pub fn quat_mul_dyadic(a: &[Dyadic; 4], b: &[Dyadic; 4]) -> [Dyadic; 4] {
    [
        a[0].mul(b[0]).sub(a[1].mul(b[1])).sub(a[2].mul(b[2])).sub(a[3].mul(b[3])),
        a[0].mul(b[1]).add(a[1].mul(b[0])).add(a[2].mul(b[3])).sub(a[3].mul(b[2])),
        a[0].mul(b[2]).sub(a[1].mul(b[3])).add(a[2].mul(b[0])).add(a[3].mul(b[1])),
        a[0].mul(b[3]).add(a[1].mul(b[2])).sub(a[2].mul(b[1])).add(a[3].mul(b[0])),
    ]
}

/// The 24 Hurwitz units: `±1, ±i, ±j, ±k` and `(±1±i±j±k)/2`.
pub fn hurwitz_units() -> Vec<Hurwitz> {
    let mut out = Vec::with_capacity(24);
    for axis in 0..4 {
        for sign in [2i64, -2] {
            let mut d = [0i64; 4];
            d[axis] = sign;
            out.push(Hurwitz::new(d));
        }
    }
    for a in [1i64, -1] {
        for b in [1i64, -1] {
            for c in [1i64, -1] {
                for dd in [1i64, -1] {
                    out.push(Hurwitz::new([a, b, c, dd]));
                }
            }
        }
    }
    out
}

fn dist2(x: &[Dyadic; 4], z: &Hurwitz) -> Dyadic {
    let zc = z.coords();
    let mut acc = Dyadic::ZERO;
    for i in 0..4 {
        let d = x[i].sub(zc[i]);
        acc = acc.add(d.mul(d));
    }
    acc
}

fn sup_dist(x: &[Dyadic; 4], z: &Hurwitz) -> Dyadic {
    let zc = z.coords();
    (0..4).map(|i| x[i].sub(zc[i]).abs()).max().unwrap()
}

fn floor_dyadic(x: Dyadic) -> i64 {
    (x.num.div_euclid(1 << x.shift)) as i64
}

/// Candidate Hurwitz points bracketing `x` in both cosets; the nearest point
/// in either metric is always among these 32.
fn candidates(x: &[Dyadic; 4]) -> Vec<Hurwitz> {
    let mut evens: [[i64; 2]; 4] = [[0; 2]; 4];
    let mut odds: [[i64; 2]; 4] = [[0; 2]; 4];
    for i in 0..4 {
        let f = floor_dyadic(x[i]);
        evens[i] = [2 * f, 2 * f + 2];
        // odd doubled coordinates bracketing 2x
        let g = floor_dyadic(x[i].add(Dyadic::new(1, 1)));
        odds[i] = [2 * g - 1, 2 * g + 1];
    }
    let mut out = Vec::with_capacity(32);
    for table in [&evens, &odds] {
        for mask in 0..16u32 {
            let d = [
                table[0][(mask & 1) as usize],
                table[1][((mask >> 1) & 1) as usize],
                table[2][((mask >> 2) & 1) as usize],
                table[3][((mask >> 3) & 1) as usize],
            ];
            out.push(Hurwitz::new(d));
        }
    }
    out
}

fn nearest_by<F: Fn(&[Dyadic; 4], &Hurwitz) -> Dyadic>(x: &[Dyadic; 4], metric: F) -> Hurwitz {
    let mut best: Option<(Dyadic, Hurwitz)> = None;
    for z in candidates(x) {
        let d = metric(x, &z);
        best = match best {
            None => Some((d, z)),
            Some((bd, bz)) => match d.cmp(&bd) {
                Ordering::Less => Some((d, z)),
                Ordering::Equal if z.d < bz.d => Some((d, z)),
                _ => Some((bd, bz)),
            },
        };
    }
    best.unwrap().1
}

/// Euclidean-nearest Hurwitz integer; ties resolved by the smallest doubled
/// coordinate tuple.
pub fn nearest_hurwitz(x: &[Dyadic; 4]) -> Hurwitz {
    nearest_by(x, dist2)
}

/// Nearest Hurwitz integer in the coordinate sup metric.
pub fn nearest_hurwitz_sup(x: &[Dyadic; 4]) -> Hurwitz {
    nearest_by(x, sup_dist)
}

/// Squared Euclidean distance to the Hurwitz lattice.
pub fn hurwitz_dist2(x: &[Dyadic; 4]) -> Dyadic {
    dist2(x, &nearest_hurwitz(x))
}

/// Sup distance to the Hurwitz lattice.
pub fn hurwitz_dist_sup(x: &[Dyadic; 4]) -> Dyadic {
    sup_dist(x, &nearest_hurwitz_sup(x))
}

/// Membership in the closed Voronoi cell of 0 (points at least as close to 0
/// as to any other Hurwitz integer).
pub fn in_voronoi_cell(x: &[Dyadic; 4]) -> bool {
    let own = dist2(x, &Hurwitz::ZERO);
    candidates(x).iter().all(|z| dist2(x, z) >= own)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn dy(n: i128, s: u32) -> Dyadic {
        Dyadic::new(n, s)
    }

    #[test]
    fn units_count_norm_closure() {
        let units = hurwitz_units();
        assert_eq!(units.len(), 24);
        for u in &units {
            assert_eq!(u.norm2(), rat(1, 1));
        }
        for u in &units {
            for v in &units {
                let p = u.mul(v);
                assert!(units.contains(&p), "product {:?} * {:?} left the unit set", u, v);
            }
        }
    }

    #[test]
    fn nearest_prefers_half_shifted_coset_when_closer() {
        // x near 0.4(1+i+j+k): far from every Lipschitz point, close to h/2.
        // 0.4 is not dyadic; 13/32 = 0.40625 rounds identically.
        let x = [dy(13, 5); 4];
        let n = nearest_hurwitz(&x);
        assert_eq!(n, Hurwitz::new([1, 1, 1, 1]));
    }

    #[test]
    fn nearest_matches_exhaustive_search() {
        // brute-force oracle over all Hurwitz points with doubled coords in a box
        let pts = [
            [dy(13, 5), dy(13, 5), dy(13, 5), dy(13, 5)],
            [dy(1, 1), dy(0, 0), dy(0, 0), dy(0, 0)],
            [dy(-7, 4), dy(3, 3), dy(9, 4), dy(1, 2)],
            [dy(5, 3), dy(-5, 3), dy(11, 4), dy(-1, 1)],
        ];
        for x in pts {
            let fast = nearest_hurwitz(&x);
            let mut best: Option<(Dyadic, Hurwitz)> = None;
            for a in -4..=4i64 {
                for b in -4..=4i64 {
                    for c in -4..=4i64 {
                        for dd in -4..=4i64 {
                            if (a - b) % 2 != 0 || (a - c) % 2 != 0 || (a - dd) % 2 != 0 {
                                continue;
                            }
                            let z = Hurwitz::new([a, b, c, dd]);
                            let d = dist2(&x, &z);
                            best = match best {
                                None => Some((d, z)),
                                Some((bd, bz)) => {
                                    if d < bd || (d == bd && z.d < bz.d) {
                                        Some((d, z))
                                    } else {
                                        Some((bd, bz))
                                    }
                                }
                            };
                        }
                    }
                }
            }
            assert_eq!(fast, best.unwrap().1, "mismatch at {:?}", x);
        }
    }

    #[test]
    fn half_point_tie_break_is_lexicographic() {
        // x = 1/2: equidistant from 0 and 1; 0 has the smaller doubled tuple
        let x = [dy(1, 1), dy(0, 0), dy(0, 0), dy(0, 0)];
        assert_eq!(nearest_hurwitz(&x), Hurwitz::ZERO);
        assert_eq!(hurwitz_dist2(&x), dy(1, 2));
    }

    #[test]
    fn norm_multiplicativity() {
        let a = Hurwitz::new([3, 1, -1, 1]);
        let b = Hurwitz::new([2, 4, 0, -2]);
        assert_eq!(a.mul(&b).norm2(), a.norm2() * b.norm2());
        let ab = a.mul(&b);
        assert_eq!(ab.conj(), b.conj().mul(&a.conj()));
    }
}
