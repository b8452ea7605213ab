//! Property tests for the ring and norm invariants.

use limsup_core::approx::{quasi_norm, WeightVector};
use limsup_core::exact::{rat, Dyadic, Monomial, PosReal, Rat};
use limsup_core::rings::quaternion::{nearest_hurwitz, Hurwitz};
use limsup_core::rings::{
    abs, count_shell, reduce, sample_uniform, AmbientPoint, CountMode, IntegerPoint, PadicInt,
    RingDescriptor,
};
use num_bigint::BigUint;
use num_traits::Zero;
use proptest::prelude::*;

proptest! {
    // ultrametric: |x+y| <= max(|x|, |y|), equality when the norms differ
    #[test]
    fn padic_strong_triangle(a in -50_000i64..50_000, b in -50_000i64..50_000) {
        let p = 5u64;
        let x = PadicInt::from_int(p, 12, a);
        let y = PadicInt::from_int(p, 12, b);
        let nx = abs(&AmbientPoint::Padic(x.clone()));
        let ny = abs(&AmbientPoint::Padic(y.clone()));
        let ns = abs(&AmbientPoint::Padic(x.add(&y)));
        let m = nx.value.max(ny.value);
        prop_assert!(ns.value <= m || ns.below_floor);
        if nx.value != ny.value && !nx.below_floor && !ny.below_floor {
            prop_assert_eq!(ns.value, m);
        }
    }

    #[test]
    fn laurent_strong_triangle(a in proptest::collection::vec(0u64..3, 8),
                               b in proptest::collection::vec(0u64..3, 8)) {
        use limsup_core::rings::LaurentSeries;
        let x = AmbientPoint::Laurent(LaurentSeries::from_tail(3, a));
        let y = AmbientPoint::Laurent(LaurentSeries::from_tail(3, b));
        let nx = abs(&x);
        let ny = abs(&y);
        let ns = abs(&x.add(&y));
        let m = nx.value.max(ny.value);
        prop_assert!(ns.value <= m || ns.below_floor);
        if nx.value != ny.value && !nx.below_floor && !ny.below_floor {
            prop_assert_eq!(ns.value, m);
        }
    }

    // the Hurwitz rounding never loses to plain componentwise rounding
    #[test]
    fn hurwitz_beats_lipschitz(coords in proptest::collection::vec((-64i128..64, 0u32..6), 4)) {
        let x: Vec<Dyadic> = coords.iter().map(|(n, s)| Dyadic::new(*n, *s)).collect();
        let x: [Dyadic; 4] = [x[0], x[1], x[2], x[3]];
        let h = nearest_hurwitz(&x);
        let dist2 = |z: &Hurwitz| -> Dyadic {
            let zc = z.coords();
            (0..4).fold(Dyadic::ZERO, |acc, i| {
                let d = x[i].sub(zc[i]);
                acc.add(d.mul(d))
            })
        };
        let lips = Hurwitz::from_ints(
            x[0].round_nearest_tie_down(),
            x[1].round_nearest_tie_down(),
            x[2].round_nearest_tie_down(),
            x[3].round_nearest_tie_down(),
        );
        prop_assert!(dist2(&h) <= dist2(&lips));
    }

    // quaternion norm multiplicativity and conjugation anti-homomorphism
    #[test]
    fn quaternion_norm_multiplicative(a in proptest::collection::vec(-9i64..=9, 4),
                                      b in proptest::collection::vec(-9i64..=9, 4)) {
        let fix = |v: &[i64]| -> Hurwitz {
            let par = v[0].rem_euclid(2);
            let w: Vec<i64> = v.iter().map(|x| if x.rem_euclid(2) == par { *x } else { *x + 1 }).collect();
            Hurwitz::new([w[0], w[1], w[2], w[3]])
        };
        let x = fix(&a);
        let y = fix(&b);
        prop_assert_eq!(x.mul(&y).norm2(), x.norm2() * y.norm2());
        prop_assert_eq!(x.mul(&y).conj(), y.conj().mul(&x.conj()));
    }

    // quasi-norm scaling: multiplying coordinate i by c scales its
    // contribution by |c|^{1/v_i} (recomputed exactly, not assumed)
    #[test]
    fn quasi_norm_scaling(a in 1i64..50, b in 1i64..50, c in 2i64..6) {
        let v = WeightVector::new(vec![rat(3, 2), rat(1, 2)]).unwrap();
        let base = [IntegerPoint::Real(a), IntegerPoint::Real(0)];
        let scaled = [IntegerPoint::Real(a * c), IntegerPoint::Real(0)];
        let n0 = quasi_norm(&base, &v).unwrap();
        let n1 = quasi_norm(&scaled, &v).unwrap();
        let (PosReal::Pos(m0), PosReal::Pos(m1)) = (n0, n1) else {
            return Err(TestCaseError::fail("unexpected zero"));
        };
        let factor = Monomial::from_u64(c as u64).pow(rat(2, 3)); // 1/v_1
        prop_assert_eq!(m1, m0.mul(&factor));
        let _ = b;
    }
}

#[test]
fn quasi_norm_zero_iff_zero() {
    let v = WeightVector::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
    let zero = [IntegerPoint::Real(0), IntegerPoint::Real(0)];
    assert_eq!(quasi_norm(&zero, &v).unwrap(), PosReal::Zero);
    let nonzero = [IntegerPoint::Real(0), IntegerPoint::Real(3)];
    assert!(quasi_norm(&nonzero, &v).unwrap() != PosReal::Zero);
}

/// Exact shells sum to the closed ball count, and both match brute force,
/// for every ring at small heights.
#[test]
fn shell_counts_sum_and_match_brute_force() {
    for ring in [
        RingDescriptor::real(),
        RingDescriptor::padic(3, 8),
        RingDescriptor::complex(),
        RingDescriptor::quaternion(),
        RingDescriptor::laurent(2, 8),
    ] {
        for m in 1..=2usize {
            // heights ascending through the ring's value set, up to 4
            let heights: Vec<Rat> = match ring.kind {
                limsup_core::rings::RingKind::Quaternion => {
                    (1..=8).map(|s| Rat::new(s, 2)).collect()
                }
                limsup_core::rings::RingKind::Laurent => {
                    vec![Rat::from_integer(1), Rat::from_integer(2), Rat::from_integer(4)]
                }
                _ => (1..=4).map(Rat::from_integer).collect(),
            };
            let mut total = count_shell(&ring, m, Rat::zero(), CountMode::Exact).unwrap();
            for h in &heights {
                total += count_shell(&ring, m, *h, CountMode::Exact).unwrap();
                let at_most = count_shell(&ring, m, *h, CountMode::AtMost).unwrap();
                assert_eq!(total, at_most, "{:?} m={m} h={h}", ring.kind);
            }
        }
    }
    // real brute force for the record
    let c = count_shell(&RingDescriptor::real(), 2, rat(4, 1), CountMode::Exact).unwrap();
    let mut brute = 0u32;
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            if a.abs().max(b.abs()) == 4 {
                brute += 1;
            }
        }
    }
    assert_eq!(c, BigUint::from(brute));
}

/// Solution records reproduce their own errors from scratch.
#[test]
fn found_records_recompute_exactly() {
    use limsup_core::exact::Monomial;
    use limsup_core::solver::{
        form_values, nearest_companion, solve, LinearFormSystem, MulSide, SolveStatus, Strategy,
    };
    for (ring, heights) in [
        (RingDescriptor::real(), vec![rat(6, 1), rat(6, 1)]),
        (RingDescriptor::complex(), vec![rat(3, 1), rat(3, 1)]),
        (RingDescriptor::quaternion(), vec![rat(1, 1), rat(1, 1)]),
    ] {
        for seed in 0..10u64 {
            let matrix = sample_uniform(&ring, (2, 1), 900 + seed);
            let sys = LinearFormSystem::new(
                ring,
                matrix.clone(),
                vec![Monomial::from_rat(&rat(1, 3))],
                heights.clone(),
            )
            .unwrap();
            let rec = solve(&sys, Strategy::MinError, None).unwrap();
            if rec.status != SolveStatus::Found {
                continue;
            }
            let values = form_values(&ring, &matrix, &rec.q, MulSide::Left);
            for (i, v) in values.iter().enumerate() {
                let (p, err) = nearest_companion(v, None);
                assert_eq!(p, rec.p[i]);
                assert_eq!(err.to_norm_value(), rec.errors[i]);
            }
        }
    }
}

#[test]
fn reduce_idempotence_across_samples() {
    for ring in [
        RingDescriptor::real(),
        RingDescriptor::complex(),
        RingDescriptor::quaternion(),
        RingDescriptor::laurent(3, 8),
    ] {
        let m = sample_uniform(&ring, (2, 2), 31);
        for x in &m.entries {
            let (frac, _) = reduce(x);
            let (frac2, int2) = reduce(&frac);
            assert!(int2.is_zero());
            assert_eq!(frac, frac2);
        }
    }
}
