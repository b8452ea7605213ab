//! Empirical verification harness: truncated-membership testing, Monte Carlo
//! measure scans of the zero-one dichotomies, box-counting dimension
//! estimation on single height layers, and cover-cost series diagnostics.

use crate::approx::{ApproxError, ApproxSpec};
use crate::dimension::{closed_form, ClosedFormCase, DimError, Setting};
use crate::exact::{CachedBound, Dyadic, Monomial, Rat};
use crate::rings::sample::rng_for;
use crate::rings::{PointMatrix, RingDescriptor, RingKind};
use crate::solver::{
    check_vector, shell_height, shell_range, shell_vectors, MulSide, SolutionRecord, SolveStatus,
    SolverError,
};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("cell budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Dim(#[from] DimError),
}

// ---------------------------------------------------------------------------
// Truncated membership
// ---------------------------------------------------------------------------

/// A truncated membership query: does the sampled matrix admit an integer
/// solution up to the height cap?
#[derive(Clone, Debug)]
pub struct MembershipQuery {
    pub ring: RingDescriptor,
    pub matrix: PointMatrix,
    pub spec: ApproxSpec,
    pub height_cap: u64,
}

/// Decide truncated membership by exhaustive search.
///
/// For the archimedean and Laurent rings the thresholds follow the candidate:
/// a vector of height `h` must beat `psi_i(h)`. The p-adic set couples the
/// threshold to the height of the full `(q, p)` vector, so the truncated
/// query tests the cap-level system: thresholds `psi_i(H)/H` with all heights
/// capped at `H^{v_k}`. Both forms are monotone in `H`.
pub fn is_member_truncated(
    query: &MembershipQuery,
) -> Result<(bool, Option<SolutionRecord>), LabError> {
    let ring = &query.ring;
    let cap = Rat::from_integer(query.height_cap as i64);
    match ring.kind {
        RingKind::Padic => {
            if let Some(w) = &query.spec.weight {
                w.check_dual_form(query.matrix.m, query.matrix.n)?;
            }
            let u = query.height_cap;
            let u_inv = Monomial::pow_of(u, Rat::from_integer(-1));
            let bounds: Vec<Monomial> =
                query.spec.psi_at_height(u).iter().map(|p| p.mul(&u_inv)).collect();
            // precision guard: thresholds must clear the floor by two digits
            let floor_guard = Rat::new(1, (ring.p as i64).pow(ring.precision.saturating_sub(2)));
            for b in &bounds {
                if b.cmp_rat(&floor_guard) != Ordering::Greater {
                    return Err(LabError::Solver(SolverError::PrecisionExhausted(format!(
                        "threshold {b} within two digits of the floor p^-{}",
                        ring.precision
                    ))));
                }
            }
            let caps = match &query.spec.weight {
                None => vec![cap; query.matrix.m],
                Some(w) => w.v[..query.matrix.m]
                    .iter()
                    .map(|v| {
                        let m = Monomial::from_rat(&cap).pow(*v);
                        Rat::from_integer(m.floor_scaled(0).to_i64().unwrap_or(i64::MAX))
                    })
                    .collect(),
            };
            let mut sys =
                crate::solver::LinearFormSystem::new(*ring, query.matrix.clone(), bounds, caps)?;
            sys.companion_bounds = Some(vec![cap; query.matrix.n]);
            let rec = crate::solver::solve(&sys, crate::solver::Strategy::FirstFound, None)?;
            let hit = rec.status == SolveStatus::Found;
            Ok((hit, hit.then_some(rec)))
        }
        _ => {
            let caps = vec![cap; query.matrix.m];
            for shell in shell_range(ring, &caps) {
                let h = shell_height(ring, shell);
                let bounds: Vec<CachedBound> =
                    query.spec.psi_at(&h).into_iter().map(CachedBound::new).collect();
                for q in shell_vectors(ring, query.matrix.m, &caps, shell) {
                    if let Some((p, errors)) =
                        check_vector(ring, &query.matrix, &q, &bounds, None, MulSide::Left)?
                    {
                        let rec = SolutionRecord {
                            status: SolveStatus::Found,
                            q,
                            p,
                            errors: errors.iter().map(|e| e.to_norm_value()).collect(),
                            height: h,
                        };
                        return Ok((true, Some(rec)));
                    }
                }
            }
            Ok((false, None))
        }
    }
}

// ---------------------------------------------------------------------------
// Dichotomy scans
// ---------------------------------------------------------------------------

/// Monte Carlo scan configuration. Each spec gets two tables: full membership
/// over `[1, H]` along the ladder, and tail membership over `[H0, top]` with
/// `H0` running along the ladder. The tail view is what makes a convergent
/// family visible at finite truncation.
#[derive(Clone, Debug)]
pub struct DichotomyScan {
    pub specs: Vec<(String, ApproxSpec)>,
    pub samples: u32,
    pub ladder: Vec<u64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub spec_id: String,
    pub h: u64,
    pub hits: u32,
    pub n: u32,
    pub fraction: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScanTables {
    pub full: Vec<ScanRow>,
    pub tail: Vec<ScanRow>,
}

fn binomial_row(spec_id: &str, h: u64, hits: u32, n: u32) -> ScanRow {
    let f = hits as f64 / n as f64;
    let half = 1.96 * (f * (1.0 - f) / n as f64).sqrt();
    ScanRow {
        spec_id: spec_id.to_string(),
        h,
        hits,
        n,
        fraction: f,
        ci_lo: (f - half).max(0.0),
        ci_hi: (f + half).min(1.0),
    }
}

/// Run the scan (simultaneous real setting, `m = 1`). Deterministic for a
/// fixed seed: per-sample substreams, results reduced in sample order.
pub fn measure_scan(scan: &DichotomyScan) -> Result<ScanTables, LabError> {
    if scan.samples < 100 {
        return Err(LabError::InvalidScan("need at least 100 samples".into()));
    }
    if scan.ladder.is_empty() || scan.ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidScan("ladder must be strictly increasing".into()));
    }
    let top = *scan.ladder.last().unwrap();
    let mut tables = ScanTables::default();
    for (id, spec) in &scan.specs {
        if spec.m != 1 {
            return Err(LabError::InvalidScan("measure scans cover the m = 1 setting".into()));
        }
        let n = spec.n;
        let bounds: Vec<Vec<CachedBound>> = (1..=top)
            .map(|q| spec.psi_at_height(q).into_iter().map(CachedBound::new).collect())
            .collect();
        let hit_at = |x: &[Dyadic], q: u64| -> bool {
            let th = &bounds[(q - 1) as usize];
            (0..n).all(|i| th[i].gt(&x[i].mul_int(q as i64).dist_to_int()))
        };
        let mut h_min = vec![0u64; scan.samples as usize];
        let mut h_max = vec![0u64; scan.samples as usize];
        for s in 0..scan.samples {
            let mut rng = rng_for(scan.seed, s as u64 + 1);
            let x: Vec<Dyadic> =
                (0..n).map(|_| Dyadic::new((rng.next_u64() >> 32) as i128, 32)).collect();
            for q in 1..=top {
                if hit_at(&x, q) {
                    h_min[s as usize] = q;
                    break;
                }
            }
            for q in (1..=top).rev() {
                if hit_at(&x, q) {
                    h_max[s as usize] = q;
                    break;
                }
            }
        }
        for &h in &scan.ladder {
            let hits = h_min.iter().filter(|v| **v != 0 && **v <= h).count() as u32;
            tables.full.push(binomial_row(id, h, hits, scan.samples));
            let tail_hits = h_max.iter().filter(|v| **v >= h).count() as u32;
            tables.tail.push(binomial_row(id, h, tail_hits, scan.samples));
        }
    }
    Ok(tables)
}

// ---------------------------------------------------------------------------
// Box counting
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BoxCountEstimate {
    /// `(j, count)` rows with grid size `eps = 2^-j`.
    pub counts: Vec<(u32, u64)>,
    pub slope: f64,
    pub residual: f64,
}

fn fit_loglog(counts: &[(u32, u64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|(j, c)| (*j as f64 * std::f64::consts::LN_2, (*c as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| {
            let fit = my + slope * (p.0 - mx);
            (p.1 - fit) * (p.1 - fit)
        })
        .sum();
    (slope, (rss / n).sqrt())
}

/// Scales centered on the layer's point-count knee `sqrt(P)`,
/// `P = sum (q+1)^2`: the band where the union's covering number transitions
/// from area-limited to point-limited and the count reads off the layer's
/// effective dimension.
pub fn knee_centered_scales(q_lo: u64, q_hi: u64) -> Vec<u32> {
    let p: f64 = (q_lo..=q_hi).map(|q| ((q + 1) * (q + 1)) as f64).sum();
    let center = (0.5 * p.log2()).floor() as u32;
    let lo = center.saturating_sub(3).max(2);
    (lo..=center + 4).collect()
}

const W_BITS: u32 = 60;

/// Exact dyadic bracket of a halfwidth `q^e` (`e` a negative rational) at 60
/// fractional bits; disagreements between the bracket ends resolve through
/// the exact value.
struct WBracket {
    exact: Monomial,
    lo_scaled: i128,
}

impl WBracket {
    fn new(q: u64, e: Rat) -> Self {
        let exact = Monomial::pow_of(q, e);
        let lo = exact.floor_scaled(W_BITS).to_i128().expect("halfwidth overflow");
        WBracket { exact, lo_scaled: lo }
    }

    /// `floor((p/q + sign*w) * 2^j)`, exact.
    fn floor_shifted(&self, p: u64, q: u64, j: u32, sign: i128) -> i128 {
        let base = (p as i128) << W_BITS; // p * 2^60, to be divided by q * 2^60
        let den = (q as i128) << W_BITS;
        let l = self.lo_scaled;
        // with w in [L, L+1)/2^60 the two candidate floors differ by <= 1
        let (na, nb) = if sign > 0 {
            ((base + l * q as i128) << j, (base + (l + 1) * q as i128) << j)
        } else {
            ((base - (l + 1) * q as i128) << j, (base - l * q as i128) << j)
        };
        let fa = na.div_euclid(den);
        let fb = nb.div_euclid(den);
        if fa == fb {
            return fa;
        }
        debug_assert_eq!(fa + 1, fb);
        // decide whether p/q + sign*w >= fb * 2^-j
        let bound = Rat::new(
            (p as i64) * (1i64 << j) - fb as i64 * q as i64,
            q as i64 * (1i64 << j),
        );
        let ge = if sign > 0 {
            // w >= fb 2^-j - p/q, i.e. -bound <= w
            -bound <= Rat::zero() || self.exact.cmp_rat(&-bound) != Ordering::Less
        } else {
            // p/q - fb 2^-j >= w
            bound.is_positive() && self.exact.cmp_rat(&bound) != Ordering::Greater
        };
        if ge {
            fb
        } else {
            fa
        }
    }

    /// Grid columns overlapped by `[p/q - w, p/q + w]` at scale `2^-j`,
    /// clipped to `[0, n-1]`.
    fn index_range(&self, p: u64, q: u64, j: u32, n: u64) -> (u64, u64) {
        let lo = self.floor_shifted(p, q, j, -1).max(0);
        let hi = self.floor_shifted(p, q, j, 1).min(n as i128 - 1);
        (lo as u64, hi.max(lo) as u64)
    }
}

/// Exact grid box count of the single-layer union
/// `U_{q_lo <= q <= q_hi} Delta(R_q, (q^{-1-tau_1}, q^{-1-tau_2}))`
/// in the two-coordinate simultaneous setting. A grid box (half-open) is hit
/// iff it meets one of the closed rectangles; membership is decided in exact
/// arithmetic.
pub fn box_count_dimension(
    case: &ClosedFormCase,
    q_lo: u64,
    q_hi: u64,
    scales: &[u32],
    cell_budget: u64,
) -> Result<BoxCountEstimate, LabError> {
    if case.setting != Setting::TwoDimSimultaneous {
        return Err(LabError::InvalidScan(
            "box counting covers the two-coordinate simultaneous setting".into(),
        ));
    }
    if scales.len() < 4 || scales.iter().any(|j| *j < 1 || *j > 20) {
        return Err(LabError::InvalidScan("need at least 4 scales with 1 <= j <= 20".into()));
    }
    let layers = q_hi.saturating_sub(q_lo) + 1;
    let cells: u64 = scales.iter().map(|j| 1u64 << (2 * j)).sum();
    if cells.saturating_mul(layers) > cell_budget {
        return Err(LabError::BudgetExceeded(format!(
            "{cells} cells x {layers} layers exceed the budget {cell_budget}"
        )));
    }

    let exps: Vec<Rat> = case.tau.iter().map(|t| -(*t + Rat::one())).collect();
    let mut counts = Vec::new();
    for &j in scales {
        let n = 1u64 << j;
        let mut grid = vec![0u64; ((n * n + 63) / 64) as usize];
        let mut marked = 0u64;
        for q in q_lo..=q_hi {
            let w1 = WBracket::new(q, exps[0]);
            let w2 = WBracket::new(q, exps[1]);
            for p1 in 0..=q {
                let (a_lo, a_hi) = w1.index_range(p1, q, j, n);
                for p2 in 0..=q {
                    let (b_lo, b_hi) = w2.index_range(p2, q, j, n);
                    for a in a_lo..=a_hi {
                        for b in b_lo..=b_hi {
                            let idx = a * n + b;
                            let slot = (idx / 64) as usize;
                            let bit = 1u64 << (idx % 64);
                            if grid[slot] & bit == 0 {
                                grid[slot] |= bit;
                                marked += 1;
                            }
                        }
                    }
                }
            }
        }
        counts.push((j, marked));
    }
    let (slope, residual) = fit_loglog(&counts);
    Ok(BoxCountEstimate { counts, slope, residual })
}

/// Calibration: the estimator on the full unit square (every box hit).
pub fn box_count_full_square(scales: &[u32]) -> BoxCountEstimate {
    let counts: Vec<(u32, u64)> = scales.iter().map(|j| (*j, 1u64 << (2 * j))).collect();
    let (slope, residual) = fit_loglog(&counts);
    BoxCountEstimate { counts, slope, residual }
}

/// Calibration: one horizontal line `y = c` thickened by `eps_line`.
pub fn box_count_line(c: &Rat, eps_line: &Rat, scales: &[u32]) -> BoxCountEstimate {
    let counts: Vec<(u32, u64)> = scales
        .iter()
        .map(|j| {
            let n = 1u64 << j;
            let lo = ((c - eps_line) * Rat::from_integer(n as i64)).floor().to_integer().max(0);
            let hi = ((c + eps_line) * Rat::from_integer(n as i64))
                .floor()
                .to_integer()
                .min(n as i64 - 1);
            (*j, n * (hi - lo + 1).max(0) as u64)
        })
        .collect();
    let (slope, residual) = fit_loglog(&counts);
    BoxCountEstimate { counts, slope, residual }
}

// ---------------------------------------------------------------------------
// Covering sums
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailClass {
    Exploding,
    Flat,
}

#[derive(Clone, Debug)]
pub struct CoveringSums {
    /// `(Q, partial sum)` rows on a dyadic subsequence of the range.
    pub rows: Vec<(u64, f64)>,
    pub classification: TailClass,
    /// Ratio of the last two dyadic-window increments.
    pub increment_ratio: f64,
}

/// Cover-cost exponent at Hausdorff parameter `s`, for the cover that
/// witnesses the closed form at its argmin index: the per-height cost is
/// `q^{E(s)}` with
/// `E(s) = c(m+n) - 1 + c n(m-1) e_j + c sum_{e_r<e_j}(e_j - e_r) - s e_j`.
/// The flip `E = -1` happens exactly at the closed-form value.
pub fn covering_exponent(case: &ClosedFormCase, s: &Rat) -> Result<Rat, LabError> {
    let cf = closed_form(case)?;
    let j = cf.argmin[0];
    let (m, n) = case.setting.dims();
    let c = Rat::from_integer(case.setting.coord_dim());
    let e = case.effective();
    let excess: Rat = e.iter().filter(|er| **er < e[j]).map(|er| e[j] - er).sum();
    Ok(c * Rat::from_integer((m + n) as i64) - Rat::one()
        + c * Rat::from_integer((n * (m - 1)) as i64) * e[j]
        + c * excess
        - *s * e[j])
}

/// Partial sums of the cover cost over the height range, with a
/// convergence/divergence classification read off the last two dyadic
/// increments. Laurent heights step geometrically; the other rings sum over
/// every integer height.
pub fn covering_sum(
    case: &ClosedFormCase,
    s: &Rat,
    q_lo: u64,
    q_hi: u64,
) -> Result<CoveringSums, LabError> {
    if !s.is_positive() {
        return Err(LabError::InvalidScan("exponent s must be positive".into()));
    }
    if q_lo < 2 || q_hi < 4 * q_lo {
        return Err(LabError::InvalidScan("need a range spanning at least two octaves".into()));
    }
    let ex = covering_exponent(case, s)?.to_f64().unwrap();
    let heights: Vec<u64> = if matches!(case.setting, Setting::Laurent { .. }) {
        let mut hs = Vec::new();
        let mut h = q_lo.next_power_of_two();
        while h <= q_hi {
            hs.push(h);
            h *= 2;
        }
        hs
    } else {
        (q_lo..=q_hi).collect()
    };

    let mut rows = Vec::new();
    let mut acc = 0.0f64;
    let mut next_mark = q_lo;
    let mut incr_a = 0.0; // increment over (q_hi/4, q_hi/2]
    let mut incr_b = 0.0; // increment over (q_hi/2, q_hi]
    for &q in &heights {
        let term = (q as f64).powf(ex);
        acc += term;
        if q > q_hi / 4 && q <= q_hi / 2 {
            incr_a += term;
        } else if q > q_hi / 2 {
            incr_b += term;
        }
        if q >= next_mark {
            rows.push((q, acc));
            next_mark = next_mark.saturating_mul(2);
        }
    }
    rows.push((q_hi, acc));
    rows.dedup_by_key(|r| r.0);
    let ratio = if incr_a > 0.0 { incr_b / incr_a } else { f64::INFINITY };
    let classification = if ratio > 1.0 { TailClass::Exploding } else { TailClass::Flat };
    Ok(CoveringSums { rows, classification, increment_ratio: ratio })
}

/// Scan `s` on a grid and return the step where the tail classification
/// flips from exploding to flat.
pub fn covering_transition(
    case: &ClosedFormCase,
    s_lo: &Rat,
    s_hi: &Rat,
    step: &Rat,
    q_hi: u64,
) -> Result<(Rat, Rat), LabError> {
    if !(step.is_positive() && s_lo < s_hi) {
        return Err(LabError::InvalidScan("bad transition grid".into()));
    }
    let mut prev: Option<(Rat, TailClass)> = None;
    let mut s = *s_lo;
    while s <= *s_hi {
        let class = covering_sum(case, &s, 2, q_hi)?.classification;
        if let Some((ps, pc)) = prev {
            if pc == TailClass::Exploding && class == TailClass::Flat {
                return Ok((ps, s));
            }
        }
        prev = Some((s, class));
        s += *step;
    }
    Err(LabError::InvalidScan("no transition inside the scanned grid".into()))
}

/// Flat key/value view of the volume-series diagnostics, for CSV emission.
pub fn series_report(spec: &ApproxSpec, r_max: u64) -> Result<Vec<(String, String)>, LabError> {
    let sums = crate::approx::series_partial_sums(spec, r_max)?;
    let fmt_exact = |x: &Option<num_rational::BigRational>| match x {
        Some(v) => format!("{v}"),
        None => String::new(),
    };
    let mut rows = vec![
        ("direct".to_string(), format!("{}", sums.direct)),
        ("condensed".to_string(), format!("{}", sums.condensed)),
        ("direct_exact".to_string(), fmt_exact(&sums.direct_exact)),
        ("condensed_exact".to_string(), fmt_exact(&sums.condensed_exact)),
        ("ratio".to_string(), format!("{}", sums.direct / sums.condensed)),
    ];
    if let Some(c) = crate::approx::condensation_constant(spec) {
        rows.push(("condensation_constant".to_string(), format!("{c}")));
    }
    Ok(rows)
}
