//! Exhaustive Dirichlet/Minkowski linear-form solvers over every ring.
//!
//! Candidate vectors `q` are walked shell by shell in nondecreasing sup norm,
//! lexicographically inside a shell, which makes every search deterministic
//! and lets a completed scan certify non-existence. Companion integers `p`
//! come from nearest-integer reduction (height-capped in the p-adic case,
//! where the rational integers are dense).

use crate::approx::{ApproxSpec, BalancedRho, WeightVector};
use crate::exact::{CachedBound, Dyadic, Monomial, Rat};
use crate::rings::poly::enumerate_polys;
use crate::rings::quaternion::nearest_hurwitz_sup;
use crate::rings::sample::{rng_for, sample_point};
use crate::rings::{
    AmbientPoint, FPoly, Hurwitz, IntegerPoint, NormValue, PadicInt, PointMatrix, RingDescriptor,
    RingKind,
};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("threshold below the working precision floor: {0}")]
    PrecisionExhausted(String),
}

/// Which side integer vectors multiply the matrix on. The two variants only
/// differ for quaternions, where multiplication does not commute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MulSide {
    #[default]
    Left,
    Right,
}

/// A weighted system of linear-form inequalities:
/// `dist(q . A_i, integers) < error_bounds[i]` for every column `i`, with
/// `|q_k| <= height_bounds[k]`.
#[derive(Clone, Debug)]
pub struct LinearFormSystem {
    pub ring: RingDescriptor,
    pub matrix: PointMatrix,
    pub error_bounds: Vec<Monomial>,
    pub height_bounds: Vec<Rat>,
    /// Height caps for the companion integers (p-adic only; the other rings
    /// have a well-defined nearest integer).
    pub companion_bounds: Option<Vec<Rat>>,
    /// Optional quasi-norm weights; they reshape the per-coordinate height
    /// caps to `H^{v_k}`.
    pub weight: Option<WeightVector>,
    pub mul_side: MulSide,
}

impl LinearFormSystem {
    pub fn new(
        ring: RingDescriptor,
        matrix: PointMatrix,
        error_bounds: Vec<Monomial>,
        height_bounds: Vec<Rat>,
    ) -> Result<Self, SolverError> {
        let sys = LinearFormSystem {
            ring,
            matrix,
            error_bounds,
            height_bounds,
            companion_bounds: None,
            weight: None,
            mul_side: MulSide::Left,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.ring.validate().map_err(|e| SolverError::InvalidSystem(e.to_string()))?;
        if self.matrix.entries.iter().any(|e| e.kind() != self.ring.kind) {
            return Err(SolverError::InvalidSystem("matrix entries of the wrong ring".into()));
        }
        if self.error_bounds.len() != self.matrix.n {
            return Err(SolverError::InvalidSystem("need one error bound per column".into()));
        }
        if self.height_bounds.len() != self.matrix.m {
            return Err(SolverError::InvalidSystem("need one height bound per row".into()));
        }
        if self.height_bounds.iter().any(|h| !h.is_positive()) {
            return Err(SolverError::InvalidSystem("height bounds must be positive".into()));
        }
        Ok(())
    }

    /// Per-coordinate integer caps after applying the quasi-norm weights.
    fn coordinate_caps(&self) -> Vec<Rat> {
        match &self.weight {
            None => self.height_bounds.clone(),
            Some(w) => self
                .height_bounds
                .iter()
                .zip(&w.v)
                .map(|(h, v)| {
                    let m = Monomial::from_rat(h).pow(*v);
                    Rat::from_integer(m.floor_scaled(0).to_i64().unwrap_or(i64::MAX))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Found,
    /// The full candidate space within the height bounds was enumerated and
    /// contains no solution.
    CertifiedNone,
    /// An external budget stopped the scan before the caps were covered.
    SearchExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// First hit in canonical order; equals `MinHeight` because the scan is
    /// ordered by height and lexicographic inside a shell.
    FirstFound,
    MinError,
    MinHeight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub status: SolveStatus,
    pub q: Vec<IntegerPoint>,
    pub p: Vec<IntegerPoint>,
    pub errors: Vec<NormValue>,
    /// Sup-norm height of `q` (half-integral for quaternions).
    pub height: Rat,
}

impl SolutionRecord {
    fn miss(status: SolveStatus) -> Self {
        SolutionRecord {
            status,
            q: Vec::new(),
            p: Vec::new(),
            errors: Vec::new(),
            height: Rat::zero(),
        }
    }
}

// ---------------------------------------------------------------------------
// Shell enumeration
// ---------------------------------------------------------------------------

/// Integer vectors in `Z^d` with `max |x_k| = s` and `|x_k| <= caps[k]`, in
/// lexicographic order. `canonical` keeps only the representative whose first
/// nonzero coordinate is positive.
pub(crate) fn int_shell(d: usize, s: i64, caps: &[i64], canonical: bool) -> Vec<Vec<i64>> {
    fn rec(
        k: usize,
        d: usize,
        s: i64,
        caps: &[i64],
        touched: bool,
        canonical: bool,
        all_zero: bool,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if k == d {
            if touched {
                out.push(cur.clone());
            }
            return;
        }
        // remaining coordinates must still be able to reach the shell
        if !touched && caps[k..].iter().all(|c| *c < s) {
            return;
        }
        let b = s.min(caps[k]);
        let lo = if canonical && all_zero { 0 } else { -b };
        if k == d - 1 && !touched {
            // only the boundary values +-s complete an untouched prefix
            if b == s {
                let mut boundary = Vec::with_capacity(2);
                if -s >= lo && s != 0 {
                    boundary.push(-s);
                }
                boundary.push(s);
                for x in boundary {
                    cur.push(x);
                    rec(k + 1, d, s, caps, true, canonical, all_zero && x == 0, cur, out);
                    cur.pop();
                }
            }
            return;
        }
        for x in lo..=b {
            cur.push(x);
            rec(k + 1, d, s, caps, touched || x.abs() == s, canonical, all_zero && x == 0, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, s, caps, false, canonical, true, &mut Vec::new(), &mut out);
    out
}

/// All candidate `q` in one shell, in canonical order.
pub(crate) fn shell_vectors(
    ring: &RingDescriptor,
    m: usize,
    caps: &[Rat],
    shell: u64,
) -> Vec<Vec<IntegerPoint>> {
    match ring.kind {
        RingKind::Real | RingKind::Padic => {
            let icaps: Vec<i64> = caps.iter().map(|c| c.floor().to_integer()).collect();
            int_shell(m, shell as i64, &icaps, true)
                .into_iter()
                .map(|v| {
                    v.into_iter()
                        .map(|x| match ring.kind {
                            RingKind::Real => IntegerPoint::Real(x),
                            _ => IntegerPoint::Padic(x),
                        })
                        .collect()
                })
                .collect()
        }
        RingKind::Complex => {
            let mut icaps = Vec::with_capacity(2 * m);
            for c in caps {
                let f = c.floor().to_integer();
                icaps.push(f);
                icaps.push(f);
            }
            int_shell(2 * m, shell as i64, &icaps, false)
                .into_iter()
                .map(|v| v.chunks(2).map(|ab| IntegerPoint::Gauss { re: ab[0], im: ab[1] }).collect())
                .collect()
        }
        RingKind::Quaternion => {
            // shells count the doubled-coordinate sup norm
            let mut icaps = Vec::with_capacity(4 * m);
            for c in caps {
                let f = (c * Rat::from_integer(2)).floor().to_integer();
                icaps.extend_from_slice(&[f, f, f, f]);
            }
            int_shell(4 * m, shell as i64, &icaps, false)
                .into_iter()
                .filter_map(|v| {
                    let mut pts = Vec::with_capacity(m);
                    for ch in v.chunks(4) {
                        let par = ch[0].rem_euclid(2);
                        if ch.iter().any(|x| x.rem_euclid(2) != par) {
                            return None;
                        }
                        pts.push(IntegerPoint::Hurwitz(Hurwitz::new([ch[0], ch[1], ch[2], ch[3]])));
                    }
                    Some(pts)
                })
                .collect()
        }
        RingKind::Laurent => {
            // shell index = common max degree d; caps bound per-coordinate degree
            let d = shell as usize;
            let per_coord: Vec<Vec<FPoly>> = caps
                .iter()
                .map(|c| {
                    let cap_deg = laurent_deg_cap(ring.t, c);
                    match cap_deg {
                        None => vec![FPoly::zero(ring.t)],
                        Some(cd) => enumerate_polys(ring.t, cd.min(d)),
                    }
                })
                .collect();
            let mut out = Vec::new();
            fn rec(
                k: usize,
                m: usize,
                d: usize,
                per_coord: &[Vec<FPoly>],
                touched: bool,
                cur: &mut Vec<FPoly>,
                out: &mut Vec<Vec<IntegerPoint>>,
            ) {
                if k == m {
                    if touched {
                        out.push(cur.iter().cloned().map(IntegerPoint::Poly).collect());
                    }
                    return;
                }
                for p in &per_coord[k] {
                    cur.push(p.clone());
                    rec(k + 1, m, d, per_coord, touched || p.degree() == Some(d), cur, out);
                    cur.pop();
                }
            }
            rec(0, m, d, &per_coord, false, &mut Vec::new(), &mut out);
            out
        }
    }
}

/// Largest admissible degree under a height cap, `None` when even constants
/// are excluded.
fn laurent_deg_cap(t: u64, cap: &Rat) -> Option<usize> {
    let mut v = cap.floor().to_integer();
    if v < 1 {
        return None;
    }
    let mut d = 0usize;
    while v >= t as i64 {
        v /= t as i64;
        d += 1;
    }
    Some(d)
}

/// Shell indices covering the height caps, ascending.
pub(crate) fn shell_range(ring: &RingDescriptor, caps: &[Rat]) -> Vec<u64> {
    let max_cap = caps.iter().max().cloned().unwrap_or_else(Rat::zero);
    match ring.kind {
        RingKind::Real | RingKind::Padic | RingKind::Complex => {
            let s = max_cap.floor().to_integer().max(0) as u64;
            (1..=s).collect()
        }
        RingKind::Quaternion => {
            let s2 = (max_cap * Rat::from_integer(2)).floor().to_integer().max(0) as u64;
            (1..=s2).collect()
        }
        RingKind::Laurent => match laurent_deg_cap(ring.t, &max_cap) {
            None => Vec::new(),
            Some(d) => (0..=d as u64).collect(),
        },
    }
}

pub(crate) fn shell_height(ring: &RingDescriptor, shell: u64) -> Rat {
    match ring.kind {
        RingKind::Quaternion => Rat::new(shell as i64, 2),
        RingKind::Laurent => Rat::from_integer((ring.t as i64).pow(shell as u32)),
        _ => Rat::from_integer(shell as i64),
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Form values `q . A_i` for each column.
pub fn form_values(
    ring: &RingDescriptor,
    matrix: &PointMatrix,
    q: &[IntegerPoint],
    side: MulSide,
) -> Vec<AmbientPoint> {
    (0..matrix.n)
        .map(|i| {
            let mut acc = AmbientPoint::zero(ring);
            for k in 0..matrix.m {
                let term = match side {
                    MulSide::Left => matrix.at(k, i).mul_integer_left(&q[k]),
                    MulSide::Right => matrix.at(k, i).mul_integer_right(&q[k]),
                };
                acc = acc.add(&term);
            }
            acc
        })
        .collect()
}

/// An error value: an exact dyadic, or an ultrametric `base^{-e}` that may
/// sit below the precision floor `base^{-floor}`.
#[derive(Clone, Debug)]
pub enum ErrVal {
    Dyadic(Dyadic),
    Ultra { base: u64, neg_exp: Option<u32>, floor: u32 },
}

impl ErrVal {
    pub fn to_norm_value(&self) -> NormValue {
        match self {
            ErrVal::Dyadic(d) => NormValue { value: d.to_rat(), below_floor: false },
            ErrVal::Ultra { base, neg_exp, floor } => match neg_exp {
                Some(e) => {
                    NormValue { value: Rat::new(1, (*base as i64).pow(*e)), below_floor: false }
                }
                None => NormValue {
                    value: Rat::new(1, (*base as i64).checked_pow(*floor).unwrap_or(i64::MAX)),
                    below_floor: true,
                },
            },
        }
    }

    /// Exact strict comparison against a positive bound; `None` when the
    /// truncation floor makes it undecidable.
    fn lt(&self, bound: &CachedBound) -> Option<bool> {
        match self {
            ErrVal::Dyadic(d) => Some(bound.gt(d)),
            ErrVal::Ultra { base, neg_exp, floor } => {
                let val_rat = |e: u32| Rat::new(1, (*base as i64).pow(e));
                match neg_exp {
                    Some(e) => Some(bound.bound.cmp_rat(&val_rat(*e)) == Ordering::Greater),
                    None => {
                        if bound.bound.cmp_rat(&val_rat(*floor)) == Ordering::Greater {
                            Some(true)
                        } else {
                            None
                        }
                    }
                }
            }
        }
    }

    /// Error-to-bound ratio as an exact positive value, `None` for an exact
    /// zero or a below-floor value (both count as best possible).
    fn ratio(&self, bound: &Monomial) -> Option<Monomial> {
        match self {
            ErrVal::Dyadic(d) => {
                if d.is_zero() {
                    None
                } else {
                    Some(Monomial::from_rat(&d.to_rat()).div(bound))
                }
            }
            ErrVal::Ultra { base, neg_exp, .. } => {
                neg_exp.map(|e| Monomial::pow_of(*base, Rat::from_integer(-(e as i64))).div(bound))
            }
        }
    }
}

/// Nearest companion integer and the resulting error.
pub fn nearest_companion(
    value: &AmbientPoint,
    companion_cap: Option<&Rat>,
) -> (IntegerPoint, ErrVal) {
    match value {
        AmbientPoint::Real(v) => {
            let nint = v.round_nearest_tie_down();
            (IntegerPoint::Real(nint), ErrVal::Dyadic(v.sub(Dyadic::from_int(nint)).abs()))
        }
        AmbientPoint::Complex { re, im } => {
            let a = re.round_nearest_tie_down();
            let b = im.round_nearest_tie_down();
            let err = re.sub(Dyadic::from_int(a)).abs().max(im.sub(Dyadic::from_int(b)).abs());
            (IntegerPoint::Gauss { re: a, im: b }, ErrVal::Dyadic(err))
        }
        AmbientPoint::Quaternion(v) => {
            let h = nearest_hurwitz_sup(v);
            let hc = h.coords();
            let err = (0..4).map(|i| v[i].sub(hc[i]).abs()).max().unwrap();
            (IntegerPoint::Hurwitz(h), ErrVal::Dyadic(err))
        }
        AmbientPoint::Laurent(s) => {
            let (frac, int) = s.split();
            let err = match frac.frac_valuation() {
                Some(l) => {
                    ErrVal::Ultra { base: s.t, neg_exp: Some(l as u32), floor: frac.valid() as u32 }
                }
                None => ErrVal::Ultra { base: s.t, neg_exp: None, floor: frac.valid() as u32 },
            };
            (IntegerPoint::Poly(int), err)
        }
        AmbientPoint::Padic(x) => {
            let cap = companion_cap
                .map(|c| c.floor().to_integer())
                .expect("p-adic evaluation needs a companion cap");
            // best height-capped companion: maximize the valuation of x - a,
            // ties to the smaller integer
            let mut best_a = 0i64;
            let mut best_v = x.valuation();
            for a in -cap..=cap {
                if a == 0 {
                    continue;
                }
                let v = x.sub_int(a).valuation();
                let better = match (v, best_v) {
                    (None, None) => a < best_a,
                    (None, Some(_)) => true,
                    (Some(_), None) => false,
                    (Some(va), Some(vb)) => va > vb || (va == vb && a < best_a),
                };
                if better {
                    best_a = a;
                    best_v = v;
                }
            }
            let err = ErrVal::Ultra {
                base: x.p,
                neg_exp: best_v.map(|v| v as u32),
                floor: x.precision() as u32,
            };
            (IntegerPoint::Padic(best_a), err)
        }
    }
}

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

struct Candidate {
    q: Vec<IntegerPoint>,
    p: Vec<IntegerPoint>,
    errors: Vec<ErrVal>,
    height: Rat,
    badness: Option<Monomial>, // max error/bound ratio; None = all exact hits
}

/// Test one candidate vector against the bounds; `Ok(Some(..))` carries its
/// companions and errors.
pub(crate) fn check_vector(
    ring: &RingDescriptor,
    matrix: &PointMatrix,
    q: &[IntegerPoint],
    bounds: &[CachedBound],
    companions: Option<&[Rat]>,
    side: MulSide,
) -> Result<Option<(Vec<IntegerPoint>, Vec<ErrVal>)>, SolverError> {
    let values = form_values(ring, matrix, q, side);
    let mut p = Vec::with_capacity(matrix.n);
    let mut errors = Vec::with_capacity(matrix.n);
    for (i, v) in values.iter().enumerate() {
        let cap = companions.map(|c| &c[i]);
        let (pi, err) = nearest_companion(v, cap);
        match err.lt(&bounds[i]) {
            Some(true) => {}
            Some(false) => return Ok(None),
            None => {
                return Err(SolverError::PrecisionExhausted(format!(
                    "error bound {} is not decidable at the truncation floor",
                    bounds[i].bound
                )))
            }
        }
        p.push(pi);
        errors.push(err);
    }
    Ok(Some((p, errors)))
}

fn evaluate_candidate(
    sys: &LinearFormSystem,
    bounds: &[CachedBound],
    q: Vec<IntegerPoint>,
    height: Rat,
) -> Result<Option<Candidate>, SolverError> {
    let Some((p, errors)) = check_vector(
        &sys.ring,
        &sys.matrix,
        &q,
        bounds,
        sys.companion_bounds.as_deref(),
        sys.mul_side,
    )?
    else {
        return Ok(None);
    };
    let mut badness: Option<Monomial> = None;
    for (err, b) in errors.iter().zip(bounds) {
        if let Some(r) = err.ratio(&b.bound) {
            badness = Some(match badness {
                None => r,
                Some(cur) if r.cmp(&cur) == Ordering::Greater => r,
                Some(cur) => cur,
            });
        }
    }
    Ok(Some(Candidate { q, p, errors, height, badness }))
}

fn candidate_record(c: Candidate) -> SolutionRecord {
    SolutionRecord {
        status: SolveStatus::Found,
        q: c.q,
        p: c.p,
        errors: c.errors.iter().map(|e| e.to_norm_value()).collect(),
        height: c.height,
    }
}

/// Exhaustive deterministic search. `budget` caps the number of candidate
/// vectors examined; exceeding it yields `SearchExhausted` instead of the
/// certification a completed scan provides.
pub fn solve(
    sys: &LinearFormSystem,
    strategy: Strategy,
    budget: Option<u64>,
) -> Result<SolutionRecord, SolverError> {
    sys.validate()?;
    if sys.ring.kind == RingKind::Padic && sys.companion_bounds.is_none() {
        return Err(SolverError::InvalidSystem("p-adic systems need companion bounds".into()));
    }
    let caps = sys.coordinate_caps();
    let bounds: Vec<CachedBound> =
        sys.error_bounds.iter().map(|b| CachedBound::new(b.clone())).collect();
    let mut examined = 0u64;
    let mut best: Option<Candidate> = None;

    for shell in shell_range(&sys.ring, &caps) {
        let height = shell_height(&sys.ring, shell);
        for q in shell_vectors(&sys.ring, sys.matrix.m, &caps, shell) {
            if let Some(b) = budget {
                if examined >= b {
                    return Ok(best
                        .map(candidate_record)
                        .unwrap_or_else(|| SolutionRecord::miss(SolveStatus::SearchExhausted)));
                }
            }
            examined += 1;
            let Some(cand) = evaluate_candidate(sys, &bounds, q, height)? else {
                continue;
            };
            match strategy {
                Strategy::FirstFound | Strategy::MinHeight => {
                    return Ok(candidate_record(cand));
                }
                Strategy::MinError => {
                    let better = match (&cand.badness, &best) {
                        (_, None) => true,
                        (None, Some(b)) => b.badness.is_some(),
                        (Some(r), Some(b)) => match &b.badness {
                            None => false,
                            Some(cur) => r.cmp(cur) == Ordering::Less,
                        },
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    Ok(best.map(candidate_record).unwrap_or_else(|| SolutionRecord::miss(SolveStatus::CertifiedNone)))
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Precondition {
    Met,
    /// The ring's solvability product condition fails; existence is not
    /// guaranteed and certification is refused.
    Unmet(String),
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub precondition: Precondition,
    pub trials: u32,
    pub found: u32,
    pub failures: Vec<u64>,
}

/// The ring's guaranteed-solvability product condition for strict error
/// bounds `gamma` and height caps `theta`:
///
/// * real and complex: `prod gamma * prod theta >= 1`;
/// * quaternion: `>= 2^{-(m+n)}` (the Hurwitz lattice has covolume 1/2 per
///   coordinate);
/// * Laurent: `>= t^{m+n}`;
/// * p-adic: `prod gamma_eff * prod theta * prod companion >= 1`, where
///   `gamma_eff` is the largest power of `p` strictly below `gamma` — the
///   value the strict comparison actually enforces. A pigeonhole over the
///   `prod (cap_i + 1)` nonnegative candidate grids against the
///   `prod 1/gamma_eff` digit classes guarantees existence exactly on this
///   threshold. Each `gamma_eff * companion_cap < 1` is also required; it
///   forces the leading block of any solution to be nonzero.
pub fn check_product_condition(
    ring: &RingDescriptor,
    error_bounds: &[Monomial],
    height_bounds: &[Rat],
    companion_bounds: Option<&[Rat]>,
) -> Precondition {
    let gamma = error_bounds.iter().fold(Monomial::one(), |acc, g| acc.mul(g));
    let theta =
        height_bounds.iter().fold(Monomial::one(), |acc, h| acc.mul(&Monomial::from_rat(h)));
    let m = height_bounds.len() as i64;
    let n = error_bounds.len() as i64;
    let ok = |cond: bool, msg: &str| {
        if cond {
            Precondition::Met
        } else {
            Precondition::Unmet(msg.to_string())
        }
    };
    match ring.kind {
        RingKind::Real | RingKind::Complex => {
            ok(gamma.mul(&theta).cmp_one() != Ordering::Less, "product of bounds below 1")
        }
        RingKind::Quaternion => {
            let threshold = Monomial::pow_of(2, Rat::from_integer(-(m + n)));
            ok(
                gamma.mul(&theta).cmp(&threshold) != Ordering::Less,
                "product of bounds below 2^{-(m+n)}",
            )
        }
        RingKind::Laurent => {
            let threshold = Monomial::pow_of(ring.t, Rat::from_integer(m + n));
            ok(
                gamma.mul(&theta).cmp(&threshold) != Ordering::Less,
                "product of bounds below t^{m+n}",
            )
        }
        RingKind::Padic => {
            let Some(comp) = companion_bounds else {
                return Precondition::Unmet("p-adic certification needs companion caps".into());
            };
            let mut eff = Monomial::one();
            for g in error_bounds {
                let e = match padic_effective_exponent(ring.p, g, ring.precision) {
                    Some(e) => e,
                    None => {
                        return Precondition::Unmet("error bound below precision floor".into())
                    }
                };
                eff = eff.mul(&Monomial::pow_of(ring.p, Rat::from_integer(-(e as i64))));
            }
            let all_heights = theta
                .mul(&comp.iter().fold(Monomial::one(), |acc, h| acc.mul(&Monomial::from_rat(h))));
            if eff.mul(&all_heights).cmp_one() == Ordering::Less {
                return Precondition::Unmet("effective p-adic product below 1".into());
            }
            for (g, c) in error_bounds.iter().zip(comp) {
                let e = padic_effective_exponent(ring.p, g, ring.precision).unwrap();
                if Rat::new(1, (ring.p as i64).pow(e)) * c >= Rat::one() {
                    return Precondition::Unmet(
                        "companion cap too large for a forced nonzero leading block".into(),
                    );
                }
            }
            Precondition::Met
        }
    }
}

/// Exponent `e` such that the strict test `|x|_p < gamma` means `|x|_p <= p^-e`.
fn padic_effective_exponent(p: u64, gamma: &Monomial, precision: u32) -> Option<u32> {
    for e in 0..=precision {
        let val = Rat::new(1, (p as i64).checked_pow(e)?);
        if gamma.cmp_rat(&val) == Ordering::Greater {
            return Some(e);
        }
    }
    None
}

/// Sample `trials` matrices uniformly and solve each; under a met
/// precondition every trial must produce a solution.
#[allow(clippy::too_many_arguments)]
pub fn certify_minkowski(
    ring: &RingDescriptor,
    m: usize,
    n: usize,
    error_bounds: &[Monomial],
    height_bounds: &[Rat],
    companion_bounds: Option<Vec<Rat>>,
    trials: u32,
    seed: u64,
) -> Result<CertificationReport, SolverError> {
    let pre =
        check_product_condition(ring, error_bounds, height_bounds, companion_bounds.as_deref());
    if let Precondition::Unmet(_) = pre {
        return Ok(CertificationReport { precondition: pre, trials, found: 0, failures: Vec::new() });
    }
    let mut found = 0;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = rng_for(seed, trial as u64 + 1);
        let entries = (0..m * n).map(|_| sample_point(ring, &mut rng)).collect();
        let matrix = PointMatrix { m, n, entries };
        let mut sys =
            LinearFormSystem::new(*ring, matrix, error_bounds.to_vec(), height_bounds.to_vec())?;
        sys.companion_bounds = companion_bounds.clone();
        let rec = solve(&sys, Strategy::FirstFound, None)?;
        if rec.status == SolveStatus::Found {
            found += 1;
        } else {
            failures.push(trial as u64);
        }
    }
    Ok(CertificationReport { precondition: Precondition::Met, trials, found, failures })
}

// ---------------------------------------------------------------------------
// Resonant-neighborhood hit counting
// ---------------------------------------------------------------------------

type R128 = Ratio<i128>;

fn rat_to_r128(r: &Rat) -> R128 {
    R128::new(*r.numer() as i128, *r.denom() as i128)
}

fn dyadic_to_r128(d: &Dyadic) -> R128 {
    R128::new(d.num, 1i128 << d.shift)
}

/// Count companion vectors `p` (per-coordinate heights within `cap`) whose
/// thickened resonant set `prod_i Delta(R_{(q, p_i)}, delta_i)` meets the
/// product ball `B(center, radius)`; the count is the product of exact
/// per-coordinate counts.
///
/// Supported configurations: real systems for any `m` (sup-metric distance to
/// a hyperplane is `|qX - p| / ||q||_1`), complex and quaternion point
/// resonant sets (`m = 1`), and the ultrametric rings for any `m`, where
/// `dist = |qX - p| / ||q||` and radii are quantized down to the norm's value
/// set.
pub fn enumerate_resonant_neighborhood_hits(
    ring: &RingDescriptor,
    q: &[IntegerPoint],
    center: &PointMatrix,
    radius: &Rat,
    thickening: &[Rat],
    height_cap: &Rat,
) -> Result<BigUint, SolverError> {
    if thickening.len() != center.n {
        return Err(SolverError::InvalidSystem("need one thickening per column".into()));
    }
    if thickening.iter().any(|d| d >= radius) {
        return Err(SolverError::InvalidSystem("thickening must stay below the ball radius".into()));
    }
    let mut total = BigUint::one();
    for i in 0..center.n {
        total *= count_column_hits(ring, q, center, i, radius, &thickening[i], height_cap)?;
    }
    Ok(total)
}

fn count_column_hits(
    ring: &RingDescriptor,
    q: &[IntegerPoint],
    center: &PointMatrix,
    col: usize,
    radius: &Rat,
    delta: &Rat,
    cap: &Rat,
) -> Result<BigUint, SolverError> {
    let m = center.m;
    let kind_err = || SolverError::InvalidSystem("point of the wrong ring kind".into());
    let mut hits = 0u64;
    match ring.kind {
        RingKind::Real => {
            let mut qx = R128::zero();
            let mut l1 = 0i128;
            for k in 0..m {
                let IntegerPoint::Real(a) = q[k] else { return Err(kind_err()) };
                let AmbientPoint::Real(x) = center.at(k, col) else { return Err(kind_err()) };
                qx += dyadic_to_r128(x) * R128::from_integer(a as i128);
                l1 += (a as i128).abs();
            }
            if l1 == 0 {
                return Err(SolverError::InvalidSystem("q must be nonzero".into()));
            }
            let reach = (rat_to_r128(radius) + rat_to_r128(delta)) * R128::from_integer(l1);
            let cap_i = cap.floor().to_integer() as i128;
            for p in -cap_i..=cap_i {
                if (qx.clone() - R128::from_integer(p)).abs() <= reach {
                    hits += 1;
                }
            }
        }
        RingKind::Complex => {
            if m != 1 {
                return Err(SolverError::InvalidSystem(
                    "complex hit counting supports point resonant sets (m = 1)".into(),
                ));
            }
            let IntegerPoint::Gauss { re: qa, im: qb } = q[0] else { return Err(kind_err()) };
            if qa == 0 && qb == 0 {
                return Err(SolverError::InvalidSystem("q must be nonzero".into()));
            }
            let AmbientPoint::Complex { re, im } = center.at(0, col) else {
                return Err(kind_err());
            };
            let (xr, xi) = (dyadic_to_r128(re), dyadic_to_r128(im));
            let norm2 = R128::from_integer((qa * qa + qb * qb) as i128);
            let reach = rat_to_r128(radius) + rat_to_r128(delta);
            let cap_i = cap.floor().to_integer();
            for pa in -cap_i..=cap_i {
                for pb in -cap_i..=cap_i {
                    // p/q = p conj(q) / |q|^2
                    let ra = R128::from_integer((pa * qa + pb * qb) as i128) / norm2.clone();
                    let rb = R128::from_integer((pb * qa - pa * qb) as i128) / norm2.clone();
                    let d = (xr.clone() - ra).abs().max((xi.clone() - rb).abs());
                    if d <= reach {
                        hits += 1;
                    }
                }
            }
        }
        RingKind::Quaternion => {
            if m != 1 {
                return Err(SolverError::InvalidSystem(
                    "quaternion hit counting supports point resonant sets (m = 1)".into(),
                ));
            }
            let IntegerPoint::Hurwitz(h) = &q[0] else { return Err(kind_err()) };
            if h.is_zero() {
                return Err(SolverError::InvalidSystem("q must be nonzero".into()));
            }
            let AmbientPoint::Quaternion(x) = center.at(0, col) else { return Err(kind_err()) };
            let xs: Vec<R128> = x.iter().map(dyadic_to_r128).collect();
            let n2_quarters: i128 = h.d.iter().map(|c| (*c as i128) * (*c as i128)).sum();
            let reach = rat_to_r128(radius) + rat_to_r128(delta);
            let cap2 = (cap * Rat::from_integer(2)).floor().to_integer();
            for a in -cap2..=cap2 {
                for b in -cap2..=cap2 {
                    for c in -cap2..=cap2 {
                        for dd in -cap2..=cap2 {
                            let par = a.rem_euclid(2);
                            if b.rem_euclid(2) != par
                                || c.rem_euclid(2) != par
                                || dd.rem_euclid(2) != par
                            {
                                continue;
                            }
                            // q^{-1} p = conj(q) p / |q|^2; the doubled raw
                            // product is 4x the value, |q|^2 = quarters/4, so
                            // each coordinate is raw / (2 * quarters)
                            let prod =
                                quat_mul_raw(&[h.d[0], -h.d[1], -h.d[2], -h.d[3]], &[a, b, c, dd]);
                            let mut dist = R128::zero();
                            for (xc, pc) in xs.iter().zip(prod.iter()) {
                                let coord = R128::new(*pc as i128, 2 * n2_quarters);
                                let d = (xc.clone() - coord).abs();
                                if d > dist {
                                    dist = d;
                                }
                            }
                            if dist <= reach {
                                hits += 1;
                            }
                        }
                    }
                }
            }
        }
        RingKind::Padic => {
            // ultrametric: Delta(R, d) meets B(X, r) iff
            // |qX - p|_p <= ||q||_p max(r, d)
            let mut qx = PadicInt::zero(ring.p, ring.precision as usize);
            let mut qnorm = Rat::zero();
            for k in 0..m {
                let IntegerPoint::Padic(a) = q[k] else { return Err(kind_err()) };
                let AmbientPoint::Padic(x) = center.at(k, col) else { return Err(kind_err()) };
                qx = qx.add(&x.mul_int(a));
                qnorm = qnorm.max(crate::rings::padic_abs_int(a, ring.p));
            }
            if qnorm.is_zero() {
                return Err(SolverError::InvalidSystem("q must be nonzero".into()));
            }
            let reach = qnorm * quantize_down_pow(ring.p, &(*radius).max(*delta));
            let cap_i = cap.floor().to_integer();
            for p in -cap_i..=cap_i {
                let val = match qx.sub_int(p).valuation() {
                    Some(v) => Rat::new(1, (ring.p as i64).pow(v as u32)),
                    None => Rat::zero(), // below floor: certainly within reach
                };
                if val <= reach {
                    hits += 1;
                }
            }
        }
        RingKind::Laurent => {
            let mut value: Option<AmbientPoint> = None;
            let mut qnorm = 0u64;
            for k in 0..m {
                let IntegerPoint::Poly(pk) = &q[k] else { return Err(kind_err()) };
                qnorm = qnorm.max(pk.height());
                let term = center.at(k, col).mul_integer_left(&q[k]);
                value = Some(match value {
                    None => term,
                    Some(v) => v.add(&term),
                });
            }
            if qnorm == 0 {
                return Err(SolverError::InvalidSystem("q must be nonzero".into()));
            }
            let AmbientPoint::Laurent(qx) = value.unwrap() else { unreachable!() };
            let reach =
                Rat::from_integer(qnorm as i64) * quantize_down_pow(ring.t, &(*radius).max(*delta));
            let neg_one = FPoly::new(ring.t, vec![ring.t - 1]);
            let companions = match laurent_deg_cap(ring.t, cap) {
                None => vec![FPoly::zero(ring.t)],
                Some(d) => enumerate_polys(ring.t, d),
            };
            for p in companions {
                let diff_poly = qx.poly.add(&p.mul(&neg_one));
                let val = if !diff_poly.is_zero() {
                    Rat::from_integer(diff_poly.height() as i64)
                } else {
                    match qx.frac_valuation() {
                        Some(l) => Rat::new(1, (ring.t as i64).pow(l as u32)),
                        None => Rat::zero(),
                    }
                };
                if val <= reach {
                    hits += 1;
                }
            }
        }
    }
    Ok(BigUint::from(hits))
}

fn quat_mul_raw(a: &[i64; 4], b: &[i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Largest power of `base` at most `r` (ultrametric radii live in the norm's
/// value set).
fn quantize_down_pow(base: u64, r: &Rat) -> Rat {
    assert!(r.is_positive());
    let b = Rat::from_integer(base as i64);
    let mut v = Rat::one();
    if *r >= Rat::one() {
        while v * b <= *r {
            v *= b;
        }
    } else {
        while v > *r {
            v /= b;
        }
    }
    v
}

// ---------------------------------------------------------------------------
// Empirical ubiquity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UbiquityMode {
    /// Denominators in the scheduled window `[M^{k-1}, M^k]`, uniform
    /// thickening `multiplier * rho_i(u_k)`.
    ScheduleWindow,
    /// All denominators up to `u_k` with the per-layer solvable radii
    /// `phi_i(u_k)/q`; coverage is then total.
    MinkowskiFull,
}

#[derive(Clone, Debug)]
pub struct UbiquityReport {
    pub covered: u32,
    pub samples: u32,
    pub fraction: f64,
    pub window: (u64, u64),
}

/// Monte Carlo estimate of the fraction of the unit square covered by the
/// thickened resonant sets of one scheduled layer (two-coordinate
/// simultaneous setting).
pub fn empirical_ubiquity_check(
    spec: &ApproxSpec,
    rho: &BalancedRho,
    k: u32,
    samples: u32,
    seed: u64,
    multiplier: &Rat,
    mode: UbiquityMode,
) -> Result<UbiquityReport, SolverError> {
    if spec.n != 2 || spec.m != 1 {
        return Err(SolverError::InvalidSystem(
            "the ubiquity check covers the two-coordinate simultaneous setting".into(),
        ));
    }
    let entry = rho
        .entries
        .iter()
        .find(|e| e.k == k)
        .ok_or_else(|| SolverError::InvalidSystem(format!("schedule index {k} not balanced")))?;
    let u = entry.u;
    let window = match mode {
        UbiquityMode::ScheduleWindow => (spec.schedule.base.pow(k - 1), u),
        UbiquityMode::MinkowskiFull => (1, u),
    };
    // per-q thresholds on dist(q x_i, Z)
    let mult = Monomial::from_rat(multiplier);
    let mut thresholds: Vec<[CachedBound; 2]> = Vec::with_capacity((window.1 - window.0 + 1) as usize);
    for q in window.0..=window.1 {
        let t = match mode {
            UbiquityMode::ScheduleWindow => {
                let qm = Monomial::from_u64(q);
                [
                    CachedBound::new(entry.rho[0].mul(&mult).mul(&qm)),
                    CachedBound::new(entry.rho[1].mul(&mult).mul(&qm)),
                ]
            }
            UbiquityMode::MinkowskiFull => [
                CachedBound::new(entry.phi[0].clone()),
                CachedBound::new(entry.phi[1].clone()),
            ],
        };
        thresholds.push(t);
    }

    let mut covered = 0u32;
    for s in 0..samples {
        let mut rng = rng_for(seed, s as u64 + 1);
        let x0 = Dyadic::new((rng.next_u64() >> 32) as i128, 32);
        let x1 = Dyadic::new((rng.next_u64() >> 32) as i128, 32);
        let hit = (window.0..=window.1).zip(&thresholds).any(|(q, th)| {
            let e0 = x0.mul_int(q as i64).dist_to_int();
            if !th[0].gt(&e0) {
                return false;
            }
            let e1 = x1.mul_int(q as i64).dist_to_int();
            th[1].gt(&e1)
        });
        if hit {
            covered += 1;
        }
    }
    Ok(UbiquityReport {
        covered,
        samples,
        fraction: covered as f64 / samples as f64,
        window,
    })
}
