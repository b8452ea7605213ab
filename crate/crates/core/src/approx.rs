//! Approximation-function families, weighted quasi-norms, regularity checks,
//! series diagnostics, and the thickening-function balancers used by the
//! divergence arguments.
//!
//! All exponent arithmetic on power-law families happens on exact rational
//! exponents (see [`Monomial`]), so product identities like
//! `prod rho_i(u) = p^{-n} u^{-(m+n)}` are checked as identities, never to a
//! floating tolerance.

use crate::exact::{Monomial, PosReal, Rat};
use crate::rings::IntegerPoint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("query above the table range")]
    OutOfTableRange,
    #[error("invalid approximation spec: {0}")]
    InvalidSpec(String),
}

// ---------------------------------------------------------------------------
// Weights and specs
// ---------------------------------------------------------------------------

/// Positive weights for the quasi-norm `||a||_v = max |a_i|^{1/v_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub v: Vec<Rat>,
}

impl WeightVector {
    pub fn new(v: Vec<Rat>) -> Result<Self, ApproxError> {
        if v.iter().any(|x| !x.is_positive()) {
            return Err(ApproxError::InvalidSpec("weights must be positive".into()));
        }
        Ok(WeightVector { v })
    }

    pub fn ones(len: usize) -> Self {
        WeightVector { v: vec![Rat::one(); len] }
    }

    /// The dual linear-form condition: the first `m` weights sum to `m` and
    /// the trailing `n` are all 1.
    pub fn check_dual_form(&self, m: usize, n: usize) -> Result<(), ApproxError> {
        if self.v.len() != m + n {
            return Err(ApproxError::LengthMismatch(format!(
                "expected {} weights, got {}",
                m + n,
                self.v.len()
            )));
        }
        let head: Rat = self.v[..m].iter().sum();
        if head != Rat::from_integer(m as i64) {
            return Err(ApproxError::InvalidSpec(format!("head weights sum to {head}, not {m}")));
        }
        if self.v[m..].iter().any(|x| *x != Rat::one()) {
            return Err(ApproxError::InvalidSpec("trailing weights must equal 1".into()));
        }
        Ok(())
    }
}

/// Geometric height schedule `u_k = M^k`, `k_min <= k <= k_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub base: u64,
    pub k_min: u32,
    pub k_max: u32,
}

impl Schedule {
    pub fn new(base: u64, k_min: u32, k_max: u32) -> Result<Self, ApproxError> {
        if base < 2 {
            return Err(ApproxError::InvalidSpec("schedule base must be >= 2".into()));
        }
        if k_min > k_max {
            return Err(ApproxError::InvalidSpec("empty schedule".into()));
        }
        (base as u128)
            .checked_pow(k_max)
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(|| {
                ApproxError::InvalidSpec("schedule top exceeds the machine range".into())
            })?;
        Ok(Schedule { base, k_min, k_max })
    }

    pub fn heights(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        (self.k_min..=self.k_max).map(|k| (k, self.base.pow(k)))
    }
}

/// One family of per-coordinate approximation functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiFamily {
    /// `psi_i(q) = q^{-tau_i}`.
    PowerLaw(Vec<Rat>),
    /// Values sampled on the schedule, treated as right-constant in between.
    Tabulated(Vec<Vec<Rat>>),
}

impl PsiFamily {
    pub fn len(&self) -> usize {
        match self {
            PsiFamily::PowerLaw(t) => t.len(),
            PsiFamily::Tabulated(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The weighted approximation data: dimensions, function family, weights, and
/// height schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxSpec {
    pub m: usize,
    pub n: usize,
    pub family: PsiFamily,
    pub weight: Option<WeightVector>,
    pub schedule: Schedule,
}

impl ApproxSpec {
    pub fn power_law(
        m: usize,
        n: usize,
        taus: Vec<Rat>,
        schedule: Schedule,
    ) -> Result<Self, ApproxError> {
        if taus.len() != n {
            return Err(ApproxError::LengthMismatch(format!(
                "need {n} exponents, got {}",
                taus.len()
            )));
        }
        if taus.iter().any(|t| !t.is_positive()) {
            return Err(ApproxError::InvalidSpec("power-law exponents must be positive".into()));
        }
        Ok(ApproxSpec { m, n, family: PsiFamily::PowerLaw(taus), weight: None, schedule })
    }

    /// `psi_i` at a scheduled height `u = M^k`, as exact monomials.
    pub fn psi_at_schedule(&self, k: u32) -> Vec<Monomial> {
        let u = self.schedule.base.pow(k);
        match &self.family {
            PsiFamily::PowerLaw(taus) => {
                taus.iter().map(|t| Monomial::pow_of(u, -*t)).collect()
            }
            PsiFamily::Tabulated(tables) => {
                let idx = (k - self.schedule.k_min) as usize;
                tables.iter().map(|tab| Monomial::from_rat(&tab[idx])).collect()
            }
        }
    }

    /// `psi_i` at an arbitrary positive height (right-constant interpolation
    /// for tabulated families).
    pub fn psi_at_height(&self, h: u64) -> Vec<Monomial> {
        match &self.family {
            PsiFamily::PowerLaw(taus) => {
                taus.iter().map(|t| Monomial::pow_of(h, -*t)).collect()
            }
            PsiFamily::Tabulated(_) => {
                let mut k = self.schedule.k_min;
                while k < self.schedule.k_max && self.schedule.base.pow(k + 1) <= h {
                    k += 1;
                }
                self.psi_at_schedule(k)
            }
        }
    }

    /// `psi_i` at a rational height (half-integral quaternion heights).
    pub fn psi_at(&self, h: &Rat) -> Vec<Monomial> {
        match &self.family {
            PsiFamily::PowerLaw(taus) => {
                let base = Monomial::from_rat(h);
                taus.iter().map(|t| base.pow(-*t)).collect()
            }
            PsiFamily::Tabulated(_) => self.psi_at_height(h.floor().to_integer().max(1) as u64),
        }
    }
}

// ---------------------------------------------------------------------------
// Quasi-norm
// ---------------------------------------------------------------------------

/// `||a||_v = max_i |a_i|^{1/v_i}`, exactly.
///
/// The value is generally irrational, so it is returned in factored
/// (base, exponent) form; comparisons against other quasi-norms or rational
/// thresholds stay exact.
pub fn quasi_norm(a: &[IntegerPoint], v: &WeightVector) -> Result<PosReal, ApproxError> {
    if a.len() != v.v.len() {
        return Err(ApproxError::LengthMismatch(format!(
            "{} coordinates vs {} weights",
            a.len(),
            v.v.len()
        )));
    }
    let mut best: PosReal = PosReal::Zero;
    for (pt, w) in a.iter().zip(&v.v) {
        let h = pt.height();
        if h.is_zero() {
            continue;
        }
        let term = PosReal::Pos(Monomial::from_rat(&h).pow(w.recip()));
        if term.cmp(&best) == Ordering::Greater {
            best = term;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// c-regularity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CRegularity {
    /// Condition holds from `burn_in` onwards with a nonempty tail.
    pub holds_eventually: bool,
    /// First comparison index from which every later comparison passes.
    pub burn_in: usize,
    /// Earliest failing comparison, if any.
    pub first_failure: Option<usize>,
}

/// Check `f(u_{k+1}) <= c * f(u_k)` along a tabulated sequence.
pub fn check_c_regular(values: &[PosReal], c: &Rat) -> CRegularity {
    assert!(!values.is_empty(), "empty table");
    let scale = |x: &PosReal| -> PosReal {
        match x {
            PosReal::Zero => PosReal::Zero,
            PosReal::Pos(m) => PosReal::Pos(m.mul(&Monomial::from_rat(c))),
        }
    };
    let mut first_failure = None;
    let mut last_failure = None;
    for k in 0..values.len().saturating_sub(1) {
        let ok = values[k + 1].cmp(&scale(&values[k])) != Ordering::Greater;
        if !ok {
            first_failure.get_or_insert(k);
            last_failure = Some(k);
        }
    }
    match last_failure {
        None => CRegularity { holds_eventually: true, burn_in: 0, first_failure },
        Some(last) if last + 2 < values.len() => {
            CRegularity { holds_eventually: true, burn_in: last + 1, first_failure }
        }
        Some(_) => CRegularity { holds_eventually: false, burn_in: values.len(), first_failure },
    }
}

// ---------------------------------------------------------------------------
// Series diagnostics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SeriesSums {
    pub direct: f64,
    pub condensed: f64,
    /// Exact values, available when every term is rational (integral total
    /// power-law exponent, or a tabulated family).
    pub direct_exact: Option<BigRational>,
    pub condensed_exact: Option<BigRational>,
}

/// Partial sums of the volume series `sum_{r<=R} r^{m-1} prod psi_i(r)` and
/// of its condensation `sum_{M^k<=R} M^{km} prod psi_i(M^k)`.
pub fn series_partial_sums(spec: &ApproxSpec, r_max: u64) -> Result<SeriesSums, ApproxError> {
    if r_max < spec.schedule.base {
        return Err(ApproxError::InvalidSpec("summation range below the schedule base".into()));
    }
    let m = spec.m as i64;
    let mut direct_f = 0.0f64;
    let mut direct_exact = Some(BigRational::zero());
    for r in 1..=r_max {
        let psis = spec.psi_at_height(r);
        let term = psis
            .iter()
            .fold(Monomial::pow_of(r, Rat::from_integer(m - 1)), |acc, p| acc.mul(p));
        direct_f += term.to_f64();
        if let Some(acc) = direct_exact.as_mut() {
            match term.to_rat() {
                Some(x) => *acc += x,
                None => direct_exact = None,
            }
        }
    }

    let mut condensed_f = 0.0f64;
    let mut condensed_exact = direct_exact.as_ref().map(|_| BigRational::zero());
    for (k, u) in spec.schedule.heights() {
        if u > r_max {
            break;
        }
        let psis = spec.psi_at_schedule(k);
        let term = psis
            .iter()
            .fold(Monomial::pow_of(u, Rat::from_integer(m)), |acc, p| acc.mul(p));
        condensed_f += term.to_f64();
        if let Some(acc) = condensed_exact.as_mut() {
            match term.to_rat() {
                Some(x) => *acc += x,
                None => condensed_exact = None,
            }
        }
    }

    Ok(SeriesSums { direct: direct_f, condensed: condensed_f, direct_exact, condensed_exact })
}

/// Condensation comparison constant for power laws: with
/// `g(r) = r^{m-1-sum tau}` monotone, direct and condensed partial sums agree
/// within `C = M^{|m-1-sum tau| + 1}`.
pub fn condensation_constant(spec: &ApproxSpec) -> Option<f64> {
    match &spec.family {
        PsiFamily::PowerLaw(taus) => {
            let s: Rat = taus.iter().sum();
            let e = (Rat::from_integer(spec.m as i64 - 1) - s).to_f64()?;
            Some((spec.schedule.base as f64).powf(e.abs() + 1.0))
        }
        PsiFamily::Tabulated(_) => None,
    }
}

// ---------------------------------------------------------------------------
// Thickening-function balancers
// ---------------------------------------------------------------------------

/// Per-height balanced thickening data. `phi` are the balanced numerators and
/// `rho_i = phi_i / u` the thickening functions proper; `order` sorts the
/// coordinates by decreasing `psi`, and `split` counts how many sorted
/// coordinates kept their own `psi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoEntry {
    pub k: u32,
    pub u: u64,
    pub order: Vec<usize>,
    pub split: usize,
    pub phi: Vec<Monomial>,
    pub rho: Vec<Monomial>,
}

/// Balanced thickening functions plus the exactness certificate of the
/// product identity `prod rho_i(u) = prefactor * u^{-(m+n)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedRho {
    pub entries: Vec<RhoEntry>,
    /// Leading scheduled heights where the construction does not yet apply.
    pub burn_in: usize,
    pub prefactor: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BalanceOutcome {
    Balanced(BalancedRho),
    /// The volume product stays at or above the solvable threshold at the top
    /// of the schedule, so the target set is everything.
    FullMeasureShortcut,
}

impl BalancedRho {
    /// Verify the product identity and pointwise domination `rho_i >= psi_i/u`
    /// at every tabulated height.
    pub fn verify(&self, spec: &ApproxSpec) -> bool {
        let total = Rat::from_integer((spec.m + spec.n) as i64);
        self.entries.iter().all(|e| {
            let product = e.rho.iter().fold(Monomial::one(), |acc, r| acc.mul(r));
            let target = self.prefactor.mul(&Monomial::pow_of(e.u, -total));
            if product != target {
                return false;
            }
            let psis = spec.psi_at_schedule(e.k);
            let u_inv = Monomial::pow_of(e.u, Rat::from_integer(-1));
            psis.iter()
                .zip(&e.rho)
                .all(|(psi, rho)| rho.cmp(&psi.mul(&u_inv)) != Ordering::Less)
        })
    }
}

/// Balance a two-coordinate simultaneous system (`n = 2`, `m = 1`): keep the
/// larger `psi` when it beats `u^{-1/2}` and pair it with the complementary
/// factor `u^{-1}/psi`; otherwise split symmetrically at `u^{-1/2}`.
pub fn balance_rho_real(spec: &ApproxSpec) -> Result<BalanceOutcome, ApproxError> {
    if spec.n != 2 || spec.m != 1 {
        return Err(ApproxError::InvalidSpec("the two-coordinate balancer needs n=2, m=1".into()));
    }
    let mut entries = Vec::new();
    let mut burn_in = 0usize;
    let mut seen_valid = false;
    let mut last_valid = false;
    for (k, u) in spec.schedule.heights() {
        let psis = spec.psi_at_schedule(k);
        let u_inv = Monomial::pow_of(u, Rat::from_integer(-1));
        let product = psis[0].mul(&psis[1]);
        // solvable regime at this height: psi_1 psi_2 >= u^{-1}
        if product.cmp(&u_inv) != Ordering::Less {
            last_valid = false;
            if !seen_valid {
                burn_in += 1;
            }
            continue;
        }
        last_valid = true;
        seen_valid = true;
        let order = if psis[0].cmp(&psis[1]) == Ordering::Less { vec![1, 0] } else { vec![0, 1] };
        let big = &psis[order[0]];
        let sqrt_u_inv = Monomial::pow_of(u, Rat::new(-1, 2));
        let (phi_big, phi_small, split) = if big.cmp(&sqrt_u_inv) == Ordering::Greater {
            (big.clone(), u_inv.div(big), 1)
        } else {
            (sqrt_u_inv.clone(), sqrt_u_inv.clone(), 0)
        };
        let mut phi = vec![Monomial::one(); 2];
        phi[order[0]] = phi_big;
        phi[order[1]] = phi_small;
        let rho = phi.iter().map(|f| f.mul(&u_inv)).collect();
        entries.push(RhoEntry { k, u, order, split, phi, rho });
    }
    if entries.is_empty() || !last_valid {
        return Ok(BalanceOutcome::FullMeasureShortcut);
    }
    Ok(BalanceOutcome::Balanced(BalancedRho { entries, burn_in, prefactor: Monomial::one() }))
}

/// Balance an `n`-coordinate dual system over Z_p: order the `psi_i`, locate
/// the unique split index `j` at which the levelling value
/// `nu(u, j) = (p^{-n} u^{-m} / prod_{i<=j} psi_(i))^{1/(n-j)}`
/// is sandwiched between `psi_(j)` and `psi_(j+1)`, keep the large
/// coordinates, and level the rest.
pub fn balance_rho_padic(spec: &ApproxSpec, p: u64) -> Result<BalanceOutcome, ApproxError> {
    let n = spec.n;
    if n == 0 {
        return Err(ApproxError::InvalidSpec("need at least one coordinate".into()));
    }
    let p_pow_neg_n = Monomial::pow_of(p, Rat::from_integer(-(n as i64)));
    let mut entries = Vec::new();
    let mut burn_in = 0usize;
    let mut seen_valid = false;
    let mut last_valid = false;
    for (k, u) in spec.schedule.heights() {
        let psis = spec.psi_at_schedule(k);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| match psis[*a].cmp(&psis[*b]) {
            Ordering::Less => Ordering::Greater,
            Ordering::Greater => Ordering::Less,
            Ordering::Equal => a.cmp(b),
        });
        let base = p_pow_neg_n.mul(&Monomial::pow_of(u, Rat::from_integer(-(spec.m as i64))));
        let nu = |j: usize| -> Monomial {
            let mut denom = Monomial::one();
            for i in 0..j {
                denom = denom.mul(&psis[order[i]]);
            }
            base.div(&denom).pow(Rat::new(1, (n - j) as i64))
        };
        // the construction applies iff nu(u, n-1) > psi_(n)
        if nu(n - 1).cmp(&psis[order[n - 1]]) != Ordering::Greater {
            last_valid = false;
            if !seen_valid {
                burn_in += 1;
            }
            continue;
        }
        last_valid = true;
        seen_valid = true;
        let mut found = None;
        for j in 0..n {
            let v = nu(j);
            let left_ok = j == 0 || psis[order[j - 1]].cmp(&v) != Ordering::Less;
            let right_ok = v.cmp(&psis[order[j]]) == Ordering::Greater;
            if left_ok && right_ok {
                if found.is_some() {
                    return Err(ApproxError::InvalidSpec(format!(
                        "split index not unique at height {u}"
                    )));
                }
                found = Some(j);
            }
        }
        let j = found.ok_or_else(|| {
            ApproxError::InvalidSpec(format!("no split index exists at height {u}"))
        })?;
        let level = nu(j);
        let mut phi = vec![Monomial::one(); n];
        for (rank, idx) in order.iter().enumerate() {
            phi[*idx] = if rank < j { psis[*idx].clone() } else { level.clone() };
        }
        let u_inv = Monomial::pow_of(u, Rat::from_integer(-1));
        let rho = phi.iter().map(|f| f.mul(&u_inv)).collect();
        entries.push(RhoEntry { k, u, order, split: j, phi, rho });
    }
    if entries.is_empty() || !last_valid {
        return Ok(BalanceOutcome::FullMeasureShortcut);
    }
    Ok(BalanceOutcome::Balanced(BalancedRho { entries, burn_in, prefactor: p_pow_neg_n }))
}

// ---------------------------------------------------------------------------
// Height inversion
// ---------------------------------------------------------------------------

/// Minimal `v` with `phi(v) >= u` on a tabulated nondecreasing function.
pub fn inverse_height(table: &[(u64, Rat)], u: &Rat) -> Result<u64, ApproxError> {
    assert!(!table.is_empty(), "empty table");
    debug_assert!(table.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    if &table[table.len() - 1].1 < u {
        return Err(ApproxError::OutOfTableRange);
    }
    let mut lo = 0usize;
    let mut hi = table.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if &table[mid].1 >= u {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(table[lo].0)
}
