//! The dimension engine: the general weighted mass-transference lower-bound
//! formula, the specialized closed forms for each ambient ring, the
//! exponent-selection rules the lower-bound proofs use, and a brute-force
//! grid optimizer that cross-validates the selection.
//!
//! Everything here is exact rational arithmetic; there is no floating point
//! in this module.

use crate::exact::Rat;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),
}

// ---------------------------------------------------------------------------
// General lower-bound formula
// ---------------------------------------------------------------------------

/// Data for the transference lower bound: per-coordinate Ahlfors exponents
/// `delta`, common scaling exponent `kappa`, thickening exponents `a`, and
/// excess exponents `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionProblem {
    pub delta: Vec<Rat>,
    pub kappa: Rat,
    pub a: Vec<Rat>,
    pub t: Vec<Rat>,
}

impl DimensionProblem {
    pub fn validate(&self) -> Result<(), DimError> {
        let n = self.delta.len();
        if n == 0 || self.a.len() != n || self.t.len() != n {
            return Err(DimError::InvalidProblem("coordinate counts disagree".into()));
        }
        if self.delta.iter().any(|d| !d.is_positive()) {
            return Err(DimError::InvalidProblem("delta must be positive".into()));
        }
        if self.kappa < Rat::zero() || self.kappa >= Rat::one() {
            return Err(DimError::InvalidProblem("kappa must lie in [0, 1)".into()));
        }
        if self.a.iter().any(|x| !x.is_positive()) {
            return Err(DimError::InvalidProblem("a must be positive".into()));
        }
        if self.t.iter().any(|x| x.is_negative()) {
            return Err(DimError::InvalidProblem("t must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One candidate level of the minimization, with its partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtprCandidate {
    pub level: Rat,
    pub value: Rat,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub k3: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtprResult {
    pub value: Rat,
    /// Every candidate achieving the minimum (ties are reported, not broken).
    pub minimizers: Vec<MtprCandidate>,
    pub candidates: Vec<MtprCandidate>,
}

/// Evaluate the transference lower bound
/// `min_A [ sum_{K1} d + sum_{K2} d + kappa sum_{K3} d
///          + (1-kappa)(sum_{K3} a_j d_j - sum_{K2} t_j d_j)/A ]`
/// over the candidate levels `A in {a_i} U {a_i + t_i}`, with
/// `K1 = {j : a_j >= A}`, `K2 = {j : a_j + t_j <= A} \ K1`, `K3` the rest.
pub fn mtpr_lower_bound(prob: &DimensionProblem) -> Result<MtprResult, DimError> {
    prob.validate()?;
    let n = prob.delta.len();
    let mut levels: Vec<Rat> = Vec::new();
    for i in 0..n {
        levels.push(prob.a[i]);
        levels.push(prob.a[i] + prob.t[i]);
    }
    levels.sort();
    levels.dedup();

    let mut candidates = Vec::new();
    for level in levels {
        let mut k1 = Vec::new();
        let mut k2 = Vec::new();
        let mut k3 = Vec::new();
        for j in 0..n {
            if prob.a[j] >= level {
                k1.push(j);
            } else if prob.a[j] + prob.t[j] <= level {
                k2.push(j);
            } else {
                k3.push(j);
            }
        }
        let sum_d = |ix: &[usize]| -> Rat { ix.iter().map(|j| prob.delta[*j]).sum() };
        let sum_ad: Rat = k3.iter().map(|j| prob.a[*j] * prob.delta[*j]).sum();
        let sum_td: Rat = k2.iter().map(|j| prob.t[*j] * prob.delta[*j]).sum();
        let value = sum_d(&k1)
            + sum_d(&k2)
            + prob.kappa * sum_d(&k3)
            + (Rat::one() - prob.kappa) * (sum_ad - sum_td) / level;
        candidates.push(MtprCandidate { level, value, k1, k2, k3 });
    }
    let best = candidates.iter().map(|c| c.value).min().unwrap();
    let minimizers = candidates.iter().filter(|c| c.value == best).cloned().collect();
    Ok(MtprResult { value: best, minimizers, candidates })
}

// ---------------------------------------------------------------------------
// Settings and closed forms
// ---------------------------------------------------------------------------

/// Which ambient ring and linear-form shape a closed form refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Setting {
    RealLinearForms { m: usize, n: usize },
    /// Simultaneous approximation of two reals (`m = 1`, `n = 2`).
    TwoDimSimultaneous,
    Padic { m: usize, n: usize },
    Complex { m: usize, n: usize },
    Quaternion { m: usize, n: usize },
    Laurent { m: usize, n: usize },
}

impl Setting {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Setting::RealLinearForms { m, n } => (m, n),
            Setting::TwoDimSimultaneous => (1, 2),
            Setting::Padic { m, n }
            | Setting::Complex { m, n }
            | Setting::Quaternion { m, n }
            | Setting::Laurent { m, n } => (m, n),
        }
    }

    /// Real dimension of one ambient coordinate.
    pub fn coord_dim(&self) -> i64 {
        match self {
            Setting::Complex { .. } => 2,
            Setting::Quaternion { .. } => 4,
            _ => 1,
        }
    }

    /// Ahlfors exponent of each coordinate measure.
    pub fn delta(&self) -> Rat {
        let (m, _) = self.dims();
        Rat::from_integer(self.coord_dim() * m as i64)
    }

    /// Scaling exponent of the resonant sets: hyperplane sections scale with
    /// `(m-1)/m` in every ring, which degenerates to 0 for points at `m = 1`.
    pub fn kappa(&self) -> Rat {
        let (m, _) = self.dims();
        Rat::new(m as i64 - 1, m as i64)
    }

    pub fn full_dimension(&self) -> Rat {
        let (_, n) = self.dims();
        self.delta() * Rat::from_integer(n as i64)
    }

    /// The real parametrization measures errors against `q^{-tau}` while the
    /// other rings measure against `||q||^{1-tau}`; the shift aligns them.
    fn effective_exponent(&self, tau: &Rat) -> Rat {
        match self {
            Setting::RealLinearForms { .. } | Setting::TwoDimSimultaneous => *tau + Rat::one(),
            _ => *tau,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Setting::RealLinearForms { .. } => "real",
            Setting::TwoDimSimultaneous => "two_dim",
            Setting::Padic { .. } => "padic",
            Setting::Complex { .. } => "complex",
            Setting::Quaternion { .. } => "quaternion",
            Setting::Laurent { .. } => "laurent",
        }
    }
}

/// A closed-form dimension query: a setting plus its exponent vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormCase {
    pub setting: Setting,
    pub tau: Vec<Rat>,
}

impl ClosedFormCase {
    pub fn new(setting: Setting, tau: Vec<Rat>) -> Result<Self, DimError> {
        let (_, n) = setting.dims();
        if tau.len() != n {
            return Err(DimError::InvalidProblem(format!(
                "{} setting needs {} exponents, got {}",
                setting.name(),
                n,
                tau.len()
            )));
        }
        Ok(ClosedFormCase { setting, tau })
    }

    pub fn effective(&self) -> Vec<Rat> {
        self.tau.iter().map(|t| self.setting.effective_exponent(t)).collect()
    }

    /// Structural hypothesis: exponents in the admissible range for the
    /// setting's dimension formula.
    pub fn check_structure(&self) -> Result<(), DimError> {
        match self.setting {
            Setting::RealLinearForms { .. } | Setting::TwoDimSimultaneous => {
                if self.tau.iter().any(|t| !t.is_positive()) {
                    return Err(DimError::HypothesisViolated(
                        "real exponents must be positive".into(),
                    ));
                }
            }
            _ => {
                if self.tau.iter().any(|t| *t <= Rat::one()) {
                    return Err(DimError::HypothesisViolated(format!(
                        "{} exponents must exceed 1",
                        self.setting.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Does the exponent sum clear the solvable-regime threshold? `false`
    /// means every point is approximable and the set is everything.
    pub fn sum_condition_met(&self) -> bool {
        let (m, n) = self.setting.dims();
        let total: Rat = self.tau.iter().sum();
        match self.setting {
            Setting::RealLinearForms { .. } | Setting::TwoDimSimultaneous => {
                total > Rat::from_integer(m as i64)
            }
            Setting::Padic { .. } => total > Rat::from_integer((m + n) as i64),
            _ => total >= Rat::from_integer((m + n) as i64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub value: Rat,
    /// Indices attaining the minimum (all of them).
    pub argmin: Vec<usize>,
    /// Set when the exponent sum misses the threshold: the target set is the
    /// whole space and `value` is its full dimension.
    pub dirichlet_regime: bool,
}

/// Exact evaluation of the setting's closed-form dimension
/// `min_j c [ n(m-1) + (n + m + sum_{e_r < e_j}(e_j - e_r)) / e_j ]`,
/// with `c` the coordinate real dimension and `e` the effective exponents.
pub fn closed_form(case: &ClosedFormCase) -> Result<ClosedForm, DimError> {
    case.check_structure()?;
    let (m, n) = case.setting.dims();
    if !case.sum_condition_met() {
        return Ok(ClosedForm {
            value: case.setting.full_dimension(),
            argmin: (0..n).collect(),
            dirichlet_regime: true,
        });
    }
    let c = Rat::from_integer(case.setting.coord_dim());
    let e = case.effective();
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let excess: Rat = e.iter().filter(|er| **er < e[j]).map(|er| e[j] - er).sum();
        let v = c
            * (Rat::from_integer((n * (m - 1)) as i64)
                + (Rat::from_integer((n + m) as i64) + excess) / e[j]);
        values.push(v);
    }
    let best = *values.iter().min().unwrap();
    let argmin = (0..n).filter(|j| values[*j] == best).collect();
    Ok(ClosedForm { value: best, argmin, dirichlet_regime: false })
}

// ---------------------------------------------------------------------------
// Exponent selection
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionCase {
    /// Every effective exponent reaches `(n+m)/n`: the balanced choice
    /// `a_i = (n+m)/n` works for all coordinates.
    BallToRectangle,
    /// Some exponent falls short: the large coordinates share a common level
    /// and the small ones keep their own exponents.
    RectangleToRectangle,
}

/// The lower-bound proof's thickening exponents for a closed-form case,
/// aligned with the case's coordinate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentSelection {
    pub a: Vec<Rat>,
    pub t: Vec<Rat>,
    pub case_tag: SelectionCase,
    pub kappa: Rat,
    pub delta: Vec<Rat>,
}

impl ExponentSelection {
    pub fn to_problem(&self) -> DimensionProblem {
        DimensionProblem {
            delta: self.delta.clone(),
            kappa: self.kappa,
            a: self.a.clone(),
            t: self.t.clone(),
        }
    }
}

/// Choose the proof's `a`-vector: `a_i = (n+m)/n` in the ball-to-rectangle
/// regime; otherwise find the largest split `u` with
/// `e_u > (n+m - sum_{i>u} e_i)/u =: D >= e_{u+1}` on the sorted exponents
/// and set `a = (D,...,D, e_{u+1},...)`. Always `sum a_i = n+m`, `t = e - a`.
pub fn select_exponents(case: &ClosedFormCase) -> Result<ExponentSelection, DimError> {
    case.check_structure()?;
    if !case.sum_condition_met() {
        return Err(DimError::HypothesisViolated(
            "exponent sum in the solvable regime; no selection exists".into(),
        ));
    }
    let (m, n) = case.setting.dims();
    let e = case.effective();
    let total_needed = Rat::from_integer((n + m) as i64);
    let balanced = total_needed / Rat::from_integer(n as i64);

    let mut a = vec![Rat::zero(); n];
    let tag;
    if e.iter().all(|ei| *ei >= balanced) {
        for slot in a.iter_mut() {
            *slot = balanced;
        }
        tag = SelectionCase::BallToRectangle;
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|x, y| e[*y].cmp(&e[*x]).then(x.cmp(y)));
        let sorted: Vec<Rat> = order.iter().map(|i| e[*i]).collect();
        let suffix = |u: usize| -> Rat { sorted[u..].iter().sum() };
        let mut split = None;
        for u in (1..=n).rev() {
            let level = (total_needed - suffix(u)) / Rat::from_integer(u as i64);
            if sorted[u - 1] > level {
                split = Some((u, level));
                break;
            }
        }
        match split {
            Some((u, level)) => {
                debug_assert!(sorted[u - 1] > level);
                debug_assert!(u == n || level >= sorted[u]);
                for (rank, idx) in order.iter().enumerate() {
                    a[*idx] = if rank < u { level } else { sorted[rank] };
                }
            }
            None => {
                // exponent sum exactly at the threshold: a = e, t = 0
                debug_assert!(e.iter().sum::<Rat>() == total_needed);
                a.clone_from(&e);
            }
        }
        tag = SelectionCase::RectangleToRectangle;
    }

    let t: Vec<Rat> = e.iter().zip(&a).map(|(ei, ai)| ei - ai).collect();
    debug_assert_eq!(a.iter().sum::<Rat>(), total_needed);
    debug_assert!(t.iter().all(|x| !x.is_negative()));
    debug_assert!(a.iter().all(|x| *x >= Rat::one()));
    Ok(ExponentSelection {
        a,
        t,
        case_tag: tag,
        kappa: case.setting.kappa(),
        delta: vec![case.setting.delta(); n],
    })
}

// ---------------------------------------------------------------------------
// Grid optimization
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridOptimum {
    pub value: Rat,
    pub best_a: Vec<Rat>,
    /// The p-adic box constraint `(1, m-1)` is vacuous for `m <= 2`; when
    /// that happens it is reported here and relaxed to `a_i >= 1`.
    pub box_relaxed: bool,
    pub evaluated: usize,
}

fn compositions(n: usize, total: u64) -> Vec<Vec<u64>> {
    fn rec(n: usize, total: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=total {
            prefix.push(x);
            rec(n - 1, total - x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, &mut Vec::new(), &mut out);
    out
}

/// Maximize the transference lower bound over a simplex grid of admissible
/// thickening exponents (`a_i >= 1`, `a_i <= e_i`, `sum a_i = n+m`, plus the
/// p-adic box when it is nonempty). The proof's own selection is always among
/// the candidates, so the optimum never falls below it.
pub fn grid_optimize_lower_bound(
    case: &ClosedFormCase,
    resolution: u64,
) -> Result<GridOptimum, DimError> {
    if resolution < 8 {
        return Err(DimError::InvalidProblem("grid resolution must be at least 8".into()));
    }
    let selection = select_exponents(case)?;
    let (m, n) = case.setting.dims();
    let e = case.effective();
    let kappa = case.setting.kappa();
    let delta = vec![case.setting.delta(); n];

    let (box_hi, box_strict, box_relaxed) = match case.setting {
        Setting::Padic { m, .. } if m > 2 => (Rat::from_integer(m as i64 - 1), true, false),
        Setting::Padic { .. } => (Rat::zero(), false, true),
        _ => (Rat::zero(), false, false),
    };

    let mut candidate_as: Vec<Vec<Rat>> = vec![selection.a.clone()];
    let step = Rat::new(m as i64, resolution as i64);
    for comp in compositions(n, resolution) {
        let a: Vec<Rat> =
            comp.iter().map(|x| Rat::one() + step * Rat::from_integer(*x as i64)).collect();
        let admissible = a.iter().zip(&e).all(|(ai, ei)| {
            ai <= ei && (!box_strict || (*ai > Rat::one() && *ai < box_hi))
        });
        if admissible {
            candidate_as.push(a);
        }
    }

    let mut best: Option<(Rat, Vec<Rat>)> = None;
    let evaluated = candidate_as.len();
    for a in candidate_as {
        let t: Vec<Rat> = e.iter().zip(&a).map(|(ei, ai)| ei - ai).collect();
        let prob = DimensionProblem { delta: delta.clone(), kappa, a: a.clone(), t };
        let value = mtpr_lower_bound(&prob)?.value;
        match &best {
            Some((bv, _)) if value <= *bv => {}
            _ => best = Some((value, a)),
        }
    }
    let (value, best_a) = best.expect("candidate set cannot be empty");
    Ok(GridOptimum { value, best_a, box_relaxed, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use rand::{Rng, SeedableRng};

    fn q(n: i64, d: i64) -> Rat {
        rat(n, d)
    }

    #[test]
    fn mtpr_hand_examples() {
        // candidates give 2, 3/2, 4/3; minimum 4/3 at level a_1 + t_1 = 3
        let prob = DimensionProblem {
            delta: vec![q(1, 1), q(1, 1)],
            kappa: Rat::zero(),
            a: vec![q(3, 2), q(3, 2)],
            t: vec![q(3, 2), q(1, 2)],
        };
        let r = mtpr_lower_bound(&prob).unwrap();
        assert_eq!(r.value, q(4, 3));
        let vals: Vec<Rat> = r.candidates.iter().map(|c| c.value).collect();
        assert!(vals.contains(&q(2, 1)) && vals.contains(&q(3, 2)) && vals.contains(&q(4, 3)));
        assert_eq!(r.minimizers.len(), 1);
        assert_eq!(r.minimizers[0].level, q(3, 1));
        assert_eq!(r.minimizers[0].k2, vec![0, 1]);

        // delta=(2), kappa=1/2, a=(3), t=(1): 2 - (1/2)(2)/4 = 7/4
        let prob = DimensionProblem {
            delta: vec![q(2, 1)],
            kappa: q(1, 2),
            a: vec![q(3, 1)],
            t: vec![q(1, 1)],
        };
        assert_eq!(mtpr_lower_bound(&prob).unwrap().value, q(7, 4));

        // t = 0 gives full dimension at every candidate level
        let prob = DimensionProblem {
            delta: vec![q(3, 1), q(2, 1)],
            kappa: q(1, 3),
            a: vec![q(2, 1), q(1, 1)],
            t: vec![Rat::zero(), Rat::zero()],
        };
        assert_eq!(mtpr_lower_bound(&prob).unwrap().value, q(5, 1));
    }

    #[test]
    fn mtpr_identity_sanity() {
        let prob = DimensionProblem {
            delta: vec![Rat::one(); 4],
            kappa: Rat::zero(),
            a: vec![q(5, 4); 4],
            t: vec![Rat::zero(); 4],
        };
        assert_eq!(mtpr_lower_bound(&prob).unwrap().value, q(4, 1));
    }

    #[test]
    fn closed_form_flagship_values() {
        // real n=m=1, tau=2: 2/(1+2)
        let c =
            ClosedFormCase::new(Setting::RealLinearForms { m: 1, n: 1 }, vec![q(2, 1)]).unwrap();
        assert_eq!(closed_form(&c).unwrap().value, q(2, 3));

        // two-dim simultaneous, tau=(3,2): min{(3+1)/4, 3/3} = 1
        let c = ClosedFormCase::new(Setting::TwoDimSimultaneous, vec![q(3, 1), q(2, 1)]).unwrap();
        let r = closed_form(&c).unwrap();
        assert_eq!(r.value, q(1, 1));
        assert_eq!(r.argmin, vec![0, 1]); // both covers meet at 1

        // two-dim tau=(2,1): min{4/3, 3/2} = 4/3 at j=0
        let c = ClosedFormCase::new(Setting::TwoDimSimultaneous, vec![q(2, 1), q(1, 1)]).unwrap();
        let r = closed_form(&c).unwrap();
        assert_eq!(r.value, q(4, 3));
        assert_eq!(r.argmin, vec![0]);

        // p-adic m=2, n=1, tau=4: 1 + 3/4
        let c = ClosedFormCase::new(Setting::Padic { m: 2, n: 1 }, vec![q(4, 1)]).unwrap();
        assert_eq!(closed_form(&c).unwrap().value, q(7, 4));

        // complex m=n=1: 4/tau
        for tau in [q(2, 1), q(3, 1), q(7, 2)] {
            let c = ClosedFormCase::new(Setting::Complex { m: 1, n: 1 }, vec![tau]).unwrap();
            assert_eq!(closed_form(&c).unwrap().value, q(4, 1) / tau);
        }

        // quaternion m=n=1, tau=3: 4(m+n)/tau = 8/3
        let c = ClosedFormCase::new(Setting::Quaternion { m: 1, n: 1 }, vec![q(3, 1)]).unwrap();
        assert_eq!(closed_form(&c).unwrap().value, q(8, 3));
        // quaternion m=1, n=2, tau=(3,2): min{4(3+1)/3, 4*3/2} = 16/3
        let c =
            ClosedFormCase::new(Setting::Quaternion { m: 1, n: 2 }, vec![q(3, 1), q(2, 1)]).unwrap();
        assert_eq!(closed_form(&c).unwrap().value, q(16, 3));
        let c =
            ClosedFormCase::new(Setting::Laurent { m: 1, n: 2 }, vec![q(3, 1), q(2, 1)]).unwrap();
        assert_eq!(closed_form(&c).unwrap().value, q(4, 3));
    }

    #[test]
    fn closed_form_regimes() {
        // sum below threshold: full dimension, flagged
        let c =
            ClosedFormCase::new(Setting::RealLinearForms { m: 2, n: 1 }, vec![q(3, 2)]).unwrap();
        let r = closed_form(&c).unwrap();
        assert!(r.dirichlet_regime);
        assert_eq!(r.value, q(2, 1));

        // structural violation: tau <= 1 in the p-adic case
        let c = ClosedFormCase::new(Setting::Padic { m: 1, n: 2 }, vec![q(4, 1), q(1, 1)]).unwrap();
        assert!(matches!(closed_form(&c), Err(DimError::HypothesisViolated(_))));

        // boundary sum = m+n is admissible outside the p-adic case and gives
        // full dimension
        let c = ClosedFormCase::new(Setting::Complex { m: 1, n: 2 }, vec![q(19, 10), q(11, 10)])
            .unwrap();
        let r = closed_form(&c).unwrap();
        assert!(!r.dirichlet_regime);
        assert_eq!(r.value, q(4, 1));
    }

    #[test]
    fn closed_form_never_exceeds_full_dimension() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let case = random_case(&mut rng);
            let r = closed_form(&case).unwrap();
            assert!(r.value <= case.setting.full_dimension(), "{case:?}");
        }
    }

    #[test]
    fn select_exponents_examples() {
        // p-adic m=2, n=1, tau=4: ball-to-rectangle with a=(3), t=(1)
        let c = ClosedFormCase::new(Setting::Padic { m: 2, n: 1 }, vec![q(4, 1)]).unwrap();
        let s = select_exponents(&c).unwrap();
        assert_eq!(s.case_tag, SelectionCase::BallToRectangle);
        assert_eq!(s.a, vec![q(3, 1)]);
        assert_eq!(s.t, vec![q(1, 1)]);

        // n=2, m=2, tau=(5, 3/2): split at u=1, level (4 - 3/2)/1 = 5/2
        let c = ClosedFormCase::new(Setting::Padic { m: 2, n: 2 }, vec![q(5, 1), q(3, 2)]).unwrap();
        let s = select_exponents(&c).unwrap();
        assert_eq!(s.case_tag, SelectionCase::RectangleToRectangle);
        assert_eq!(s.a, vec![q(5, 2), q(3, 2)]);
        assert_eq!(s.t, vec![q(5, 2), Rat::zero()]);
        assert_eq!(s.a.iter().sum::<Rat>(), q(4, 1));

        // boundary: every exponent equal to (n+m)/n makes both branches agree
        let c = ClosedFormCase::new(Setting::Complex { m: 1, n: 1 }, vec![q(2, 1)]).unwrap();
        let s = select_exponents(&c).unwrap();
        assert_eq!(s.case_tag, SelectionCase::BallToRectangle);
        assert_eq!(s.a, vec![q(2, 1)]);
        assert_eq!(s.t, vec![Rat::zero()]);
    }

    fn random_case(rng: &mut impl Rng) -> ClosedFormCase {
        loop {
            let m = rng.gen_range(1..=3usize);
            let n = rng.gen_range(1..=3usize);
            let setting = match rng.gen_range(0..6) {
                0 => Setting::RealLinearForms { m, n },
                1 => Setting::TwoDimSimultaneous,
                2 => Setting::Padic { m, n },
                3 => Setting::Complex { m, n },
                4 => Setting::Quaternion { m, n },
                _ => Setting::Laurent { m, n },
            };
            let (_, n) = setting.dims();
            let low = match setting {
                Setting::RealLinearForms { .. } | Setting::TwoDimSimultaneous => Rat::zero(),
                _ => Rat::one(),
            };
            let tau: Vec<Rat> = (0..n)
                .map(|_| {
                    let den = rng.gen_range(1..=8i64);
                    let num = rng.gen_range(1..=6 * den);
                    low + rat(num, den)
                })
                .collect();
            let case = ClosedFormCase::new(setting, tau).unwrap();
            if case.sum_condition_met() && case.check_structure().is_ok() {
                return case;
            }
        }
    }

    #[test]
    fn selection_achieves_closed_form() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..400 {
            let case = random_case(&mut rng);
            let cf = closed_form(&case).unwrap();
            let sel = select_exponents(&case).unwrap();
            let lb = mtpr_lower_bound(&sel.to_problem()).unwrap();
            assert_eq!(lb.value, cf.value, "case {case:?} sel {sel:?}");
        }
    }

    #[test]
    fn grid_never_beats_closed_form_and_contains_selection() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let case = random_case(&mut rng);
            let cf = closed_form(&case).unwrap();
            let sel = select_exponents(&case).unwrap();
            let sel_value = mtpr_lower_bound(&sel.to_problem()).unwrap().value;
            let g = grid_optimize_lower_bound(&case, 8).unwrap();
            assert!(g.value <= cf.value, "grid beat the closed form on {case:?}");
            assert!(g.value >= sel_value, "grid lost the proof's point on {case:?}");
        }
    }

    #[test]
    fn grid_box_relaxation_reported() {
        let c = ClosedFormCase::new(Setting::Padic { m: 2, n: 1 }, vec![q(4, 1)]).unwrap();
        assert!(grid_optimize_lower_bound(&c, 8).unwrap().box_relaxed);
        let c = ClosedFormCase::new(Setting::Padic { m: 4, n: 1 }, vec![q(7, 1)]).unwrap();
        assert!(!grid_optimize_lower_bound(&c, 8).unwrap().box_relaxed);
        assert!(grid_optimize_lower_bound(&c, 4).is_err());
    }

    #[test]
    fn permutation_invariance_and_monotonicity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let case = random_case(&mut rng);
            let (_, n) = case.setting.dims();
            if n < 2 {
                continue;
            }
            let v = closed_form(&case).unwrap().value;
            let mut rev = case.clone();
            rev.tau.reverse();
            assert_eq!(closed_form(&rev).unwrap().value, v);

            // raising one exponent never raises the value
            let mut up = case.clone();
            let j = rng.gen_range(0..n);
            up.tau[j] += rat(1, 2);
            let vu = closed_form(&up).unwrap().value;
            assert!(vu <= v, "monotonicity failure on {case:?}");
        }
    }

    #[test]
    fn closed_form_is_locally_lipschitz() {
        // each branch value is c*(n(m-1) + P(tau_j)/e_j) with P degree one,
        // so a crude per-branch slope bound gives a Lipschitz constant
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..60 {
            let case = random_case(&mut rng);
            let (m, n) = case.setting.dims();
            let v = closed_form(&case).unwrap().value;
            let c = Rat::from_integer(case.setting.coord_dim());
            let e_min = case.effective().into_iter().min().unwrap();
            let s_num = Rat::from_integer((n + m + 2 * n) as i64)
                + case.tau.iter().sum::<Rat>() * Rat::from_integer(n as i64);
            let lip = c * (Rat::from_integer(n as i64) + s_num / (e_min * e_min));
            for eps in [rat(1, 64), rat(1, 256)] {
                let mut up = case.clone();
                up.tau[0] += eps;
                let vu = closed_form(&up).unwrap().value;
                let diff = if vu > v { vu - v } else { v - vu };
                assert!(diff <= lip * eps, "not Lipschitz at {case:?}: {diff} vs {lip}*{eps}");
            }
        }
    }
}
