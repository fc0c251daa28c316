//! Subspace computations: bracket and adjoint-orbit spans, escaping
//! adjoints, invariant directions of sublevel sets and vertical halfspaces.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::algebra::{AlgVector, StratifiedAlgebra};
use crate::error::{Error, Hypothesis, Result};
use crate::fields::{apply_field, realize_left_invariant, SublevelSet};
use crate::group::Group;
use crate::nonneg::{polynomial_nonneg, NonnegVerdict};
use crate::poly::Polynomial;
use crate::ring::{int, rational_to_f64, Rational};
use crate::sampling;
use crate::subspace::{nullspace, Subspace};

pub fn is_subalgebra(a: &StratifiedAlgebra, s: &Subspace) -> bool {
    let b = s.basis();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let c = AlgVector::new(a.bracket_coords(&b[i].coeffs, &b[j].coeffs));
            if !s.contains(&c) {
                return false;
            }
        }
    }
    true
}

/// Smallest subalgebra containing `s`.
pub fn lie_closure(a: &StratifiedAlgebra, s: &Subspace) -> Subspace {
    let mut cur = s.clone();
    loop {
        let b = cur.basis().to_vec();
        let mut next = cur.clone();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let c = AlgVector::new(a.bracket_coords(&b[i].coeffs, &b[j].coeffs));
                if !next.contains(&c) {
                    next = next.with_vector(&c);
                }
            }
        }
        if next.dim() == cur.dim() {
            return cur;
        }
        cur = next;
    }
}

/// `[g', x] + [g', [g', x]] + ...` to saturation.
pub fn iterated_bracket_span(a: &StratifiedAlgebra, gprime: &Subspace, x: &AlgVector) -> Result<Subspace> {
    a.check_len(x.len())?;
    a.check_len(gprime.ambient())?;
    if !is_subalgebra(a, gprime) {
        return Err(Error::NotSubalgebra);
    }
    let n = a.dim();
    let mut total = Subspace::zero(n);
    let mut level = vec![x.clone()];
    for _ in 0..a.step().max(1) {
        let mut next = Vec::new();
        for y in gprime.basis() {
            for v in &level {
                let c = AlgVector::new(a.bracket_coords(&y.coeffs, &v.coeffs));
                if !c.is_zero() {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let span = Subspace::span(n, &next);
        total = total.join(&span);
        level = span.basis().to_vec();
    }
    Ok(total)
}

/// Span of `Ad_exp(y) x` over sampled `y` in `g'`: basis multiples with
/// parameters `1..=3`, then seeded random combinations until the dimension
/// has been stable for `samples` consecutive draws.
pub fn ad_orbit_span(a: &StratifiedAlgebra, gprime: &Subspace, x: &AlgVector, samples: usize, seed: u64) -> Subspace {
    let n = a.dim();
    let mut span = Subspace::span(n, std::slice::from_ref(x));
    let basis = gprime.basis();
    if basis.is_empty() {
        return span;
    }
    for b in basis {
        for k in 1..=3 {
            let y = b.scale(&int(k));
            span = span.with_vector(&AlgVector::new(a.adjoint_exp_coords(&y.coeffs, &x.coeffs)));
        }
    }
    let mut rng = sampling::rng(seed);
    let mut stable = 0;
    while stable < samples && span.dim() < n {
        let coeffs = sampling::rationals(&mut rng, basis.len(), 5, 4);
        let mut y = AlgVector::new(vec![Rational::zero(); n]);
        for (c, b) in coeffs.iter().zip(basis) {
            y = y.add(&b.scale(c));
        }
        let before = span.dim();
        span = span.with_vector(&AlgVector::new(a.adjoint_exp_coords(&y.coeffs, &x.coeffs)));
        if span.dim() == before {
            stable += 1;
        } else {
            stable = 0;
        }
    }
    span
}

/// Which hypotheses of the escaping-adjoint search hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct EscapeHypotheses {
    pub subalgebra: bool,
    pub codimension: bool,
    pub not_in_subalgebra: bool,
    pub generation: bool,
}

impl EscapeHypotheses {
    pub fn check(a: &StratifiedAlgebra, gprime: &Subspace, x: &AlgVector) -> Self {
        let w = gprime.with_vector(x);
        Self {
            subalgebra: is_subalgebra(a, gprime),
            codimension: gprime.dim() + 2 <= a.dim(),
            not_in_subalgebra: !gprime.contains(x),
            generation: lie_closure(a, &w).dim() == a.dim(),
        }
    }

    pub fn first_failure(&self) -> Option<Hypothesis> {
        if !self.subalgebra {
            Some(Hypothesis::Subalgebra)
        } else if !self.codimension {
            Some(Hypothesis::Codimension)
        } else if !self.not_in_subalgebra {
            Some(Hypothesis::NotInSubalgebra)
        } else if !self.generation {
            Some(Hypothesis::Generation)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapingAdjoint {
    pub y: AlgVector,
    /// `Ad_exp(y) x`.
    pub image: AlgVector,
    /// Reduction of the image against `W = g' + Rx`; nonzero certifies the
    /// image is outside `W`.
    pub residual: AlgVector,
    pub attempts: usize,
    pub hypotheses: EscapeHypotheses,
}

pub const ESCAPE_ATTEMPTS: usize = 1000;

/// Finds `y` in `g'` with `Ad_exp(y) x` outside `g' + Rx`.
pub fn find_escaping_adjoint(
    a: &StratifiedAlgebra,
    gprime: &Subspace,
    x: &AlgVector,
    seed: u64,
) -> Result<EscapingAdjoint> {
    a.check_len(x.len())?;
    a.check_len(gprime.ambient())?;
    let hypotheses = EscapeHypotheses::check(a, gprime, x);
    if let Some(h) = hypotheses.first_failure() {
        return Err(Error::Hypothesis(h));
    }
    let w = gprime.with_vector(x);
    let basis = gprime.basis();
    let mut candidates: Vec<AlgVector> = Vec::new();
    for k in [1, 2] {
        candidates.extend(basis.iter().map(|b| b.scale(&int(k))));
    }
    let mut rng = sampling::rng(seed);
    let mut attempts = 0;
    let mut next = 0;
    while attempts < ESCAPE_ATTEMPTS {
        let y = if next < candidates.len() {
            next += 1;
            candidates[next - 1].clone()
        } else {
            let coeffs = sampling::rationals(&mut rng, basis.len(), 5, 4);
            basis
                .iter()
                .zip(&coeffs)
                .fold(a.zero(), |acc, (b, c)| acc.add(&b.scale(c)))
        };
        attempts += 1;
        let image = AlgVector::new(a.adjoint_exp_coords(&y.coeffs, &x.coeffs));
        let residual = w.residual(&image);
        if !residual.is_zero() {
            return Ok(EscapingAdjoint {
                y,
                image,
                residual,
                attempts,
                hypotheses,
            });
        }
    }
    Err(Error::SearchExhausted { attempts })
}

/// Ideal-membership check of `X_j P` for one basis direction.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealCheck {
    pub index: usize,
    /// `None` when `P` is not linear with constant coefficient in any
    /// variable, so the division test does not apply.
    pub in_ideal: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantDirections {
    /// `{v : X_v P = 0}` identically.
    pub subspace: Subspace,
    /// `X_j P` for each basis direction.
    pub derivatives: Vec<Polynomial>,
    /// Weaker certificate: `X_j P` divisible by `P`.
    pub ideal: Vec<IdealCheck>,
}

pub fn invariant_directions(e: &SublevelSet) -> Result<InvariantDirections> {
    let g = &e.group;
    let n = g.dim();
    let a = g.algebra();
    let derivatives: Vec<Polynomial> = (0..n)
        .map(|j| Ok(apply_field(&realize_left_invariant(g, &a.basis(j))?, &e.poly)))
        .collect::<Result<_>>()?;
    let monomials: BTreeSet<Vec<u32>> = derivatives
        .iter()
        .flat_map(|d| d.terms().map(|(m, _)| m.clone()))
        .collect();
    let rows: Vec<Vec<Rational>> = monomials
        .iter()
        .map(|m| derivatives.iter().map(|d| d.coefficient(m)).collect())
        .collect();
    let sols: Vec<AlgVector> = nullspace(&rows, n).into_iter().map(AlgVector::new).collect();
    let subspace = Subspace::span(n, &sols);
    let pivot = (0..e.poly.support_len())
        .find(|&i| e.poly.degree_in(i) == 1 && e.poly.coeff_of_power(i, 1).as_constant().is_some());
    let ideal = derivatives
        .iter()
        .enumerate()
        .map(|(index, d)| IdealCheck {
            index,
            in_ideal: pivot
                .and_then(|i| d.remainder_mod_linear(&e.poly, i))
                .map(|r| r.is_zero()),
        })
        .collect();
    Ok(InvariantDirections {
        subspace,
        derivatives,
        ideal,
    })
}

/// `H_{c,nu} = {sum_i nu_i x_i <= c}` in the horizontal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceSpec {
    /// Offset for the raw normal; `None` when `P` is not affine in the
    /// horizontal coordinates.
    pub c: Option<Rational>,
    /// Normal scaled so its first nonzero entry is `+1` or `-1`.
    pub nu: Vec<Rational>,
    pub nu_unit: Vec<f64>,
    /// Offset for the unit normal.
    pub c_unit: Option<f64>,
}

impl HalfspaceSpec {
    pub fn from_raw(nu: Vec<Rational>, c: Option<Rational>) -> Self {
        let norm = nu.iter().map(|q| rational_to_f64(q).powi(2)).sum::<f64>().sqrt();
        let nu_unit = nu.iter().map(|q| rational_to_f64(q) / norm).collect();
        let c_unit = c.as_ref().map(|c| rational_to_f64(c) / norm);
        Self { c, nu, nu_unit, c_unit }
    }
}

/// Scales `v` so that its first nonzero entry has absolute value one,
/// keeping the orientation.
pub fn normalize_direction(v: &[Rational]) -> Vec<Rational> {
    match v.iter().find(|q| !q.is_zero()) {
        Some(f) => {
            let s = f.abs();
            v.iter().map(|q| q / &s).collect()
        }
        None => v.to_vec(),
    }
}

/// Horizontal normal of a set whose horizontal derivative is a single
/// sign-definite direction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantNormal {
    pub nu: Vec<Rational>,
    /// `X_nu P`, certified nonnegative.
    pub derivative: Polynomial,
    pub verdict: NonnegVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub invariants: InvariantDirections,
    pub halfspace: Option<HalfspaceSpec>,
    /// First failed condition, when not a halfspace.
    pub diagnosis: Option<String>,
    pub constant_normal: Option<ConstantNormal>,
    /// `P` weighted homogeneous, so `delta_r E = E` for all `r > 0`.
    pub cone: bool,
}

pub fn classify_vertical_halfspace(e: &SublevelSet) -> Result<Classification> {
    let g = &e.group;
    let a = g.algebra();
    let n = a.dim();
    let invariants = invariant_directions(e)?;
    let inv = &invariants.subspace;
    let horiz = a.layer_indices(1);
    let m = horiz.len();
    let cone = e.poly.weighted_homogeneous_degree(a.weights()).is_some();

    let constant_normal = constant_normal(g, e, inv, &horiz)?;
    let mut diagnosis = None;
    if inv.codim() != 1 {
        diagnosis = Some(format!("invariant subspace has codimension {}", inv.codim()));
    } else if let Some(j) = (0..n).find(|&j| a.weights()[j] >= 2 && !inv.contains(&a.basis(j))) {
        diagnosis = Some(format!("vertical direction X{} is not invariant", j + 1));
    } else if inv.intersect_coordinates(&horiz).dim() + 1 != m {
        diagnosis = Some("horizontal invariant directions do not have codimension 1".into());
    } else if constant_normal.is_none() {
        diagnosis = Some("remaining horizontal derivative is not sign-definite".into());
    }
    let halfspace = match (&diagnosis, &constant_normal) {
        (None, Some(cn)) => Some(HalfspaceSpec::from_raw(
            cn.nu.clone(),
            affine_offset(&e.poly, &horiz, &cn.nu),
        )),
        _ => None,
    };
    Ok(Classification {
        invariants,
        halfspace,
        diagnosis,
        constant_normal,
        cone,
    })
}

/// When `V_1 ∩ Inv` has codimension one in `V_1`, the orthogonal horizontal
/// direction `nu` (oriented so that `X_nu P >= 0`) if that sign is
/// certified.
fn constant_normal(g: &Group, e: &SublevelSet, inv: &Subspace, horiz: &[usize]) -> Result<Option<ConstantNormal>> {
    let m = horiz.len();
    let h = inv.intersect_coordinates(horiz);
    if h.dim() + 1 != m {
        return Ok(None);
    }
    let rows: Vec<Vec<Rational>> = h
        .basis()
        .iter()
        .map(|v| horiz.iter().map(|&i| v.coeffs[i].clone()).collect())
        .collect();
    let ns = nullspace(&rows, m);
    let nu = normalize_direction(&ns[0]);
    let mut field = g.algebra().zero();
    for (k, &i) in horiz.iter().enumerate() {
        field.coeffs[i] = nu[k].clone();
    }
    let d = apply_field(&realize_left_invariant(g, &field)?, &e.poly);
    let verdict = polynomial_nonneg(&d);
    if verdict.is_nonnegative() && !d.is_zero() {
        return Ok(Some(ConstantNormal {
            nu,
            derivative: d,
            verdict,
        }));
    }
    let flipped = polynomial_nonneg(&d.neg());
    if flipped.is_nonnegative() && !d.is_zero() {
        let nu = nu.iter().map(|q| -q).collect();
        return Ok(Some(ConstantNormal {
            nu,
            derivative: d.neg(),
            verdict: flipped,
        }));
    }
    Ok(None)
}

/// `c` with `P = k (nu . x - c)`, `k > 0`, when `P` is affine in the
/// horizontal coordinates.
fn affine_offset(p: &Polynomial, horiz: &[usize], nu: &[Rational]) -> Option<Rational> {
    if p.total_degree() > 1 || (0..p.support_len()).any(|i| p.involves(i) && !horiz.contains(&i)) {
        return None;
    }
    let beta: Vec<Rational> = horiz.iter().map(|&i| p.coeff_of_power(i, 1).constant_term()).collect();
    let (k_idx, nu_k) = nu.iter().enumerate().find(|(_, q)| !q.is_zero())?;
    let k = &beta[k_idx] / nu_k;
    if !k.is_positive() || beta.iter().zip(nu).any(|(b, v)| b != &(v * &k)) {
        return None;
    }
    Some(-p.constant_term() / k)
}

/// Enlarges an invariant subspace of a step-2 algebra by `[y, x]` for `y`
/// in its basis, then closes under the bracket.
pub fn derived_invariants_step2(a: &StratifiedAlgebra, inv: &Subspace, x: &AlgVector) -> Result<Subspace> {
    if a.step() != 2 {
        return Err(Error::StepNotTwo(a.step()));
    }
    a.check_len(x.len())?;
    let mut s = inv.clone();
    for y in inv.basis() {
        s = s.with_vector(&AlgVector::new(a.bracket_coords(&y.coeffs, &x.coeffs)));
    }
    Ok(lie_closure(a, &s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::ring::ratio;

    fn span_of(a: &StratifiedAlgebra, idx: &[usize]) -> Subspace {
        let v: Vec<_> = idx.iter().map(|&i| a.basis(i)).collect();
        Subspace::span(a.dim(), &v)
    }

    fn set(g: &Group, p: &str) -> SublevelSet {
        SublevelSet::new(g.clone(), Polynomial::parse(p, g.dim()).unwrap()).unwrap()
    }

    #[test]
    fn bracket_spans_in_engel() {
        let g = presets::engel();
        let a = g.algebra();
        let s = iterated_bracket_span(a, &span_of(a, &[0]), &a.basis(1)).unwrap();
        assert_eq!(s, span_of(a, &[2, 3]));
        let s = iterated_bracket_span(a, &span_of(a, &[1]), &a.basis(0)).unwrap();
        assert_eq!(s, span_of(a, &[2]));
        let s = iterated_bracket_span(a, &Subspace::zero(4), &a.basis(0)).unwrap();
        assert_eq!(s.dim(), 0);
        assert!(matches!(
            iterated_bracket_span(a, &span_of(a, &[0, 1]), &a.basis(2)),
            Err(Error::NotSubalgebra)
        ));
    }

    #[test]
    fn orbit_spans() {
        let g = presets::engel();
        let a = g.algebra();
        let s = ad_orbit_span(a, &span_of(a, &[0]), &a.basis(1), 8, 1);
        assert_eq!(s, span_of(a, &[1, 2, 3]));
        let s = ad_orbit_span(a, &Subspace::zero(4), &a.basis(1), 8, 1);
        assert_eq!(s, span_of(a, &[1]));
        let ab = presets::abelian(3);
        let b = ab.algebra();
        assert_eq!(
            ad_orbit_span(b, &span_of(b, &[0, 1]), &b.basis(2), 8, 1),
            span_of(b, &[2])
        );
    }

    #[test]
    fn escaping_adjoints() {
        let g = presets::engel();
        let a = g.algebra();
        let r = find_escaping_adjoint(a, &span_of(a, &[0]), &a.basis(1), 0).unwrap();
        assert_eq!(r.y, a.basis(0));
        assert_eq!(r.image.coeffs, vec![int(0), int(1), int(-1), ratio(1, 2)]);
        let r = find_escaping_adjoint(a, &span_of(a, &[1]), &a.basis(0), 0).unwrap();
        assert_eq!(r.image.coeffs, vec![int(1), int(0), int(1), int(0)]);
        let err = find_escaping_adjoint(a, &span_of(a, &[2, 3]), &a.basis(0), 0).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(Hypothesis::Generation)));
    }

    #[test]
    fn invariants_of_cone_and_halfspace() {
        let g = presets::engel();
        let a = g.algebra();
        let inv = invariant_directions(&set(&g, "1/2*x2^3 + 2*x4")).unwrap();
        assert_eq!(inv.subspace, span_of(a, &[0]));
        assert_eq!(inv.derivatives[2], Polynomial::parse("-2*x1", 4).unwrap());
        let inv = invariant_directions(&set(&g, "x2")).unwrap();
        assert_eq!(inv.subspace, span_of(a, &[0, 2, 3]));
        let h = presets::heisenberg1();
        let inv = invariant_directions(&set(&h, "x3 + 2*x1*x2")).unwrap();
        assert!(inv.subspace.contains(&h.algebra().basis(1)));
        assert_eq!(inv.ideal[1].in_ideal, Some(true));
        assert_eq!(inv.ideal[0].in_ideal, Some(false));
    }

    #[test]
    fn classification() {
        let g = presets::engel();
        let c = classify_vertical_halfspace(&set(&g, "x2 - 5")).unwrap();
        let h = c.halfspace.unwrap();
        assert_eq!(h.c, Some(int(5)));
        assert_eq!(h.nu, vec![int(0), int(1)]);

        let c = classify_vertical_halfspace(&set(&g, "1/2*x2^3 + 2*x4")).unwrap();
        assert!(c.halfspace.is_none());
        assert_eq!(c.diagnosis.as_deref(), Some("invariant subspace has codimension 3"));
        assert!(c.cone);

        let c = classify_vertical_halfspace(&set(&g, "x2")).unwrap();
        assert_eq!(c.halfspace.unwrap().c, Some(int(0)));

        let c = classify_vertical_halfspace(&set(&g, "2*x4 + x2")).unwrap();
        assert!(c.halfspace.is_none());
        assert!(!c.cone);
        let cn = c.constant_normal.unwrap();
        assert_eq!(cn.nu, vec![int(0), int(1)]);
        assert_eq!(cn.verdict.sign, crate::nonneg::Sign::Positive);
    }

    #[test]
    fn reversed_halfspace_keeps_orientation() {
        let g = presets::engel();
        let c = classify_vertical_halfspace(&set(&g, "-2*x1 + 4*x2 + 3")).unwrap();
        let h = c.halfspace.unwrap();
        assert_eq!(h.nu, vec![int(-1), int(2)]);
        assert_eq!(h.c, Some(ratio(-3, 2)));
    }

    #[test]
    fn step_two_closure() {
        let h = presets::heisenberg1();
        let a = h.algebra();
        assert_eq!(
            derived_invariants_step2(a, &span_of(a, &[1]), &a.basis(0)).unwrap(),
            span_of(a, &[1, 2])
        );
        assert_eq!(
            derived_invariants_step2(a, &span_of(a, &[0]), &a.basis(1)).unwrap(),
            span_of(a, &[0, 2])
        );
        assert_eq!(
            derived_invariants_step2(a, &Subspace::zero(3), &a.basis(0))
                .unwrap()
                .dim(),
            0
        );
        let e = presets::engel();
        assert!(matches!(
            derived_invariants_step2(e.algebra(), &Subspace::zero(4), &e.algebra().basis(0)),
            Err(Error::StepNotTwo(3))
        ));
    }
}
