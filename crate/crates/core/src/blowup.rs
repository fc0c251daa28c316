//! Translate–dilate pullbacks `delta_{1/r}(x^{-1} E)` of polynomial
//! sublevel sets and their leading-order tangents.
//!
//! With `y` the blown-up coordinates, `x^{-1} E` rescaled by `1/r` is
//! `{y : P(x * delta_r y) <= 0}`. Expanding in `r` gives
//! `P(x * delta_r y) = sum_d r^d Q_d(y)`, and the lowest nonzero `Q_d`
//! describes the tangent set.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::algebra::AlgVector;
use crate::error::{Error, Result};
use crate::fields::{apply_field, realize_left_invariant, SublevelSet};
use crate::measure::{fit_slope, surface_measure, BallBox, Direction, MeasureOptions};
use crate::poly::Polynomial;
use crate::ring::Rational;
use crate::span::{normalize_direction, HalfspaceSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackFamily {
    pub point: Vec<Rational>,
    /// `P(x * delta_r y)` in `n + 1` variables, `r` last.
    pub poly: Polynomial,
    /// `Q_d(y)` for each power `r^d` present.
    pub expansion: BTreeMap<u32, Polynomial>,
}

/// Symbolic pullback with `r` as an indeterminate.
pub fn translate_dilate_pullback(e: &SublevelSet, x: &[Rational]) -> Result<PullbackFamily> {
    let g = &e.group;
    let n = g.dim();
    g.algebra().check_len(x.len())?;
    let r = Polynomial::var(n + 1, n);
    let y: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n + 1, i)).collect();
    let dy = g.dilate(&r, &y);
    let xp: Vec<Polynomial> = x.iter().map(|c| Polynomial::constant(n + 1, c.clone())).collect();
    let prod = if x.iter().all(Zero::is_zero) {
        dy
    } else {
        g.mul(&xp, &dy)
    };
    let poly = e.poly.substitute(&prod)?.with_nvars(n + 1);
    let expansion = poly
        .collect_powers(n)
        .into_iter()
        .filter(|(_, q)| !q.is_zero())
        .map(|(d, q)| (d, q.drop_var(n).with_nvars(n)))
        .collect();
    Ok(PullbackFamily {
        point: x.to_vec(),
        poly,
        expansion,
    })
}

/// Divides by the absolute value of the largest-magnitude coefficient, so
/// the sublevel set is unchanged.
pub fn normalize(p: &Polynomial) -> Polynomial {
    let m = p.max_abs_coefficient();
    if m.is_zero() {
        return p.clone();
    }
    p.scale(&(Rational::from_integer(1.into()) / m))
}

/// `{y : P(x * delta_r y) <= 0}` for a concrete `r > 0`, normalized.
pub fn pullback_at(e: &SublevelSet, x: &[Rational], r: &Rational) -> Result<SublevelSet> {
    let g = &e.group;
    let n = g.dim();
    g.algebra().check_len(x.len())?;
    if !r.is_positive() {
        return Err(Error::NegativeScale);
    }
    let y: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
    let rp = Polynomial::constant(n, r.clone());
    let xp: Vec<Polynomial> = x.iter().map(|c| Polynomial::constant(n, c.clone())).collect();
    let prod = g.mul(&xp, &g.dilate(&rp, &y));
    let p = e.poly.substitute(&prod)?.with_nvars(n);
    SublevelSet::new(g.clone(), normalize(&p))
}

impl PullbackFamily {
    /// The family at a concrete `r`, normalized like [`pullback_at`].
    pub fn specialize(&self, r: &Rational) -> Polynomial {
        let n = self.poly.nvars() - 1;
        let mut args: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
        args.push(Polynomial::constant(n, r.clone()));
        normalize(&self.poly.eval(&args).with_nvars(n))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TangentKind {
    Halfspace(HalfspaceSpec),
    SelfSimilar,
    Other,
}

impl TangentKind {
    pub fn name(&self) -> &'static str {
        match self {
            TangentKind::Halfspace(_) => "halfspace",
            TangentKind::SelfSimilar => "self-similar",
            TangentKind::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentLimit {
    pub order: u32,
    pub leading: Polynomial,
    pub kind: TangentKind,
    pub family: PullbackFamily,
}

pub fn tangent_limit(e: &SublevelSet, x: &[Rational]) -> Result<TangentLimit> {
    let g = &e.group;
    g.algebra().check_len(x.len())?;
    let value = e.poly.eval_rational(x);
    if !value.is_zero() {
        return Err(Error::NotOnBoundary {
            value: value.to_string(),
        });
    }
    let family = translate_dilate_pullback(e, x)?;
    let (&order, leading) = family.expansion.iter().next().ok_or(Error::ZeroPolynomial)?;
    let leading = leading.clone();
    let horiz = g.algebra().layer_indices(1);
    let horizontal_linear = leading.total_degree() == 1
        && leading.constant_term().is_zero()
        && (0..leading.support_len()).all(|i| !leading.involves(i) || horiz.contains(&i));
    let kind = if horizontal_linear {
        let beta: Vec<Rational> = horiz
            .iter()
            .map(|&i| leading.coeff_of_power(i, 1).constant_term())
            .collect();
        let nu = normalize_direction(&beta);
        TangentKind::Halfspace(HalfspaceSpec::from_raw(nu, Some(Rational::zero())))
    } else if family.expansion.len() == 1 && proportional(&leading, &e.poly) {
        TangentKind::SelfSimilar
    } else {
        TangentKind::Other
    };
    Ok(TangentLimit {
        order,
        leading,
        kind,
        family,
    })
}

/// `p = lambda q` for some rational `lambda != 0`.
fn proportional(p: &Polynomial, q: &Polynomial) -> bool {
    let Some((m, c)) = q.terms().next() else {
        return false;
    };
    let k = p.coefficient(m) / c;
    !k.is_zero() && *p == q.scale(&k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProvafisRow {
    pub r: f64,
    pub measure: f64,
    pub error: f64,
    /// `r^{2-Q} |Z 1_E|(x Q_r)`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProvafisReport {
    /// Top nonzero layer `l` of `Z`.
    pub layer: u32,
    pub rows: Vec<ProvafisRow>,
    pub slope: Option<f64>,
    /// The scaled sequence tends to zero (positive slope, or identically
    /// zero measure).
    pub infinitesimal: bool,
    /// `v_l Q_{d0} = 0` for the tangent at `x`, when `x` is on the boundary.
    pub tangent_invariant: Option<bool>,
    pub tangent: Option<TangentLimit>,
}

/// Scaling of `|Z 1_E|` on boxes at `x` for a `Z` without horizontal part.
/// The box is always clipped to the graph, since the boundary through a
/// generic point need not stay inside small boxes as a graph.
pub fn provafis_probe(
    e: &SublevelSet,
    z: &AlgVector,
    x: &[Rational],
    radii: &[f64],
    opts: &MeasureOptions,
) -> Result<ProvafisReport> {
    let g = &e.group;
    let a = g.algebra();
    a.check_len(z.len())?;
    if !z.layer_part(a.weights(), 1).is_zero() {
        return Err(Error::HorizontalComponent);
    }
    let layer = z
        .max_layer(a.weights())
        .ok_or_else(|| Error::Invalid("direction is zero".into()))?;
    let q = a.homogeneous_dim() as i32;
    let opts = MeasureOptions {
        clip: true,
        ..opts.clone()
    };
    let mut rows = Vec::new();
    for &r in radii {
        let bx = BallBox::new(g, x.to_vec(), r)?;
        let s = surface_measure(e, &Direction::Field(z.clone()), &bx, &opts)?;
        rows.push(ProvafisRow {
            r,
            measure: s.estimate,
            error: s.error,
            scaled: r.powi(2 - q) * s.estimate,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|row| (row.r, row.scaled)).collect();
    let slope = fit_slope(&pts);
    let all_zero = rows.iter().all(|row| row.measure == 0.0);
    let infinitesimal = all_zero || slope.is_some_and(|s| s > 0.0);
    let tangent = match tangent_limit(e, x) {
        Ok(t) => Some(t),
        Err(Error::NotOnBoundary { .. }) => None,
        Err(err) => return Err(err),
    };
    let tangent_invariant = match &tangent {
        Some(t) => {
            let vl = realize_left_invariant(g, &z.layer_part(a.weights(), layer))?;
            Some(apply_field(&vl, &t.leading).is_zero())
        }
        None => None,
    };
    Ok(ProvafisReport {
        layer,
        rows,
        slope,
        infinitesimal,
        tangent_invariant,
        tangent,
    })
}
