//! Seeded property suites.

use std::cell::Cell;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use carnot_core::algebra::AlgVector;
use carnot_core::blowup::{pullback_at, tangent_limit, translate_dilate_pullback, TangentKind};
use carnot_core::fields::{apply_field, divergence, field_bracket, realize_left_invariant, realize_symbolic};
use carnot_core::group::Chart;
use carnot_core::measure::{surface_measure, BallBox, Direction, MeasureOptions, QuadratureSpec};
use carnot_core::nonneg::{polynomial_nonneg, Sign};
use carnot_core::ring::{int, ratio};
use carnot_core::span::{
    ad_orbit_span, classify_vertical_halfspace, find_escaping_adjoint, invariant_directions, is_subalgebra,
    iterated_bracket_span, lie_closure, EscapeHypotheses,
};
use carnot_core::{presets, sets, Group, Polynomial, Rational, SublevelSet, Subspace};

fn runner(cases: u32, seed: u64) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    })
}

fn rat(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(p, q)| ratio(p, q))
}

fn coords(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rat(7, 4), n)
}

fn vector(n: usize) -> impl Strategy<Value = AlgVector> {
    coords(n).prop_map(AlgVector::new)
}

/// Polynomials with up to five terms of degree at most `deg` in each variable.
fn polynomial(n: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..=deg, n), rat(5, 3)), 1..=5).prop_map(move |terms| {
        terms
            .into_iter()
            .fold(Polynomial::zero(n), |p, (e, c)| p.add(&Polynomial::monomial(n, e, c)))
    })
}

fn groups() -> Vec<Group> {
    vec![
        presets::abelian(3),
        presets::heisenberg1(),
        presets::engel(),
        presets::engel().with_chart(Chart::First),
        presets::heisenberg1().with_chart(Chart::Second),
    ]
}

fn field(g: &Group, v: &AlgVector) -> carnot_core::PolyVectorField {
    realize_left_invariant(g, v).unwrap()
}

#[test]
fn product_is_associative() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        runner(200, 11 + k as u64)
            .run(&(coords(n), coords(n), coords(n)), |(x, y, z)| {
                prop_assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn inverse_and_identity() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        runner(100, 21 + k as u64)
            .run(&coords(n), |x| {
                let e = vec![int(0); n];
                prop_assert_eq!(g.mul(&x, &g.inverse(&x)), e.clone());
                prop_assert_eq!(g.mul(&g.inverse(&x), &x), e.clone());
                prop_assert_eq!(g.mul(&x, &e), x.clone());
                if g.chart() == Chart::First {
                    let neg: Vec<Rational> = x.iter().map(|c| -c).collect();
                    prop_assert_eq!(g.inverse(&x), neg);
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn dilations_are_automorphisms() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(100, 31 + k as u64)
            .run(
                &(coords(n), coords(n), positive_rat(), positive_rat()),
                |(x, y, l, m)| {
                    prop_assert_eq!(
                        g.dilate(&l, &g.mul(&x, &y)),
                        g.mul(&g.dilate(&l, &x), &g.dilate(&l, &y))
                    );
                    prop_assert_eq!(g.dilate(&l, &g.dilate(&m, &x)), g.dilate(&(&l * &m), &x));
                    let (u, v) = (AlgVector::new(x), AlgVector::new(y));
                    prop_assert_eq!(
                        a.dilate_alg(&l, &a.bracket(&u, &v).unwrap()).unwrap(),
                        a.bracket(&a.dilate_alg(&l, &u).unwrap(), &a.dilate_alg(&l, &v).unwrap())
                            .unwrap()
                    );
                    Ok(())
                },
            )
            .unwrap();
    }
}

#[test]
fn jacobi_identity() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(200, 41 + k as u64)
            .run(&(vector(n), vector(n), vector(n)), |(x, y, z)| {
                let br = |p: &AlgVector, q: &AlgVector| a.bracket(p, q).unwrap();
                let j = br(&x, &br(&y, &z)).add(&br(&y, &br(&z, &x))).add(&br(&z, &br(&x, &y)));
                prop_assert!(j.is_zero());
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn adjoint_is_invertible_and_raises_layers() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(100, 51 + k as u64)
            .run(&(vector(n), vector(n)), |(y, x)| {
                let img = a.adjoint_exp(&y, &x).unwrap();
                prop_assert_eq!(a.adjoint_exp(&y.neg(), &img).unwrap(), x.clone());
                if let Some(low) = x.min_layer(a.weights()) {
                    let diff = img.sub(&x);
                    prop_assert!(diff.min_layer(a.weights()).is_none_or(|d| d > low));
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn heisenberg_product_is_step_two_formula() {
    let g = presets::heisenberg1();
    let a = g.algebra();
    runner(100, 61)
        .run(&(vector(3), vector(3)), |(x, y)| {
            let h = x.add(&y).add(&a.bracket(&x, &y).unwrap().scale(&ratio(1, 2)));
            prop_assert_eq!(g.mul(&x.coeffs, &y.coeffs), h.coeffs);
            Ok(())
        })
        .unwrap();
}

#[test]
fn realization_is_a_homomorphism() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(100, 71 + k as u64)
            .run(&(vector(n), vector(n)), |(x, y)| {
                let lhs = field_bracket(&field(g, &x), &field(g, &y)).unwrap();
                prop_assert_eq!(lhs, field(g, &a.bracket(&x, &y).unwrap()));
                prop_assert!(divergence(&field(g, &x)).is_zero());
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn fields_are_left_invariant() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        runner(30, 81 + k as u64)
            .run(&(vector(n), coords(n), polynomial(n, 2)), |(v, p, u)| {
                let lg = g.left_translation(&p);
                let f = field(g, &v);
                let lhs = apply_field(&f, &u.substitute(&lg).unwrap());
                let rhs = apply_field(&f, &u).substitute(&lg).unwrap();
                prop_assert_eq!(lhs.with_nvars(n), rhs.with_nvars(n));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn dilation_relation_with_symbolic_scale() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let m = n + 1;
        let lam = Polynomial::var(m, n);
        let xs: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(m, i)).collect();
        let mut args = g.dilate(&lam, &xs);
        args.push(lam.clone());
        runner(20, 91 + k as u64)
            .run(&(vector(n), polynomial(n, 2)), |(v, u)| {
                let u = u.with_nvars(m);
                let lhs = apply_field(&field(g, &v), &u.substitute(&args).unwrap()).with_nvars(m);
                let dv: Vec<Polynomial> = v
                    .coeffs
                    .iter()
                    .zip(g.weights())
                    .map(|(c, &w)| lam.pow(w).scale(c))
                    .collect();
                let xu = apply_field(&realize_symbolic(g, &dv).unwrap(), &u).with_nvars(m);
                prop_assert_eq!(lhs, xu.substitute(&args).unwrap().with_nvars(m));
                Ok(())
            })
            .unwrap();
    }
}

/// Random subalgebra: Lie closure of one or two random vectors.
fn subalgebra(n: usize) -> impl Strategy<Value = Vec<AlgVector>> {
    prop::collection::vec(prop::collection::vec(rat(3, 2), n).prop_map(AlgVector::new), 1..=2)
}

#[test]
fn adjoint_orbit_is_line_plus_iterated_brackets() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(100, 101 + k as u64)
            .run(&(subalgebra(n), vector(n), any::<u64>()), |(gens, x, seed)| {
                let sub = lie_closure(a, &Subspace::span(n, &gens));
                prop_assert!(is_subalgebra(a, &sub));
                let it = iterated_bracket_span(a, &sub, &x).unwrap();
                prop_assert_eq!(ad_orbit_span(a, &sub, &x, 12, seed), it.with_vector(&x));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn escape_succeeds_under_hypotheses() {
    let met = Cell::new(0);
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(100, 111 + k as u64)
            .run(&(subalgebra(n), vector(n), any::<u64>()), |(gens, x, seed)| {
                let sub = lie_closure(a, &Subspace::span(n, &gens[..1]));
                let hyp = EscapeHypotheses::check(a, &sub, &x);
                match find_escaping_adjoint(a, &sub, &x, seed) {
                    Ok(r) => {
                        met.set(met.get() + 1);
                        prop_assert!(!sub.with_vector(&x).contains(&r.image));
                        prop_assert!(sub.contains(&r.y));
                    }
                    Err(e) => prop_assert!(hyp.first_failure().is_some(), "{e}"),
                }
                Ok(())
            })
            .unwrap();
    }
    assert!(met.get() > 0);
}

#[test]
fn invariant_directions_form_subalgebras() {
    for (k, g) in groups().iter().enumerate() {
        let n = g.dim();
        let a = g.algebra();
        runner(40, 121 + k as u64)
            .run(&polynomial(n, 2), |p| {
                prop_assume!(!p.is_zero());
                let e = SublevelSet::new(g.clone(), p).unwrap();
                let inv = invariant_directions(&e).unwrap();
                prop_assert!(is_subalgebra(a, &inv.subspace));
                for v in inv.subspace.basis() {
                    prop_assert!(apply_field(&field(g, v), &e.poly).is_zero());
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn halfspaces_are_recovered_exactly() {
    for (k, g) in [presets::engel(), presets::heisenberg1(), presets::abelian(3)]
        .iter()
        .enumerate()
    {
        let m = g.algebra().horizontal_dim();
        runner(50, 131 + k as u64)
            .run(&(rat(9, 4), prop::collection::vec(rat(6, 5), m)), |(c, nu)| {
                prop_assume!(nu.iter().any(|v| *v != int(0)));
                let e = SublevelSet::new(g.clone(), sets::halfspace(g, &c, &nu).unwrap()).unwrap();
                let h = classify_vertical_halfspace(&e).unwrap().halfspace.expect("halfspace");
                let lead = nu.iter().find(|v| **v != int(0)).unwrap();
                let k = if *lead < int(0) { -lead.clone() } else { lead.clone() };
                prop_assert_eq!(h.nu, nu.iter().map(|v| v / &k).collect::<Vec<_>>());
                prop_assert_eq!(h.c, Some(c / k));
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn nonnegativity_verdicts_are_sound() {
    runner(150, 141)
        .run(&(polynomial(3, 4), prop::collection::vec(coords(3), 40)), |(p, pts)| {
            let v = polynomial_nonneg(&p);
            match v.sign {
                Sign::Indefinite => {
                    let w = v.witness.expect("indefinite verdicts carry a witness");
                    prop_assert!(p.eval_rational(&w) < int(0));
                }
                Sign::Positive | Sign::Nonnegative => {
                    for x in &pts {
                        prop_assert!(p.eval_rational(x) >= int(0), "{p} negative at {x:?}");
                    }
                }
                Sign::Unknown => {}
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn squares_are_certified() {
    runner(60, 151)
        .run(&(polynomial(3, 2), rat(5, 2)), |(p, c)| {
            let s = p.mul(&p).add(&Polynomial::constant(3, &c * &c));
            prop_assert!(polynomial_nonneg(&s).sign != Sign::Indefinite);
            Ok(())
        })
        .unwrap();
}

fn engel_sets() -> impl Strategy<Value = Polynomial> {
    prop_oneof![
        rat(5, 3).prop_map(|a| sets::cone(&a)),
        (rat(4, 3), rat(4, 3)).prop_map(|(a, b)| sets::pab(&a, &b)),
        polynomial(4, 2),
    ]
}

fn positive_rat() -> impl Strategy<Value = Rational> {
    (1..=9i64, 1..=5i64).prop_map(|(p, q)| ratio(p, q))
}

#[test]
fn pullbacks_are_consistent() {
    let g = presets::engel();
    runner(25, 161)
        .run(
            &(engel_sets(), coords(4), positive_rat(), positive_rat()),
            |(p, x, r1, r2)| {
                prop_assume!(!p.is_zero());
                let e = SublevelSet::new(g.clone(), p).unwrap();
                let fam = translate_dilate_pullback(&e, &x).unwrap();
                let direct = pullback_at(&e, &x, &r1).unwrap();
                prop_assert_eq!(fam.specialize(&r1), direct.poly.clone());
                let twice = pullback_at(&direct, &[int(0), int(0), int(0), int(0)], &r2).unwrap();
                prop_assert_eq!(twice.poly, pullback_at(&e, &x, &(&r1 * &r2)).unwrap().poly);
                Ok(())
            },
        )
        .unwrap();
}

#[test]
fn homogeneous_pullback_is_a_power_of_r() {
    let g = presets::engel();
    let r = Polynomial::var(5, 4);
    let cases = [
        sets::cone(&ratio(1, 2)),
        sets::cone(&int(3)),
        Polynomial::parse("x1*x3 - x4 + x1^2*x2", 4).unwrap(),
    ];
    for p in cases {
        let d = p.weighted_homogeneous_degree(g.weights()).unwrap();
        let e = SublevelSet::new(g.clone(), p.clone()).unwrap();
        let fam = translate_dilate_pullback(&e, &[int(0), int(0), int(0), int(0)]).unwrap();
        assert_eq!(fam.poly, r.pow(d).mul(&p.with_nvars(5)));
    }
}

#[test]
fn halfspace_tangents_agree_with_classification() {
    let g = presets::engel();
    let halfspaces = Cell::new(0);
    runner(60, 171)
        .run(&(engel_sets(), coords(4)), |(p, x)| {
            let p = p.sub(&Polynomial::constant(4, p.eval_rational(&x)));
            prop_assume!(!p.is_zero());
            let e = SublevelSet::new(g.clone(), p).unwrap();
            let t = tangent_limit(&e, &x).unwrap();
            if let TangentKind::Halfspace(h) = t.kind {
                halfspaces.set(halfspaces.get() + 1);
                let lead = SublevelSet::new(g.clone(), t.leading).unwrap();
                let c = classify_vertical_halfspace(&lead)
                    .unwrap()
                    .halfspace
                    .expect("leading form is a halfspace");
                prop_assert_eq!(c.nu, h.nu);
            }
            Ok(())
        })
        .unwrap();
    assert!(
        halfspaces.get() > 10,
        "only {} halfspace tangents sampled",
        halfspaces.get()
    );
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol.max(1e-12 * a.abs().max(b.abs()))
}

#[test]
fn cone_density_is_self_similar() {
    let g = presets::engel();
    for alpha in [ratio(1, 4), ratio(1, 2), int(1)] {
        let e = SublevelSet::new(g.clone(), sets::cone(&alpha)).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for r in [1.0, 0.5, 0.25, 0.125] {
            let bx = BallBox::at_identity(&g, r).unwrap();
            let s = surface_measure(&e, &Direction::Horizontal, &bx, &MeasureOptions::default()).unwrap();
            let c = s.estimate / r.powi(6);
            let err = s.error / r.powi(6);
            if let Some((c0, e0)) = prev {
                assert!(rel_close(c, c0, err + e0), "alpha {alpha}: {c} vs {c0}");
            }
            prev = Some((c, err));
        }
    }
}

#[test]
fn scaling_identity_for_homogeneous_directions() {
    // |Z 1_{delta_{1/r} E}|(Q_1) = r^{l - Q} |Z 1_E|(Q_r) for Z in layer l.
    let g = presets::engel();
    let a = g.algebra();
    let e = SublevelSet::new(g.clone(), Polynomial::parse("2*x4 + 1/4*x2^3 + 1/8*x2^4", 4).unwrap()).unwrap();
    let origin = [int(0), int(0), int(0), int(0)];
    let opts = MeasureOptions::default();
    for (z, l) in [(a.basis(1), 1), (a.basis(2), 2)] {
        for r in [ratio(1, 2), ratio(1, 4), ratio(3, 8)] {
            let rf = carnot_core::ring::rational_to_f64(&r);
            let scaled = pullback_at(&e, &origin, &r).unwrap();
            let unit = surface_measure(
                &scaled,
                &Direction::Field(z.clone()),
                &BallBox::at_identity(&g, 1.0).unwrap(),
                &opts,
            )
            .unwrap();
            let orig = surface_measure(
                &e,
                &Direction::Field(z.clone()),
                &BallBox::at_identity(&g, rf).unwrap(),
                &opts,
            )
            .unwrap();
            let k = rf.powi(l - 7);
            assert!(
                rel_close(unit.estimate, k * orig.estimate, unit.error + k * orig.error),
                "layer {l}, r {r}: {} vs {}",
                unit.estimate,
                k * orig.estimate
            );
        }
    }
}

#[test]
fn doubling_subdivisions_stays_within_reported_error() {
    let g = presets::engel();
    let a = g.algebra();
    let cone = SublevelSet::new(g.clone(), sets::cone(&ratio(1, 2))).unwrap();
    let half = SublevelSet::new(g.clone(), Polynomial::parse("x2", 4).unwrap()).unwrap();
    let mixed = SublevelSet::new(g.clone(), Polynomial::parse("2*x4 + 1/4*x2^3 + 1/8*x2^4", 4).unwrap()).unwrap();
    let z = a.adjoint_exp(&a.basis(0), &a.basis(1)).unwrap();
    let cases = [
        (&cone, Direction::Horizontal),
        (&cone, Direction::Field(z)),
        (&half, Direction::Field(a.basis(1))),
        (&mixed, Direction::Field(a.basis(1))),
        (&mixed, Direction::Field(a.basis(2))),
    ];
    for (e, dir) in &cases {
        for r in [1.0, 0.25, 1.0 / 64.0] {
            let bx = BallBox::at_identity(&g, r).unwrap();
            let base = MeasureOptions::default();
            let fine = MeasureOptions {
                quad: QuadratureSpec {
                    subdiv: 2 * base.quad.subdiv,
                    ..base.quad
                },
                ..base.clone()
            };
            let s = surface_measure(e, dir, &bx, &base).unwrap();
            let t = surface_measure(e, dir, &bx, &fine).unwrap();
            assert!(
                (s.estimate - t.estimate).abs() <= s.error + 1e-12 * s.estimate.abs(),
                "{} r {r}: {} vs {} (error {})",
                dir.label(),
                s.estimate,
                t.estimate,
                s.error
            );
        }
    }
}
