use germlab::dsl::{parse_mixed_function, parse_polynomial};
use germlab::germ::RealMapGerm;
use germlab::matrix::{combinations, rational_det, rational_rank, PolyMatrix};
use germlab::mixed::{formal_conj, ComplexRational};
use germlab::poly::{int, rat, Ctx, Monomial, Polynomial, Rational, VarContext};
use proptest::prelude::*;

fn ctx3() -> Ctx {
    VarContext::new(&["x", "y", "z"]).unwrap()
}

fn poly_strategy(max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-9i64..=9, 1i64..=4, prop::array::uniform3(0..=max_deg)), 0..6).prop_map(|terms| {
        let ctx = ctx3();
        Polynomial::from_terms(&ctx, terms.into_iter().map(|(n, d, e)| (Monomial(e.to_vec()), rat(n, d))))
    })
}

fn germ_poly_strategy() -> impl Strategy<Value = Polynomial> {
    poly_strategy(3).prop_map(|p| {
        let c = p.constant_term();
        &p - &Polynomial::constant(p.ctx(), c)
    })
}

fn point_strategy() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..=6, 1i64..=5), 3).prop_map(|v| v.into_iter().map(|(n, d)| rat(n, d)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ring_laws(a in poly_strategy(3), b in poly_strategy(3), c in poly_strategy(2)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(a.pow(2), &a * &a);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly_strategy(3), b in poly_strategy(3), x in point_strategy()) {
        let (ea, eb) = (a.evaluate(&x).unwrap(), b.evaluate(&x).unwrap());
        prop_assert_eq!((&a * &b).evaluate(&x).unwrap(), &ea * &eb);
        prop_assert_eq!((&a + &b).evaluate(&x).unwrap(), ea + eb);
    }

    #[test]
    fn derivative_linearity_and_leibniz(a in poly_strategy(3), b in poly_strategy(3), i in 0usize..3, k in -5i64..5) {
        let ka = a.scale(&int(k));
        prop_assert_eq!((&ka + &b).derivative(i), &a.derivative(i).scale(&int(k)) + &b.derivative(i));
        prop_assert_eq!((&a * &b).derivative(i), &(&a.derivative(i) * &b) + &(&a * &b.derivative(i)));
    }

    #[test]
    fn derivative_matches_finite_difference(a in poly_strategy(3), x in prop::collection::vec(-1.0f64..1.0, 3), i in 0usize..3) {
        let h = 1e-5;
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[i] += h;
        xm[i] -= h;
        let fd = (a.eval_f64(&xp) - a.eval_f64(&xm)) / (2.0 * h);
        let exact = a.derivative(i).eval_f64(&x);
        let scale = a.terms().map(|(_, c)| germlab::poly::to_f64(c).abs()).sum::<f64>().max(1.0);
        prop_assert!((fd - exact).abs() <= 1e-4 * scale, "fd {} exact {}", fd, exact);
    }

    #[test]
    fn canonical_text_round_trips(a in poly_strategy(4)) {
        let back = parse_polynomial(&a.to_string(), a.ctx()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn determinant_commutes_with_evaluation(entries in prop::collection::vec(poly_strategy(2), 16), x in point_strategy(), n in 1usize..=4) {
        let m = PolyMatrix::new(n, n, entries[..n * n].to_vec()).unwrap();
        let det = m.determinant_fraction_free().unwrap();
        prop_assert_eq!(det.evaluate(&x).unwrap(), rational_det(m.evaluate(&x).unwrap()));
    }

    // det(A A^T) is the sum of squared maximal minors.
    #[test]
    fn milnor_poly_is_cauchy_binet(g1 in germ_poly_strategy()) {
        prop_assume!(!g1.is_zero());
        let g = RealMapGerm::new("G", &ctx3(), vec![g1]).unwrap();
        let stacked = g.stacked_matrix();
        let sum = combinations(3, 2).into_iter().fold(Polynomial::zero(g.ctx()), |acc, cols| {
            let d = stacked.select_columns(&cols).determinant_fraction_free().unwrap();
            &acc + &(&d * &d)
        });
        prop_assert_eq!(g.milnor_polynomial().milnor_poly, sum);
    }

    #[test]
    fn milnor_zero_iff_rank_drop(g1 in germ_poly_strategy(), x in point_strategy()) {
        prop_assume!(!g1.is_zero());
        let g = RealMapGerm::new("G", &ctx3(), vec![g1]).unwrap();
        let value = g.milnor_polynomial().milnor_poly.evaluate(&x).unwrap();
        let rank = rational_rank(g.stacked_matrix().evaluate(&x).unwrap());
        prop_assert_eq!(value == int(0), rank < 2);
    }

    #[test]
    fn conjugation_is_an_involution(re in -5i64..5, im in -5i64..5, a in -5i64..5, b in -5i64..5) {
        let src = format!("({})*x*conj(y) + ({})*x^2 + ({})*conj(x)*y^2 + ({})*y", re, im, a, b);
        let f = parse_mixed_function("f", &["x", "y"], &src).unwrap();
        prop_assert_eq!(formal_conj(&formal_conj(f.formal())), f.formal().clone());
    }

    #[test]
    fn realified_evaluation_agrees(z in prop::collection::vec((-4i64..=4, -4i64..=4), 2)) {
        let f = parse_mixed_function("f", &["x", "y"], "x*y*conj(x) - conj(y)^2 + 3*x").unwrap();
        let pt: Vec<ComplexRational> = z.iter().map(|&(a, b)| ComplexRational::new(int(a), int(b))).collect();
        prop_assert_eq!(f.eval_realified(&pt).unwrap(), f.expr().eval(&pt));
    }
}
