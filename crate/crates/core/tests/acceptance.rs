//! Acceptance criteria AC1-AC11, one test each. Expected values come either from
//! the published examples or from an oracle computed here independently of the
//! code path under test.

use std::fs;
use std::time::{Duration, Instant};

use germlab::corpus::{default_dir, entry_ids};
use germlab::dsl::{parse_document, parse_polynomial, Document};
use germlab::facts::Fact;
use germlab::germ::RealMapGerm;
use germlab::matrix::{rational_rank, PolyMatrix};
use germlab::mixed::{realify_point, wirtinger_gradients, ComplexRational, MixedExpr, MixedFunction};
use germlab::pipeline::{certify, RunConfig};
use germlab::poly::{int, rat, to_f64, Ctx, Monomial, Polynomial, Rational, ZeroTester};
use germlab::regularity::{hwc_check, hwc_check_mixed, product_pair, ProductOutcome};
use germlab::sample::RationalSampler;
use germlab::witness::{
    composition_condition_exact, composition_condition_sampled, condition_b_probe, image_in_milnor_check,
    thom_irregularity_witness, verify_b_witness, InclusionVerdict, ProbeConfig, SampleRegion, StratumParam,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn doc(id: &str) -> Document {
    let path = default_dir().join(format!("{}.germ", id));
    parse_document(&fs::read_to_string(path).unwrap()).unwrap()
}

fn germ(d: &Document, name: &str) -> RealMapGerm {
    d.germ(name).unwrap().germ.clone()
}

fn p(src: &str, ctx: &Ctx) -> Polynomial {
    parse_polynomial(src, ctx).unwrap()
}

fn texts(v: &[Polynomial]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Rational point on the unit-circle parametrization `((1-s^2)/(1+s^2), 2s/(1+s^2))`.
fn circle(s: &Rational) -> (Rational, Rational) {
    let one = int(1);
    let d = &one + s * s;
    ((&one - s * s) / &d, (int(2) * s) / &d)
}

fn rationals(seed: u64, n: usize) -> Vec<Rational> {
    let mut rng = RationalSampler::new(seed, 3);
    (0..n).map(|_| rng.rational()).filter(|r| *r != int(0)).collect()
}

#[test]
fn ac01_ex1_factored_determinant() {
    let start = Instant::now();
    let g = germ(&doc("ex1"), "G");
    let ctx = g.ctx().clone();
    let claimed = &p("x^2 + y^2", &ctx).pow(7) * &p("2*a^2 + 2*b^2 + 2*w^2 - x^2 - y^2 + 2*z^2", &ctx).pow(2);
    assert_eq!(g.milnor_polynomial().milnor_poly, claimed);
    assert!(start.elapsed() < Duration::from_secs(60), "{:?}", start.elapsed());
}

#[test]
fn ac02_mfx1_square_determinant() {
    let d = doc("mfx1");
    let g = germ(&d, "G");
    let ctx = g.ctx().clone();
    // rows grad(xy), grad(xz), (x, y, z); rule of Sarrus
    let m: Vec<Vec<Polynomial>> = [["y", "x", "0"], ["z", "0", "x"], ["x", "y", "z"]]
        .iter()
        .map(|r| r.iter().map(|e| p(e, &ctx)).collect())
        .collect();
    let sarrus = &(&(&(&m[0][0] * &m[1][1]) * &m[2][2]) + &(&(&m[0][1] * &m[1][2]) * &m[2][0]))
        + &(&(&(&m[0][2] * &m[1][0]) * &m[2][1])
            - &(&(&(&(&m[0][2] * &m[1][1]) * &m[2][0]) + &(&(&m[0][0] * &m[1][2]) * &m[2][1])) + &(&(&m[0][1] * &m[1][0]) * &m[2][2])));
    let milnor = g.milnor_polynomial();
    let det = milnor.square_det.clone().unwrap();
    assert_eq!(det, sarrus);
    assert_eq!(det.to_string(), "x^3 - x*y^2 - x*z^2");
    assert_eq!(milnor.milnor_poly, det.pow(2));

    for phi in d.germ("G").unwrap().set_components("M") {
        assert!(phi.pullback(&det).unwrap().is_zero());
    }
    // independent points on the plane and on the cone
    for (r, s) in rationals(1, 20).iter().zip(rationals(2, 20)) {
        let (c, sn) = circle(&s);
        let cone = [r.clone(), r * &c, r * &sn];
        assert_eq!(det.evaluate(&cone).unwrap(), int(0));
        assert_eq!(det.evaluate(&[int(0), r.clone(), s.clone()]).unwrap(), int(0));
    }
}

#[test]
fn ac03_e21_hwc_chain() {
    let d = doc("e21");
    let g = germ(&d, "G");
    let ctx = g.ctx().clone();
    let displayed = p(
        "4*w^4*x^2+4*w^4*y^2+4*w^2*x^4+8*w^2*x^2*y^2+8*w^2*x^2*z^2+4*w^2*y^4+8*w^2*y^2*z^2\
         +4*x^4*z^2+8*x^2*y^2*z^2+4*x^2*z^4+4*y^4*z^2+4*y^2*z^4+a^2+b^2+c^2+d^2",
        &ctx,
    );
    let cert = hwc_check(&g);
    assert!(cert.holds);
    assert_eq!(cert.lambda, displayed);
    // oracle: both gradient norms and the pairing, by hand
    let grad = |c: &Polynomial| -> Vec<Polynomial> { (0..8).map(|i| c.derivative(i)).collect() };
    let (g1, g2) = (grad(&g.components()[0]), grad(&g.components()[1]));
    let dot = |a: &[Polynomial], b: &[Polynomial]| a.iter().zip(b).fold(Polynomial::zero(&ctx), |s, (x, y)| &s + &(x * y));
    assert_eq!(dot(&g2, &g2), displayed);
    assert!(dot(&g1, &g2).is_zero());

    let cert = certify(&d, &RunConfig::default()).unwrap();
    let report = cert.report("G").unwrap();
    for f in [Fact::DiscZero, Fact::ThomRegular, Fact::ConditionB] {
        assert!(report.has(f), "{} missing:\n{}", f, report);
        assert!(report.chain(f).contains("hwc_check"), "{}", report.chain(f));
    }
    assert_eq!(report.derivation(Fact::ThomRegular).unwrap().rule, "tma");
    assert!(report.replay().is_ok());
}

#[test]
fn ac04_product_pair() {
    let d = doc("product");
    let pos = germ(&d, "P");
    let c = pos.components();
    let built = match product_pair("P", [&c[0], &c[1], &c[2], &c[3]]).unwrap() {
        ProductOutcome::Built { germ, hwc } => {
            assert!(hwc.holds);
            germ
        }
        ProductOutcome::Rejected { residuals } => panic!("rejected: {:?}", texts(&residuals.iter().map(|r| r.poly.clone()).collect::<Vec<_>>())),
    };
    let expect = [&(&c[0] * &c[2]) - &(&c[1] * &c[3]), &(&c[0] * &c[3]) + &(&c[1] * &c[2])];
    assert_eq!(built.components(), &expect);
    assert!(hwc_check(&built).holds);

    let neg = germ(&d, "N");
    let n = neg.components();
    let dot = |a: &Polynomial, b: &Polynomial| (0..6).fold(Polynomial::zero(neg.ctx()), |s, i| &s + &(&a.derivative(i) * &b.derivative(i)));
    let r1 = &dot(&n[0], &n[2]) - &dot(&n[1], &n[3]);
    let r2 = &dot(&n[0], &n[3]) + &dot(&n[1], &n[2]);
    assert!(!r1.is_zero() || !r2.is_zero());
    match product_pair("N", [&n[0], &n[1], &n[2], &n[3]]).unwrap() {
        ProductOutcome::Rejected { residuals } => {
            assert!(!residuals.is_empty());
            assert!(residuals.iter().all(|r| !r.poly.is_zero()));
            assert!(residuals.iter().any(|r| r.poly == r1 || r.poly == r2));
        }
        ProductOutcome::Built { .. } => panic!("N must be rejected"),
    }
}

#[test]
fn ac05_ent1_irregularity_witness() {
    let d = doc("ent1");
    let g = germ(&d, "G");
    let w = d.witnesses().next().unwrap();
    let stratum = StratumParam::new(&g, w.stratum.clone()).unwrap();
    let tw = thom_irregularity_witness(&g, &stratum, &w.curve, &w.coeffs).unwrap();
    let s_ctx = w.curve.params().clone();
    assert_eq!(texts(&tw.limit.leading), ["0", "0", "2*s"]);
    assert_eq!(tw.inner_products, vec![p("2*s", &s_ctx)]);
    assert!(tw.is_witness);
    // oracle: n(t) = c1*grad G1 + c2*grad G2 at (t, 0, s) is (0, t, 2s)
    for &(t, s) in &[(1e-3, 0.7), (0.25, -1.3), (2.0, 0.1)] {
        let n = tw.normal.eval_f64(t, &[s]);
        let expect = [0.0, t, 2.0 * s];
        for (a, b) in n.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{:?}", n);
        }
    }
    let cert = certify(&d, &RunConfig::default()).unwrap();
    assert!(cert.report("G").unwrap().has(Fact::NotThomRegular));
}

#[test]
fn ac06_condition_b_probes() {
    let d = doc("mhx1");
    let g = germ(&d, "G");
    let milnor = g.milnor_polynomial().milnor_poly;
    let b = d.bwitnesses().next().unwrap();
    let bw = verify_b_witness(&g, &milnor, &b.curve).unwrap();
    assert_eq!(texts(&bw.limit), ["0", "s", "0"]);
    // oracle: (t, s, 0) lies in M(G) minus V_G for t != 0 and ends on V_G
    for (t, s) in rationals(3, 30).iter().zip(rationals(4, 30)) {
        let pt = [t.clone(), s.clone(), int(0)];
        assert_eq!(milnor.evaluate(&pt).unwrap(), int(0));
        assert_ne!(g.evaluate(&pt).unwrap()[0], int(0));
        assert!(g.evaluate(&[int(0), s.clone(), int(0)]).unwrap().iter().all(|v| *v == int(0)));
    }
    let cfg = ProbeConfig::default();
    assert!(condition_b_probe(&g, d.germ("G").unwrap().set_components("V"), &cfg).unwrap().violation);

    let e = doc("exaa");
    let probe = condition_b_probe(&germ(&e, "G"), e.germ("G").unwrap().set_components("V"), &cfg).unwrap();
    assert!(probe.accepted > 0);
    assert!(!probe.violation, "{:?}", probe.min_relative_distance);
}

#[test]
fn ac07_composition_exact() {
    let d = doc("comp48");
    let (f, g) = (germ(&d, "F"), germ(&d, "G"));
    let c = d.compositions().next().unwrap();
    let closure = c.closure.clone().unwrap();
    assert_eq!(closure, p("t^2 - 4*(u^2 + v^2)^3", g.ctx()));
    // oracle: points (r*cos, r*sin, r, 0) of the circle component, pushed through F by hand
    for (r, s) in rationals(5, 25).iter().zip(rationals(6, 25)) {
        let (cs, sn) = circle(&s);
        let (x, y, z) = (r * &cs, r * &sn, r.clone());
        let t = &z * &(&(&x * &x + &y * &y) + &(&z * &z));
        assert_eq!(closure.evaluate(&[x, y, t]).unwrap(), int(0));
    }
    let circle_comp = &c.milnor_components[1];
    let pulled = circle_comp.push_forward(&f, g.ctx()).unwrap().pullback(&closure).unwrap();
    assert!(pulled.is_zero());

    let exact = composition_condition_exact(&f, &g, &c.milnor_components, Some(&closure), d.germ("G").unwrap().set_components("Sing")).unwrap();
    assert!(exact.holds);
    let cert = certify(&d, &RunConfig::default()).unwrap();
    let h = cert.report("H").unwrap();
    assert_eq!(h.derivation(Fact::ConditionB).map(|d| d.rule.as_str()), Some("tp"), "{}", h);
}

#[test]
fn ac08_inclusion() {
    let d = doc("incl");
    let (f, g) = (germ(&d, "F"), germ(&d, "G"));
    let c = d.compositions().find(|c| c.name == "H").unwrap();
    let verdict = image_in_milnor_check(&f, &g, &c.milnor_components, d.germ("G").unwrap().set_components("M")).unwrap();
    assert_eq!(verdict, InclusionVerdict::Holds { components: 3 });
    // oracle: M(G) for G = (u, v(u^2+v^2)) is t*(u^2+3v^2) = 0; evaluate on F of each component
    let m_g = |u: &Rational, v: &Rational, t: &Rational| t * &(u * u + int(3) * v * v);
    let fmap = |x: &Rational, y: &Rational, z: &Rational, w: &Rational| (x * w, y * w, z * w);
    for (a, b) in rationals(7, 20).iter().zip(rationals(8, 20)) {
        let (u, v, t) = fmap(a, &b, a, &int(0));
        assert_eq!(m_g(&u, &v, &t), int(0));
        let (u, v, t) = fmap(&int(0), &int(0), a, &b);
        assert_eq!(m_g(&u, &v, &t), int(0));
        let (cs, sn) = circle(&b);
        let (u, v, t) = fmap(&(a * &cs), &(a * &sn), &int(0), a);
        assert_eq!(m_g(&u, &v, &t), int(0));
    }
    assert_eq!(g.milnor_polynomial().milnor_poly, p("t^2*(u^2 + 3*v^2)^2", g.ctx()));
    let cert = certify(&d, &RunConfig::default()).unwrap();
    let h = cert.report("H").unwrap();
    assert_eq!(h.derivation(Fact::ConditionB).map(|d| d.rule.as_str()), Some("incl"), "{}", h);
}

#[test]
fn ac09_composition_sampled() {
    let start = Instant::now();
    let d = doc("contraexamplo");
    let (f, g) = (germ(&d, "F"), germ(&d, "G"));
    let cfg = ProbeConfig::default();
    let region = SampleRegion::parse("x=free:z; y=log:1e-6:1e-4; z=0.05:0.3; w=0", f.ctx(), cfg.r_max).unwrap();
    let probe = composition_condition_sampled(&f, &g, d.germ("G").unwrap().set_components("Sing"), &region, &cfg).unwrap();
    assert!(probe.violation);
    assert!(probe.min_relative_distance.unwrap() < 1e-3);
    // oracle: Sing G = {v = 0}, so the distance of an image point is |v|
    let y = probe.best_point.clone().unwrap();
    let ny = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!(ny >= 0.05, "{}", ny);
    assert!(y[1].abs() / ny < 1e-3, "{:?}", y);
    assert!(start.elapsed() < Duration::from_secs(30), "{:?}", start.elapsed());
}

fn mixed_functions() -> Vec<MixedFunction> {
    let mut out = Vec::new();
    for (id, names) in [("zsq", &["f"][..]), ("alg1", &["f"][..]), ("algorithm", &["f"][..]), ("t", &["T"][..]), ("e1", &["G"][..])] {
        let d = doc(id);
        for n in names {
            out.extend(d.germ(n).unwrap().mixed.as_ref().unwrap().functions().iter().cloned());
        }
    }
    out
}

#[test]
fn ac10_route_agreement() {
    let fs = mixed_functions();
    assert_eq!(fs.len(), 6);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for f in &fs {
        let complex = hwc_check_mixed(f);
        let real = hwc_check(f.realified());
        assert_eq!(complex.holds, real.holds, "{}", f.name());
        if complex.holds {
            assert_eq!(complex.lambda, real.lambda, "{}", f.name());
        }
        let (dz, dzbar) = wirtinger_gradients(f);
        assert_eq!(dz, f.dz, "{}", f.name());
        assert_eq!(dzbar, f.dzbar, "{}", f.name());
        for _ in 0..100 {
            let z: Vec<ComplexRational> = (0..f.n())
                .map(|_| ComplexRational::new(rat(rng.gen_range(-20..=20), rng.gen_range(1..=7)), rat(rng.gen_range(-20..=20), rng.gen_range(1..=7))))
                .collect();
            assert_eq!(f.eval_realified(&z).unwrap(), f.expr().eval(&z), "{}", f.name());
            let pt = realify_point(&z);
            for j in 0..f.n() {
                let direct = MixedExpr::from_formal(&f.dz_formal(j)).eval(&z);
                assert_eq!(f.dz[j].evaluate(&pt).unwrap(), direct);
                let direct = MixedExpr::from_formal(&f.dzbar_formal(j)).eval(&z);
                assert_eq!(f.dzbar[j].evaluate(&pt).unwrap(), direct);
            }
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, ctx: &Ctx, terms: usize, max_deg: u32) -> Polynomial {
    let m = ctx.arity();
    Polynomial::from_terms(
        ctx,
        (0..terms).map(|_| {
            let e = (0..m).map(|_| rng.gen_range(0..=max_deg)).collect();
            (Monomial(e), rat(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
        }),
    )
}

#[test]
fn ac11_oracle_suite() {
    let mut germs = Vec::new();
    for id in entry_ids(&default_dir()).unwrap() {
        let d = doc(&id);
        for decl in d.germs() {
            germs.push((format!("{}/{}", id, decl.name), decl.germ.clone(), decl.sets.iter().flat_map(|s| s.components.clone()).collect::<Vec<_>>()));
        }
    }
    assert!(germs.len() >= 25);

    for (label, g, comps) in &germs {
        let m = g.source_dim();
        let milnor = g.milnor_polynomial();
        let stacked = g.stacked_matrix();
        let full = stacked.rows();
        let tester = ZeroTester::new(&milnor.milnor_poly);
        let mut sampler = RationalSampler::new(11, 2);
        let (mut zeros, mut nonzeros) = (0, 0);
        // 200 points: half generic, half on declared sets where there are any
        let mut k = 0;
        while zeros + nonzeros < 200 {
            k += 1;
            let pt = if k % 2 == 0 && !comps.is_empty() {
                let phi = &comps[k % comps.len()];
                match phi.evaluate(&sampler.point(phi.dimension())) {
                    Some(x) if x.len() == m => x,
                    _ => continue,
                }
            } else {
                sampler.point(m)
            };
            let vanishes = tester.vanishes_at(&pt).unwrap();
            let rank = rational_rank(stacked.evaluate(&pt).unwrap());
            assert_eq!(vanishes, rank < full, "{} at {:?}", label, pt);
            if vanishes {
                zeros += 1;
            } else {
                nonzeros += 1;
            }
        }

        // Bareiss / cofactor against a floating-point LU determinant
        let mut squares: Vec<(&str, PolyMatrix, Polynomial)> = vec![("gram", stacked.gram(), milnor.milnor_poly.clone())];
        if let Some(d) = &milnor.square_det {
            squares.push(("square", stacked.clone(), d.clone()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (what, mat, det) in &squares {
            for _ in 0..50 {
                let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let vals = mat.eval_f64(&x);
                let n = vals.len();
                let numeric = DMatrix::from_fn(n, n, |i, j| vals[i][j]).determinant();
                let hadamard: f64 = vals.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).product();
                let exact = det.eval_f64(&x);
                assert!((exact - numeric).abs() <= 1e-9 * hadamard.max(1e-300), "{} {}: {} vs {}", label, what, exact, numeric);
            }
        }
    }

    // derivative laws on 100 random pairs, with a finite-difference cross-check
    let ctx = germlab::poly::VarContext::new(&["x", "y", "z", "w"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let a = random_poly(&mut rng, &ctx, 6, 4);
        let b = random_poly(&mut rng, &ctx, 6, 4);
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        let i = rng.gen_range(0..4);
        assert_eq!((&a.scale(&c) + &b).derivative(i), &a.derivative(i).scale(&c) + &b.derivative(i));
        assert_eq!((&a * &b).derivative(i), &(&a.derivative(i) * &b) + &(&a * &b.derivative(i)));
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = 1e-6;
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[i] += h;
        xm[i] -= h;
        let ab = &a * &b;
        let fd = (ab.eval_f64(&xp) - ab.eval_f64(&xm)) / (2.0 * h);
        let exact = ab.derivative(i).eval_f64(&x);
        let scale = ab.derivative(i).terms().map(|(_, c)| to_f64(c).abs()).sum::<f64>().max(1.0);
        assert!((fd - exact).abs() <= 1e-4 * scale, "fd {} exact {}", fd, exact);
    }
}
