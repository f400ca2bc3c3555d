use super::*;
use crate::numerics::binomial;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64) -> BigRat {
    BigRat::from_integer(n.into())
}

fn qr(n: i64, d: i64) -> BigRat {
    BigRat::new(n.into(), d.into())
}

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

fn exact(spec: &str, base: &[BigRat], k: usize) -> Jet<BigRat> {
    match jet_of(&FunctionSpec::parse(spec).unwrap(), base, k).unwrap() {
        AnyJet::Exact(j) => j,
        AnyJet::Float(_) => panic!("expected exact jet for {spec}"),
    }
}

#[test]
fn cube_at_one() {
    let j = exact("poly:0,0,0,1", &[q(1)], 3);
    assert_eq!(j.coeffs(), &[q(1), q(3), q(3), q(1)]);
    assert_eq!(j.partial(&mi(&[2])).unwrap(), q(6));
    assert_eq!(j.partial(&mi(&[0])).unwrap(), q(1));
    assert!(matches!(j.partial(&mi(&[4])), Err(GevreyError::OrderExceedsTruncation { .. })));
}

#[test]
fn exp_at_zero_is_exact() {
    let j = exact("exp", &[q(0)], 4);
    assert_eq!(j.coeffs(), &[q(1), q(1), qr(1, 2), qr(1, 6), qr(1, 24)]);
}

#[test]
fn exp_at_one_falls_back_to_float() {
    let j = jet_of(&FunctionSpec::Exp, &[q(1)], 3).unwrap();
    assert!(!j.is_exact());
    let v = j.partial(&mi(&[3])).unwrap().to_f64();
    assert!((v - std::f64::consts::E).abs() < 1e-14);
}

#[test]
fn bilinear_at_one_one() {
    let j = exact("mvpoly:1.1:1", &[q(1), q(1)], 2);
    assert_eq!(j.coeff(&mi(&[1, 1])), q(1));
    assert_eq!(j.coeff(&mi(&[2, 0])), q(0));
    assert_eq!(j.partial(&mi(&[1, 1])).unwrap(), q(1));
}

#[test]
fn compose_examples() {
    let g = exact("poly:0,0,0,1", &[q(1)], 2);
    let id = Jet::variable(0, &[g.value().clone()], 2);
    assert_eq!(jet_compose(&id, &g).unwrap(), g);

    let f = exact("poly:0,0,1", &[q(1)], 2);
    let fg = jet_compose(&f, &g).unwrap();
    assert_eq!(fg.coeff(&mi(&[2])), q(15));
    assert_eq!(fg.partial(&mi(&[2])).unwrap(), q(30));

    let f = exact("exp", &[q(0)], 2);
    let g = exact("poly:0,0,1", &[q(0)], 2);
    let fg = jet_compose(&f, &g).unwrap();
    assert_eq!(fg.coeffs(), &[q(1), q(0), q(1)]);
    assert_eq!(fg.partial(&mi(&[2])).unwrap(), q(2));
}

#[test]
fn compose_rejects_mismatched_base() {
    let f = exact("exp", &[q(0)], 2);
    let g = exact("poly:1,1", &[q(0)], 2);
    assert!(matches!(jet_compose(&f, &g), Err(GevreyError::BaseMismatch { .. })));
}

#[test]
fn recip_pole() {
    assert_eq!(jet_of(&FunctionSpec::Recip, &[q(0)], 3).unwrap_err(), GevreyError::Pole);
    let spec = FunctionSpec::parse("compose(recip,poly:-1,1)").unwrap();
    assert_eq!(jet_of(&spec, &[q(1)], 3).unwrap_err(), GevreyError::Pole);
}

#[test]
fn recip_matches_geometric_series() {
    // 1/(2+h) = Σ (-1)^n h^n / 2^{n+1}
    let j = exact("recip", &[q(2)], 6);
    for n in 0..=6u32 {
        let expect = qr(if n % 2 == 0 { 1 } else { -1 }, 1 << (n + 1));
        assert_eq!(j.coeff(&mi(&[n])), expect);
    }
}

#[test]
fn binomial_expansion_of_powers() {
    // (1+h)^n at base 1: coefficients C(n,k).
    for n in 1..=9u32 {
        let mut c = vec![0i64; n as usize + 1];
        c[n as usize] = 1;
        let j = FunctionSpec::poly_i64(&c).jet_in::<BigRat>(&[q(1)], n as usize).unwrap();
        for k in 0..=n {
            let b = binomial(n as u64, k as u64);
            assert_eq!(j.coeff(&mi(&[k])), BigRat::from_integer(b.into()));
        }
    }
}

#[test]
fn trig_float_coefficients() {
    let x = 0.7f64;
    let s = FunctionSpec::Sin.jet_in::<f64>(&[x], 5).unwrap();
    let derivs = [x.sin(), x.cos(), -x.sin(), -x.cos(), x.sin(), x.cos()];
    for (n, d) in derivs.iter().enumerate() {
        let v = s.partial(&mi(&[n as u32])).unwrap();
        assert!((v - d).abs() < 1e-14, "n = {n}");
    }
    let c = FunctionSpec::Cos.jet_in::<f64>(&[x], 3).unwrap();
    assert!((c.partial(&mi(&[1])).unwrap() + x.sin()).abs() < 1e-15);
}

#[test]
fn derivative_lowers_order() {
    let j = exact("poly:0,0,0,1", &[q(2)], 3);
    let d = j.derivative(0).unwrap();
    assert_eq!(d.order(), 2);
    // 3x^2 at 2: 12, 12, 3
    assert_eq!(d.coeffs(), &[q(12), q(12), q(3)]);
    let t = j.truncate(1);
    assert_eq!(t.coeffs(), &[q(8), q(12)]);
}

#[test]
fn spec_round_trip_and_arity() {
    for s in [
        "poly:1,-1/2,3",
        "mvpoly:1.0:2,0.1:-1,1.1:1/3",
        "compose(exp,compose(recip,poly:-1,0,1))",
        "sum(sin,prod(cos,poly:2))",
        "compose(poly:0,0,1,mvpoly:1.1:1)",
    ] {
        let spec = FunctionSpec::parse(s).unwrap();
        assert_eq!(FunctionSpec::parse(&spec.to_string()).unwrap(), spec, "{s}");
    }
    assert_eq!(FunctionSpec::parse("poly:0,0,1").unwrap(), FunctionSpec::poly_i64(&[0, 0, 1]));
    assert!(FunctionSpec::parse("sum(mvpoly:1.1:1,exp)").is_err());
    assert!(FunctionSpec::parse("compose(mvpoly:1.1:1,exp)").is_err());
    assert!(FunctionSpec::parse("tan").is_err());
    assert!(FunctionSpec::parse("compose(exp").is_err());
    assert!(FunctionSpec::parse("poly:1,x").is_err());
    assert_eq!(FunctionSpec::parse("poly:3").unwrap().arity().unwrap(), None);
}

#[test]
fn dimension_checked_against_base() {
    let spec = FunctionSpec::parse("mvpoly:1.1:1").unwrap();
    assert!(matches!(jet_of(&spec, &[q(1)], 2), Err(GevreyError::DimensionMismatch { .. })));
}

#[test]
fn associativity_on_catalog_triples() {
    // (f∘g)∘h = f∘(g∘h) coefficientwise.
    let triples = [
        ("exp", "sin", "poly:0,1,1"),
        ("recip", "poly:2,1", "cos"),
        ("sin", "exp", "poly:0,-1,0,1"),
        ("poly:1,2,3", "recip", "poly:3,1"),
    ];
    for (f, g, h) in triples {
        let (f, g, h) = (FunctionSpec::parse(f).unwrap(), FunctionSpec::parse(g).unwrap(), FunctionSpec::parse(h).unwrap());
        let k = 6;
        let x0 = [0.3f64];
        let hj = h.jet_in::<f64>(&x0, k).unwrap();
        let gj = g.jet_in::<f64>(&[*hj.value()], k).unwrap();
        let gh = jet_compose(&gj, &hj).unwrap();
        let fj = f.jet_in::<f64>(&[*gh.value()], k).unwrap();
        let left = jet_compose(&fj, &gh).unwrap();
        let fg = jet_compose(&fj, &gj).unwrap();
        let right = jet_compose(&fg, &hj).unwrap();
        for (a, b) in left.coeffs().iter().zip(right.coeffs()) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }
}

#[test]
fn compose_matches_direct_polynomial() {
    // (x1 + x2^2)^3 at (1, 2): compose vs expanded mvpoly.
    let inner = FunctionSpec::parse("mvpoly:1.0:1,0.2:1").unwrap();
    let outer = FunctionSpec::poly_i64(&[0, 0, 0, 1]);
    let expanded = FunctionSpec::parse("mvpoly:3.0:1,2.2:3,1.4:3,0.6:1").unwrap();
    let base = [q(1), q(2)];
    let a = FunctionSpec::compose(outer, inner).jet_in::<BigRat>(&base, 5).unwrap();
    let b = expanded.jet_in::<BigRat>(&base, 5).unwrap();
    assert_eq!(a, b);
}

fn small_poly() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, 1..5)
}

proptest! {
    #[test]
    fn product_rule_closure(a in small_poly(), b in small_poly(), c in small_poly(), x0 in -3i64..=3, y0 in -3i64..=3) {
        // a(x1) + c(x2), times b(x1 x2)
        let base = [q(x0), q(y0)];
        let k = 5;
        let fa = FunctionSpec::sum(
            FunctionSpec::compose(FunctionSpec::poly_i64(&a), FunctionSpec::parse("mvpoly:1.0:1").unwrap()),
            FunctionSpec::compose(FunctionSpec::poly_i64(&c), FunctionSpec::parse("mvpoly:0.1:1").unwrap()),
        );
        let fb = FunctionSpec::compose(FunctionSpec::poly_i64(&b), FunctionSpec::parse("mvpoly:1.1:1").unwrap());
        let ja = fa.jet_in::<BigRat>(&base, k).unwrap();
        let jb = fb.jet_in::<BigRat>(&base, k).unwrap();
        let prod = ja.mul(&jb);
        for alpha in MultiIndex::up_to_order(2, k) {
            let mut rhs = BigRat::zero();
            for beta in alpha.lower_set() {
                let gamma = alpha.checked_sub(&beta).unwrap();
                let bin = BigRat::from_integer(alpha.binomial(&beta).into());
                rhs += bin * ja.partial(&beta).unwrap() * jb.partial(&gamma).unwrap();
            }
            prop_assert_eq!(prod.partial(&alpha).unwrap(), rhs);
        }
    }

    #[test]
    fn recip_times_self_is_one(c in small_poly(), x0 in 1i64..=4) {
        let mut c = c;
        c[0] = c[0].abs() + 40;
        let spec = FunctionSpec::poly_i64(&c);
        let j = spec.jet_in::<BigRat>(&[q(x0)], 6).unwrap();
        prop_assume!(!j.value().is_zero());
        let r = j.recip().unwrap();
        let one = j.mul(&r);
        prop_assert!(one.value().is_one());
        prop_assert!(one.coeffs()[1..].iter().all(|x| x.is_zero()));
    }
}
