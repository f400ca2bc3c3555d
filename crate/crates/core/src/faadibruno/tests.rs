use super::*;
use crate::jets::{jet_compose, jet_of, AnyJet};
use num_traits::Zero;

fn q(n: i64) -> BigRat {
    BigRat::from_integer(n.into())
}

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

fn spec(s: &str) -> FunctionSpec {
    FunctionSpec::parse(s).unwrap()
}

fn s12() -> DefiningSequence {
    DefiningSequence::new(1.0, 2.0).unwrap()
}

#[test]
fn fdb_square_of_cube() {
    let r = fdb_derivative(&spec("poly:0,0,1"), &spec("poly:0,0,0,1"), &mi(&[2]), &[q(1)]).unwrap();
    assert_eq!(r.value, Number::Exact(q(30)));
    let by_parts: Vec<(Vec<u32>, Vec<u32>, Number)> = r
        .terms
        .iter()
        .map(|t| {
            let p = t.decomposition.parts.iter().flat_map(|p| p.components().to_vec()).collect();
            (p, t.decomposition.multiplicities.clone(), t.value.clone())
        })
        .collect();
    assert!(by_parts.contains(&(vec![1], vec![2], Number::Exact(q(18)))));
    assert!(by_parts.contains(&(vec![2], vec![1], Number::Exact(q(12)))));
}

#[test]
fn fdb_exp_of_square() {
    let r = fdb_derivative(&FunctionSpec::Exp, &spec("poly:0,0,1"), &mi(&[2]), &[q(0)]).unwrap();
    assert_eq!(r.value, Number::Exact(q(2)));
}

#[test]
fn fdb_two_dimensional() {
    let r = fdb_derivative(&spec("poly:0,0,1"), &spec("mvpoly:1.1:1"), &mi(&[1, 1]), &[q(1), q(1)]).unwrap();
    assert_eq!(r.value, Number::Exact(q(4)));
    assert_eq!(r.terms.len(), 2);
    assert!(r.terms.iter().all(|t| t.value == Number::Exact(q(2))));
}

#[test]
fn fdb_zero_order_is_value() {
    let r = fdb_derivative(&spec("poly:1,0,1"), &spec("poly:0,0,0,1"), &mi(&[0]), &[q(2)]).unwrap();
    assert_eq!(r.value, Number::Exact(q(65)));
    assert!(r.terms.is_empty());
}

#[test]
fn fdb_limits_and_errors() {
    let f = FunctionSpec::Exp;
    assert!(matches!(
        fdb_derivative(&f, &spec("poly:0,1"), &mi(&[9]), &[q(0)]),
        Err(GevreyError::OrderLimit { limit: 8, .. })
    ));
    assert!(matches!(
        fdb_derivative(&f, &spec("mvpoly:1.0.0:1"), &mi(&[3, 2, 2]), &[q(0), q(0), q(0)]),
        Err(GevreyError::OrderLimit { limit: 6, .. })
    ));
    assert!(matches!(
        fdb_derivative(&f, &spec("mvpoly:1.0.0.0:1"), &mi(&[1, 0, 0, 0]), &vec![q(0); 4]),
        Err(GevreyError::OrderLimit { .. })
    ));
    assert_eq!(fdb_derivative(&FunctionSpec::Recip, &spec("poly:0,1"), &mi(&[2]), &[q(0)]).unwrap_err(), GevreyError::Pole);
}

fn oracle(f: &FunctionSpec, g: &FunctionSpec, alpha: &MultiIndex, at: &[BigRat]) -> Number {
    let n = alpha.order();
    match jet_of(g, at, n).unwrap() {
        AnyJet::Exact(gj) => match jet_of(f, &[gj.value().clone()], n).unwrap() {
            AnyJet::Exact(fj) => return Number::Exact(jet_compose(&fj, &gj).unwrap().partial(alpha).unwrap()),
            AnyJet::Float(fj) => {
                let gj = gj.map(rational_to_f64);
                return Number::Float(jet_compose(&fj, &gj).unwrap().partial(alpha).unwrap());
            }
        },
        AnyJet::Float(gj) => {
            let fj = f.jet_in::<f64>(&[*gj.value()], n).unwrap();
            Number::Float(jet_compose(&fj, &gj).unwrap().partial(alpha).unwrap())
        }
    }
}

#[test]
fn oracle_equivalence_on_catalog() {
    let outers = ["poly:1,-2,0,3", "exp", "sin", "cos", "recip", "compose(exp,sin)", "prod(exp,poly:0,1)"];
    let inners: [(&str, Vec<BigRat>); 7] = [
        ("poly:1,2,-1,1/2", vec![BigRat::new(1.into(), 3.into())]),
        ("sin", vec![q(0)]),
        ("sum(exp,poly:1)", vec![BigRat::new((-1).into(), 2.into())]),
        ("mvpoly:1.0:1,1.1:-2,0.2:1/3,0.0:2", vec![q(1), q(-1)]),
        ("compose(cos,mvpoly:1.0:1,0.1:1)", vec![q(0), BigRat::new(1.into(), 5.into())]),
        ("mvpoly:1.0.0:1,0.1.1:2,0.0.2:-1,0.0.0:3", vec![q(1), q(2), q(-1)]),
        ("compose(exp,mvpoly:1.1.0:1,0.0.1:1)", vec![q(0), q(1), BigRat::new(1.into(), 2.into())]),
    ];
    let mut checked = 0;
    for (g, at) in &inners {
        let g = spec(g);
        let d = at.len();
        let max = if d == 3 { 4 } else { 6 };
        for f in outers {
            let f = spec(f);
            for n in 0..=max {
                for alpha in MultiIndex::of_order(d, n) {
                    let a = match fdb_derivative(&f, &g, &alpha, at) {
                        Ok(v) => v.value,
                        Err(GevreyError::Pole) => {
                            let gj = jet_of(&g, at, n).unwrap().to_f64();
                            assert!(jet_of(&f, &[BigRat::zero()], n).is_err() && *gj.value() == 0.0);
                            continue;
                        }
                        Err(e) => panic!("{e}"),
                    };
                    let b = oracle(&f, &g, &alpha, at);
                    match (&a, &b) {
                        (Number::Exact(x), Number::Exact(y)) => assert_eq!(x, y, "{f} o {g} at {alpha}"),
                        _ => {
                            let (x, y) = (a.to_f64(), b.to_f64());
                            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{f} o {g} at {alpha}: {x} vs {y}");
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn oracle_equivalence_order_six_in_three_dimensions() {
    let g = spec("mvpoly:1.0.0:1,0.1.1:2,0.0.2:-1,1.1.1:1,0.0.0:1");
    let at = [q(1), BigRat::new(1.into(), 2.into()), q(-1)];
    for f in ["poly:0,1,1,1,1,1,1", "exp"] {
        let f = spec(f);
        for alpha in MultiIndex::of_order(3, 6) {
            let a = fdb_derivative(&f, &g, &alpha, &at).unwrap().value;
            let b = oracle(&f, &g, &alpha, &at);
            let (x, y) = (a.to_f64(), b.to_f64());
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{alpha}");
        }
    }
}

#[test]
fn exponent_identity_for_decompositions() {
    let mut alphas: Vec<MultiIndex> = (1..=10).map(|n| mi(&[n])).collect();
    for n in 1..=8 {
        alphas.extend(MultiIndex::of_order(2, n));
    }
    for n in 1..=6 {
        alphas.extend(MultiIndex::of_order(3, n));
    }
    alphas.extend([mi(&[5, 5]), mi(&[10, 0]), mi(&[3, 7]), mi(&[4, 3, 3]), mi(&[10, 0, 0]), mi(&[2, 2, 6])]);
    for sigma in [1.25, 1.5, 2.0, 3.0] {
        for alpha in &alphas {
            let n = alpha.order() as f64;
            for_each_decomposition(alpha, |d| {
                let lhs = (d.total_multiplicity() as f64).powf(sigma)
                    + d.parts.iter().zip(&d.multiplicities).map(|(p, &m)| m as f64 * (p.order() as f64).powf(sigma)).sum::<f64>();
                assert!(lhs <= 2.0 * n.powf(sigma) * (1.0 + 1e-12), "{alpha} sigma={sigma}");
            })
            .unwrap();
        }
    }
}

#[test]
fn lemma23_ratio_examples() {
    let s = s12();
    for k in 1..=10u64 {
        assert!(lemma23_ratio(&s, k, &vec![1; k as usize]).unwrap().log().abs() < 1e-12);
        assert!(lemma23_ratio(&s, 1, &[k]).unwrap().log().abs() < 1e-12);
    }
    let r = lemma23_ratio(&s, 2, &[2, 2]).unwrap().to_real();
    let expect = 512.0 * 24.0 / 4f64.powi(16);
    assert!((r / expect - 1.0).abs() < 1e-12);
    assert!((r / 2.86e-6 - 1.0).abs() < 1e-2);
    assert!(lemma23_ratio(&s, 2, &[3]).is_err());
}

#[test]
fn lemma23_constant_anchor_and_stability() {
    // Frozen anchor: C = 1 on τ ∈ {0.5,1,2}, σ ∈ {1.5,2,3}, k ≤ 12, attained at k = 1.
    for tau in [0.5, 1.0, 2.0] {
        for sigma in [1.5, 2.0, 3.0] {
            let s = DefiningSequence::new(tau, sigma).unwrap();
            let a = lemma23_constant_search(&s, 10).unwrap();
            let b = lemma23_constant_search(&s, 12).unwrap();
            assert_eq!(a.c, 1.0);
            assert_eq!(b.c, 1.0);
            assert_eq!(b.witness_k, 1);
            assert!(b.per_k.iter().all(|&(_, l)| l <= b.log_c + 1e-12));
        }
    }
    let c1 = lemma23_constant_search(&s12(), 12).unwrap().c;
    let c2 = lemma23_constant_search(&DefiningSequence::new(2.0, 2.0).unwrap(), 12).unwrap().c;
    assert!(c2 <= c1);
}

#[test]
fn lemma23_witness_never_exceeds_constant() {
    let s = DefiningSequence::new(0.25, 1.25).unwrap();
    let fit = lemma23_constant_search(&s, 12).unwrap();
    assert!(fit.c >= 1.0);
    for k in 1..=12usize {
        for parts in integer_partitions(k) {
            let parts: Vec<u64> = parts.iter().map(|&p| p as u64).collect();
            let r = lemma23_ratio(&s, parts.len() as u64, &parts).unwrap().log();
            assert!(r <= (k as f64).powf(s.sigma) * fit.log_c + 1e-12);
        }
    }
}

#[test]
fn superposition_order_one() {
    let inp = CompositionBoundInput::new(1.0, 2.0, 1.5, 2.0, 3.0).unwrap();
    let b = superposition_log_bound(&inp, &mi(&[1])).unwrap();
    assert!((b.log_bound.log() - 2.0 * b.log_c2).abs() < 1e-12);
    assert!((b.log_c2 - (3f64.ln() + 2.0 * 2f64.ln())).abs() < 1e-12);
    assert_eq!(b.log_multiplicity_sum, 0.0);
}

#[test]
fn superposition_monotone() {
    let base = CompositionBoundInput::new(1.0, 2.0, 1.5, 1.2, 2.0).unwrap();
    let bumps = [
        CompositionBoundInput { h: 1.6, ..base },
        CompositionBoundInput { h_prime: 1.7, ..base },
        CompositionBoundInput { a: 2.5, ..base },
        CompositionBoundInput { tau: 1.5, ..base },
    ];
    for alpha in [mi(&[2]), mi(&[5]), mi(&[2, 3])] {
        let b0 = superposition_log_bound(&base, &alpha).unwrap().log_bound.log();
        for inp in &bumps {
            let b1 = superposition_log_bound(inp, &alpha).unwrap().log_bound.log();
            assert!(b1 > b0, "{inp:?} {alpha}");
        }
    }
}

#[test]
fn multiplicity_sum_matches_powers_of_two_in_one_dimension() {
    for n in 1..=12u32 {
        let l = log_multiplicity_sum(&mi(&[n])).unwrap();
        assert!((l - (n as f64 - 1.0) * 2f64.ln()).abs() < 1e-12);
    }
    // (1,1): {(1,1)} contributes 1, {(0,1),(1,0)} contributes 2.
    assert!((log_multiplicity_sum(&mi(&[1, 1])).unwrap() - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn boundary_sigma_one_accepted_for_tau_at_least_one() {
    assert!(CompositionBoundInput::new(1.0, 1.0, 1.0, 1.0, 1.0).is_ok());
    assert!(CompositionBoundInput::new(0.5, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(CompositionBoundInput::new(1.0, 2.0, 0.0, 1.0, 1.0).is_err());
}

/// Sup over the grid of `|∂^n F|` for `n ≤ max`, from float jets.
fn sup_derivatives(spec: &FunctionSpec, grid: &[f64], max: usize) -> Vec<f64> {
    let mut sup = vec![0.0f64; max + 1];
    for &x in grid {
        let j = spec.jet_in::<f64>(&[x], max).unwrap();
        for (n, s) in sup.iter_mut().enumerate() {
            *s = s.max(j.partial(&mi(&[n as u32])).unwrap().abs());
        }
    }
    sup
}

/// Smallest `h` with `sup_p ≤ A h^{p^σ} M_p` for `1 ≤ p < sup.len()`.
fn fit_h(seq: &DefiningSequence, sup: &[f64], a: f64) -> f64 {
    (1..sup.len())
        .map(|p| ((sup[p] / a).ln() - seq.log_m(p as u64)) / (p as f64).powf(seq.sigma))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn superposition_dominates_measured_derivatives() {
    let seq = s12();
    let bump = spec("compose(exp,compose(recip,poly:-1,0,1))");
    let f = spec("compose(exp,poly:0,2)");
    let xs = grid(-0.9, 0.9, 181);
    let max = 8;
    let g_sup = sup_derivatives(&bump, &xs, max);
    let g_vals: Vec<f64> = xs.iter().map(|&x| bump.value_f64(&[x]).unwrap()).collect();
    let (lo, hi) = g_vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let f_sup = sup_derivatives(&f, &grid(lo, hi, 101), max);
    let a = g_sup[0].max(f_sup[0]).max(1.0);
    let inp = CompositionBoundInput::new(1.0, 2.0, fit_h(&seq, &g_sup, a), fit_h(&seq, &f_sup, a), a).unwrap();
    let fg = FunctionSpec::compose(f, bump);
    let measured = sup_derivatives(&fg, &xs, max);
    for n in 1..=max {
        let bound = superposition_log_bound(&inp, &mi(&[n as u32])).unwrap().log_bound.log();
        assert!(measured[n].ln() <= bound, "n = {n}: {} > {}", measured[n].ln(), bound);
        let chain = chain_log_bound(&seq, inp.a, inp.h, &mi(&[n as u32]), |m| {
            inp.a.ln() + inp.h_prime.ln() * (m as f64).powf(seq.sigma) + seq.log_m(m)
        })
        .unwrap()
        .log();
        assert!(measured[n].ln() <= chain + 1e-9, "chain n = {n}");
        assert!(chain <= bound + 1e-9);
    }
}

#[test]
fn reciprocal_bound_examples() {
    let inp = CompositionBoundInput::new(1.0, 2.0, 1.0, 1.0, 3.0).unwrap();
    let b0 = reciprocal_log_bound(&inp, &mi(&[0]), 0.5).unwrap();
    assert!((b0.to_real() - 2.0).abs() < 1e-12);
    assert!(reciprocal_log_bound(&inp, &mi(&[1]), 0.0).is_err());

    // φ = 2 + sin on [-1, 1], |φ| ≥ 1.
    let phi = spec("sum(poly:2,sin)");
    let inv = FunctionSpec::compose(FunctionSpec::Recip, phi.clone());
    let xs = grid(-1.0, 1.0, 201);
    let measured = sup_derivatives(&inv, &xs, 8);
    for n in 0..=8u32 {
        let b = reciprocal_log_bound(&inp, &mi(&[n]), 1.0).unwrap().log();
        assert!(measured[n as usize].ln() <= b, "n = {n}");
    }
}

#[test]
fn reciprocal_bound_scales_with_min_abs() {
    let inp = CompositionBoundInput::new(1.0, 2.0, 1.3, 1.0, 2.0).unwrap();
    for alpha in [mi(&[1]), mi(&[4]), mi(&[8]), mi(&[2, 3])] {
        let n = alpha.order() as f64;
        let a = reciprocal_log_bound(&inp, &alpha, 0.7).unwrap().log();
        let b = reciprocal_log_bound(&inp, &alpha, 1.4).unwrap().log();
        let drop = a - b;
        assert!(drop >= 2.0 * 2f64.ln() - 1e-12 && drop <= (n + 1.0) * 2f64.ln() + 1e-12, "{alpha}: {drop}");
    }
}

#[test]
fn fdb_terms_sum_to_value() {
    let r = fdb_derivative(&spec("sin"), &spec("poly:0,1,1"), &mi(&[5]), &[BigRat::zero()]).unwrap();
    let s: f64 = r.terms.iter().map(|t| t.value.to_f64()).sum();
    assert!((s - r.value.to_f64()).abs() < 1e-12);
    assert_eq!(r.terms.len(), 7);
}
