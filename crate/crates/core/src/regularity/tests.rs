use super::*;

fn data(v: Vec<f64>) -> DerivativeGrowthData {
    DerivativeGrowthData::new(v.into_iter().map(LogMagnitude::from_log).collect(), GrowthSource::Synthetic).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64]).collect()
}

/// `sup_{[-1,1]} |H_n(x) e^{-x²}|` by the Hermite recurrence.
fn gaussian_sups(n_max: usize, pts: usize) -> Vec<f64> {
    let mut sup = vec![0.0f64; n_max + 1];
    for i in 0..pts {
        let x = -1.0 + 2.0 * i as f64 / (pts - 1) as f64;
        let w = (-x * x).exp();
        let (mut h0, mut h1) = (1.0f64, 2.0 * x);
        sup[0] = sup[0].max(w);
        if n_max >= 1 {
            sup[1] = sup[1].max((h1 * w).abs());
        }
        for n in 1..n_max {
            let h2 = 2.0 * x * h1 - 2.0 * n as f64 * h0;
            sup[n + 1] = sup[n + 1].max((h2 * w).abs());
            h0 = h1;
            h1 = h2;
        }
    }
    sup
}

#[test]
fn seminorm_examples() {
    let mut v = vec![f64::NEG_INFINITY; 10];
    v[0] = 2f64.ln();
    let c = data(v);
    assert_eq!(seminorm_log(&c, 1.0, 2.0, 1.0).unwrap().log(), 2f64.ln());

    let exact = DerivativeGrowthData::synthetic(1.0, 2.0, 1.5, 1.0, 20);
    assert!(seminorm_log(&exact, 1.0, 2.0, 1.5).unwrap().log().abs() < 1e-9);
    assert!(seminorm_log(&exact, 1.0, 2.0, 0.0).is_err());
}

#[test]
fn gaussian_is_dominated() {
    let spec = FunctionSpec::parse("compose(exp,poly:0,0,-1)").unwrap();
    let measured = measure_growth(&spec, &grid(-1.0, 1.0, 401), 16, Norm::Sup).unwrap();
    let oracle = gaussian_sups(16, 401);
    for (n, e) in measured.entries.iter().enumerate() {
        assert!((e.to_real() / oracle[n] - 1.0).abs() < 1e-9, "n = {n}");
    }
    let s = seminorm_log(&measured, 1.0, 2.0, 1.0).unwrap();
    assert!(s.is_finite() && s.log() < 1.0);
}

#[test]
fn seminorm_monotone_in_h_and_tau() {
    let spec = FunctionSpec::parse("compose(recip,poly:2,0,1)").unwrap();
    let d = measure_growth(&spec, &grid(-1.0, 1.0, 201), 14, Norm::Sup).unwrap();
    let mut prev = f64::INFINITY;
    for h in [0.5, 0.8, 1.0, 1.5, 3.0] {
        let s = seminorm_log(&d, 1.0, 1.5, h).unwrap().log();
        assert!(s <= prev);
        prev = s;
    }
    let mut prev = f64::INFINITY;
    for tau in [0.25, 0.5, 1.0, 2.0] {
        let s = seminorm_log(&d, tau, 1.5, 1.0).unwrap().log();
        assert!(s <= prev);
        prev = s;
    }
}

#[test]
fn nesting_witness() {
    let d = DerivativeGrowthData::synthetic(0.8, 1.5, 1.2, 2.0, 20);
    assert!(is_admissible(&d, 0.8, 1.5, 1.2, 2.0 + 1e-9).unwrap());
    for tau in [0.9, 1.0, 2.0] {
        assert!(is_admissible(&d, tau, 1.5, 1.2, 2.0 + 1e-9).unwrap());
    }
}

#[test]
fn equivalence_gap_examples() {
    let d = DerivativeGrowthData::synthetic(1.0, 2.0, 1.5, 1.0, 24);
    let g = seminorm_equivalence_gap(&d, 1.0, 2.0).unwrap();
    assert!(!g.form_21.empty && !g.form_22.empty);
    assert!((g.form_21.h_min - 1.5).abs() < 1e-9);
    assert!(g.consistent);

    let zero = data(vec![f64::NEG_INFINITY; 12]);
    let g = seminorm_equivalence_gap(&zero, 1.0, 2.0).unwrap();
    assert_eq!(g.form_21, HInterval { empty: false, h_min: 0.0 });
    assert_eq!(g.form_22, HInterval { empty: false, h_min: 0.0 });
    assert!(g.consistent);

    // n!^n: n ln n! against τ n² ln n with τ < 1 grows like (1-τ) ln n.
    let nn: Vec<f64> = (0..=30).map(|n| n as f64 * log_factorial(n).log()).collect();
    let g = seminorm_equivalence_gap(&data(nn.clone()), 0.5, 2.0).unwrap();
    assert!(g.form_21.empty && g.form_22.empty);
    assert!(g.consistent);
    // but τ = 2 absorbs it
    let g = seminorm_equivalence_gap(&data(nn), 2.0, 2.0).unwrap();
    assert!(!g.form_21.empty && !g.form_22.empty);

    // e^{n^3} beats every σ ≤ 2
    let cubic: Vec<f64> = (0..=30).map(|n| (n as f64).powi(3)).collect();
    let g = seminorm_equivalence_gap(&data(cubic), 2.0, 2.0).unwrap();
    assert!(g.form_21.empty && g.form_22.empty);
}

#[test]
fn equivalence_gap_on_grid_of_synthetic_data() {
    for tau in [0.5, 1.0, 2.0] {
        for sigma in [1.25, 1.5, 2.0, 3.0] {
            for h in [0.5, 1.0, 2.0] {
                let d = DerivativeGrowthData::synthetic(tau, sigma, h, 3.0, 24);
                let g = seminorm_equivalence_gap(&d, tau, sigma).unwrap();
                assert!(g.consistent, "({tau},{sigma},{h}): {g:?}");
            }
        }
    }
}

#[test]
fn fit_recovers_synthetic_parameters() {
    let grid = [1.5, 2.0, 2.5, 3.0];
    let d = DerivativeGrowthData::synthetic(1.0, 2.0, 1.0, 1.0, 24);
    let f = fit_regularity(&d, &grid).unwrap();
    assert_eq!(f.sigma_hat, 2.0);
    assert!((0.9..=1.1).contains(&f.tau_hat));
    assert!(f.admissible);
    for tau in [0.5, 1.0, 2.0] {
        for &sigma in &grid {
            for (h, a) in [(0.5, 1.0), (2.0, 5.0)] {
                let d = DerivativeGrowthData::synthetic(tau, sigma, h, a, 24);
                let f = fit_regularity(&d, &grid).unwrap();
                assert_eq!(f.sigma_hat, sigma);
                assert!((f.tau_hat / tau - 1.0).abs() <= 0.1);
                assert!(f.admissible);
            }
        }
    }
}

#[test]
fn fit_envelope_covers_data() {
    let spec = FunctionSpec::parse("compose(recip,poly:2,0,1)").unwrap();
    let d = measure_growth(&spec, &grid(-1.0, 1.0, 201), 20, Norm::Sup).unwrap();
    let f = fit_regularity(&d, &[1.25, 1.5, 2.0]).unwrap();
    for (n, e) in d.entries.iter().enumerate() {
        let env = envelope(f.log_a_hat, f.log_h_hat, f.tau_hat, f.sigma_hat, n);
        assert!(e.log() <= env + 1e-9, "n = {n}");
    }
}

#[test]
fn fit_gevrey_boundary_data() {
    let d = data((0..=24).map(|n| 2.0 * log_factorial(n).log()).collect());
    let f = fit_regularity(&d, &[1.5, 2.0, 2.5, 3.0]).unwrap();
    assert_eq!(f.sigma_hat, 1.5);
    assert!(f.admissible);
}

#[test]
fn fit_degenerate_and_errors() {
    let mut v = vec![f64::NEG_INFINITY; 12];
    v[0] = 0.0;
    let f = fit_regularity(&data(v), &[2.0]).unwrap();
    assert!(f.degenerate && f.admissible);

    let mut v = vec![f64::NEG_INFINITY; 12];
    v[0] = 0.0;
    v[1] = 0.0;
    v[2] = 1.0;
    assert!(matches!(fit_regularity(&data(v), &[2.0]), Err(GevreyError::Degenerate(_))));
    assert!(fit_regularity(&DerivativeGrowthData::synthetic(1.0, 2.0, 1.0, 1.0, 7), &[2.0]).is_err());
    assert!(fit_regularity(&DerivativeGrowthData::synthetic(1.0, 2.0, 1.0, 1.0, 10), &[1.0]).is_err());
}

#[test]
fn csv_round_trip() {
    let mut d = DerivativeGrowthData::synthetic(1.0, 2.0, 1.3, 2.0, 10);
    d.entries[3] = LogMagnitude::ZERO;
    let back = DerivativeGrowthData::from_csv(&d.to_csv()).unwrap();
    assert_eq!(back.entries, d.entries);
    assert!(DerivativeGrowthData::from_csv("0,1\n2,3\n").is_err());
    assert!(DerivativeGrowthData::from_csv("0,1\n1,x\n").is_err());
}

#[test]
fn finite_differences_track_jets() {
    let spec = FunctionSpec::parse("compose(exp,poly:0,0,-1)").unwrap();
    let s = 1.0 / 1024.0;
    let samples: Vec<f64> = (0..=2048).map(|i| (-(-1.0 + i as f64 * s).powi(2)).exp()).collect();
    let fd = measure_growth_fd(&samples, s, 12).unwrap();
    assert!(fd.n_max() >= 4, "only {} orders reliable", fd.n_max());
    // the stencil trims the ends, so compare against the interior sup
    let exact = measure_growth(&spec, &grid(-0.9, 0.9, 901), fd.n_max(), Norm::Sup).unwrap();
    for n in 0..=fd.n_max() {
        let rel = (fd.entries[n].to_real() / exact.entries[n].to_real() - 1.0).abs();
        assert!(rel < 0.02, "n = {n}: {rel}");
    }
}

#[test]
fn l2_norm_of_constant() {
    let spec = FunctionSpec::parse("poly:3").unwrap();
    let pts = grid(0.0, 1.0, 101);
    let d = measure_growth(&spec, &pts, 3, Norm::L2 { cell_volume: 0.01 }).unwrap();
    assert!((d.entries[0].to_real() - (9.0 * 101.0 * 0.01f64).sqrt()).abs() < 1e-12);
    assert!(d.entries[1].is_zero());
}
