use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gevrey_core::faadibruno::{fdb_derivative, lemma23_constant_search};
use gevrey_core::jets::FunctionSpec;
use gevrey_core::multiindex::{decomposition_census, MultiIndex};
use gevrey_core::numerics::BigRat;
use gevrey_core::parametrix::{build_reduction_operators, catalog_operator, neumann_sums_range, xi_samples};
use gevrey_core::sequences::{audit_sequence, DefiningSequence};
use gevrey_core::wavefront::{catalog_field, make_cutoff, spectrum, CatalogField, GridSpec, default_radii};

fn sequences(c: &mut Criterion) {
    let seq = DefiningSequence::new(1.0, 2.0).unwrap();
    c.bench_function("audit_sequence p<=200", |b| b.iter(|| audit_sequence(black_box(&seq), 200).unwrap()));
    let mut g = c.benchmark_group("lemma23_constant_search");
    for k in [8u64, 12] {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| b.iter(|| lemma23_constant_search(&seq, k).unwrap()));
    }
    g.finish();
}

fn combinatorics(c: &mut Criterion) {
    let mut g = c.benchmark_group("decomposition_census");
    for alpha in [vec![6u32], vec![3, 3], vec![2, 2, 2]] {
        let a = MultiIndex::new(alpha);
        g.bench_with_input(BenchmarkId::from_parameter(&a), &a, |b, a| b.iter(|| decomposition_census(a).unwrap()));
    }
    g.finish();

    let f = FunctionSpec::parse("exp").unwrap();
    let g2 = FunctionSpec::parse("mvpoly:1.0:1,1.1:-2,0.2:1/3").unwrap();
    let at = [BigRat::new(1.into(), 3.into()), BigRat::from_integer((-1).into())];
    let alpha = MultiIndex::new(vec![3, 3]);
    c.bench_function("fdb_derivative exp o mvpoly (3,3)", |b| b.iter(|| fdb_derivative(&f, &g2, black_box(&alpha), &at).unwrap()));
}

fn wavefront(c: &mut Criterion) {
    let u = catalog_field(CatalogField::Bump, 1024).unwrap();
    let (rp, rs) = default_radii(1.0, 2.0).unwrap();
    let grid = GridSpec::cube(1, 1024, -1.0, 1.0).unwrap();
    let phi = make_cutoff(&[0.0], rp, rs, &grid, 1.0, 2.0).unwrap();
    c.bench_function("spectrum 1d n=1024", |b| b.iter(|| spectrum(black_box(&u), &phi).unwrap()));
}

fn parametrix(c: &mut Criterion) {
    let cat = catalog_operator("d2-sin-d-1").unwrap();
    let red = build_reduction_operators(&cat.op).unwrap();
    let grid = GridSpec::cube(1, 1024, -2.0, 2.0).unwrap();
    let cutoff = make_cutoff(&[0.0], 0.3, 0.9, &grid, 1.0, 2.0).unwrap();
    let phi = |x: &[f64], o: usize| Ok(cutoff.jet_at(x, o)?.to_complex());
    let xs = cat.region.grid(32);
    let xis = xi_samples(&cat.cone, 8);
    let mut g = c.benchmark_group("neumann_sums_range d2-sin-d-1");
    g.sample_size(10);
    for n in [6usize, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| neumann_sums_range(&red, &phi, (2, n), &xs, &xis).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, sequences, combinatorics, wavefront, parametrix);
criterion_main!(benches);
