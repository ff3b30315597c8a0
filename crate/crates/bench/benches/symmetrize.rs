use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use invsep::setspec::{sup_on_set, SetSpec, SupBudget};
use invsep::symmetrize::{m_symmetrization, symmetrize, NumericSymmetrization};
use invsep::{Field, GroupSpec, Monomial, Polynomial};
use num_complex::Complex64;

fn sample_poly(dim: usize) -> Polynomial {
    let terms = (0..dim).flat_map(|i| {
        let mut sq = vec![0; dim];
        sq[i] = 2;
        let mut mixed = vec![0; dim];
        mixed[i] = 1;
        mixed[(i + 1) % dim] += 2;
        [(Monomial::new(sq), Complex64::new(1.0 + i as f64, 0.0)), (Monomial::new(mixed), Complex64::new(0.0, 0.5))]
    });
    Polynomial::from_terms(dim, Field::Complex, terms).unwrap()
}

fn bench_symmetrize(c: &mut Criterion) {
    let sym4 = GroupSpec::SymN { n: 4, dim: None }.build().unwrap();
    let q4 = sample_poly(4);
    c.bench_function("symmetrize/sym4_degree3", |b| b.iter(|| symmetrize(black_box(&q4), &sym4).unwrap()));

    let roots = GroupSpec::RTrunc { n: 3 }.build().unwrap();
    let q3 = Polynomial::linear(
        &[Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.2), Complex64::new(-0.4, 0.1)],
        Field::Complex,
    );
    c.bench_function("m_symmetrization/r_trunc3_m6", |b| {
        b.iter(|| m_symmetrization(black_box(&q3), &roots, 6, 64).unwrap())
    });

    let numeric = NumericSymmetrization::new(&q4, &sym4, 40).unwrap();
    let w = [Complex64::new(0.2, 0.1), Complex64::new(-0.5, 0.3), Complex64::new(0.7, 0.0), Complex64::new(0.1, -0.6)];
    c.bench_function("numeric/sym4_m40_eval", |b| b.iter(|| numeric.eval(black_box(&w)).unwrap()));

    let p2 = m_symmetrization(&q3, &roots, 2, 64).unwrap();
    let ball = SetSpec::lp_ball(3, 2.0, 1.0, Field::Complex);
    c.bench_function("sup_on_set/l2_ball_2000", |b| {
        b.iter(|| sup_on_set(black_box(&p2), &ball, SupBudget::samples(2000), 42).unwrap())
    });
}

criterion_group!(benches, bench_symmetrize);
criterion_main!(benches);
