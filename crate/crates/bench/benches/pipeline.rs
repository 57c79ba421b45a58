use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_rational::BigRational;
use vorcycle_core::complex::{build_complex, ComplexOptions};
use vorcycle_core::cone::PolyCone;
use vorcycle_core::forms::{minimum_and_minimal_vectors, short_vectors};
use vorcycle_core::homology::{verify, VerifyOptions};
use vorcycle_core::isometry::{automorphism_group, VectorConfig};
use vorcycle_core::perfect::{enumerate_perfect_forms, GroupKind};
use vorcycle_core::{QForm, RatMat};

fn kernels(c: &mut Criterion) {
    let d5 = RatMat::from(QForm::d_n(5).gram());
    let four = BigRational::from_integer(4.into());
    c.bench_function("short_vectors D5 norm 4", |b| {
        b.iter(|| short_vectors(black_box(&d5), &four, false).unwrap().len())
    });
    let d4 = QForm::d_n(4);
    let m = minimum_and_minimal_vectors(&d4).unwrap();
    c.bench_function("facets of the D4 domain", |b| {
        b.iter(|| PolyCone::from_vectors(black_box(m.vectors.clone())).unwrap().facets().len())
    });
    let cfg = VectorConfig::new(m.vectors.clone(), d4.gram().clone());
    c.bench_function("automorphism group of D4", |b| b.iter(|| automorphism_group(black_box(&cfg)).order()));
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("enumerate GL_4", |b| b.iter(|| enumerate_perfect_forms(4, GroupKind::Gl).unwrap()));
    let sl4 = enumerate_perfect_forms(4, GroupKind::Sl).unwrap();
    g.bench_function("complex SL_4", |b| b.iter(|| build_complex(black_box(&sl4), ComplexOptions::default()).unwrap()));
    let gl5 = build_complex(&enumerate_perfect_forms(5, GroupKind::Gl).unwrap(), ComplexOptions::default()).unwrap();
    g.bench_function("verify GL_5", |b| b.iter(|| verify(black_box(&gl5), VerifyOptions::default()).unwrap().verified));
    g.finish();
}

criterion_group!(benches, kernels, pipeline);
criterion_main!(benches);
