use criterion::{black_box, criterion_group, criterion_main, Criterion};
use responsibility::checks::{run_abstract_corpus, run_concrete_corpus};
use responsibility::spec::{run_abstract, run_pipeline};
use responsibility::{enumerate_semantics, DEFAULT_STEP_BOUND};
use responsibility_bench::bundled;

fn concrete(c: &mut Criterion) {
    let (p, spec) = bundled("access_control");
    c.bench_function("enumerate access_control", |b| {
        b.iter(|| enumerate_semantics(black_box(&p), DEFAULT_STEP_BOUND))
    });
    c.bench_function("pipeline access_control", |b| {
        b.iter(|| run_pipeline(black_box(&p), &spec, None))
    });
    let (p, spec) = bundled("house_fire");
    c.bench_function("pipeline house_fire variants", |b| {
        b.iter(|| run_pipeline(black_box(&p), &spec, None))
    });
}

fn abstracted(c: &mut Criterion) {
    let (p, spec) = bundled("diff");
    c.bench_function("abstract diff", |b| {
        b.iter(|| run_abstract(black_box(&p), &spec, "bug", false, true))
    });
    let (p, spec) = bundled("negative_balance");
    c.bench_function("abstract negative_balance", |b| {
        b.iter(|| run_abstract(black_box(&p), &spec, "NB", false, true))
    });
}

fn corpora(c: &mut Criterion) {
    let mut g = c.benchmark_group("corpus");
    g.sample_size(10);
    g.bench_function("concrete 50 programs", |b| {
        b.iter(|| run_concrete_corpus(black_box(1), 50))
    });
    g.bench_function("abstract 50 programs", |b| {
        b.iter(|| run_abstract_corpus(black_box(1), 50))
    });
    g.finish();
}

criterion_group!(benches, concrete, abstracted, corpora);
criterion_main!(benches);
