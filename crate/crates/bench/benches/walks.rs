use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hcost_bench::{planted, rng};
use hcost_core::walks::{estimate_transition_matrix, exact_walk_distribution, run_random_walks, WalkMode};

fn walks(c: &mut Criterion) {
    let (g, _) = planted(1024, 2, 1);
    let mut group = c.benchmark_group("random_walks");
    for r in [1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            let mut rg = rng(2);
            b.iter(|| run_random_walks(&g, r, 30, black_box(0), &mut rg))
        });
    }
    group.finish();
    c.bench_function("exact_walk_distribution_t30", |b| {
        b.iter(|| exact_walk_distribution(&g, 30, black_box(5)).unwrap())
    });
    c.bench_function("transition_matrix_s64_r500", |b| {
        let sample: Vec<usize> = (0..64).map(|i| i * 16).collect();
        let mut rg = rng(3);
        b.iter(|| estimate_transition_matrix(&g, &sample, WalkMode::Sampled { walks: 500 }, 30, &mut rg))
    });
}

criterion_group!(benches, walks);
criterion_main!(benches);
