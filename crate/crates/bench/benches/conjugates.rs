use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use weightlab::conjugate::{lower_conj, upper_conj};
use weightlab::matrixcalc::assoc_matrix;
use weightlab::seqcore::gevrey;
use weightlab::weightfn::{gamma_index, IndexOptions};
use weightlab::{ConjOptions, GridSpec, RunConfig, WeightFunction};

fn g(alpha: f64) -> WeightFunction {
    WeightFunction::assoc(&gevrey(alpha, 4000).unwrap()).unwrap()
}

fn conjugates(c: &mut Criterion) {
    let (g1, g3) = (g(1.0), g(3.0));
    let cfg = RunConfig::default();
    let mut group = c.benchmark_group("conjugate");
    for n in [50usize, 200] {
        let grid = GridSpec { t_min: 1.0, t_max: 1e6, n };
        group.bench_with_input(BenchmarkId::new("lower_g1_g1", n), &grid, |b, grid| {
            b.iter(|| lower_conj(black_box(&g1), black_box(&g1), grid, ConjOptions::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("upper_g3_g1", n), &grid, |b, grid| {
            b.iter(|| upper_conj(black_box(&g3), black_box(&g1), grid, ConjOptions::default(), &cfg).unwrap())
        });
    }
    group.finish();
}

fn weights(c: &mut Criterion) {
    let g1 = g(1.0);
    let cfg = RunConfig::default();
    c.bench_function("assoc_eval_g1", |b| b.iter(|| g1.eval(black_box(1234.5)).unwrap()));
    c.bench_function("assoc_matrix_g1_p400", |b| b.iter(|| assoc_matrix(&g1, &cfg.ells, 400).unwrap()));
    let w = WeightFunction::id_power(0.5).unwrap();
    c.bench_function("gamma_index_sqrt", |b| b.iter(|| gamma_index(&w, &cfg, &IndexOptions::default())));
}

criterion_group!(benches, conjugates, weights);
criterion_main!(benches);
