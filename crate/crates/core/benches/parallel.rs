//! Sequential vs rayon execution of the two embarrassingly parallel
//! workloads: walk ensembles and per-graph corpus checks.

use std::hint::black_box;

use anchored_core::generators::LazyGraph;
use anchored_core::par::{self, Execution};
use anchored_core::verify::corpus;
use anchored_core::walker::{simulate_ensemble, Source, WalkOptions};
use anchored_core::{compute_a_i, oracle};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn walk_ensembles(c: &mut Criterion) {
    let lz = LazyGraph::binary_tree();
    let opts = WalkOptions {
        sample_every: 100,
        track_ocean: false,
    };
    let mut group = c.benchmark_group("walk_ensemble_32x20000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_ensemble(Source::Lazy(&lz), "o", 20_000, 7, 32, opts, exec).unwrap())
        });
    }
    group.finish();
}

fn corpus_cores(c: &mut Criterion) {
    let graphs: Vec<_> = corpus()
        .into_iter()
        .filter(|g| g.interior().len() <= 10)
        .take(60)
        .collect();
    let mut group = c.benchmark_group("flow_vs_oracle_small_corpus");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::map(&graphs, exec, |g| {
                    (1..10).all(|k| {
                        let i = k as f64 / 10.0;
                        compute_a_i(g, i).unwrap().a_i == oracle::minimal_maximizer(g, i).unwrap()
                    })
                })
            })
        });
    }
    group.finish();
    black_box(&graphs);
}

criterion_group!(benches, walk_ensembles, corpus_cores);
criterion_main!(benches);
