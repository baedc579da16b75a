//! Benchmarks for the data-parallel hot paths, comparing the rayon path
//! against a single-threaded pool. Build with `--no-default-features` to
//! time the fully sequential fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use instalab::encoder::{encode_dataset, generate_public_pool, generate_synthetic, EncoderConfig};
use instalab::prngattack::{search_seed, SeedSearchConfig};
use instalab::recovery::{solve_abs_gd, GdOptions, MixSystem, SolverBox};
use instalab::similarity::build_similarity_graph;
use instalab::types::{EncodedDataset, Shape};

fn bench_dataset(num_private: usize, epochs: usize, seed: u32) -> EncodedDataset {
    let shape = Shape::new(16, 16, 1);
    let private = generate_synthetic(num_private, shape, 5, seed).unwrap();
    let pool = generate_public_pool(40, shape, seed);
    let cfg = EncoderConfig {
        k: 4,
        epochs,
        sign_flip: true,
        public_pool_size: 40,
        seed,
    };
    encode_dataset(&private, &pool, &cfg).unwrap()
}

#[cfg(feature = "parallel")]
fn thread_counts() -> Vec<usize> {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
    if hw > 1 {
        vec![1, hw]
    } else {
        vec![1]
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T>(threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn thread_counts() -> Vec<usize> {
    vec![1]
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: usize, f: impl FnOnce() -> T) -> T {
    f()
}

fn bench_similarity(c: &mut Criterion) {
    let ds = bench_dataset(20, 16, 7); // 320 encodings
    let mut group = c.benchmark_group("similarity_graph");
    group.sample_size(10);
    for threads in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| with_threads(t, || build_similarity_graph(&ds).unwrap()));
        });
    }
    group.finish();
}

fn bench_seed_search(c: &mut Criterion) {
    let ds = bench_dataset(12, 3, 60_000);
    let cfg = EncoderConfig {
        k: 4,
        epochs: 3,
        sign_flip: true,
        public_pool_size: 40,
        seed: 60_000,
    };
    let mut group = c.benchmark_group("seed_search_2^16");
    group.sample_size(10);
    for threads in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            let search = SeedSearchConfig {
                workers: None,
                ..SeedSearchConfig::window(0, 16)
            };
            b.iter(|| with_threads(t, || search_seed(&ds, &cfg, &search).unwrap()));
        });
    }
    group.finish();
}

fn bench_abs_gd(c: &mut Criterion) {
    let ds = bench_dataset(16, 8, 9);
    let records = ds.ground_truth.as_ref().unwrap();
    let rows: Vec<[(usize, f64); 2]> = records
        .iter()
        .map(|r| {
            [
                (r.private_indices.0, r.lambdas[0]),
                (r.private_indices.1, r.lambdas[1]),
            ]
        })
        .collect();
    let mut b = Vec::new();
    for enc in &ds.encodings {
        b.extend(enc.pixels().iter().map(|&p| p.abs() as f64));
    }
    let sys = MixSystem::from_rows(rows, b, 16, ds.params.shape, SolverBox::unit()).unwrap();
    let opts = GdOptions {
        max_steps: 200,
        ..GdOptions::default()
    };
    let mut group = c.benchmark_group("abs_gd_200_steps");
    group.sample_size(10);
    for threads in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |bch, &t| {
            bch.iter(|| with_threads(t, || solve_abs_gd(&sys, &opts).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_similarity, bench_seed_search, bench_abs_gd);
criterion_main!(benches);
