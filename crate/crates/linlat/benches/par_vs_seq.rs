//! Parallel vs sequential comparison of the heavy inner loops: the extremal
//! search, the exhaustive oracle scan, the LYM sweep, and the pushdown
//! suite. `threads = 1` is the sequential code path, not a one-thread pool.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use linlat::lattice::build_lattice;
use linlat::lym;
use linlat::posets::named_poset;
use linlat::search::verify::{verify_theorem, VerifyParams};
use linlat::search::{exhaustive_scan, solve, SearchMode, SearchProblem};

fn par_threads() -> usize {
    std::thread::available_parallelism().map_or(2, |n| n.get())
}

fn forks() -> Vec<linlat::posets::PosetSpec> {
    vec![named_poset("V:2").unwrap(), named_poset("L:2").unwrap()]
}

fn bench_two_level_search(c: &mut Criterion) {
    let lattice = Arc::new(build_lattice(3, 3).unwrap());
    let mut group = c.benchmark_group("two_level_search_l33");
    for threads in [1, par_threads()] {
        group.bench_function(format!("threads_{threads}"), |b| {
            b.iter(|| {
                let mut p = SearchProblem::new(Arc::clone(&lattice), forks(), false);
                p.dim_range = (1, 2);
                p.mode = SearchMode::EnumerateExtremal;
                p.threads = threads;
                let report = solve(&p);
                assert_eq!(report.optimum, 13);
                report.stats.nodes
            })
        });
    }
    group.finish();
}

fn bench_oracle_scan(c: &mut Criterion) {
    let lattice = Arc::new(build_lattice(3, 2).unwrap());
    let forbidden = [named_poset("Y:2").unwrap(), named_poset("Y':2").unwrap()];
    let mut group = c.benchmark_group("oracle_scan_l32");
    for threads in [1, par_threads()] {
        group.bench_function(format!("threads_{threads}"), |b| {
            b.iter(|| {
                let (opt, extremal) = exhaustive_scan(&lattice, &forbidden, true, (0, 3), threads);
                assert_eq!((opt, extremal.len()), (14, 1));
                opt
            })
        });
    }
    group.finish();
}

fn bench_lym_sweep(c: &mut Criterion) {
    let lattice = Arc::new(build_lattice(3, 2).unwrap());
    let h = lym::cyclic_intervals(3).unwrap();
    let mut group = c.benchmark_group("lym_sweep_l32");
    for threads in [1, par_threads()] {
        group.bench_function(format!("threads_{threads}"), |b| {
            b.iter(|| {
                let v = lym::v2_free_lym_sweep(&lattice, &h, threads).unwrap();
                assert_eq!(v.violations, 0);
                v.free_families
            })
        });
    }
    group.finish();
}

fn bench_pushdown_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("pushdown_suite_l42");
    group.sample_size(10);
    for threads in [1, par_threads()] {
        group.bench_function(format!("threads_{threads}"), |b| {
            b.iter(|| {
                let params = VerifyParams {
                    n: Some(4),
                    q: Some(2),
                    samples: 50,
                    seed: 7,
                    threads,
                    ..Default::default()
                };
                let v = verify_theorem("pushdown_suite", &params).unwrap();
                assert!(v.pass);
                v.pass
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_two_level_search,
    bench_oracle_scan,
    bench_lym_sweep,
    bench_pushdown_suite
);
criterion_main!(benches);
