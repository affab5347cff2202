use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dotd_bench::{constellation, snapshots};
use dotd_core::topology::{assess_slot, run_algorithm, Algorithm, TopologyConfig};

/// Full runs over ten slots; cost should grow roughly with M².
fn scaling(c: &mut Criterion) {
    let cfg = TopologyConfig::default();
    let mut group = c.benchmark_group("run_10_slots");
    group.sample_size(10);
    for m in [100usize, 200, 400, 907] {
        let recs = constellation(m, (m / 25).max(4));
        let snaps = snapshots(&recs, 1.0, 9);
        group.throughput(Throughput::Elements((m * m) as u64));
        for alg in Algorithm::ALL {
            group.bench_with_input(BenchmarkId::new(alg.name(), m), &snaps, |b, snaps| {
                b.iter(|| run_algorithm(alg, snaps, &recs, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn assessment(c: &mut Criterion) {
    let cfg = TopologyConfig::default();
    let recs = constellation(907, 37);
    let snaps = snapshots(&recs, 1.0, 1);
    c.bench_function("assess_slot_907", |b| b.iter(|| assess_slot(&snaps[0], &cfg.visibility, &cfg.radio).unwrap()));
}

criterion_group!(benches, scaling, assessment);
criterion_main!(benches);
