use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wstate_witness::cavity::{phase_matching_grid, CavityParams, PumpGeometry};
use wstate_witness::losschannel::{sweep_eta, SweepGrid, SweepMode};
use wstate_witness::oracle::{self, OracleConfig};
use wstate_witness::witness::{WWeights, WitnessConfig};
use wstate_witness::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_eta_grid_31");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = WitnessConfig {
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| {
                sweep_eta(SweepGrid::unit(31), SweepMode::EtaEtaPrime, black_box(cfg)).unwrap()
            })
        });
    }
    group.finish();
}

fn phase_map(c: &mut Criterion) {
    let p = CavityParams::default();
    let g = PumpGeometry::square(p.k_p);
    let mut group = c.benchmark_group("phase_matching_grid_128");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| phase_matching_grid(black_box(128), 0.03, &g, &p, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_starts(c: &mut Criterion) {
    let l = WWeights::from_moduli(&[0.5; 4])
        .unwrap()
        .operator()
        .unwrap();
    let mut group = c.benchmark_group("oracle_f_full_w4");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = OracleConfig {
            exec,
            ..Default::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| oracle::f_full(black_box(&l), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, phase_map, oracle_starts);
criterion_main!(benches);
