use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use bellman_strip::cheese::{simulate_to_boundary, CheeseDomain, Disk, OuterSet};
use bellman_strip::classes::{membership, StepFunction};
use bellman_strip::martingale::from_function;
use bellman_strip::solver::{initialize, sweep, ChordTable, DomainMesh, SolverConfig};
use bellman_strip::{BoundaryFn, Point, StripDomain};

fn strip() -> StripDomain {
    StripDomain::parabolic(1.0, 4.0).unwrap()
}

fn solver(c: &mut Criterion) {
    let d = strip();
    let mesh = DomainMesh::new(&d, 81, 21).unwrap();
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("chord_table_81x21", |b| b.iter(|| ChordTable::new(black_box(&d), &mesh, &cfg).unwrap()));
    let table = ChordTable::new(&d, &mesh, &cfg).unwrap();
    let field = initialize(&d, &BoundaryFn::capped_exp(4.0), &mesh).unwrap();
    g.bench_function("sweep_81x21", |b| b.iter(|| sweep(black_box(&field), &table)));
    g.finish();
}

fn sample_step() -> StepFunction {
    let values: Vec<f64> = (0..16).map(|k| 0.6 * ((k as f64) * 1.7).sin()).collect();
    StepFunction::uniform(values).unwrap()
}

fn classes(c: &mut Criterion) {
    let d = strip();
    let phi = sample_step();
    let mut g = c.benchmark_group("classes");
    g.sample_size(20);
    g.bench_function("membership_16_pieces_grid_512", |b| b.iter(|| membership(black_box(&phi), &d, 512)));
    let dext = d.extension(0.2).unwrap();
    g.bench_function("from_function_16_pieces", |b| {
        b.iter(|| from_function(black_box(&phi), &d, &dext, 40, 256).unwrap())
    });
    g.finish();
}

fn cheese(c: &mut Criterion) {
    let domain = CheeseDomain::new(
        OuterSet::disk(Point::new(0.0, 0.0), 2.0),
        vec![Disk::new(Point::new(0.0, 0.0), 0.5), Disk::new(Point::new(1.1, 0.0), 0.3)],
        0.2,
    );
    let starts = domain.sample_starts(100, 1);
    c.bench_function("cheese_100_runs", |b| {
        b.iter(|| {
            for &x in &starts {
                black_box(simulate_to_boundary(&domain, x, 500, 1e-3).unwrap());
            }
        })
    });
}

criterion_group!(benches, solver, classes, cheese);
criterion_main!(benches);
