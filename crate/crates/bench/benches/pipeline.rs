use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elastodg::mesh::CellKind;
use elastodg::polybasis::{cell_quadrature, orthonormal_basis};
use elastodg::solve::solve_saddle;
use elastodg::verify::{error_energy, error_l2};
use elastodg_bench::Fixture;
use std::hint::black_box;

fn setup(c: &mut Criterion) {
    let mut g = c.benchmark_group("setup");
    for p in [2, 5] {
        g.bench_with_input(BenchmarkId::new("tet_basis", p), &p, |b, &p| {
            b.iter(|| orthonormal_basis(CellKind::Tetrahedron, black_box(p)))
        });
    }
    g.bench_function("tri_quadrature_20", |b| b.iter(|| cell_quadrature(CellKind::Triangle, black_box(20))));
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for (name, f) in [("tri_n32_k1", Fixture::tri(32, 1)), ("tri_n16_k3", Fixture::tri(16, 3)), ("tet_n4_k1", Fixture::tet(4, 1))] {
        g.bench_function(name, |b| b.iter(|| f.assemble()));
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for (name, f) in [("tri_n32_k1", Fixture::tri(32, 1)), ("tri_n16_k3", Fixture::tri(16, 3)), ("tet_n4_k1", Fixture::tet(4, 1))] {
        let system = f.assemble();
        g.bench_function(name, |b| b.iter(|| solve_saddle(black_box(&system)).expect("solve")));
    }
    g.finish();
}

fn errors(c: &mut Criterion) {
    let mut g = c.benchmark_group("errors");
    g.sample_size(10);
    let f = Fixture::tri(32, 1);
    let (coeffs, _) = solve_saddle(&f.assemble()).expect("solve");
    g.bench_function("l2_tri_n32", |b| b.iter(|| error_l2(&f.mesh, &f.dofmap, &coeffs, &f.case)));
    g.bench_function("energy_tri_n32", |b| {
        b.iter(|| error_energy(&f.mesh, &f.topo, &f.dofmap, &coeffs, &f.case, &f.stab))
    });
    g.finish();
}

criterion_group!(benches, setup, assembly, solve, errors);
criterion_main!(benches);
