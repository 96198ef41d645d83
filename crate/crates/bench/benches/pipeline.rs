use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudovem::postprocess::{compute_errors, DiscreteSolution, NormPolicy};
use pseudovem::{assemble, solve, AssemblyOptions, MeshFamily};
use pseudovem_bench::{assembled, fixture};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for (family, n) in [(MeshFamily::Squares, 32), (MeshFamily::Squares, 64), (MeshFamily::Voronoi, 1024)] {
        let (mesh, case) = fixture(family, n);
        g.bench_with_input(BenchmarkId::new(family.to_string(), n), &n, |b, _| {
            b.iter(|| assemble(&mesh, &case, AssemblyOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn solving(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for (family, n) in [(MeshFamily::Squares, 32), (MeshFamily::Squares, 64), (MeshFamily::Voronoi, 1024)] {
        let (_, _, system) = assembled(family, n);
        g.bench_with_input(BenchmarkId::new(family.to_string(), n), &n, |b, _| b.iter(|| solve(&system).unwrap()));
    }
    g.finish();
}

fn errors(c: &mut Criterion) {
    let (mesh, case, system) = assembled(MeshFamily::Squares, 64);
    let report = solve(&system).unwrap();
    c.bench_function("errors/T2/64", |b| {
        b.iter(|| {
            let sol = DiscreteSolution::from_report(&mesh, &case, &report).unwrap();
            compute_errors(&sol, NormPolicy::Relative).unwrap()
        })
    });
}

criterion_group!(benches, assembly, solving, errors);
criterion_main!(benches);
