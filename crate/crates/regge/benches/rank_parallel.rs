//! Parallel vs sequential exact rank computation on the differentials of a
//! realistic mesh. With the default `parallel` feature, `rank_batch` fans the
//! matrices out over a thread pool; `rank_batch_seq` is the fallback.

use criterion::{criterion_group, criterion_main, Criterion};

use regge::assembly::{assemble_complex, Assembler, ComplexId};
use regge::mesh::{generate_mesh, MeshKind};
use regge::par::{rank_batch, rank_batch_seq};
use regge::SparseMat;

fn differential_batch() -> Vec<SparseMat> {
    let mesh = generate_mesh(MeshKind::Box(3, 3, 3)).unwrap();
    let asm = Assembler::new(&mesh);
    let mut mats = Vec::new();
    for id in [ComplexId::Regge, ComplexId::Twisted, ComplexId::NedC] {
        let complex = assemble_complex(id, &asm).unwrap();
        mats.extend(complex.d.into_iter().filter(|m| m.nnz() > 0));
    }
    mats
}

fn bench_rank(c: &mut Criterion) {
    let mats = differential_batch();
    let refs: Vec<&SparseMat> = mats.iter().collect();
    let mut group = c.benchmark_group("exact_rank_batch");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| std::hint::black_box(rank_batch(&refs)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| std::hint::black_box(rank_batch_seq(&refs)))
    });
    group.finish();
}

criterion_group!(benches, bench_rank);
criterion_main!(benches);
