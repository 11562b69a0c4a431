use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hqc_core::gatelib::{gate_matrix, GateSpec};
use hqc_core::optimizer::{initial_point, Objective};
use hqc_core::{
    holonomy, load_loop, mat_exp_antihermitian, AnalyticConnection, Complex64, ComplexMatrix,
    HolonomyConfig, HolonomyWorkspace, SynthesisConfig, System,
};

fn anti_hermitian(dim: usize) -> ComplexMatrix {
    let h = ComplexMatrix::from_fn(dim, |i, j| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        let im = if i < j {
            0.3 * (a - b)
        } else if i > j {
            0.3 * (b - a)
        } else {
            0.0
        };
        Complex64::new(0.1 + 0.05 * (a + b), im)
    });
    h.scale(Complex64::new(0.0, -0.01))
}

fn bench_expm(c: &mut Criterion) {
    for dim in [2, 4] {
        let m = anti_hermitian(dim);
        c.bench_function(&format!("expm {dim}x{dim}"), |b| {
            b.iter(|| mat_exp_antihermitian(black_box(&m)).unwrap())
        });
    }
}

fn bench_holonomy(c: &mut Criterion) {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/fixtures/table1_hadamard.json"
    );
    let (l, _) = load_loop(path.as_ref()).unwrap();
    let field = AnalyticConnection::new(System::OneQubit);
    c.bench_function("holonomy one-qubit 3 vertices", |b| {
        b.iter(|| holonomy(black_box(&l), &field, HolonomyConfig::default()).unwrap())
    });
    let mut ws = HolonomyWorkspace::new(2);
    c.bench_function("holonomy one-qubit workspace", |b| {
        b.iter(|| {
            ws.evaluate(black_box(&l), &field, HolonomyConfig::default())
                .unwrap()
        })
    });
}

fn bench_objective(c: &mut Criterion) {
    for (system, spec) in [(System::OneQubit, "hadamard"), (System::TwoQubit, "cnot")] {
        let target = gate_matrix(&GateSpec::parse(spec, system).unwrap()).unwrap();
        let cfg = SynthesisConfig::new(system, 3);
        let x = initial_point(&cfg, 0);
        let mut obj = Objective::new(&target, system, cfg.holonomy_config()).unwrap();
        c.bench_function(&format!("objective {spec} k=3"), |b| {
            b.iter(|| obj.eval(black_box(&x)).unwrap())
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_expm, bench_holonomy, bench_objective
}
criterion_main!(benches);
