//! Regression fixtures: reference Hadamard and SU(2) loops.

use std::path::PathBuf;

use hqc_core::gatelib::{gate_matrix, GateSpec};
use hqc_core::holonomy::convergence_probe;
use hqc_core::loops::{loop_from_str, loop_to_string};
use hqc_core::optimizer::objective;
use hqc_core::{
    frob_dist, holonomy, load_loop, make_loop, save_loop, AnalyticConnection, EvaluationRule,
    HolonomyConfig, LoopMetadata, PolygonalLoop, SynthesisConfig, System,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn table1() -> PolygonalLoop {
    load_loop(&fixture("table1_hadamard.json")).unwrap().0
}

fn table2() -> PolygonalLoop {
    load_loop(&fixture("table2_su2.json")).unwrap().0
}

fn su2_target() -> GateSpec {
    GateSpec::Su2 {
        delta: 1.0,
        a: std::f64::consts::PI / 7.0,
        b: 1.0 / 3.0,
        c: 1.0,
    }
}

fn hol(l: &PolygonalLoop, steps: usize) -> hqc_core::GateMatrix {
    holonomy(
        l,
        &AnalyticConnection::new(l.system()),
        HolonomyConfig::with_steps(steps),
    )
    .unwrap()
}

#[test]
fn table1_matches_literal_vertices() {
    let want = make_loop(
        System::OneQubit,
        vec![0.0; 4],
        vec![
            vec![-5.28, 2.04, 0.18, -0.40],
            vec![-0.44, 1.49, -0.08, 3.70],
            vec![-0.70, -0.27, -0.11, 2.59],
        ],
    )
    .unwrap();
    assert_eq!(table1(), want);
    let (_, meta) = load_loop(&fixture("table1_hadamard.json")).unwrap();
    assert_eq!(meta.gate.as_deref(), Some("hadamard"));
}

#[test]
fn table1_is_close_to_hadamard() {
    let h = gate_matrix(&GateSpec::Hadamard).unwrap();
    let d = frob_dist(h.matrix(), hol(&table1(), 200).matrix()).unwrap();
    assert!(d <= 0.2, "{d}");
    let cfg = SynthesisConfig::new(System::OneQubit, 3);
    assert!(objective(&table1().flatten(), &h, &cfg).unwrap() <= 0.2);
}

#[test]
fn table2_is_close_to_su2_target() {
    let u = gate_matrix(&su2_target()).unwrap();
    let d = frob_dist(u.matrix(), hol(&table2(), 200).matrix()).unwrap();
    assert!(d <= 0.2, "{d}");
}

#[test]
fn tables_survive_write_then_read() {
    let dir = tempfile::tempdir().unwrap();
    for (l, gate) in [(table1(), "hadamard"), (table2(), "su2")] {
        let meta = LoopMetadata {
            gate: Some(gate.into()),
            seed: Some(u64::MAX),
            ..Default::default()
        };
        let path = dir.path().join(format!("{gate}.json"));
        save_loop(&l, &meta, &path).unwrap();
        let (back, back_meta) = load_loop(&path).unwrap();
        assert_eq!(back, l);
        assert_eq!(back_meta, meta);
        let text = loop_to_string(&l, &meta);
        assert_eq!(loop_from_str(&text).unwrap().0, l);
    }
}

#[test]
fn table1_path_export_has_200_rows_per_edge() {
    let path = table1().discretize(200, EvaluationRule::Midpoint);
    assert_eq!(path.nodes().count(), 800);
}

#[test]
fn table1_self_convergence_is_second_order() {
    let p = convergence_probe(
        &table1(),
        &AnalyticConnection::new(System::OneQubit),
        EvaluationRule::Midpoint,
        &[200, 400, 800, 51_200],
    )
    .unwrap();
    for w in p[..3].windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!((3.5..=4.5).contains(&ratio), "{p:?}");
    }
}

#[test]
#[ignore = "midpoint product error at 200 steps/edge is 1.7e-4 on this loop; bound needs a fourth-order rule"]
fn table1_200_vs_800_within_1e5() {
    let l = table1();
    let d = frob_dist(hol(&l, 200).matrix(), hol(&l, 800).matrix()).unwrap();
    assert!(d <= 1e-5, "{d}");
}
