//! The analytic oracle suite behind `hqc verify`.

use std::f64::consts::{FRAC_PI_3, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hqc_core::connection::{connection_fd_oracle, DEFAULT_FD_STEP};
use hqc_core::gatelib::{analytic_loop, gate_matrix, GateSpec};
use hqc_core::model::{
    hamiltonian_one, hamiltonian_two, hamiltonian_two_by_pattern, hermitian_eigenvalues,
};
use hqc_core::{
    frob_dist, holonomy, kron, AnalyticConnection, ConnectionField, EvaluationRule, HolonomyConfig,
    ModelEnergy, OneQubitPoint, System, TwoQubitPoint,
};

const LOOP_TOL_MIDPOINT: f64 = 1e-6;
const LOOP_TOL_LEFT: f64 = 1e-3;
const MATRIX_TOL: f64 = 1e-12;
const FD_TOL: f64 = 1e-6;
const SPECTRUM_TOL: f64 = 1e-10;
const SEED: u64 = 20_240_611;

struct Check {
    name: String,
    value: f64,
    tol: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn loop_check(spec: GateSpec, cfg: HolonomyConfig, tol: f64) -> Check {
    let construction = analytic_loop(&spec).expect("gate has an analytic loop");
    let l = construction.phase_corrected();
    let u = holonomy(&l, &AnalyticConnection::new(l.system()), cfg).expect("system matches");
    let want = gate_matrix(&spec).expect("named gate");
    Check {
        name: format!("loop {spec}"),
        value: frob_dist(u.matrix(), want.matrix()).expect("same dimension"),
        tol,
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

fn connection_check(system: System, points: usize, rng: &mut ChaCha8Rng) -> Check {
    let field = AnalyticConnection::new(system);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let p = random_point(rng, system.coords());
        for (i, comp) in field.components(&p).iter().enumerate() {
            let fd =
                connection_fd_oracle(system, &p, i, DEFAULT_FD_STEP).expect("valid oracle call");
            worst = worst.max(frob_dist(&comp.matrix, &fd).expect("same dimension"));
        }
    }
    Check {
        name: format!("connection vs finite differences ({system}, {points} points)"),
        value: worst,
        tol: FD_TOL,
    }
}

fn spectrum_gap(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn spectral_checks(points: usize, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let e = ModelEnergy::default();
    let eps = e.value();
    let one_want = [0.0, 0.0, eps];
    let mut two_want = vec![0.0; 4];
    two_want.extend([eps; 4]);
    two_want.push(2.0 * eps);
    let (mut one, mut two, mut pattern) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..points {
        let p1 = OneQubitPoint::from_slice(&random_point(rng, 4));
        one = one.max(spectrum_gap(
            &hermitian_eigenvalues(&hamiltonian_one(p1, e)),
            &one_want,
        ));
        let p2 = TwoQubitPoint::from_slice(&random_point(rng, 9));
        let h = hamiltonian_two(p2, e);
        two = two.max(spectrum_gap(&hermitian_eigenvalues(&h), &two_want));
        pattern = pattern.max(h.max_abs_diff(&hamiltonian_two_by_pattern(p2, e)));
    }
    vec![
        Check {
            name: format!("one-qubit spectrum {{ε, 0, 0}} ({points} points)"),
            value: one,
            tol: SPECTRUM_TOL,
        },
        Check {
            name: format!("two-qubit spectrum {{2ε, ε×4, 0×4}} ({points} points)"),
            value: two,
            tol: SPECTRUM_TOL,
        },
        Check {
            name: "two-qubit entry pattern vs conjugation".into(),
            value: pattern,
            tol: MATRIX_TOL,
        },
    ]
}

fn cnot_identity() -> Check {
    let h = gate_matrix(&GateSpec::Hadamard).expect("named gate");
    let ih = kron(&hqc_core::ComplexMatrix::identity(2), h.matrix());
    let cp = gate_matrix(&GateSpec::ControlledPhase(PI)).expect("named gate");
    let got = &(&ih * cp.matrix()) * &ih;
    let cnot = gate_matrix(&GateSpec::Cnot).expect("named gate");
    Check {
        name: "(I⊗H)·CP(π)·(I⊗H) = CNOT".into(),
        value: frob_dist(&got, cnot.matrix()).expect("same dimension"),
        tol: MATRIX_TOL,
    }
}

fn suite(cfg: HolonomyConfig) -> Vec<Check> {
    let tol = match cfg.rule {
        EvaluationRule::Midpoint => LOOP_TOL_MIDPOINT,
        EvaluationRule::LeftEndpoint => LOOP_TOL_LEFT,
    };
    let mut checks: Vec<Check> = [
        GateSpec::Pi8,
        GateSpec::SigmaY(0.7),
        GateSpec::SigmaY(-2.3),
        GateSpec::SigmaZ(1.1),
        GateSpec::SigmaZ(-0.4),
        GateSpec::Phase(0.9),
        GateSpec::Phase(-2.5),
        GateSpec::ControlledPhase(FRAC_PI_3),
        GateSpec::ControlledPhase(PI),
        GateSpec::Hadamard,
    ]
    .into_iter()
    .map(|spec| loop_check(spec, cfg, tol))
    .collect();
    checks.push(cnot_identity());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    checks.push(connection_check(System::OneQubit, 100, &mut rng));
    checks.push(connection_check(System::TwoQubit, 100, &mut rng));
    checks.extend(spectral_checks(1000, &mut rng));
    checks
}

/// Prints the table; exit status 0 iff every check passes.
pub fn run(cfg: HolonomyConfig) -> u8 {
    println!(
        "analytic oracle suite ({} steps/edge, {} rule)",
        cfg.steps_per_edge,
        cfg.rule.name()
    );
    let checks = suite(cfg);
    let width = checks
        .iter()
        .map(|c| c.name.chars().count())
        .max()
        .unwrap_or(0);
    for c in &checks {
        let pad = width - c.name.chars().count();
        println!(
            "{}  {}{}  {:.3e}  (tol {:.0e})",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            " ".repeat(pad),
            c.value,
            c.tol
        );
    }
    let failed = checks.iter().filter(|c| !c.pass()).count();
    println!(
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    u8::from(failed > 0)
}
