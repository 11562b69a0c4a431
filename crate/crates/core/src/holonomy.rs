//! Holonomy of a polygonal loop as an ordered product of step exponentials.
//!
//! With steps `δγ_1 … δγ_n` sampled at `γ_1 … γ_n`,
//! `U ≈ exp(−𝒜(γ_n)·δγ_n) ⋯ exp(−𝒜(γ_1)·δγ_1)`: later steps multiply from the left.

use crate::connection::ConnectionField;
use crate::error::LoopError;
use crate::loops::{EvaluationRule, PolygonalLoop, DEFAULT_STEPS_PER_EDGE};
use crate::matcore::{frob_dist, mul_into, ComplexMatrix, ExpWorkspace, GateMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HolonomyConfig {
    pub steps_per_edge: usize,
    pub rule: EvaluationRule,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self {
            steps_per_edge: DEFAULT_STEPS_PER_EDGE,
            rule: EvaluationRule::Midpoint,
        }
    }
}

impl HolonomyConfig {
    pub fn with_steps(steps_per_edge: usize) -> Self {
        Self {
            steps_per_edge: steps_per_edge.max(1),
            ..Self::default()
        }
    }

    /// Same rule, `factor` times as many steps.
    pub fn refined(self, factor: usize) -> Self {
        Self {
            steps_per_edge: self.steps_per_edge * factor,
            ..self
        }
    }
}

/// Scratch buffers for one evaluator thread.
#[derive(Clone, Debug)]
pub struct HolonomyWorkspace {
    generator: ComplexMatrix,
    step: ComplexMatrix,
    acc: ComplexMatrix,
    tmp: ComplexMatrix,
    exp: ExpWorkspace,
}

impl HolonomyWorkspace {
    pub fn new(dim: usize) -> Self {
        Self {
            generator: ComplexMatrix::zeros(dim),
            step: ComplexMatrix::zeros(dim),
            acc: ComplexMatrix::identity(dim),
            tmp: ComplexMatrix::zeros(dim),
            exp: ExpWorkspace::new(dim),
        }
    }

    /// Holonomy using this workspace's buffers.
    pub fn evaluate(
        &mut self,
        l: &PolygonalLoop,
        field: &dyn ConnectionField,
        cfg: HolonomyConfig,
    ) -> Result<GateMatrix, LoopError> {
        check_systems(l, field)?;
        if self.acc.dim() != l.system().gate_dim() {
            *self = Self::new(l.system().gate_dim());
        }
        let path = l.discretize(cfg.steps_per_edge, cfg.rule);
        self.acc.set_identity();
        for (point, step) in path.steps() {
            if step.iter().all(|&d| d == 0.0) {
                continue;
            }
            field.step_generator(point, step, &mut self.generator);
            self.exp.expm_into(&self.generator, &mut self.step);
            mul_into(&self.step, &self.acc, &mut self.tmp);
            std::mem::swap(&mut self.acc, &mut self.tmp);
        }
        Ok(GateMatrix::new_unchecked(self.acc.clone()))
    }
}

fn check_systems(l: &PolygonalLoop, field: &dyn ConnectionField) -> Result<(), LoopError> {
    if field.system() != l.system() {
        return Err(LoopError::SystemMismatch {
            field: field.system().tag(),
            path: l.system().tag(),
        });
    }
    Ok(())
}

/// Holonomy of `l` under `field`.
pub fn holonomy(
    l: &PolygonalLoop,
    field: &dyn ConnectionField,
    cfg: HolonomyConfig,
) -> Result<GateMatrix, LoopError> {
    HolonomyWorkspace::new(l.system().gate_dim()).evaluate(l, field, cfg)
}

/// Traverses `first` then `second`; the holonomy is `U(second) · U(first)`.
pub fn concat(first: &PolygonalLoop, second: &PolygonalLoop) -> Result<PolygonalLoop, LoopError> {
    if first.system() != second.system() {
        return Err(LoopError::Incompatible("system"));
    }
    if first.basepoint() != second.basepoint() {
        return Err(LoopError::Incompatible("basepoint"));
    }
    let mut vertices: Vec<Vec<f64>> = first.vertices().to_vec();
    vertices.push(first.basepoint().to_vec());
    vertices.extend(second.vertices().iter().cloned());
    crate::loops::make_loop(first.system(), first.basepoint().to_vec(), vertices)
}

/// Concatenation of a non-empty sequence, in traversal order.
pub fn concat_all(loops: &[PolygonalLoop]) -> Result<PolygonalLoop, LoopError> {
    let (head, rest) = loops
        .split_first()
        .ok_or(LoopError::Incompatible("sequence length"))?;
    rest.iter().try_fold(head.clone(), |acc, l| concat(&acc, l))
}

/// Distance of the holonomy at each resolution from the holonomy at the finest one.
pub fn convergence_probe(
    l: &PolygonalLoop,
    field: &dyn ConnectionField,
    rule: EvaluationRule,
    steps: &[usize],
) -> Result<Vec<(usize, f64)>, LoopError> {
    let finest = *steps.iter().max().unwrap_or(&DEFAULT_STEPS_PER_EDGE);
    let mut ws = HolonomyWorkspace::new(l.system().gate_dim());
    let reference = ws.evaluate(
        l,
        field,
        HolonomyConfig {
            steps_per_edge: finest,
            rule,
        },
    )?;
    steps
        .iter()
        .map(|&n| {
            let u = ws.evaluate(
                l,
                field,
                HolonomyConfig {
                    steps_per_edge: n,
                    rule,
                },
            )?;
            Ok((
                n,
                frob_dist(u.matrix(), reference.matrix()).expect("same system"),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{AnalyticConnection, FiniteDifferenceConnection};
    use crate::matcore::{kron, UNITARITY_TOL};
    use crate::model::System;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    fn one() -> AnalyticConnection {
        AnalyticConnection::new(System::OneQubit)
    }

    fn pi8_rectangle() -> PolygonalLoop {
        PolygonalLoop::at_origin(
            System::OneQubit,
            vec![
                vec![0.0, FRAC_PI_2, 0.0, 0.0],
                vec![0.0, FRAC_PI_2, 0.0, FRAC_PI_8],
                vec![0.0, 0.0, 0.0, FRAC_PI_8],
            ],
        )
        .unwrap()
    }

    fn generic_loop() -> PolygonalLoop {
        PolygonalLoop::from_flat(
            System::OneQubit,
            &[
                0.7, 1.1, -0.3, 0.9, -0.4, 0.6, 1.2, -0.8, 0.2, -0.5, 0.4, 0.3,
            ],
        )
        .unwrap()
    }

    #[test]
    fn degenerate_loop_is_identity() {
        let l = PolygonalLoop::at_origin(System::OneQubit, vec![]).unwrap();
        let u = holonomy(&l, &one(), HolonomyConfig::default()).unwrap();
        assert_eq!(u.matrix(), &ComplexMatrix::identity(2));
    }

    #[test]
    fn pi8_rectangle_gives_phase_gate() {
        let u = holonomy(&pi8_rectangle(), &one(), HolonomyConfig::default()).unwrap();
        let want = ComplexMatrix::from_diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, FRAC_PI_8),
        ]);
        assert!(frob_dist(u.matrix(), &want).unwrap() < 1e-12);
    }

    #[test]
    fn system_mismatch_is_rejected() {
        let err = holonomy(
            &pi8_rectangle(),
            &AnalyticConnection::new(System::TwoQubit),
            HolonomyConfig::default(),
        );
        assert!(matches!(err, Err(LoopError::SystemMismatch { .. })));
    }

    #[test]
    fn concat_orders_second_on_the_left() {
        let a = generic_loop();
        let b = pi8_rectangle();
        let cfg = HolonomyConfig::default();
        let ab = holonomy(&concat(&a, &b).unwrap(), &one(), cfg).unwrap();
        let ua = holonomy(&a, &one(), cfg).unwrap();
        let ub = holonomy(&b, &one(), cfg).unwrap();
        assert!(frob_dist(ab.matrix(), ub.compose(&ua).matrix()).unwrap() < 1e-9);
        let back = holonomy(&concat(&a, &a.reverse()).unwrap(), &one(), cfg).unwrap();
        assert!(frob_dist(back.matrix(), &ComplexMatrix::identity(2)).unwrap() < 1e-9);
    }

    #[test]
    fn concat_rejects_mismatch() {
        let two = PolygonalLoop::at_origin(System::TwoQubit, vec![]).unwrap();
        assert_eq!(
            concat(&generic_loop(), &two),
            Err(LoopError::Incompatible("system"))
        );
        let shifted =
            crate::loops::make_loop(System::OneQubit, vec![0.1, 0.0, 0.0, 0.0], vec![]).unwrap();
        assert_eq!(
            concat(&generic_loop(), &shifted),
            Err(LoopError::Incompatible("basepoint"))
        );
    }

    #[test]
    fn midpoint_rule_converges_quadratically() {
        let probe = convergence_probe(
            &generic_loop(),
            &one(),
            EvaluationRule::Midpoint,
            &[25, 50, 100, 200, 400, 3200],
        )
        .unwrap();
        for w in probe.windows(2).take(4) {
            let ratio = w[0].1 / w[1].1;
            assert!((3.5..4.5).contains(&ratio), "{probe:?}");
        }
    }

    #[test]
    fn left_rule_converges_linearly() {
        let probe = convergence_probe(
            &generic_loop(),
            &one(),
            EvaluationRule::LeftEndpoint,
            &[50, 100, 200, 6400],
        )
        .unwrap();
        for w in probe.windows(2).take(2) {
            let ratio = w[0].1 / w[1].1;
            assert!((1.7..2.3).contains(&ratio), "{probe:?}");
        }
    }

    #[test]
    fn degenerate_probe_is_zero() {
        let l = PolygonalLoop::at_origin(System::OneQubit, vec![]).unwrap();
        let probe = convergence_probe(&l, &one(), EvaluationRule::Midpoint, &[1, 2, 4]).unwrap();
        assert!(probe.iter().all(|&(_, d)| d == 0.0));
    }

    #[test]
    fn oracle_connection_gives_same_holonomy() {
        let l = generic_loop();
        let cfg = HolonomyConfig::with_steps(40);
        let a = holonomy(&l, &one(), cfg).unwrap();
        let fd = FiniteDifferenceConnection {
            system: System::OneQubit,
            h: 1e-5,
        };
        let b = holonomy(&l, &fd, cfg).unwrap();
        assert!(frob_dist(a.matrix(), b.matrix()).unwrap() < 1e-7);
    }

    #[test]
    fn one_qubit_loop_lifts_to_qubit_a() {
        let l = generic_loop();
        let u = holonomy(&l, &one(), HolonomyConfig::default()).unwrap();
        let lifted: Vec<Vec<f64>> = l
            .vertices()
            .iter()
            .map(|v| {
                let mut w = v.clone();
                w.extend([0.0; 5]);
                w
            })
            .collect();
        let l2 = PolygonalLoop::at_origin(System::TwoQubit, lifted).unwrap();
        let u2 = holonomy(
            &l2,
            &AnalyticConnection::new(System::TwoQubit),
            HolonomyConfig::default(),
        )
        .unwrap();
        let want = kron(u.matrix(), &ComplexMatrix::identity(2));
        assert!(frob_dist(u2.matrix(), &want).unwrap() < 1e-9);
    }

    #[test]
    fn theta2_only_loop_is_exact_identity() {
        let l = PolygonalLoop::at_origin(
            System::OneQubit,
            vec![vec![0.0, 1.3, 0.0, 0.0], vec![0.0, -2.0, 0.0, 0.0]],
        )
        .unwrap();
        let u = holonomy(&l, &one(), HolonomyConfig::default()).unwrap();
        assert!(frob_dist(u.matrix(), &ComplexMatrix::identity(2)).unwrap() <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn unitary_and_reversible(x in proptest::collection::vec(-4.0f64..4.0, 18)) {
            let l = PolygonalLoop::from_flat(System::TwoQubit, &x).unwrap();
            let field = AnalyticConnection::new(System::TwoQubit);
            let cfg = HolonomyConfig::default();
            let u = holonomy(&l, &field, cfg).unwrap();
            prop_assert!(u.matrix().unitarity_defect() <= UNITARITY_TOL);
            let v = holonomy(&l.reverse(), &field, cfg).unwrap();
            prop_assert!(frob_dist(v.matrix(), u.adjoint().matrix()).unwrap() <= 1e-9);
        }

        #[test]
        fn collinear_vertex_does_not_change_holonomy(x in proptest::collection::vec(-1.5f64..1.5, 12), at in 0usize..3) {
            let l = PolygonalLoop::from_flat(System::OneQubit, &x).unwrap();
            let corners: Vec<Vec<f64>> = l.corners().map(<[f64]>::to_vec).collect();
            let mid: Vec<f64> = corners[at].iter().zip(&corners[at + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let split = l.with_vertex_inserted(at, mid).unwrap();
            // The split edge is sampled twice as densely, so compare at a resolution
            // where the midpoint-rule error is far below the tolerance.
            let cfg = HolonomyConfig::with_steps(50_000);
            let u = holonomy(&l, &one(), cfg).unwrap();
            let v = holonomy(&split, &one(), cfg).unwrap();
            prop_assert!(frob_dist(u.matrix(), v.matrix()).unwrap() <= 1e-9);
        }
    }
}
