//! Connection fields on the degenerate qubit subspace.
//!
//! Components are stored as `𝒜_i = ⟨β; λ|∂_i|α; λ⟩` with no sign absorbed;
//! a step `δγ` contributes the factor `exp(−Σ_i 𝒜_i δγ^i)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::matcore::{kron, ComplexMatrix};
use crate::model::{
    givens_frame, two_qubit_frame, OneQubitPoint, System, TwoQubitPoint, QUBIT_LEVELS,
    TWO_QUBIT_LEVELS,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default central-difference step for the oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// One connection matrix, tagged with the coordinate it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionComponent {
    pub coordinate: &'static str,
    pub matrix: ComplexMatrix,
}

/// A connection over one of the two control manifolds.
pub trait ConnectionField: Sync {
    fn system(&self) -> System;

    /// One component per coordinate, in [`System::coordinate_names`] order.
    fn components(&self, point: &[f64]) -> Vec<ConnectionComponent>;

    /// Writes the step generator `−Σ_i 𝒜_i(point) · step_i` into `out`.
    fn step_generator(&self, point: &[f64], step: &[f64], out: &mut ComplexMatrix) {
        out.fill_zero();
        for (comp, &d) in self.components(point).iter().zip(step) {
            if d != 0.0 {
                out.axpy(Complex64::new(-d, 0.0), &comp.matrix);
            }
        }
    }
}

/// The closed-form connection of the three-state model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyticConnection {
    system: System,
}

impl AnalyticConnection {
    pub fn new(system: System) -> Self {
        Self { system }
    }
}

impl ConnectionField for AnalyticConnection {
    fn system(&self) -> System {
        self.system
    }

    fn components(&self, point: &[f64]) -> Vec<ConnectionComponent> {
        let names = self.system.coordinate_names();
        let mats: Vec<ComplexMatrix> = match self.system {
            System::OneQubit => connection_one(OneQubitPoint::from_slice(point)).into(),
            System::TwoQubit => connection_two(TwoQubitPoint::from_slice(point)).into(),
        };
        names
            .iter()
            .zip(mats)
            .map(|(&coordinate, matrix)| ConnectionComponent { coordinate, matrix })
            .collect()
    }

    fn step_generator(&self, point: &[f64], step: &[f64], out: &mut ComplexMatrix) {
        match self.system {
            System::OneQubit => {
                let g = one_qubit_generator(point, step);
                out.as_mut_slice().copy_from_slice(&g);
            }
            System::TwoQubit => {
                let ga = one_qubit_generator(&point[0..4], &step[0..4]);
                let gb = one_qubit_generator(&point[4..8], &step[4..8]);
                let o = out.as_mut_slice();
                // ga ⊗ I₂ + I₂ ⊗ gb
                for i in 0..2 {
                    for k in 0..2 {
                        for j in 0..2 {
                            for l in 0..2 {
                                let mut v = ZERO;
                                if k == l {
                                    v += ga[2 * i + j];
                                }
                                if i == j {
                                    v += gb[2 * k + l];
                                }
                                o[(2 * i + k) * 4 + 2 * j + l] = v;
                            }
                        }
                    }
                }
                let ca = point[1].cos();
                let cb = point[5].cos();
                o[15] -= I * (ca * ca * cb * cb * step[8]);
            }
        }
    }
}

/// `−(𝒜_θ1 dθ1 + 𝒜_φ1 dφ1 + 𝒜_φ2 dφ2)` for one qubit, row-major 2×2.
#[inline]
fn one_qubit_generator(p: &[f64], d: &[f64]) -> [Complex64; 4] {
    let (t1, t2, f1, f2) = (p[0], p[1], p[2], p[3]);
    let (dt1, df1, df2) = (d[0], d[2], d[3]);
    let (s1, c1) = t1.sin_cos();
    let s2 = t2.sin();
    let e = Complex64::from_polar(1.0, f2 - f1);
    let s1sq = s1 * s1;
    let s2sq = s2 * s2;
    // sin 2θ1 / 2 = sin θ1 cos θ1
    let off = s1 * c1 * s2;

    let a00 = -I * s1sq * df1;
    let a11 = I * (s2sq * s1sq * df1) - I * (s2sq * df2);
    let a01 = e.conj() * (-s2 * dt1) - I * e.conj() * (off * df1);
    let a10 = e * (s2 * dt1) - I * e * (off * df1);
    [-a00, -a01, -a10, -a11]
}

/// The four one-qubit components `[𝒜_θ1, 𝒜_θ2, 𝒜_φ1, 𝒜_φ2]` in basis (|0⟩, |1⟩).
pub fn connection_one(p: OneQubitPoint) -> [ComplexMatrix; 4] {
    let (s1, s2) = (p.theta1.sin(), p.theta2.sin());
    let s21 = (2.0 * p.theta1).sin();
    let e = Complex64::from_polar(1.0, p.phi2 - p.phi1);
    let r = |x: f64| Complex64::new(x, 0.0);
    let m = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| {
        ComplexMatrix::from_fn(2, |i, j| [a, b, c, d][2 * i + j])
    };

    let a_theta1 = m(ZERO, r(-s2) * e.conj(), r(s2) * e, ZERO);
    let a_theta2 = ComplexMatrix::zeros(2);
    let a_phi1 = m(
        -I * s1 * s1,
        -I * 0.5 * s21 * s2 * e.conj(),
        -I * 0.5 * s21 * s2 * e,
        I * s2 * s2 * s1 * s1,
    );
    let a_phi2 = m(ZERO, ZERO, ZERO, -I * s2 * s2);
    [a_theta1, a_theta2, a_phi1, a_phi2]
}

/// `𝒜_ξ = diag(0, 0, 0, i cos²θ2ᵃ cos²θ2ᵇ)` in basis {|00⟩, |01⟩, |10⟩, |11⟩}.
pub fn connection_xi(theta2_a: f64, theta2_b: f64) -> ComplexMatrix {
    let (ca, cb) = (theta2_a.cos(), theta2_b.cos());
    let mut m = ComplexMatrix::zeros(4);
    m[(3, 3)] = I * (ca * ca * cb * cb);
    m
}

/// The nine two-qubit components: qubit-a lifts `𝒜 ⊗ I₂`, qubit-b lifts `I₂ ⊗ 𝒜`, then `𝒜_ξ`.
pub fn connection_two(p: TwoQubitPoint) -> [ComplexMatrix; 9] {
    let i2 = ComplexMatrix::identity(2);
    let ca = connection_one(p.a);
    let cb = connection_one(p.b);
    [
        kron(&ca[0], &i2),
        kron(&ca[1], &i2),
        kron(&ca[2], &i2),
        kron(&ca[3], &i2),
        kron(&i2, &cb[0]),
        kron(&i2, &cb[1]),
        kron(&i2, &cb[2]),
        kron(&i2, &cb[3]),
        connection_xi(p.a.theta2, p.b.theta2),
    ]
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("finite-difference step {0:e} outside [1e-8, 1e-3]")]
    StepOutOfRange(f64),
    #[error("coordinate index {index} out of range for a {system} point")]
    Coordinate { index: usize, system: System },
    #[error("point has {found} coordinates, expected {expected}")]
    Dimension { expected: usize, found: usize },
}

fn frame_columns(system: System, point: &[f64]) -> (ComplexMatrix, &'static [usize]) {
    match system {
        System::OneQubit => (
            givens_frame(OneQubitPoint::from_slice(point)),
            &QUBIT_LEVELS,
        ),
        System::TwoQubit => (
            two_qubit_frame(TwoQubitPoint::from_slice(point)),
            &TWO_QUBIT_LEVELS,
        ),
    }
}

/// Central-difference connection component computed straight from the frames:
/// `⟨β; p| (|α; p + h e_i⟩ − |α; p − h e_i⟩) / 2h`.
pub fn connection_fd_oracle(
    system: System,
    point: &[f64],
    coordinate: usize,
    h: f64,
) -> Result<ComplexMatrix, OracleError> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(OracleError::StepOutOfRange(h));
    }
    if point.len() != system.coords() {
        return Err(OracleError::Dimension {
            expected: system.coords(),
            found: point.len(),
        });
    }
    if coordinate >= system.coords() {
        return Err(OracleError::Coordinate {
            index: coordinate,
            system,
        });
    }
    let shifted = |sign: f64| {
        let mut q = point.to_vec();
        q[coordinate] += sign * h;
        q
    };
    let (w0, cols) = frame_columns(system, point);
    let (wp, _) = frame_columns(system, &shifted(1.0));
    let (wm, _) = frame_columns(system, &shifted(-1.0));
    let n = w0.dim();
    Ok(ComplexMatrix::from_fn(cols.len(), |b, a| {
        let (cb, ca) = (cols[b], cols[a]);
        (0..n)
            .map(|k| w0[(k, cb)].conj() * (wp[(k, ca)] - wm[(k, ca)]))
            .sum::<Complex64>()
            / (2.0 * h)
    }))
}

/// A connection evaluated entirely through [`connection_fd_oracle`]. Slow;
/// used to cross-check holonomies computed from the closed forms.
#[derive(Clone, Copy, Debug)]
pub struct FiniteDifferenceConnection {
    pub system: System,
    pub h: f64,
}

impl ConnectionField for FiniteDifferenceConnection {
    fn system(&self) -> System {
        self.system
    }

    fn components(&self, point: &[f64]) -> Vec<ConnectionComponent> {
        self.system
            .coordinate_names()
            .iter()
            .enumerate()
            .map(|(i, &coordinate)| ConnectionComponent {
                coordinate,
                matrix: connection_fd_oracle(self.system, point, i, self.h)
                    .expect("oracle arguments validated by construction"),
            })
            .collect()
    }
}
