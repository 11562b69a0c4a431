//! The three-state Hamiltonian family.
//!
//! Each qubit is a three-level system with basis order (|2⟩, |0⟩, |1⟩): the
//! auxiliary level |2⟩ at energy ε and the degenerate qubit pair at zero. The
//! Hamiltonians are iso-spectral deformations `W H₀ W†` where the frame
//! `W = U₁U₂` is a gauge-fixed Givens product (ψ₁ = ψ₂ = 0, U₃ = I).
//! Two-qubit states are tensor products, qubit a major, followed by the
//! entangling rotation `W_ξ = exp(iξ|11⟩⟨11|)`.

use std::fmt;

use num_complex::Complex64;

use crate::matcore::{kron, ComplexMatrix};

/// Index of |0⟩ and |1⟩ inside one three-level block.
pub const QUBIT_LEVELS: [usize; 2] = [1, 2];

/// Indices of |00⟩, |01⟩, |10⟩, |11⟩ inside the 9-dimensional two-qubit space.
pub const TWO_QUBIT_LEVELS: [usize; 4] = [4, 5, 7, 8];

/// Which control manifold a loop or connection lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    OneQubit,
    TwoQubit,
}

impl System {
    /// Number of real coordinates of a point: 4 (θ1, θ2, φ1, φ2) or 9.
    pub fn coords(self) -> usize {
        match self {
            System::OneQubit => 4,
            System::TwoQubit => 9,
        }
    }

    /// Dimension of the degenerate subspace, i.e. of the holonomy.
    pub fn gate_dim(self) -> usize {
        match self {
            System::OneQubit => 2,
            System::TwoQubit => 4,
        }
    }

    /// Coordinate labels in storage order.
    pub fn coordinate_names(self) -> &'static [&'static str] {
        match self {
            System::OneQubit => &["theta1", "theta2", "phi1", "phi2"],
            System::TwoQubit => &[
                "theta1_a", "theta2_a", "phi1_a", "phi2_a", "theta1_b", "theta2_b", "phi1_b",
                "phi2_b", "xi",
            ],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            System::OneQubit => "one-qubit",
            System::TwoQubit => "two-qubit",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "one-qubit" | "one" => Some(System::OneQubit),
            "two-qubit" | "two" => Some(System::TwoQubit),
            _ => None,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Point of ℂP² in Givens angles, radians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OneQubitPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl OneQubitPoint {
    pub const fn new(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Self {
        Self {
            theta1,
            theta2,
            phi1,
            phi2,
        }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.theta1, self.theta2, self.phi1, self.phi2]
    }
}

/// Two one-qubit points plus the entangling angle ξ.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoQubitPoint {
    pub a: OneQubitPoint,
    pub b: OneQubitPoint,
    pub xi: f64,
}

impl TwoQubitPoint {
    pub fn from_slice(c: &[f64]) -> Self {
        Self {
            a: OneQubitPoint::from_slice(&c[0..4]),
            b: OneQubitPoint::from_slice(&c[4..8]),
            xi: c[8],
        }
    }

    pub fn to_array(self) -> [f64; 9] {
        let (a, b) = (self.a.to_array(), self.b.to_array());
        [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3], self.xi]
    }
}

/// Energy of the auxiliary level. Never affects a holonomy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelEnergy(f64);

impl ModelEnergy {
    pub fn new(eps: f64) -> Option<Self> {
        (eps > 0.0 && eps.is_finite()).then_some(Self(eps))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ModelEnergy {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Frame `W = U₁U₂` with `α_j = e^{iφ_j} sin θ_j`, `β_j = cos θ_j`.
pub fn givens_frame(p: OneQubitPoint) -> ComplexMatrix {
    let c = |re: f64| Complex64::new(re, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let a1 = Complex64::from_polar(p.theta1.sin(), p.phi1);
    let b1 = c(p.theta1.cos());
    let a2 = Complex64::from_polar(p.theta2.sin(), p.phi2);
    let b2 = c(p.theta2.cos());

    let u1 = ComplexMatrix::from_fn(3, |i, j| match (i, j) {
        (0, 0) => b1.conj(),
        (0, 1) => a1.conj(),
        (1, 0) => -a1,
        (1, 1) => b1,
        (2, 2) => c(1.0),
        _ => z,
    });
    let u2 = ComplexMatrix::from_fn(3, |i, j| match (i, j) {
        (0, 0) => b2.conj(),
        (0, 2) => a2.conj(),
        (1, 1) => c(1.0),
        (2, 0) => -a2,
        (2, 2) => b2,
        _ => z,
    });
    &u1 * &u2
}

/// Reference Hamiltonian `ε|2⟩⟨2| = diag(ε, 0, 0)`.
pub fn reference_hamiltonian(e: ModelEnergy) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[
        Complex64::new(e.value(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// `W H₀ W† = ε |w⟩⟨w|` where `w` is the first column of the frame.
pub fn hamiltonian_one(p: OneQubitPoint, e: ModelEnergy) -> ComplexMatrix {
    let w = givens_frame(p);
    ComplexMatrix::from_fn(3, |i, j| w[(i, 0)] * w[(j, 0)].conj() * e.value())
}

/// `W_ξ = diag(1, …, 1, e^{iξ})` on the 9-dimensional space.
pub fn entangling_rotation(xi: f64) -> ComplexMatrix {
    let mut w = ComplexMatrix::identity(9);
    w[(8, 8)] = Complex64::from_polar(1.0, xi);
    w
}

/// Full two-qubit frame `W_ξ (W^a ⊗ W^b)`.
pub fn two_qubit_frame(p: TwoQubitPoint) -> ComplexMatrix {
    let local = kron(&givens_frame(p.a), &givens_frame(p.b));
    &entangling_rotation(p.xi) * &local
}

/// `W_ξ (H^a ⊗ I₃ + I₃ ⊗ H^b) W_ξ†` by direct conjugation.
pub fn hamiltonian_two(p: TwoQubitPoint, e: ModelEnergy) -> ComplexMatrix {
    let i3 = ComplexMatrix::identity(3);
    let h_a = hamiltonian_one(p.a, e);
    let h_b = hamiltonian_one(p.b, e);
    let sum = &kron(&h_a, &i3) + &kron(&i3, &h_b);
    let w = entangling_rotation(p.xi);
    &(&w * &sum) * &w.adjoint()
}

/// Printed entry layout of the two-qubit Hamiltonian after `W_ξ`.
///
/// `aIJ`/`bIJ` name entries of the one-qubit Hamiltonians (1-based), `+`
/// joins a diagonal sum, a trailing `-` multiplies by `e^{−iξ}` and a trailing
/// `+` by `e^{iξ}`. Row 3, column 9 reads `a13` (a tensor-sum entry of
/// qubit a); the `b13` found in some printings is a misprint.
const TWO_QUBIT_PATTERN: [&str; 9] = [
    "a11+b11 b12 b13 a12 0 0 a13 0 0",
    "b21 a11+b22 b23 0 a12 0 0 a13 0",
    "b31 b32 a11+b33 0 0 a12 0 0 a13-",
    "a21 0 0 a22+b11 b12 b13 a23 0 0",
    "0 a21 0 b21 a22+b22 b23 0 a23 0",
    "0 0 a21 b31 b32 a22+b33 0 0 a23-",
    "a31 0 0 a32 0 0 a33+b11 b12 b13-",
    "0 a31 0 0 a32 0 b21 a33+b22 b23-",
    "0 0 a31+ 0 0 a32+ b31+ b32+ a33+b33",
];

/// Two-qubit Hamiltonian assembled entry by entry from [`TWO_QUBIT_PATTERN`].
/// Independent of [`hamiltonian_two`]; the two must agree.
pub fn hamiltonian_two_by_pattern(p: TwoQubitPoint, e: ModelEnergy) -> ComplexMatrix {
    let h_a = hamiltonian_one(p.a, e);
    let h_b = hamiltonian_one(p.b, e);
    let lookup = |sym: &str| -> Complex64 {
        let (m, rest) = sym.split_at(1);
        let idx: Vec<usize> = rest.bytes().map(|b| (b - b'1') as usize).collect();
        let h = if m == "a" { &h_a } else { &h_b };
        h[(idx[0], idx[1])]
    };
    let mut out = ComplexMatrix::zeros(9);
    for (i, row) in TWO_QUBIT_PATTERN.iter().enumerate() {
        let cells: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cells.len(), 9);
        for (j, cell) in cells.iter().enumerate() {
            if *cell == "0" {
                continue;
            }
            let (body, phase) = if let Some(b) = cell.strip_suffix('-') {
                (b, Complex64::from_polar(1.0, -p.xi))
            } else if cell.len() > 3 && cell.ends_with('+') {
                (&cell[..cell.len() - 1], Complex64::from_polar(1.0, p.xi))
            } else {
                (*cell, Complex64::new(1.0, 0.0))
            };
            let value: Complex64 = body.split('+').map(lookup).sum();
            out[(i, j)] = value * phase;
        }
    }
    out
}

/// Point of ℂP² from inhomogeneous coordinates `(1, ξ₁, ξ₂)`:
/// `θ_k = atan |ξ_k|`, `φ_k = arg ξ_k ∈ (−π, π]`.
pub fn cp2_from_inhomogeneous(xi1: Complex64, xi2: Complex64) -> OneQubitPoint {
    let arg = |z: Complex64| {
        let a = z.im.atan2(z.re);
        if a <= -std::f64::consts::PI {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    };
    OneQubitPoint::new(xi1.norm().atan(), xi2.norm().atan(), arg(xi1), arg(xi2))
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.dim();
    let mut a = h.clone();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let zeta = (aqq - app) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [−s·conj(phase), c·conj(phase)]]
                let g = [
                    Complex64::new(c, 0.0),
                    Complex64::new(s, 0.0),
                    -phase.conj() * s,
                    phase.conj() * c,
                ];
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * g[0] + akq * g[2];
                    a[(k, q)] = akp * g[1] + akq * g[3];
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g[0].conj() * apk + g[2].conj() * aqk;
                    a[(q, k)] = g[1].conj() * apk + g[3].conj() * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::frob_dist;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frame_at_origin_is_identity() {
        let w = givens_frame(OneQubitPoint::default());
        assert!(w.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn frame_at_quarter_turns() {
        let w = givens_frame(OneQubitPoint::new(FRAC_PI_2, 0.0, 0.0, 0.0));
        let want = ComplexMatrix::from_real_rows(&[&[0., 1., 0.], &[-1., 0., 0.], &[0., 0., 1.]]);
        assert!(w.max_abs_diff(&want) < 1e-15);

        let w = givens_frame(OneQubitPoint::new(0.0, FRAC_PI_2, 0.0, 0.0));
        let want = ComplexMatrix::from_real_rows(&[&[0., 0., 1.], &[0., 1., 0.], &[-1., 0., 0.]]);
        assert!(w.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn one_qubit_hamiltonian_examples() {
        let e = ModelEnergy::new(2.5).unwrap();
        let h = hamiltonian_one(OneQubitPoint::default(), e);
        assert!(
            h.max_abs_diff(&ComplexMatrix::from_diag(&[
                c(2.5, 0.),
                c(0., 0.),
                c(0., 0.)
            ])) < 1e-15
        );
        let h = hamiltonian_one(OneQubitPoint::new(FRAC_PI_2, 0.0, 0.0, 0.0), e);
        assert!(
            h.max_abs_diff(&ComplexMatrix::from_diag(&[
                c(0., 0.),
                c(2.5, 0.),
                c(0., 0.)
            ])) < 1e-15
        );
    }

    #[test]
    fn two_qubit_base_point() {
        let e = ModelEnergy::default();
        let h = hamiltonian_two(TwoQubitPoint::default(), e);
        let d: Vec<Complex64> = [2., 1., 1., 1., 0., 0., 1., 0., 0.]
            .iter()
            .map(|&x| c(x, 0.))
            .collect();
        assert!(h.max_abs_diff(&ComplexMatrix::from_diag(&d)) < 1e-15);
    }

    #[test]
    fn two_qubit_reduces_to_kron_sum_without_xi() {
        let e = ModelEnergy::default();
        let p = TwoQubitPoint {
            a: OneQubitPoint::new(0.3, -1.2, 2.0, 0.4),
            b: OneQubitPoint::new(1.1, 0.7, -0.5, 2.9),
            xi: 0.0,
        };
        let i3 = ComplexMatrix::identity(3);
        let want = &kron(&hamiltonian_one(p.a, e), &i3) + &kron(&i3, &hamiltonian_one(p.b, e));
        assert!(hamiltonian_two(p, e).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn cp2_chart_examples() {
        assert_eq!(
            cp2_from_inhomogeneous(c(0., 0.), c(0., 0.)),
            OneQubitPoint::default()
        );
        let p = cp2_from_inhomogeneous(c(1., 0.), c(0., 0.));
        assert!(
            (p.theta1 - FRAC_PI_4).abs() < 1e-15
                && p.phi1 == 0.0
                && p.theta2 == 0.0
                && p.phi2 == 0.0
        );
        let p = cp2_from_inhomogeneous(c(0., 1.), c(0., 1.));
        for v in [p.theta1, p.theta2] {
            assert!((v - FRAC_PI_4).abs() < 1e-15);
        }
        for v in [p.phi1, p.phi2] {
            assert!((v - FRAC_PI_2).abs() < 1e-15);
        }
        let p = cp2_from_inhomogeneous(c(-3.0, -0.0), c(0.2, -0.1));
        assert!(p.phi1 > 0.0 && p.phi1 <= PI);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let w = two_qubit_frame(TwoQubitPoint::from_slice(&[
            0.3, 1.0, -0.4, 2.2, 1.7, -0.9, 0.5, 0.1, 1.3,
        ]));
        let diag: Vec<Complex64> = (0..9).map(|i| c(i as f64 * 0.5 - 1.0, 0.)).collect();
        let h = &(&w * &ComplexMatrix::from_diag(&diag)) * &w.adjoint();
        let ev = hermitian_eigenvalues(&h);
        for (i, v) in ev.iter().enumerate() {
            assert!((v - (i as f64 * 0.5 - 1.0)).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn system_metadata() {
        assert_eq!(System::OneQubit.coords(), 4);
        assert_eq!(System::TwoQubit.coords(), 9);
        assert_eq!(System::TwoQubit.coordinate_names().len(), 9);
        assert_eq!(System::from_tag("two-qubit"), Some(System::TwoQubit));
        assert_eq!(System::from_tag("three"), None);
        assert!(ModelEnergy::new(0.0).is_none());
    }

    fn angle() -> impl Strategy<Value = f64> {
        -7.0f64..7.0
    }

    proptest! {
        #[test]
        fn frame_is_unitary(t1 in angle(), t2 in angle(), p1 in angle(), p2 in angle()) {
            let w = givens_frame(OneQubitPoint::new(t1, t2, p1, p2));
            prop_assert!(w.unitarity_defect() <= 1e-12);
        }

        #[test]
        fn one_qubit_spectrum(t1 in angle(), t2 in angle(), p1 in angle(), p2 in angle(), eps in 0.1f64..5.0) {
            let h = hamiltonian_one(OneQubitPoint::new(t1, t2, p1, p2), ModelEnergy::new(eps).unwrap());
            prop_assert!(h.hermitian_defect() <= 1e-12);
            let ev = hermitian_eigenvalues(&h);
            prop_assert!(ev[0].abs() <= 1e-10 && ev[1].abs() <= 1e-10 && (ev[2] - eps).abs() <= 1e-10);
        }

        #[test]
        fn two_qubit_pattern_matches_conjugation(v in proptest::collection::vec(angle(), 9)) {
            let p = TwoQubitPoint::from_slice(&v);
            let e = ModelEnergy::new(1.3).unwrap();
            let direct = hamiltonian_two(p, e);
            let pattern = hamiltonian_two_by_pattern(p, e);
            prop_assert!(direct.max_abs_diff(&pattern) <= 1e-12);
        }

        #[test]
        fn one_qubit_periodicity(v in proptest::collection::vec(angle(), 4), k in 0usize..4) {
            let p = OneQubitPoint::from_slice(&v);
            let mut shifted = v.clone();
            shifted[k] += 2.0 * PI;
            let e = ModelEnergy::default();
            let d = frob_dist(&hamiltonian_one(p, e), &hamiltonian_one(OneQubitPoint::from_slice(&shifted), e)).unwrap();
            prop_assert!(d <= 1e-12);
        }
    }
}
