//! Target gates and the closed-form loops that realize some of them.
//!
//! Two-qubit matrices use the basis {|00⟩, |01⟩, |10⟩, |11⟩}, qubit a first.
//! The two-qubit Fourier transform is `F[j,k] = i^{jk} / 2` (ω = i, no bit
//! reversal, no extra phase).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{FormatError, GateError};
use crate::holonomy::concat_all;
use crate::loops::PolygonalLoop;
use crate::matcore::{ComplexMatrix, GateMatrix, UNITARITY_TOL};
use crate::model::System;

/// Unitarity tolerance for user-supplied matrices.
pub const CUSTOM_UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum GateSpec {
    Identity(System),
    Hadamard,
    /// `diag(1, e^{iπ/8})`.
    Pi8,
    /// Global phase `e^{iδ} I₂`.
    Phase(f64),
    /// `exp(iβσ_y)`.
    SigmaY(f64),
    /// `exp(iασ_z)`.
    SigmaZ(f64),
    /// `e^{iδ} exp(iaσ_z) exp(ibσ_y) exp(icσ_z)`.
    Su2 {
        delta: f64,
        a: f64,
        b: f64,
        c: f64,
    },
    Cnot,
    Swap,
    /// `exp(iΘ|11⟩⟨11|)`.
    ControlledPhase(f64),
    Qft2,
    Custom(GateMatrix),
}

impl GateSpec {
    pub fn system(&self) -> System {
        match self {
            GateSpec::Identity(s) => *s,
            GateSpec::Hadamard
            | GateSpec::Pi8
            | GateSpec::Phase(_)
            | GateSpec::SigmaY(_)
            | GateSpec::SigmaZ(_)
            | GateSpec::Su2 { .. } => System::OneQubit,
            GateSpec::Cnot | GateSpec::Swap | GateSpec::ControlledPhase(_) | GateSpec::Qft2 => {
                System::TwoQubit
            }
            GateSpec::Custom(m) => {
                if m.dim() == 2 {
                    System::OneQubit
                } else {
                    System::TwoQubit
                }
            }
        }
    }

    /// Parses names such as `hadamard`, `cnot`, `phase(0.7)`, `controlled-phase(pi)`
    /// or `su2(1, pi/7, 1/3, 1)`. `identity` takes its size from `system`.
    pub fn parse(text: &str, system: System) -> Result<Self, GateError> {
        let t = text.trim().to_ascii_lowercase();
        let (name, args) = match t.find('(') {
            Some(open) if t.ends_with(')') => {
                let inner = &t[open + 1..t.len() - 1];
                let args: Option<Vec<f64>> = inner.split(',').map(parse_angle).collect();
                let args = args.ok_or_else(|| GateError::UnknownGate(text.to_string()))?;
                (t[..open].trim().to_string(), args)
            }
            _ => (t.clone(), Vec::new()),
        };
        let unknown = || GateError::UnknownGate(text.to_string());
        let one = |f: fn(f64) -> GateSpec| -> Result<GateSpec, GateError> {
            match args.as_slice() {
                [x] => Ok(f(*x)),
                _ => Err(unknown()),
            }
        };
        let spec = match name.as_str() {
            "identity" | "id" if args.is_empty() => GateSpec::Identity(system),
            "hadamard" | "h" if args.is_empty() => GateSpec::Hadamard,
            "pi8" | "t" if args.is_empty() => GateSpec::Pi8,
            "cnot" if args.is_empty() => GateSpec::Cnot,
            "swap" if args.is_empty() => GateSpec::Swap,
            "qft2" | "fourier" if args.is_empty() => GateSpec::Qft2,
            "phase" => one(GateSpec::Phase)?,
            "sigma-y" | "sy" => one(GateSpec::SigmaY)?,
            "sigma-z" | "sz" => one(GateSpec::SigmaZ)?,
            "controlled-phase" | "cphase" => one(GateSpec::ControlledPhase)?,
            "su2" => match args.as_slice() {
                [delta, a, b, c] => GateSpec::Su2 {
                    delta: *delta,
                    a: *a,
                    b: *b,
                    c: *c,
                },
                _ => return Err(unknown()),
            },
            _ => return Err(unknown()),
        };
        Ok(spec)
    }

    /// Short name used in loop-file metadata.
    pub fn name(&self) -> String {
        match self {
            GateSpec::Identity(System::OneQubit) => "identity".into(),
            GateSpec::Identity(System::TwoQubit) => "identity(two-qubit)".into(),
            GateSpec::Hadamard => "hadamard".into(),
            GateSpec::Pi8 => "pi8".into(),
            GateSpec::Phase(d) => format!("phase({d})"),
            GateSpec::SigmaY(b) => format!("sigma-y({b})"),
            GateSpec::SigmaZ(a) => format!("sigma-z({a})"),
            GateSpec::Su2 { delta, a, b, c } => format!("su2({delta}, {a}, {b}, {c})"),
            GateSpec::Cnot => "cnot".into(),
            GateSpec::Swap => "swap".into(),
            GateSpec::ControlledPhase(t) => format!("controlled-phase({t})"),
            GateSpec::Qft2 => "qft2".into(),
            GateSpec::Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Accepts plain floats and `pi` multiples: `pi`, `-pi/7`, `2pi`, `0.5*pi`, `1/3`.
fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().ok()?,
        };
        c * PI
    } else {
        num.parse::<f64>().ok()?
    };
    Some(value / den)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sigma_y_rotation(beta: f64) -> ComplexMatrix {
    let (s, co) = beta.sin_cos();
    ComplexMatrix::from_real_rows(&[&[co, s], &[-s, co]])
}

fn sigma_z_rotation(alpha: f64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[
        Complex64::from_polar(1.0, alpha),
        Complex64::from_polar(1.0, -alpha),
    ])
}

/// Matrix of a gate specification.
pub fn gate_matrix(spec: &GateSpec) -> Result<GateMatrix, GateError> {
    let m = match spec {
        GateSpec::Identity(s) => ComplexMatrix::identity(s.gate_dim()),
        GateSpec::Hadamard => ComplexMatrix::from_real_rows(&[
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ]),
        GateSpec::Pi8 => {
            ComplexMatrix::from_diag(&[c(1.0, 0.0), Complex64::from_polar(1.0, FRAC_PI_8)])
        }
        GateSpec::Phase(d) => ComplexMatrix::identity(2).scale(Complex64::from_polar(1.0, *d)),
        GateSpec::SigmaY(b) => sigma_y_rotation(*b),
        GateSpec::SigmaZ(a) => sigma_z_rotation(*a),
        GateSpec::Su2 { delta, a, b, c: cz } => (&(&sigma_z_rotation(*a) * &sigma_y_rotation(*b))
            * &sigma_z_rotation(*cz))
            .scale(Complex64::from_polar(1.0, *delta)),
        GateSpec::Cnot => ComplexMatrix::from_real_rows(&[
            &[1., 0., 0., 0.],
            &[0., 1., 0., 0.],
            &[0., 0., 0., 1.],
            &[0., 0., 1., 0.],
        ]),
        GateSpec::Swap => ComplexMatrix::from_real_rows(&[
            &[1., 0., 0., 0.],
            &[0., 0., 1., 0.],
            &[0., 1., 0., 0.],
            &[0., 0., 0., 1.],
        ]),
        GateSpec::ControlledPhase(t) => ComplexMatrix::from_diag(&[
            c(1., 0.),
            c(1., 0.),
            c(1., 0.),
            Complex64::from_polar(1.0, *t),
        ]),
        GateSpec::Qft2 => {
            let powers = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)];
            ComplexMatrix::from_fn(4, |j, k| powers[(j * k) % 4] * 0.5)
        }
        GateSpec::Custom(g) => return Ok(g.clone()),
    };
    Ok(GateMatrix::new(m, UNITARITY_TOL)?)
}

/// Reads a custom gate: one matrix row per line as `re im` pairs, row-major.
/// Blank lines and `#` comments are skipped.
pub fn parse_matrix_text(text: &str) -> Result<GateMatrix, FormatError> {
    let mut rows: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums: Result<Vec<f64>, _> = body
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse::<f64>)
            .collect();
        let nums = nums.map_err(|e| FormatError::Matrix {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        if nums.len() % 2 != 0 {
            return Err(FormatError::Matrix {
                line: lineno + 1,
                msg: format!("odd number of reals ({}); expected re/im pairs", nums.len()),
            });
        }
        rows.push((lineno + 1, nums.chunks(2).map(|p| c(p[0], p[1])).collect()));
    }
    let dim = rows.len();
    if dim != 2 && dim != 4 {
        return Err(FormatError::Matrix {
            line: rows.last().map_or(1, |r| r.0),
            msg: format!("expected a 2x2 or 4x4 matrix, found {dim} rows"),
        });
    }
    for (line, row) in &rows {
        if row.len() != dim {
            return Err(FormatError::Matrix {
                line: *line,
                msg: format!("row has {} entries, expected {dim}", row.len()),
            });
        }
    }
    let m = ComplexMatrix::from_rows(&rows.into_iter().map(|r| r.1).collect::<Vec<_>>()).map_err(
        |e| FormatError::Matrix {
            line: 0,
            msg: e.to_string(),
        },
    )?;
    GateMatrix::new(m, CUSTOM_UNITARITY_TOL).map_err(|e| FormatError::Matrix {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn load_matrix(path: &Path) -> Result<GateMatrix, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_text(&text)
}

/// A closed-form loop sequence, possibly off from the named gate by a global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticConstruction {
    /// Loops in traversal order.
    pub pieces: Vec<PolygonalLoop>,
    /// The holonomy equals `e^{i·surplus} · gate_matrix(spec)`.
    pub phase_surplus: f64,
}

impl AnalyticConstruction {
    /// All pieces joined into one loop.
    pub fn joined(&self) -> PolygonalLoop {
        concat_all(&self.pieces).expect("pieces share system and basepoint")
    }

    /// The joined loop followed by a global-phase loop cancelling the surplus.
    pub fn phase_corrected(&self) -> PolygonalLoop {
        if self.phase_surplus == 0.0 {
            return self.joined();
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(phase_loops(-self.phase_surplus));
        concat_all(&pieces).expect("pieces share system and basepoint")
    }
}

fn one_qubit(vertices: &[[f64; 4]]) -> PolygonalLoop {
    PolygonalLoop::at_origin(
        System::OneQubit,
        vertices.iter().map(|v| v.to_vec()).collect(),
    )
    .expect("finite literal vertices")
}

/// (θ2, φ2): (0,0) → (π/2,0) → (π/2,δ) → (0,δ) → (0,0); holonomy `diag(1, e^{iδ})`.
fn theta2_phi2_rectangle(delta: f64) -> PolygonalLoop {
    one_qubit(&[
        [0.0, FRAC_PI_2, 0.0, 0.0],
        [0.0, FRAC_PI_2, 0.0, delta],
        [0.0, 0.0, 0.0, delta],
    ])
}

/// (θ1, φ1): (0,0) → (π/2,0) → (π/2,δ) → (0,δ) → (0,0); holonomy `diag(e^{iδ}, 1)`.
fn theta1_phi1_rectangle(delta: f64) -> PolygonalLoop {
    one_qubit(&[
        [FRAC_PI_2, 0.0, 0.0, 0.0],
        [FRAC_PI_2, 0.0, delta, 0.0],
        [0.0, 0.0, delta, 0.0],
    ])
}

fn phase_loops(delta: f64) -> [PolygonalLoop; 2] {
    [theta2_phi2_rectangle(delta), theta1_phi1_rectangle(delta)]
}

fn sigma_y_loop(beta: f64) -> PolygonalLoop {
    one_qubit(&[
        [0.0, FRAC_PI_2, 0.0, 0.0],
        [beta, FRAC_PI_2, 0.0, 0.0],
        [beta, 0.0, 0.0, 0.0],
    ])
}

fn sigma_z_loop(alpha: f64) -> PolygonalLoop {
    one_qubit(&[
        [FRAC_PI_2, 0.0, 0.0, 0.0],
        [FRAC_PI_2, FRAC_PI_2, 0.0, 0.0],
        [FRAC_PI_2, FRAC_PI_2, alpha, 0.0],
        [FRAC_PI_2, 0.0, alpha, 0.0],
        [0.0, 0.0, alpha, 0.0],
    ])
}

fn controlled_phase_loop(theta: f64) -> PolygonalLoop {
    let v = |t2a: f64, xi: f64| vec![0.0, t2a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, xi];
    PolygonalLoop::at_origin(
        System::TwoQubit,
        vec![v(FRAC_PI_2, 0.0), v(FRAC_PI_2, theta), v(0.0, theta)],
    )
    .expect("finite literal vertices")
}

/// Closed-form loop construction for the gates that have one.
pub fn analytic_loop(spec: &GateSpec) -> Result<AnalyticConstruction, GateError> {
    let exact = |pieces: Vec<PolygonalLoop>| AnalyticConstruction {
        pieces,
        phase_surplus: 0.0,
    };
    Ok(match spec {
        GateSpec::Pi8 => exact(vec![theta2_phi2_rectangle(FRAC_PI_8)]),
        GateSpec::SigmaY(b) => exact(vec![sigma_y_loop(*b)]),
        GateSpec::SigmaZ(a) => exact(vec![sigma_z_loop(*a)]),
        GateSpec::Phase(d) => exact(phase_loops(*d).to_vec()),
        GateSpec::ControlledPhase(t) => exact(vec![controlled_phase_loop(*t)]),
        // exp(iπ/2 σ_z) exp(iπ/4 σ_y) = e^{iπ/2} H
        GateSpec::Hadamard => AnalyticConstruction {
            pieces: vec![sigma_y_loop(FRAC_PI_4), sigma_z_loop(FRAC_PI_2)],
            phase_surplus: FRAC_PI_2,
        },
        GateSpec::Identity(s) => exact(vec![
            PolygonalLoop::at_origin(*s, vec![]).expect("empty loop")
        ]),
        other => return Err(GateError::NoAnalyticLoop(other.name())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::AnalyticConnection;
    use crate::holonomy::{holonomy, HolonomyConfig};
    use crate::matcore::{frob_dist, kron};

    fn hol(l: &PolygonalLoop) -> GateMatrix {
        holonomy(
            l,
            &AnalyticConnection::new(l.system()),
            HolonomyConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn fixed_matrices() {
        let pi8 = gate_matrix(&GateSpec::Pi8).unwrap();
        assert!((pi8[(1, 1)] - Complex64::from_polar(1.0, PI / 8.0)).norm() < 1e-15);
        let h = gate_matrix(&GateSpec::Hadamard).unwrap();
        assert!((h[(1, 1)].re + FRAC_1_SQRT_2).abs() < 1e-15);
        let cp = gate_matrix(&GateSpec::ControlledPhase(PI)).unwrap();
        assert!((cp[(3, 3)] - c(-1.0, 0.0)).norm() < 1e-15);
        let f = gate_matrix(&GateSpec::Qft2).unwrap();
        let want = ComplexMatrix::from_rows(&[
            vec![c(1., 0.), c(1., 0.), c(1., 0.), c(1., 0.)],
            vec![c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)],
            vec![c(1., 0.), c(-1., 0.), c(1., 0.), c(-1., 0.)],
            vec![c(1., 0.), c(0., -1.), c(-1., 0.), c(0., 1.)],
        ])
        .unwrap()
        .scale_real(0.5);
        assert!(f.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn all_gates_unitary() {
        let specs = [
            GateSpec::Identity(System::TwoQubit),
            GateSpec::Hadamard,
            GateSpec::Pi8,
            GateSpec::Phase(0.3),
            GateSpec::SigmaY(1.1),
            GateSpec::SigmaZ(-2.0),
            GateSpec::Su2 {
                delta: 1.0,
                a: PI / 7.0,
                b: 1.0 / 3.0,
                c: 1.0,
            },
            GateSpec::Cnot,
            GateSpec::Swap,
            GateSpec::ControlledPhase(0.4),
            GateSpec::Qft2,
        ];
        for s in &specs {
            let g = gate_matrix(s).unwrap();
            assert!(g.matrix().unitarity_defect() <= 1e-12, "{s}");
            assert_eq!(g.dim(), s.system().gate_dim());
        }
    }

    #[test]
    fn cnot_from_controlled_phase() {
        let i2 = ComplexMatrix::identity(2);
        let h = gate_matrix(&GateSpec::Hadamard).unwrap();
        let ih = kron(&i2, h.matrix());
        let cp = gate_matrix(&GateSpec::ControlledPhase(PI)).unwrap();
        let got = &(&ih * cp.matrix()) * &ih;
        assert!(frob_dist(&got, gate_matrix(&GateSpec::Cnot).unwrap().matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn hadamard_decomposition_holds() {
        let rhs = (&gate_matrix(&GateSpec::SigmaZ(FRAC_PI_2))
            .unwrap()
            .into_matrix()
            * gate_matrix(&GateSpec::SigmaY(FRAC_PI_4)).unwrap().matrix())
        .scale(Complex64::from_polar(1.0, -FRAC_PI_2));
        assert!(
            frob_dist(&rhs, gate_matrix(&GateSpec::Hadamard).unwrap().matrix()).unwrap() < 1e-15
        );
    }

    #[test]
    fn analytic_loops_reproduce_gates() {
        let specs = [
            GateSpec::Pi8,
            GateSpec::SigmaY(0.9),
            GateSpec::SigmaZ(-1.3),
            GateSpec::Phase(0.7),
            GateSpec::ControlledPhase(2.2),
            GateSpec::Hadamard,
            GateSpec::Identity(System::OneQubit),
        ];
        for s in &specs {
            let construction = analytic_loop(s).unwrap();
            let want = gate_matrix(s).unwrap();
            let got = hol(&construction.phase_corrected());
            assert!(
                frob_dist(got.matrix(), want.matrix()).unwrap() <= 1e-6,
                "{s}"
            );
        }
    }

    #[test]
    fn hadamard_composite_carries_phase() {
        let construction = analytic_loop(&GateSpec::Hadamard).unwrap();
        let got = hol(&construction.joined());
        let want = gate_matrix(&GateSpec::Hadamard)
            .unwrap()
            .matrix()
            .scale(c(0.0, 1.0));
        assert!(frob_dist(got.matrix(), &want).unwrap() <= 1e-6);
    }

    #[test]
    fn analytic_structure() {
        assert_eq!(analytic_loop(&GateSpec::Pi8).unwrap().pieces[0].k(), 3);
        assert_eq!(
            analytic_loop(&GateSpec::Phase(0.7))
                .unwrap()
                .joined()
                .edge_count(),
            8
        );
        assert_eq!(
            analytic_loop(&GateSpec::ControlledPhase(1.0))
                .unwrap()
                .pieces[0]
                .system(),
            System::TwoQubit
        );
        assert!(matches!(
            analytic_loop(&GateSpec::Cnot),
            Err(GateError::NoAnalyticLoop(_))
        ));
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            GateSpec::parse("Hadamard", System::OneQubit).unwrap(),
            GateSpec::Hadamard
        );
        assert_eq!(
            GateSpec::parse("identity", System::TwoQubit).unwrap(),
            GateSpec::Identity(System::TwoQubit)
        );
        assert_eq!(
            GateSpec::parse("controlled-phase(pi)", System::TwoQubit).unwrap(),
            GateSpec::ControlledPhase(PI)
        );
        assert_eq!(
            GateSpec::parse("su2(1, pi/7, 1/3, 1)", System::OneQubit).unwrap(),
            GateSpec::Su2 {
                delta: 1.0,
                a: PI / 7.0,
                b: 1.0 / 3.0,
                c: 1.0
            }
        );
        assert_eq!(
            GateSpec::parse("phase(-2pi)", System::OneQubit).unwrap(),
            GateSpec::Phase(-2.0 * PI)
        );
        assert!(GateSpec::parse("toffoli", System::TwoQubit).is_err());
        assert!(GateSpec::parse("phase(1,2)", System::OneQubit).is_err());
        assert!(GateSpec::parse("cnot(1)", System::TwoQubit).is_err());
    }

    #[test]
    fn matrix_text() {
        let g = parse_matrix_text("# swap-free X\n0 0  1 0\n1 0  0 0\n").unwrap();
        assert_eq!(g.dim(), 2);
        assert!(matches!(
            parse_matrix_text("1 0 0\n0 0 1 0\n"),
            Err(FormatError::Matrix { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_text("1 0 1 0\n1 0 1 0\n"),
            Err(FormatError::Matrix { .. })
        ));
        assert!(matches!(
            parse_matrix_text("1 0\n"),
            Err(FormatError::Matrix { .. })
        ));
    }
}
