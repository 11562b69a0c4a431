//! Small dense complex matrices.
//!
//! Everything in this crate lives in dimension 2, 3, 4 or 9, so matrices are
//! stored row-major in a flat `Vec` and all kernels are plain loops. The
//! holonomy evaluator calls the `*_into` variants with preallocated buffers.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::MatError;

/// Library-wide tolerance for `‖U†U − I‖_F`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Largest skew defect `‖M + M†‖_F` accepted by [`mat_exp_antihermitian`].
pub const ANTI_HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, MatError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(MatError::NotSquare {
                    row: i,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(MatError::NonFinite);
        }
        Ok(m)
    }

    /// Real-valued convenience constructor, mostly for tests and fixed gates.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖M + M†‖_F`; zero exactly for anti-Hermitian matrices.
    pub fn skew_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] + self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖M − M†‖_F`; zero exactly for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                if i == j {
                    s -= ONE;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(ZERO);
    }

    pub fn set_identity(&mut self) {
        self.fill_zero();
        for i in 0..self.dim {
            self.data[i * self.dim + i] = ONE;
        }
    }

    pub fn copy_from(&mut self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        self.data.copy_from_slice(&other.data);
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Restriction to the rows and columns listed in `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

/// `out = a · b`. `out` must not alias either operand.
#[inline]
pub fn mul_into(a: &ComplexMatrix, b: &ComplexMatrix, out: &mut ComplexMatrix) {
    let n = a.dim;
    debug_assert!(b.dim == n && out.dim == n);
    let (ad, bd, od) = (&a.data, &b.data, &mut out.data);
    if n == 4 {
        mul4(
            ad[..16].try_into().unwrap(),
            bd[..16].try_into().unwrap(),
            (&mut od[..16]).try_into().unwrap(),
        );
        return;
    }
    for i in 0..n {
        let row = &ad[i * n..(i + 1) * n];
        let orow = &mut od[i * n..(i + 1) * n];
        orow.fill(ZERO);
        for (k, &aik) in row.iter().enumerate() {
            let brow = &bd[k * n..(k + 1) * n];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
}

#[inline(always)]
fn mul4(a: &[Complex64; 16], b: &[Complex64; 16], out: &mut [Complex64; 16]) {
    for i in 0..4 {
        let r = [a[4 * i], a[4 * i + 1], a[4 * i + 2], a[4 * i + 3]];
        for j in 0..4 {
            out[4 * i + j] = r[0] * b[j] + r[1] * b[4 + j] + r[2] * b[8 + j] + r[3] * b[12 + j];
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let mut out = ComplexMatrix::zeros(self.dim);
        mul_into(self, rhs, &mut out);
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A unitary matrix on the degenerate subspace: the holonomy and target type.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix(ComplexMatrix);

impl GateMatrix {
    /// Wraps `m` after checking unitarity against `tol`.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self, MatError> {
        if !m.is_finite() {
            return Err(MatError::NonFinite);
        }
        let defect = m.unitarity_defect();
        if defect > tol {
            return Err(MatError::NotUnitary { defect, tol });
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Product of unitaries; stays unitary up to rounding.
    pub fn compose(&self, rhs: &GateMatrix) -> GateMatrix {
        Self(&self.0 * &rhs.0)
    }
}

impl AsRef<ComplexMatrix> for GateMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Index<(usize, usize)> for GateMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// `‖A − B‖_F = √Tr((A−B)†(A−B))`.
pub fn frob_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, MatError> {
    if a.dim != b.dim {
        return Err(MatError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Kronecker product; row `i·dimB + k`, column `j·dimB + l` holds `A[i,j]·B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out.data[(i * nb + k) * n + j * nb + l] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    out
}

/// Exponential of an anti-Hermitian matrix.
///
/// Fails when `‖M + M†‖_F` exceeds [`ANTI_HERMITIAN_TOL`]; such input means a
/// connection was evaluated wrongly upstream.
pub fn mat_exp_antihermitian(m: &ComplexMatrix) -> Result<GateMatrix, MatError> {
    if !m.is_finite() {
        return Err(MatError::NonFinite);
    }
    let defect = m.skew_defect();
    if defect > ANTI_HERMITIAN_TOL {
        return Err(MatError::NotAntiHermitian {
            defect,
            tol: ANTI_HERMITIAN_TOL,
        });
    }
    let mut ws = ExpWorkspace::new(m.dim());
    let mut out = ComplexMatrix::zeros(m.dim());
    ws.expm_into(m, &mut out);
    Ok(GateMatrix(out))
}

/// Reusable buffers for repeated exponentials of one dimension.
#[derive(Clone, Debug)]
pub struct ExpWorkspace {
    /// `powers[i] = X^i` for the scaled argument `X`.
    powers: Vec<ComplexMatrix>,
    acc: ComplexMatrix,
    tmp: ComplexMatrix,
}

/// Ceiling on `‖M‖₁` after scaling, paired with the Taylor degree used below it.
/// Each degree keeps the truncation term `x^(d+1)/(d+1)!` under 1e-17.
const TAYLOR_TABLE: [(f64, usize); 4] = [(0.015, 6), (0.08, 9), (0.25, 12), (0.5, 15)];

/// `1/k!` for `k = 0..=19`.
const INV_FACTORIAL: [f64; 20] = {
    let mut t = [1.0; 20];
    let mut k = 1;
    while k < 20 {
        t[k] = t[k - 1] / k as f64;
        k += 1;
    }
    t
};

impl ExpWorkspace {
    pub fn new(dim: usize) -> Self {
        Self {
            powers: (0..=4).map(|_| ComplexMatrix::zeros(dim)).collect(),
            acc: ComplexMatrix::zeros(dim),
            tmp: ComplexMatrix::zeros(dim),
        }
    }

    /// `out = exp(m)` without validation. `m` is assumed anti-Hermitian.
    pub fn expm_into(&mut self, m: &ComplexMatrix, out: &mut ComplexMatrix) {
        if m.dim == 2 {
            expm2_into(m, out);
            return;
        }
        if m.dim == 1 {
            out.data[0] = m.data[0].exp();
            return;
        }
        let n = m.dim;
        let norm = m.norm_one();
        let mut squarings = 0u32;
        let mut scaled_norm = norm;
        let limit = TAYLOR_TABLE[TAYLOR_TABLE.len() - 1].0;
        while scaled_norm > limit {
            scaled_norm *= 0.5;
            squarings += 1;
        }
        let degree = TAYLOR_TABLE
            .iter()
            .find(|(bound, _)| scaled_norm <= *bound)
            .map(|&(_, d)| d)
            .unwrap_or(15);
        let factor = 0.5f64.powi(squarings as i32);
        self.powers[0].set_identity();
        for (s, &v) in self.powers[1].data.iter_mut().zip(&m.data) {
            *s = v * factor;
        }

        // Paterson-Stockmeyer: p(X) = Σ_j (X^s)^j B_j with B_j of degree < s.
        let s = if degree <= 9 { 3 } else { 4 };
        for i in 2..=s {
            let (lo, hi) = self.powers.split_at_mut(i);
            mul_into(&lo[1], &lo[i - 1], &mut hi[0]);
        }
        let blocks = degree / s;
        let coeff = |k: usize| if k <= degree { INV_FACTORIAL[k] } else { 0.0 };
        let block_into = |powers: &[ComplexMatrix], j: usize, dst: &mut ComplexMatrix| {
            for (i, p) in powers.iter().enumerate().take(s) {
                let c = coeff(j * s + i);
                if c == 0.0 {
                    continue;
                }
                for (d, &v) in dst.data.iter_mut().zip(&p.data) {
                    *d += v * c;
                }
            }
        };
        self.acc.fill_zero();
        block_into(&self.powers, blocks, &mut self.acc);
        for j in (0..blocks).rev() {
            mul_into(&self.powers[s], &self.acc, &mut self.tmp);
            block_into(&self.powers, j, &mut self.tmp);
            std::mem::swap(&mut self.acc, &mut self.tmp);
        }
        for _ in 0..squarings {
            mul_into(&self.acc, &self.acc, &mut self.tmp);
            std::mem::swap(&mut self.acc, &mut self.tmp);
        }
        debug_assert_eq!(self.acc.dim, n);
        out.copy_from(&self.acc);
    }
}

/// Closed form for 2×2: with `M = c·I + N`, `N` traceless, `N² = −ω² I`,
/// `exp(M) = e^c (cos ω · I + sin ω / ω · N)`.
fn expm2_into(m: &ComplexMatrix, out: &mut ComplexMatrix) {
    let d = &m.data;
    let c = (d[0] + d[3]) * 0.5;
    let n00 = d[0] - c;
    let (n01, n10) = (d[1], d[2]);
    // For anti-Hermitian N this is real and non-negative.
    let omega_sq = -(n00 * n00 + n01 * n10).re;
    let omega = omega_sq.max(0.0).sqrt();
    let cos = omega.cos();
    let sinc = if omega < 1e-4 {
        1.0 - omega_sq / 6.0 + omega_sq * omega_sq / 120.0
    } else {
        omega.sin() / omega
    };
    let phase = c.exp();
    out.data[0] = phase * (cos + sinc * n00);
    out.data[1] = phase * (sinc * n01);
    out.data[2] = phase * (sinc * n10);
    out.data[3] = phase * (cos - sinc * n00);
}
