//! Dense complex matrices and the tensor bookkeeping used throughout the crate.
//!
//! Matrices are `nalgebra` dense complex matrices. `vec` stacks columns, so it
//! matches nalgebra's column-major storage. Bipartite operations always take
//! explicit factor dimensions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance on `max |A - A^dagger|` before a matrix counts as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as zero for PSD inputs.
pub const PSD_CLAMP: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn pauli_x() -> CMatrix {
    from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// The three Pauli matrices in x, y, z order.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    hermitian_deviation(m) <= HERMITIAN_TOL
}

/// Symmetrize `(M + M^dagger)/2` without checking.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Symmetrize after validating Hermiticity at `HERMITIAN_TOL`.
pub fn hermitize_checked(m: &CMatrix) -> Result<CMatrix> {
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(hermitize(m))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Real part of `tr(A B)` for Hermitian arguments.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

/// Stack the columns of `m`.
pub fn vec(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`] for a `d x d` result.
pub fn mat(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.len() != d * d {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot be reshaped to {d}x{d}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(d, d, v.as_slice()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Permutation `P` of size `d^4` with `vec(A ⊗ B) = P (vec A ⊗ vec B)` for `d x d` factors.
///
/// Built from the closed-form placement rule: `P` is block diagonal with `d`
/// copies of a `d^3` block whose row `i` (1-based) has its unit entry at
/// column `i + floor((i-1)/d) d(d-1) - floor((i-1)/d^2) d(d^2-1)`.
pub fn perm_d4(d: usize) -> Result<DMatrix<f64>> {
    if d < 2 {
        return Err(Error::Invalid(format!("perm_d4 needs d >= 2, got {d}")));
    }
    let d3 = d * d * d;
    let n = d3 * d;
    let mut p = DMatrix::<f64>::zeros(n, n);
    for block in 0..d {
        for i in 1..=d3 {
            let j = i as isize + ((i - 1) / d) as isize * (d * (d - 1)) as isize
                - ((i - 1) / (d * d)) as isize * (d * (d * d - 1)) as isize;
            p[(block * d3 + i - 1, block * d3 + (j as usize) - 1)] = 1.0;
        }
    }
    Ok(p)
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

fn check_bipartite(m: &CMatrix, d1: usize, d2: usize) -> Result<()> {
    if m.nrows() != d1 * d2 || m.ncols() != d1 * d2 {
        return Err(Error::Dimension(format!(
            "{}x{} matrix is not an operator on {d1}x{d2}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Partial trace of an operator on `C^d1 ⊗ C^d2` over the named factor.
pub fn partial_trace(m: &CMatrix, d1: usize, d2: usize, traced: Subsystem) -> Result<CMatrix> {
    check_bipartite(m, d1, d2)?;
    Ok(match traced {
        Subsystem::First => CMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()
        }),
    })
}

/// Transpose of the second tensor factor of an operator on `C^d1 ⊗ C^d2`.
pub fn partial_transpose(m: &CMatrix, d1: usize, d2: usize) -> Result<CMatrix> {
    check_bipartite(m, d1, d2)?;
    let n = d1 * d2;
    let mut out = CMatrix::zeros(n, n);
    for a in 0..d1 {
        for b in 0..d1 {
            for i in 0..d2 {
                for j in 0..d2 {
                    out[(a * d2 + i, b * d2 + j)] = m[(a * d2 + j, b * d2 + i)];
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose on a square operator assumed to act on `C^d ⊗ C^d`.
pub fn partial_transpose_square(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("partial transpose needs a square matrix".into()));
    }
    let d = (m.nrows() as f64).sqrt().round() as usize;
    if d * d != m.nrows() {
        return Err(Error::Dimension(format!("{} is not a perfect square", m.nrows())));
    }
    partial_transpose(m, d, d)
}

/// Orthogonal basis of `d x d` Hermitian matrices.
///
/// `elements[0]` is the identity; the rest are generalized Gell-Mann matrices
/// (symmetric and antisymmetric pairs, then diagonals), each with `tr H^2 = 2`.
/// For `d = 2` this is `I, X, Y, Z`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    pub d: usize,
    pub elements: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `tr(H^a H^b)`, which is `d` for the identity and `2` otherwise on the diagonal.
    pub fn norm_sq(&self, a: usize) -> f64 {
        if a == 0 {
            self.d as f64
        } else {
            2.0
        }
    }

    /// Expansion coefficients `x_a` with `m = sum_a x_a H^a` for Hermitian `m`.
    pub fn coefficients(&self, m: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .enumerate()
            .map(|(a, h)| inner(h, m) / self.norm_sq(a))
            .collect()
    }
}

pub fn hermitian_basis(d: usize) -> Result<HermitianBasis> {
    if d < 2 {
        return Err(Error::Invalid(format!("Hermitian basis needs d >= 2, got {d}")));
    }
    let mut elements = vec![identity(d)];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = CMatrix::zeros(d, d);
            s[(j, k)] = c(1.0, 0.0);
            s[(k, j)] = c(1.0, 0.0);
            elements.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            elements.push(a);
        }
    }
    for l in 1..d {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut h = CMatrix::zeros(d, d);
        for j in 0..l {
            h[(j, j)] = c(scale, 0.0);
        }
        h[(l, l)] = c(-(l as f64) * scale, 0.0);
        elements.push(h);
    }
    Ok(HermitianBasis { d, elements })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitize(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (vals, vecs)
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eig(m: &CMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Clamp eigenvalues in `[-PSD_CLAMP, 0)` to zero; more negative values are an error.
pub fn clamp_psd_spectrum(vals: &[f64]) -> Result<Vec<f64>> {
    vals.iter()
        .map(|&v| {
            if v >= 0.0 {
                Ok(v)
            } else if v >= -PSD_CLAMP {
                Ok(0.0)
            } else {
                Err(Error::NotPsd(v))
            }
        })
        .collect()
}

/// Unique PSD square root of a Hermitian PSD matrix.
pub fn matrix_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let h = hermitize_checked(m)?;
    let (vals, vecs) = eigh(&h);
    let vals = clamp_psd_spectrum(&vals)?;
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let r = v.sqrt();
        for i in 0..n {
            scaled[(i, j)] *= r;
        }
    }
    Ok(scaled * vecs.adjoint())
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn spectral_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Numerical rank with singular-value threshold `rel_tol * sigma_max`.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// JSON form of a complex matrix: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 || self.re.len() != n || self.im.len() != n {
            return Err(Error::Dimension(format!(
                "matrix {}x{} has {} real and {} imaginary entries",
                self.rows,
                self.cols,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            c(self.re[k], self.im[k])
        }))
    }
}
