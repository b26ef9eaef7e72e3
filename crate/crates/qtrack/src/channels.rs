//! Quantum states, Choi matrices, Kraus sets and the qubit canonical form.
//!
//! Choi convention: `Choi = sum_i vec(K_i) vec(K_i)^dagger` with column-stacking
//! `vec`, so the input lives on the first tensor factor and the output on the
//! second. A map is applied as `C(rho) = tr_1[(rho^T ⊗ I) Choi]` and is trace
//! preserving iff `tr_2 Choi = I`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{
    self, c, eigh, hermitize, identity, kron, max_abs, partial_trace, paulis, CMatrix, CVector,
    Subsystem,
};

/// Trace tolerance for density matrices.
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Tolerance for CP (minimum eigenvalue) and TP (partial trace residual) checks.
pub const CPTP_TOL: f64 = 1e-9;
/// Slack allowed in the qubit feasibility inequalities.
pub const RSW_SLACK: f64 = 1e-10;
/// Tolerance of the extremality equalities.
pub const EXTREMAL_TOL: f64 = 1e-9;

pub type Bloch = Vector3<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square with d >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let m = mat::hermitize_checked(&m)?;
        let tr = m.trace().re;
        if (tr - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lo = mat::min_eig(&m);
        if lo < -mat::PSD_CLAMP {
            return Err(Error::NotPsd(lo));
        }
        Ok(DensityMatrix { m })
    }

    /// Wrap a matrix known to be a state up to rounding; it is only symmetrized.
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        DensityMatrix { m: hermitize(&m) }
    }

    pub fn from_bloch(r: &Bloch) -> Result<Self> {
        if r.norm() > 1.0 + STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {} exceeds 1", r.norm())));
        }
        Ok(DensityMatrix { m: bloch_matrix(1.0, r) })
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / c(n, 0.0);
        Ok(DensityMatrix { m: &v * v.adjoint() })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { m: identity(d) / c(d as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn purity(&self) -> f64 {
        mat::inner(&self.m, &self.m)
    }

    /// Bloch vector for qubits.
    pub fn bloch(&self) -> Option<Bloch> {
        (self.dim() == 2).then(|| bloch_of(&self.m))
    }
}

/// `(c I + r . sigma) / 2`.
pub fn bloch_matrix(c0: f64, r: &Bloch) -> CMatrix {
    let [x, y, z] = paulis();
    (identity(2) * c(c0, 0.0) + x * c(r[0], 0.0) + y * c(r[1], 0.0) + z * c(r[2], 0.0))
        * c(0.5, 0.0)
}

/// Components `tr(m sigma_k)` of a 2x2 Hermitian matrix.
pub fn bloch_of(m: &CMatrix) -> Bloch {
    let [x, y, z] = paulis();
    Bloch::new(mat::inner(m, &x), mat::inner(m, &y), mat::inner(m, &z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    m: CMatrix,
}

impl ChoiMatrix {
    /// Wrap a Hermitian `d^2 x d^2` matrix. CP and TP are not required.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("Choi matrix must be square".into()));
        }
        let d = (m.nrows() as f64).sqrt().round() as usize;
        if d * d != m.nrows() || d < 2 {
            return Err(Error::Dimension(format!("Choi size {} is not d^2 with d >= 2", m.nrows())));
        }
        let m = mat::hermitize_checked(&m)?;
        Ok(ChoiMatrix { d, m })
    }

    /// Like [`ChoiMatrix::new`] but symmetrizes instead of validating; for solver output.
    pub fn from_matrix_lossy(m: CMatrix) -> Result<Self> {
        Self::new(hermitize(&m))
    }

    pub fn identity(d: usize) -> Self {
        let psi = mat::vec(&identity(d));
        ChoiMatrix { d, m: &psi * psi.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Output block `C(|j><l|)`.
    fn block(&self, j: usize, l: usize) -> CMatrix {
        self.m.view((j * self.d, l * self.d), (self.d, self.d)).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let d = first.nrows();
        if ops.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::Dimension("Kraus operators must be square with equal size".into()));
        }
        Ok(KrausSet { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `max |sum K^dagger K - I|`.
    pub fn tp_residual(&self) -> f64 {
        let d = self.dim();
        let s = self.ops.iter().fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs(&(s - identity(d)))
    }

    pub fn is_tp(&self) -> bool {
        self.tp_residual() <= CPTP_TOL
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.ops.iter().fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
            acc + k * rho * k.adjoint()
        })
    }
}

pub fn choi_from_kraus(k: &KrausSet) -> Result<ChoiMatrix> {
    let d = k.dim();
    let mut m = CMatrix::zeros(d * d, d * d);
    for op in &k.ops {
        let v = mat::vec(op);
        m += &v * v.adjoint();
    }
    ChoiMatrix::from_matrix_lossy(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KrausRoute {
    /// Scaled eigenvectors; one operator per nonzero eigenvalue.
    #[default]
    Eigen,
    /// Columns of a semidefinite Cholesky factor; always `d^2` operators.
    Cholesky,
}

pub fn kraus_from_choi(ch: &ChoiMatrix, route: KrausRoute) -> Result<KrausSet> {
    let d = ch.dim();
    let cols: Vec<CVector> = match route {
        KrausRoute::Eigen => {
            let (vals, vecs) = eigh(ch.matrix());
            let vals = mat::clamp_psd_spectrum(&vals)?;
            let vmax = vals.iter().fold(0.0f64, |a, &b| a.max(b));
            vals.iter()
                .enumerate()
                .filter(|(_, &v)| v > 1e-14 * vmax.max(1.0))
                .map(|(j, &v)| vecs.column(j).into_owned() * c(v.sqrt(), 0.0))
                .collect()
        }
        KrausRoute::Cholesky => {
            let l = psd_cholesky(ch.matrix())?;
            (0..l.ncols()).map(|j| l.column(j).into_owned()).collect()
        }
    };
    let ops = if cols.is_empty() {
        vec![CMatrix::zeros(d, d)]
    } else {
        cols.iter().map(|v| mat::mat(v, d)).collect::<Result<Vec<_>>>()?
    };
    KrausSet::new(ops)
}

/// Lower-triangular `L` with `L L^dagger = m` for PSD `m`, zero columns at null pivots.
fn psd_cholesky(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    let scale = (0..n).fold(0.0f64, |a, i| a.max(m[(i, i)].re.abs())).max(1e-300);
    let tol = 1e-12 * scale;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut dj = m[(j, j)].re;
        for k in 0..j {
            dj -= l[(j, k)].norm_sqr();
        }
        if dj < -mat::PSD_CLAMP.max(1e3 * tol) {
            return Err(Error::NotPsd(dj));
        }
        if dj <= tol {
            continue;
        }
        let r = dj.sqrt();
        l[(j, j)] = c(r, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / r;
        }
    }
    Ok(l)
}

/// `C(m)` for any `d x d` matrix `m`.
pub fn apply_matrix(ch: &ChoiMatrix, m: &CMatrix) -> Result<CMatrix> {
    let d = ch.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Dimension(format!(
            "channel on d={d} applied to {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        for l in 0..d {
            let w = m[(j, l)];
            if w != c(0.0, 0.0) {
                out += ch.block(j, l) * w;
            }
        }
    }
    Ok(out)
}

/// Output state of a CPTP map; positivity is not rechecked.
pub fn apply(ch: &ChoiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_matrix_unchecked(apply_matrix(ch, rho.matrix())?))
}

/// Choi matrix of `x -> b(a(x))` via `tr_1[(A^T ⊗ I) P (|Psi><Psi| ⊗ B) P]`.
pub fn compose(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<ChoiMatrix> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::Dimension(format!("cannot compose d={} with d={}", d, b.dim())));
    }
    let d2 = d * d;
    let p = mat::perm_d4(d)?.map(|x| c(x, 0.0));
    let psi = mat::vec(&identity(d));
    let big = &p * kron(&(&psi * psi.adjoint()), b.matrix()) * p.transpose();
    let lhs = kron(&a.matrix().transpose(), &identity(d2));
    let out = partial_trace(&(lhs * big), d2, d2, Subsystem::First)?;
    ChoiMatrix::from_matrix_lossy(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub min_eig: f64,
    pub tp_residual: f64,
}

pub fn tp_residual(ch: &ChoiMatrix) -> f64 {
    let d = ch.dim();
    let t = partial_trace(ch.matrix(), d, d, Subsystem::Second).expect("square Choi");
    max_abs(&(t - identity(d)))
}

pub fn check_cptp(ch: &ChoiMatrix) -> CptpReport {
    let min_eig = mat::min_eig(ch.matrix());
    let tp_residual = tp_residual(ch);
    CptpReport { cp: min_eig >= -CPTP_TOL, tp: tp_residual <= CPTP_TOL, min_eig, tp_residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub ppt: bool,
    pub min_eig_pt: f64,
}

pub fn check_ppt(ch: &ChoiMatrix) -> PptReport {
    let d = ch.dim();
    let pt = mat::partial_transpose(ch.matrix(), d, d).expect("square Choi");
    let min_eig_pt = mat::min_eig(&pt);
    PptReport { ppt: min_eig_pt >= -CPTP_TOL, min_eig_pt }
}

/// `C(rho) = U D(V rho V^dagger) U^dagger` with `D` scaling Bloch components by
/// `mu` and then translating by `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitChannelCanonical {
    pub v: CMatrix,
    pub u: CMatrix,
    pub mu: [f64; 3],
    pub s: [f64; 3],
}

impl QubitChannelCanonical {
    pub fn unitary(w: CMatrix) -> Self {
        QubitChannelCanonical { v: identity(2), u: w, mu: [1.0; 3], s: [0.0; 3] }
    }

    /// Affine action `r -> t + T r` on Bloch vectors.
    pub fn affine(&self) -> (Matrix3<f64>, Bloch) {
        let ru = rotation_of_unitary(&self.u);
        let rv = rotation_of_unitary(&self.v);
        let t = ru * Matrix3::from_diagonal(&Vector3::from(self.mu)) * rv;
        (t, ru * Vector3::from(self.s))
    }

    pub fn apply_bloch(&self, r: &Bloch) -> Bloch {
        let (t, s) = self.affine();
        s + t * r
    }
}

/// Rotation `R` with `U (r . sigma) U^dagger = (R r) . sigma`.
pub fn rotation_of_unitary(u: &CMatrix) -> Matrix3<f64> {
    let p = paulis();
    Matrix3::from_fn(|j, k| 0.5 * mat::inner(&p[j], &(u * &p[k] * u.adjoint())))
}

/// An SU(2) element inducing the rotation `r` on Bloch vectors.
pub fn unitary_of_rotation(r: &Matrix3<f64>) -> CMatrix {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let [x, y, z] = paulis();
    identity(2) * c(q.w, 0.0)
        - (x * c(q.i, 0.0) + y * c(q.j, 0.0) + z * c(q.k, 0.0)) * c(0.0, 1.0)
}

/// Affine representation `(T, t)` of a qubit map: `C((I + r.sigma)/2) = (I + (t + T r).sigma)/2`.
pub fn affine_of_choi(ch: &ChoiMatrix) -> Result<(Matrix3<f64>, Bloch)> {
    if ch.dim() != 2 {
        return Err(Error::Dimension("affine form needs a qubit channel".into()));
    }
    let p = paulis();
    let out_i = apply_matrix(ch, &identity(2))?;
    let t = Bloch::from_fn(|j, _| 0.5 * mat::inner(&p[j], &out_i));
    let mut tm = Matrix3::zeros();
    for k in 0..3 {
        let out = apply_matrix(ch, &p[k])?;
        for j in 0..3 {
            tm[(j, k)] = 0.5 * mat::inner(&p[j], &out);
        }
    }
    Ok((tm, t))
}

/// Canonical `(V, U, mu, s)` of a qubit CPTP map.
///
/// Signs: each left singular vector gets a positive first nonzero entry, then
/// improper factors are made proper by flipping their last column and the sign
/// of `mu_3`.
pub fn canonical_qubit(ch: &ChoiMatrix) -> Result<QubitChannelCanonical> {
    let rep = check_cptp(ch);
    if ch.dim() != 2 || !rep.cp || !rep.tp {
        return Err(Error::InvalidChannel(format!(
            "canonical form needs a CPTP qubit channel (min eig {:.3e}, TP residual {:.3e})",
            rep.min_eig, rep.tp_residual
        )));
    }
    let (tm, t) = affine_of_choi(ch)?;
    let svd = tm.svd(true, true);
    let (lu, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut left = Matrix3::from_fn(|i, j| lu[(i, order[j])]);
    let mut right = Matrix3::from_fn(|i, j| vt[(order[j], i)]);
    let mut mu = [0.0; 3];
    for j in 0..3 {
        mu[j] = svd.singular_values[order[j]];
        let lead = (0..3).map(|i| left[(i, j)]).find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        if lead < 0.0 {
            for i in 0..3 {
                left[(i, j)] = -left[(i, j)];
                right[(i, j)] = -right[(i, j)];
            }
        }
    }
    if left.determinant() < 0.0 {
        for i in 0..3 {
            left[(i, 2)] = -left[(i, 2)];
        }
        mu[2] = -mu[2];
    }
    if right.determinant() < 0.0 {
        for i in 0..3 {
            right[(i, 2)] = -right[(i, 2)];
        }
        mu[2] = -mu[2];
    }
    let s = left.transpose() * t;
    Ok(QubitChannelCanonical {
        v: unitary_of_rotation(&right.transpose()),
        u: unitary_of_rotation(&left),
        mu,
        s: [s[0], s[1], s[2]],
    })
}

/// Choi matrix of the diagonal map `D` with scalings `mu` and translation `s`.
pub fn diagonal_choi(mu: [f64; 3], s: [f64; 3]) -> CMatrix {
    let [x, y, z] = paulis();
    let i2 = identity(2);
    let shift = &x * c(s[0], 0.0) + &y * c(s[1], 0.0) + &z * c(s[2], 0.0);
    (identity(4) + kron(&i2, &shift) + kron(&x, &x) * c(mu[0], 0.0) - kron(&y, &y) * c(mu[1], 0.0)
        + kron(&z, &z) * c(mu[2], 0.0))
        * c(0.5, 0.0)
}

/// Choi matrix `(V^T ⊗ U) D (V^T ⊗ U)^dagger` of a canonical qubit map.
pub fn assemble_qubit_choi(q: &QubitChannelCanonical) -> Result<ChoiMatrix> {
    let rsw = check_rsw(q.mu, q.s);
    if !rsw.feasible {
        return Err(Error::InvalidChannel(format!(
            "parameters mu={:?}, s={:?} violate the CPTP inequalities",
            q.mu, q.s
        )));
    }
    let w = kron(&q.v.transpose(), &q.u);
    ChoiMatrix::from_matrix_lossy(&w * diagonal_choi(q.mu, q.s) * w.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RswReport {
    pub feasible: bool,
    pub extremal: bool,
}

/// Feasibility of `(mu, s)` as a CPTP diagonal map and extremality.
///
/// Extremality is checked with the translation axis taken as each of the three
/// coordinate axes in turn, so constant-output maps along any axis qualify.
pub fn check_rsw(mu: [f64; 3], s: [f64; 3]) -> RswReport {
    let [m1, m2, m3] = mu;
    let [s1, s2, s3] = s;
    let perp = s1 * s1 + s2 * s2;
    let ratio = |num: f64, den: f64| -> f64 {
        if perp <= 0.0 {
            0.0
        } else if den <= 0.0 {
            if num <= 0.0 && den == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            perp * num / den
        }
    };
    let mut feasible = true;
    for sign in [1.0, -1.0] {
        let a = (1.0 + m3).powi(2) - s3 * s3 - ratio(1.0 + m3 + sign * s3, 1.0 - m3 + sign * s3);
        let b = (1.0 - m3).powi(2) - s3 * s3 - ratio(1.0 - m3 + sign * s3, 1.0 + m3 + sign * s3);
        feasible &= (m1 + m2).powi(2) <= a + RSW_SLACK;
        feasible &= (m1 - m2).powi(2) <= b + RSW_SLACK;
    }
    let lhs = (1.0 - (m1 * m1 + m2 * m2 + m3 * m3) - (s1 * s1 + s2 * s2 + s3 * s3)).powi(2);
    let rhs = 4.0
        * (m1 * m1 * (s1 * s1 + m2 * m2) + m2 * m2 * (s2 * s2 + m3 * m3)
            + m3 * m3 * (s3 * s3 + m1 * m1)
            - 2.0 * m1 * m2 * m3);
    feasible &= lhs + RSW_SLACK >= rhs;

    let extremal = feasible
        && (0..3).any(|k| {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            s[i].abs() <= EXTREMAL_TOL
                && s[j].abs() <= EXTREMAL_TOL
                && (mu[k] - mu[i] * mu[j]).abs() <= EXTREMAL_TOL
                && (s[k] * s[k] - (1.0 - mu[i] * mu[i]) * (1.0 - mu[j] * mu[j])).abs()
                    <= EXTREMAL_TOL
        });
    RswReport { feasible, extremal }
}

fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random state: Haar-random pure vector, or uniform-simplex spectrum conjugated
/// by a Haar unitary.
pub fn random_state<R: Rng + ?Sized>(d: usize, pure: bool, rng: &mut R) -> DensityMatrix {
    let u = random_unitary(d, rng);
    if pure {
        let psi = u.column(0).into_owned();
        return DensityMatrix::from_matrix_unchecked(&psi * psi.adjoint());
    }
    let w: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let lambda = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        w.iter().map(|x| c(x / total, 0.0)),
    ));
    DensityMatrix::from_matrix_unchecked(&u * lambda * u.adjoint())
}

/// Random state with a caller-chosen spectrum.
pub fn random_state_with_spectrum<R: Rng + ?Sized>(spectrum: &[f64], rng: &mut R) -> DensityMatrix {
    let d = spectrum.len();
    let u = random_unitary(d, rng);
    let lambda =
        CMatrix::from_diagonal(&CVector::from_iterator(d, spectrum.iter().map(|&x| c(x, 0.0))));
    DensityMatrix::from_matrix_unchecked(&u * lambda * u.adjoint())
}

/// Random CPTP map with `n_kraus` operators `K_i = G_i (G^dagger G)^{-1/2}`.
pub fn random_kraus<R: Rng + ?Sized>(d: usize, n_kraus: usize, rng: &mut R) -> KrausSet {
    let g = complex_gaussian(d * n_kraus, d, rng);
    let gram = g.adjoint() * &g;
    let inv_sqrt = mat::hermitian_fn(&gram, |x| 1.0 / x.sqrt());
    let ops = (0..n_kraus)
        .map(|i| g.view((i * d, 0), (d, d)).into_owned() * &inv_sqrt)
        .collect();
    KrausSet { ops }
}

pub fn random_cptp<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ChoiMatrix {
    choi_from_kraus(&random_kraus(d, d * d, rng)).expect("consistent Kraus set")
}

/// Random unital qubit channel: a mixture of unitary conjugations.
pub fn random_unital_qubit<R: Rng + ?Sized>(rng: &mut R) -> ChoiMatrix {
    let n = 4;
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let ops = w
        .iter()
        .map(|&p| random_unitary(2, rng) * c((p / total).sqrt(), 0.0))
        .collect();
    choi_from_kraus(&KrausSet { ops }).expect("consistent Kraus set")
}

/// Kraus set sending every input state to `target`.
pub fn single_state_converter(target: &DensityMatrix) -> KrausSet {
    let d = target.dim();
    let (vals, vecs) = eigh(target.matrix());
    let mut ops = Vec::new();
    for (j, &a) in vals.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        let e = vecs.column(j).into_owned() * c(a.sqrt(), 0.0);
        for k in 0..d {
            let mut op = CMatrix::zeros(d, d);
            op.set_column(k, &e);
            ops.push(op);
        }
    }
    KrausSet { ops }
}

/// Phase flip with probability `p`: `rho -> p Z rho Z + (1-p) rho`.
pub fn dephasing(p: f64) -> ChoiMatrix {
    let ops = vec![identity(2) * c((1.0 - p).sqrt(), 0.0), mat::pauli_z() * c(p.sqrt(), 0.0)];
    choi_from_kraus(&KrausSet { ops }).expect("consistent Kraus set")
}

/// Channel with constant output `I/d`.
pub fn completely_depolarizing(d: usize) -> ChoiMatrix {
    ChoiMatrix { d, m: identity(d * d) / c(d as f64, 0.0) }
}

/// Choi matrix of the transposition map.
pub fn transposition(d: usize) -> ChoiMatrix {
    let mut m = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for l in 0..d {
            m[(j * d + l, l * d + j)] = c(1.0, 0.0);
        }
    }
    ChoiMatrix { d, m }
}

pub fn unitary_channel(u: &CMatrix) -> ChoiMatrix {
    let v = mat::vec(u);
    ChoiMatrix { d: u.nrows(), m: &v * v.adjoint() }
}
