use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, c, CMatrix, MatrixJson};

type RMatrix = DMatrix<f64>;
type RVector = DVector<f64>;

/// Values beyond this magnitude are taken as evidence of infeasibility.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// `min tr(E0 Z)` subject to `tr(E_i Z) = b_i`, `Z >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpStandard {
    pub e0: CMatrix,
    pub constraints: Vec<(CMatrix, f64)>,
}

/// `min c^T x` subject to `F0 + sum_j x_j F_j >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpInequality {
    pub c: Vec<f64>,
    pub f0: CMatrix,
    pub fs: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SdpProblem {
    Standard(SdpStandard),
    Inequality(SdpInequality),
}

impl SdpStandard {
    pub fn new(e0: CMatrix, constraints: Vec<(CMatrix, f64)>) -> Result<Self> {
        let p = SdpStandard { e0, constraints };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.e0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.e0.nrows();
        check_matrix(&self.e0, n, "E0")?;
        for (i, (e, b)) in self.constraints.iter().enumerate() {
            check_matrix(e, n, &format!("E_{}", i + 1))?;
            if !b.is_finite() {
                return Err(Error::Invalid(format!("b_{} is not finite", i + 1)));
            }
        }
        Ok(())
    }

    /// Value `tr(E0 Z)`.
    pub fn objective(&self, z: &CMatrix) -> f64 {
        mat::inner(&self.e0, z)
    }

    /// Largest `|tr(E_i Z) - b_i|`.
    pub fn residual(&self, z: &CMatrix) -> f64 {
        self.constraints.iter().map(|(e, b)| (mat::inner(e, z) - b).abs()).fold(0.0, f64::max)
    }

    /// `E0 - sum_i nu_i E_i`.
    pub fn dual_slack(&self, nu: &[f64]) -> CMatrix {
        let mut s = self.e0.clone();
        for ((e, _), &v) in self.constraints.iter().zip(nu) {
            s -= e * c(v, 0.0);
        }
        s
    }
}

impl SdpInequality {
    pub fn new(c: Vec<f64>, f0: CMatrix, fs: Vec<CMatrix>) -> Result<Self> {
        let p = SdpInequality { c, f0, fs };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.f0.nrows()
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f0.nrows();
        check_matrix(&self.f0, n, "F0")?;
        if self.c.len() != self.fs.len() {
            return Err(Error::Dimension(format!("{} costs for {} matrices", self.c.len(), self.fs.len())));
        }
        for (j, f) in self.fs.iter().enumerate() {
            check_matrix(f, n, &format!("F_{}", j + 1))?;
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("cost vector has non-finite entries".into()));
        }
        Ok(())
    }

    /// `F0 + sum_j x_j F_j`.
    pub fn slack(&self, x: &[f64]) -> CMatrix {
        let mut s = self.f0.clone();
        for (f, &v) in self.fs.iter().zip(x) {
            s += f * c(v, 0.0);
        }
        s
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// The Lagrange dual written as a standard-form problem: `min tr(F0 Z)` s.t. `tr(F_j Z) = c_j`.
    /// Its multipliers are `nu = -x`.
    pub fn dual_standard(&self) -> SdpStandard {
        SdpStandard { e0: self.f0.clone(), constraints: self.fs.iter().cloned().zip(self.c.iter().copied()).collect() }
    }
}

fn check_matrix(m: &CMatrix, n: usize, name: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::Dimension(format!("{name} has shape {:?}, expected {n}x{n}", m.shape())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid(format!("{name} has non-finite entries")));
    }
    let dev = mat::hermitian_deviation(m);
    if dev > mat::HERMITIAN_TOL * (1.0 + mat::max_abs(m)) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Lagrange dual of a standard-form problem: `min -b^T nu` s.t. `E0 - sum nu_i E_i >= 0`.
pub fn dualize(p: &SdpStandard) -> SdpInequality {
    SdpInequality {
        c: p.constraints.iter().map(|(_, b)| -b).collect(),
        f0: p.e0.clone(),
        fs: p.constraints.iter().map(|(e, _)| -e).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Relative primal and dual feasibility tolerance.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { gap_tol: 1e-9, feas_tol: 1e-9, max_iter: 200, step_fraction: 0.98 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    InfeasibleDetected,
}

/// Result of `solve`. Field meaning depends on the form that was solved:
/// standard form: `matrix` is `Z`, `vector` is `nu`, `slack` is `E0 - sum nu_i E_i`,
/// `primal_value` is `tr(E0 Z)`, `dual_value` is `b^T nu`;
/// inequality form: `vector` is `x`, `matrix` is the dual `Z`, `slack` is `F0 + sum x_j F_j`,
/// `primal_value` is `c^T x`, `dual_value` is `-tr(F0 Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub matrix: CMatrix,
    pub vector: Vec<f64>,
    pub slack: CMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `primal_value - dual_value`; nonnegative at feasible points.
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Error unless the status is optimal.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            s => Err(Error::Solver(format!(
                "solver stopped with status {s:?} after {} iterations (gap {:.3e})",
                self.iterations, self.gap
            ))),
        }
    }
}

pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    match p {
        SdpProblem::Standard(s) => solve_standard(s, opts),
        SdpProblem::Inequality(q) => solve_inequality(q, opts),
    }
}

pub fn solve_standard(p: &SdpStandard, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let lifted = Lifted::new(&p.e0, p.constraints.iter().map(|(e, _)| e));
    let b = RVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|(_, b)| *b));
    let r = solve_real(&lifted.c, &lifted.a, &b, opts)?;
    let z = lifted.unlift(&r.x);
    let slack = p.dual_slack(r.y.as_slice());
    Ok(SdpSolution {
        status: r.status,
        primal_value: r.pobj,
        dual_value: r.dobj,
        gap: r.pobj - r.dobj,
        primal_infeasibility: r.pinf,
        dual_infeasibility: r.dinf,
        iterations: r.iterations,
        matrix: z,
        vector: r.y.iter().copied().collect(),
        slack,
    })
}

pub fn solve_inequality(p: &SdpInequality, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let n = p.dim();
    if p.fs.is_empty() {
        let feasible = mat::min_eig(&p.f0) >= -opts.feas_tol;
        return Ok(SdpSolution {
            status: if feasible { SdpStatus::Optimal } else { SdpStatus::InfeasibleDetected },
            matrix: CMatrix::zeros(n, n),
            vector: Vec::new(),
            slack: p.f0.clone(),
            primal_value: if feasible { 0.0 } else { f64::INFINITY },
            dual_value: 0.0,
            gap: 0.0,
            primal_infeasibility: 0.0,
            dual_infeasibility: 0.0,
            iterations: 0,
        });
    }
    // Generic dual form with C = F0, A_j = -F_j, b = -c and y = x.
    let negated: Vec<CMatrix> = p.fs.iter().map(|f| -f).collect();
    let lifted = Lifted::new(&p.f0, negated.iter());
    let b = RVector::from_iterator(p.c.len(), p.c.iter().map(|v| -v));
    let r = solve_real(&lifted.c, &lifted.a, &b, opts)?;
    let z = lifted.unlift(&r.x);
    let x: Vec<f64> = r.y.iter().copied().collect();
    Ok(SdpSolution {
        status: r.status,
        primal_value: -r.dobj,
        dual_value: -r.pobj,
        gap: r.pobj - r.dobj,
        primal_infeasibility: r.dinf,
        dual_infeasibility: r.pinf,
        iterations: r.iterations,
        slack: p.slack(&x),
        matrix: z,
        vector: x,
    })
}

/// Real symmetric form of Hermitian data. Complex data use `A -> [[Re, -Im], [Im, Re]] / 2`,
/// so that `<A_r, lift(X)> = Re tr(A X)`; real data are used as they are.
struct Lifted {
    complex: bool,
    c: RMatrix,
    a: Vec<RMatrix>,
}

impl Lifted {
    fn new<'a>(c0: &CMatrix, a: impl Iterator<Item = &'a CMatrix>) -> Self {
        let a: Vec<&CMatrix> = a.collect();
        let complex = std::iter::once(c0).chain(a.iter().copied()).any(|m| m.iter().any(|z| z.im != 0.0));
        let lift = |m: &CMatrix| -> RMatrix {
            let h = mat::hermitize(m);
            if !complex {
                return h.map(|z| z.re);
            }
            let n = h.nrows();
            let mut r = RMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    let z = h[(i, j)] * 0.5;
                    r[(i, j)] = z.re;
                    r[(i + n, j + n)] = z.re;
                    r[(i, j + n)] = -z.im;
                    r[(i + n, j)] = z.im;
                }
            }
            r
        };
        Lifted { complex, c: lift(c0), a: a.into_iter().map(lift).collect() }
    }

    fn unlift(&self, x: &RMatrix) -> CMatrix {
        if !self.complex {
            return x.map(|v| c(v, 0.0));
        }
        let n = x.nrows() / 2;
        CMatrix::from_fn(n, n, |i, j| {
            c(0.5 * (x[(i, j)] + x[(i + n, j + n)]), 0.5 * (x[(i + n, j)] - x[(i, j + n)]))
        })
    }
}

struct RealResult {
    status: SdpStatus,
    x: RMatrix,
    y: RVector,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    iterations: usize,
}

fn dot(a: &RMatrix, b: &RMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

fn breakdown(what: &str, iter: usize) -> Error {
    Error::Solver(format!("numerical breakdown at iteration {iter}: {what}"))
}

/// Cholesky factor of `m`, retried with a growing diagonal shift when `m` is
/// numerically semidefinite near the optimum.
fn regularized_cholesky(m: RMatrix) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(ch) = m.clone().cholesky() {
        return Some(ch);
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let mut shift = 1e-14 * scale;
    while shift <= 1e-8 * scale {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += shift;
        }
        if let Some(ch) = r.cholesky() {
            return Some(ch);
        }
        shift *= 10.0;
    }
    None
}

/// Shrink `alpha` until `m + alpha d` has a Cholesky factor; guards against rounding
/// when the iterate is nearly singular.
fn definite_step(m: &RMatrix, d: &RMatrix, alpha: f64) -> f64 {
    let mut a = alpha;
    for _ in 0..40 {
        if sym(&(m + d * a)).cholesky().is_some() {
            return a;
        }
        a *= 0.5;
    }
    0.0
}

/// Largest `alpha <= 1` keeping `diag(lam) + alpha d` positive semidefinite, scaled by `frac`.
fn step_length(lam: &RVector, d: &RMatrix, frac: f64) -> f64 {
    let n = lam.len();
    let scaled = RMatrix::from_fn(n, n, |i, j| -d[(i, j)] / (lam[i] * lam[j]).sqrt());
    let top = sym(&scaled).symmetric_eigenvalues().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if top <= 0.0 {
        1.0
    } else {
        (frac / top).min(1.0)
    }
}

/// Primal-dual path following with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps for
/// `min <C, X>` s.t. `<A_i, X> = b_i`, `X >= 0`, and its dual
/// `max b^T y` s.t. `sum y_i A_i + S = C`, `S >= 0`.
fn solve_real(cm: &RMatrix, a: &[RMatrix], b: &RVector, opts: &SdpOptions) -> Result<RealResult> {
    let n = cm.nrows();
    let m = a.len();
    let nf = n as f64;
    let norm_c = cm.norm();
    let norm_b = b.norm();

    // Scaled-identity start.
    let mut xi = 10f64.max(nf.sqrt());
    let mut eta = 10f64.max(nf.sqrt()).max(norm_c);
    for (ai, bi) in a.iter().zip(b.iter()) {
        let na = ai.norm();
        xi = xi.max(nf * (1.0 + bi.abs()) / (1.0 + na));
        eta = eta.max(na);
    }
    let eta = eta.max((1.0 + norm_c) / nf.sqrt());
    let mut x = RMatrix::identity(n, n) * xi;
    let mut s = RMatrix::identity(n, n) * eta;
    let mut y = RVector::zeros(m);

    let a_of = |x: &RMatrix| RVector::from_iterator(m, a.iter().map(|ai| dot(ai, x)));
    let at_of = |y: &RVector| {
        let mut out = RMatrix::zeros(n, n);
        for (ai, yi) in a.iter().zip(y.iter()) {
            out += ai * *yi;
        }
        out
    };

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let (mut pobj, mut dobj, mut pinf, mut dinf);
    loop {
        let rp = b - a_of(&x);
        let rd = cm - &s - at_of(&y);
        pobj = dot(cm, &x);
        dobj = b.dot(&y);
        pinf = rp.norm() / (1.0 + norm_b);
        dinf = rd.norm() / (1.0 + norm_c);
        let comp = dot(&x, &s);
        let rel_gap = comp.max((pobj - dobj).abs()) / (1.0 + 0.5 * (pobj.abs() + dobj.abs()));
        if rel_gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SdpStatus::Optimal;
            break;
        }
        if pobj.abs() > DIVERGENCE_LIMIT || dobj.abs() > DIVERGENCE_LIMIT {
            status = SdpStatus::InfeasibleDetected;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let lx = sym(&x).cholesky().ok_or_else(|| breakdown("primal iterate lost definiteness", iterations))?;
        let ls = sym(&s).cholesky().ok_or_else(|| breakdown("dual slack lost definiteness", iterations))?;
        let lx = lx.l();
        let ls = ls.l();
        let svd = (ls.transpose() * &lx).svd(true, true);
        let lam = svd.singular_values.clone();
        if lam.iter().any(|&v| !(v > 0.0)) {
            return Err(breakdown("degenerate scaling", iterations));
        }
        let v = svd.v_t.as_ref().expect("requested").transpose();
        let mut g = &lx * &v;
        for j in 0..n {
            let f = 1.0 / lam[j].sqrt();
            for i in 0..n {
                g[(i, j)] *= f;
            }
        }
        let gt = g.transpose();
        let at: Vec<RMatrix> = a.iter().map(|ai| sym(&(&gt * ai * &g))).collect();
        let rd_t = sym(&(&gt * &rd * &g));
        let mut schur = RMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&at[i], &at[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let chol = regularized_cholesky(schur.clone()).ok_or_else(|| breakdown("Schur complement not positive definite", iterations))?;
        let mu = comp / nf;

        // Solve for a right-hand side `rc` of the linearized complementarity condition.
        let direction = |rc: &RMatrix| -> (RMatrix, RVector, RMatrix) {
            let t = RMatrix::from_fn(n, n, |i, j| 2.0 * rc[(i, j)] / (lam[i] + lam[j]));
            let u = &t - &rd_t;
            let rhs = &rp - RVector::from_iterator(m, at.iter().map(|ai| dot(ai, &u)));
            let mut dy = chol.solve(&rhs);
            // Iterative refinement against the unregularized Schur matrix.
            for _ in 0..3 {
                let r = &rhs - &schur * &dy;
                if r.norm() <= 1e-15 * rhs.norm() {
                    break;
                }
                dy += chol.solve(&r);
            }
            let mut ds = rd_t.clone();
            for (ai, v) in at.iter().zip(dy.iter()) {
                ds -= ai * *v;
            }
            let dx = &t - &ds;
            (dx, dy, ds)
        };

        let lam_sq = RMatrix::from_diagonal(&lam.map(|v| v * v));
        let (dx_a, _, ds_a) = direction(&(-&lam_sq));
        let ap = step_length(&lam, &dx_a, 1.0);
        let ad = step_length(&lam, &ds_a, 1.0);
        let lam_m = RMatrix::from_diagonal(&lam);
        let gap_aff = dot(&(&lam_m + &dx_a * ap), &(&lam_m + &ds_a * ad));
        let sigma = (gap_aff / comp).clamp(0.0, 1.0).powi(3);
        let cross = sym(&(&dx_a * &ds_a));
        let rc = RMatrix::identity(n, n) * (sigma * mu) - &lam_sq - cross;
        let (dx_t, dy, ds_t) = direction(&rc);
        let ap = step_length(&lam, &dx_t, opts.step_fraction);
        let ad = step_length(&lam, &ds_t, opts.step_fraction);

        let dx = sym(&(&g * &dx_t * &gt));
        // The dual step is recovered in unscaled form from the dual residual equation.
        let ds = sym(&(&rd - at_of(&dy)));
        let ap = definite_step(&x, &dx, ap);
        let ad = definite_step(&s, &ds, ad);
        x = sym(&(&x + dx * ap));
        y += dy * ad;
        s = sym(&(&s + ds * ad));
        if x.iter().chain(s.iter()).any(|v| !v.is_finite()) {
            return Err(breakdown("non-finite iterate", iterations));
        }
    }
    Ok(RealResult { status, x, y, pobj, dobj, pinf, dinf, iterations })
}

/// Tolerances for the four certificate checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateTolerances {
    /// Equality residuals and negative eigenvalues of `Z` and of the dual slack.
    pub feasibility: f64,
    /// `|primal - dual|`.
    pub gap: f64,
    /// Largest entry of `(E0 - sum nu_i E_i) Z`.
    pub complementarity: f64,
}

impl CertificateTolerances {
    pub fn uniform(tol: f64) -> Self {
        CertificateTolerances { feasibility: tol, gap: tol, complementarity: tol }
    }
}

impl Default for CertificateTolerances {
    fn default() -> Self {
        CertificateTolerances { feasibility: 1e-9, gap: 1e-9, complementarity: 1e-8 }
    }
}

/// Outcome of checking a primal-dual pair of a standard-form problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub primal_residual: f64,
    pub primal_min_eig: f64,
    pub dual_min_eig: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Largest entry of `S Z`.
    pub complementarity: f64,
    /// `tr(S Z)`.
    pub complementarity_trace: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub gap_closed: bool,
    pub complementary: bool,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.primal_feasible && self.dual_feasible && self.gap_closed && self.complementary
    }
}

/// Check primal feasibility, dual feasibility, the duality gap and complementary slackness.
pub fn verify_certificate(
    z: &CMatrix,
    nu: &[f64],
    p: &SdpStandard,
    tol: &CertificateTolerances,
) -> Result<CertificateReport> {
    p.validate()?;
    if z.shape() != p.e0.shape() || nu.len() != p.constraints.len() {
        return Err(Error::Dimension("certificate does not match the problem".into()));
    }
    let slack = p.dual_slack(nu);
    let primal_residual = p.residual(z);
    let primal_min_eig = mat::min_eig(z);
    let dual_min_eig = mat::min_eig(&slack);
    let primal_value = p.objective(z);
    let dual_value: f64 = p.constraints.iter().zip(nu).map(|((_, b), v)| b * v).sum();
    let gap = primal_value - dual_value;
    let product = &slack * z;
    let complementarity = mat::max_abs(&product);
    let complementarity_trace = product.trace().re;
    Ok(CertificateReport {
        primal_residual,
        primal_min_eig,
        dual_min_eig,
        primal_value,
        dual_value,
        gap,
        complementarity,
        complementarity_trace,
        primal_feasible: primal_residual <= tol.feasibility && primal_min_eig >= -tol.feasibility,
        dual_feasible: dual_min_eig >= -tol.feasibility,
        gap_closed: gap.abs() <= tol.gap,
        complementary: complementarity <= tol.complementarity,
    })
}

/// JSON dump of a problem for external cross-checking.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SdpProblemJson {
    Standard { e0: MatrixJson, e: Vec<MatrixJson>, b: Vec<f64> },
    Inequality { c: Vec<f64>, f0: MatrixJson, f: Vec<MatrixJson> },
}

impl SdpProblemJson {
    pub fn from_problem(p: &SdpProblem) -> Self {
        match p {
            SdpProblem::Standard(s) => SdpProblemJson::Standard {
                e0: MatrixJson::from_matrix(&s.e0),
                e: s.constraints.iter().map(|(e, _)| MatrixJson::from_matrix(e)).collect(),
                b: s.constraints.iter().map(|(_, b)| *b).collect(),
            },
            SdpProblem::Inequality(q) => SdpProblemJson::Inequality {
                c: q.c.clone(),
                f0: MatrixJson::from_matrix(&q.f0),
                f: q.fs.iter().map(MatrixJson::from_matrix).collect(),
            },
        }
    }

    pub fn to_problem(&self) -> Result<SdpProblem> {
        match self {
            SdpProblemJson::Standard { e0, e, b } => {
                if e.len() != b.len() {
                    return Err(Error::Dimension(format!("{} constraint matrices for {} values", e.len(), b.len())));
                }
                let cons = e.iter().zip(b).map(|(m, v)| Ok((m.to_matrix()?, *v))).collect::<Result<Vec<_>>>()?;
                Ok(SdpProblem::Standard(SdpStandard::new(e0.to_matrix()?, cons)?))
            }
            SdpProblemJson::Inequality { c, f0, f } => {
                let fs = f.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?;
                Ok(SdpProblem::Inequality(SdpInequality::new(c.clone(), f0.to_matrix()?, fs)?))
            }
        }
    }
}
