//! Closed-form optimal tracker for a pair of qubit states under the
//! priority-weighted Hilbert-Schmidt overlap.
//!
//! Sources enter through their Bloch vectors `R_i`. Targets enter already
//! weighted: `Rb_i` is the Bloch vector of `pi_i * target_i` and `c_i` its trace,
//! so unnormalized targets are covered by the same formulas. The optimum is
//! `(c + Gamma) / 2`, attained by a unitary when the indicator is non-positive
//! and by a measurement with feedback otherwise.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::channels::{
    assemble_qubit_choi, bloch_matrix, bloch_of, diagonal_choi, rotation_of_unitary, unitary_of_rotation,
    Bloch, ChoiMatrix, DensityMatrix, KrausSet, QubitChannelCanonical,
};
use crate::error::{Error, Result};
use crate::mat::{self, c, identity, kron, pauli_x, pauli_y, pauli_z, CMatrix};

/// Minimum separation of the source Bloch vectors.
pub const COINCIDENT_TOL: f64 = 1e-12;
/// Indicator values with magnitude at most this are treated as zero.
pub const OMEGA_TIE_TOL: f64 = 1e-12;
/// Floor on `S + T` below which the measurement branch is not used.
pub const DEGENERATE_FLOOR: f64 = 1e-12;
/// Targets with cross product at most this are treated as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;
/// Slack allowed on Bloch lengths and target positivity.
pub const GEOMETRY_SLACK: f64 = 1e-10;

/// Source and weighted-target Bloch data for a two-state qubit tracking task.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    sources: [Bloch; 2],
    targets: [Bloch; 2],
    weights: [f64; 2],
}

impl PairGeometry {
    /// Raw constructor: source Bloch vectors, weighted target Bloch vectors and target traces.
    pub fn new(sources: [Bloch; 2], targets: [Bloch; 2], weights: [f64; 2]) -> Result<Self> {
        for (i, r) in sources.iter().enumerate() {
            if !r.iter().all(|v| v.is_finite()) || r.norm() > 1.0 + GEOMETRY_SLACK {
                return Err(Error::InvalidState(format!("source {} has Bloch length {}", i + 1, r.norm())));
            }
        }
        for i in 0..2 {
            let (t, w) = (&targets[i], weights[i]);
            if !w.is_finite() || !t.iter().all(|v| v.is_finite()) || w < 0.0 {
                return Err(Error::Invalid(format!("target {} has invalid weight {}", i + 1, w)));
            }
            if t.norm() > w + GEOMETRY_SLACK {
                return Err(Error::InvalidState(format!(
                    "weighted target {} is not positive (Bloch length {} exceeds trace {})",
                    i + 1,
                    t.norm(),
                    w
                )));
            }
        }
        if (sources[0] - sources[1]).norm() <= COINCIDENT_TOL {
            return Err(Error::Degenerate("source states coincide".into()));
        }
        if targets[0].norm() <= COLLINEAR_TOL && targets[1].norm() <= COLLINEAR_TOL {
            return Err(Error::Degenerate("both targets are proportional to the identity".into()));
        }
        Ok(PairGeometry { sources, targets, weights })
    }

    /// Source and normalized target Bloch vectors with priorities.
    pub fn from_blochs(sources: [Bloch; 2], targets: [Bloch; 2], priorities: [f64; 2]) -> Result<Self> {
        Self::new(sources, [targets[0] * priorities[0], targets[1] * priorities[1]], priorities)
    }

    /// Normalized qubit states with priorities; the targets are weighted by the priorities.
    pub fn from_states(sources: [&DensityMatrix; 2], targets: [&DensityMatrix; 2], priorities: [f64; 2]) -> Result<Self> {
        for p in priorities {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Invalid(format!("priority {p} must be positive")));
            }
        }
        let (src, tgt) = (qubit_bloch(sources)?, qubit_bloch(targets)?);
        PairGeometry::new(src, [tgt[0] * priorities[0], tgt[1] * priorities[1]], priorities)
    }

    /// Normalized sources and arbitrary positive semidefinite 2x2 targets.
    pub fn from_weighted(sources: [&DensityMatrix; 2], targets: [&CMatrix; 2]) -> Result<Self> {
        let src = qubit_bloch(sources)?;
        let mut tgt = [Bloch::zeros(); 2];
        let mut w = [0.0; 2];
        for i in 0..2 {
            if targets[i].shape() != (2, 2) {
                return Err(Error::Dimension("weighted targets must be 2x2".into()));
            }
            let h = mat::hermitize_checked(targets[i])?;
            tgt[i] = bloch_of(&h);
            w[i] = mat::trace(&h).re;
        }
        PairGeometry::new(src, tgt, w)
    }

    pub fn sources(&self) -> &[Bloch; 2] {
        &self.sources
    }

    pub fn targets(&self) -> &[Bloch; 2] {
        &self.targets
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    /// Weighted target matrices `(c_i I + Rb_i . sigma) / 2`.
    pub fn target_matrices(&self) -> [CMatrix; 2] {
        [bloch_matrix(self.weights[0], &self.targets[0]), bloch_matrix(self.weights[1], &self.targets[1])]
    }

    pub fn c(&self) -> f64 {
        self.weights[0] + self.weights[1]
    }

    pub fn r_minus_vec(&self) -> Bloch {
        self.sources[0] - self.sources[1]
    }

    pub fn r_minus(&self) -> f64 {
        self.r_minus_vec().norm()
    }

    pub fn r_cross(&self) -> f64 {
        self.sources[0].cross(&self.sources[1]).norm()
    }

    pub fn rb_plus_vec(&self) -> Bloch {
        self.targets[0] + self.targets[1]
    }

    pub fn rb_plus_sq(&self) -> f64 {
        self.rb_plus_vec().norm_squared()
    }

    pub fn rb_cross(&self) -> f64 {
        self.targets[0].cross(&self.targets[1]).norm()
    }

    pub fn t(&self) -> f64 {
        let mut t = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                t += (1.0 - self.sources[i].dot(&self.sources[j])) * self.targets[i].dot(&self.targets[j]);
            }
        }
        t
    }

    pub fn s(&self) -> f64 {
        let (t, rm, rx, rbx) = (self.t(), self.r_minus(), self.r_cross(), self.rb_cross());
        (t * t + 4.0 * rbx * rbx * (rm * rm - rx * rx)).max(0.0).sqrt()
    }

    /// Indicator `S + T - 2 Rb_x R_x`; positive values call for the measurement branch.
    pub fn omega(&self) -> f64 {
        self.s() + self.t() - 2.0 * self.rb_cross() * self.r_cross()
    }

    /// `sum_i (R_i . R_-)(Rb_i . Rb_+)`.
    pub fn xi_big(&self) -> f64 {
        let (rm, rbp) = (self.r_minus_vec(), self.rb_plus_vec());
        (0..2).map(|i| self.sources[i].dot(&rm) * self.targets[i].dot(&rbp)).sum()
    }

    /// `R_x Rb_+^2 + Rb_x R_-^2`.
    pub fn xi_small(&self) -> f64 {
        self.r_cross() * self.rb_plus_sq() + self.rb_cross() * self.r_minus().powi(2)
    }

    /// Overlap gain of the measurement branch, when it is well defined.
    pub fn gamma_a(&self) -> Option<f64> {
        let st = self.s() + self.t();
        (st > DEGENERATE_FLOOR)
            .then(|| (self.rb_plus_sq() + 2.0 * (self.r_minus() * self.rb_cross()).powi(2) / st).sqrt())
    }

    /// Overlap gain of the unitary branch.
    pub fn gamma_b(&self) -> f64 {
        (self.rb_plus_sq() - self.t() + 2.0 * self.r_cross() * self.rb_cross()).max(0.0).sqrt()
    }

    /// Objective `sum_i tr[C(rho_i) w_i]` achieved by a qubit channel.
    pub fn achieved(&self, ch: &ChoiMatrix) -> Result<f64> {
        let (t, s) = crate::channels::affine_of_choi(ch)?;
        Ok((0..2).map(|i| 0.5 * (self.weights[i] + (s + t * self.sources[i]).dot(&self.targets[i]))).sum())
    }
}

fn qubit_bloch(states: [&DensityMatrix; 2]) -> Result<[Bloch; 2]> {
    match (states[0].bloch(), states[1].bloch()) {
        (Some(a), Some(b)) => Ok([a, b]),
        _ => Err(Error::Dimension("closed-form tracking needs qubit states".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Procedure {
    /// Measurement with feedback (non-unitary extremal channel).
    A,
    /// Single unitary.
    B,
}

impl std::fmt::Display for Procedure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Procedure::A => "A",
            Procedure::B => "B",
        })
    }
}

/// Indicator value and the procedure it selects; ties go to the unitary branch.
pub fn indicator(g: &PairGeometry) -> f64 {
    g.omega()
}

pub fn select_procedure(g: &PairGeometry) -> Procedure {
    if g.omega() > OMEGA_TIE_TOL && g.s() + g.t() > DEGENERATE_FLOOR {
        Procedure::A
    } else {
        Procedure::B
    }
}

/// Channel built by one of the two procedures together with its intermediate coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub procedure: Procedure,
    pub canonical: QubitChannelCanonical,
    /// x-component shared by both rotated sources after `D`.
    pub alpha: f64,
    /// z-components of the rotated sources after `D`, divided by `Rb_x`; absent for collinear targets.
    pub beta: Option<[f64; 2]>,
    /// Overlap gain: the optimum is `(c + gamma) / 2`.
    pub gamma: f64,
    /// Expansion coefficients of the output images in the target basis; absent for collinear targets.
    pub k: Option<[[f64; 2]; 2]>,
    /// Rotation angle of the unitary branch for anti-parallel targets.
    pub vartheta: Option<f64>,
}

impl Construction {
    pub fn fidelity(&self, g: &PairGeometry) -> f64 {
        0.5 * (g.c() + self.gamma)
    }
}

/// Rotation taking `R_i` to `(R_x / R_-, 0, R_i . R_- / R_-)`.
fn source_frame(g: &PairGeometry) -> Matrix3<f64> {
    let v3 = g.r_minus_vec() / g.r_minus();
    let w = g.sources[0] - v3 * g.sources[0].dot(&v3);
    let v1 = if w.norm() > COLLINEAR_TOL { w / w.norm() } else { any_orthogonal(&v3) };
    let v2 = v3.cross(&v1);
    Matrix3::from_rows(&[v1.transpose(), v2.transpose(), v3.transpose()])
}

fn any_orthogonal(v: &Vector3<f64>) -> Vector3<f64> {
    let axis = (0..3).min_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
    let e = Vector3::ith(axis, 1.0);
    let w = e - v * v.dot(&e);
    w / w.norm()
}

/// Proper rotation maximizing `sum_k b_k . (R a_k)`; for rank-one data the
/// smallest rotation aligning the two directions is returned.
pub fn best_rotation(pairs: &[(Vector3<f64>, Vector3<f64>)]) -> Matrix3<f64> {
    let h: Matrix3<f64> = pairs.iter().map(|(a, b)| a * b.transpose()).sum();
    let svd = h.svd(true, true);
    let (p, qt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let scale = sv[0].max(1.0);
    if sv[0] <= COLLINEAR_TOL * scale {
        return Matrix3::identity();
    }
    let col_p = p.column(order[0]).into_owned();
    let col_q = qt.row(order[0]).transpose();
    if sv[1] <= COLLINEAR_TOL * scale {
        return match Rotation3::rotation_between(&col_p, &col_q) {
            Some(r) => r.into_inner(),
            None => Rotation3::from_axis_angle(&Unit::new_normalize(any_orthogonal(&col_p.normalize())), std::f64::consts::PI)
                .into_inner(),
        };
    }
    let q = qt.transpose();
    let r = q * p.transpose();
    if r.determinant() >= 0.0 {
        return r;
    }
    let weakest = order[2];
    let mut flip = Matrix3::identity();
    flip[(weakest, weakest)] = -1.0;
    q * flip * p.transpose()
}

fn target_coefficients(g: &PairGeometry, alpha: f64, beta: [f64; 2]) -> ([[f64; 2]; 2], f64) {
    let rbx = g.rb_cross();
    let comb = g.targets[0] * beta[0] + g.targets[1] * beta[1];
    let gamma = (alpha * alpha * g.rb_plus_sq()
        + (comb.norm_squared() + 2.0 * alpha * (beta[0] - beta[1])) * rbx * rbx)
        .max(0.0)
        .sqrt();
    let mut k = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let cross = g.targets[1 - i].dot(&g.targets[1 - j]);
            k[i][j] = (alpha * alpha + beta[i] * beta[j] * rbx * rbx + sign * alpha * (beta[0] - beta[1]) * cross) / gamma;
        }
    }
    (k, gamma)
}

/// Measurement-with-feedback construction; requires a positive indicator.
pub fn procedure_a(g: &PairGeometry) -> Result<Construction> {
    if select_procedure(g) != Procedure::A {
        return Err(Error::Invalid(format!(
            "the measurement branch needs a positive indicator (got {:.3e})",
            g.omega()
        )));
    }
    let (s, t) = (g.s(), g.t());
    let st = s + t;
    let (rm, rx, rbx) = (g.r_minus(), g.r_cross(), g.rb_cross());
    let mu1 = 2.0 * (2.0 / (s * st.powi(3))).sqrt() * rbx * rbx * rx * rm;
    let mu2 = 2.0 * rbx * rx / st;
    let mu3 = (2.0 / (s * st)).sqrt() * rbx * rm;
    let s1 = (1.0 / (2.0 * s * st.powi(3))).sqrt() * (st * st - 4.0 * rbx * rbx * rx * rx);
    let alpha = (st / (2.0 * s)).sqrt();
    let rmv = g.r_minus_vec();
    let beta_raw = [g.sources[0].dot(&rmv), g.sources[1].dot(&rmv)].map(|p| (2.0 / (s * st)).sqrt() * p);
    let gamma = g.gamma_a().expect("measurement branch has S + T above the floor");

    let v = source_frame(g);
    let images: Vec<Vector3<f64>> = (0..2).map(|i| Vector3::new(alpha, 0.0, beta_raw[i] * rbx)).collect();
    let u = best_rotation(&[(images[0], g.targets[0]), (images[1], g.targets[1])]);
    let collinear = rbx <= COLLINEAR_TOL;
    let k = (!collinear).then(|| target_coefficients(g, alpha, beta_raw).0);
    Ok(Construction {
        procedure: Procedure::A,
        canonical: QubitChannelCanonical {
            v: unitary_of_rotation(&v),
            u: unitary_of_rotation(&u),
            mu: [mu1, mu2, mu3],
            s: [s1, 0.0, 0.0],
        },
        alpha,
        beta: (!collinear).then_some(beta_raw),
        gamma,
        k,
        vartheta: None,
    })
}

/// Unitary construction; requires a non-positive indicator (after the tie rule).
pub fn procedure_b(g: &PairGeometry) -> Result<Construction> {
    if select_procedure(g) != Procedure::B {
        return Err(Error::Invalid(format!(
            "the unitary branch needs a non-positive indicator (got {:.3e})",
            g.omega()
        )));
    }
    let (rm, rx, rbx) = (g.r_minus(), g.r_cross(), g.rb_cross());
    let rmv = g.r_minus_vec();
    let alpha = rx / rm;
    let v = source_frame(g);
    let overall = best_rotation(&[(g.sources[0], g.targets[0]), (g.sources[1], g.targets[1])]);
    let u = overall * v.transpose();
    let collinear = rbx <= COLLINEAR_TOL;
    let (beta, k, vartheta) = if collinear {
        let axis = if g.targets[0].norm() >= g.targets[1].norm() {
            g.targets[0].normalize()
        } else {
            -g.targets[1].normalize()
        };
        let (t1, t2) = (g.targets[0].dot(&axis), -g.targets[1].dot(&axis));
        let denom = rm * (g.rb_plus_sq() - g.t()).max(0.0).sqrt();
        let sin = if denom > 0.0 { (rx * (t1 - t2) / denom).clamp(-1.0, 1.0) } else { 0.0 };
        (None, None, Some(sin.asin()))
    } else {
        let beta = [g.sources[0].dot(&rmv), g.sources[1].dot(&rmv)].map(|p| p / (rbx * rm));
        (Some(beta), Some(target_coefficients(g, alpha, beta).0), None)
    };
    Ok(Construction {
        procedure: Procedure::B,
        canonical: QubitChannelCanonical {
            v: unitary_of_rotation(&v),
            u: unitary_of_rotation(&u),
            mu: [1.0; 3],
            s: [0.0; 3],
        },
        alpha,
        beta,
        gamma: g.gamma_b(),
        k,
        vartheta,
    })
}

/// Construction selected by the indicator.
pub fn construct(g: &PairGeometry) -> Result<Construction> {
    match select_procedure(g) {
        Procedure::A => procedure_a(g),
        Procedure::B => procedure_b(g),
    }
}

/// Optimal weighted overlap `(c + Gamma) / 2`.
pub fn optimal_fidelity(g: &PairGeometry) -> f64 {
    let gamma = match select_procedure(g) {
        Procedure::A => g.gamma_a().unwrap_or_else(|| g.gamma_b()),
        Procedure::B => g.gamma_b(),
    };
    0.5 * (g.c() + gamma)
}

/// Choi matrix of the optimal channel.
pub fn assemble_optimal_choi(g: &PairGeometry) -> Result<ChoiMatrix> {
    assemble_qubit_choi(&construct(g)?.canonical)
}

/// Dual point proving optimality of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub procedure: Procedure,
    /// Multipliers of `I ⊗ I`, `X ⊗ I`, `Y ⊗ I`, `Z ⊗ I`.
    pub x: [f64; 4],
    /// Slack matrix in the rotated frame; must be positive semidefinite.
    pub f: CMatrix,
    /// Eigenvalues of `f`, ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    /// Primal value of the rotated diagonal channel.
    pub primal: f64,
    /// `|2 x_0 - primal|`.
    pub duality_gap: f64,
    /// Spectral norm of `D F`.
    pub slackness: f64,
    /// Monic characteristic factor, highest degree first: the quadratic for
    /// the measurement branch, the cubic for the unitary branch.
    pub factor: Vec<f64>,
    /// Real roots of `factor`, ascending.
    pub factor_roots: Vec<f64>,
}

impl DualCertificate {
    /// Check positivity, duality gap and complementary slackness.
    pub fn verify(&self, psd_tol: f64, gap_tol: f64, slack_tol: f64) -> Result<()> {
        if self.lambda_min < -psd_tol || self.duality_gap > gap_tol || self.slackness > slack_tol {
            return Err(Error::Optimality(format!(
                "lambda_min {:.3e}, duality gap {:.3e}, slackness {:.3e}",
                self.lambda_min, self.duality_gap, self.slackness
            )));
        }
        Ok(())
    }
}

/// Dual certificate for the construction selected by the indicator.
pub fn dual_certificate(g: &PairGeometry) -> Result<DualCertificate> {
    let cons = construct(g)?;
    dual_certificate_for(g, &cons)
}

pub fn dual_certificate_for(g: &PairGeometry, cons: &Construction) -> Result<DualCertificate> {
    let (rm, rx, rbx) = (g.r_minus(), g.r_cross(), g.rb_cross());
    let cc = g.c();
    let gamma = cons.gamma;
    if gamma <= 0.0 {
        return Err(Error::Degenerate("overlap gain vanishes; the dual point is singular".into()));
    }
    let (xib, xis) = (g.xi_big(), g.xi_small());
    let weighted = g.sources[0] * g.weights[0] + g.sources[1] * g.weights[1];
    let x3 = (weighted.dot(&g.r_minus_vec()) + xib / gamma) / (4.0 * rm);
    let x0 = 0.25 * (cc + gamma);
    let x1 = match cons.procedure {
        Procedure::A => rx / (4.0 * rm) * (cc + gamma),
        Procedure::B => (cc * rx + xis / gamma) / (4.0 * rm),
    };

    let rv = rotation_of_unitary(&cons.canonical.v);
    let ru = rotation_of_unitary(&cons.canonical.u);
    let mut f0 = CMatrix::zeros(4, 4);
    for i in 0..2 {
        let src = bloch_matrix(1.0, &(rv * g.sources[i]));
        let tgt = bloch_matrix(g.weights[i], &(ru.transpose() * g.targets[i]));
        f0 -= kron(&src.transpose(), &tgt);
    }
    let i2 = identity(2);
    let f = mat::hermitize(
        &(&f0
            + identity(4) * c(x0, 0.0)
            + kron(&pauli_x(), &i2) * c(x1, 0.0)
            + kron(&pauli_z(), &i2) * c(x3, 0.0)),
    );
    let d = diagonal_choi(cons.canonical.mu, cons.canonical.s);
    let primal = -mat::inner(&f0, &d);
    let eigenvalues = mat::eigvalsh(&f);
    let slackness = (&d * &f).singular_values().max();

    let (factor, factor_roots) = match cons.procedure {
        Procedure::A => {
            let (s, t) = (g.s(), g.t());
            let st = s + t;
            let upsilon = (4.0 * rm * rm * rbx * rbx + st * st) / (8.0 * rm * rm * gamma * gamma * s * st);
            let q = upsilon * ((rm * rm - rx * rx) * gamma.powi(4) - xib * xib);
            let disc = (gamma * gamma - 4.0 * q).max(0.0).sqrt();
            (vec![1.0, -gamma, q], vec![0.5 * (gamma - disc), 0.5 * (gamma + disc)])
        }
        Procedure::B => {
            let (rm2, g2) = (rm * rm, gamma * gamma);
            let big = xis * xis + xib * xib;
            let varpi = ((1.0 + rx * xis / (rm2 * g2)) * rm2 * rm2 * g2 * g2 - (rm2 + rx * rx) * big) / (4.0 * rm2 * rm2 * g2);
            let omega = -(rx * g2 - xis) * (rm2 * g2 * xis - rx * big) / (8.0 * rm2 * rm2 * gamma.powi(3));
            (vec![1.0, -gamma, varpi, omega], cubic_real_roots(-gamma, varpi, omega))
        }
    };
    Ok(DualCertificate {
        procedure: cons.procedure,
        x: [x0, x1, 0.0, x3],
        lambda_min: eigenvalues[0],
        eigenvalues,
        primal,
        duality_gap: (2.0 * x0 - primal).abs(),
        slackness,
        f,
        factor,
        factor_roots,
    })
}

/// Real roots of `x^3 + a x^2 + b x + c0` when all three are real, ascending.
fn cubic_real_roots(a: f64, b: f64, c0: f64) -> Vec<f64> {
    let shift = -a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c0;
    let mut roots = if p.abs() <= 1e-15 {
        vec![shift + (-q).cbrt(); 3]
    } else {
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = if m > 0.0 { (3.0 * q / (p * m)).clamp(-1.0, 1.0) } else { 0.0 };
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| shift + m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// Weak measurement and conditional correction realizing the measurement branch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackDecomposition {
    pub v: CMatrix,
    pub m1: CMatrix,
    pub m2: CMatrix,
    /// Correction applied after outcome two.
    pub correction: CMatrix,
    pub u: CMatrix,
}

impl FeedbackDecomposition {
    /// Kraus operators `U M_1 V` and `U Y M_2 V`.
    pub fn kraus(&self) -> Result<KrausSet> {
        KrausSet::new(vec![
            &self.u * &self.m1 * &self.v,
            &self.u * &self.correction * &self.m2 * &self.v,
        ])
    }

    /// `M_1^dagger M_1 + M_2^dagger M_2 - I`, largest entry.
    pub fn completeness_residual(&self) -> f64 {
        mat::max_abs(&(self.m1.adjoint() * &self.m1 + self.m2.adjoint() * &self.m2 - identity(2)))
    }
}

/// Feedback realization of the measurement branch.
pub fn feedback_decomposition(g: &PairGeometry) -> Result<FeedbackDecomposition> {
    if select_procedure(g) != Procedure::A {
        return Err(Error::Invalid(
            "the unitary branch is open loop: its single Kraus operator is U V".into(),
        ));
    }
    feedback_from_canonical(&procedure_a(g)?.canonical)
}

/// Feedback realization of a canonical map with `mu_1 = mu_2 mu_3`, `s = (cos chi cos eta, 0, 0)`.
pub fn feedback_from_canonical(q: &QubitChannelCanonical) -> Result<FeedbackDecomposition> {
    let [_, mu2, mu3] = q.mu;
    if !(-1.0..=1.0).contains(&mu2) || !(-1.0..=1.0).contains(&mu3) {
        return Err(Error::InvalidChannel(format!("scalings {mu2}, {mu3} outside [-1, 1]")));
    }
    let (chi, eta) = (mu3.asin(), mu2.asin());
    let i2 = identity(2);
    let plus = (&i2 + pauli_x()) * c(0.5, 0.0);
    let minus = (&i2 - pauli_x()) * c(0.5, 0.0);
    let m1 = &plus * c(((chi - eta) / 2.0).cos(), 0.0) + &minus * c(((chi + eta) / 2.0).sin(), 0.0);
    let m2 = &plus * c(((chi - eta) / 2.0).sin(), 0.0) - &minus * c(((chi + eta) / 2.0).cos(), 0.0);
    Ok(FeedbackDecomposition { v: q.v.clone(), m1, m2, correction: pauli_y(), u: q.u.clone() })
}

/// Full closed-form result for a pair task.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitTrackerResult {
    pub omega: f64,
    pub procedure: Procedure,
    pub construction: Construction,
    pub fidelity: f64,
    pub certificate: DualCertificate,
    /// True at the indicator tie, where both procedures reach the optimum.
    pub non_unique: bool,
}

pub fn track_pair(g: &PairGeometry) -> Result<QubitTrackerResult> {
    let construction = construct(g)?;
    let certificate = dual_certificate_for(g, &construction)?;
    let omega = g.omega();
    Ok(QubitTrackerResult {
        omega,
        procedure: construction.procedure,
        fidelity: construction.fidelity(g),
        non_unique: omega.abs() <= OMEGA_TIE_TOL,
        construction,
        certificate,
    })
}
