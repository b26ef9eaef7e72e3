//! Closed-form recipes built on the qubit tracker: stabilization of two states
//! against dephasing, two-state discrimination, purification, state-dependent
//! cloning and the perfect-tracking test for pairs of qubit states.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, PairGeometry, Procedure};
use crate::channels::{self, bloch_matrix, Bloch, ChoiMatrix, DensityMatrix, KrausSet};
use crate::error::{Error, Result};
use crate::mat::{self, c, identity, kron, pauli_x, pauli_y, CMatrix};

/// Tolerance on the PSD checks of the closed-form dual certificates.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Purity above `1 - PURE_TOL` counts as pure.
pub const PURE_TOL: f64 = 1e-9;
/// Slack below `-AU_TOL` on the trace-norm criterion counts as a violation.
pub const AU_TOL: f64 = 1e-10;

/// Two pure states with Bloch vectors `(cos theta, 0, +-sin theta)` sent through
/// a phase flip of probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingTask {
    p: f64,
    theta: f64,
}

impl DephasingTask {
    /// Accepts `p` in `[0, 1/2]` and `theta` in `[0, pi/2]`; the endpoints are the limiting cases.
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Invalid(format!("flip probability {p} outside [0, 0.5]")));
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Invalid(format!("half-angle {theta} outside [0, pi/2]")));
        }
        Ok(DephasingTask { p, theta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// x component of the Bloch vectors after the noise.
    pub fn r_x(&self) -> f64 {
        (1.0 - 2.0 * self.p) * self.theta.cos()
    }

    pub fn ideal_blochs(&self) -> [Bloch; 2] {
        let (s, co) = self.theta.sin_cos();
        [Bloch::new(co, 0.0, s), Bloch::new(co, 0.0, -s)]
    }

    pub fn noisy_blochs(&self) -> [Bloch; 2] {
        let s = self.theta.sin();
        [Bloch::new(self.r_x(), 0.0, s), Bloch::new(self.r_x(), 0.0, -s)]
    }

    pub fn ideal_states(&self) -> [DensityMatrix; 2] {
        self.ideal_blochs().map(|b| DensityMatrix::from_matrix_unchecked(bloch_matrix(1.0, &b)))
    }

    pub fn noisy_states(&self) -> [DensityMatrix; 2] {
        self.noisy_blochs().map(|b| DensityMatrix::from_matrix_unchecked(bloch_matrix(1.0, &b)))
    }

    /// Average fidelity of a correction channel applied after the noise.
    pub fn average_fidelity(&self, ch: &ChoiMatrix) -> Result<f64> {
        let ideal = self.ideal_states();
        let noisy = self.noisy_states();
        let mut total = 0.0;
        for (a, b) in ideal.iter().zip(noisy.iter()) {
            let out = channels::apply_matrix(ch, b.matrix())?;
            total += 0.5 * mat::inner(&out, a.matrix());
        }
        Ok(total)
    }

    /// Tracking geometry from the noisy states to the ideal ones with equal priorities.
    pub fn geometry(&self) -> Result<PairGeometry> {
        PairGeometry::from_blochs(self.noisy_blochs(), self.ideal_blochs(), [0.5, 0.5])
    }

    fn one_minus_rx2(&self) -> f64 {
        1.0 - self.r_x().powi(2)
    }
}

/// Average fidelities of the stabilization schemes for one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizationFidelities {
    pub p_helstrom: f64,
    pub ddr1: f64,
    pub ddr2: f64,
    pub sdr: f64,
    pub dn: f64,
    pub qc_opt: f64,
    pub chi_opt: f64,
    pub f_dif: f64,
}

fn optimal_measurement_value(t: &DephasingTask) -> f64 {
    let (s, co) = t.theta.sin_cos();
    let q = t.one_minus_rx2();
    if q <= 0.0 {
        return 1.0;
    }
    0.5 + 0.5 * (co * co + s.powi(4) / q).sqrt()
}

pub fn stabilization_fidelities(t: &DephasingTask) -> StabilizationFidelities {
    let (s, co) = t.theta.sin_cos();
    let p_helstrom = 0.5 * (1.0 + s);
    let ddr1 = 1.0 - 0.5 * (s * s - s.powi(3));
    let ddr2 = 0.5 + 0.5 * (co * co + s.powi(4)).sqrt();
    let sdr = optimal_measurement_value(t);
    let qc_opt = optimal_measurement_value(t);
    let dn = 1.0 - t.p * co * co;
    StabilizationFidelities {
        p_helstrom,
        ddr1,
        ddr2,
        sdr,
        dn,
        qc_opt,
        chi_opt: chi_opt(t),
        f_dif: qc_opt - ddr2.max(dn),
    }
}

/// Measurement strength maximizing the weak-measurement scheme.
pub fn chi_opt(t: &DephasingTask) -> f64 {
    let (s, co) = t.theta.sin_cos();
    let q = t.one_minus_rx2();
    let den = q * q * co * co + q * s.powi(4);
    if den <= 0.0 {
        return 0.0;
    }
    (s.powi(4) / den).sqrt().min(1.0).asin()
}

/// Closed-form average fidelity of the weak measurement with feedback at strength `chi`.
pub fn qc_fidelity(t: &DephasingTask, chi: f64) -> f64 {
    let (s, co) = t.theta.sin_cos();
    let sc = chi.sin();
    0.5 * (1.0 + s * s * sc + co * (1.0 - t.one_minus_rx2() * sc * sc).max(0.0).sqrt())
}

/// Feedback rotation angle in `[0, pi/2]` returning both outcomes to the xz-plane.
pub fn feedback_angle(t: &DephasingTask, chi: f64) -> f64 {
    let (sc, cc) = chi.sin_cos();
    if cc.abs() < 1e-15 {
        return 0.0;
    }
    cc.atan2(t.r_x() * sc)
}

fn z_rotation(eta: f64) -> CMatrix {
    let (s, co) = (eta / 2.0).sin_cos();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = c(co, -s);
    m[(1, 1)] = c(co, s);
    m
}

/// Kraus operators of the weak y-measurement at strength `chi` followed by z-rotations.
pub fn qc_kraus(t: &DephasingTask, chi: f64) -> Result<KrausSet> {
    if !(0.0..=FRAC_PI_2).contains(&chi) {
        return Err(Error::Invalid(format!("measurement strength parameter {chi} outside [0, pi/2]")));
    }
    let eta = feedback_angle(t, chi);
    let i2 = identity(2);
    let plus_i = (&i2 + pauli_y()) * c(0.5, 0.0);
    let minus_i = (&i2 - pauli_y()) * c(0.5, 0.0);
    let (s, co) = (chi / 2.0).sin_cos();
    let m0 = &plus_i * c(co, 0.0) + &minus_i * c(s, 0.0);
    let m1 = &plus_i * c(s, 0.0) + &minus_i * c(co, 0.0);
    KrausSet::new(vec![z_rotation(-eta) * m0, z_rotation(eta) * m1])
}

pub fn qc_channel(t: &DephasingTask, chi: f64) -> Result<ChoiMatrix> {
    channels::choi_from_kraus(&qc_kraus(t, chi)?)
}

/// Payoff operator whose overlap with a Choi matrix is the average fidelity.
pub fn payoff_operator(t: &DephasingTask) -> CMatrix {
    let ideal = t.ideal_states();
    let noisy = t.noisy_states();
    let mut r = CMatrix::zeros(4, 4);
    for (a, b) in ideal.iter().zip(noisy.iter()) {
        r += kron(&b.matrix().transpose(), a.matrix()) * c(0.5, 0.0);
    }
    r
}

/// Dual certificate for the best entanglement-breaking correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalCertificate {
    pub a0: f64,
    pub ax: f64,
    pub ay: f64,
    pub lambda_min: f64,
    pub bound: f64,
    pub ddr2: f64,
    pub ok: bool,
}

pub fn classical_optimality_certificate(t: &DephasingTask) -> ClassicalCertificate {
    let (s, co) = t.theta.sin_cos();
    let rx = t.r_x();
    let g = (co * co + s.powi(4)).sqrt();
    let a0 = 0.25 + 0.25 * g;
    let (ax, ay) = if g > 0.0 {
        (rx / 4.0 + rx / 4.0 * co * co / g, -rx / 4.0 * co * s * s / g)
    } else {
        (0.0, 0.0)
    };
    let x1 = kron(&pauli_x(), &identity(2));
    let yy = kron(&pauli_y(), &pauli_y());
    let m = identity(4) * c(a0, 0.0) + x1 * c(ax, 0.0) + yy * c(ay, 0.0) - payoff_operator(t);
    let lambda_min = mat::min_eig(&m);
    let ddr2 = stabilization_fidelities(t).ddr2;
    ClassicalCertificate {
        a0,
        ax,
        ay,
        lambda_min,
        bound: 2.0 * a0,
        ddr2,
        ok: lambda_min >= -CERTIFICATE_TOL && (2.0 * a0 - ddr2).abs() <= CERTIFICATE_TOL,
    }
}

/// Dual certificate for the best correction over all channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumCertificate {
    pub b0: f64,
    pub bx: f64,
    pub lambda_min: f64,
    pub bound: f64,
    pub qc_opt: f64,
    pub ok: bool,
}

pub fn quantum_optimality_certificate(t: &DephasingTask) -> QuantumCertificate {
    let qc_opt = optimal_measurement_value(t);
    let b0 = qc_opt / 2.0;
    let bx = t.r_x() * b0;
    let m = identity(4) * c(b0, 0.0) + kron(&pauli_x(), &identity(2)) * c(bx, 0.0) - payoff_operator(t);
    let lambda_min = mat::min_eig(&m);
    QuantumCertificate { b0, bx, lambda_min, bound: 2.0 * b0, qc_opt, ok: lambda_min >= -CERTIFICATE_TOL }
}

/// Result of a scan of the quantum-over-classical advantage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageScan {
    pub min: f64,
    pub max: f64,
    pub argmax_p: f64,
    pub argmax_theta: f64,
}

/// Scan `f_dif` over `p_k = 0.5 k / n_p` (k = 1..n_p) and
/// `theta_j = (pi/2) j / (n_theta + 1)` (j = 1..n_theta).
pub fn advantage_scan(n_p: usize, n_theta: usize) -> Result<AdvantageScan> {
    if n_p == 0 || n_theta == 0 {
        return Err(Error::Invalid("empty scan grid".into()));
    }
    let points: Vec<(f64, f64)> = (1..=n_p)
        .flat_map(|k| (1..=n_theta).map(move |j| (0.5 * k as f64 / n_p as f64, FRAC_PI_2 * j as f64 / (n_theta + 1) as f64)))
        .collect();
    let vals: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|&(p, th)| {
            let t = DephasingTask { p, theta: th };
            (stabilization_fidelities(&t).f_dif, p, th)
        })
        .collect();
    let min = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let best = vals.iter().copied().fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(AdvantageScan { min, max: best.0, argmax_p: best.1, argmax_theta: best.2 })
}

/// Success probabilities of two-state discrimination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrimination {
    pub p_helstrom: f64,
    pub p_track: f64,
    pub t: f64,
    pub procedure: Procedure,
}

/// Discriminate `rho1` (prior `p1`) from `rho2` by tracking onto `|0>`, `|1>`
/// and measuring in the computational basis.
pub fn discriminate(rho1: &DensityMatrix, rho2: &DensityMatrix, p1: f64) -> Result<Discrimination> {
    if rho1.dim() != 2 || rho2.dim() != 2 {
        return Err(Error::Dimension("discrimination takes qubit states".into()));
    }
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Invalid(format!("prior {p1} outside (0, 1)")));
    }
    let p2 = 1.0 - p1;
    let diff = rho1.matrix() * c(p1, 0.0) - rho2.matrix() * c(p2, 0.0);
    let p_helstrom = 0.5 + 0.5 * mat::trace_norm_hermitian(&diff);
    let r1 = rho1.bloch().expect("qubit");
    let r2 = rho2.bloch().expect("qubit");
    let t = (p1 - p2).powi(2) - (r1 * p1 - r2 * p2).norm_squared();
    let closed = if t > 0.0 { 0.5 + 0.5 * (p1 - p2).abs() } else { 0.5 + 0.5 * (r1 * p1 - r2 * p2).norm() };
    let targets = [Bloch::new(0.0, 0.0, 1.0), Bloch::new(0.0, 0.0, -1.0)];
    let (p_track, procedure) = match PairGeometry::from_blochs([r1, r2], targets, [p1, p2]) {
        Ok(g) => {
            let cons = analytic::construct(&g)?;
            (cons.fidelity(&g), cons.procedure)
        }
        Err(Error::Degenerate(_)) => (closed, if t > 0.0 { Procedure::A } else { Procedure::B }),
        Err(e) => return Err(e),
    };
    Ok(Discrimination { p_helstrom, p_track, t, procedure })
}

/// Purification of two equally mixed states toward two pure states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Purification {
    pub omega: f64,
    pub t: f64,
    pub s: f64,
    pub cross: f64,
    pub fidelity: f64,
    pub procedure: Procedure,
    pub mu: [f64; 3],
    pub shift: [f64; 3],
}

/// Sources at length `r` and half-angle `theta`, pure targets at half-angle
/// `theta_bar`, priorities `(pi1, 1 - pi1)`.
pub fn purification_geometry(r: f64, theta: f64, theta_bar: f64, pi1: f64) -> Result<PairGeometry> {
    let (s, co) = theta.sin_cos();
    let (sb, cb) = theta_bar.sin_cos();
    PairGeometry::from_blochs(
        [Bloch::new(r * co, 0.0, r * s), Bloch::new(r * co, 0.0, -r * s)],
        [Bloch::new(cb, 0.0, sb), Bloch::new(cb, 0.0, -sb)],
        [pi1, 1.0 - pi1],
    )
}

pub fn purification(r: f64, theta: f64, theta_bar: f64, pi1: f64) -> Result<Purification> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Invalid(format!("Bloch length {r} outside (0, 1]")));
    }
    if !(theta > 0.0 && theta <= FRAC_PI_2) || !(0.0..=FRAC_PI_2).contains(&theta_bar) {
        return Err(Error::Invalid(format!("half-angles ({theta}, {theta_bar}) out of range")));
    }
    if !(pi1 > 0.0 && pi1 < 1.0) {
        return Err(Error::Invalid(format!("priority {pi1} outside (0, 1)")));
    }
    let pi2 = 1.0 - pi1;
    let rc = (r * theta.cos()).powi(2);
    let rs = (r * theta.sin()).powi(2);
    let delta = (pi1 - pi2).powi(2);
    let c2b = (2.0 * theta_bar).cos();
    let pp = pi1 * pi1 + pi2 * pi2 + 2.0 * pi1 * pi2 * c2b;
    let pm = pi1 * pi1 + pi2 * pi2 - 2.0 * pi1 * pi2 * c2b;
    let cross = (rs * rc * (pp * pm - delta)).max(0.0).sqrt();
    let t = (1.0 - rc) * pp - rs * pm;
    let s = (((1.0 - rc) * pp + rs * pm).powi(2) - 4.0 * delta * rs * (1.0 - rc)).max(0.0).sqrt();
    let omega = s + t - 2.0 * cross;

    let g = purification_geometry(r, theta, theta_bar, pi1)?;
    let cons = analytic::construct(&g)?;
    let fidelity = if delta == 0.0 {
        if omega > analytic::OMEGA_TIE_TOL {
            let cb2 = theta_bar.cos().powi(2);
            0.5 + 0.5 * (cb2 + rs * theta_bar.sin().powi(2) / (1.0 - rc)).sqrt()
        } else {
            0.5 + 0.5 * r * (theta - theta_bar).cos()
        }
    } else {
        cons.fidelity(&g)
    };
    Ok(Purification {
        omega,
        t,
        s,
        cross,
        fidelity,
        procedure: cons.procedure,
        mu: cons.canonical.mu,
        shift: cons.canonical.s,
    })
}

/// Optimal global fidelity for cloning `cos(phi)|0> + sin(phi)|1>` or
/// `sin(phi)|0> + cos(phi)|1>` with priorities `(pi1, 1 - pi1)`.
pub fn clone_fidelity(phi: f64, pi1: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_4).contains(&phi) {
        return Err(Error::Invalid(format!("angle {phi} outside [0, pi/4)")));
    }
    if !(0.0..=1.0).contains(&pi1) {
        return Err(Error::Invalid(format!("priority {pi1} outside [0, 1]")));
    }
    let pi2 = 1.0 - pi1;
    let (theta, theta_bar) = clone_half_angles(phi);
    let indicator = 2.0 * (theta - theta_bar);
    Ok(0.5 + 0.5 * (pi1 * pi1 + pi2 * pi2 + 2.0 * pi1 * pi2 * indicator.cos()).sqrt())
}

/// Bloch half-angles of the effective source pair and target pair of the cloner.
pub fn clone_half_angles(phi: f64) -> (f64, f64) {
    let overlap = (2.0 * phi).sin();
    (overlap.clamp(-1.0, 1.0).acos(), (overlap * overlap).clamp(-1.0, 1.0).acos())
}

/// Outcome of the perfect-tracking test for a pair of qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerfectTracking {
    pub feasible: bool,
    pub worst_t: f64,
    pub slack: f64,
    /// Verdict of the exact rule for pure targets, when it applies.
    pub pure_target_rule: Option<bool>,
}

/// 600 logarithmically spaced points in `[1e-3, 1e3]`.
pub fn default_t_grid() -> Vec<f64> {
    let n = 600;
    (0..n).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64)).collect()
}

fn is_pure(rho: &DensityMatrix) -> bool {
    rho.purity() >= 1.0 - PURE_TOL
}

/// Check `||rbar1 - t rbar2||_1 <= ||rho1 - t rho2||_1` on `t_grid`; for pure
/// targets the exact rule (sources pure and no closer than the targets) decides.
pub fn alberti_uhlmann(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rbar1: &DensityMatrix,
    rbar2: &DensityMatrix,
    t_grid: &[f64],
) -> Result<PerfectTracking> {
    if [rho1, rho2, rbar1, rbar2].iter().any(|s| s.dim() != 2) {
        return Err(Error::Dimension("perfect-tracking test takes qubit states".into()));
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Invalid("t grid must be non-empty and positive".into()));
    }
    let (mut slack, mut worst_t) = (f64::INFINITY, t_grid[0]);
    for &t in t_grid {
        let src = mat::trace_norm_hermitian(&(rho1.matrix() - rho2.matrix() * c(t, 0.0)));
        let tgt = mat::trace_norm_hermitian(&(rbar1.matrix() - rbar2.matrix() * c(t, 0.0)));
        if src - tgt < slack {
            slack = src - tgt;
            worst_t = t;
        }
    }
    let pure_target_rule = if is_pure(rbar1) && is_pure(rbar2) {
        let tgt_overlap = mat::inner(rbar1.matrix(), rbar2.matrix());
        if tgt_overlap >= 1.0 - PURE_TOL {
            Some(true)
        } else {
            let src_overlap = mat::inner(rho1.matrix(), rho2.matrix());
            Some(is_pure(rho1) && is_pure(rho2) && src_overlap <= tgt_overlap + PURE_TOL)
        }
    } else {
        None
    };
    let feasible = pure_target_rule.unwrap_or(slack >= -AU_TOL);
    Ok(PerfectTracking { feasible, worst_t, slack, pure_target_rule })
}
