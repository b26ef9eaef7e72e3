use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{self, apply_matrix, check_cptp, check_ppt, random_state, Bloch, ChoiMatrix, CptpReport, DensityMatrix, PptReport};
use crate::error::{Error, Result};
use crate::mat::{self, c, hermitian_basis, identity, kron, CMatrix, HermitianBasis};
use crate::sdp::{
    self, verify_certificate, CertificateReport, CertificateTolerances, SdpInequality, SdpOptions, SdpProblem,
    SdpStandard, SdpStatus,
};
use crate::sequence::WeightedSequence;

/// Targets closer than this (entrywise) to `I/d` count as maximally mixed.
pub const MIXED_TARGET_TOL: f64 = 1e-12;
/// Relative eigenvalue threshold for the Choi rank reported on PPT solutions.
pub const CHOI_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Priority-weighted trace distance.
    Davg,
    /// Priority-weighted squared Hilbert-Schmidt distance.
    H2avg1,
    /// Hilbert-Schmidt distance of the weighted direct sums.
    Havg2,
    /// Spectral distance of the weighted direct sums.
    Oavg2,
    /// Priority-weighted Hilbert-Schmidt inner product.
    Fhsavg1,
    /// Hilbert-Schmidt inner product of the weighted direct sums.
    Fhsavg2,
}

impl Objective {
    pub const ALL: [Objective; 6] =
        [Objective::Davg, Objective::H2avg1, Objective::Havg2, Objective::Oavg2, Objective::Fhsavg1, Objective::Fhsavg2];

    /// True for objectives that are maximized.
    pub fn is_closeness(self) -> bool {
        matches!(self, Objective::Fhsavg1 | Objective::Fhsavg2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Davg => "davg",
            Objective::H2avg1 => "h2avg1",
            Objective::Havg2 => "havg2",
            Objective::Oavg2 => "oavg2",
            Objective::Fhsavg1 => "fhsavg1",
            Objective::Fhsavg2 => "fhsavg2",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Objective::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown objective '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasible {
    /// All completely positive trace-preserving maps.
    Cptp,
    /// CPTP maps whose Choi matrix has a positive partial transpose.
    Ppt,
}

impl fmt::Display for Feasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasible::Cptp => "cptp",
            Feasible::Ppt => "ppt",
        })
    }
}

impl FromStr for Feasible {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cptp" => Ok(Feasible::Cptp),
            "ppt" | "ebtp" => Ok(Feasible::Ppt),
            _ => Err(Error::Invalid(format!("unknown feasible set '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingProblem {
    pub source: WeightedSequence,
    pub target: WeightedSequence,
    pub objective: Objective,
    pub feasible: Feasible,
}

impl TrackingProblem {
    pub fn new(source: WeightedSequence, target: WeightedSequence, objective: Objective, feasible: Feasible) -> Result<Self> {
        source.check_compatible(&target)?;
        Ok(TrackingProblem { source, target, objective, feasible })
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn with_objective(&self, objective: Objective, feasible: Feasible) -> Self {
        TrackingProblem { objective, feasible, ..self.clone() }
    }
}

/// Trace-preserving Choi matrices written as `I/d + sum_k x_k H^mu ⊗ H^nu` with `nu` traceless.
struct ChoiParam {
    d: usize,
    basis: HermitianBasis,
    terms: Vec<(usize, usize)>,
}

impl ChoiParam {
    fn new(d: usize) -> Result<Self> {
        let basis = hermitian_basis(d)?;
        let n = basis.len();
        let terms = (0..n).flat_map(|mu| (1..n).map(move |nu| (mu, nu))).collect();
        Ok(ChoiParam { d, basis, terms })
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn term(&self, k: usize) -> CMatrix {
        let (mu, nu) = self.terms[k];
        kron(&self.basis.elements[mu], &self.basis.elements[nu])
    }

    /// Partial transpose of `term(k)` on the output factor.
    fn term_pt(&self, k: usize) -> CMatrix {
        let (mu, nu) = self.terms[k];
        kron(&self.basis.elements[mu], &self.basis.elements[nu].transpose())
    }

    fn offset(&self) -> CMatrix {
        identity(self.d * self.d) * c(1.0 / self.d as f64, 0.0)
    }

    fn choi(&self, x: &[f64]) -> CMatrix {
        let mut m = self.offset();
        for (k, &v) in x.iter().enumerate().take(self.len()) {
            m += self.term(k) * c(v, 0.0);
        }
        mat::hermitize(&m)
    }

    /// `tr(rho^T H^mu) H^nu` for each term: the linear part of `C(rho)`.
    fn output_terms(&self, rho: &CMatrix) -> Vec<CMatrix> {
        let rt = rho.transpose();
        self.terms
            .iter()
            .map(|&(mu, nu)| {
                let w = (&rt * &self.basis.elements[mu]).trace().re;
                &self.basis.elements[nu] * c(w, 0.0)
            })
            .collect()
    }
}

fn blockdiag(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// `[[top, off], [off^dagger, bottom]]`.
fn two_by_two(top: &CMatrix, off: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let (p, q) = (top.nrows(), bottom.nrows());
    let mut out = CMatrix::zeros(p + q, p + q);
    out.view_mut((0, 0), (p, p)).copy_from(top);
    out.view_mut((0, p), (p, q)).copy_from(off);
    out.view_mut((p, 0), (q, p)).copy_from(&off.adjoint());
    out.view_mut((p, p), (q, q)).copy_from(bottom);
    out
}

fn column(v: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, mat::vec(v).as_slice())
}

fn stack(parts: &[CMatrix]) -> CMatrix {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = CMatrix::zeros(n, 1);
    let mut off = 0;
    for p in parts {
        out.view_mut((off, 0), (p.len(), 1)).copy_from(&column(p));
        off += p.len();
    }
    out
}

fn block_sum(weights: &[f64], blocks: &[CMatrix]) -> CMatrix {
    crate::sequence::direct_sum(weights.iter().copied().zip(blocks.iter()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ValueMap {
    /// The SDP value is the objective value.
    Direct,
    /// The SDP value is the square of the objective value.
    Sqrt,
    /// Objective is `offset - value`.
    Negated(f64),
}

/// A tracking problem written as a semidefinite program.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub sdp: SdpProblem,
    map: ValueMap,
    choi_vars: usize,
    d: usize,
}

impl Assembly {
    /// Number of scalar variables: `x` for the inequality form, multipliers for the standard form.
    pub fn num_vars(&self) -> usize {
        match &self.sdp {
            SdpProblem::Inequality(q) => q.num_vars(),
            SdpProblem::Standard(s) => s.constraints.len(),
        }
    }

    /// Side length of the matrix constraint.
    pub fn constraint_dim(&self) -> usize {
        match &self.sdp {
            SdpProblem::Inequality(q) => q.dim(),
            SdpProblem::Standard(s) => s.dim(),
        }
    }

    /// Objective value corresponding to an SDP optimum.
    pub fn objective_value(&self, sdp_value: f64) -> f64 {
        match self.map {
            ValueMap::Direct => sdp_value,
            ValueMap::Sqrt => sdp_value.max(0.0).sqrt(),
            ValueMap::Negated(off) => off - sdp_value,
        }
    }
}

/// Assemble the SDP for a tracking problem.
///
/// Distance objectives and every PPT problem use the inequality form over the
/// Choi coordinates `x` (plus auxiliary variables); the Hilbert-Schmidt inner
/// product over CPTP maps uses the standard form with the Choi matrix as variable.
pub fn assemble(tp: &TrackingProblem) -> Result<Assembly> {
    tp.source.check_compatible(&tp.target)?;
    let d = tp.dim();
    let param = ChoiParam::new(d)?;
    let pis = tp.source.priorities();
    let srcs: Vec<&CMatrix> = tp.source.states().map(|s| s.matrix()).collect();
    let tgts: Vec<&CMatrix> = tp.target.states().map(|s| s.matrix()).collect();

    if tp.objective.is_closeness() {
        let w: Vec<f64> = match tp.objective {
            Objective::Fhsavg1 => pis.clone(),
            _ => pis.iter().map(|p| p * p).collect(),
        };
        if tp.feasible == Feasible::Cptp {
            let mut e0 = CMatrix::zeros(d * d, d * d);
            for ((wi, r), t) in w.iter().zip(&srcs).zip(&tgts) {
                e0 -= kron(&r.transpose(), t) * c(*wi, 0.0);
            }
            let cons = param
                .basis
                .elements
                .iter()
                .enumerate()
                .map(|(a, h)| (kron(h, &identity(d)), if a == 0 { d as f64 } else { 0.0 }))
                .collect();
            let sdp = SdpProblem::Standard(SdpStandard::new(e0, cons)?);
            return Ok(Assembly { sdp, map: ValueMap::Negated(0.0), choi_vars: 0, d });
        }
        let mut cost = vec![0.0; param.len()];
        for ((wi, r), t) in w.iter().zip(&srcs).zip(&tgts) {
            for (k, b) in param.output_terms(r).iter().enumerate() {
                cost[k] -= wi * mat::inner(b, t);
            }
        }
        let f0 = blockdiag(&[&param.offset(), &param.offset()]);
        let fs = (0..param.len()).map(|k| blockdiag(&[&param.term(k), &param.term_pt(k)])).collect();
        let offset = w.iter().sum::<f64>() / d as f64;
        let sdp = SdpProblem::Inequality(SdpInequality::new(cost, f0, fs)?);
        return Ok(Assembly { sdp, map: ValueMap::Negated(offset), choi_vars: param.len(), d });
    }

    let outs: Vec<Vec<CMatrix>> = srcs.iter().map(|r| param.output_terms(r)).collect();
    let consts: Vec<CMatrix> = tgts.iter().map(|t| identity(d) * c(1.0 / d as f64, 0.0) - *t).collect();
    let k_len = param.len();
    let nstates = srcs.len();
    let term_of = |k: usize| -> Vec<CMatrix> { outs.iter().map(|o| o[k].clone()).collect() };

    // Objective block: constant part, coefficient of each x_k, and auxiliary variables with costs.
    let (obj0, objx, extras, map): (CMatrix, Vec<CMatrix>, Vec<(f64, CMatrix)>, ValueMap) = match tp.objective {
        Objective::Davg => {
            let half: Vec<f64> = pis.iter().map(|p| p / 2.0).collect();
            let n = nstates * d;
            let zero = CMatrix::zeros(n, n);
            let obj0 = two_by_two(&zero, &block_sum(&half, &consts), &zero);
            let objx = (0..k_len).map(|k| two_by_two(&zero, &block_sum(&half, &term_of(k)), &zero)).collect();
            let big = hermitian_basis(n)?;
            let mut extras = Vec::with_capacity(2 * big.len());
            for h in &big.elements {
                extras.push((0.5 * h.trace().re, two_by_two(h, &zero, &zero)));
            }
            for h in &big.elements {
                extras.push((0.5 * h.trace().re, two_by_two(&zero, &zero, h)));
            }
            (obj0, objx, extras, ValueMap::Direct)
        }
        Objective::H2avg1 => {
            let n = nstates * d * d;
            let inv_pi = CMatrix::from_diagonal(&mat::CVector::from_iterator(
                n,
                pis.iter().flat_map(|p| std::iter::repeat(c(1.0 / p, 0.0)).take(d * d)),
            ));
            let scalar0 = CMatrix::zeros(1, 1);
            let obj0 = two_by_two(&inv_pi, &stack(&consts), &scalar0);
            let zero = CMatrix::zeros(n, n);
            let objx = (0..k_len).map(|k| two_by_two(&zero, &stack(&term_of(k)), &scalar0)).collect();
            let mut t = CMatrix::zeros(n + 1, n + 1);
            t[(n, n)] = c(1.0, 0.0);
            (obj0, objx, vec![(1.0, t)], ValueMap::Direct)
        }
        Objective::Havg2 => {
            let n = (nstates * d).pow(2);
            let scalar0 = CMatrix::zeros(1, 1);
            let obj0 = two_by_two(&identity(n), &column(&block_sum(&pis, &consts)), &scalar0);
            let zero = CMatrix::zeros(n, n);
            let objx =
                (0..k_len).map(|k| two_by_two(&zero, &column(&block_sum(&pis, &term_of(k))), &scalar0)).collect();
            let mut t = CMatrix::zeros(n + 1, n + 1);
            t[(n, n)] = c(1.0, 0.0);
            (obj0, objx, vec![(1.0, t)], ValueMap::Sqrt)
        }
        Objective::Oavg2 => {
            let n = nstates * d;
            let zero = CMatrix::zeros(n, n);
            let obj0 = two_by_two(&zero, &block_sum(&pis, &consts), &zero);
            let objx = (0..k_len).map(|k| two_by_two(&zero, &block_sum(&pis, &term_of(k)), &zero)).collect();
            (obj0, objx, vec![(1.0, identity(2 * n))], ValueMap::Direct)
        }
        Objective::Fhsavg1 | Objective::Fhsavg2 => unreachable!("closeness objectives handled above"),
    };

    let ppt = tp.feasible == Feasible::Ppt;
    let d2 = d * d;
    let zero_choi = CMatrix::zeros(d2, d2);
    let assemble_block = |obj: &CMatrix, choi: &CMatrix, pt: &CMatrix| -> CMatrix {
        if ppt {
            blockdiag(&[obj, choi, pt])
        } else {
            blockdiag(&[obj, choi])
        }
    };
    let f0 = assemble_block(&obj0, &param.offset(), &param.offset());
    let mut fs = Vec::with_capacity(k_len + extras.len());
    let mut cost = vec![0.0; k_len];
    for (k, ox) in objx.iter().enumerate() {
        fs.push(assemble_block(ox, &param.term(k), &param.term_pt(k)));
    }
    for (w, e) in &extras {
        cost.push(*w);
        fs.push(assemble_block(e, &zero_choi, &zero_choi));
    }
    let sdp = SdpProblem::Inequality(SdpInequality::new(cost, f0, fs)?);
    Ok(Assembly { sdp, map, choi_vars: k_len, d })
}

/// Value of the objective achieved by a given channel.
pub fn evaluate_objective(
    objective: Objective,
    channel: &ChoiMatrix,
    source: &WeightedSequence,
    target: &WeightedSequence,
) -> Result<f64> {
    source.check_compatible(target)?;
    let mut diffs = Vec::with_capacity(source.len());
    let mut overlaps = Vec::with_capacity(source.len());
    for ((p, s), (_, t)) in source.items().iter().zip(target.items()) {
        let out = apply_matrix(channel, s.matrix())?;
        overlaps.push((*p, mat::inner(&out, t.matrix())));
        diffs.push((*p, mat::hermitize(&(out - t.matrix()))));
    }
    Ok(match objective {
        Objective::Davg => diffs.iter().map(|(p, m)| 0.5 * p * mat::trace_norm_hermitian(m)).sum(),
        Objective::H2avg1 => diffs.iter().map(|(p, m)| p * mat::frobenius_norm(m).powi(2)).sum(),
        Objective::Havg2 => diffs.iter().map(|(p, m)| (p * mat::frobenius_norm(m)).powi(2)).sum::<f64>().sqrt(),
        Objective::Oavg2 => diffs.iter().map(|(p, m)| p * mat::spectral_norm_hermitian(m)).fold(0.0, f64::max),
        Objective::Fhsavg1 => overlaps.iter().map(|(p, v)| p * v).sum(),
        Objective::Fhsavg2 => overlaps.iter().map(|(p, v)| p * p * v).sum(),
    })
}

/// Separability status of a PPT-constrained solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PptLabel {
    /// Entanglement breaking: qubit PPT, or Choi rank at most three.
    Ebtp,
    /// PPT only; separability not certified.
    PptRelaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptCheck {
    pub report: PptReport,
    pub choi_rank: usize,
    pub label: PptLabel,
}

/// Label a PPT channel: exact for qubits, by Choi rank otherwise.
pub fn ppt_check(ch: &ChoiMatrix) -> PptCheck {
    let report = check_ppt(ch);
    let choi_rank = psd_rank(ch.matrix());
    let label = if report.ppt && (ch.dim() == 2 || choi_rank <= 3) { PptLabel::Ebtp } else { PptLabel::PptRelaxed };
    PptCheck { report, choi_rank, label }
}

fn psd_rank(m: &CMatrix) -> usize {
    let vals = mat::eigvalsh(m);
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    vals.iter().filter(|&&v| v > CHOI_RANK_TOL * top.max(1e-300)).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingOptions {
    pub sdp: SdpOptions,
    pub certificate: CertificateTolerances,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions {
            sdp: SdpOptions::default(),
            certificate: CertificateTolerances { feasibility: 1e-7, gap: 1e-7, complementarity: 1e-2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSolution {
    pub controller: ChoiMatrix,
    /// Optimal objective value reported by the SDP.
    pub value: f64,
    /// Objective re-evaluated on the returned controller.
    pub achieved: f64,
    /// `None` when the problem was solved without an SDP.
    pub certificate: Option<CertificateReport>,
    pub status: SdpStatus,
    pub iterations: usize,
    pub cptp: CptpReport,
    pub ppt: Option<PptCheck>,
    /// Output Bloch vectors for qubit problems.
    pub output_bloch: Option<Vec<Bloch>>,
}

fn all_targets_mixed(tp: &TrackingProblem) -> bool {
    let d = tp.dim();
    let mixed = identity(d) * c(1.0 / d as f64, 0.0);
    tp.target.states().all(|t| mat::max_abs(&(t.matrix() - &mixed)) <= MIXED_TARGET_TOL)
}

/// Solve a tracking problem and check the returned controller.
pub fn solve_tracking(tp: &TrackingProblem, opts: &TrackingOptions) -> Result<TrackingSolution> {
    let d = tp.dim();
    if all_targets_mixed(tp) {
        let controller = channels::completely_depolarizing(d);
        let value = evaluate_objective(tp.objective, &controller, &tp.source, &tp.target)?;
        return finish(tp, controller, value, None, SdpStatus::Optimal, 0);
    }
    let asm = assemble(tp)?;
    let sol = sdp::solve(&asm.sdp, &opts.sdp)?.require_optimal()?;
    let tol = CertificateTolerances { gap: opts.certificate.gap * (1.0 + sol.primal_value.abs()), ..opts.certificate };
    let (choi, cert) = match &asm.sdp {
        SdpProblem::Standard(s) => {
            let cert = verify_certificate(&sol.matrix, &sol.vector, s, &tol)?;
            (mat::hermitize(&sol.matrix), cert)
        }
        SdpProblem::Inequality(q) => {
            let nu: Vec<f64> = sol.vector.iter().map(|v| -v).collect();
            let cert = verify_certificate(&sol.matrix, &nu, &q.dual_standard(), &tol)?;
            let param = ChoiParam::new(asm.d)?;
            (param.choi(&sol.vector[..asm.choi_vars]), cert)
        }
    };
    let controller = ChoiMatrix::new(choi)?;
    let value = asm.objective_value(sol.primal_value);
    finish(tp, controller, value, Some(cert), sol.status, sol.iterations)
}

fn finish(
    tp: &TrackingProblem,
    controller: ChoiMatrix,
    value: f64,
    certificate: Option<CertificateReport>,
    status: SdpStatus,
    iterations: usize,
) -> Result<TrackingSolution> {
    let achieved = evaluate_objective(tp.objective, &controller, &tp.source, &tp.target)?;
    let cptp = check_cptp(&controller);
    let ppt = (tp.feasible == Feasible::Ppt).then(|| ppt_check(&controller));
    let output_bloch = if tp.dim() == 2 {
        Some(
            tp.source
                .states()
                .map(|s| apply_matrix(&controller, s.matrix()).map(|m| channels::bloch_of(&m)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(TrackingSolution { controller, value, achieved, certificate, status, iterations, cptp, ppt, output_bloch })
}

/// Merge several weighted sources sharing a target into one averaged source per target.
///
/// The Hilbert-Schmidt inner product objective is linear in each source, so the
/// reduced two-term problem has the same optimum as the original one.
pub fn reduce_nto2(
    groups: [&[(f64, DensityMatrix)]; 2],
    targets: [&DensityMatrix; 2],
    feasible: Feasible,
) -> Result<TrackingProblem> {
    let total: f64 = groups.iter().flat_map(|g| g.iter()).map(|(q, _)| q).sum();
    if (total - 1.0).abs() > crate::sequence::PRIORITY_SUM_TOL {
        return Err(Error::Invalid(format!("group weights sum to {total}")));
    }
    let mut src = Vec::with_capacity(2);
    let mut tgt = Vec::with_capacity(2);
    for (g, t) in groups.iter().zip(targets) {
        if g.is_empty() {
            return Err(Error::Invalid("empty group".into()));
        }
        let mut weight = 0.0;
        let d = g[0].1.dim();
        let mut mean = CMatrix::zeros(d, d);
        for (q, s) in g.iter() {
            if !(*q > 0.0) {
                return Err(Error::Invalid(format!("group weight {q} is not positive")));
            }
            if s.dim() != d {
                return Err(Error::Dimension("group states differ in dimension".into()));
            }
            weight += q;
            mean += s.matrix() * c(*q, 0.0);
        }
        mean /= c(weight, 0.0);
        src.push((weight, DensityMatrix::new(mean)?));
        tgt.push((weight, t.clone()));
    }
    TrackingProblem::new(WeightedSequence::new(src)?, WeightedSequence::new(tgt)?, Objective::Fhsavg1, feasible)
}

/// Pure or mixed source and target states in random transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    PureToPure,
    MixedToPure,
    MixedToMixed,
}

impl TransformKind {
    fn purity(self) -> (bool, bool) {
        match self {
            TransformKind::PureToPure => (true, true),
            TransformKind::MixedToPure => (false, true),
            TransformKind::MixedToMixed => (false, false),
        }
    }
}

impl FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-pure" | "pure_to_pure" => Ok(TransformKind::PureToPure),
            "mixed-pure" | "mixed_to_pure" => Ok(TransformKind::MixedToPure),
            "mixed-mixed" | "mixed_to_mixed" => Ok(TransformKind::MixedToMixed),
            _ => Err(Error::Invalid(format!("unknown transformation kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityConfig {
    /// `(I, d)` cells.
    pub cells: Vec<(usize, usize)>,
    pub samples: usize,
    pub seed: u64,
    pub kind: TransformKind,
    /// Objectives optimized per sample; every pair is compared.
    pub objectives: Vec<Objective>,
    pub options: TrackingOptions,
}

impl Default for CompatibilityConfig {
    fn default() -> Self {
        CompatibilityConfig {
            cells: vec![(2, 2)],
            samples: 20,
            seed: 0,
            kind: TransformKind::MixedToPure,
            objectives: vec![Objective::Davg, Objective::H2avg1, Objective::Oavg2, Objective::Fhsavg1],
            options: TrackingOptions::default(),
        }
    }
}

/// Performance drop of one objective when the controller optimal for another is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityEntry {
    pub states: usize,
    pub dim: usize,
    pub reference: Objective,
    pub replacement: Objective,
    /// Mean drop in units of the reference objective, as a percentage.
    pub mean_percent: f64,
    /// Sample standard deviation of the drop, as a percentage.
    pub std_percent: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityTable {
    pub entries: Vec<CompatibilityEntry>,
}

impl CompatibilityTable {
    pub fn get(&self, states: usize, dim: usize, reference: Objective, replacement: Objective) -> Option<&CompatibilityEntry> {
        self.entries
            .iter()
            .find(|e| e.states == states && e.dim == dim && e.reference == reference && e.replacement == replacement)
    }

    /// Replacements for `reference` sorted by increasing mean drop.
    pub fn ordering(&self, states: usize, dim: usize, reference: Objective) -> Vec<Objective> {
        let mut v: Vec<&CompatibilityEntry> = self
            .entries
            .iter()
            .filter(|e| e.states == states && e.dim == dim && e.reference == reference && e.replacement != reference)
            .collect();
        v.sort_by(|a, b| a.mean_percent.total_cmp(&b.mean_percent));
        v.into_iter().map(|e| e.replacement).collect()
    }
}

/// Seed for sample `s` of cell `cell`.
fn sample_seed(seed: u64, cell: usize, s: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((cell as u64) << 32) ^ s as u64
}

/// Uniform-priority random tracking instance.
pub fn random_instance(states: usize, dim: usize, kind: TransformKind, seed: u64) -> Result<(WeightedSequence, WeightedSequence)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (src_pure, tgt_pure) = kind.purity();
    let src = (0..states).map(|_| random_state(dim, src_pure, &mut rng)).collect();
    let tgt = (0..states).map(|_| random_state(dim, tgt_pure, &mut rng)).collect();
    Ok((WeightedSequence::uniform(src)?, WeightedSequence::uniform(tgt)?))
}

/// Estimate `Δ(X|Y)` for every ordered pair of configured objectives over CPTP maps.
pub fn compatibility_experiment(cfg: &CompatibilityConfig) -> Result<CompatibilityTable> {
    let objs = &cfg.objectives;
    let mut entries = Vec::new();
    for (cell, &(states, dim)) in cfg.cells.iter().enumerate() {
        // drops[s][x][y]: drop of objective x under the controller optimal for y.
        let drops: Vec<Vec<Vec<f64>>> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| -> Result<Vec<Vec<f64>>> {
                let (src, tgt) = random_instance(states, dim, cfg.kind, sample_seed(cfg.seed, cell, s))?;
                let mut controllers = Vec::with_capacity(objs.len());
                let mut optima = Vec::with_capacity(objs.len());
                for &o in objs {
                    let tp = TrackingProblem::new(src.clone(), tgt.clone(), o, Feasible::Cptp)?;
                    let sol = solve_tracking(&tp, &cfg.options)?;
                    optima.push(sol.achieved);
                    controllers.push(sol.controller);
                }
                let mut out = vec![vec![0.0; objs.len()]; objs.len()];
                for (xi, &x) in objs.iter().enumerate() {
                    for (yi, ch) in controllers.iter().enumerate() {
                        if xi == yi {
                            continue;
                        }
                        let v = evaluate_objective(x, ch, &src, &tgt)?;
                        let drop = if x.is_closeness() { optima[xi] - v } else { v - optima[xi] };
                        out[xi][yi] = drop.max(0.0);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for (xi, &x) in objs.iter().enumerate() {
            for (yi, &y) in objs.iter().enumerate() {
                let vals: Vec<f64> = drops.iter().map(|m| 100.0 * m[xi][yi]).collect();
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
                entries.push(CompatibilityEntry {
                    states,
                    dim,
                    reference: x,
                    replacement: y,
                    mean_percent: mean,
                    std_percent: var.sqrt(),
                    samples: vals.len(),
                });
            }
        }
    }
    Ok(CompatibilityTable { entries })
}
