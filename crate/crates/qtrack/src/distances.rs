use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{random_state, DensityMatrix};
use crate::error::{Error, Result};
use crate::mat::{self, c, CMatrix};
use crate::sequence::WeightedSequence;

/// Singular-value threshold, relative to the largest, used for `rank(rho - sigma)`.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in fractional powers.
pub const SPECTRAL_FLOOR: f64 = 1e-14;
/// Final bracket width of the scalar minimization in `chernoff_q`.
pub const CHERNOFF_BRACKET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    F,
    FN,
    FHS,
    Q,
    D,
    H,
    O,
}

impl Measure {
    pub const ALL: [Measure; 7] = [Measure::F, Measure::FN, Measure::FHS, Measure::Q, Measure::D, Measure::H, Measure::O];

    /// True for fidelity-like quantities, which equal one on identical pure states.
    pub fn is_closeness(self) -> bool {
        matches!(self, Measure::F | Measure::FN | Measure::FHS | Measure::Q)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Measure::F => "f",
            Measure::FN => "fn",
            Measure::FHS => "fhs",
            Measure::Q => "q",
            Measure::D => "d",
            Measure::H => "h",
            Measure::O => "o",
        };
        f.write_str(s)
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" => Ok(Measure::F),
            "fn" => Ok(Measure::FN),
            "fhs" => Ok(Measure::FHS),
            "q" => Ok(Measure::Q),
            "d" => Ok(Measure::D),
            "h" => Ok(Measure::H),
            "o" => Ok(Measure::O),
            _ => Err(Error::Invalid(format!("unknown measure '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageScheme {
    /// Priority-weighted mean of per-pair values.
    Avg1,
    /// Value on the block-diagonal direct sums.
    Avg2,
}

impl FromStr for AverageScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "avg1" => Ok(AverageScheme::Avg1),
            "2" | "avg2" => Ok(AverageScheme::Avg2),
            _ => Err(Error::Invalid(format!("unknown averaging scheme '{s}'"))),
        }
    }
}

/// Functionals turning a fidelity-like value into a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    /// `arccos sqrt(v)`
    A,
    /// `sqrt(2 - 2 sqrt(v))`
    B,
    /// `sqrt(1 - v)`
    C,
}

fn check_pair(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::Dimension(format!("states of shape {:?} and {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn fidelity_raw(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_pair(a, b)?;
    // (tr sqrt(sqrt(a) b sqrt(a)))^2 from one full decomposition of `a` and the
    // eigenvalues of the sandwich, with noise-level eigenvalues floored to zero.
    let (la, va) = mat::eigh(a);
    let la = mat::clamp_psd_spectrum(&la)?;
    let mut root_a = va.clone();
    for (j, &l) in la.iter().enumerate() {
        root_a.column_mut(j).scale_mut(floored_pow(l, 0.25));
    }
    let root_a = &root_a * root_a.adjoint();
    let sandwich = mat::hermitize(&(&root_a * b * &root_a));
    let mu = mat::clamp_psd_spectrum(&mat::eigvalsh(&sandwich))?;
    let root: f64 = mu.iter().map(|&m| floored_pow(m, 0.5)).sum();
    Ok(root * root)
}

fn super_fidelity_raw(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_pair(a, b)?;
    let la = 1.0 - mat::inner(a, a);
    let lb = 1.0 - mat::inner(b, b);
    Ok(mat::inner(a, b) + floored_pow(la, 0.5) * floored_pow(lb, 0.5))
}

fn floored_pow(x: f64, s: f64) -> f64 {
    if x <= SPECTRAL_FLOOR {
        0.0
    } else {
        x.powf(s)
    }
}

fn chernoff_raw(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_pair(a, b)?;
    let (la, va) = mat::eigh(a);
    let (lb, vb) = mat::eigh(b);
    let overlap = va.adjoint() * vb;
    let n = la.len();
    let w: Vec<f64> = overlap.iter().map(|z| z.norm_sqr()).collect();
    let f = |s: f64| -> f64 {
        let pa: Vec<f64> = la.iter().map(|&x| floored_pow(x, s)).collect();
        let pb: Vec<f64> = lb.iter().map(|&x| floored_pow(x, 1.0 - s)).collect();
        let mut acc = 0.0;
        for j in 0..n {
            if pb[j] == 0.0 {
                continue;
            }
            for i in 0..n {
                acc += pa[i] * pb[j] * w[i + j * n];
            }
        }
        acc
    };
    Ok(minimize_on_unit_interval(f))
}

/// Grid bracket followed by golden-section search on `[0, 1]`.
fn minimize_on_unit_interval(f: impl Fn(f64) -> f64) -> f64 {
    const GRID: usize = 16;
    let samples: Vec<f64> = (0..=GRID).map(|k| f(k as f64 / GRID as f64)).collect();
    let (kbest, &fbest) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let mut lo = kbest.saturating_sub(1) as f64 / GRID as f64;
    let mut hi = (kbest + 1).min(GRID) as f64 / GRID as f64;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > CHERNOFF_BRACKET {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    fbest.min(f1).min(f2)
}

fn difference(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_pair(a, b)?;
    Ok(mat::hermitize(&(a - b)))
}

/// Value of a measure on two Hermitian matrices that need not have unit trace.
pub fn measure_matrices(tag: Measure, a: &CMatrix, b: &CMatrix) -> Result<f64> {
    match tag {
        Measure::F => fidelity_raw(a, b),
        Measure::FN => super_fidelity_raw(a, b),
        Measure::FHS => {
            check_pair(a, b)?;
            Ok(mat::inner(a, b))
        }
        Measure::Q => chernoff_raw(a, b),
        Measure::D => Ok(0.5 * mat::trace_norm_hermitian(&difference(a, b)?)),
        Measure::H => Ok(mat::frobenius_norm(&difference(a, b)?)),
        Measure::O => Ok(mat::spectral_norm_hermitian(&difference(a, b)?)),
    }
}

pub fn measure(tag: Measure, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measure_matrices(tag, rho.matrix(), sigma.matrix())
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_raw(rho.matrix(), sigma.matrix())
}

/// `tr(rho sigma) + sqrt(1 - tr rho^2) sqrt(1 - tr sigma^2)`.
pub fn super_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    super_fidelity_raw(rho.matrix(), sigma.matrix())
}

pub fn hs_inner(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measure(Measure::FHS, rho, sigma)
}

/// `min_{0<=s<=1} tr(rho^s sigma^(1-s))`.
pub fn chernoff_q(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    chernoff_raw(rho.matrix(), sigma.matrix())
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measure(Measure::D, rho, sigma)
}

/// Frobenius norm of the difference, i.e. the Euclidean norm of `vec(rho - sigma)`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measure(Measure::H, rho, sigma)
}

pub fn spectral_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measure(Measure::O, rho, sigma)
}

/// Tolerance for fidelity values slightly outside `[0, 1]`.
const FUNCTIONAL_RANGE_TOL: f64 = 1e-9;

pub fn metric_functional(kind: Functional, value: f64) -> Result<f64> {
    if !(value >= -FUNCTIONAL_RANGE_TOL && value <= 1.0 + FUNCTIONAL_RANGE_TOL) {
        return Err(Error::Invalid(format!("fidelity value {value} outside [0, 1]")));
    }
    let v = value.clamp(0.0, 1.0);
    Ok(match kind {
        Functional::A => v.sqrt().acos(),
        Functional::B => (2.0 - 2.0 * v.sqrt()).max(0.0).sqrt(),
        Functional::C => (1.0 - v).sqrt(),
    })
}

pub fn sequence_distance(
    tag: Measure,
    scheme: AverageScheme,
    src: &WeightedSequence,
    tgt: &WeightedSequence,
) -> Result<f64> {
    src.check_compatible(tgt)?;
    match scheme {
        AverageScheme::Avg1 => {
            let mut acc = 0.0;
            for ((p, a), (_, b)) in src.items().iter().zip(tgt.items()) {
                acc += p * measure(tag, a, b)?;
            }
            Ok(acc)
        }
        AverageScheme::Avg2 => measure_matrices(tag, &src.direct_sum(), &tgt.direct_sum()),
    }
}

/// `rank(rho - sigma)` with the relative singular-value threshold.
pub fn difference_rank(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<usize> {
    Ok(mat::rank(&difference(rho.matrix(), sigma.matrix())?, RANK_REL_TOL))
}

/// One inequality `lhs <= rhs`; `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rank: usize,
    pub f: f64,
    pub f_n: f64,
    pub f_hs: f64,
    pub d: f64,
    pub h: f64,
    pub o: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|b| b.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|b| b.name == name)
    }
}

/// Evaluate the inequalities linking F, F_N, F_HS, D, H and O.
pub fn check_bounds(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<BoundReport> {
    let f = fidelity(rho, sigma)?;
    let f_n = super_fidelity(rho, sigma)?;
    let f_hs = hs_inner(rho, sigma)?;
    let diff = difference(rho.matrix(), sigma.matrix())?;
    let eig = mat::eigvalsh(&diff);
    let d = 0.5 * eig.iter().map(|v| v.abs()).sum::<f64>();
    let h = eig.iter().map(|v| v * v).sum::<f64>().sqrt();
    let o = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rank = mat::rank(&diff, RANK_REL_TOL);
    let r = rank.max(1) as f64;
    let sf = f.max(0.0).sqrt();
    let one_f = (1.0 - f).max(0.0);
    let one_fn = (1.0 - f_n).max(0.0);

    let mut checks = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64| {
        checks.push(BoundCheck { name: name.to_string(), lhs, rhs, slack: rhs - lhs });
    };
    push("d_lower_f", 1.0 - sf, d);
    push("d_upper_f", d, one_f.sqrt());
    push("d_upper_fn_rank", d, (r / 2.0).sqrt() * one_fn.sqrt());
    push("d_lower_fn", 1.0 - f_n, d);
    push("d_lower_sqrt_fn", 1.0 - f_n.max(0.0).sqrt(), d);
    push("o_le_h", o, h);
    push("h_le_2d", h, 2.0 * d);
    push("2d_le_sqrt_rank_h", 2.0 * d, r.sqrt() * h);
    push("sqrt_rank_h_le_rank_o", r.sqrt() * h, r * o);
    push("h_lower_f", 2.0 / r.sqrt() * (1.0 - sf), h);
    push("h_upper_f", h, 2.0 * one_f.sqrt());
    push("o_lower_f", 2.0 / r * (1.0 - sf), o);
    push("o_upper_f", o, 2.0 * one_f.sqrt());
    push("h_lower_fn", 2.0 / r.sqrt() * one_fn, h);
    push("h_upper_fn", h, (2.0 * one_fn).sqrt());
    push("o_lower_fn", 2.0 / r * one_fn, o);
    push("o_upper_fn", o, (2.0 * one_fn).sqrt());
    push("fhs_le_f", f_hs, f);
    push("f_le_fn", f, f_n);
    Ok(BoundReport { rank, f, f_n, f_hs, d, h, o, checks })
}

/// Isospectral pair `U diag(L) U† / tr L`, `U diag(P L) U† / tr L` built from a two-valued list.
pub fn saturating_pair(u: &CMatrix, spectrum: &[f64], perm: &[usize]) -> Result<(DensityMatrix, DensityMatrix)> {
    let d = spectrum.len();
    if u.shape() != (d, d) || perm.len() != d {
        return Err(Error::Dimension("unitary, spectrum and permutation sizes differ".into()));
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::Invalid("not a permutation".into()));
        }
        seen[p] = true;
    }
    if spectrum.iter().any(|&x| x < 0.0) {
        return Err(Error::Invalid("negative spectrum entry".into()));
    }
    let total: f64 = spectrum.iter().sum();
    if total <= 0.0 {
        return Err(Error::Invalid("spectrum sums to zero".into()));
    }
    let build = |vals: Vec<f64>| {
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, vals.iter().map(|&v| c(v / total, 0.0))));
        DensityMatrix::new(u * diag * u.adjoint())
    };
    let permuted = perm.iter().map(|&p| spectrum[p]).collect();
    Ok((build(spectrum.to_vec())?, build(permuted)?))
}

/// Mean wall time per evaluation of each measure on random mixed states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub measure: Measure,
    pub seconds: f64,
    pub nominal_flops: f64,
}

/// Leading-order operation count of each measure for dimension `d`.
pub fn nominal_flops(tag: Measure, d: usize) -> f64 {
    let n = d as f64;
    let eig = 9.0 * n.powi(3);
    let eigvals = 4.0 * n.powi(3);
    let mul = 2.0 * n.powi(3);
    match tag {
        Measure::FN | Measure::FHS => 2.0 * n * n,
        Measure::H => 2.0 * n * n,
        Measure::D | Measure::O => eigvals,
        // Decomposition of the first state, square root, sandwich, eigenvalues.
        Measure::F => eig + 3.0 * mul + eigvals,
        // Two decompositions, overlap product, and about 60 evaluations of a d^2 sum.
        Measure::Q => 2.0 * eig + mul + 60.0 * 3.0 * n * n,
    }
}

pub fn bench<R: Rng + ?Sized>(measures: &[Measure], d: usize, reps: usize, rng: &mut R) -> Result<Vec<BenchEntry>> {
    let pairs: Vec<(DensityMatrix, DensityMatrix)> =
        (0..reps.max(1)).map(|_| (random_state(d, false, rng), random_state(d, false, rng))).collect();
    let mut out = Vec::new();
    for &m in measures {
        let (a, b) = &pairs[0];
        std::hint::black_box(measure(m, a, b)?);
        let start = Instant::now();
        let mut sink = 0.0;
        for (a, b) in &pairs {
            sink += measure(m, a, b)?;
        }
        let seconds = start.elapsed().as_secs_f64() / pairs.len() as f64;
        std::hint::black_box(sink);
        out.push(BenchEntry { measure: m, seconds, nominal_flops: nominal_flops(m, d) });
    }
    Ok(out)
}
