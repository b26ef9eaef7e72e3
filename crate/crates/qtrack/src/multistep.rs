//! Multi-step tracking of a pair of qubit states: controllers interleaved with
//! known noise channels, each controller chosen as the closed-form single-step
//! optimum toward virtual targets obtained by pulling the final targets back
//! through the later steps.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, PairGeometry, Procedure};
use crate::channels::{self, random_unitary, rotation_of_unitary, Bloch, ChoiMatrix, QubitChannelCanonical};
use crate::error::{Error, Result};
use crate::mat::{c, identity, kron, pauli_x, pauli_y, pauli_z, CMatrix};

/// Qubit channel in Bloch form: `r -> linear * r + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineQubitMap {
    pub linear: Matrix3<f64>,
    pub shift: Vector3<f64>,
}

impl AffineQubitMap {
    pub fn identity() -> Self {
        AffineQubitMap { linear: Matrix3::identity(), shift: Vector3::zeros() }
    }

    pub fn new(linear: Matrix3<f64>, shift: Vector3<f64>) -> Self {
        AffineQubitMap { linear, shift }
    }

    /// Diagonal compressions `lambda` along the axes followed by a translation.
    pub fn diagonal(lambda: [f64; 3], shift: [f64; 3]) -> Self {
        AffineQubitMap { linear: Matrix3::from_diagonal(&Vector3::from(lambda)), shift: Vector3::from(shift) }
    }

    /// Extreme non-unital noise compressing by `(l1, l2, l1 l2)` and translating
    /// along z by `sqrt((1 - l1^2)(1 - l2^2))`.
    pub fn extremal(l1: f64, l2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&l1) || !(0.0..=1.0).contains(&l2) {
            return Err(Error::Invalid(format!("compressions ({l1}, {l2}) outside [0, 1]")));
        }
        Ok(Self::diagonal([l1, l2, l1 * l2], [0.0, 0.0, ((1.0 - l1 * l1) * (1.0 - l2 * l2)).sqrt()]))
    }

    pub fn from_canonical(q: &QubitChannelCanonical) -> Self {
        let (linear, shift) = q.affine();
        AffineQubitMap { linear, shift }
    }

    pub fn from_choi(ch: &ChoiMatrix) -> Result<Self> {
        let (linear, shift) = channels::affine_of_choi(ch)?;
        Ok(AffineQubitMap { linear, shift })
    }

    pub fn apply(&self, r: &Bloch) -> Bloch {
        self.linear * r + self.shift
    }

    /// `self` after `first`.
    pub fn after(&self, first: &AffineQubitMap) -> AffineQubitMap {
        AffineQubitMap { linear: self.linear * first.linear, shift: self.linear * first.shift + self.shift }
    }

    /// Choi matrix `(I + sum_k t_k I (x) s_k + sum_jk T_kj s_j^T (x) s_k) / 2`.
    pub fn choi_matrix(&self) -> CMatrix {
        let p = [pauli_x(), pauli_y(), pauli_z()];
        let mut m = identity(4);
        for k in 0..3 {
            m += kron(&identity(2), &p[k]) * c(self.shift[k], 0.0);
            for j in 0..3 {
                m += kron(&p[j].transpose(), &p[k]) * c(self.linear[(k, j)], 0.0);
            }
        }
        m * c(0.5, 0.0)
    }

    /// Validated Choi matrix; fails for maps that are not completely positive.
    pub fn choi(&self) -> Result<ChoiMatrix> {
        ChoiMatrix::new(self.choi_matrix())
    }
}

/// Pull a weighted target `(Rb, c)` back through `controller` after `noise`.
pub fn backward_target(controller: &AffineQubitMap, noise: &AffineQubitMap, target: &Bloch, trace: f64) -> (Bloch, f64) {
    let composite = controller.after(noise);
    (composite.linear.transpose() * target, trace + target.dot(&composite.shift))
}

/// Push a source Bloch vector through `controller` and then `noise`.
pub fn forward_state(controller: &AffineQubitMap, noise: &AffineQubitMap, source: &Bloch) -> Bloch {
    noise.after(controller).apply(source)
}

/// One controller of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub map: AffineQubitMap,
    /// `None` when the step is degenerate and the fallback was used.
    pub procedure: Option<Procedure>,
    pub canonical: Option<QubitChannelCanonical>,
}

impl StepControl {
    pub fn is_unitary(&self, tol: f64) -> bool {
        let l = self.map.linear;
        (l.transpose() * l - Matrix3::identity()).abs().max() <= tol && self.map.shift.norm() <= tol
    }
}

/// Closed-form optimal controller toward weighted targets. Virtual targets that
/// vanish leave every controller equally good and the identity is returned;
/// coincident sources are best sent to the pure state along the summed target.
pub fn step_controller(sources: &[Bloch; 2], targets: &[Bloch; 2], traces: &[f64; 2]) -> Result<StepControl> {
    let weights = [traces[0].max(targets[0].norm()), traces[1].max(targets[1].norm())];
    match PairGeometry::new(*sources, *targets, weights) {
        Ok(g) => {
            let cons = analytic::construct(&g)?;
            Ok(StepControl {
                map: AffineQubitMap::from_canonical(&cons.canonical),
                procedure: Some(cons.procedure),
                canonical: Some(cons.canonical),
            })
        }
        Err(Error::Degenerate(_)) => {
            let sum = targets[0] + targets[1];
            let coincident = (sources[0] - sources[1]).norm() <= analytic::COINCIDENT_TOL;
            let map = if coincident && sum.norm() > analytic::COLLINEAR_TOL {
                AffineQubitMap::new(Matrix3::zeros(), sum.normalize())
            } else {
                AffineQubitMap::identity()
            };
            Ok(StepControl { map, procedure: None, canonical: None })
        }
        Err(e) => Err(e),
    }
}

/// Sources, final targets and priorities of a two-state chain task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainTask {
    pub sources: [Bloch; 2],
    pub targets: [Bloch; 2],
    pub priorities: [f64; 2],
}

impl ChainTask {
    pub fn new(sources: [Bloch; 2], targets: [Bloch; 2], priorities: [f64; 2]) -> Result<Self> {
        for r in sources.iter().chain(targets.iter()) {
            if !r.iter().all(|v| v.is_finite()) || r.norm() > 1.0 + analytic::GEOMETRY_SLACK {
                return Err(Error::InvalidState(format!("Bloch vector of length {} is not a state", r.norm())));
            }
        }
        if priorities.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::Invalid("priorities must be positive".into()));
        }
        Ok(ChainTask { sources, targets, priorities })
    }

    /// Stabilize the pure pair `(cos a, 0, +-sin a)` with equal priorities.
    pub fn stabilize_pair(half_angle: f64) -> Self {
        let (s, co) = half_angle.sin_cos();
        let pair = [Bloch::new(co, 0.0, s), Bloch::new(co, 0.0, -s)];
        ChainTask { sources: pair, targets: pair, priorities: [0.5, 0.5] }
    }

    pub fn weighted_targets(&self) -> [Bloch; 2] {
        [self.targets[0] * self.priorities[0], self.targets[1] * self.priorities[1]]
    }

    /// Weighted overlap `sum_i pi_i tr[out_i target_i]` from output Bloch vectors.
    pub fn score(&self, outputs: &[Bloch; 2]) -> f64 {
        (0..2).map(|i| 0.5 * self.priorities[i] * (1.0 + self.targets[i].dot(&outputs[i]))).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Fixed-point damping in `(0, 1]`.
    pub damping: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { tol: 1e-8, max_iter: 200, restarts: 8, seed: 0, damping: 0.5 }
    }
}

/// A self-consistent chain: sources `R^(n)`, virtual targets `Rb^(n)` with
/// traces `c^(n)`, and the controllers built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct StepChain {
    pub sources: Vec<[Bloch; 2]>,
    pub targets: Vec<[Bloch; 2]>,
    pub traces: Vec<[f64; 2]>,
    pub controllers: Vec<StepControl>,
    pub residual: f64,
    pub fidelity: f64,
}

/// Best chain over the restarts, with the single-correction baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub chain: StepChain,
    pub single_step: f64,
    pub converged_restarts: usize,
    pub suboptimal: bool,
    pub seed_fidelities: Vec<Option<f64>>,
}

struct ChainSystem<'a> {
    task: &'a ChainTask,
    noises: &'a [AffineQubitMap],
}

impl ChainSystem<'_> {
    fn steps(&self) -> usize {
        self.noises.len() + 1
    }

    fn unknowns(&self) -> usize {
        12 * self.noises.len()
    }

    /// Layout: per noise index `n`, the sources after it then the targets before it.
    fn unpack(&self, x: &DVector<f64>) -> (Vec<[Bloch; 2]>, Vec<[Bloch; 2]>) {
        let n_steps = self.steps();
        let mut src = vec![self.task.sources; n_steps];
        let mut tgt = vec![self.task.weighted_targets(); n_steps];
        for n in 0..self.noises.len() {
            let b = 12 * n;
            let v = |o: usize| Bloch::new(x[b + o], x[b + o + 1], x[b + o + 2]);
            src[n + 1] = [v(0), v(3)];
            tgt[n] = [v(6), v(9)];
        }
        (src, tgt)
    }

    fn pack(&self, src: &[[Bloch; 2]], tgt: &[[Bloch; 2]]) -> DVector<f64> {
        let mut x = DVector::zeros(self.unknowns());
        for n in 0..self.noises.len() {
            let b = 12 * n;
            for (o, v) in [(0, src[n + 1][0]), (3, src[n + 1][1]), (6, tgt[n][0]), (9, tgt[n][1])] {
                x.rows_mut(b + o, 3).copy_from(&v);
            }
        }
        x
    }

    /// Traces of the virtual targets given the controllers.
    fn traces(&self, tgt: &[[Bloch; 2]], ctrl: &[StepControl]) -> Vec<[f64; 2]> {
        let n_steps = self.steps();
        let mut tr = vec![self.task.priorities; n_steps];
        for n in (0..n_steps - 1).rev() {
            for i in 0..2 {
                tr[n][i] = backward_target(&ctrl[n + 1].map, &self.noises[n], &tgt[n + 1][i], tr[n + 1][i]).1;
            }
        }
        tr
    }

    fn controllers(&self, src: &[[Bloch; 2]], tgt: &[[Bloch; 2]]) -> Result<Vec<StepControl>> {
        let n_steps = self.steps();
        let mut ctrl: Vec<StepControl> = Vec::with_capacity(n_steps);
        let placeholder = [1.0, 1.0];
        for n in 0..n_steps {
            ctrl.push(step_controller(&src[n], &tgt[n], &placeholder)?);
        }
        Ok(ctrl)
    }

    /// Right-hand sides of the backward and forward recursions at `x`.
    fn map(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (src, tgt) = self.unpack(x);
        let ctrl = self.controllers(&src, &tgt)?;
        let mut new_src = src.clone();
        let mut new_tgt = tgt.clone();
        for n in 0..self.noises.len() {
            for i in 0..2 {
                new_tgt[n][i] = backward_target(&ctrl[n + 1].map, &self.noises[n], &tgt[n + 1][i], 0.0).0;
                new_src[n + 1][i] = forward_state(&ctrl[n].map, &self.noises[n], &src[n][i]);
            }
        }
        Ok(self.pack(&new_src, &new_tgt))
    }

    fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(x - self.map(x)?)
    }

    /// Consistent starting point from given controllers on the first `N - 1` steps.
    fn seed(&self, first: &[AffineQubitMap]) -> Result<DVector<f64>> {
        let n_steps = self.steps();
        let mut src = vec![self.task.sources; n_steps];
        for n in 0..n_steps - 1 {
            for i in 0..2 {
                src[n + 1][i] = forward_state(&first[n], &self.noises[n], &src[n][i]);
            }
        }
        let mut tgt = vec![self.task.weighted_targets(); n_steps];
        let last = step_controller(&src[n_steps - 1], &tgt[n_steps - 1], &self.task.priorities)?;
        let mut next = last.map;
        for n in (0..n_steps - 1).rev() {
            for i in 0..2 {
                tgt[n][i] = backward_target(&next, &self.noises[n], &tgt[n + 1][i], 0.0).0;
            }
            next = first[n];
        }
        Ok(self.pack(&src, &tgt))
    }

    fn jacobian(&self, x: &DVector<f64>, fx: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            xp[k] += h;
            let fp = self.residual(&xp)?;
            j.set_column(k, &((fp - fx) / h));
        }
        Ok(j)
    }

    /// Damped fixed-point sweeps alternated with finite-difference Newton steps.
    fn solve(&self, mut x: DVector<f64>, opts: &ChainOptions) -> Result<(DVector<f64>, f64)> {
        let mut fx = self.residual(&x)?;
        let mut norm = fx.amax();
        for _ in 0..opts.max_iter {
            if norm <= opts.tol {
                return Ok((x, norm));
            }
            let mut stepped = false;
            if let Ok(jac) = self.jacobian(&x, &fx) {
                if let Some(dx) = jac.lu().solve(&fx) {
                    let mut a = 1.0;
                    while a > 1e-4 {
                        let xn = &x - &dx * a;
                        if let Ok(fxn) = self.residual(&xn) {
                            let nn = fxn.amax();
                            if nn < norm {
                                x = xn;
                                fx = fxn;
                                norm = nn;
                                stepped = true;
                                break;
                            }
                        }
                        a *= 0.5;
                    }
                }
            }
            if !stepped {
                let xn = &x - &fx * opts.damping;
                fx = self.residual(&xn)?;
                x = xn;
                norm = fx.amax();
            }
        }
        Ok((x, norm))
    }

    fn chain(&self, x: &DVector<f64>, residual: f64) -> Result<StepChain> {
        let (src, tgt) = self.unpack(x);
        let ctrl = self.controllers(&src, &tgt)?;
        let traces = self.traces(&tgt, &ctrl);
        let fidelity = self.simulate(&ctrl);
        Ok(StepChain { sources: src, targets: tgt, traces, controllers: ctrl, residual, fidelity })
    }

    /// End-to-end weighted overlap of the controllers acting on the true sources.
    fn simulate(&self, ctrl: &[StepControl]) -> f64 {
        let mut out = self.task.sources;
        for (n, step) in ctrl.iter().enumerate() {
            for r in out.iter_mut() {
                *r = step.map.apply(r);
                if n < self.noises.len() {
                    *r = self.noises[n].apply(r);
                }
            }
        }
        self.task.score(&out)
    }
}

/// Fidelity of correcting only at the end: the noises act on the sources and a
/// single closed-form optimal controller follows.
pub fn single_step_fidelity(task: &ChainTask, noises: &[AffineQubitMap]) -> Result<f64> {
    let mut src = task.sources;
    for noise in noises {
        src = src.map(|r| noise.apply(&r));
    }
    let ctrl = step_controller(&src, &task.weighted_targets(), &task.priorities)?;
    Ok(task.score(&src.map(|r| ctrl.map.apply(&r))))
}

/// End-to-end overlap of a chain of controllers, computed by composing Choi matrices.
pub fn chain_fidelity_by_composition(task: &ChainTask, noises: &[AffineQubitMap], ctrl: &[StepControl]) -> Result<f64> {
    if ctrl.len() != noises.len() + 1 {
        return Err(Error::Dimension(format!("{} controllers for {} noises", ctrl.len(), noises.len())));
    }
    let mut total = ChoiMatrix::from_matrix_lossy(ctrl[0].map.choi_matrix())?;
    for n in 0..noises.len() {
        total = channels::compose(&total, &ChoiMatrix::from_matrix_lossy(noises[n].choi_matrix())?)?;
        total = channels::compose(&total, &ChoiMatrix::from_matrix_lossy(ctrl[n + 1].map.choi_matrix())?)?;
    }
    let mut value = 0.0;
    for i in 0..2 {
        let rho = channels::bloch_matrix(1.0, &task.sources[i]);
        let out = channels::apply_matrix(&total, &rho)?;
        value += task.priorities[i] * crate::mat::inner(&out, &channels::bloch_matrix(1.0, &task.targets[i]));
    }
    Ok(value)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> AffineQubitMap {
    AffineQubitMap::new(rotation_of_unitary(&random_unitary(2, rng)), Vector3::zeros())
}

/// Solve the coupled backward/forward system from several starting chains and
/// keep the converged solution with the best end-to-end fidelity.
///
/// Seeds: all intermediate steps idle; intermediate steps greedily tracking the
/// final targets; then random rotations on the first step.
pub fn solve_chain(task: &ChainTask, noises: &[AffineQubitMap], opts: &ChainOptions) -> Result<ChainSolution> {
    if noises.is_empty() {
        return Err(Error::Invalid("a chain needs at least two steps".into()));
    }
    if !(opts.tol > 0.0) || !(opts.damping > 0.0 && opts.damping <= 1.0) || opts.restarts == 0 {
        return Err(Error::Invalid("chain options need positive tolerance, damping in (0, 1] and restarts".into()));
    }
    let sys = ChainSystem { task, noises };
    let single_step = single_step_fidelity(task, noises)?;
    let idle = vec![AffineQubitMap::identity(); noises.len()];
    let mut seeds = vec![idle.clone()];
    if opts.restarts > 1 {
        let mut greedy = Vec::with_capacity(noises.len());
        let mut src = task.sources;
        for noise in noises {
            let ctrl = step_controller(&src, &task.weighted_targets(), &task.priorities)?.map;
            src = src.map(|r| forward_state(&ctrl, noise, &r));
            greedy.push(ctrl);
        }
        seeds.push(greedy);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while seeds.len() < opts.restarts {
        let mut s = idle.clone();
        s[0] = random_rotation(&mut rng);
        for step in s.iter_mut().skip(1) {
            if rng.random_bool(0.5) {
                *step = random_rotation(&mut rng);
            }
        }
        seeds.push(s);
    }

    let results: Vec<Option<StepChain>> = seeds
        .par_iter()
        .map(|s| {
            let x0 = sys.seed(s).ok()?;
            let (x, res) = sys.solve(x0, opts).ok()?;
            (res <= opts.tol).then(|| sys.chain(&x, res).ok()).flatten()
        })
        .collect();
    let seed_fidelities: Vec<Option<f64>> = results.iter().map(|r| r.as_ref().map(|c| c.fidelity)).collect();
    let converged_restarts = results.iter().filter(|r| r.is_some()).count();
    let best = results
        .into_iter()
        .flatten()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .ok_or_else(|| Error::Solver(format!("no restart converged to tolerance {:.1e}", opts.tol)))?;
    Ok(ChainSolution {
        suboptimal: best.fidelity < single_step - 1e-9,
        chain: best,
        single_step,
        converged_restarts,
        seed_fidelities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepClass {
    Advantage,
    Tie,
    SuboptimalConverged,
    NotConverged,
}

impl std::fmt::Display for SweepClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepClass::Advantage => "advantage",
            SweepClass::Tie => "tie",
            SweepClass::SuboptimalConverged => "suboptimal-converged",
            SweepClass::NotConverged => "not-converged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub t3: f64,
    pub class: SweepClass,
    pub f_multi: f64,
    pub f_single: f64,
    /// First controller is a rotation.
    pub first_unitary: bool,
}

/// Gains below this relative margin count as ties.
pub const TIE_MARGIN: f64 = 1e-6;

/// Two-step stabilization of `task` under the extremal noise at every `(l1, l2)` pair.
pub fn sweep_2step(l1_grid: &[f64], l2_grid: &[f64], task: &ChainTask, opts: &ChainOptions) -> Result<Vec<SweepPoint>> {
    let pts: Vec<(f64, f64)> = l1_grid.iter().flat_map(|&a| l2_grid.iter().map(move |&b| (a, b))).collect();
    pts.par_iter()
        .map(|&(l1, l2)| {
            let noise = AffineQubitMap::extremal(l1, l2)?;
            let f_single = single_step_fidelity(task, &[noise])?;
            let (class, f_multi, first_unitary) = match solve_chain(task, &[noise], opts) {
                Ok(sol) => {
                    let f = sol.chain.fidelity;
                    let class = if f > f_single * (1.0 + TIE_MARGIN) {
                        SweepClass::Advantage
                    } else if f >= f_single - 1e-9 {
                        SweepClass::Tie
                    } else {
                        SweepClass::SuboptimalConverged
                    };
                    (class, f, sol.chain.controllers[0].is_unitary(1e-6))
                }
                Err(e) if e.is_solver() => (SweepClass::NotConverged, f64::NAN, false),
                Err(e) => return Err(e),
            };
            Ok(SweepPoint { l1, l2, l3: l1 * l2, t3: noise.shift.z, class, f_multi, f_single, first_unitary })
        })
        .collect()
}
