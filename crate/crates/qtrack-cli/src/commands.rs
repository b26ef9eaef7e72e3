use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::Args;
use qtrack::analytic::{self, PairGeometry};
use qtrack::applications::{self, DephasingTask};
use qtrack::channels::{self, Bloch, ChoiMatrix, KrausRoute};
use qtrack::distances::{self, Measure};
use qtrack::mat::MatrixJson;
use qtrack::multistep::{self, AffineQubitMap, ChainOptions, ChainTask};
use qtrack::tracking::{self, CompatibilityConfig, Feasible, Objective, TrackingOptions, TrackingProblem, TransformKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::input::{self, ChainTaskJson, ChannelJson, NoiseJson, PairJson, StateJson, TaskJson};
use crate::output::{Cell, Report, Table};
use crate::{Command, Failure};

/// Largest disagreement between the SDP and closed-form optima counted as agreement.
const AGREEMENT_TOL: f64 = 1e-6;

pub fn run(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Distances(a) => distances(a),
        Command::Channel(a) => channel(a),
        Command::Solve(a) => solve(a),
        Command::Analytic(a) => analytic_cmd(a),
        Command::Stabilize(a) => stabilize(a),
        Command::Discriminate(a) => discriminate(a),
        Command::Clone(a) => clone(a),
        Command::AuCheck(a) => au_check(a),
        Command::Multistep(a) => multistep_cmd(a),
        Command::Compat(a) => compat(a),
        Command::Bench(a) => bench(a),
    }
}

fn bloch_json(b: &Bloch) -> [f64; 3] {
    [b.x, b.y, b.z]
}

fn matrix_json(m: &qtrack::mat::CMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("matrix serializes")
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::validation(format!("{name} must be positive, got {v}")))
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::validation(format!("{what} is randomized; pass --seed")))
}

/// Seed of the `k`-th task derived from a master seed.
fn task_seed(master: u64, k: usize) -> u64 {
    master.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64)
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    /// JSON file with fields `rho` and `sigma`, each `{"bloch": [..]}` or `{"matrix": {..}}`.
    #[arg(long, conflicts_with = "scatter")]
    pub input: Option<PathBuf>,
    /// Sample random mixed pairs and emit trace distance against `1 - F_N`.
    #[arg(long)]
    pub scatter: bool,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn distances(a: &DistancesArgs) -> Result<Report, Failure> {
    if a.scatter {
        let seed = require_seed(a.seed, "--scatter")?;
        if a.dim < 2 || a.samples == 0 {
            return Err(Failure::validation("--scatter needs --dim >= 2 and --samples >= 1"));
        }
        let rows: Vec<(f64, f64, usize)> = (0..a.samples)
            .into_par_iter()
            .map(|k| -> Result<(f64, f64, usize), Failure> {
                let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, k));
                let rho = channels::random_state(a.dim, false, &mut rng);
                let sigma = channels::random_state(a.dim, false, &mut rng);
                let d = distances::trace_distance(&rho, &sigma)?;
                let f_n = distances::measure(Measure::FN, &rho, &sigma)?;
                Ok((d, 1.0 - f_n, distances::difference_rank(&rho, &sigma)?))
            })
            .collect::<Result<_, _>>()?;
        let json = json!({
            "dim": a.dim,
            "seed": seed,
            "points": rows.iter().map(|r| json!({"trace_distance": r.0, "one_minus_fn": r.1, "rank": r.2})).collect::<Vec<_>>(),
        });
        let table = Table {
            header: vec!["dim", "trace_distance", "one_minus_fn", "rank"],
            rows: rows.iter().map(|r| vec![a.dim.into(), r.0.into(), r.1.into(), r.2.into()]).collect(),
        };
        return Ok(Report { json, table: Some(table) });
    }
    let path = a.input.as_ref().ok_or_else(|| Failure::validation("pass --input or --scatter"))?;
    let (rho, sigma) = input::read_json::<PairJson>(path)?.states()?;
    let mut measures = serde_json::Map::new();
    for m in Measure::ALL {
        measures.insert(m.to_string(), json!(distances::measure(m, &rho, &sigma)?));
    }
    let bounds = distances::check_bounds(&rho, &sigma)?;
    Ok(Report::json(json!({
        "dim": rho.dim(),
        "measures": measures,
        "bounds": to_value(&bounds),
        "min_slack": bounds.min_slack(),
    })))
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// JSON file with one of `kraus` (list of matrices), `choi` or `unitary`.
    #[arg(long)]
    pub input: PathBuf,
    /// Also apply the channel to this state.
    #[arg(long)]
    pub apply: Option<PathBuf>,
}

fn channel(a: &ChannelArgs) -> Result<Report, Failure> {
    let ch: ChoiMatrix = input::read_json::<ChannelJson>(&a.input)?.to_choi()?;
    let cptp = channels::check_cptp(&ch);
    if !(cptp.cp && cptp.tp) {
        return Err(Failure::validation(format!(
            "not CPTP: min eigenvalue {:.3e}, trace-preservation residual {:.3e}",
            cptp.min_eig, cptp.tp_residual
        )));
    }
    let kraus = channels::kraus_from_choi(&ch, KrausRoute::Eigen)?;
    let mut out = json!({
        "dim": ch.dim(),
        "cptp": to_value(&cptp),
        "ppt": to_value(&channels::check_ppt(&ch)),
        "kraus_count": kraus.ops.len(),
        "choi": matrix_json(ch.matrix()),
    });
    if ch.dim() == 2 {
        let q = channels::canonical_qubit(&ch)?;
        let (linear, shift) = channels::affine_of_choi(&ch)?;
        let rows: Vec<[f64; 3]> = (0..3).map(|i| [linear[(i, 0)], linear[(i, 1)], linear[(i, 2)]]).collect();
        out["canonical"] = json!({"mu": q.mu, "s": q.s, "v": matrix_json(&q.v), "u": matrix_json(&q.u)});
        out["affine"] = json!({"linear": rows, "shift": bloch_json(&shift)});
        out["rsw"] = to_value(&channels::check_rsw(q.mu, q.s));
    }
    if let Some(p) = &a.apply {
        let rho = input::read_json::<StateJson>(p)?.to_state()?;
        let outp = channels::apply(&ch, &rho)?;
        out["output"] = match outp.bloch() {
            Some(b) => json!({"bloch": bloch_json(&b)}),
            None => json!({"matrix": matrix_json(outp.matrix())}),
        };
    }
    Ok(Report::json(out))
}

fn parse_objective(s: &str) -> Result<Objective, Failure> {
    let canonical = match s.to_ascii_lowercase().as_str() {
        "fhs1" => "fhsavg1",
        "fhs2" => "fhsavg2",
        "d" => "davg",
        "h21" => "h2avg1",
        "h2" => "havg2",
        "o2" => "oavg2",
        other => return other.parse().map_err(Failure::from),
    };
    Ok(canonical.parse()?)
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON file with `sources`, `targets` and optional `priorities`.
    #[arg(long)]
    pub task: PathBuf,
    /// davg, h2avg1, havg2, oavg2, fhsavg1, fhsavg2 (short forms d, h21, h2, o2, fhs1, fhs2).
    #[arg(long, default_value = "fhsavg1")]
    pub objective: String,
    /// cptp or ppt.
    #[arg(long, default_value = "cptp")]
    pub feasible: String,
    /// Relative duality-gap tolerance of the certificate.
    #[arg(long, default_value_t = 1e-7)]
    pub gap_tol: f64,
}

fn solve(a: &SolveArgs) -> Result<Report, Failure> {
    let objective = parse_objective(&a.objective)?;
    let feasible: Feasible = a.feasible.parse()?;
    let gap = positive("--gap-tol", a.gap_tol)?;
    let task: TaskJson = input::read_json(&a.task)?;
    let (src, tgt) = task.sequences()?;
    let tp = TrackingProblem::new(src, tgt, objective, feasible)?;
    let mut opts = TrackingOptions::default();
    opts.certificate.gap = gap;
    let sol = tracking::solve_tracking(&tp, &opts)?;
    let mut out = json!({
        "objective": objective.name(),
        "feasible": feasible.to_string(),
        "value": sol.value,
        "achieved": sol.achieved,
        "status": to_value(&sol.status),
        "iterations": sol.iterations,
        "certificate": to_value(&sol.certificate),
        "cptp": to_value(&sol.cptp),
        "ppt": to_value(&sol.ppt),
        "choi": matrix_json(sol.controller.matrix()),
    });
    if let Some(b) = &sol.output_bloch {
        out["output_bloch"] = json!(b.iter().map(bloch_json).collect::<Vec<_>>());
    }
    if objective == Objective::Fhsavg1 && feasible == Feasible::Cptp && tp.len() == 2 && tp.dim() == 2 {
        let (s, t, p) = task.pair()?;
        let g = PairGeometry::from_states([&s[0], &s[1]], [&t[0], &t[1]], p)?;
        let analytic = analytic::optimal_fidelity(&g);
        let diff = (analytic - sol.achieved).abs();
        out["analytic"] = json!({"fidelity": analytic, "abs_diff": diff, "agree": diff <= AGREEMENT_TOL});
    }
    Ok(Report::json(out))
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// JSON file with two qubit `sources`, two `targets` and optional `priorities`.
    #[arg(long)]
    pub task: PathBuf,
}

fn analytic_cmd(a: &AnalyticArgs) -> Result<Report, Failure> {
    let task: TaskJson = input::read_json(&a.task)?;
    let (s, t, p) = task.pair()?;
    let g = PairGeometry::from_states([&s[0], &s[1]], [&t[0], &t[1]], p)?;
    let r = analytic::track_pair(&g)?;
    let q = &r.construction.canonical;
    let choi = channels::assemble_qubit_choi(q)?;
    let outputs: Vec<[f64; 3]> = s
        .iter()
        .map(|x| channels::apply(&choi, x).map(|o| bloch_json(&o.bloch().expect("qubit"))))
        .collect::<qtrack::Result<_>>()?;
    Ok(Report::json(json!({
        "fidelity": r.fidelity,
        "procedure": r.procedure.to_string(),
        "indicator": r.omega,
        "non_unique": r.non_unique,
        "canonical": {"mu": q.mu, "s": q.s, "v": matrix_json(&q.v), "u": matrix_json(&q.u)},
        "output_bloch": outputs,
        "certificate": {
            "multipliers": r.certificate.x,
            "lambda_min": r.certificate.lambda_min,
            "duality_gap": r.certificate.duality_gap,
            "slackness": r.certificate.slackness,
        },
        "choi": matrix_json(choi.matrix()),
    })))
}

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    /// Dephasing probability in [0, 1/2].
    #[arg(long, required_unless_present = "grid")]
    pub p: Option<f64>,
    /// Half-angle of the state pair in [0, pi/2].
    #[arg(long, required_unless_present = "grid")]
    pub theta: Option<f64>,
    /// Grid of n x n points: p = 0.5 k / n (k = 1..n), theta = (pi/2) j / (n + 1) (j = 1..n).
    #[arg(long, conflicts_with_all = ["p", "theta"])]
    pub grid: Option<usize>,
}

fn stabilize(a: &StabilizeArgs) -> Result<Report, Failure> {
    if let Some(n) = a.grid {
        if n == 0 {
            return Err(Failure::validation("--grid must be at least 1"));
        }
        let pts: Vec<(f64, f64)> = (1..=n)
            .flat_map(|k| (1..=n).map(move |j| (0.5 * k as f64 / n as f64, FRAC_PI_2 * j as f64 / (n + 1) as f64)))
            .collect();
        let rows: Vec<(f64, f64, applications::StabilizationFidelities)> = pts
            .par_iter()
            .map(|&(p, th)| Ok((p, th, applications::stabilization_fidelities(&DephasingTask::new(p, th)?))))
            .collect::<Result<_, Failure>>()?;
        let scan = applications::advantage_scan(n, n)?;
        let json = json!({
            "points": rows.iter().map(|(p, th, f)| json!({"p": p, "theta": th, "fidelities": to_value(f)})).collect::<Vec<_>>(),
            "advantage": to_value(&scan),
        });
        let table = Table {
            header: vec!["p", "theta", "ddr1", "ddr2", "sdr", "dn", "qc"],
            rows: rows
                .iter()
                .map(|(p, th, f)| vec![(*p).into(), (*th).into(), f.ddr1.into(), f.ddr2.into(), f.sdr.into(), f.dn.into(), f.qc_opt.into()])
                .collect(),
        };
        return Ok(Report { json, table: Some(table) });
    }
    let (p, theta) = (a.p.expect("clap enforces --p"), a.theta.expect("clap enforces --theta"));
    let t = DephasingTask::new(p, theta)?;
    let f = applications::stabilization_fidelities(&t);
    let classical = applications::classical_optimality_certificate(&t);
    let quantum = applications::quantum_optimality_certificate(&t);
    let g = t.geometry()?;
    let r = analytic::track_pair(&g)?;
    Ok(Report::json(json!({
        "p": p,
        "theta": theta,
        "fidelities": to_value(&f),
        "f_dif": f.f_dif,
        "classical_certificate": to_value(&classical),
        "quantum_certificate": to_value(&quantum),
        "analytic": {"fidelity": r.fidelity, "procedure": r.procedure.to_string()},
    })))
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// JSON file with qubit states `rho` and `sigma`.
    #[arg(long)]
    pub input: PathBuf,
    /// Prior of `rho`.
    #[arg(long, default_value_t = 0.5)]
    pub p1: f64,
}

fn discriminate(a: &DiscriminateArgs) -> Result<Report, Failure> {
    let (rho, sigma) = input::read_json::<PairJson>(&a.input)?.states()?;
    let d = applications::discriminate(&rho, &sigma, a.p1)?;
    Ok(Report::json(to_value(&d)))
}

#[derive(Debug, Args)]
pub struct CloneArgs {
    /// Half-angle between the two input Bloch vectors, in [0, pi/4).
    #[arg(long)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub pi1: f64,
}

fn clone(a: &CloneArgs) -> Result<Report, Failure> {
    let f = applications::clone_fidelity(a.phi, a.pi1)?;
    let (theta, theta_bar) = applications::clone_half_angles(a.phi);
    Ok(Report::json(json!({
        "phi": a.phi,
        "pi1": a.pi1,
        "fidelity": f,
        "source_half_angle": theta,
        "target_half_angle": theta_bar,
    })))
}

#[derive(Debug, Args)]
pub struct AuCheckArgs {
    /// JSON file with two qubit `sources` and two `targets`; priorities are ignored.
    #[arg(long)]
    pub task: PathBuf,
}

fn au_check(a: &AuCheckArgs) -> Result<Report, Failure> {
    let (s, t, _) = input::read_json::<TaskJson>(&a.task)?.pair()?;
    let r = applications::alberti_uhlmann(&s[0], &s[1], &t[0], &t[1], &applications::default_t_grid())?;
    Ok(Report::json(to_value(&r)))
}

#[derive(Debug, Args)]
pub struct MultistepArgs {
    /// Number of corrections N; the noise file lists N - 1 noise steps.
    #[arg(long, required_unless_present = "sweep")]
    pub steps: Option<usize>,
    /// JSON list of noise steps, each `{"extremal": [l1, l2]}` or `{"linear": [[..]], "shift": [..]}`.
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    pub noise: Option<PathBuf>,
    /// JSON task: `{"half_angle": a}` or `{"sources", "targets", "priorities"}`. Defaults to half-angle pi/4.
    #[arg(long)]
    pub task: Option<PathBuf>,
    /// Sweep two-step extremal noise over l1, l2 = k / (n - 1), k = 0..n-1.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long)]
    pub seed: u64,
    /// Residual tolerance of the chain solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

fn multistep_cmd(a: &MultistepArgs) -> Result<Report, Failure> {
    let task = match &a.task {
        Some(p) => input::read_json::<ChainTaskJson>(p)?.to_task()?,
        None => ChainTask::stabilize_pair(std::f64::consts::FRAC_PI_4),
    };
    if a.restarts == 0 {
        return Err(Failure::validation("--restarts must be at least 1"));
    }
    let opts = ChainOptions {
        tol: positive("--tol", a.tol)?,
        max_iter: a.max_iter,
        restarts: a.restarts,
        seed: a.seed,
        ..ChainOptions::default()
    };
    if a.sweep {
        if a.grid < 2 {
            return Err(Failure::validation("--grid must be at least 2"));
        }
        let grid: Vec<f64> = (0..a.grid).map(|k| k as f64 / (a.grid - 1) as f64).collect();
        let pts = multistep::sweep_2step(&grid, &grid, &task, &opts)?;
        let table = Table {
            header: vec!["l1", "l2", "t3", "class", "f_multi", "f_single"],
            rows: pts
                .iter()
                .map(|p| vec![p.l1.into(), p.l2.into(), p.t3.into(), Cell::Text(p.class.to_string()), p.f_multi.into(), p.f_single.into()])
                .collect(),
        };
        return Ok(Report { json: json!({"points": to_value(&pts)}), table: Some(table) });
    }
    let steps = a.steps.expect("clap enforces --steps");
    let noises: Vec<AffineQubitMap> = input::read_json::<Vec<NoiseJson>>(a.noise.as_ref().expect("clap enforces --noise"))?
        .iter()
        .map(NoiseJson::to_map)
        .collect::<Result<_, _>>()?;
    if steps < 2 || noises.len() + 1 != steps {
        return Err(Failure::validation(format!("--steps {steps} needs {} noise steps, file has {}", steps.saturating_sub(1), noises.len())));
    }
    let sol = multistep::solve_chain(&task, &noises, &opts)?;
    let c = &sol.chain;
    let step_json: Vec<Value> = (0..steps)
        .map(|k| {
            let ctrl = &c.controllers[k];
            let rows: Vec<[f64; 3]> = (0..3).map(|i| [ctrl.map.linear[(i, 0)], ctrl.map.linear[(i, 1)], ctrl.map.linear[(i, 2)]]).collect();
            json!({
                "sources": c.sources[k].iter().map(bloch_json).collect::<Vec<_>>(),
                "virtual_targets": c.targets[k].iter().map(bloch_json).collect::<Vec<_>>(),
                "traces": c.traces[k],
                "procedure": ctrl.procedure.map(|p| p.to_string()),
                "unitary": ctrl.is_unitary(1e-6),
                "linear": rows,
                "shift": bloch_json(&ctrl.map.shift),
            })
        })
        .collect();
    Ok(Report::json(json!({
        "fidelity": c.fidelity,
        "single_step": sol.single_step,
        "relative_gain": c.fidelity / sol.single_step - 1.0,
        "residual": c.residual,
        "converged_restarts": sol.converged_restarts,
        "suboptimal": sol.suboptimal,
        "seed_fidelities": sol.seed_fidelities,
        "steps": step_json,
    })))
}

#[derive(Debug, Args)]
pub struct CompatArgs {
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub states: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// pure-pure, mixed-pure or mixed-mixed.
    #[arg(long, default_value = "mixed-pure")]
    pub kind: String,
}

fn compat(a: &CompatArgs) -> Result<Report, Failure> {
    if a.samples == 0 || a.states < 1 || a.dim < 2 {
        return Err(Failure::validation("--samples >= 1, --states >= 1 and --dim >= 2 required"));
    }
    let kind: TransformKind = a.kind.parse()?;
    let cfg = CompatibilityConfig { cells: vec![(a.states, a.dim)], samples: a.samples, seed: a.seed, kind, ..Default::default() };
    let table = tracking::compatibility_experiment(&cfg)?;
    let ordering: Vec<&str> = table.ordering(a.states, a.dim, Objective::Davg).into_iter().map(Objective::name).collect();
    let csv = Table {
        header: vec!["states", "dim", "reference", "replacement", "mean_percent", "std_percent"],
        rows: table
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.states.into(),
                    e.dim.into(),
                    e.reference.name().into(),
                    e.replacement.name().into(),
                    e.mean_percent.into(),
                    e.std_percent.into(),
                ]
            })
            .collect(),
    };
    Ok(Report { json: json!({"entries": to_value(&table.entries), "davg_ordering": ordering}), table: Some(csv) })
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
}

/// Measures whose relative cost is compared: fidelity, superfidelity, trace distance, Chernoff.
const TIMED: [Measure; 4] = [Measure::F, Measure::FN, Measure::D, Measure::Q];

fn bench(a: &BenchArgs) -> Result<Report, Failure> {
    if a.dim < 2 || a.reps == 0 {
        return Err(Failure::validation("--dim >= 2 and --reps >= 1 required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let entries = distances::bench(&Measure::ALL, a.dim, a.reps, &mut rng)?;
    let mut order: Vec<&distances::BenchEntry> = entries.iter().filter(|e| TIMED.contains(&e.measure)).collect();
    order.sort_by(|x, y| x.seconds.total_cmp(&y.seconds));
    let json = json!({
        "dim": a.dim,
        "entries": to_value(&entries),
        "ordering": order.iter().map(|e| e.measure.to_string()).collect::<Vec<_>>(),
        "fn_fastest": order.first().map(|e| e.measure) == Some(Measure::FN),
        "q_slowest": order.last().map(|e| e.measure) == Some(Measure::Q),
    });
    let table = Table {
        header: vec!["measure", "seconds", "nominal_flops"],
        rows: entries.iter().map(|e| vec![e.measure.to_string().into(), e.seconds.into(), e.nominal_flops.into()]).collect(),
    };
    Ok(Report { json, table: Some(table) })
}
