//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::rng;
use nalgebra::Vector3;
use qtrack::analytic::{self, PairGeometry};
use qtrack::applications::{self, stabilization_fidelities, DephasingTask};
use qtrack::channels::{self, Bloch, DensityMatrix, KrausRoute};
use qtrack::distances::{self, Functional, Measure};
use qtrack::mat::{self, c, from_real, kron, kron_vec, Subsystem};
use qtrack::multistep::{self, AffineQubitMap, ChainOptions, ChainTask, SweepClass};
use qtrack::sequence::WeightedSequence;
use qtrack::tracking::{
    self, CompatibilityConfig, Feasible, Objective, TrackingOptions, TrackingProblem, TransformKind,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the failure is a documented limitation rather than a defect.
    known: Option<&'static str>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, known: None }
    }
}

fn report(id: &str, title: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let line = format!(
        "{id:<6} {} {title}: {} [{:.1}s]{}\n",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        start.elapsed().as_secs_f64(),
        out.known.map(|k| format!(" (known limitation: {k})")).unwrap_or_default()
    );
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(line.as_bytes());
    let _ = stdout.flush();
    out
}

fn random_direction(r: &mut ChaCha8Rng) -> Bloch {
    loop {
        let v = Bloch::from_fn(|_, _| StandardNormal.sample(r));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// Pure with probability one half, otherwise uniform in the ball.
fn random_bloch(r: &mut ChaCha8Rng) -> Bloch {
    let len = if r.random_bool(0.5) { 1.0 } else { r.random::<f64>().cbrt() };
    random_direction(r) * len
}

fn qubit(v: &Bloch) -> DensityMatrix {
    DensityMatrix::from_bloch(v).unwrap()
}

fn pair_sequence(states: [DensityMatrix; 2], p: [f64; 2]) -> WeightedSequence {
    WeightedSequence::new(vec![(p[0], states[0].clone()), (p[1], states[1].clone())]).unwrap()
}

fn random_pair_task(r: &mut ChaCha8Rng) -> ([DensityMatrix; 2], [DensityMatrix; 2], [f64; 2]) {
    let p = r.random_range(0.05..0.95);
    let src = [qubit(&random_bloch(r)), qubit(&random_bloch(r))];
    let tgt = [qubit(&random_bloch(r)), qubit(&random_bloch(r))];
    (src, tgt, [p, 1.0 - p])
}

fn geometry(src: &[DensityMatrix; 2], tgt: &[DensityMatrix; 2], p: [f64; 2]) -> PairGeometry {
    PairGeometry::from_states([&src[0], &src[1]], [&tgt[0], &tgt[1]], p).unwrap()
}

fn criterion_1() -> Outcome {
    const INSTANCES: usize = 200;
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut r = rng(1001);
    let opts = TrackingOptions::default();
    assert_eq!(opts.sdp.gap_tol, 1e-9);
    let mut worst = 0.0f64;
    for _ in 0..INSTANCES {
        let (src, tgt, p) = random_pair_task(&mut r);
        let f = analytic::optimal_fidelity(&geometry(&src, &tgt, p));
        let tp = TrackingProblem::new(pair_sequence(src, p), pair_sequence(tgt, p), Objective::Fhsavg1, Feasible::Cptp).unwrap();
        let sdp = tracking::solve_tracking(&tp, &opts).unwrap().value;
        worst = worst.max((f - sdp).abs());
    }
    let fast = start.elapsed() < Duration::from_secs(300);
    Outcome::new(worst <= TOL && fast, format!("{INSTANCES} instances, max |F_analytic - F_sdp| = {worst:.2e} (tol {TOL:.0e})"))
}

fn criterion_2() -> Outcome {
    const INSTANCES: usize = 10_000;
    let start = Instant::now();
    let mut r = rng(1002);
    let (mut lam, mut gap, mut slack) = (f64::INFINITY, 0.0f64, 0.0f64);
    for _ in 0..INSTANCES {
        let (src, tgt, p) = random_pair_task(&mut r);
        let cert = analytic::dual_certificate(&geometry(&src, &tgt, p)).unwrap();
        lam = lam.min(cert.lambda_min);
        gap = gap.max(cert.duality_gap);
        slack = slack.max(cert.slackness);
    }
    let fast = start.elapsed() < Duration::from_secs(120);
    Outcome::new(
        lam >= -1e-9 && gap <= 1e-9 && slack <= 1e-8 && fast,
        format!("{INSTANCES} instances, min eigenvalue {lam:.2e}, max gap {gap:.2e}, max slackness {slack:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    const N: usize = 100;
    let (peak_p, peak_theta) = (0.115, 0.715);
    let (dp, dtheta) = (0.5 / N as f64, FRAC_PI_2 / (N + 1) as f64);
    let mut min = f64::INFINITY;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut sdr_dev = 0.0f64;
    for k in 1..=N {
        for j in 1..=N {
            let (p, th) = (0.5 * k as f64 / N as f64, FRAC_PI_2 * j as f64 / (N + 1) as f64);
            let f = stabilization_fidelities(&DephasingTask::new(p, th).unwrap());
            min = min.min(f.f_dif);
            if f.f_dif > best.0 {
                best = (f.f_dif, p, th);
            }
            sdr_dev = sdr_dev.max((f.sdr - f.qc_opt).abs());
        }
    }
    let scan = applications::advantage_scan(N, N).unwrap();
    let located = (best.1 - peak_p).abs() <= dp && (best.2 - peak_theta).abs() <= dtheta;
    let samples = [(0.145, 0.715), (0.115, 0.715), (0.05, 0.3), (0.3, 1.2), (0.5, 0.8), (0.2, 0.1), (0.45, 1.5), (0.01, 0.9), (0.25, 0.5), (0.4, 0.2)];
    let mut sdp_dev = 0.0f64;
    for (p, th) in samples {
        let t = DephasingTask::new(p, th).unwrap();
        let f = stabilization_fidelities(&t);
        let value = |feasible| {
            let tp = TrackingProblem::new(pair_sequence(t.noisy_states(), [0.5; 2]), pair_sequence(t.ideal_states(), [0.5; 2]), Objective::Fhsavg1, feasible)
                .unwrap();
            tracking::solve_tracking(&tp, &TrackingOptions::default()).unwrap().value
        };
        sdp_dev = sdp_dev.max((value(Feasible::Cptp) - f.qc_opt).abs()).max((value(Feasible::Ppt) - f.ddr2).abs());
    }
    let pass = min >= -1e-12 && (best.0 - 0.026).abs() <= 1e-3 && located && sdr_dev <= 1e-12 && sdp_dev <= 1e-6 && scan.max == best.0;
    Outcome::new(
        pass,
        format!(
            "min f_dif {min:.2e}, max {:.5} at (p, theta) = ({:.3}, {:.4}), |sdr - qc| {sdr_dev:.1e}, SDP deviation {sdp_dev:.1e}",
            best.0, best.1, best.2
        ),
    )
}

fn criterion_4() -> Outcome {
    let rho = DensityMatrix::maximally_mixed(3);
    let sigma = DensityMatrix::new(from_real(3, 3, &[1., 0., 0., 0., 0., 0., 0., 0., 0.])).unwrap();
    let tau = DensityMatrix::new(from_real(3, 3, &[0.90, 0.04, 0.03, 0.04, 0.05, 0.02, 0.03, 0.02, 0.05])).unwrap();
    let fid = |a: &DensityMatrix, b: &DensityMatrix| distances::super_fidelity(a, b).unwrap();
    let (rs, rt, ts) = (fid(&rho, &sigma), fid(&rho, &tau), fid(&tau, &sigma));
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, name, side_ref, sum_ref, violates) in [
        (Functional::A, "A", 0.9553, 0.9241, true),
        (Functional::B, "B", 0.9194, 0.9137, true),
        (Functional::C, "C", 0.8165, 0.8828, false),
    ] {
        let side = distances::metric_functional(k, rs).unwrap();
        let sum = distances::metric_functional(k, rt).unwrap() + distances::metric_functional(k, ts).unwrap();
        pass &= (side - side_ref).abs() <= 5e-5 && (sum - sum_ref).abs() <= 5e-5 && (side > sum) == violates;
        parts.push(format!("{name} {side:.4} vs {sum:.4}"));
    }
    Outcome::new(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let mut r = rng(1005);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = channels::random_state(2, r.random_bool(0.2), &mut r);
        let b = channels::random_state(2, false, &mut r);
        worst = worst.max((distances::super_fidelity(&a, &b).unwrap() - distances::fidelity(&a, &b).unwrap()).abs());
    }
    let rt = DensityMatrix::new(from_real(4, 4, &[0.5, 0., 0., 0., 0., 0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.])).unwrap();
    let st = DensityMatrix::new(from_real(4, 4, &[0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.5, 0., 0., 0., 0., 0.5])).unwrap();
    let marginal = |s: &DensityMatrix, t| DensityMatrix::new(mat::partial_trace(s.matrix(), 2, 2, t).unwrap()).unwrap();
    let whole = distances::super_fidelity(&rt, &st).unwrap();
    let drop_first = distances::super_fidelity(&marginal(&rt, Subsystem::First), &marginal(&st, Subsystem::First)).unwrap();
    let drop_second = distances::super_fidelity(&marginal(&rt, Subsystem::Second), &marginal(&st, Subsystem::Second)).unwrap();
    let ozawa = (whole - 0.5).abs() <= 1e-12 && (drop_first - 1.0).abs() <= 1e-12 && drop_second.abs() <= 1e-12;
    Outcome::new(
        worst <= 1e-10 && ozawa,
        format!("1000 qubit pairs, max |F_N - F| {worst:.1e}; Ozawa pair {whole:.3}, tracing the first factor {drop_first:.3}, the second {drop_second:.3}"),
    )
}

fn criterion_6() -> Outcome {
    const PAIRS: usize = 10_000;
    let mut worst = f64::INFINITY;
    let mut worst_name = String::new();
    for d in 2..=6 {
        let mut r = rng(1006 + d as u64);
        for k in 0..PAIRS {
            let a = channels::random_state(d, k % 5 == 0, &mut r);
            let b = channels::random_state(d, k % 7 == 0, &mut r);
            let rep = distances::check_bounds(&a, &b).unwrap();
            for ch in &rep.checks {
                if ch.slack < worst {
                    worst = ch.slack;
                    worst_name = format!("{} at d={d}", ch.name);
                }
            }
        }
    }
    let mut r = rng(1016);
    let mut saturation = 0.0f64;
    for d in [2, 4, 6] {
        let u = channels::random_unitary(d, &mut r);
        let spectrum: Vec<f64> = (0..d).map(|k| if k % 2 == 0 { 0.7 } else { 0.2 }).collect();
        let perm: Vec<usize> = (0..d).map(|k| k ^ 1).collect();
        let (a, b) = distances::saturating_pair(&u, &spectrum, &perm).unwrap();
        let rep = distances::check_bounds(&a, &b).unwrap();
        saturation = saturation.max(rep.get("d_upper_fn_rank").unwrap().slack.abs());
    }
    Outcome::new(
        worst >= -1e-9 && saturation <= 1e-10,
        format!("{PAIRS} pairs per d in 2..=6, min slack {worst:.2e} ({worst_name}); saturation residual {saturation:.1e}"),
    )
}

type Distance = fn(&DensityMatrix, &DensityMatrix) -> f64;

fn criterion_7() -> Outcome {
    const TRIPLES: usize = 10_000;
    let metrics: [(&str, Distance); 7] = [
        ("D", |a, b| distances::trace_distance(a, b).unwrap()),
        ("H", |a, b| distances::hs_distance(a, b).unwrap()),
        ("H2", |a, b| distances::hs_distance(a, b).unwrap().powi(2)),
        ("O", |a, b| distances::spectral_distance(a, b).unwrap()),
        ("C[F_N]", |a, b| distances::metric_functional(Functional::C, distances::super_fidelity(a, b).unwrap()).unwrap()),
        ("B[F]", |a, b| distances::metric_functional(Functional::B, distances::fidelity(a, b).unwrap()).unwrap()),
        ("C[F]", |a, b| distances::metric_functional(Functional::C, distances::fidelity(a, b).unwrap()).unwrap()),
    ];
    let mut violation = [0.0f64; 7];
    for d in 2..=4 {
        let mut r = rng(1020 + d as u64);
        for k in 0..TRIPLES {
            let t: Vec<DensityMatrix> = (0..3).map(|j| channels::random_state(d, (k + j) % 4 == 0, &mut r)).collect();
            for (i, (_, m)) in metrics.iter().enumerate() {
                violation[i] = violation[i].max(m(&t[0], &t[1]) - m(&t[0], &t[2]) - m(&t[2], &t[1]));
            }
        }
    }
    let mut r = rng(1030);
    let (mut concave, mut multiplicative) = (0.0f64, 0.0f64);
    let mix = |p: f64, a: &DensityMatrix, b: &DensityMatrix| DensityMatrix::new(a.matrix() * c(p, 0.0) + b.matrix() * c(1.0 - p, 0.0)).unwrap();
    let tensor = |a: &DensityMatrix, b: &DensityMatrix| DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
    let fnm = |a: &DensityMatrix, b: &DensityMatrix| distances::super_fidelity(a, b).unwrap();
    for _ in 0..10_000 {
        let d = r.random_range(2..=4);
        let s: Vec<DensityMatrix> = (0..4).map(|_| channels::random_state(d, false, &mut r)).collect();
        let p: f64 = r.random();
        let lhs = fnm(&mix(p, &s[0], &s[1]), &mix(p, &s[2], &s[3]));
        concave = concave.max(p * fnm(&s[0], &s[2]) + (1.0 - p) * fnm(&s[1], &s[3]) - lhs);
        multiplicative = multiplicative.max(fnm(&s[0], &s[2]) * fnm(&s[1], &s[3]) - fnm(&tensor(&s[0], &s[1]), &tensor(&s[2], &s[3])));
    }
    let tol = 1e-10;
    let failing: Vec<&str> = metrics.iter().zip(&violation).filter(|(_, &v)| v > tol).map(|((n, _), _)| *n).collect();
    let props_ok = concave <= tol && multiplicative <= tol;
    let detail = format!(
        "{TRIPLES} triples per d in 2..=4, max triangle excess {}; F_N concavity {concave:.1e}, super-multiplicativity {multiplicative:.1e}",
        metrics.iter().zip(&violation).map(|((n, _), v)| format!("{n} {v:.1e}")).collect::<Vec<_>>().join(", ")
    );
    let mut out = Outcome::new(failing.is_empty() && props_ok, detail);
    if failing == ["H2"] && props_ok {
        out.known = Some("squared Hilbert-Schmidt distance is not a metric; the triangle inequality fails for it");
    }
    out
}

fn criterion_8() -> Outcome {
    let mut r = rng(1008);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = qubit(&random_bloch(&mut r));
        let b = qubit(&random_bloch(&mut r));
        let p1 = r.random_range(0.01..0.99);
        let d = applications::discriminate(&a, &b, p1).unwrap();
        worst = worst.max((d.p_helstrom - d.p_track).abs());
    }
    Outcome::new(worst <= 1e-10, format!("1000 instances, max |p_track - p_helstrom| {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let u1 = Vector3::new(FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos());
    let u2 = Vector3::new(-FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos());
    let src = WeightedSequence::uniform(vec![qubit(&(u1 * 0.7)), qubit(&(u2 * 0.7))]).unwrap();
    let tgt = WeightedSequence::uniform(vec![qubit(&u1), qubit(&u2)]).unwrap();
    let cases = [
        (Objective::Fhsavg1, Feasible::Cptp, 0.91, 35.96),
        (Objective::Fhsavg2, Feasible::Cptp, 0.91, 35.96),
        (Objective::Davg, Feasible::Cptp, 0.75, 74.5),
        (Objective::H2avg1, Feasible::Cptp, 0.75, 74.5),
        (Objective::Havg2, Feasible::Cptp, 0.75, 74.5),
        (Objective::Oavg2, Feasible::Cptp, 0.75, 74.5),
        (Objective::Davg, Feasible::Ppt, 0.71, 67.65),
        (Objective::Oavg2, Feasible::Ppt, 0.71, 67.65),
        (Objective::Fhsavg1, Feasible::Ppt, 0.92, 27.53),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (o, f, len, angle) in cases {
        let tp = TrackingProblem::new(src.clone(), tgt.clone(), o, f).unwrap();
        let sol = tracking::solve_tracking(&tp, &TrackingOptions::default()).unwrap();
        let b = sol.output_bloch.unwrap();
        let a = (b[0].dot(&b[1]) / (b[0].norm() * b[1].norm())).acos().to_degrees();
        pass &= (b[0].norm() - len).abs() <= 0.01 && (b[1].norm() - len).abs() <= 0.01 && (a - angle).abs() <= 0.5;
        parts.push(format!("{o}/{f} {:.3} at {a:.2} deg", b[0].norm()));
    }
    Outcome::new(pass, parts.join(", "))
}

fn criterion_10() -> Outcome {
    let task = ChainTask::stabilize_pair(FRAC_PI_4);
    let opts = ChainOptions::default();
    let noise = AffineQubitMap::extremal(0.70, 0.46).unwrap();
    let sol = multistep::solve_chain(&task, &[noise], &opts).unwrap();
    let gain = sol.chain.fidelity / sol.single_step - 1.0;
    let start = Instant::now();
    let grid: Vec<f64> = (0..20).map(|k| k as f64 / 19.0).collect();
    let pts = multistep::sweep_2step(&grid, &grid, &task, &opts).unwrap();
    let elapsed = start.elapsed();
    let worst = pts.iter().map(|p| p.f_multi - p.f_single).fold(f64::INFINITY, f64::min);
    let advantage = pts.iter().filter(|p| p.class == SweepClass::Advantage).count();
    let pass = (gain - 0.10).abs() <= 0.02
        && (noise.shift.z - 0.63).abs() <= 5e-3
        && worst >= -1e-9
        && elapsed < Duration::from_secs(600);
    Outcome::new(
        pass,
        format!(
            "t3 {:.3}, single {:.5}, two-step {:.5}, gain {:.2}%; 20x20 sweep min(multi - single) {worst:.1e}, {advantage} advantage points",
            noise.shift.z,
            sol.single_step,
            sol.chain.fidelity,
            100.0 * gain
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut r = rng(1011);
    let (mut kraus, mut compose, mut perm, mut canonical) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for d in 2..=4 {
        for _ in 0..100 {
            let ch = channels::random_cptp(d, &mut r);
            for route in [KrausRoute::Eigen, KrausRoute::Cholesky] {
                let k = channels::kraus_from_choi(&ch, route).unwrap();
                kraus = kraus.max(mat::max_abs(&(channels::choi_from_kraus(&k).unwrap().matrix() - ch.matrix())));
            }
            let other = channels::random_cptp(d, &mut r);
            let rho = channels::random_state(d, false, &mut r);
            let seq = channels::apply(&other, &channels::apply(&ch, &rho).unwrap()).unwrap();
            let once = channels::apply(&channels::compose(&ch, &other).unwrap(), &rho).unwrap();
            compose = compose.max(mat::max_abs(&(seq.matrix() - once.matrix())));
            let p = mat::perm_d4(d).unwrap().map(|x| c(x, 0.0));
            let a = common::random_matrix(d, d, &mut r);
            let b = common::random_matrix(d, d, &mut r);
            let lhs = mat::vec(&kron(&a, &b));
            let rhs: qtrack::mat::CVector = &p * kron_vec(&mat::vec(&a), &mat::vec(&b));
            perm = perm.max((lhs - rhs).iter().fold(0.0f64, |m, z| m.max(z.norm())));
        }
    }
    for _ in 0..500 {
        let ch = channels::random_cptp(2, &mut r);
        let back = channels::assemble_qubit_choi(&channels::canonical_qubit(&ch).unwrap()).unwrap();
        canonical = canonical.max(mat::max_abs(&(back.matrix() - ch.matrix())));
    }
    Outcome::new(
        kraus <= 1e-9 && compose <= 1e-10 && perm <= 1e-13 && canonical <= 1e-8,
        format!("Choi/Kraus {kraus:.1e}, composition {compose:.1e}, perm_d4 {perm:.1e}, canonical {canonical:.1e}"),
    )
}

fn criterion_12() -> Outcome {
    let cfg = CompatibilityConfig {
        cells: vec![(2, 2)],
        samples: 20,
        seed: 0,
        kind: TransformKind::MixedToPure,
        ..Default::default()
    };
    let table = tracking::compatibility_experiment(&cfg).unwrap();
    let drop = table.get(2, 2, Objective::Davg, Objective::Fhsavg1).unwrap().mean_percent;
    let order = table.ordering(2, 2, Objective::Davg);
    let want = [Objective::H2avg1, Objective::Oavg2, Objective::Fhsavg1];
    Outcome::new(
        (4.0..=12.0).contains(&drop) && order == want,
        format!(
            "mean drop of D under the F_HS-optimal map {drop:.2}%, ordering {}",
            order.iter().map(|o| o.name()).collect::<Vec<_>>().join(" < ")
        ),
    )
}

fn bench_ordering() -> Outcome {
    let mut r = rng(1099);
    let timed = [Measure::F, Measure::FN, Measure::D, Measure::Q];
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [32, 64] {
        let entries = distances::bench(&timed, d, 10, &mut r).unwrap();
        let mut order: Vec<_> = entries.iter().collect();
        order.sort_by(|a, b| a.seconds.total_cmp(&b.seconds));
        pass &= order[0].measure == Measure::FN && order[3].measure == Measure::Q;
        parts.push(format!("d={d}: {}", order.iter().map(|e| e.measure.to_string()).collect::<Vec<_>>().join(" < ")));
    }
    Outcome::new(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let runs: [(&str, &str, fn() -> Outcome); 13] = [
        ("1", "analytic tracker equals SDP optimum", criterion_1),
        ("2", "analytic dual certificates", criterion_2),
        ("3", "dephasing stabilization scan", criterion_3),
        ("4", "functional triangle table", criterion_4),
        ("5", "super-fidelity on qubits and Ozawa pair", criterion_5),
        ("6", "bound suites and saturation", criterion_6),
        ("7", "metric properties", criterion_7),
        ("8", "Helstrom equivalence", criterion_8),
        ("9", "purification outputs", criterion_9),
        ("10", "multi-step gain and sweep", criterion_10),
        ("11", "channel calculus", criterion_11),
        ("12", "objective compatibility", criterion_12),
        ("bench", "relative timing order", bench_ordering),
    ];
    let outcomes: Vec<(String, Outcome)> = runs.iter().map(|(id, title, f)| (id.to_string(), report(id, title, f))).collect();
    let unexpected: Vec<&str> = outcomes.iter().filter(|(_, o)| !o.pass && o.known.is_none()).map(|(id, _)| id.as_str()).collect();
    let known = outcomes.iter().filter(|(_, o)| !o.pass && o.known.is_some()).count();
    let passed = outcomes.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed} passed, {known} failed with a known limitation, {} failed", unexpected.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
