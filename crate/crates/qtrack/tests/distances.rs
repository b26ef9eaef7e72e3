mod common;

use common::rng;
use nalgebra::Vector3;
use proptest::prelude::*;
use qtrack::channels::*;
use qtrack::distances::*;
use qtrack::mat::{self, c, from_real, identity, kron, CMatrix, Subsystem};
use qtrack::sequence::WeightedSequence;

fn ozawa() -> (DensityMatrix, DensityMatrix) {
    let r = from_real(4, 4, &[0.5, 0., 0., 0., 0., 0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.]);
    let s = from_real(4, 4, &[0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.5, 0., 0., 0., 0., 0.5]);
    (DensityMatrix::new(r).unwrap(), DensityMatrix::new(s).unwrap())
}

fn table_triple() -> (DensityMatrix, DensityMatrix, DensityMatrix) {
    let rho = DensityMatrix::maximally_mixed(3);
    let sigma = DensityMatrix::new(from_real(3, 3, &[1., 0., 0., 0., 0., 0., 0., 0., 0.])).unwrap();
    let tau =
        DensityMatrix::new(from_real(3, 3, &[0.90, 0.04, 0.03, 0.04, 0.05, 0.02, 0.03, 0.02, 0.05])).unwrap();
    (rho, sigma, tau)
}

fn qubit_fidelity_oracle(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let det = |m: &CMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    mat::inner(a.matrix(), b.matrix()) + 2.0 * (det(a.matrix()) * det(b.matrix())).max(0.0).sqrt()
}

fn partial(rho: &DensityMatrix, traced: Subsystem) -> DensityMatrix {
    DensityMatrix::new(mat::partial_trace(rho.matrix(), 2, 2, traced).unwrap()).unwrap()
}

#[test]
fn fidelity_basics() {
    let mut r = rng(1);
    let rho = random_state(3, false, &mut r);
    assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
    let zero = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
    let one = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, -1.0)).unwrap();
    assert!(fidelity(&zero, &one).unwrap().abs() < 1e-14);
    let sigma = random_state(3, false, &mut r);
    let ab = fidelity(&rho, &sigma).unwrap();
    let ba = fidelity(&sigma, &rho).unwrap();
    assert!((ab - ba).abs() < 1e-12);
}

#[test]
fn fidelity_with_pure_is_expectation() {
    let mut r = rng(2);
    for _ in 0..50 {
        let rho = random_state(4, false, &mut r);
        let psi = random_unitary(4, &mut r).column(0).into_owned();
        let pure = DensityMatrix::pure(&psi).unwrap();
        let want = (psi.adjoint() * rho.matrix() * &psi)[(0, 0)].re;
        assert!((fidelity(&rho, &pure).unwrap() - want).abs() < 1e-10);
        assert!((hs_inner(&rho, &pure).unwrap() - want).abs() < 1e-12);
        assert!((super_fidelity(&rho, &pure).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn qubit_fidelity_matches_determinant_formula() {
    let mut r = rng(3);
    for _ in 0..200 {
        let a = random_state(2, false, &mut r);
        let b = random_state(2, false, &mut r);
        let f = fidelity(&a, &b).unwrap();
        assert!((f - qubit_fidelity_oracle(&a, &b)).abs() < 1e-10);
        assert!((f - super_fidelity(&a, &b).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn super_fidelity_ozawa_values() {
    let (rt, st) = ozawa();
    assert!((super_fidelity(&rt, &st).unwrap() - 0.5).abs() < 1e-12);
    let f1 = super_fidelity(&partial(&rt, Subsystem::First), &partial(&st, Subsystem::First)).unwrap();
    let f2 = super_fidelity(&partial(&rt, Subsystem::Second), &partial(&st, Subsystem::Second)).unwrap();
    assert!((f1 - 1.0).abs() < 1e-12);
    assert!(f2.abs() < 1e-12);
    assert!((super_fidelity(&DensityMatrix::maximally_mixed(3), &DensityMatrix::maximally_mixed(3)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn ozawa_norm_values() {
    let (rt, st) = ozawa();
    assert!((hs_distance(&rt, &st).unwrap() - 1.0).abs() < 1e-14);
    assert!((spectral_distance(&rt, &st).unwrap() - 0.5).abs() < 1e-14);
    assert!((trace_distance(&rt, &st).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn hs_inner_with_maximally_mixed() {
    let mut r = rng(4);
    let rho = random_state(5, false, &mut r);
    assert!((hs_inner(&rho, &DensityMatrix::maximally_mixed(5)).unwrap() - 0.2).abs() < 1e-14);
}

#[test]
fn fidelity_ordering_d3() {
    let mut r = rng(5);
    for _ in 0..1000 {
        let a = random_state(3, false, &mut r);
        let b = random_state(3, false, &mut r);
        let f = fidelity(&a, &b).unwrap();
        assert!(hs_inner(&a, &b).unwrap() <= f + 1e-10);
        assert!(f <= super_fidelity(&a, &b).unwrap() + 1e-10);
    }
}

#[test]
fn chernoff_commuting_matches_grid() {
    let a = DensityMatrix::new(from_real(2, 2, &[0.9, 0.0, 0.0, 0.1])).unwrap();
    let b = DensityMatrix::new(from_real(2, 2, &[0.1, 0.0, 0.0, 0.9])).unwrap();
    let grid = (0..=1_000_000)
        .map(|k| {
            let s = k as f64 * 1e-6;
            0.9f64.powf(s) * 0.1f64.powf(1.0 - s) + 0.1f64.powf(s) * 0.9f64.powf(1.0 - s)
        })
        .fold(f64::INFINITY, f64::min);
    assert!((chernoff_q(&a, &b).unwrap() - grid).abs() < 1e-10);
    assert!((grid - 0.6).abs() < 1e-10);
}

#[test]
fn chernoff_identity_and_symmetry() {
    let mut r = rng(6);
    let a = random_state(3, false, &mut r);
    let b = random_state(3, false, &mut r);
    assert!((chernoff_q(&a, &a).unwrap() - 1.0).abs() < 1e-10);
    assert!((chernoff_q(&a, &b).unwrap() - chernoff_q(&b, &a).unwrap()).abs() < 1e-10);
}

#[test]
fn chernoff_noncommuting_matches_grid() {
    let mut r = rng(7);
    for _ in 0..5 {
        let a = random_state(3, false, &mut r);
        let b = random_state(3, false, &mut r);
        let grid = (0..=2000)
            .map(|k| {
                let s = k as f64 / 2000.0;
                let pa = mat::hermitian_fn(a.matrix(), |x| x.max(0.0).powf(s));
                let pb = mat::hermitian_fn(b.matrix(), |x| x.max(0.0).powf(1.0 - s));
                (pa * pb).trace().re
            })
            .fold(f64::INFINITY, f64::min);
        let q = chernoff_q(&a, &b).unwrap();
        assert!(q <= grid + 1e-12);
        assert!(grid - q < 1e-6);
    }
}

#[test]
fn chernoff_pure_states() {
    // For pure states Q equals the overlap |<a|b>|^2.
    let mut r = rng(8);
    let a = random_state(3, true, &mut r);
    let b = random_state(3, true, &mut r);
    let q = chernoff_q(&a, &b).unwrap();
    assert!((q - mat::inner(a.matrix(), b.matrix())).abs() < 1e-10);
}

#[test]
fn trace_distance_qubit_bloch() {
    let mut r = rng(9);
    for _ in 0..100 {
        let a = random_state(2, false, &mut r);
        let b = random_state(2, false, &mut r);
        let want = 0.5 * (a.bloch().unwrap() - b.bloch().unwrap()).norm();
        assert!((trace_distance(&a, &b).unwrap() - want).abs() < 1e-12);
    }
    let a = random_state(2, false, &mut r);
    assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    let zero = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
    let one = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, -1.0)).unwrap();
    assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn hs_distance_eigen_oracle() {
    let mut r = rng(10);
    let a = random_state(4, false, &mut r);
    let b = random_state(4, false, &mut r);
    let ev = mat::eigvalsh(&(a.matrix() - b.matrix()));
    let want = ev.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((hs_distance(&a, &b).unwrap() - want).abs() < 1e-13);
    assert!(hs_distance(&a, &a).unwrap() < 1e-15);
}

#[test]
fn dimension_mismatch_errors() {
    let a = DensityMatrix::maximally_mixed(2);
    let b = DensityMatrix::maximally_mixed(3);
    for m in Measure::ALL {
        assert!(measure(m, &a, &b).is_err());
    }
}

#[test]
fn metric_functionals() {
    assert_eq!(metric_functional(Functional::C, 1.0).unwrap(), 0.0);
    assert!(metric_functional(Functional::A, 1.5).is_err());
    assert!(metric_functional(Functional::B, -0.1).is_err());
}

#[test]
fn triangle_table_values() {
    let (rho, sigma, tau) = table_triple();
    let rs = super_fidelity(&rho, &sigma).unwrap();
    let rt = super_fidelity(&rho, &tau).unwrap();
    let ts = super_fidelity(&tau, &sigma).unwrap();
    let side = |k| metric_functional(k, rs).unwrap();
    let sum = |k| metric_functional(k, rt).unwrap() + metric_functional(k, ts).unwrap();
    for (k, l, s) in [(Functional::A, 0.9553, 0.9241), (Functional::B, 0.9194, 0.9137), (Functional::C, 0.8165, 0.8828)] {
        assert!((side(k) - l).abs() < 5e-5, "{k:?}");
        assert!((sum(k) - s).abs() < 5e-5, "{k:?}");
    }
    assert!(side(Functional::A) > sum(Functional::A));
    assert!(side(Functional::B) > sum(Functional::B));
    assert!(side(Functional::C) <= sum(Functional::C));
}

fn sequence(states: Vec<DensityMatrix>, pis: &[f64]) -> WeightedSequence {
    WeightedSequence::new(pis.iter().copied().zip(states).collect()).unwrap()
}

#[test]
fn sequence_identical_values() {
    let mut r = rng(11);
    let states: Vec<_> = (0..3).map(|_| random_state(2, true, &mut r)).collect();
    let s = sequence(states, &[0.2, 0.3, 0.5]);
    for scheme in [AverageScheme::Avg1, AverageScheme::Avg2] {
        for m in [Measure::D, Measure::H, Measure::O] {
            assert!(sequence_distance(m, scheme, &s, &s).unwrap() < 1e-14);
        }
    }
    for m in [Measure::F, Measure::FN, Measure::FHS, Measure::Q] {
        assert!((sequence_distance(m, AverageScheme::Avg1, &s, &s).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn trace_distance_schemes_agree() {
    let mut r = rng(12);
    for _ in 0..50 {
        let pis = [0.1, 0.6, 0.3];
        let a = sequence((0..3).map(|_| random_state(3, false, &mut r)).collect(), &pis);
        let b = sequence((0..3).map(|_| random_state(3, false, &mut r)).collect(), &pis);
        let d1 = sequence_distance(Measure::D, AverageScheme::Avg1, &a, &b).unwrap();
        let d2 = sequence_distance(Measure::D, AverageScheme::Avg2, &a, &b).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }
}

#[test]
fn hs_inner_schemes_proportional_for_uniform() {
    let mut r = rng(13);
    let n = 4;
    let a = WeightedSequence::uniform((0..n).map(|_| random_state(2, false, &mut r)).collect()).unwrap();
    let b = WeightedSequence::uniform((0..n).map(|_| random_state(2, false, &mut r)).collect()).unwrap();
    let f1 = sequence_distance(Measure::FHS, AverageScheme::Avg1, &a, &b).unwrap();
    let f2 = sequence_distance(Measure::FHS, AverageScheme::Avg2, &a, &b).unwrap();
    assert!((f1 - n as f64 * f2).abs() < 1e-14);
}

#[test]
fn sequence_mismatch_errors() {
    let mut r = rng(14);
    let a = sequence(vec![random_state(2, false, &mut r), random_state(2, false, &mut r)], &[0.5, 0.5]);
    let b = sequence(vec![random_state(2, false, &mut r), random_state(2, false, &mut r)], &[0.4, 0.6]);
    let c1 = sequence(vec![random_state(2, false, &mut r)], &[1.0]);
    assert!(sequence_distance(Measure::D, AverageScheme::Avg1, &a, &b).is_err());
    assert!(sequence_distance(Measure::D, AverageScheme::Avg1, &a, &c1).is_err());
    assert!(WeightedSequence::new(vec![(0.5, random_state(2, false, &mut r))]).is_err());
}

#[test]
fn sequence_metric_triangle() {
    let mut r = rng(15);
    let pis = [0.3, 0.7];
    for _ in 0..200 {
        let s: Vec<WeightedSequence> =
            (0..3).map(|_| sequence((0..2).map(|_| random_state(2, false, &mut r)).collect(), &pis)).collect();
        for scheme in [AverageScheme::Avg1, AverageScheme::Avg2] {
            for m in [Measure::D, Measure::H, Measure::O] {
                let ab = sequence_distance(m, scheme, &s[0], &s[1]).unwrap();
                let ac = sequence_distance(m, scheme, &s[0], &s[2]).unwrap();
                let cb = sequence_distance(m, scheme, &s[2], &s[1]).unwrap();
                assert!(ab <= ac + cb + 1e-12);
                let ba = sequence_distance(m, scheme, &s[1], &s[0]).unwrap();
                assert!((ab - ba).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn bounds_hold_on_random_pairs() {
    let mut r = rng(16);
    for d in 2..=6 {
        for k in 0..300 {
            let a = random_state(d, k % 5 == 0, &mut r);
            let b = random_state(d, false, &mut r);
            let rep = check_bounds(&a, &b).unwrap();
            assert!(rep.min_slack() >= -1e-9, "d={d}: {:?}", rep.checks.iter().min_by(|x, y| x.slack.total_cmp(&y.slack)));
        }
    }
}

#[test]
fn bounds_fuchs_on_d4() {
    let mut r = rng(17);
    for _ in 0..200 {
        let a = random_state(4, false, &mut r);
        let b = random_state(4, false, &mut r);
        let f = fidelity(&a, &b).unwrap();
        let d = trace_distance(&a, &b).unwrap();
        assert!(1.0 - f.sqrt() <= d + 1e-12 && d <= (1.0 - f).sqrt() + 1e-12);
    }
}

#[test]
fn saturation_for_even_rank() {
    let mut r = rng(18);
    for d in [2, 4, 6] {
        let u = random_unitary(d, &mut r);
        let spectrum: Vec<f64> = (0..d).map(|k| if k % 2 == 0 { 0.7 } else { 0.2 }).collect();
        let perm: Vec<usize> = (0..d).map(|k| k ^ 1).collect();
        let (a, b) = saturating_pair(&u, &spectrum, &perm).unwrap();
        let rep = check_bounds(&a, &b).unwrap();
        assert_eq!(rep.rank, d);
        assert!(rep.get("d_upper_fn_rank").unwrap().slack.abs() < 1e-10);
    }
}

#[test]
fn saturating_pair_validation() {
    let u = identity(3);
    assert!(saturating_pair(&u, &[1.0, 0.0, 0.0], &[0, 0, 1]).is_err());
    assert!(saturating_pair(&u, &[0.0, 0.0, 0.0], &[0, 1, 2]).is_err());
    assert!(saturating_pair(&u, &[1.0, 0.0], &[0, 1]).is_err());
}

#[test]
fn unitary_invariance() {
    let mut r = rng(19);
    for d in 2..=4 {
        let a = random_state(d, false, &mut r);
        let b = random_state(d, false, &mut r);
        let u = random_unitary(d, &mut r);
        let conj = |s: &DensityMatrix| DensityMatrix::new(&u * s.matrix() * u.adjoint()).unwrap();
        let (ua, ub) = (conj(&a), conj(&b));
        for m in Measure::ALL {
            let x = measure(m, &a, &b).unwrap();
            let y = measure(m, &ua, &ub).unwrap();
            assert!((x - y).abs() <= 1e-11, "{m}");
        }
    }
}

fn triangle_violation(value: impl Fn(&DensityMatrix, &DensityMatrix) -> f64, t: &[DensityMatrix; 3]) -> f64 {
    value(&t[0], &t[1]) - value(&t[0], &t[2]) - value(&t[2], &t[1])
}

#[test]
fn metric_triangles() {
    let mut r = rng(20);
    for d in 2..=4 {
        for _ in 0..1000 {
            let t = [random_state(d, false, &mut r), random_state(d, false, &mut r), random_state(d, false, &mut r)];
            let cf = |f: f64| metric_functional(Functional::C, f).unwrap();
            let bf = |f: f64| metric_functional(Functional::B, f).unwrap();
            let metrics: [(&str, Box<dyn Fn(&DensityMatrix, &DensityMatrix) -> f64>); 6] = [
                ("D", Box::new(|a, b| trace_distance(a, b).unwrap())),
                ("H", Box::new(|a, b| hs_distance(a, b).unwrap())),
                ("O", Box::new(|a, b| spectral_distance(a, b).unwrap())),
                ("C[FN]", Box::new(|a, b| cf(super_fidelity(a, b).unwrap()))),
                ("B[F]", Box::new(|a, b| bf(fidelity(a, b).unwrap()))),
                ("C[F]", Box::new(|a, b| cf(fidelity(a, b).unwrap()))),
            ];
            for (name, f) in &metrics {
                assert!(triangle_violation(f, &t) <= 1e-10, "{name} d={d}");
            }
        }
    }
}

#[test]
fn squared_hs_violates_triangle_on_midpoint() {
    let zero = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
    let one = DensityMatrix::from_bloch(&Vector3::new(0.0, 0.0, -1.0)).unwrap();
    let mid = DensityMatrix::maximally_mixed(2);
    let h2 = |a: &DensityMatrix, b: &DensityMatrix| hs_distance(a, b).unwrap().powi(2);
    assert!((h2(&zero, &one) - 2.0).abs() < 1e-14);
    assert!((h2(&zero, &mid) + h2(&mid, &one) - 1.0).abs() < 1e-14);
}

fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new(a.matrix() * c(p, 0.0) + b.matrix() * c(1.0 - p, 0.0)).unwrap()
}

fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap()
}

#[test]
fn super_fidelity_concave_and_supermultiplicative() {
    use rand::Rng;
    let mut r = rng(21);
    for _ in 0..500 {
        let d = r.random_range(2..=4);
        let s: Vec<DensityMatrix> = (0..4).map(|_| random_state(d, false, &mut r)).collect();
        let p: f64 = r.random();
        let lhs = super_fidelity(&mix(p, &s[0], &s[1]), &mix(p, &s[2], &s[3])).unwrap();
        let rhs = p * super_fidelity(&s[0], &s[2]).unwrap() + (1.0 - p) * super_fidelity(&s[1], &s[3]).unwrap();
        assert!(lhs >= rhs - 1e-12);
        let prod = super_fidelity(&tensor(&s[0], &s[1]), &tensor(&s[2], &s[3])).unwrap();
        assert!(prod >= super_fidelity(&s[0], &s[2]).unwrap() * super_fidelity(&s[1], &s[3]).unwrap() - 1e-12);
    }
}

#[test]
fn fidelity_multiplicative() {
    let mut r = rng(22);
    for _ in 0..100 {
        let s: Vec<DensityMatrix> = (0..4).map(|_| random_state(2, false, &mut r)).collect();
        let prod = fidelity(&tensor(&s[0], &s[1]), &tensor(&s[2], &s[3])).unwrap();
        let want = fidelity(&s[0], &s[2]).unwrap() * fidelity(&s[1], &s[3]).unwrap();
        assert!((prod - want).abs() < 1e-10);
    }
}

#[test]
fn monotone_under_channels() {
    let mut r = rng(23);
    for d in [2, 3] {
        for _ in 0..200 {
            let ch = random_cptp(d, &mut r);
            let a = random_state(d, false, &mut r);
            let b = random_state(d, false, &mut r);
            let (ca, cb) = (apply(&ch, &a).unwrap(), apply(&ch, &b).unwrap());
            assert!(trace_distance(&ca, &cb).unwrap() <= trace_distance(&a, &b).unwrap() + 1e-12);
            assert!(fidelity(&ca, &cb).unwrap() >= fidelity(&a, &b).unwrap() - 1e-10);
        }
    }
    for _ in 0..200 {
        let ch = random_unital_qubit(&mut r);
        let a = random_state(2, false, &mut r);
        let b = random_state(2, false, &mut r);
        let (ca, cb) = (apply(&ch, &a).unwrap(), apply(&ch, &b).unwrap());
        assert!(hs_distance(&ca, &cb).unwrap() <= hs_distance(&a, &b).unwrap() + 1e-12);
        assert!(spectral_distance(&ca, &cb).unwrap() <= spectral_distance(&a, &b).unwrap() + 1e-12);
    }
}

/// Exploratory: super-fidelity does not decrease under pinching by a random projective measurement.
#[test]
fn super_fidelity_pinching_exploratory() {
    use rand::Rng;
    let mut r = rng(24);
    let mut worst = f64::INFINITY;
    for _ in 0..2000 {
        let d = r.random_range(2..=5);
        let u = random_unitary(d, &mut r);
        let split = r.random_range(1..d);
        let projectors: Vec<CMatrix> = [0..split, split..d]
            .into_iter()
            .map(|range| {
                range.fold(CMatrix::zeros(d, d), |acc, k| {
                    let v = u.column(k);
                    acc + &v * v.adjoint()
                })
            })
            .collect();
        let pinch = |s: &DensityMatrix| {
            let m = projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p * s.matrix() * p);
            DensityMatrix::new(m).unwrap()
        };
        let a = random_state(d, false, &mut r);
        let b = random_state(d, false, &mut r);
        let gain = super_fidelity(&pinch(&a), &pinch(&b)).unwrap() - super_fidelity(&a, &b).unwrap();
        worst = worst.min(gain);
    }
    assert!(worst >= -1e-12, "worst pinching change {worst}");
}

#[test]
fn measure_parsing() {
    for m in Measure::ALL {
        assert_eq!(m.to_string().parse::<Measure>().unwrap(), m);
    }
    assert!("x".parse::<Measure>().is_err());
}

#[test]
fn bench_reports_every_measure() {
    let mut r = rng(25);
    let rep = bench(&Measure::ALL, 4, 3, &mut r).unwrap();
    assert_eq!(rep.len(), 7);
    assert!(rep.iter().all(|e| e.seconds >= 0.0 && e.nominal_flops > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_measure_ranges(seed in 0u64..100_000, d in 2usize..=5) {
        let mut r = rng(seed);
        let a = random_state(d, false, &mut r);
        let b = random_state(d, false, &mut r);
        for m in [Measure::F, Measure::FN, Measure::FHS, Measure::Q, Measure::D] {
            let v = measure(m, &a, &b).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-10).contains(&v), "{} = {}", m, v);
        }
        prop_assert!(check_bounds(&a, &b).unwrap().min_slack() >= -1e-9);
    }

    #[test]
    fn prop_symmetry(seed in 0u64..100_000, d in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_state(d, false, &mut r);
        let b = random_state(d, false, &mut r);
        for m in Measure::ALL {
            prop_assert!((measure(m, &a, &b).unwrap() - measure(m, &b, &a).unwrap()).abs() < 1e-9);
        }
    }
}
