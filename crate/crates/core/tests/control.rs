use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rydberg_zeno::control::*;
use rydberg_zeno::operator::{Basis, Operator};
use rydberg_zeno::rng::stream;
use rydberg_zeno::system_model::*;
use rydberg_zeno::Error;

type C = Complex<f64>;

fn random_hermitian(basis: Basis, rng: &mut impl Rng) -> Operator<f64> {
    let n = basis.dimension();
    let x = DMatrix::<C>::from_fn(n, n, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    Operator::new(basis, (&x + x.adjoint()).map(|z| z * 0.5)).unwrap()
}

fn paper_setup() -> (LevelSpace, Operator<f64>, Operator<f64>, ErrorModel<f64>) {
    let space = LevelSpace::rydberg_60f();
    let f = FieldConfig::rydberg_60f();
    let ha = control_hamiltonian(&space, &f, PulseTag::A).unwrap();
    let hb = control_hamiltonian(&space, &f, PulseTag::B).unwrap();
    let errors = ErrorModel::standard(&space, [0.0; 6], 1.0, 0);
    (space, ha, hb, errors)
}

/// `‖P G P − tr(P G P)/2 · P‖²_F` with full-size matrices.
fn dense_residual(u: &DMatrix<C>, errors: &[Operator<f64>], code: [usize; 2]) -> f64 {
    let n = u.nrows();
    let mut p = DMatrix::<C>::zeros(n, n);
    p[(code[0], code[0])] = C::new(1.0, 0.0);
    p[(code[1], code[1])] = C::new(1.0, 0.0);
    errors
        .iter()
        .map(|e| {
            let g = &p * u.adjoint() * e.matrix() * u * &p;
            let d = &g - &p * (g.trace() * 0.5);
            d.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum()
}

#[test]
fn empty_and_single_pulse_sequences() {
    let (_, ha, hb, _) = paper_setup();
    let empty = PulseSequence::new(vec![]).unwrap();
    let u = sequence_propagator(&empty, &ha, &hb).unwrap();
    assert_eq!(u, Operator::identity(ha.basis()));
    let one = PulseSequence::coding(&[2.5]).unwrap();
    let u = sequence_propagator(&one, &ha, &hb).unwrap();
    assert!(u.max_distance(&propagator(&ha, 2.5).unwrap()).unwrap() < 1e-14);
    let d = decode_sequence(&one);
    assert!(d.negate_hamiltonians);
    assert_eq!(d.sequence.pulses(), one.pulses());
}

#[test]
fn sequence_validation() {
    assert!(PulseSequence::coding(&[1.0, -2.0]).is_err());
    let same = vec![Pulse { tag: PulseTag::A, duration: 1.0 }, Pulse { tag: PulseTag::A, duration: 1.0 }];
    assert!(matches!(PulseSequence::new(same), Err(Error::InvalidSequence(_))));
    assert_eq!(PulseSequence::published().len(), 34);
    assert!((PulseSequence::published().total_duration() - PUBLISHED_TIMINGS.iter().sum::<f64>()).abs() < 1e-12);
}

#[test]
fn published_timings_are_unitary_and_invertible() {
    let (_, ha, hb, _) = paper_setup();
    let seq = PulseSequence::published();
    let u = sequence_propagator(&seq, &ha, &hb).unwrap();
    assert!(u.unitarity_defect() < 1e-10);
    let dec = decode_sequence(&seq);
    assert_eq!(dec.sequence.pulses()[0].duration, 3.8009);
    assert_eq!(dec.sequence.pulses()[0].tag, PulseTag::B);
    assert_eq!(dec.sequence.pulses()[33].duration, 3.9763);
    let ud = decoding_propagator(&dec, &ha, &hb).unwrap();
    assert!(ud.max_distance(&u.adjoint()).unwrap() < 1e-10);
    let id = ud.try_mul(&u).unwrap();
    assert!(id.max_distance(&Operator::identity(ha.basis())).unwrap() < 1e-10);
}

#[test]
fn decoding_is_the_reversed_recipe() {
    // Reversing B and the detunings gives the negated control Hamiltonians.
    let (space, ha, hb, _) = paper_setup();
    let rev = FieldConfig::rydberg_60f().reversed();
    let ra = control_hamiltonian(&space, &rev, PulseTag::A).unwrap();
    let rb = control_hamiltonian(&space, &rev, PulseTag::B).unwrap();
    let seq = PulseSequence::published();
    let dec = decode_sequence(&seq);
    let physical = sequence_propagator(&dec.sequence, &ra, &rb).unwrap();
    let formal = decoding_propagator(&dec, &ha, &hb).unwrap();
    assert!(physical.max_distance(&formal).unwrap() < 1e-12);
}

#[test]
fn residual_zero_when_errors_miss_the_code() {
    let space = LevelSpace::rydberg_60f();
    let code = space.code_indices();
    let mut diag = vec![1.0; 14];
    diag[code[0]] = 0.0;
    diag[code[1]] = 0.0;
    let e = Operator::from_real_diagonal(space.coupled(), &diag).unwrap();
    let id = Operator::identity(space.coupled());
    let r = coding_residual_for(&id, &[e.clone(), e.scale(2.0)], code).unwrap();
    assert_eq!(r.residual, 0.0);
}

#[test]
fn residual_identity_with_magnetic_z() {
    // Within J = 5/2 of L = 3, L_z + 2 S_z = g m with Lande g = 6/7, so the
    // block on the code is diag(-9/7, -3/7) and the deviation is (6/7)^2 / 2.
    let space = LevelSpace::rydberg_60f();
    let mz = &magnetic_moment_ops::<f64>(&space)[2];
    let id = Operator::identity(space.coupled());
    let r = coding_residual_for(&id, std::slice::from_ref(mz), space.code_indices()).unwrap();
    assert!((r.residual - 18.0 / 49.0).abs() < 1e-13);
    let normalized = ErrorModel::standard(&space, [0.0; 6], 1.0, 0);
    let r = coding_residual(&id, &normalized, &space).unwrap();
    assert!((r.condition_norms[2].powi(2) - 18.0 / 49.0 / 16.0).abs() < 1e-13);
}

#[test]
fn residual_matches_dense_oracle() {
    let (space, _, _, errors) = paper_setup();
    let mut rng = stream(11);
    for _ in 0..10 {
        let h = random_hermitian(space.coupled(), &mut rng);
        let u = propagator(&h, rng.random_range(0.1..3.0)).unwrap();
        let r = coding_residual(&u, &errors, &space).unwrap();
        let want = dense_residual(u.matrix(), &errors.generators, space.code_indices());
        assert!((r.residual - want).abs() < 1e-12 * want.max(1.0));
        assert!(r.unitarity_defect < 1e-10);
    }
}

#[test]
fn problem_agrees_with_operator_path() {
    let (space, ha, hb, errors) = paper_setup();
    let problem = CodingProblem::new(&ha, &hb, &errors, &space).unwrap();
    let u = sequence_propagator(&PulseSequence::published(), &ha, &hb).unwrap();
    let direct = coding_residual(&u, &errors, &space).unwrap().residual;
    let via = problem.residual(&PUBLISHED_TIMINGS);
    assert!((direct - via).abs() < 1e-12);
    assert_eq!(problem.n_residuals(), 6 * ENTRIES_PER_ERROR);
    let rv = problem.residual_vector(&PUBLISHED_TIMINGS);
    assert!((rv.norm_squared() - via).abs() < 1e-12);
}

#[test]
fn residual_invariances() {
    let (space, _, _, errors) = paper_setup();
    let mut rng = stream(5);
    let h = random_hermitian(space.coupled(), &mut rng);
    let u = propagator(&h, 1.3).unwrap();
    let base = coding_residual(&u, &errors, &space).unwrap().residual;

    let phased = u.scale(1.0).into_matrix().map(|z| z * C::from_polar(1.0, 0.77));
    let phased = Operator::new(space.coupled(), phased).unwrap();
    let r = coding_residual(&phased, &errors, &space).unwrap().residual;
    assert!((r - base).abs() < 1e-12);

    // Permutation with phases: V U V†, V E V†, code indices permuted.
    let perm: Vec<usize> = (0..14).map(|i| (i * 5 + 3) % 14).collect();
    let mut v = DMatrix::<C>::zeros(14, 14);
    for (i, &p) in perm.iter().enumerate() {
        v[(p, i)] = C::from_polar(1.0, 0.3 * i as f64);
    }
    let conj = |o: &Operator<f64>| Operator::new(space.coupled(), &v * o.matrix() * v.adjoint()).unwrap();
    let code = space.code_indices().map(|c| perm[c]);
    let moved: Vec<_> = errors.generators.iter().map(conj).collect();
    let r = coding_residual_for(&conj(&u), &moved, code).unwrap().residual;
    assert!((r - base).abs() < 1e-12);
}

#[test]
fn gradient_matches_central_differences() {
    let (space, ha, hb, errors) = paper_setup();
    let problem = CodingProblem::new(&ha, &hb, &errors, &space).unwrap();
    let mut rng = stream(99);
    for _ in 0..5 {
        let tau: Vec<f64> = (0..34).map(|_| rng.random_range(1.0..10.0)).collect();
        let (_, g) = problem.residual_and_gradient(&tau);
        let step = 1e-6;
        let fd: Vec<f64> = (0..34)
            .map(|i| {
                let mut p = tau.clone();
                let mut m = tau.clone();
                p[i] += step;
                m[i] -= step;
                (problem.residual(&p) - problem.residual(&m)) / (2.0 * step)
            })
            .collect();
        let scale = g.amax();
        let err = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err / scale < 1e-5, "relative gradient error {}", err / scale);
    }
}

#[test]
fn toy_problem_converges_and_beats_random_search() {
    let toy = toy_instance(3);
    assert_eq!(toy.space.dimension(), 4);
    let errors = ErrorModel::custom(vec![toy.error.clone()], vec![0.0], 1.0, 0).unwrap();
    let settings = OptimizerSettings { n_pulses: 6, tolerance: 1e-8, max_restarts: 200, ..Default::default() };
    let out = optimize_timings(&toy.ha, &toy.hb, &errors, &toy.space, &settings).unwrap();
    assert!(out.report.residual < 1e-8);
    assert!(out.sequence.durations().iter().all(|&t| (1.0..=10.0).contains(&t)));

    // Recheck with the dense oracle on the returned sequence.
    let u = sequence_propagator(&out.sequence, &toy.ha, &toy.hb).unwrap();
    assert!(dense_residual(u.matrix(), std::slice::from_ref(&toy.error), toy.space.code_indices()) < 1e-8);

    // Random search shows the objective reaches low values in the box.
    let problem = CodingProblem::new(&toy.ha, &toy.hb, &errors, &toy.space).unwrap();
    let mut rng = stream(17);
    let mut best = f64::INFINITY;
    for _ in 0..20000 {
        let tau: Vec<f64> = (0..6).map(|_| rng.random_range(1.0..10.0)).collect();
        best = best.min(problem.residual(&tau));
    }
    assert!(best < 0.05, "random search best {best}");
    assert!(out.report.residual <= best);
}

#[test]
fn paper_problem_converges() {
    let (space, ha, hb, errors) = paper_setup();
    let settings = OptimizerSettings { tolerance: 1e-10, max_restarts: 64, ..Default::default() };
    let out = optimize_timings(&ha, &hb, &errors, &space, &settings).unwrap();
    assert!(out.report.residual < 1e-10);
    assert_eq!(out.sequence.len(), 34);
    assert_eq!(out.sequence.pulses()[0].tag, PulseTag::A);
    assert!(out.report.unitarity_defect < 1e-10);
    let again = optimize_timings(&ha, &hb, &errors, &space, &settings).unwrap();
    assert_eq!(out.sequence, again.sequence);
    assert_eq!(out.restart, again.restart);
}

#[test]
fn two_pulses_cannot_code() {
    let (space, ha, hb, errors) = paper_setup();
    let settings = OptimizerSettings { n_pulses: 2, tolerance: 1e-6, max_restarts: 16, ..Default::default() };
    match optimize_timings(&ha, &hb, &errors, &space, &settings) {
        Err(Error::NonConvergence(nc)) => {
            assert!(nc.best_residual >= 1e-6);
            assert_eq!(nc.best_sequence.len(), 2);
            assert_eq!(nc.restarts, 16);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn propagators_are_unitary(seed in any::<u64>(), tau in -20.0f64..20.0) {
        let h = random_hermitian(Basis::Generic(14), &mut stream(seed));
        let u = propagator(&h.scale(5.0), tau).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn decode_inverts_any_sequence(durations in prop::collection::vec(0.1f64..10.0, 0..40), seed in any::<u64>()) {
        let mut rng = stream(seed);
        let ha = random_hermitian(Basis::Generic(6), &mut rng);
        let hb = random_hermitian(Basis::Generic(6), &mut rng);
        let seq = PulseSequence::coding(&durations).unwrap();
        let u = sequence_propagator(&seq, &ha, &hb).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
        let ud = decoding_propagator(&decode_sequence(&seq), &ha, &hb).unwrap();
        prop_assert!(ud.max_distance(&u.adjoint()).unwrap() < 1e-10);
    }
}
