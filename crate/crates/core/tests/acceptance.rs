use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rydberg_zeno::control::*;
use rydberg_zeno::kinetics::*;
use rydberg_zeno::operator::{Basis, Operator};
use rydberg_zeno::rng::{derive_seed, stream};
use rydberg_zeno::spin_algebra::*;
use rydberg_zeno::system_model::*;
use rydberg_zeno::zeno_cycle::*;

type C = Complex<f64>;

struct Outcome {
    pass: bool,
    detail: String,
    /// Canonical text of the numerical results, for the determinism check.
    output: String,
}

/// Criteria whose failure is understood and documented; a FAIL here does not
/// fail the run.
const RECORDED: &[(&str, &str)] =
    &[("1b", "the paper quotes 1-eta rounded to 0.00173; the exact value 0.0017316 is 1.6e-6 away")];

fn paper_hamiltonians() -> (LevelSpace, Operator<f64>, Operator<f64>) {
    let space = LevelSpace::rydberg_60f();
    let f = FieldConfig::rydberg_60f();
    let ha = control_hamiltonian(&space, &f, PulseTag::A).unwrap();
    let hb = control_hamiltonian(&space, &f, PulseTag::B).unwrap();
    (space, ha, hb)
}

fn random_hermitian(basis: Basis, rng: &mut impl Rng) -> Operator<f64> {
    let n = basis.dimension();
    let x = DMatrix::<C>::from_fn(n, n, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    Operator::new(basis, (&x + x.adjoint()).map(|z| z * 0.5)).unwrap()
}

fn bits(xs: &[f64]) -> String {
    xs.iter().fold(String::new(), |mut s, x| {
        let _ = write!(s, "{:016x},", x.to_bits());
        s
    })
}

fn eta_reference() -> f64 {
    12.0 * 2f64.sqrt() / 17.0
}

fn c1a() -> Outcome {
    let ratio = cg_rate_ratio();
    let eta = transfer_efficiency(ratio.value::<f64>(), 1.0).unwrap();
    let err = (eta - eta_reference()).abs();
    Outcome {
        pass: err < 1e-9,
        detail: format!("eta = {eta:.16}, |eta - 12*sqrt(2)/17| = {err:.2e}"),
        output: bits(&[eta]),
    }
}

fn c1b() -> Outcome {
    let ratio = cg_rate_ratio();
    let eta = transfer_efficiency(ratio.value::<f64>(), 1.0).unwrap();
    let err = ((1.0 - eta) - 0.00173).abs();
    Outcome {
        pass: err < 1e-6,
        detail: format!("1 - eta = {:.7}, |1 - eta - 0.00173| = {err:.2e}", 1.0 - eta),
        output: bits(&[eta]),
    }
}

fn c2() -> Outcome {
    let r = cg_rate_ratio();
    let branch = r.ratio == rational(9, 8) || r.ratio == rational(8, 9);
    let consistent = (r.efficiency::<f64>() - eta_reference()).abs() < 1e-12;
    let nonzero = r.path1.iter().chain(r.path2.iter()).all(|c| !c.is_zero());
    Outcome {
        pass: branch && consistent && nonzero,
        detail: format!("Gamma1/Gamma2 = {}", r.ratio),
        output: r.ratio.to_string(),
    }
}

fn c3() -> Outcome {
    let mut rng = stream(3);
    let mut worst: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let s = KineticsState::from_code_amplitudes(C::new(r, 0.0), C::new(0.0, r));
    for _ in 0..100 {
        let g1 = rng.random_range(0.01..10.0);
        let g2 = rng.random_range(0.01..10.0);
        let horizon = 10.0 / f64::min(g1, g2);
        for k in 1..=10 {
            let t = horizon * k as f64 / 10.0;
            let a = rate_ode_solve(g1, g2, &s, t).unwrap();
            let b = rate_closed_form(g1, g2, &s, t).unwrap();
            worst = worst.max(a.max_distance(&b));
        }
        let end = rate_ode_solve(g1, g2, &s, 60.0 / f64::min(g1, g2)).unwrap();
        let eta = transfer_efficiency(g1, g2).unwrap();
        worst_limit = worst_limit.max((end.rho_n1n2 - s.rho_g1g2 * eta).norm());
    }
    Outcome {
        pass: worst < 1e-8 && worst_limit < 1e-8,
        detail: format!("max |ode - exact| = {worst:.2e}, max |rho_n1n2(inf) - eta rho_g1g2(0)| = {worst_limit:.2e}"),
        output: bits(&[worst, worst_limit]),
    }
}

fn c4() -> Outcome {
    let mut orth: f64 = 0.0;
    for t1 in 0..=6 {
        for t2 in 0..=6 {
            let (j1, j2) = (h(t1), h(t2));
            let labels = coupled_labels(j1, j2);
            for &(ja, ma) in &labels {
                for &(jb, mb) in &labels {
                    let mut acc = 0.0;
                    for m1 in j1.projections() {
                        for m2 in j2.projections() {
                            let a: f64 = clebsch_gordan(j1, m1, j2, m2, ja, ma).unwrap();
                            let b: f64 = clebsch_gordan(j1, m1, j2, m2, jb, mb).unwrap();
                            acc += a * b;
                        }
                    }
                    let want = if (ja, ma) == (jb, mb) { 1.0 } else { 0.0 };
                    orth = orth.max((acc - want).abs());
                }
            }
        }
    }
    let mut algebra: f64 = 0.0;
    let i = C::new(0.0, 1.0);
    for twice in 0..=12 {
        let j = h(twice);
        let ops = angular_momentum_ops::<f64>(j).unwrap();
        let [x, y, z] = ops.cartesian();
        for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
            let comm = a.commutator(b).unwrap();
            algebra = algebra.max((comm.matrix() - c.matrix().map(|w| w * i)).camax());
        }
        let n = j.multiplicity();
        let jf = j.to_f64();
        let cas = ops.casimir();
        algebra = algebra.max((cas.matrix() - DMatrix::<C>::identity(n, n).map(|w| w * jf * (jf + 1.0))).camax());
    }
    let mut unitary: f64 = 0.0;
    for l in 0..=4 {
        unitary = unitary.max(couple_basis::<f64>(HalfInt::integer(l), HalfInt::HALF).unwrap().unitarity_defect());
    }
    Outcome {
        pass: orth < 1e-12 && algebra < 1e-12 && unitary < 1e-12,
        detail: format!("orthogonality {orth:.1e}, commutators/Casimir {algebra:.1e}, couple_basis {unitary:.1e}"),
        output: bits(&[orth, algebra, unitary]),
    }
}

fn c5() -> Outcome {
    let mut rng = stream(5);
    let mut defect: f64 = 0.0;
    for _ in 0..1000 {
        let hm = random_hermitian(Basis::Generic(14), &mut rng).scale(rng.random_range(0.1..10.0));
        let u = propagator(&hm, rng.random_range(-10.0..10.0)).unwrap();
        defect = defect.max(u.unitarity_defect());
    }
    let (_, ha, hb) = paper_hamiltonians();
    let seq = PulseSequence::published();
    let u = sequence_propagator(&seq, &ha, &hb).unwrap();
    let dec = decode_sequence(&seq);
    let ud = decoding_propagator(&dec, &ha, &hb).unwrap();
    let mut inverse = ud.max_distance(&u.adjoint()).unwrap();
    for k in 0..20 {
        let ha = random_hermitian(Basis::Generic(14), &mut rng);
        let hb = random_hermitian(Basis::Generic(14), &mut rng);
        let durations: Vec<f64> = (0..(k + 1)).map(|_| rng.random_range(0.1..10.0)).collect();
        let seq = PulseSequence::coding(&durations).unwrap();
        let u = sequence_propagator(&seq, &ha, &hb).unwrap();
        let ud = decoding_propagator(&decode_sequence(&seq), &ha, &hb).unwrap();
        inverse = inverse.max(ud.max_distance(&u.adjoint()).unwrap());
    }
    let first = dec.sequence.pulses()[0].duration;
    Outcome {
        pass: defect < 1e-10 && inverse < 1e-10 && first == 3.8009,
        detail: format!(
            "max unitarity defect {defect:.1e}, max |decode - U^dag| {inverse:.1e}, first decoded pulse {first} ns"
        ),
        output: bits(&[defect, inverse]),
    }
}

fn c6() -> Outcome {
    let (space, ha, hb) = paper_hamiltonians();
    let errors = ErrorModel::standard(&space, [0.0; 6], 1.0, 0);
    let settings = OptimizerSettings { tolerance: 1e-6, max_restarts: 500, ..Default::default() };
    let t0 = Instant::now();
    let full = optimize_timings(&ha, &hb, &errors, &space, &settings);
    let full_time = t0.elapsed();
    let toy = toy_instance(6);
    let toy_errors = ErrorModel::custom(vec![toy.error.clone()], vec![0.0], 1.0, 0).unwrap();
    let toy_settings = OptimizerSettings { n_pulses: 6, tolerance: 1e-8, max_restarts: 200, ..Default::default() };
    let t1 = Instant::now();
    let small = optimize_timings(&toy.ha, &toy.hb, &toy_errors, &toy.space, &toy_settings);
    let toy_time = t1.elapsed();
    match (full, small) {
        (Ok(f), Ok(t)) => Outcome {
            pass: f.report.residual < 1e-6
                && f.restarts_evaluated <= 500
                && t.report.residual < 1e-8
                && toy_time < Duration::from_secs(60)
                && full_time < Duration::from_secs(1800),
            detail: format!(
                "full residual {:.2e} (restart {}, {:.2?}); toy residual {:.2e} ({:.2?})",
                f.report.residual, f.restart, full_time, t.report.residual, toy_time
            ),
            output: format!("{}|{}", bits(&f.sequence.durations()), bits(&t.sequence.durations())),
        },
        (f, t) => {
            Outcome { pass: false, detail: format!("full: {:?}; toy: {:?}", f.err(), t.err()), output: String::new() }
        }
    }
}

fn c7() -> Outcome {
    let (space, ha, hb) = paper_hamiltonians();
    let errors = ErrorModel::standard(&space, [0.0; 6], 1.0, 0);
    let problem = CodingProblem::new(&ha, &hb, &errors, &space).unwrap();
    let mut rng = stream(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tau: Vec<f64> = (0..34).map(|_| rng.random_range(1.0..10.0)).collect();
        let (_, g) = problem.residual_and_gradient(&tau);
        let step = 1e-6;
        let mut err: f64 = 0.0;
        for i in 0..34 {
            let mut p = tau.clone();
            let mut m = tau.clone();
            p[i] += step;
            m[i] -= step;
            let fd = (problem.residual(&p) - problem.residual(&m)) / (2.0 * step);
            err = err.max((fd - g[i]).abs());
        }
        worst = worst.max(err / g.amax());
    }
    Outcome { pass: worst < 1e-5, detail: format!("max relative gradient error {worst:.2e}"), output: bits(&[worst]) }
}

fn coding_sequence() -> (LevelSpace, Operator<f64>, Operator<f64>, PulseSequence) {
    let (space, ha, hb) = paper_hamiltonians();
    let errors = ErrorModel::standard(&space, [0.0; 6], 1.0, 0);
    let seq = optimize_timings(&ha, &hb, &errors, &space, &OptimizerSettings::default()).unwrap().sequence;
    (space, ha, hb, seq)
}

fn test_qubit() -> [C; 2] {
    [C::new(0.6, 0.0), C::new(0.0, 0.8)]
}

fn c8() -> Outcome {
    let (space, ha, hb, seq) = coding_sequence();
    let errors = ErrorModel::standard(&space, [0.05; 6], 1e9, 8);
    let protocol = Protocol::new(space, &seq, &ha, &hb, errors).unwrap();
    let intervals: Vec<f64> = (0..6).map(|k| 0.1 * 10f64.powf(1.4 * k as f64 / 5.0)).collect();
    let mut slopes = Vec::new();
    let mut out = Vec::new();
    for protected in [false, true] {
        let cfg = CycleConfig { protected, seed: 8, ..Default::default() };
        let pts = sweep_intervals(test_qubit(), &protocol, &cfg, &intervals, 64).unwrap();
        let inf: Vec<f64> = pts.iter().map(|p| p.mean_infidelity).collect();
        out.extend_from_slice(&inf);
        slopes.push(scaling_fit(&intervals, &inf).map(|f| f.slope));
    }
    match (&slopes[0], &slopes[1]) {
        (Ok(u), Ok(p)) => Outcome {
            pass: (u - 2.0).abs() <= 0.1 && *p >= 3.5,
            detail: format!("unprotected slope {u:.4}, protected slope {p:.4}"),
            output: bits(&out),
        },
        _ => Outcome { pass: false, detail: format!("fit refused: {slopes:?}"), output: bits(&out) },
    }
}

fn c9() -> Outcome {
    let space = LevelSpace::rydberg_60f();
    let mut rng = stream(9);
    let mut worst_sigma: f64 = 0.0;
    let mut freqs = Vec::new();
    for k in 0..10 {
        let mut v = nalgebra::DVector::<C>::from_fn(14, |_, _| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let [a, b] = space.code_indices();
        v[a] *= 4.0;
        v[b] *= 4.0;
        let v = &v / C::new(v.norm(), 0.0);
        let p = code_probability(&v, &space);
        let mut trial_rng = stream(derive_seed(9, k));
        let trials = 10_000;
        let hits = (0..trials).filter(|_| project_code(&v, &space, 1.0, &mut trial_rng).unwrap().is_success()).count();
        let freq = hits as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        worst_sigma = worst_sigma.max((freq - p).abs() / sigma);
        freqs.push(freq);
    }
    Outcome {
        pass: worst_sigma < 4.0,
        detail: format!("worst deviation {worst_sigma:.2} sigma over 10 states"),
        output: bits(&freqs),
    }
}

fn c10() -> Outcome {
    let (space, ha, hb, seq) = coding_sequence();
    let fs = FineStructure::RYDBERG_60F;
    let errors = ErrorModel::standard(&space, [0.005; 6], 5.0, 10);
    let protocol = Protocol::new(space, &seq, &ha, &hb, errors).unwrap();
    let at = |k: f64| {
        let cfg = CycleConfig { zeno_interval: k * fs.period(), fine_structure: fs, seed: 10, ..Default::default() };
        sweep_intervals(test_qubit(), &protocol, &cfg, &[cfg.zeno_interval], 16).unwrap()[0].mean_infidelity
    };
    let (whole, half) = (at(1.0), at(1.5));
    Outcome {
        pass: whole < half,
        detail: format!("1 - F at tau_f: {whole:.3e}, at 1.5 tau_f: {half:.3e}"),
        output: bits(&[whole, half]),
    }
}

fn run(id: &str, title: &str, budget: Duration, f: fn() -> Outcome, failures: &mut Vec<String>) -> Outcome {
    let t = Instant::now();
    let mut out = f();
    let elapsed = t.elapsed();
    if elapsed > budget {
        out.pass = false;
        out.detail.push_str(&format!("; over budget {budget:?}"));
    }
    let status = if out.pass { "PASS" } else { "FAIL" };
    let note =
        RECORDED.iter().find(|(r, _)| *r == id).filter(|_| !out.pass).map(|(_, why)| format!(" [recorded: {why}]"));
    println!("criterion {id:>3} {status} {title}: {} ({elapsed:.2?}){}", out.detail, note.clone().unwrap_or_default());
    if !out.pass && note.is_none() {
        failures.push(id.to_string());
    }
    out
}

fn main() {
    let mut failures = Vec::new();
    let s = Duration::from_secs;
    run("1a", "eta reproduction", s(1), c1a, &mut failures);
    run("1b", "1 - eta against 0.00173", s(1), c1b, &mut failures);
    run("2", "rate ratio branch", s(1), c2, &mut failures);
    run("3", "ODE vs closed form", s(10), c3, &mut failures);
    run("4", "structural identities", s(10), c4, &mut failures);
    run("5", "propagator contracts", s(30), c5, &mut failures);
    let o6 = run("6", "coding feasibility", s(1800), c6, &mut failures);
    run("7", "gradient correctness", s(60), c7, &mut failures);
    let o8 = run("8", "Zeno scaling", s(300), c8, &mut failures);
    let o9 = run("9", "projection sampling", s(60), c9, &mut failures);
    let o10 = run("10", "fine-structure ordering", s(300), c10, &mut failures);

    let again = [c6(), c8(), c9(), c10()];
    let identical = [&o6, &o8, &o9, &o10].iter().zip(&again).all(|(a, b)| a.output == b.output && !a.output.is_empty());
    let status = if identical { "PASS" } else { "FAIL" };
    println!("criterion  11 {status} determinism: reruns of 6, 8, 9, 10 byte-identical = {identical}");
    if !identical {
        failures.push("11".into());
    }

    if failures.is_empty() {
        println!("acceptance: all criteria met or recorded");
    } else {
        println!("acceptance: unexpected failures {failures:?}");
        std::process::exit(1);
    }
}
