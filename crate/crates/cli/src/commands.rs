use std::path::Path;

use rydberg_zeno::control::{optimize_problem, CodingProblem, PulseSequence};
use rydberg_zeno::kinetics::{
    cg_rate_ratio, rate_closed_form, rate_dominance_check, rate_ode_trajectory, three_photon_rate, transfer_efficiency,
};
use rydberg_zeno::system_model::{
    control_hamiltonian, fine_structure_h0, raman_hamiltonian, zeeman_hamiltonian, LevelSpace, PulseTag,
};
use rydberg_zeno::zeno_cycle::{run_cycles, scaling_fit, sweep_intervals, Protocol};
use rydberg_zeno::{Error, KineticsState, Operator};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::*;

fn hamiltonians(cfg: &RunConfig, space: &LevelSpace) -> Result<(Operator, Operator), CliError> {
    let fields = cfg.fields.to_model();
    Ok((control_hamiltonian(space, &fields, PulseTag::A)?, control_hamiltonian(space, &fields, PulseTag::B)?))
}

pub fn model(cfg: &RunConfig, out: &OutDir) -> Result<ModelDump, CliError> {
    let space = cfg.level_space()?;
    let fields = cfg.fields.to_model();
    let mut matrices = vec![
        MatrixDump::new("zeeman", "rad/ns", &zeeman_hamiltonian(&space, fields.b_field)),
        MatrixDump::new("raman_a", "rad/ns", &raman_hamiltonian(&space, &fields, PulseTag::A)?),
        MatrixDump::new("raman_b", "rad/ns", &raman_hamiltonian(&space, &fields, PulseTag::B)?),
        MatrixDump::new("h0", "rad/ns", &fine_structure_h0(&space, &cfg.fine_structure())),
    ];
    let errors = cfg.error_model(&space);
    for (name, g) in errors.names.iter().zip(&errors.generators) {
        matrices.push(MatrixDump::new(name, "1", g));
    }
    let dump = ModelDump {
        dimension: space.dimension(),
        basis: space.basis().iter().map(|b| BasisLabel { j: b.j.to_string(), m_j: b.m_j.to_string() }).collect(),
        code_indices: space.code_indices(),
        matrices,
    };
    out.json(MODEL_FILE, &dump)?;
    Ok(dump)
}

fn coding_output(problem: &CodingProblem, names: &[String], timings: &[f64]) -> CodingOutput {
    let s = problem.report(timings).summary();
    CodingOutput {
        n_pulses: timings.len(),
        total_duration: timings.iter().sum(),
        residual: s.residual,
        error_names: names.to_vec(),
        condition_norms: s.condition_norms,
        unitarity_defect: s.unitarity_defect,
    }
}

fn coding_problem(cfg: &RunConfig) -> Result<(CodingProblem, Vec<String>), CliError> {
    let space = cfg.level_space()?;
    let (ha, hb) = hamiltonians(cfg, &space)?;
    let errors = cfg.error_model(&space);
    Ok((CodingProblem::new(&ha, &hb, &errors, &space)?, errors.names))
}

/// Optimizes the coding timings. Artifacts are written either way; without
/// convergence the best timings are kept and a `NonConvergence` error returned.
pub fn optimize(cfg: &RunConfig, out: &OutDir) -> Result<OptimizeOutput, CliError> {
    let settings = cfg.optimizer_settings()?;
    let (problem, names) = coding_problem(cfg)?;
    let (timings, report) = match optimize_problem(&problem, &settings) {
        Ok(o) => {
            let t = o.sequence.durations();
            let coding = coding_output(&problem, &names, &t);
            let r = OptimizeOutput {
                converged: true,
                tolerance: settings.tolerance,
                restart: Some(o.restart),
                restarts_evaluated: o.restarts_evaluated,
                iterations: o.iterations,
                coding,
            };
            (t, r)
        }
        Err(Error::NonConvergence(nc)) => {
            let t = nc.best_sequence.durations();
            let coding = coding_output(&problem, &names, &t);
            let r = OptimizeOutput {
                converged: false,
                tolerance: settings.tolerance,
                restart: None,
                restarts_evaluated: nc.restarts,
                iterations: nc.iterations,
                coding,
            };
            (t, r)
        }
        Err(e) => return Err(e.into()),
    };
    out.json(TIMINGS_FILE, &timings)?;
    out.json(CODING_FILE, &report)?;
    if !report.converged {
        return Err(CliError::NonConvergence(format!(
            "no restart reached residual {:e}; best {:e} after {} restarts",
            report.tolerance, report.coding.residual, report.restarts_evaluated
        )));
    }
    Ok(report)
}

/// Reads a timing vector: a JSON array of positive durations in ns, A first.
pub fn read_timings(path: &Path) -> Result<PulseSequence, CliError> {
    let t: Vec<f64> = read_json(path)?;
    if t.is_empty() {
        return Err(CliError::Config(format!("{}: timing list is empty", path.display())));
    }
    PulseSequence::coding(&t).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn verify(cfg: &RunConfig, timings: &Path, out: &OutDir) -> Result<CodingOutput, CliError> {
    let seq = read_timings(timings)?;
    let (problem, names) = coding_problem(cfg)?;
    let report = coding_output(&problem, &names, &seq.durations());
    out.json(VERIFY_FILE, &report)?;
    Ok(report)
}

fn coding_sequence(cfg: &RunConfig, timings: Option<&Path>, out: &OutDir) -> Result<PulseSequence, CliError> {
    match timings {
        Some(p) => read_timings(p),
        None => {
            optimize(cfg, out)?;
            read_timings(&out.path(TIMINGS_FILE))
        }
    }
}

/// Cycle traces at the configured interval, protected and free, plus the
/// scaling sweep of both.
pub fn simulate(cfg: &RunConfig, timings: Option<&Path>, out: &OutDir) -> Result<SweepOutput, CliError> {
    let seq = coding_sequence(cfg, timings, out)?;
    let space = cfg.level_space()?;
    let (ha, hb) = hamiltonians(cfg, &space)?;
    let errors = cfg.error_model(&space);
    let protocol = Protocol::new(space, &seq, &ha, &hb, errors)?;
    let qubit = cfg.initial_qubit()?;
    let intervals: Vec<f64> = cfg.cycle.sweep.iter().map(|t| t.value()).collect();
    let mut series = Vec::new();
    for (protected, file) in [(true, TRACE_PROTECTED_FILE), (false, TRACE_UNPROTECTED_FILE)] {
        let cc = cfg.cycle_config(cfg.cycle.zeno_interval.value(), protected);
        let trace = run_cycles(qubit, &protocol, &cc)?;
        out.csv(file, &trace.records)?;
        let points = if intervals.is_empty() {
            Vec::new()
        } else {
            sweep_intervals(qubit, &protocol, &cc, &intervals, cfg.cycle.trajectories)?
        };
        let inf: Vec<f64> = points.iter().map(|p| p.mean_infidelity).collect();
        let (fit, fit_refused) = match scaling_fit(&intervals, &inf) {
            _ if intervals.is_empty() => (None, None),
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        series.push(SweepSeries { protected, points, fit, fit_refused });
    }
    let period = cfg.fine_structure().period();
    let sweep = SweepOutput {
        n_cycles: cfg.cycle.n_cycles,
        trajectories: cfg.cycle.trajectories,
        fine_structure_period: period.is_finite().then_some(period),
        series,
    };
    out.json(SWEEP_FILE, &sweep)?;
    Ok(sweep)
}

/// Projection kinetics with the Clebsch-Gordan weighted branch rates.
pub fn project(cfg: &RunConfig, out: &OutDir) -> Result<EtaOutput, CliError> {
    let k = &cfg.kinetics;
    let params = k.params();
    let gamma = three_photon_rate(&params)?;
    let ratio = cg_rate_ratio();
    let product = |p: &[rydberg_zeno::spin_algebra::ExactCg; 3]| p.iter().map(|c| c.to_f64()).product::<f64>();
    let (c1, c2) = (product(&ratio.path1), product(&ratio.path2));
    let (g1, g2) = (gamma * c1 * c1, gamma * c2 * c2);
    let [a, b] = cfg.initial_qubit()?;
    let rho0 = KineticsState::from_code_amplitudes(a, b);
    let n = k.samples;
    let times: Vec<f64> = (0..n).map(|i| k.t_max.value() * i as f64 / (n - 1) as f64).collect();
    let states = rate_ode_trajectory(g1, g2, &rho0, &times)?;
    let mut worst: f64 = 0.0;
    for (t, s) in times.iter().zip(&states) {
        worst = worst.max(s.max_distance(&rate_closed_form(g1, g2, &rho0, *t)?));
    }
    let rows: Vec<KineticsRow> = times.iter().zip(&states).map(|(t, s)| KineticsRow::new(*t, s)).collect();
    out.csv(KINETICS_FILE, &rows)?;
    let last = states.last().expect("at least two samples");
    let eta = transfer_efficiency(g1, g2)?;
    let report = EtaOutput {
        rate_ratio: ratio.ratio.to_string(),
        rate_ratio_value: ratio.value(),
        eta,
        one_minus_eta: 1.0 - eta,
        path_1_cg_product: c1,
        path_2_cg_product: c2,
        gamma,
        gamma_1: g1,
        gamma_2: g2,
        transferred_coherence: if rho0.rho_g1g2.norm() > 0.0 {
            last.rho_n1n2.norm() / rho0.rho_g1g2.norm()
        } else {
            0.0
        },
        max_ode_closed_form_distance: worst,
        dominance: rate_dominance_check(&params, &k.lifetimes.to_model(), k.threshold)?,
    };
    out.json(ETA_FILE, &report)?;
    Ok(report)
}
