//! Multi-start timing optimization of the coding objective.
//!
//! Each restart draws timings uniformly inside the bounds and runs a
//! box-projected Levenberg-Marquardt descent on the residual vector, with an
//! analytic Jacobian. When the damped step stops making progress a compass
//! search takes over, and LM resumes after any improvement it finds.
//! Restarts are evaluated in fixed-size batches in parallel; the accepted
//! result is the converged restart with the lowest index, so the outcome
//! does not depend on thread scheduling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coding::{CodingProblem, CodingReport};
use super::sequence::PulseSequence;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::rng::substream;
use crate::system_model::{ErrorModel, LevelSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub n_pulses: usize,
    /// Residual below which a restart counts as converged.
    pub tolerance: f64,
    pub max_restarts: usize,
    /// LM iterations per restart.
    pub max_iterations: usize,
    /// ns
    pub min_duration: f64,
    /// ns
    pub max_duration: f64,
    pub seed: u64,
    /// Restarts evaluated concurrently per round.
    pub batch_size: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            n_pulses: 34,
            tolerance: 1e-12,
            max_restarts: 500,
            max_iterations: 400,
            min_duration: 1.0,
            max_duration: 10.0,
            seed: 1,
            batch_size: 8,
        }
    }
}

impl OptimizerSettings {
    fn validate(&self) -> Result<()> {
        let ok = self.n_pulses > 0
            && self.tolerance > 0.0
            && self.max_restarts > 0
            && self.batch_size > 0
            && self.min_duration > 0.0
            && self.max_duration > self.min_duration;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid optimizer settings {self:?}")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimized {
    pub sequence: PulseSequence,
    pub report: CodingReport<f64>,
    /// Index of the accepted restart.
    pub restart: usize,
    pub restarts_evaluated: usize,
    /// LM iterations of the accepted restart.
    pub iterations: usize,
}

/// Best result reached when no restart met the tolerance.
#[derive(Clone, Debug)]
pub struct NonConvergence {
    pub best_sequence: PulseSequence,
    pub best_residual: f64,
    pub restarts: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
struct RestartResult {
    index: usize,
    timings: Vec<f64>,
    residual: f64,
    iterations: usize,
}

pub fn optimize_timings(
    ha: &Operator<f64>,
    hb: &Operator<f64>,
    errors: &ErrorModel<f64>,
    space: &LevelSpace,
    settings: &OptimizerSettings,
) -> Result<Optimized> {
    let problem = CodingProblem::new(ha, hb, errors, space)?;
    optimize_problem(&problem, settings)
}

pub fn optimize_problem(problem: &CodingProblem, settings: &OptimizerSettings) -> Result<Optimized> {
    settings.validate()?;
    let mut best: Option<RestartResult> = None;
    let mut total_iterations = 0;
    let mut start = 0;
    while start < settings.max_restarts {
        let end = (start + settings.batch_size).min(settings.max_restarts);
        let batch: Vec<RestartResult> =
            (start..end).into_par_iter().map(|i| run_restart(problem, settings, i)).collect();
        total_iterations += batch.iter().map(|r| r.iterations).sum::<usize>();
        // Batch is in index order; strict comparison keeps the lowest index on ties.
        for r in batch {
            if best.as_ref().is_none_or(|b| r.residual < b.residual) {
                best = Some(r);
            }
        }
        start = end;
        let b = best.as_ref().expect("at least one restart");
        if b.residual < settings.tolerance {
            break;
        }
    }
    let best = best.expect("at least one restart");
    let sequence = PulseSequence::coding(&best.timings)?;
    if best.residual < settings.tolerance {
        Ok(Optimized {
            report: problem.report(&best.timings),
            sequence,
            restart: best.index,
            restarts_evaluated: start,
            iterations: best.iterations,
        })
    } else {
        Err(Error::NonConvergence(Box::new(NonConvergence {
            best_sequence: sequence,
            best_residual: best.residual,
            restarts: start,
            iterations: total_iterations,
        })))
    }
}

fn clamp(x: &mut [f64], lo: f64, hi: f64) {
    for v in x {
        *v = v.clamp(lo, hi);
    }
}

fn run_restart(problem: &CodingProblem, s: &OptimizerSettings, index: usize) -> RestartResult {
    let mut rng = substream(s.seed, index as u64);
    let mut tau: Vec<f64> = (0..s.n_pulses).map(|_| rng.random_range(s.min_duration..s.max_duration)).collect();
    let (mut r, mut jac) = problem.residual_and_jacobian(&tau);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let n = s.n_pulses;

    while iterations < s.max_iterations && cost >= s.tolerance {
        iterations += 1;
        let g = jac.transpose() * &r;
        let jtj = jac.transpose() * &jac;
        let mut improved = false;
        while lambda < 1e10 {
            let a = &jtj + DMatrix::<f64>::identity(n, n) * lambda;
            let Some(chol) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step: DVector<f64> = chol.solve(&(-&g));
            let mut trial: Vec<f64> = tau.iter().zip(step.iter()).map(|(t, d)| t + d).collect();
            clamp(&mut trial, s.min_duration, s.max_duration);
            let trial_cost = problem.residual(&trial);
            if trial_cost < cost {
                tau = trial;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            match compass_search(problem, &tau, cost, s) {
                Some((t, c)) if c < cost => {
                    tau = t;
                    lambda = 1e-3;
                }
                _ => break,
            }
        }
        let (nr, nj) = problem.residual_and_jacobian(&tau);
        r = nr;
        jac = nj;
        cost = r.norm_squared();
    }
    RestartResult { index, timings: tau, residual: cost, iterations }
}

/// Derivative-free coordinate search used when the damped step stalls.
fn compass_search(problem: &CodingProblem, start: &[f64], cost: f64, s: &OptimizerSettings) -> Option<(Vec<f64>, f64)> {
    let mut tau = start.to_vec();
    let mut best = cost;
    let mut step = 0.05 * (s.max_duration - s.min_duration);
    let mut sweeps = 0;
    while step > 1e-10 && sweeps < 60 {
        sweeps += 1;
        let mut moved = false;
        for i in 0..tau.len() {
            for dir in [1.0, -1.0] {
                let old = tau[i];
                tau[i] = (old + dir * step).clamp(s.min_duration, s.max_duration);
                let c = problem.residual(&tau);
                if c < best {
                    best = c;
                    moved = true;
                    break;
                }
                tau[i] = old;
            }
        }
        if moved && best < 0.5 * cost {
            break;
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best < cost).then_some((tau, best))
}
