//! Protection cycles: pump, code, noisy free evolution, decode, project,
//! repump. Fidelity of the recovered qubit is tracked per cycle.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{decode_sequence, decoding_propagator, sequence_propagator, PulseSequence, SpectralPropagator};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::rng::{derive_seed, stream};
use crate::system_model::{fine_structure_h0, FineStructure, LevelSpace};
use crate::ErrorModel;
use crate::C64;

const NORM_TOL: f64 = 1e-9;

/// How the projection outcome is handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// Keep the post-selected state and record the success probability.
    #[default]
    Conditional,
    /// Draw the outcome; a failure ends the trajectory.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    /// Free-evolution time between decode and the next code, ns.
    pub zeno_interval: f64,
    pub n_cycles: usize,
    pub projection_efficiency: f64,
    pub fine_structure: FineStructure,
    pub seed: u64,
    pub protected: bool,
    pub projection: ProjectionMode,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            zeno_interval: 1.0,
            n_cycles: 1,
            projection_efficiency: 1.0,
            fine_structure: FineStructure::NONE,
            seed: 1,
            protected: true,
            projection: ProjectionMode::Conditional,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.zeno_interval.is_nan() || self.zeno_interval <= 0.0 {
            return Err(Error::InvalidParameter("zeno_interval must be positive".into()));
        }
        let eta = self.projection_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("projection efficiency {eta} outside (0, 1]")));
        }
        if self.fine_structure.splitting < 0.0 {
            return Err(Error::InvalidParameter("negative fine-structure splitting".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub fidelity: f64,
    pub survival_prob: f64,
    pub cumulative_success: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub records: Vec<CycleRecord>,
    /// Set when a sampled projection failed; no records follow it.
    pub terminated: bool,
}

impl FidelityTrace {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.records.last().map(|r| r.fidelity)
    }

    pub fn cumulative_success(&self) -> f64 {
        if self.terminated {
            0.0
        } else {
            self.records.last().map_or(1.0, |r| r.cumulative_success)
        }
    }
}

fn check_qubit(q: [C64; 2]) -> Result<()> {
    let norm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `α|ν₁⟩ + β|ν₂⟩ ↦ α|γ₁⟩ + β|γ₂⟩` in the coupled basis.
pub fn pump(qubit: [C64; 2], space: &LevelSpace) -> Result<DVector<C64>> {
    check_qubit(qubit)?;
    let mut v = DVector::zeros(space.dimension());
    let [a, b] = space.code_indices();
    v[a] = qubit[0];
    v[b] = qubit[1];
    Ok(v)
}

/// Pumped density matrix; with `eta`, the code coherence is multiplied by it.
pub fn pump_density(qubit: [C64; 2], space: &LevelSpace, eta: Option<f64>) -> Result<DMatrix<C64>> {
    let v = pump(qubit, space)?;
    let mut rho = &v * v.adjoint();
    if let Some(eta) = eta {
        damp_code_coherence(&mut rho, space.code_indices(), eta);
    }
    Ok(rho)
}

fn damp_code_coherence(rho: &mut DMatrix<C64>, code: [usize; 2], eta: f64) {
    let [a, b] = code;
    rho[(a, b)] *= eta;
    rho[(b, a)] *= eta;
}

/// Stochastic free-evolution generator `H₀ + Σ f_m(t) E_m`.
#[derive(Clone, Debug)]
pub struct NoiseProcess {
    h0: DMatrix<C64>,
    generators: Vec<DMatrix<C64>>,
    amplitudes: Vec<f64>,
    correlation_time: f64,
}

impl NoiseProcess {
    pub fn new(errors: &ErrorModel, space: &LevelSpace, fine_structure: &FineStructure) -> Result<Self> {
        if errors.amplitudes.len() != errors.len() {
            return Err(Error::InvalidParameter("one amplitude per error generator".into()));
        }
        if errors.amplitudes.iter().any(|a| a.is_nan() || *a < 0.0) {
            return Err(Error::InvalidParameter("noise amplitudes must be non-negative".into()));
        }
        if errors.correlation_time.is_nan() || errors.correlation_time <= 0.0 {
            return Err(Error::InvalidParameter("correlation_time must be positive".into()));
        }
        for e in &errors.generators {
            if e.basis() != space.coupled() {
                return Err(Error::BasisMismatch { left: space.coupled().to_string(), right: e.basis().to_string() });
            }
        }
        Ok(NoiseProcess {
            h0: fine_structure_h0::<f64>(space, fine_structure).into_matrix(),
            generators: errors.generators.iter().map(|e| e.matrix().clone()).collect(),
            amplitudes: errors.amplitudes.clone(),
            correlation_time: errors.correlation_time,
        })
    }

    pub fn dimension(&self) -> usize {
        self.h0.nrows()
    }

    /// Evolution for `dt` under `H₀ + Σ f_m E_m` with constant couplings.
    pub fn unitary_with(&self, couplings: &[f64], dt: f64) -> Result<DMatrix<C64>> {
        if couplings.len() != self.generators.len() {
            return Err(Error::Dimension { expected: self.generators.len(), got: couplings.len() });
        }
        let n = self.dimension();
        let mut hm = self.h0.clone();
        for (g, &f) in self.generators.iter().zip(couplings) {
            if f != 0.0 {
                hm += g.map(|z| z * f);
            }
        }
        if dt == 0.0 || is_zero(&hm) {
            Ok(DMatrix::identity(n, n))
        } else if is_diagonal(&hm) {
            Ok(DMatrix::from_diagonal(&hm.diagonal().map(|d| C64::from_polar(1.0, -d.re * dt))))
        } else {
            let h = Operator::new(crate::operator::Basis::Generic(n), hm)?;
            Ok(SpectralPropagator::new(&h)?.matrix_at(dt))
        }
    }

    /// Draws one realization of `f_m(t)` over `[0, dt]` and returns the
    /// resulting evolution operator.
    pub fn sample_unitary(&self, dt: f64, rng: &mut impl Rng) -> Result<DMatrix<C64>> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        let n = self.dimension();
        let steps = (dt / self.correlation_time).ceil().max(1.0) as usize;
        let mut u = DMatrix::<C64>::identity(n, n);
        let mut f = vec![0.0; self.generators.len()];
        let mut elapsed = 0.0;
        for k in 0..steps {
            let end = if k + 1 == steps { dt } else { ((k + 1) as f64 * self.correlation_time).min(dt) };
            let span = end - elapsed;
            elapsed = end;
            for (fm, &a) in f.iter_mut().zip(&self.amplitudes) {
                *fm = a * rng.random_range(-1.0..=1.0);
            }
            if span > 0.0 {
                u = self.unitary_with(&f, span)? * u;
            }
        }
        Ok(u)
    }
}

fn is_zero(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| *z == C64::new(0.0, 0.0))
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    m.iter().enumerate().all(|(k, z)| k % m.nrows() == k / m.nrows() || *z == C64::new(0.0, 0.0))
}

/// Evolves a state through one noise realization of length `dt`.
pub fn error_evolution(
    state: &DVector<C64>,
    noise: &NoiseProcess,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<DVector<C64>> {
    if state.len() != noise.dimension() {
        return Err(Error::Dimension { expected: noise.dimension(), got: state.len() });
    }
    Ok(noise.sample_unitary(dt, rng)? * state)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionOutcome {
    /// Code-block density matrix after the projection, coherence damped by η.
    Success {
        rho: Matrix2<C64>,
        probability: f64,
    },
    Failure {
        probability: f64,
    },
}

impl ProjectionOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ProjectionOutcome::Success { .. })
    }
}

/// `‖P state‖²`.
pub fn code_probability(state: &DVector<C64>, space: &LevelSpace) -> f64 {
    let [a, b] = space.code_indices();
    state[a].norm_sqr() + state[b].norm_sqr()
}

/// Samples the projection onto the code space.
pub fn project_code(
    state: &DVector<C64>,
    space: &LevelSpace,
    eta: f64,
    rng: &mut impl Rng,
) -> Result<ProjectionOutcome> {
    if state.len() != space.dimension() {
        return Err(Error::Dimension { expected: space.dimension(), got: state.len() });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let p = code_probability(state, space).min(1.0);
    let draw: f64 = rng.random();
    if draw >= p {
        return Ok(ProjectionOutcome::Failure { probability: p });
    }
    let [a, b] = space.code_indices();
    let c = nalgebra::Vector2::new(state[a], state[b]) / C64::from(p.sqrt());
    let mut rho = c * c.adjoint();
    rho[(0, 1)] *= eta;
    rho[(1, 0)] *= eta;
    Ok(ProjectionOutcome::Success { rho, probability: p })
}

/// Success probability of the projection and the normalized post-projection
/// density matrix (coherence damped by `eta`), `None` when it cannot succeed.
pub fn project_density(rho: &DMatrix<C64>, space: &LevelSpace, eta: f64) -> (f64, Option<DMatrix<C64>>) {
    let [a, b] = space.code_indices();
    let p = (rho[(a, a)].re + rho[(b, b)].re).clamp(0.0, 1.0);
    if p <= 0.0 {
        return (0.0, None);
    }
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for &i in &[a, b] {
        for &j in &[a, b] {
            out[(i, j)] = rho[(i, j)] / p;
        }
    }
    damp_code_coherence(&mut out, [a, b], eta);
    (p, Some(out))
}

/// Everything a cycle needs, with the coding and decoding unitaries
/// assembled once.
#[derive(Clone, Debug)]
pub struct Protocol {
    space: LevelSpace,
    coding: Option<(DMatrix<C64>, DMatrix<C64>)>,
    errors: ErrorModel,
}

impl Protocol {
    /// Coding with `seq` under `ha, hb`; decoding through the reversed
    /// sequence with negated Hamiltonians.
    pub fn new(
        space: LevelSpace,
        seq: &PulseSequence,
        ha: &Operator<f64>,
        hb: &Operator<f64>,
        errors: ErrorModel,
    ) -> Result<Self> {
        let code = sequence_propagator(seq, ha, hb)?;
        if code.basis() != space.coupled() {
            return Err(Error::BasisMismatch { left: space.coupled().to_string(), right: code.basis().to_string() });
        }
        let decode = decoding_propagator(&decode_sequence(seq), ha, hb)?;
        Ok(Protocol { space, coding: Some((code.into_matrix(), decode.into_matrix())), errors })
    }

    /// Supplies the coding unitary directly.
    pub fn from_unitary(space: LevelSpace, coding: &Operator<f64>, errors: ErrorModel) -> Result<Self> {
        if coding.basis() != space.coupled() {
            return Err(Error::BasisMismatch { left: space.coupled().to_string(), right: coding.basis().to_string() });
        }
        let u = coding.matrix().clone();
        let ud = u.adjoint();
        Ok(Protocol { space, coding: Some((u, ud)), errors })
    }

    /// No coding available; only unprotected runs are possible.
    pub fn unprotected(space: LevelSpace, errors: ErrorModel) -> Self {
        Protocol { space, coding: None, errors }
    }

    pub fn space(&self) -> &LevelSpace {
        &self.space
    }

    pub fn errors(&self) -> &ErrorModel {
        &self.errors
    }

    pub fn with_errors(&self, errors: ErrorModel) -> Self {
        Protocol { errors, ..self.clone() }
    }
}

/// Runs `cfg.n_cycles` cycles from the pumped `initial_qubit`. The noise
/// stream is seeded by `cfg.seed`.
pub fn run_cycles(initial_qubit: [C64; 2], protocol: &Protocol, cfg: &CycleConfig) -> Result<FidelityTrace> {
    cfg.validate()?;
    let space = &protocol.space;
    let noise = NoiseProcess::new(&protocol.errors, space, &cfg.fine_structure)?;
    let coding = match (&protocol.coding, cfg.protected) {
        (Some(c), true) => Some(c),
        (None, true) => return Err(Error::MissingCoding),
        (_, false) => None,
    };
    let ideal = pump(initial_qubit, space)?;
    let mut rho = &ideal * ideal.adjoint();
    let mut rng = stream(cfg.seed);
    let eta = cfg.projection_efficiency;
    let mut trace = FidelityTrace::default();
    let mut cumulative = 1.0;

    for cycle in 1..=cfg.n_cycles {
        let e = noise.sample_unitary(cfg.zeno_interval, &mut rng)?;
        let survival = match coding {
            Some((u, ud)) => {
                let total = ud * &e * u;
                rho = &total * &rho * total.adjoint();
                let (p, projected) = project_density(&rho, space, eta);
                let success = match cfg.projection {
                    ProjectionMode::Conditional => projected.is_some(),
                    ProjectionMode::Sampled => rng.random::<f64>() < p,
                };
                match projected {
                    Some(mut next) if success => {
                        damp_code_coherence(&mut next, space.code_indices(), eta);
                        rho = next;
                    }
                    _ => {
                        trace.terminated = true;
                        break;
                    }
                }
                p
            }
            None => {
                rho = &e * &rho * e.adjoint();
                1.0
            }
        };
        cumulative *= survival;
        let fidelity = (ideal.adjoint() * &rho * &ideal)[(0, 0)].re.clamp(0.0, 1.0);
        trace.records.push(CycleRecord { cycle, fidelity, survival_prob: survival, cumulative_success: cumulative });
    }
    Ok(trace)
}

/// Convenience wrapper building the protocol from a coding sequence.
pub fn run_cycles_with_sequence(
    initial_qubit: [C64; 2],
    seq: &PulseSequence,
    ha: &Operator<f64>,
    hb: &Operator<f64>,
    space: &LevelSpace,
    errors: &ErrorModel,
    cfg: &CycleConfig,
) -> Result<FidelityTrace> {
    let protocol = Protocol::new(space.clone(), seq, ha, hb, errors.clone())?;
    run_cycles(initial_qubit, &protocol, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub zeno_interval: f64,
    /// Mean of `1 − F` after the last cycle, over trajectories.
    pub mean_infidelity: f64,
    pub std_error: f64,
    pub mean_success: f64,
    pub trajectories: usize,
}

/// Mean final infidelity at each interval. Trajectory `k` uses seed
/// `derive_seed(cfg.seed, k)` at every interval, so the sweep points share
/// the same noise draws.
pub fn sweep_intervals(
    initial_qubit: [C64; 2],
    protocol: &Protocol,
    cfg: &CycleConfig,
    intervals: &[f64],
    trajectories: usize,
) -> Result<Vec<SweepPoint>> {
    if trajectories == 0 {
        return Err(Error::InvalidParameter("at least one trajectory".into()));
    }
    intervals
        .iter()
        .map(|&dt| {
            let runs: Vec<(f64, f64)> = (0..trajectories)
                .into_par_iter()
                .map(|k| {
                    let c = CycleConfig { zeno_interval: dt, seed: derive_seed(cfg.seed, k as u64), ..cfg.clone() };
                    let t = run_cycles(initial_qubit, protocol, &c)?;
                    Ok((1.0 - t.final_fidelity().unwrap_or(0.0), t.cumulative_success()))
                })
                .collect::<Result<_>>()?;
            let n = runs.len() as f64;
            let mean = runs.iter().map(|r| r.0).sum::<f64>() / n;
            let var =
                if runs.len() > 1 { runs.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Ok(SweepPoint {
                zeno_interval: dt,
                mean_infidelity: mean,
                std_error: (var / n).sqrt(),
                mean_success: runs.iter().map(|r| r.1).sum::<f64>() / n,
                trajectories,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest absolute residual of the log-log fit.
    pub max_residual: f64,
    pub n_points: usize,
}

pub const FIT_FLOOR: f64 = 1e-14;
pub const FIT_CEILING: f64 = 0.1;

/// Least-squares slope of `log(1 − F)` against `log Δt`.
pub fn scaling_fit(intervals: &[f64], infidelities: &[f64]) -> Result<ScalingFit> {
    if intervals.len() != infidelities.len() {
        return Err(Error::FitRefused(format!(
            "{} intervals but {} infidelities",
            intervals.len(),
            infidelities.len()
        )));
    }
    if intervals.len() < 5 {
        return Err(Error::FitRefused(format!("{} points, need at least 5", intervals.len())));
    }
    if intervals.iter().any(|&t| t.is_nan() || t <= 0.0) {
        return Err(Error::FitRefused("intervals must be positive".into()));
    }
    let (lo, hi) = intervals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::FitRefused(format!("intervals span {:.3} decades, need 1", (hi / lo).log10())));
    }
    if let Some(&x) = infidelities.iter().find(|&&x| x.is_nan() || x < FIT_FLOOR) {
        return Err(Error::FitRefused(format!("infidelity {x:e} below numerical floor {FIT_FLOOR:e}")));
    }
    if let Some(&x) = infidelities.iter().find(|&&x| x > FIT_CEILING) {
        return Err(Error::FitRefused(format!("infidelity {x} outside perturbative regime")));
    }
    let xs: Vec<f64> = intervals.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = infidelities.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(ScalingFit { slope, intercept, r_squared, max_residual, n_points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn space() -> LevelSpace {
        LevelSpace::rydberg_60f()
    }

    #[test]
    fn pump_maps_onto_code_states() {
        let s = space();
        let v = pump([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &s).unwrap();
        assert_eq!(v[s.code_indices()[0]], C64::new(1.0, 0.0));
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(pump([C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &s).is_err());
    }

    #[test]
    fn pump_damping() {
        let s = space();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rho = pump_density([C64::new(r, 0.0), C64::new(r, 0.0)], &s, Some(0.99827)).unwrap();
        let [a, b] = s.code_indices();
        assert!((rho[(a, b)].re - 0.5 * 0.99827).abs() < 1e-15);
        assert!((rho[(a, a)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_state_never_projects() {
        let s = space();
        let mut v = DVector::zeros(s.dimension());
        v[0] = C64::new(1.0, 0.0);
        let out = project_code(&v, &s, 1.0, &mut stream(3)).unwrap();
        assert_eq!(out, ProjectionOutcome::Failure { probability: 0.0 });
    }

    #[test]
    fn code_state_projects_unchanged() {
        let s = space();
        let v = pump([C64::new(0.6, 0.0), C64::new(0.0, 0.8)], &s).unwrap();
        match project_code(&v, &s, 1.0, &mut stream(3)).unwrap() {
            ProjectionOutcome::Success { rho, probability } => {
                assert!((probability - 1.0).abs() < 1e-15);
                assert!((rho[(0, 1)] - C64::new(0.0, -0.48)).norm() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthetic_cubic_fit() {
        let t: Vec<f64> = (0..6).map(|k| 0.1 * 10f64.powf(k as f64 / 5.0)).collect();
        let y: Vec<f64> = t.iter().map(|t| 1e-4 * t * t * t).collect();
        let fit = scaling_fit(&t, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fit_refusals() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(scaling_fit(&t, &[1e-3; 5]), Err(Error::FitRefused(_))));
        let t = [1.0, 2.0, 4.0, 8.0, 16.0];
        assert!(scaling_fit(&t, &[1e-15, 1e-3, 1e-3, 1e-3, 1e-3]).is_err());
        assert!(scaling_fit(&t, &[0.2, 1e-3, 1e-3, 1e-3, 1e-3]).is_err());
        assert!(scaling_fit(&t[..4], &[1e-3; 4]).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = CycleConfig { projection_efficiency: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = CycleConfig { zeno_interval: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
