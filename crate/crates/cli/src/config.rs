//! Run configuration: a JSON file whose physical values carry explicit units.
//! Missing sections take the 60f defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use rydberg_zeno::control::OptimizerSettings;
use rydberg_zeno::kinetics::{KineticsParams, Lifetimes};
use rydberg_zeno::spin_algebra::HalfInt;
use rydberg_zeno::system_model::{FieldConfig, FineStructure, LevelSpace, RamanFields};
use rydberg_zeno::zeno_cycle::{CycleConfig, ProjectionMode};
use rydberg_zeno::{ErrorModel, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::units::{FieldStrength, Frequency, InverseCm, Nanoseconds, PerNs, Quantity, Radians, RamanCoupling, Tesla};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; the optimizer and the noise streams derive from it.
    pub seed: u64,
    pub space: SpaceConfig,
    pub fields: FieldsConfig,
    pub errors: ErrorsConfig,
    pub fine_structure: InverseCm,
    pub optimizer: OptimizerConfig,
    pub cycle: CycleSection,
    pub kinetics: KineticsSection,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            space: SpaceConfig::default(),
            fields: FieldsConfig::default(),
            errors: ErrorsConfig::default(),
            fine_structure: InverseCm::new(0.0),
            optimizer: OptimizerConfig::default(),
            cycle: CycleSection::default(),
            kinetics: KineticsSection::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceConfig {
    pub principal: u32,
    /// Angular momenta as `"3"` or `"1/2"`.
    pub l: String,
    pub s: String,
    /// The two code states as `[J, m_J]` pairs.
    pub code: [[String; 2]; 2],
}

impl Default for SpaceConfig {
    fn default() -> Self {
        let s = |x: &str| x.to_string();
        SpaceConfig { principal: 60, l: s("3"), s: s("1/2"), code: [[s("5/2"), s("-3/2")], [s("5/2"), s("-1/2")]] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub e_x: FieldStrength,
    pub e_y: FieldStrength,
    pub phase_y: Radians,
    pub e_x_prime: FieldStrength,
    pub e_y_prime: FieldStrength,
    pub phase_y_prime: Radians,
}

impl From<RamanFields> for LaserConfig {
    fn from(f: RamanFields) -> Self {
        LaserConfig {
            e_x: Quantity::new(f.e_x),
            e_y: Quantity::new(f.e_y),
            phase_y: Quantity::new(f.phase_y),
            e_x_prime: Quantity::new(f.e_x_prime),
            e_y_prime: Quantity::new(f.e_y_prime),
            phase_y_prime: Quantity::new(f.phase_y_prime),
        }
    }
}

impl From<LaserConfig> for RamanFields {
    fn from(f: LaserConfig) -> Self {
        RamanFields {
            e_x: f.e_x.value(),
            e_y: f.e_y.value(),
            phase_y: f.phase_y.value(),
            e_x_prime: f.e_x_prime.value(),
            e_y_prime: f.e_y_prime.value(),
            phase_y_prime: f.phase_y_prime.value(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsConfig {
    pub b_field: [Tesla; 3],
    pub pulse_a: LaserConfig,
    pub pulse_b: LaserConfig,
    pub omega_r: Frequency,
    pub omega_r_prime: Frequency,
    pub delta: Frequency,
    pub delta_prime: Frequency,
    pub raman_scale: RamanCoupling,
    pub raman_scale_prime: RamanCoupling,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        FieldConfig::rydberg_60f().into()
    }
}

impl From<FieldConfig> for FieldsConfig {
    fn from(f: FieldConfig) -> Self {
        FieldsConfig {
            b_field: f.b_field.map(Quantity::new),
            pulse_a: f.pulse_a.into(),
            pulse_b: f.pulse_b.into(),
            omega_r: Quantity::new(f.omega_r),
            omega_r_prime: Quantity::new(f.omega_r_prime),
            delta: Quantity::new(f.delta),
            delta_prime: Quantity::new(f.delta_prime),
            raman_scale: Quantity::new(f.raman_scale),
            raman_scale_prime: Quantity::new(f.raman_scale_prime),
        }
    }
}

impl FieldsConfig {
    pub fn to_model(&self) -> FieldConfig {
        FieldConfig {
            b_field: self.b_field.map(Quantity::value),
            pulse_a: self.pulse_a.into(),
            pulse_b: self.pulse_b.into(),
            omega_r: self.omega_r.value(),
            omega_r_prime: self.omega_r_prime.value(),
            delta: self.delta.value(),
            delta_prime: self.delta_prime.value(),
            raman_scale: self.raman_scale.value(),
            raman_scale_prime: self.raman_scale_prime.value(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorsConfig {
    /// Half-widths of the uniform couplings, in the generator order
    /// magnetic x, y, z, then electric xy, xz, yz.
    pub amplitudes: [Frequency; 6],
    pub correlation_time: Nanoseconds,
}

impl Default for ErrorsConfig {
    fn default() -> Self {
        ErrorsConfig { amplitudes: [Quantity::new(0.05); 6], correlation_time: Quantity::new(1e3) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub n_pulses: usize,
    pub tolerance: f64,
    pub max_restarts: usize,
    pub max_iterations: usize,
    pub min_duration: Nanoseconds,
    pub max_duration: Nanoseconds,
    pub batch_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = OptimizerSettings::default();
        OptimizerConfig {
            n_pulses: d.n_pulses,
            tolerance: d.tolerance,
            max_restarts: d.max_restarts,
            max_iterations: d.max_iterations,
            min_duration: Quantity::new(d.min_duration),
            max_duration: Quantity::new(d.max_duration),
            batch_size: d.batch_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSection {
    pub zeno_interval: Nanoseconds,
    pub n_cycles: usize,
    pub projection_efficiency: f64,
    pub projection: ProjectionMode,
    /// Qubit amplitudes `[[re, im], [re, im]]` on the two code states;
    /// normalized on load.
    pub initial_qubit: [[f64; 2]; 2],
    /// Intervals of the scaling sweep.
    pub sweep: Vec<Nanoseconds>,
    pub trajectories: usize,
}

impl Default for CycleSection {
    fn default() -> Self {
        CycleSection {
            zeno_interval: Quantity::new(1.0),
            n_cycles: 10,
            projection_efficiency: 1.0,
            projection: ProjectionMode::Conditional,
            initial_qubit: [[0.6, 0.0], [0.0, 0.8]],
            sweep: (0..6).map(|k| Quantity::new(0.1 * 10f64.powf(1.4 * k as f64 / 5.0))).collect(),
            trajectories: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticsSection {
    /// `d_γλ E₁`.
    pub rabi_1: Frequency,
    /// `d_λμ E₂`.
    pub rabi_2: Frequency,
    pub delta_1: Frequency,
    pub delta_2: Frequency,
    /// `d_μν²` times the cavity enhancement, as a rate.
    pub emission_rate: PerNs,
    pub gamma_5p: PerNs,
    pub lifetimes: LifetimesConfig,
    pub threshold: f64,
    pub t_max: Nanoseconds,
    pub samples: usize,
}

impl Default for KineticsSection {
    fn default() -> Self {
        let lt = LifetimesConfig::default();
        KineticsSection {
            rabi_1: Quantity::new(1.0),
            rabi_2: Quantity::new(1.0),
            delta_1: Quantity::new(10.0),
            delta_2: Quantity::new(0.0),
            emission_rate: Quantity::new(1.0),
            gamma_5p: Quantity::new(1.0 / lt.tau_5p.value()),
            lifetimes: lt,
            threshold: 10.0,
            t_max: Quantity::new(2e4),
            samples: 200,
        }
    }
}

impl KineticsSection {
    pub fn params(&self) -> KineticsParams<f64> {
        KineticsParams {
            d_gamma_lambda: 1.0,
            d_lambda_mu: 1.0,
            d_mu_nu: 1.0,
            e1: self.rabi_1.value(),
            e2: self.rabi_2.value(),
            delta1: self.delta_1.value(),
            delta2: self.delta_2.value(),
            cavity_enhancement: self.emission_rate.value(),
            gamma_5p: self.gamma_5p.value(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimesConfig {
    pub tau_60f: Nanoseconds,
    pub tau_5d: Nanoseconds,
    pub tau_5p: Nanoseconds,
}

impl Default for LifetimesConfig {
    fn default() -> Self {
        let l = Lifetimes::<f64>::rubidium_ns();
        LifetimesConfig {
            tau_60f: Quantity::new(l.tau_60f),
            tau_5d: Quantity::new(l.tau_5d),
            tau_5p: Quantity::new(l.tau_5p),
        }
    }
}

impl LifetimesConfig {
    pub fn to_model(&self) -> Lifetimes<f64> {
        Lifetimes { tau_60f: self.tau_60f.value(), tau_5d: self.tau_5d.value(), tau_5p: self.tau_5p.value() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

fn half_int(field: &str, s: &str) -> Result<HalfInt, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("space.{field}: `{s}`: {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates; schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.level_space()?;
        self.initial_qubit()?;
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.fields.delta.value() == 0.0 || self.fields.delta_prime.value() == 0.0 {
            return bad("fields.delta and fields.delta_prime must be nonzero");
        }
        if self.errors.correlation_time.value() <= 0.0 {
            return bad("errors.correlation_time must be positive");
        }
        if self.errors.amplitudes.iter().any(|a| a.value() < 0.0) {
            return bad("errors.amplitudes must be non-negative");
        }
        if self.fine_structure.value() < 0.0 {
            return bad("fine_structure must be non-negative");
        }
        if self.cycle.n_cycles == 0 {
            return bad("cycle.n_cycles must be at least 1");
        }
        if self.cycle.trajectories == 0 {
            return bad("cycle.trajectories must be at least 1");
        }
        if self.cycle.sweep.iter().any(|t| t.value() <= 0.0) {
            return bad("cycle.sweep intervals must be positive");
        }
        if self.kinetics.samples < 2 || self.kinetics.t_max.value() <= 0.0 {
            return bad("kinetics needs t_max > 0 and at least 2 samples");
        }
        self.optimizer_settings().map(|_| ())?;
        self.cycle_config(self.cycle.zeno_interval.value(), true)
            .validate()
            .map_err(|e| CliError::Config(format!("cycle: {e}")))
    }

    pub fn level_space(&self) -> Result<LevelSpace, CliError> {
        let s = &self.space;
        let code = [
            (half_int("code", &s.code[0][0])?, half_int("code", &s.code[0][1])?),
            (half_int("code", &s.code[1][0])?, half_int("code", &s.code[1][1])?),
        ];
        LevelSpace::new(s.principal, half_int("l", &s.l)?, half_int("s", &s.s)?, code)
            .map_err(|e| CliError::Config(format!("space: {e}")))
    }

    pub fn error_model(&self, space: &LevelSpace) -> ErrorModel {
        ErrorModel::standard(
            space,
            self.errors.amplitudes.map(Quantity::value),
            self.errors.correlation_time.value(),
            self.seed,
        )
    }

    pub fn fine_structure(&self) -> FineStructure {
        FineStructure { splitting: self.fine_structure.value() }
    }

    pub fn optimizer_settings(&self) -> Result<OptimizerSettings, CliError> {
        let o = &self.optimizer;
        let s = OptimizerSettings {
            n_pulses: o.n_pulses,
            tolerance: o.tolerance,
            max_restarts: o.max_restarts,
            max_iterations: o.max_iterations,
            min_duration: o.min_duration.value(),
            max_duration: o.max_duration.value(),
            seed: self.seed,
            batch_size: o.batch_size,
        };
        let ok = s.n_pulses > 0
            && s.tolerance > 0.0
            && s.max_restarts > 0
            && s.batch_size > 0
            && s.min_duration > 0.0
            && s.max_duration > s.min_duration;
        if ok {
            Ok(s)
        } else {
            Err(CliError::Config("optimizer: need positive counts and 0 < min_duration < max_duration".into()))
        }
    }

    pub fn cycle_config(&self, zeno_interval: f64, protected: bool) -> CycleConfig {
        CycleConfig {
            zeno_interval,
            n_cycles: self.cycle.n_cycles,
            projection_efficiency: self.cycle.projection_efficiency,
            fine_structure: self.fine_structure(),
            seed: self.seed,
            protected,
            projection: self.cycle.projection,
        }
    }

    pub fn initial_qubit(&self) -> Result<[C64; 2], CliError> {
        let [a, b] = self.cycle.initial_qubit.map(|[re, im]| C64::new(re, im));
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(CliError::Config("cycle.initial_qubit must be a nonzero vector".into()));
        }
        Ok([a / norm, b / norm])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rydberg_zeno::system_model::{DEFAULT_RAMAN_SCALE, DEFAULT_RAMAN_SCALE_PRIME};

    #[test]
    fn defaults_match_model() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.fields.to_model(), FieldConfig::rydberg_60f());
        assert_eq!(cfg.level_space().unwrap().dimension(), 14);
        assert_eq!(cfg.fields.raman_scale.value(), DEFAULT_RAMAN_SCALE);
        assert_eq!(cfg.fields.raman_scale_prime.value(), DEFAULT_RAMAN_SCALE_PRIME);
        cfg.validate().unwrap();
    }

    #[test]
    fn serialized_defaults_reparse() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let err = RunConfig::from_json("{\n  \"seed\": 3,\n  \"colour\": 1\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn bare_numbers_rejected() {
        let err = RunConfig::from_json(r#"{"fields": {"b_field": [0.007, "1 T", "1 T"]}}"#).unwrap_err();
        assert!(err.to_string().contains("magnetic field"));
    }

    #[test]
    fn partial_sections_fill_in() {
        let cfg = RunConfig::from_json(r#"{"fields": {"b_field": ["0 T", "0 T", "0 T"]}}"#).unwrap();
        assert_eq!(cfg.fields.b_field.map(Quantity::value), [0.0; 3]);
        assert_eq!(cfg.fields.delta, FieldsConfig::default().delta);
    }

    #[test]
    fn bad_space_is_config_error() {
        let err = RunConfig::from_json(r#"{"space": {"code": [["9/2", "-3/2"], ["5/2", "-1/2"]]}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }
}
