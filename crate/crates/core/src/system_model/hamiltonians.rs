use serde::{Deserialize, Serialize};

use super::space::LevelSpace;
use super::units::{cm_inv_to_rad_per_ns, ev_to_rad_per_ns, MU_B_OVER_HBAR, SPEED_OF_LIGHT_CM_PER_NS};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::Real;
use crate::spin_algebra::cartesian_rank2;

/// Which of the two alternating control Hamiltonians a pulse uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseTag {
    A,
    B,
}

impl PulseTag {
    pub fn other(self) -> Self {
        match self {
            PulseTag::A => PulseTag::B,
            PulseTag::B => PulseTag::A,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        self as usize
    }
}

/// Complex amplitudes `(E_x, E_y e^{-iφ_y}, 0)` of the two Raman lasers used
/// during one pulse type, in V/m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanFields {
    pub e_x: f64,
    pub e_y: f64,
    pub phase_y: f64,
    pub e_x_prime: f64,
    pub e_y_prime: f64,
    pub phase_y_prime: f64,
}

/// Static fields and laser parameters of the control pulses.
///
/// Frequencies and detunings are stored in rad/ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Tesla.
    pub b_field: [f64; 3],
    pub pulse_a: RamanFields,
    pub pulse_b: RamanFields,
    pub omega_r: f64,
    pub omega_r_prime: f64,
    pub delta: f64,
    pub delta_prime: f64,
    /// Strength of the unprimed Raman channel, (rad/ns)² per (V/m)².
    pub raman_scale: f64,
    /// Strength of the primed Raman channel, same units.
    pub raman_scale_prime: f64,
}

/// Default strength of the unprimed Raman channel.
pub const DEFAULT_RAMAN_SCALE: f64 = 2.0e-12;
/// Default strength of the primed channel; it couples through a different
/// intermediate fine-structure level, so its angular weight differs.
pub const DEFAULT_RAMAN_SCALE_PRIME: f64 = 0.8e-12;

impl FieldConfig {
    /// Field values of the published 60f coding scheme.
    pub fn rydberg_60f() -> Self {
        let a = RamanFields {
            e_x: 8.5e5,
            e_y: 5.2e6,
            phase_y: 2.3,
            e_x_prime: 8.5e5,
            e_y_prime: 5.2e6,
            phase_y_prime: 2.3,
        };
        let b = RamanFields {
            e_x: -5.2e6,
            e_y: 8.5e5,
            phase_y: 2.3,
            e_x_prime: -5.2e6,
            e_y_prime: 8.5e5,
            phase_y_prime: 2.3,
        };
        FieldConfig {
            b_field: [7e-3, 8.2e-3, -6.8e-3],
            pulse_a: a,
            pulse_b: b,
            omega_r: ev_to_rad_per_ns(0.986324),
            omega_r_prime: ev_to_rad_per_ns(0.986676),
            delta: ev_to_rad_per_ns(-0.000010),
            delta_prime: ev_to_rad_per_ns(0.000010),
            raman_scale: DEFAULT_RAMAN_SCALE,
            raman_scale_prime: DEFAULT_RAMAN_SCALE_PRIME,
        }
    }

    /// Reversed magnetic field and detunings: the decoding recipe.
    pub fn reversed(&self) -> Self {
        FieldConfig { b_field: self.b_field.map(|b| -b), delta: -self.delta, delta_prime: -self.delta_prime, ..*self }
    }

    pub fn fields(&self, tag: PulseTag) -> &RamanFields {
        match tag {
            PulseTag::A => &self.pulse_a,
            PulseTag::B => &self.pulse_b,
        }
    }
}

/// `[L_k + 2 S_k]` for `k = x, y, z`, in the coupled basis.
pub fn magnetic_moment_ops<T: Real>(space: &LevelSpace) -> [Operator<T>; 3] {
    let l = space.orbital_ops::<T>();
    let s = space.spin_ops::<T>();
    [0, 1, 2].map(|k| &l[k] + &s[k].scale(T::lit(2.0)))
}

/// `(μ_B/ħ) Σ_k B_k (L_k + 2 S_k)` in rad/ns, `b_field` in tesla.
pub fn zeeman_hamiltonian<T: Real>(space: &LevelSpace, b_field: [f64; 3]) -> Operator<T> {
    let mu = magnetic_moment_ops::<T>(space);
    let mut h = Operator::zeros(space.coupled());
    for (k, op) in mu.iter().enumerate() {
        if b_field[k] != 0.0 {
            h = &h + &op.scale(T::lit(MU_B_OVER_HBAR * b_field[k]));
        }
    }
    h
}

/// Orbital bilinear `Σ_kl a_kl r_k r_l` restricted to the shell, rank-2 part,
/// unit reduced matrix element, expressed in the coupled basis.
pub fn orbital_bilinear<T: Real>(space: &LevelSpace, a: &[[f64; 3]; 3]) -> Result<Operator<T>> {
    let a_t = a.map(|row| row.map(T::lit));
    let orb = cartesian_rank2::<T>(space.l(), &a_t)?;
    space.orbital(&orb)
}

/// `r_k² - r_l²` within the shell. Acts as the identity on spin.
pub fn quadratic_position_op<T: Real>(space: &LevelSpace, k: Axis, l: Axis) -> Result<Operator<T>> {
    if k == l {
        return Err(Error::InvalidParameter("quadratic_position_op needs k != l".into()));
    }
    let mut a = [[0.0; 3]; 3];
    a[k.index()][k.index()] = 1.0;
    a[l.index()][l.index()] = -1.0;
    orbital_bilinear(space, &a)
}

/// `Re(E*_k E_l)` for `E = (e_x, e_y e^{-iφ}, 0)`.
fn field_bilinear(e_x: f64, e_y: f64, phase: f64) -> [[f64; 3]; 3] {
    let xy = e_x * e_y * phase.cos();
    [[e_x * e_x, xy, 0.0], [xy, e_y * e_y, 0.0], [0.0, 0.0, 0.0]]
}

/// Effective second-order Raman Hamiltonian of one pulse type, rad/ns.
///
/// `W = s Re[(E*·r)(E·r)]/δ + s' Re[(E'*·r)(E'·r)]/δ'` within the shell.
pub fn raman_hamiltonian<T: Real>(space: &LevelSpace, fields: &FieldConfig, tag: PulseTag) -> Result<Operator<T>> {
    if fields.delta == 0.0 || fields.delta_prime == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let f = fields.fields(tag);
    let mut a = field_bilinear(f.e_x, f.e_y, f.phase_y);
    let ap = field_bilinear(f.e_x_prime, f.e_y_prime, f.phase_y_prime);
    let (w, wp) = (fields.raman_scale / fields.delta, fields.raman_scale_prime / fields.delta_prime);
    for k in 0..3 {
        for l in 0..3 {
            a[k][l] = w * a[k][l] + wp * ap[k][l];
        }
    }
    orbital_bilinear(space, &a)
}

/// Total control Hamiltonian `W_Z + W_R` for one pulse type.
pub fn control_hamiltonian<T: Real>(space: &LevelSpace, fields: &FieldConfig, tag: PulseTag) -> Result<Operator<T>> {
    let wz = zeeman_hamiltonian::<T>(space, fields.b_field);
    Ok(&wz + &raman_hamiltonian::<T>(space, fields, tag)?)
}

pub const ERROR_NAMES: [&str; 6] =
    ["magnetic_x", "magnetic_y", "magnetic_z", "electric_xy", "electric_xz", "electric_yz"];

/// The six unnormalized error operators: `L_k + 2S_k` and `r_k² - r_l²`.
pub fn raw_error_operators<T: Real>(space: &LevelSpace) -> Vec<Operator<T>> {
    let mut out: Vec<Operator<T>> = magnetic_moment_ops::<T>(space).into_iter().collect();
    for (k, l) in [(Axis::X, Axis::Y), (Axis::X, Axis::Z), (Axis::Y, Axis::Z)] {
        out.push(quadratic_position_op(space, k, l).expect("distinct axes"));
    }
    out
}

/// Error operators scaled to unit spectral norm.
pub fn error_generators<T: Real>(space: &LevelSpace) -> Vec<Operator<T>> {
    raw_error_operators::<T>(space)
        .into_iter()
        .map(|e| {
            let n = e.spectral_norm();
            if n > T::zero() {
                e.scale(T::one() / n)
            } else {
                e
            }
        })
        .collect()
}

/// Normalized error generators plus the parameters of their stochastic
/// couplings `f_m(t)`.
#[derive(Clone, Debug)]
pub struct ErrorModel<T: Real> {
    pub generators: Vec<Operator<T>>,
    pub names: Vec<String>,
    /// Half-width of the uniform distribution of each `f_m`, rad/ns.
    pub amplitudes: Vec<f64>,
    /// Refresh interval of the piecewise-constant `f_m(t)`, ns.
    pub correlation_time: f64,
    pub seed: u64,
}

impl<T: Real> ErrorModel<T> {
    /// The six standard generators of `space` with the given noise parameters.
    pub fn standard(space: &LevelSpace, amplitudes: [f64; 6], correlation_time: f64, seed: u64) -> Self {
        ErrorModel {
            generators: error_generators(space),
            names: ERROR_NAMES.iter().map(|s| s.to_string()).collect(),
            amplitudes: amplitudes.to_vec(),
            correlation_time,
            seed,
        }
    }

    pub fn custom(
        generators: Vec<Operator<T>>,
        amplitudes: Vec<f64>,
        correlation_time: f64,
        seed: u64,
    ) -> Result<Self> {
        if generators.len() != amplitudes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} generators but {} amplitudes",
                generators.len(),
                amplitudes.len()
            )));
        }
        let names = (0..generators.len()).map(|i| format!("error_{i}")).collect();
        Ok(ErrorModel { generators, names, amplitudes, correlation_time, seed })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn with_amplitudes(mut self, amplitudes: Vec<f64>) -> Self {
        self.amplitudes = amplitudes;
        self
    }

    /// Generators with their inter-multiplet blocks removed.
    pub fn intermultiplet_zeroed(&self, space: &LevelSpace) -> Result<Self> {
        let generators = self.generators.iter().map(|e| zero_intermultiplet(e, space)).collect::<Result<_>>()?;
        Ok(ErrorModel { generators, ..self.clone() })
    }
}

/// Fine-structure splitting between the two multiplets of the manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineStructure {
    /// cm⁻¹.
    pub splitting: f64,
}

impl FineStructure {
    pub const NONE: FineStructure = FineStructure { splitting: 0.0 };

    /// 60f splitting used when fine structure is switched on.
    pub const RYDBERG_60F: FineStructure = FineStructure { splitting: 2e-5 };

    /// Period `τ_f = 1/(c · splitting)` in ns; infinite without splitting.
    pub fn period(&self) -> f64 {
        if self.splitting > 0.0 {
            1.0 / (SPEED_OF_LIGHT_CM_PER_NS * self.splitting)
        } else {
            f64::INFINITY
        }
    }

    /// Splitting as an angular frequency, rad/ns.
    pub fn angular_frequency(&self) -> f64 {
        cm_inv_to_rad_per_ns(self.splitting)
    }
}

/// Diagonal `H_0`: zero on the lower multiplets, `2πc · splitting` on `J = L + S`.
pub fn fine_structure_h0<T: Real>(space: &LevelSpace, fs: &FineStructure) -> Operator<T> {
    let top = space.l() + space.s();
    let w = T::lit(fs.angular_frequency());
    let diag: Vec<T> =
        space.basis().iter().map(|b| if b.j == top && space.multiplets().len() > 1 { w } else { T::zero() }).collect();
    Operator::from_real_diagonal(space.coupled(), &diag).expect("dimension matches")
}

/// Copy of `e` with the blocks coupling different `J` multiplets set to zero.
pub fn zero_intermultiplet<T: Real>(e: &Operator<T>, space: &LevelSpace) -> Result<Operator<T>> {
    if e.basis() != space.coupled() {
        return Err(Error::BasisMismatch { left: space.coupled().to_string(), right: e.basis().to_string() });
    }
    let basis = space.basis();
    let mut m = e.matrix().clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if basis[i].j != basis[j].j {
                m[(i, j)] = num_complex::Complex::new(T::zero(), T::zero());
            }
        }
    }
    Operator::new(e.basis(), m)
}
