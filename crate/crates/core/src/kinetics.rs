//! Three-photon projection kinetics: branch rates, the four-level
//! density-matrix rate equations, and the coherence-transfer efficiency.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};
use crate::spin_algebra::{clebsch_gordan_exact, ExactCg, HalfInt};

/// Inputs of the three-photon rate formula, in the ħ = 1 unit system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticsParams<T> {
    pub d_gamma_lambda: T,
    pub d_lambda_mu: T,
    pub d_mu_nu: T,
    pub e1: T,
    pub e2: T,
    pub delta1: T,
    pub delta2: T,
    /// Direction-averaged spontaneous-emission factor of the cavity mode,
    /// relative to free space.
    pub cavity_enhancement: T,
    /// Decay rate of the intermediate 5p state.
    pub gamma_5p: T,
}

impl<T: Real> KineticsParams<T> {
    /// Every factor 1 and `Δ₁ + Δ₂ = 1`, so that `Γ = 2π`.
    pub fn unit() -> Self {
        let one = T::one();
        KineticsParams {
            d_gamma_lambda: one,
            d_lambda_mu: one,
            d_mu_nu: one,
            e1: one,
            e2: one,
            delta1: one,
            delta2: T::zero(),
            cavity_enhancement: one,
            gamma_5p: one,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.delta1 == T::zero() || self.delta1 + self.delta2 == T::zero() {
            return Err(Error::ZeroDetuning);
        }
        if self.cavity_enhancement < T::zero() || self.gamma_5p < T::zero() {
            return Err(Error::InvalidParameter("rates must be non-negative".into()));
        }
        Ok(())
    }

    /// `|d_γλ E₁/Δ₁|²`.
    pub fn first_step_factor(&self) -> T {
        let a = self.d_gamma_lambda * self.e1 / self.delta1;
        a * a
    }

    /// `|d_γλ E₁/Δ₁|² |d_λμ E₂/(Δ₁+Δ₂)|²`.
    pub fn two_photon_factor(&self) -> T {
        let b = self.d_lambda_mu * self.e2 / (self.delta1 + self.delta2);
        self.first_step_factor() * b * b
    }
}

/// `Γ = 2π |d_γλ E₁/Δ₁|² |d_λμ E₂/(Δ₁+Δ₂)|² · cavity · d_μν²`.
pub fn three_photon_rate<T: Real>(p: &KineticsParams<T>) -> Result<T> {
    p.validate()?;
    Ok(T::two_pi() * p.two_photon_factor() * p.cavity_enhancement * p.d_mu_nu * p.d_mu_nu)
}

/// `η = 2√(Γ₁Γ₂)/(Γ₁+Γ₂)`.
pub fn transfer_efficiency<T: Real>(g1: T, g2: T) -> Result<T> {
    if !(g1 > T::zero() && g2 > T::zero()) {
        return Err(Error::InvalidParameter("transfer efficiency needs positive rates".into()));
    }
    Ok(T::lit(2.0) * (g1 * g2).sqrt() / (g1 + g2))
}

/// Populations and coherences of the code states `γ₁, γ₂` and ground
/// states `ν₁, ν₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticsState<T> {
    pub rho_g1g1: T,
    pub rho_g2g2: T,
    pub rho_n1n1: T,
    pub rho_n2n2: T,
    pub rho_g1g2: Cx<T>,
    pub rho_n1n2: Cx<T>,
}

impl<T: Real> KineticsState<T> {
    /// Pure superposition `α|γ₁⟩ + β|γ₂⟩`, nothing in the ground states.
    pub fn from_code_amplitudes(alpha: Cx<T>, beta: Cx<T>) -> Self {
        KineticsState {
            rho_g1g1: alpha.norm_sqr(),
            rho_g2g2: beta.norm_sqr(),
            rho_n1n1: T::zero(),
            rho_n2n2: T::zero(),
            rho_g1g2: alpha * beta.conj(),
            rho_n1n2: cx(T::zero(), T::zero()),
        }
    }

    pub fn total_population(&self) -> T {
        self.rho_g1g1 + self.rho_g2g2 + self.rho_n1n1 + self.rho_n2n2
    }

    /// Largest violation of `|ρ_ab|² ≤ ρ_aa ρ_bb` over the two coherences.
    pub fn positivity_violation(&self) -> T {
        let g = self.rho_g1g2.norm_sqr() - self.rho_g1g1 * self.rho_g2g2;
        let n = self.rho_n1n2.norm_sqr() - self.rho_n1n1 * self.rho_n2n2;
        g.max(n).max(T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(1e-9);
        let pops = [self.rho_g1g1, self.rho_g2g2, self.rho_n1n1, self.rho_n2n2];
        if pops.iter().any(|&p| p < -tol || p > T::one() + tol) {
            return Err(Error::InvalidParameter("population outside [0, 1]".into()));
        }
        if self.total_population() > T::one() + tol {
            return Err(Error::InvalidParameter("populations sum above 1".into()));
        }
        if self.positivity_violation() > tol {
            return Err(Error::InvalidParameter("coherence violates positivity".into()));
        }
        Ok(())
    }

    fn to_array(self) -> [T; 8] {
        [
            self.rho_g1g1,
            self.rho_g2g2,
            self.rho_n1n1,
            self.rho_n2n2,
            self.rho_g1g2.re,
            self.rho_g1g2.im,
            self.rho_n1n2.re,
            self.rho_n1n2.im,
        ]
    }

    fn from_array(y: [T; 8]) -> Self {
        KineticsState {
            rho_g1g1: y[0],
            rho_g2g2: y[1],
            rho_n1n1: y[2],
            rho_n2n2: y[3],
            rho_g1g2: cx(y[4], y[5]),
            rho_n1n2: cx(y[6], y[7]),
        }
    }

    /// Max absolute componentwise distance.
    pub fn max_distance(&self, other: &Self) -> T {
        let (a, b) = (self.to_array(), other.to_array());
        a.iter().zip(b.iter()).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
    }
}

fn rate_rhs<T: Real>(g1: T, g2: T, y: &[T; 8]) -> [T; 8] {
    let half_sum = (g1 + g2) * T::lit(0.5);
    let root = (g1 * g2).sqrt();
    [-g1 * y[0], -g2 * y[1], g1 * y[0], g2 * y[1], -half_sum * y[4], -half_sum * y[5], root * y[4], root * y[5]]
}

fn check_rates<T: Real>(g1: T, g2: T) -> Result<()> {
    if g1 < T::zero() || g2 < T::zero() {
        return Err(Error::InvalidParameter("rates must be non-negative".into()));
    }
    Ok(())
}

/// Exact solution of the rate equations at time `t`.
pub fn rate_closed_form<T: Real>(g1: T, g2: T, rho0: &KineticsState<T>, t: T) -> Result<KineticsState<T>> {
    check_rates(g1, g2)?;
    let e1 = (-g1 * t).exp();
    let e2 = (-g2 * t).exp();
    let half_sum = (g1 + g2) * T::lit(0.5);
    let decay = (-half_sum * t).exp();
    // ∫₀ᵗ e^{-Γ̄s} ds, with the Γ̄ → 0 limit.
    let integral = if half_sum > T::zero() { (T::one() - decay) / half_sum } else { t };
    let root = (g1 * g2).sqrt();
    Ok(KineticsState {
        rho_g1g1: rho0.rho_g1g1 * e1,
        rho_g2g2: rho0.rho_g2g2 * e2,
        rho_n1n1: rho0.rho_n1n1 + rho0.rho_g1g1 * (T::one() - e1),
        rho_n2n2: rho0.rho_n2n2 + rho0.rho_g2g2 * (T::one() - e2),
        rho_g1g2: rho0.rho_g1g2 * decay,
        rho_n1n2: rho0.rho_n1n2 + rho0.rho_g1g2 * (root * integral),
    })
}

/// Relative tolerance of the adaptive integrator.
pub const ODE_RTOL: f64 = 1e-10;

/// Integrates the rate equations from 0 to `t` with an adaptive
/// Dormand-Prince 5(4) scheme.
pub fn rate_ode_solve<T: Real>(g1: T, g2: T, rho0: &KineticsState<T>, t: T) -> Result<KineticsState<T>> {
    check_rates(g1, g2)?;
    if t < T::zero() {
        return Err(Error::InvalidParameter("integration time must be non-negative".into()));
    }
    let rtol = T::lit(ODE_RTOL).max(T::lit(100.0) * T::eps());
    let atol = rtol * T::lit(1e-4);
    let y = dopri5(|y| rate_rhs(g1, g2, y), rho0.to_array(), t, rtol, atol);
    Ok(KineticsState::from_array(y))
}

/// Samples the integrated solution at the given increasing times.
pub fn rate_ode_trajectory<T: Real>(
    g1: T,
    g2: T,
    rho0: &KineticsState<T>,
    times: &[T],
) -> Result<Vec<KineticsState<T>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut state = *rho0;
    let mut now = T::zero();
    for &t in times {
        if t < now {
            return Err(Error::InvalidParameter("sample times must increase".into()));
        }
        state = rate_ode_solve(g1, g2, &state, t - now)?;
        now = t;
        out.push(state);
    }
    Ok(out)
}

fn dopri5<T: Real, const N: usize>(f: impl Fn(&[T; N]) -> [T; N], y0: [T; N], t_end: T, rtol: T, atol: T) -> [T; N] {
    if t_end == T::zero() {
        return y0;
    }
    let c = |x: f64| T::lit(x);
    let a21 = c(1.0 / 5.0);
    let (a31, a32) = (c(3.0 / 40.0), c(9.0 / 40.0));
    let (a41, a42, a43) = (c(44.0 / 45.0), c(-56.0 / 15.0), c(32.0 / 9.0));
    let (a51, a52, a53, a54) = (c(19372.0 / 6561.0), c(-25360.0 / 2187.0), c(64448.0 / 6561.0), c(-212.0 / 729.0));
    let (a61, a62, a63, a64, a65) =
        (c(9017.0 / 3168.0), c(-355.0 / 33.0), c(46732.0 / 5247.0), c(49.0 / 176.0), c(-5103.0 / 18656.0));
    let (b1, b3, b4, b5, b6) =
        (c(35.0 / 384.0), c(500.0 / 1113.0), c(125.0 / 192.0), c(-2187.0 / 6784.0), c(11.0 / 84.0));
    // b - b* for the embedded 4th-order error estimate.
    let (e1, e3, e4, e5, e6, e7) = (
        c(71.0 / 57600.0),
        c(-71.0 / 16695.0),
        c(71.0 / 1920.0),
        c(-17253.0 / 339200.0),
        c(22.0 / 525.0),
        c(-1.0 / 40.0),
    );

    let comb = |y: &[T; N], terms: &[(T, &[T; N])], hh: T| -> [T; N] {
        let mut out = *y;
        for (coef, k) in terms {
            for i in 0..N {
                out[i] += hh * *coef * k[i];
            }
        }
        out
    };

    let mut y = y0;
    let mut t = T::zero();
    let mut hstep = t_end * c(1e-3);
    let mut k1 = f(&y);
    while t < t_end {
        if t + hstep > t_end {
            hstep = t_end - t;
        }
        let k2 = f(&comb(&y, &[(a21, &k1)], hstep));
        let k3 = f(&comb(&y, &[(a31, &k1), (a32, &k2)], hstep));
        let k4 = f(&comb(&y, &[(a41, &k1), (a42, &k2), (a43, &k3)], hstep));
        let k5 = f(&comb(&y, &[(a51, &k1), (a52, &k2), (a53, &k3), (a54, &k4)], hstep));
        let k6 = f(&comb(&y, &[(a61, &k1), (a62, &k2), (a63, &k3), (a64, &k4), (a65, &k5)], hstep));
        let y5 = comb(&y, &[(b1, &k1), (b3, &k3), (b4, &k4), (b5, &k5), (b6, &k6)], hstep);
        let k7 = f(&y5);
        let mut err = T::zero();
        for i in 0..N {
            let est = hstep * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            let r = est / scale;
            err += r * r;
        }
        err = (err / T::lit(N as f64)).sqrt();
        if err <= T::one() {
            t += hstep;
            y = y5;
            k1 = k7;
        }
        let factor = if err == T::zero() { c(5.0) } else { (c(0.9) * err.powf(c(-0.2))).min(c(5.0)).max(c(0.2)) };
        hstep *= factor;
    }
    y
}

/// Exact `Γ₁/Γ₂` from the Clebsch-Gordan products of the two projection
/// paths, with the individual coefficients.
#[derive(Clone, Debug)]
pub struct RateRatio {
    /// `Γ_{γ₁ν₁} / Γ_{γ₂ν₂}`.
    pub ratio: BigRational,
    pub path1: [ExactCg; 3],
    pub path2: [ExactCg; 3],
}

impl RateRatio {
    pub fn value<T: Real>(&self) -> T {
        use num_traits::ToPrimitive;
        T::lit(self.ratio.to_f64().unwrap_or(f64::NAN))
    }

    /// `η` implied by the ratio, through `2√r/(1+r)`.
    pub fn efficiency<T: Real>(&self) -> T {
        transfer_efficiency(self.value::<T>(), T::one()).expect("nonzero")
    }
}

fn cg(args: [i32; 6]) -> ExactCg {
    let [a, b, c, d, e, f] = args.map(HalfInt::from_twice);
    clebsch_gordan_exact(a, b, c, d, e, f).expect("valid quantum numbers")
}

/// The two paths γᵢ → λ → μ → νᵢ, each a product of three couplings
/// `<j m; 1 q | J M>` (twice-valued arguments).
pub const PATH_1: [[i32; 6]; 3] = [[3, -1, 2, -2, 5, -3], [3, 1, 2, -2, 3, -1], [1, -1, 2, 2, 3, 1]];
pub const PATH_2: [[i32; 6]; 3] = [[3, 1, 2, -2, 5, -1], [3, 3, 2, -2, 3, 1], [1, 1, 2, 2, 3, 3]];

pub fn cg_rate_ratio() -> RateRatio {
    let path1 = PATH_1.map(cg);
    let path2 = PATH_2.map(cg);
    let prod = |p: &[ExactCg; 3]| p.iter().fold(ExactCg::one(), |acc, c| &acc * c);
    let ratio = (&prod(&path1) / &prod(&path2)).squared().clone();
    RateRatio { ratio, path1, path2 }
}

/// `8/9` or `9/8` as a rational, for comparisons.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Lifetimes of the unstable levels, same time unit as the rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lifetimes<T> {
    pub tau_60f: T,
    pub tau_5d: T,
    pub tau_5p: T,
}

impl<T: Real> Lifetimes<T> {
    /// ns: 60f 0.115 ms; 5d₃/₂ and 5p₃/₂ set to their usual Rb values.
    pub fn rubidium_ns() -> Self {
        Lifetimes { tau_60f: T::lit(1.15e5), tau_5d: T::lit(246.0), tau_5p: T::lit(26.2) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport<T> {
    pub gamma: T,
    /// Parasitic π-photon branch relative to the projection rate; small is good.
    pub pi_branch_ratio: T,
    /// `Γ τ_60f`.
    pub margin_60f: T,
    /// `Γ / (|d_γλ E₁/Δ₁|² / τ_5d)`.
    pub margin_5d: T,
    /// `Γ / (two-photon factor / τ_5p)`.
    pub margin_5p: T,
    pub threshold: T,
    pub passes: bool,
}

/// Checks that the projection rate dominates the parasitic π branch and the
/// decay of the 60f, 5d and 5p levels by at least `threshold`.
pub fn rate_dominance_check<T: Real>(
    p: &KineticsParams<T>,
    lifetimes: &Lifetimes<T>,
    threshold: T,
) -> Result<DominanceReport<T>> {
    let gamma = three_photon_rate(p)?;
    let two = p.two_photon_factor();
    let safe_div = |a: T, b: T| if b == T::zero() { T::max_value().unwrap_or(a / b) } else { a / b };
    let pi_branch_ratio = safe_div(two * p.gamma_5p, gamma);
    let margin_60f = gamma * lifetimes.tau_60f;
    let margin_5d = safe_div(gamma * lifetimes.tau_5d, p.first_step_factor());
    let margin_5p = safe_div(gamma * lifetimes.tau_5p, two);
    let passes = pi_branch_ratio * threshold < T::one()
        && margin_60f > threshold
        && margin_5d > threshold
        && margin_5p > threshold;
    Ok(DominanceReport { gamma, pi_branch_ratio, margin_60f, margin_5d, margin_5p, threshold, passes })
}
