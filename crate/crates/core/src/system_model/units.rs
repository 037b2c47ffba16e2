//! Unit system: ħ = 1, time in ns, energies as angular frequencies in rad/ns.

/// Bohr magneton over ħ, rad ns⁻¹ T⁻¹ (CODATA 2018).
pub const MU_B_OVER_HBAR: f64 = 87.941_000_591_901_84;

/// 1 eV expressed as an angular frequency, rad/ns.
pub const EV_TO_RAD_PER_NS: f64 = 1_519_267.447_996_127_4;

/// Speed of light, cm/ns.
pub const SPEED_OF_LIGHT_CM_PER_NS: f64 = 29.979_245_8;

/// 1 cm⁻¹ expressed as an angular frequency (2πc), rad/ns.
pub const CM_INV_TO_RAD_PER_NS: f64 = 188.365_156_730_885_33;

#[inline]
pub fn ev_to_rad_per_ns(ev: f64) -> f64 {
    ev * EV_TO_RAD_PER_NS
}

#[inline]
pub fn cm_inv_to_rad_per_ns(wavenumber: f64) -> f64 {
    wavenumber * CM_INV_TO_RAD_PER_NS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_consistent() {
        let two_pi_c = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_NS;
        assert!((two_pi_c - CM_INV_TO_RAD_PER_NS).abs() < 1e-12);
        // hbar = 6.582119569e-16 eV s
        assert!((1e-9 / EV_TO_RAD_PER_NS - 6.582119569e-16).abs() < 1e-25);
        assert!((MU_B_OVER_HBAR * 1e9 - 8.7941e10).abs() < 1e6);
    }
}
