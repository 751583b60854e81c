//! Named parameter sets for the reference figures.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{Mechanism, SystemParams};

/// Trap frequency ω_c/2π in Hz.
pub const TRAP_FREQUENCY_HZ: f64 = 50e3;

/// CM bath occupancy obtained by inverting the weak-coupling occupancy
/// formula against n_c = 4.926 (MCM) and n_c = 0.030 (CMI) at γ_c = 1e-7.
pub const CM_BATH_OCCUPANCY: f64 = 1.87e5;

/// Red-sideband dual-channel configuration of the spectra/rates figure.
pub fn fig2_cmi() -> SystemParams {
    SystemParams {
        omega_c: 2.0 * PI * TRAP_FREQUENCY_HZ,
        delta_a: 1.0,
        delta_m: 1.0,
        gamma_a: 8.0 / 3.0,
        gamma_m: 2.0,
        gamma_c: 1e-7,
        n_m: 0.31,
        n_c: CM_BATH_OCCUPANCY,
        j_ac: 0.09,
        j_mc: 0.05,
        j_am: 0.03,
        eps_a: Complex64::new(0.575, -0.142),
        r_s: 2.0,
        phi_s: 94f64.to_radians(),
        mechanism: Mechanism::Cmi,
    }
}

pub fn fig2_mcm() -> SystemParams {
    SystemParams {
        mechanism: Mechanism::Mcm,
        ..fig2_cmi()
    }
}

/// Blue-sideband counterpart (Δ_a = Δ_m = −ω_c).
pub fn fig2_blue(mechanism: Mechanism) -> SystemParams {
    SystemParams {
        delta_a: -1.0,
        delta_m: -1.0,
        mechanism,
        ..fig2_cmi()
    }
}

/// Dynamics configuration: strong cavity–CM coupling with optimal detunings
/// Δ_o = √(γ_o² + 4ω_c²)/2.
pub fn fig4a(mechanism: Mechanism, q_c: f64) -> SystemParams {
    let base = fig2_cmi();
    SystemParams {
        j_ac: 0.3,
        j_mc: 0.025,
        delta_a: libm::sqrt(base.gamma_a * base.gamma_a + 4.0) / 2.0,
        delta_m: libm::sqrt(base.gamma_m * base.gamma_m + 4.0) / 2.0,
        gamma_c: 1.0 / q_c,
        mechanism,
        ..base
    }
}

/// n_c versus Q_c family at squeezing `r_s`.
pub fn fig4b(mechanism: Mechanism, r_s: f64) -> SystemParams {
    SystemParams {
        r_s,
        mechanism,
        ..fig2_cmi()
    }
}

/// Threshold-versus-coupling panels: r_s = 2.6, J_ac = 0.2, J_mc = 0.09,
/// J_am = 0.05. Each panel sweeps one of the three and keeps the others.
pub fn fig5() -> SystemParams {
    SystemParams {
        j_ac: 0.2,
        j_mc: 0.09,
        j_am: 0.05,
        r_s: 2.6,
        ..fig2_cmi()
    }
}

/// Occupancy-versus-coupling panels: γ_c = 1e-5 and r_s = 2.6 on top of the
/// spectra configuration; the swept coupling replaces its base value.
pub fn fig6(mechanism: Mechanism) -> SystemParams {
    SystemParams {
        gamma_c: 1e-5,
        r_s: 2.6,
        mechanism,
        ..fig2_cmi()
    }
}
