//! Physical constants, device geometry and the normalized parameter set.
//!
//! Everything downstream of this module works in units of the trap
//! frequency ω_c: rates, detunings and couplings are dimensionless numbers
//! and the CM resonance sits at frequency 1. SI quantities are converted
//! exactly once, here.

use core::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Material and fundamental constants for a YIG sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// γ in rad s⁻¹ T⁻¹.
    pub gyromagnetic_ratio: f64,
    /// μ0 in T m A⁻¹.
    pub vacuum_permeability: f64,
    /// Spin density ρ_s in m⁻³.
    pub spin_density: f64,
    /// Ground-state spin quantum number s.
    pub ground_spin: f64,
    /// Mass density ρ_m in kg m⁻³.
    pub mass_density: f64,
    pub reduced_planck: f64,
    pub boltzmann: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            gyromagnetic_ratio: 2.0 * PI * 28.0e9,
            vacuum_permeability: 1.256_637_062_12e-6,
            spin_density: 4.22e27,
            ground_spin: 2.5,
            mass_density: 5170.0,
            reduced_planck: 1.054_571_817e-34,
            boltzmann: 1.380_649e-23,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gyromagnetic_ratio", self.gyromagnetic_ratio),
            ("vacuum_permeability", self.vacuum_permeability),
            ("spin_density", self.spin_density),
            ("ground_spin", self.ground_spin),
            ("mass_density", self.mass_density),
            ("reduced_planck", self.reduced_planck),
            ("boltzmann", self.boltzmann),
        ];
        for (name, value) in fields {
            positive(name, value)?;
        }
        Ok(())
    }
}

/// Geometry and drive settings of the levitated sphere in its cavity (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Sphere diameter d in meters.
    pub diameter: f64,
    /// Cavity mode volume V_a in m³.
    pub cavity_volume: f64,
    /// Microwave wave number k in m⁻¹.
    pub wave_number: f64,
    /// Equilibrium position x0 in meters.
    pub equilibrium_position: f64,
    /// Trap frequency ω_c in rad/s.
    pub trap_frequency: f64,
    /// Static bias field B0 in tesla (sets ω_m = γB0).
    pub bias_field: f64,
    /// Amplitude of the field driving the magnon directly, in tesla.
    pub magnon_drive_field: f64,
    /// Cavity drive power P_d in watts.
    pub drive_power: f64,
}

impl DeviceGeometry {
    /// Sphere volume πd³/6.
    pub fn sphere_volume(&self) -> f64 {
        PI * self.diameter * self.diameter * self.diameter / 6.0
    }

    /// Checks the hard invariants. A sphere that is not small against the
    /// wavelength only produces a warning; the return value reports whether
    /// the single Kittel-mode picture holds (d·k < 0.1).
    pub fn validate(&self) -> Result<bool> {
        positive("diameter", self.diameter)?;
        positive("cavity_volume", self.cavity_volume)?;
        positive("trap_frequency", self.trap_frequency)?;
        non_negative("wave_number", self.wave_number)?;
        non_negative("bias_field", self.bias_field)?;
        non_negative("magnon_drive_field", self.magnon_drive_field)?;
        non_negative("drive_power", self.drive_power)?;
        finite("equilibrium_position", self.equilibrium_position)?;
        let dk = self.diameter * self.wave_number;
        let single_mode = dk < 0.1;
        if !single_mode {
            warn!("d*k = {dk} >= 0.1: Kittel-mode approximation is questionable");
        }
        Ok(single_mode)
    }

    /// Magnon frequency γB0 in rad/s.
    pub fn magnon_frequency(&self, constants: &PhysicalConstants) -> f64 {
        constants.gyromagnetic_ratio * self.bias_field
    }
}

/// Microscopic couplings in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// Magnon–photon coupling g_am in rad/s.
    pub g_am: f64,
    /// Magnon–photon–CM coupling g_amc in rad/s.
    pub g_amc: f64,
    /// Zero-point motion of the CM mode in meters.
    pub x_zpm: f64,
}

/// Derives g_am, g_amc and x_ZPM from the geometry. `omega_a` is the cavity
/// frequency in rad/s.
pub fn derive_couplings(
    constants: &PhysicalConstants,
    geom: &DeviceGeometry,
    omega_a: f64,
) -> Result<Couplings> {
    constants.validate()?;
    geom.validate()?;
    positive("omega_a", omega_a)?;
    let volume = geom.sphere_volume();
    let x_zpm = libm::sqrt(
        constants.reduced_planck / (2.0 * constants.mass_density * volume * geom.trap_frequency),
    );
    let g_am = 0.5
        * constants.gyromagnetic_ratio
        * libm::sqrt(
            constants.reduced_planck * omega_a * constants.vacuum_permeability
                / geom.cavity_volume,
        )
        * libm::sqrt(2.0 * constants.spin_density * volume * constants.ground_spin);
    let g_amc = g_am * geom.wave_number * x_zpm;
    Ok(Couplings { g_am, g_amc, x_zpm })
}

/// Drive amplitudes (Ω_a, ε_m) in rad/s, both real and non-negative.
///
/// `gamma_a` is the cavity decay rate and `omega_d` the drive frequency, both
/// in rad/s. The number of spins is N = ρ_s V.
pub fn drive_amplitudes(
    constants: &PhysicalConstants,
    geom: &DeviceGeometry,
    gamma_a: f64,
    omega_d: f64,
) -> Result<(f64, f64)> {
    non_negative("drive_power", geom.drive_power)?;
    non_negative("magnon_drive_field", geom.magnon_drive_field)?;
    positive("gamma_a", gamma_a)?;
    positive("omega_d", omega_d)?;
    let omega_drive =
        libm::sqrt(2.0 * gamma_a * geom.drive_power / (constants.reduced_planck * omega_d));
    let spins = constants.spin_density * geom.sphere_volume();
    let eps_m = constants.gyromagnetic_ratio * libm::sqrt(1.25 * spins) * geom.magnon_drive_field;
    Ok((omega_drive, eps_m))
}

/// Bose–Einstein occupation 1/(exp(ħω/k_BT) − 1); zero at T = 0.
pub fn thermal_occupancy(constants: &PhysicalConstants, omega: f64, temperature: f64) -> Result<f64> {
    positive("omega", omega)?;
    non_negative("temperature", temperature)?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = constants.reduced_planck * omega / (constants.boltzmann * temperature);
    Ok(1.0 / libm::expm1(x))
}

/// Which effective Hamiltonian governs the fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    /// Single channel through the magnon–CM coupling only.
    Mcm,
    /// Dual channel: cavity–CM and magnon–CM paths interfere.
    Cmi,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Mcm => "mcm",
            Mechanism::Cmi => "cmi",
        }
    }
}

impl core::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcm" => Ok(Mechanism::Mcm),
            "cmi" => Ok(Mechanism::Cmi),
            _ => Err(Error::Config(alloc::format!(
                "unknown mechanism '{s}' (expected mcm or cmi)"
            ))),
        }
    }
}

/// Intracavity squeezing amplitude ε_a = iΛe^{iθ}/2 from pump amplitude Λ
/// and phase θ (radians).
pub fn eps_from_pump(lambda: f64, theta: f64) -> Complex64 {
    Complex64::i() * Complex64::from_polar(lambda, theta) * 0.5
}

/// Full parameter set of one run. All rates, detunings and couplings are in
/// units of ω_c; `omega_c` itself (rad/s) only converts times to seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_c: f64,
    pub delta_a: f64,
    pub delta_m: f64,
    pub gamma_a: f64,
    pub gamma_m: f64,
    pub gamma_c: f64,
    /// Thermal occupancy of the magnon bath.
    pub n_m: f64,
    /// Thermal occupancy of the CM bath.
    pub n_c: f64,
    pub j_ac: f64,
    pub j_mc: f64,
    /// Cavity–magnon coupling. May be negative when it comes out of a
    /// steady-state solve (2G Re[c0]).
    pub j_am: f64,
    pub eps_a: Complex64,
    pub r_s: f64,
    /// Squeezing phase in radians.
    pub phi_s: f64,
    pub mechanism: Mechanism,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega_c", self.omega_c)?;
        positive("gamma_a", self.gamma_a)?;
        positive("gamma_m", self.gamma_m)?;
        positive("gamma_c", self.gamma_c)?;
        non_negative("n_m", self.n_m)?;
        non_negative("n_c", self.n_c)?;
        non_negative("r_s", self.r_s)?;
        non_negative("j_ac", self.j_ac)?;
        non_negative("j_mc", self.j_mc)?;
        finite("j_am", self.j_am)?;
        finite("delta_a", self.delta_a)?;
        finite("delta_m", self.delta_m)?;
        finite("phi_s", self.phi_s)?;
        finite("eps_a.re", self.eps_a.re)?;
        finite("eps_a.im", self.eps_a.im)?;
        Ok(())
    }

    /// Quality factor ω_c/γ_c.
    pub fn q_c(&self) -> f64 {
        1.0 / self.gamma_c
    }

    pub fn with_q_c(mut self, q_c: f64) -> Self {
        self.gamma_c = 1.0 / q_c;
        self
    }

    /// Squeezed-bath photon number n_s = sinh²(r_s).
    pub fn n_s(&self) -> f64 {
        let s = libm::sinh(self.r_s);
        s * s
    }

    /// Anomalous correlation strength m_s = cosh(r_s) sinh(r_s).
    pub fn m_s(&self) -> f64 {
        libm::cosh(self.r_s) * libm::sinh(self.r_s)
    }

    /// Couplings entering the fluctuation dynamics. The MCM mechanism keeps
    /// only the magnon–CM coupling.
    pub fn fluctuation_couplings(&self) -> (f64, f64, f64) {
        match self.mechanism {
            Mechanism::Mcm => (0.0, self.j_mc, 0.0),
            Mechanism::Cmi => (self.j_ac, self.j_mc, self.j_am),
        }
    }

    /// |γ_a/2 + iΔ_a|, the value 2|ε_a| must stay below.
    pub fn parametric_limit(&self) -> f64 {
        libm::hypot(self.gamma_a / 2.0, self.delta_a)
    }

    /// Errors when the intracavity squeezing sits at or above the
    /// degenerate-parametric-oscillation threshold.
    pub fn check_parametric_threshold(&self) -> Result<()> {
        let two_eps = 2.0 * self.eps_a.norm();
        let kappa = self.parametric_limit();
        if two_eps >= kappa {
            return Err(Error::ParametricThreshold { two_eps, kappa });
        }
        Ok(())
    }

    /// Converts a time in seconds to units of 1/ω_c.
    pub fn to_dimensionless_time(&self, seconds: f64) -> f64 {
        seconds * self.omega_c
    }

    pub fn to_seconds(&self, t: f64) -> f64 {
        t / self.omega_c
    }

    /// Short hex digest identifying this exact parameter set.
    pub fn snapshot_hash(&self) -> alloc::string::String {
        let mut hasher = Sha256::new();
        for v in [
            self.omega_c,
            self.delta_a,
            self.delta_m,
            self.gamma_a,
            self.gamma_m,
            self.gamma_c,
            self.n_m,
            self.n_c,
            self.j_ac,
            self.j_mc,
            self.j_am,
            self.eps_a.re,
            self.eps_a.im,
            self.r_s,
            self.phi_s,
        ] {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher.update(self.mechanism.as_str().as_bytes());
        let digest = hasher.finalize();
        hex::encode(&digest[..8])
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be finite"))
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be positive and finite"))
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be non-negative and finite"))
    }
}
