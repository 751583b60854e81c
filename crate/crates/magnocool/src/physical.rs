//! `physical` entry mode: geometry and drives → steady state → couplings.

use log::warn;
use magnocool_core::model::{derive_couplings, drive_amplitudes, Couplings};
use magnocool_core::steady_state::{effective_couplings, solve_cmi, solve_mcm, SteadyState};
use magnocool_core::{Mechanism, SystemParams};
use serde::Serialize;

use crate::config::RawConfig;
use crate::CliError;

/// Everything computed on the way from SI inputs to the normalized
/// couplings. Drives and G_amc are in units of ω_c.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivation {
    pub couplings: Couplings,
    /// G_amc = g_amc |sin(k x0)| / ω_c.
    pub g_amc: f64,
    pub omega_a: f64,
    pub eps_m: f64,
    pub single_mode: bool,
    pub steady: SteadyState,
}

/// Fills in (J_ac, J_mc, J_am) of `params` from the config's geometry.
/// `params` must come from [`RawConfig::system_params`] in physical mode.
pub fn derive(cfg: &RawConfig, params: &SystemParams) -> Result<(SystemParams, Derivation), CliError> {
    let setup = cfg
        .geometry
        .as_ref()
        .ok_or_else(|| CliError::Config("physical mode requires a [geometry] table".into()))?;
    let constants = cfg.constants();
    let geom = setup.geometry();
    let single_mode = geom.validate()?;
    let couplings = derive_couplings(&constants, &geom, setup.cavity_frequency)?;

    let wc = params.omega_c;
    let kx = setup.wave_number * setup.equilibrium_position;
    let g_amc = couplings.g_amc * kx.sin().abs() / wc;
    // The steady-state equations assume the antinode, where the linear
    // magnon–photon coupling g_am cos(k x0) vanishes.
    if kx.cos().abs() > 1e-6 {
        warn!(
            "k*x0 = {kx} is not an antinode; the linear magnon-photon coupling g_am*cos(k*x0) = {} rad/s is neglected",
            couplings.g_am * kx.cos()
        );
    }
    let omega_d = setup.drive_frequency.unwrap_or(setup.cavity_frequency);
    let (drive, eps_m) = drive_amplitudes(&constants, &geom, params.gamma_a * wc, omega_d)?;
    let (omega_a, eps_m) = (drive / wc, eps_m / wc);

    let steady = match params.mechanism {
        Mechanism::Mcm => solve_mcm(params, omega_a)?,
        Mechanism::Cmi => solve_cmi(params, omega_a, eps_m, g_amc)?,
    };
    let (j_ac, j_mc, j_am) = effective_couplings(&steady, g_amc);
    let resolved = SystemParams {
        j_ac,
        j_mc,
        j_am,
        ..*params
    };
    resolved.validate()?;
    Ok((
        resolved,
        Derivation {
            couplings,
            g_amc,
            omega_a,
            eps_m,
            single_mode,
            steady,
        },
    ))
}
