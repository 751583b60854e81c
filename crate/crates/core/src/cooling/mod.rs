//! Cooling observables: rates, occupancy, dynamics and Q_c thresholds.

mod lyapunov;
mod ode;
mod threshold;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mechanism, SystemParams};
use crate::spectra::{mcm_rates, PsdEngine};

pub use lyapunov::{
    cm_occupancy, diffusion_matrix, initial_covariance, lyapunov_dynamics, lyapunov_steady,
    physicality_margin, solve_lyapunov, LyapunovSolution, PHYSICALITY_TOLERANCE,
};
pub use ode::{integrate, OdeOptions};
pub use threshold::{
    qc_threshold, qc_threshold_from_rates, threshold_closed_form, ThresholdResult,
    DEFAULT_LOG10_BRACKET,
};

/// (Γ−, Γ+) = (S_F(ω_c), S_F(−ω_c)) from the mechanism's spectrum source.
pub fn rates(params: &SystemParams) -> Result<(f64, f64)> {
    match params.mechanism {
        Mechanism::Mcm => {
            params.validate()?;
            Ok(mcm_rates(params, 1.0))
        }
        Mechanism::Cmi => {
            let engine = PsdEngine::new(params)?;
            Ok((engine.psd(1.0)?, engine.psd(-1.0)?))
        }
    }
}

/// Weak-coupling occupancy n_c = (γ_c n̄_c + Γ+)/(γ_c + Γ−  − Γ+).
pub fn steady_occupancy(params: &SystemParams, gamma_minus: f64, gamma_plus: f64) -> Result<f64> {
    occupancy_from(params.gamma_c, params.n_c, gamma_minus, gamma_plus)
}

pub fn occupancy_from(gamma_c: f64, n_bath: f64, gamma_minus: f64, gamma_plus: f64) -> Result<f64> {
    let total = gamma_c + gamma_minus - gamma_plus;
    if !(total > 0.0) {
        return Err(Error::Runaway { total });
    }
    Ok((gamma_c * n_bath + gamma_plus) / total)
}

/// Bath occupancy that makes the weak-coupling formula return `n_c`.
pub fn bath_occupancy_for(gamma_c: f64, n_c: f64, gamma_minus: f64, gamma_plus: f64) -> f64 {
    (n_c * (gamma_c + gamma_minus - gamma_plus) - gamma_plus) / gamma_c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingReport {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_net: f64,
    /// `None` when γ_c + Γ_net ≤ 0 (no steady state).
    pub n_c: Option<f64>,
    pub stable: bool,
    pub mechanism: Mechanism,
    pub params: SystemParams,
}

/// Rates and occupancy at one parameter point. Unstable subsystems are
/// refused; runaway heating is reported with `n_c = None`.
pub fn cooling_report(params: &SystemParams) -> Result<CoolingReport> {
    let (gamma_minus, gamma_plus) = rates(params)?;
    let n_c = match steady_occupancy(params, gamma_minus, gamma_plus) {
        Ok(n) => Some(n),
        Err(Error::Runaway { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CoolingReport {
        gamma_minus,
        gamma_plus,
        gamma_net: gamma_minus - gamma_plus,
        n_c,
        stable: true,
        mechanism: params.mechanism,
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMethod {
    RateEquation,
    Lyapunov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyTrajectory {
    /// Times in units of 1/ω_c.
    pub times: Vec<f64>,
    pub occupancies: Vec<f64>,
    pub method: TrajectoryMethod,
}

impl OccupancyTrajectory {
    pub fn times_in_seconds(&self, omega_c: f64) -> Vec<f64> {
        self.times.iter().map(|t| t / omega_c).collect()
    }

    /// First sampled time at which the occupancy is at or below `level`.
    pub fn first_at_or_below(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.occupancies)
            .find(|(_, n)| **n <= level)
            .map(|(t, _)| *t)
    }
}

/// ṅ = −(γ_c + Γ_net) n + γ_c n̄_c + Γ+, solved in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEquation {
    pub n0: f64,
    pub n_inf: f64,
    /// γ_c + Γ_net.
    pub rate: f64,
}

impl RateEquation {
    pub fn new(params: &SystemParams, n0: f64) -> Result<Self> {
        let (gm, gp) = rates(params)?;
        Self::from_rates(params, n0, gm, gp)
    }

    pub fn from_rates(params: &SystemParams, n0: f64, gamma_minus: f64, gamma_plus: f64) -> Result<Self> {
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::domain("n0", n0, "must be finite and non-negative"));
        }
        let n_inf = steady_occupancy(params, gamma_minus, gamma_plus)?;
        Ok(Self {
            n0,
            n_inf,
            rate: params.gamma_c + gamma_minus - gamma_plus,
        })
    }

    pub fn at(&self, t: f64) -> f64 {
        self.n_inf + (self.n0 - self.n_inf) * libm::exp(-self.rate * t)
    }

    /// Time at which n(t) = `level`, if the trajectory ever gets there.
    pub fn crossing_time(&self, level: f64) -> Option<f64> {
        if self.n0 == level {
            return Some(0.0);
        }
        let ratio = (self.n0 - self.n_inf) / (level - self.n_inf);
        // level must lie strictly between n0 and n_inf
        if ratio > 1.0 && ratio.is_finite() {
            Some(libm::log(ratio) / self.rate)
        } else {
            None
        }
    }

    pub fn sample(&self, times: &[f64]) -> OccupancyTrajectory {
        OccupancyTrajectory {
            times: times.to_vec(),
            occupancies: times.iter().map(|t| self.at(*t)).collect(),
            method: TrajectoryMethod::RateEquation,
        }
    }
}

/// Rate-equation trajectory on a grid of dimensionless times.
pub fn occupancy_dynamics(params: &SystemParams, n0: f64, times: &[f64]) -> Result<OccupancyTrajectory> {
    check_time_grid(times)?;
    Ok(RateEquation::new(params, n0)?.sample(times))
}

/// First time (units of 1/ω_c) at which the rate-equation trajectory from
/// `n0` reaches `level`, or `None` if it never does.
pub fn crossing_time(params: &SystemParams, n0: f64, level: f64) -> Result<Option<f64>> {
    Ok(RateEquation::new(params, n0)?.crossing_time(level))
}

pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::domain("times", 0.0, "time grid is empty"));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::domain("times", times[0], "times must be finite and non-negative"));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::domain("times", w[1], "time grid must be non-decreasing"));
    }
    Ok(())
}
