//! Force noise spectra seen by the CM mode.

mod amplitudes;
mod engine;

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mechanism, SystemParams};

pub use amplitudes::{
    cmi_amplitudes, interference_diagnostic, ChannelInterference, CmiAmplitudes,
    InterferenceDiagnostic,
};
pub use engine::{psd_general, Channel, PsdEngine};

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_GRID_SPAN: (f64, f64) = (-3.0, 3.0);

/// Bare and dressed response functions at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibilities {
    pub d_a: Complex64,
    pub d_m: Complex64,
    pub d_c: Complex64,
    /// Cavity response dressed by the magnon: 1/D = 1/D_a + J_am² D_m.
    pub d: Complex64,
    /// S0 = 1 − 4|ε_a|² D(ω) D*(−ω).
    pub s0: Complex64,
}

fn lorentz(half_width: f64, detuning: f64) -> Complex64 {
    Complex64::new(half_width, -detuning).inv()
}

fn dressed(params: &SystemParams, omega: f64) -> Complex64 {
    let (_, _, j_am) = params.fluctuation_couplings();
    let inv_da = Complex64::new(params.gamma_a / 2.0, -(omega - params.delta_a));
    let d_m = lorentz(params.gamma_m / 2.0, omega - params.delta_m);
    (inv_da + d_m * (j_am * j_am)).inv()
}

impl Susceptibilities {
    pub fn at(params: &SystemParams, omega: f64) -> Self {
        let d = dressed(params, omega);
        let d_neg = dressed(params, -omega);
        Self {
            d_a: lorentz(params.gamma_a / 2.0, omega - params.delta_a),
            d_m: lorentz(params.gamma_m / 2.0, omega - params.delta_m),
            d_c: lorentz(params.gamma_c / 2.0, omega - 1.0),
            d,
            s0: Complex64::new(1.0, 0.0) - d * d_neg.conj() * (4.0 * params.eps_a.norm_sqr()),
        }
    }
}

/// Single-channel rates (Γ−, Γ+) = J_mc²γ_m / ((ω ∓ Δ_m)² + (γ_m/2)²).
pub fn mcm_rates(params: &SystemParams, omega: f64) -> (f64, f64) {
    let lor = |x: f64| {
        params.j_mc * params.j_mc * params.gamma_m
            / (x * x + params.gamma_m * params.gamma_m / 4.0)
    };
    (lor(omega - params.delta_m), lor(omega + params.delta_m))
}

/// S_F(ω) for the configured mechanism: the analytic Lorentzian for MCM and
/// the linear-response engine for CMI.
pub fn spectrum_value(params: &SystemParams, omega: f64) -> Result<f64> {
    match params.mechanism {
        Mechanism::Mcm => {
            params.validate()?;
            Ok(mcm_rates(params, omega).0)
        }
        Mechanism::Cmi => psd_general(params, omega),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// ω/ω_c, strictly increasing.
    pub frequencies: Vec<f64>,
    /// S_F in units of ω_c.
    pub values: Vec<f64>,
    pub mechanism: Mechanism,
    pub params_hash: String,
}

impl SpectrumResult {
    /// Cubic (four-point Lagrange) interpolation of the sampled spectrum;
    /// exact at grid nodes.
    pub fn interpolate(&self, omega: f64) -> Option<f64> {
        let f = &self.frequencies;
        let n = f.len();
        if n == 0 || omega < f[0] || omega > f[n - 1] {
            return None;
        }
        if let Ok(k) = f.binary_search_by(|x| x.total_cmp(&omega)) {
            return Some(self.values[k]);
        }
        if n < 4 {
            let k = f.partition_point(|x| *x <= omega).clamp(1, n - 1);
            let t = (omega - f[k - 1]) / (f[k] - f[k - 1]);
            return Some(self.values[k - 1] + t * (self.values[k] - self.values[k - 1]));
        }
        let k = f.partition_point(|x| *x <= omega);
        let start = k.saturating_sub(2).min(n - 4);
        let mut total = 0.0;
        for i in start..start + 4 {
            let mut w = 1.0;
            for j in start..start + 4 {
                if j != i {
                    w *= (omega - f[j]) / (f[i] - f[j]);
                }
            }
            total += w * self.values[i];
        }
        Some(total)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value relative to the maximum; the nonnegativity invariant
    /// requires this to be ≥ −1e-12.
    pub fn min_relative(&self) -> f64 {
        let max = self.max_value();
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            min / max
        } else {
            min
        }
    }
}

/// Uniform frequency grid including both endpoints.
pub fn frequency_grid(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::domain("n_points", n_points as f64, "need at least 2 points"));
    }
    if !(omega_min < omega_max) || !omega_min.is_finite() || !omega_max.is_finite() {
        return Err(Error::domain("omega_min", omega_min, "must be finite and below omega_max"));
    }
    let step = (omega_max - omega_min) / (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| {
            if i == n_points - 1 {
                omega_max
            } else {
                omega_min + step * i as f64
            }
        })
        .collect())
}

/// Evaluates S_F on a supplied grid, in order.
pub fn psd_on(params: &SystemParams, frequencies: Vec<f64>) -> Result<SpectrumResult> {
    let values = match params.mechanism {
        Mechanism::Mcm => {
            params.validate()?;
            frequencies.iter().map(|w| mcm_rates(params, *w).0).collect()
        }
        Mechanism::Cmi => {
            let engine = PsdEngine::new(params)?;
            frequencies
                .iter()
                .map(|w| engine.psd(*w))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(SpectrumResult {
        frequencies,
        values,
        mechanism: params.mechanism,
        params_hash: params.snapshot_hash(),
    })
}

pub fn psd_grid(
    params: &SystemParams,
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
) -> Result<SpectrumResult> {
    psd_on(params, frequency_grid(omega_min, omega_max, n_points)?)
}
