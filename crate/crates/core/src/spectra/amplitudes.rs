use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::engine::{force_row, PsdEngine};
use super::Susceptibilities;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::Mode;

/// Cavity-input scattering amplitudes of the dual-channel force.
///
/// Only the cavity-path amplitudes have closed forms; the magnon-path
/// partners are left as `None` and come from [`interference_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmiAmplitudes {
    pub t_a_sfa: Complex64,
    pub t_m_sfa: Complex64,
    pub t_a_sfm: Option<Complex64>,
    pub t_m_sfm: Option<Complex64>,
}

/// Closed-form amplitudes at signed frequency `omega`. The sinh term and S0
/// use the bare frequency |ω|; the remaining factors follow the sign.
pub fn cmi_amplitudes(params: &SystemParams, omega: f64) -> Result<CmiAmplitudes> {
    params.validate()?;
    let bare = Susceptibilities::at(params, omega.abs());
    let here = Susceptibilities::at(params, omega);
    if bare.s0.norm() < 1e-12 {
        return Err(Error::Singular {
            omega,
            det: bare.s0.norm(),
        });
    }
    let i = Complex64::i();
    let (j_ac, _, j_am) = params.fluctuation_couplings();
    let eps = params.eps_a;
    let pre = Complex64::new(j_ac, 0.0) / bare.s0;
    let d = here.d;
    let sinh_term = (d + 2.0 * i * eps.conj() * bare.d.norm_sqr())
        * libm::sinh(params.r_s)
        * Complex64::from_polar(1.0, -2.0 * params.phi_s);
    let cosh_term = (d - 2.0 * i * eps * d.norm_sqr()) * libm::cosh(params.r_s);
    let t_a_sfa = pre * (sinh_term + cosh_term);
    let t_m_sfa = pre
        * (-libm::sqrt(params.gamma_m) * i * j_am * here.d_m)
        * (d.conj() + 2.0 * i * eps * d.norm_sqr());
    Ok(CmiAmplitudes {
        t_a_sfa,
        t_m_sfa,
        t_a_sfm: None,
        t_m_sfm: None,
    })
}

/// Force amplitudes of one input channel split by coupling path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelInterference {
    /// Through the cavity–CM coupling only (J_mc = 0).
    pub ccm: Complex64,
    /// Through the magnon–CM coupling only (J_ac = 0).
    pub mcm: Complex64,
    pub combined: Complex64,
    /// |mcm| / |ccm|.
    pub ratio: f64,
    /// arg(mcm / ccm) in (−π, π].
    pub phase_difference: f64,
}

impl ChannelInterference {
    fn new(ccm: Complex64, mcm: Complex64) -> Self {
        let ratio = if ccm.norm() > 0.0 {
            mcm.norm() / ccm.norm()
        } else if mcm.norm() > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            ccm,
            mcm,
            combined: ccm + mcm,
            ratio,
            phase_difference: (mcm * ccm.conj()).arg(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceDiagnostic {
    pub omega: f64,
    pub cavity: ChannelInterference,
    pub magnon: ChannelInterference,
}

impl InterferenceDiagnostic {
    /// Force power through the cavity–CM path alone, both inputs summed.
    pub fn ccm_power(&self) -> f64 {
        self.cavity.ccm.norm_sqr() + self.magnon.ccm.norm_sqr()
    }

    pub fn mcm_power(&self) -> f64 {
        self.cavity.mcm.norm_sqr() + self.magnon.mcm.norm_sqr()
    }

    pub fn combined_power(&self) -> f64 {
        self.cavity.combined.norm_sqr() + self.magnon.combined.norm_sqr()
    }
}

/// Splits the force response into the two coupling paths for each input
/// channel.
///
/// The squeezed cavity input is written as a_in = cosh r b + e^{−2iφ} sinh r b†
/// with b in vacuum, so the cavity amplitude is
/// T = g_a cosh r + g_a† e^{2iφ} sinh r and the cavity part of S_F(ω) equals
/// |T(ω)|². The magnon amplitude is the response to m_in.
pub fn interference_diagnostic(params: &SystemParams, omega: f64) -> Result<InterferenceDiagnostic> {
    let engine = PsdEngine::new(params)?;
    let (j_ac, j_mc, _) = params.fluctuation_couplings();
    let ccm = engine.response_to(omega, &force_row(j_ac, 0.0))?;
    let mcm = engine.response_to(omega, &force_row(0.0, j_mc))?;
    let cavity = |g: &Vector4<Complex64>| {
        g[Mode::Cavity.annihilation()] * libm::cosh(params.r_s)
            + g[Mode::Cavity.creation()]
                * Complex64::from_polar(libm::sinh(params.r_s), 2.0 * params.phi_s)
    };
    let magnon = |g: &Vector4<Complex64>| g[Mode::Magnon.annihilation()];
    Ok(InterferenceDiagnostic {
        omega,
        cavity: ChannelInterference::new(cavity(&ccm), cavity(&mcm)),
        magnon: ChannelInterference::new(magnon(&ccm), magnon(&mcm)),
    })
}
