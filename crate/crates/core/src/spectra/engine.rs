use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::{
    assert_stable, build_drift_weighted, DriftModel, MagnonWeighting, Mode, StabilityReport,
};

/// Noise input channel of the cavity–magnon subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Cavity,
    Magnon,
}

impl Channel {
    fn indices(self) -> [usize; 2] {
        match self {
            Channel::Cavity => [Mode::Cavity.annihilation(), Mode::Cavity.creation()],
            Channel::Magnon => [Mode::Magnon.annihilation(), Mode::Magnon.creation()],
        }
    }
}

/// Frequency-domain linear response of the 4×4 cavity–magnon subsystem.
///
/// With X(ω) = ∫dt e^{iωt} X(t) the fluctuations are
/// δX(ω) = (−iω − A)⁻¹ N ξ(ω), and the force on the CM mode is
/// F = −[J_ac(δa + δa†) + J_mc(δm + δm†)]. Writing F(ω) = Σ_k g_k(ω) ξ_k(ω),
/// the spectrum is S_F(ω) = Σ_kl g_k(ω) g_l(−ω) C_kl.
#[derive(Debug, Clone)]
pub struct PsdEngine {
    drift: Matrix4<Complex64>,
    noise: Vector4<Complex64>,
    correlations: Matrix4<Complex64>,
    force: Vector4<Complex64>,
    stability: StabilityReport,
}

impl PsdEngine {
    pub fn new(params: &SystemParams) -> Result<Self> {
        Self::with_weighting(params, MagnonWeighting::Separated)
    }

    /// Engine whose magnon correlations follow `weighting`.
    pub fn with_weighting(params: &SystemParams, weighting: MagnonWeighting) -> Result<Self> {
        params.validate()?;
        params.check_parametric_threshold()?;
        let model = build_drift_weighted(params, false, weighting);
        Self::from_model(params, &model)
    }

    fn from_model(params: &SystemParams, model: &DriftModel) -> Result<Self> {
        let stability = assert_stable(model)?;
        let (j_ac, j_mc, _) = params.fluctuation_couplings();
        Ok(Self {
            drift: Matrix4::from_fn(|r, c| model.drift[(r, c)]),
            noise: Vector4::from_fn(|r, _| model.noise_map[(r, r)]),
            correlations: Matrix4::from_fn(|r, c| model.input_correlations[(r, c)]),
            force: force_row(j_ac, j_mc),
            stability,
        })
    }

    pub fn stability(&self) -> &StabilityReport {
        &self.stability
    }

    /// Same engine with the anomalous (squeezing) correlations removed.
    pub fn without_anomalous(mut self) -> Self {
        let (a, ad) = (Mode::Cavity.annihilation(), Mode::Cavity.creation());
        self.correlations[(a, a)] = Complex64::new(0.0, 0.0);
        self.correlations[(ad, ad)] = Complex64::new(0.0, 0.0);
        self
    }

    /// g(ω) for the configured force.
    pub fn response(&self, omega: f64) -> Result<Vector4<Complex64>> {
        self.response_to(omega, &self.force)
    }

    /// g(ω) = Nᵀ (−iω − A)⁻ᵀ f for an arbitrary force row f over
    /// (δa, δa†, δm, δm†).
    pub fn response_to(&self, omega: f64, force: &Vector4<Complex64>) -> Result<Vector4<Complex64>> {
        let m = Matrix4::from_diagonal_element(Complex64::new(0.0, -omega)) - self.drift;
        let lu = m.transpose().lu();
        let det = lu.determinant().norm();
        if det < 1e-300 || !det.is_finite() {
            return Err(Error::Singular { omega, det });
        }
        let y = lu.solve(force).ok_or(Error::Singular { omega, det })?;
        Ok(y.component_mul(&self.noise))
    }

    pub fn psd(&self, omega: f64) -> Result<f64> {
        let plus = self.response(omega)?;
        let minus = self.response(-omega)?;
        Ok(self.contract(&plus, &minus, None))
    }

    /// Contribution of a single input channel to S_F(ω).
    pub fn channel_psd(&self, omega: f64, channel: Channel) -> Result<f64> {
        let plus = self.response(omega)?;
        let minus = self.response(-omega)?;
        Ok(self.contract(&plus, &minus, Some(channel)))
    }

    fn contract(
        &self,
        plus: &Vector4<Complex64>,
        minus: &Vector4<Complex64>,
        only: Option<Channel>,
    ) -> f64 {
        let mut total = Complex64::new(0.0, 0.0);
        let channels = match only {
            Some(c) => [Some(c), None],
            None => [Some(Channel::Cavity), Some(Channel::Magnon)],
        };
        // Inputs of different channels are uncorrelated.
        for channel in channels.into_iter().flatten() {
            for k in channel.indices() {
                for l in channel.indices() {
                    total += plus[k] * minus[l] * self.correlations[(k, l)];
                }
            }
        }
        total.re
    }
}

/// Force row −J(δo + δo†) over (δa, δa†, δm, δm†).
pub(crate) fn force_row(j_ac: f64, j_mc: f64) -> Vector4<Complex64> {
    let c = |x: f64| Complex64::new(-x, 0.0);
    Vector4::new(c(j_ac), c(j_ac), c(j_mc), c(j_mc))
}

/// S_F(ω) of the general engine (weak-coupling force spectrum seen by the
/// CM mode). Refuses unstable subsystems.
pub fn psd_general(params: &SystemParams, omega: f64) -> Result<f64> {
    PsdEngine::new(params)?.psd(omega)
}
