use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SystemParams;

/// Position of each ladder operator in the fluctuation vector
/// (δa, δa†, δm, δm†, δc, δc†).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cavity = 0,
    Magnon = 2,
    Cm = 4,
}

impl Mode {
    pub fn annihilation(self) -> usize {
        self as usize
    }

    pub fn creation(self) -> usize {
        self as usize + 1
    }
}

/// How thermal magnon noise is weighted in the input correlation table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnonWeighting {
    /// ⟨m_in m_in†⟩ = n̄_m + 1 and ⟨m_in† m_in⟩ = n̄_m.
    #[default]
    Separated,
    /// Both orderings lumped onto the annihilation channel as 2n̄_m + 1.
    Lumped,
}

/// Linearized Langevin system dX/dt = A X + N ξ over the ladder basis.
///
/// `input_correlations[(k, l)]` holds C_kl in ⟨ξ_k(t) ξ_l(t')⟩ = C_kl δ(t − t'),
/// equivalently ⟨ξ_k(ω) ξ_l(ω')⟩ = 2π δ(ω + ω') C_kl.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftModel {
    pub dimension: usize,
    pub drift: DMatrix<Complex64>,
    pub noise_map: DMatrix<Complex64>,
    pub input_correlations: DMatrix<Complex64>,
}

impl DriftModel {
    /// Largest violation of A[P i, P j] = conj(A[i, j]), P swapping each
    /// (δo, δo†) pair. Zero for every model built here.
    pub fn conjugation_asymmetry(&self) -> f64 {
        let n = self.dimension;
        let swap = |i: usize| i ^ 1;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = (self.drift[(swap(i), swap(j))] - self.drift[(i, j)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn includes_cm(&self) -> bool {
        self.dimension == 6
    }
}

/// Builds the drift model of the effective linearized Hamiltonian with
/// damping and input noise. With `include_cm` the CM pair is appended and
/// coupled through J_ac and J_mc; otherwise the 4×4 cavity–magnon subsystem
/// is returned (the bath seen by the CM mode).
pub fn build_drift(params: &SystemParams, include_cm: bool) -> DriftModel {
    build_drift_weighted(params, include_cm, MagnonWeighting::Separated)
}

pub(crate) fn build_drift_weighted(
    params: &SystemParams,
    include_cm: bool,
    weighting: MagnonWeighting,
) -> DriftModel {
    let n = if include_cm { 6 } else { 4 };
    let i = Complex64::i();
    let c = |x: f64| Complex64::new(x, 0.0);
    let (j_ac, j_mc, j_am) = params.fluctuation_couplings();
    let eps = params.eps_a;

    let (a, ad) = (Mode::Cavity.annihilation(), Mode::Cavity.creation());
    let (m, md) = (Mode::Magnon.annihilation(), Mode::Magnon.creation());

    let mut drift = DMatrix::<Complex64>::zeros(n, n);
    drift[(a, a)] = -Complex64::new(params.gamma_a / 2.0, params.delta_a);
    drift[(a, ad)] = -2.0 * i * eps;
    drift[(a, m)] = -i * j_am;
    drift[(m, m)] = -Complex64::new(params.gamma_m / 2.0, params.delta_m);
    drift[(m, a)] = -i * j_am;
    if include_cm {
        let (cm, cmd) = (Mode::Cm.annihilation(), Mode::Cm.creation());
        drift[(a, cm)] = -i * j_ac;
        drift[(a, cmd)] = -i * j_ac;
        drift[(m, cm)] = -i * j_mc;
        drift[(m, cmd)] = -i * j_mc;
        drift[(cm, cm)] = -Complex64::new(params.gamma_c / 2.0, 1.0);
        drift[(cm, a)] = -i * j_ac;
        drift[(cm, ad)] = -i * j_ac;
        drift[(cm, m)] = -i * j_mc;
        drift[(cm, md)] = -i * j_mc;
    }
    // Hermitian-conjugate rows: δo† row is the conjugate of the δo row with
    // the pair indices swapped.
    for row in (0..n).step_by(2) {
        for col in 0..n {
            drift[(row + 1, col ^ 1)] = drift[(row, col)].conj();
        }
    }

    let mut noise_map = DMatrix::<Complex64>::zeros(n, n);
    let rates = [params.gamma_a, params.gamma_m, params.gamma_c];
    for k in 0..n {
        noise_map[(k, k)] = c(libm::sqrt(rates[k / 2]));
    }

    let mut corr = DMatrix::<Complex64>::zeros(n, n);
    let n_s = params.n_s();
    let m_s = params.m_s();
    corr[(a, ad)] = c(n_s + 1.0);
    corr[(ad, a)] = c(n_s);
    corr[(a, a)] = Complex64::from_polar(m_s, -2.0 * params.phi_s);
    corr[(ad, ad)] = Complex64::from_polar(m_s, 2.0 * params.phi_s);
    match weighting {
        MagnonWeighting::Separated => {
            corr[(m, md)] = c(params.n_m + 1.0);
            corr[(md, m)] = c(params.n_m);
        }
        MagnonWeighting::Lumped => {
            corr[(m, md)] = c(2.0 * params.n_m + 1.0);
        }
    }
    if include_cm {
        let (cm, cmd) = (Mode::Cm.annihilation(), Mode::Cm.creation());
        corr[(cm, cmd)] = c(params.n_c + 1.0);
        corr[(cmd, cm)] = c(params.n_c);
    }

    DriftModel {
        dimension: n,
        drift,
        noise_map,
        input_correlations: corr,
    }
}
