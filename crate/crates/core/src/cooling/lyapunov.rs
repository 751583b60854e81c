use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::ode::{integrate, OdeOptions};
use super::{check_time_grid, OccupancyTrajectory, TrajectoryMethod};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::stability::ladder_to_quadrature;
use crate::steady_state::{assert_stable, build_drift, quadrature_drift, DriftModel};

/// Smallest allowed eigenvalue of V + iΩ/2.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-10;

/// Steady covariance of the full six-mode system in the quadrature basis
/// (x_a, p_a, x_m, p_m, x_c, p_c), vacuum variance 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSolution {
    pub covariance: DMatrix<f64>,
    pub n_c: f64,
    /// Smallest eigenvalue of V + iΩ/2.
    pub physicality_margin: f64,
    pub physical: bool,
}

/// Real diffusion matrix D with ⟨η_i(t) η_j(t')⟩_sym = D_ij δ(t − t') for the
/// quadrature noise η = T N ξ.
pub fn diffusion_matrix(model: &DriftModel) -> DMatrix<f64> {
    let (t, _) = ladder_to_quadrature(model.dimension);
    let tn = &t * &model.noise_map;
    let full = &tn * &model.input_correlations * tn.transpose();
    (&full + full.transpose()).map(|z: Complex64| z.re / 2.0)
}

/// Solves A V + V Aᵀ + D = 0 by vectorization, (I⊗A + A⊗I) vec V = −vec D.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(a) + a.kronecker(&id);
    let rhs = DMatrix::from_column_slice(n * n, 1, (-d).as_slice());
    let lu = k.lu();
    let det = lu.determinant().abs();
    let x = lu.solve(&rhs).ok_or(Error::Singular { omega: 0.0, det })?;
    let v = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok((&v + v.transpose()) / 2.0)
}

/// Symplectic form Ω = ⊕ [[0, 1], [−1, 0]].
fn symplectic(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(n, n);
    for k in (0..n).step_by(2) {
        omega[(k, k + 1)] = 1.0;
        omega[(k + 1, k)] = -1.0;
    }
    omega
}

/// Smallest eigenvalue of the Hermitian matrix V + iΩ/2, computed through
/// its real embedding [[V, −Ω/2], [Ω/2, V]].
pub fn physicality_margin(v: &DMatrix<f64>) -> f64 {
    let n = v.nrows();
    let half = symplectic(n) / 2.0;
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(v);
    m.view_mut((n, n), (n, n)).copy_from(v);
    m.view_mut((0, n), (n, n)).copy_from(&(-&half));
    m.view_mut((n, 0), (n, n)).copy_from(&half);
    SymmetricEigen::new(m).eigenvalues.min()
}

/// n_c = (⟨x_c²⟩ + ⟨p_c²⟩ − 1)/2 from a six-mode covariance.
pub fn cm_occupancy(v: &DMatrix<f64>) -> f64 {
    (v[(4, 4)] + v[(5, 5)] - 1.0) / 2.0
}

fn solution(v: DMatrix<f64>) -> LyapunovSolution {
    let margin = physicality_margin(&v);
    LyapunovSolution {
        n_c: cm_occupancy(&v),
        physicality_margin: margin,
        physical: margin >= -PHYSICALITY_TOLERANCE,
        covariance: v,
    }
}

/// Full-covariance steady state of the coupled six-mode system.
pub fn lyapunov_steady(params: &SystemParams) -> Result<LyapunovSolution> {
    params.validate()?;
    params.check_parametric_threshold()?;
    let model = build_drift(params, true);
    assert_stable(&model)?;
    let v = solve_lyapunov(&quadrature_drift(&model), &diffusion_matrix(&model))?;
    Ok(solution(v))
}

/// Initial covariance: the cavity–magnon subsystem in its own steady state
/// and the CM mode thermal with occupancy `n0`, uncorrelated.
pub fn initial_covariance(params: &SystemParams, n0: f64) -> Result<DMatrix<f64>> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::domain("n0", n0, "must be finite and non-negative"));
    }
    params.validate()?;
    params.check_parametric_threshold()?;
    let sub = build_drift(params, false);
    assert_stable(&sub)?;
    let v_sub = solve_lyapunov(&quadrature_drift(&sub), &diffusion_matrix(&sub))?;
    let mut v = DMatrix::zeros(6, 6);
    v.view_mut((0, 0), (4, 4)).copy_from(&v_sub);
    v[(4, 4)] = n0 + 0.5;
    v[(5, 5)] = n0 + 0.5;
    Ok(v)
}

/// Integrates dV/dt = A V + V Aᵀ + D from `v0` and samples n_c(t) at the
/// dimensionless `times` (the first entry is the initial time).
pub fn lyapunov_dynamics(
    params: &SystemParams,
    v0: &DMatrix<f64>,
    times: &[f64],
) -> Result<OccupancyTrajectory> {
    check_time_grid(times)?;
    params.validate()?;
    params.check_parametric_threshold()?;
    let model = build_drift(params, true);
    assert_stable(&model)?;
    if v0.nrows() != 6 || v0.ncols() != 6 {
        return Err(Error::domain("v0", v0.nrows() as f64, "covariance must be 6x6"));
    }
    if physicality_margin(v0) < -PHYSICALITY_TOLERANCE {
        return Err(Error::domain("v0", physicality_margin(v0), "initial covariance is unphysical"));
    }
    let a = quadrature_drift(&model);
    let d = diffusion_matrix(&model);
    let rhs = move |_: f64, y: &[f64], dy: &mut [f64]| {
        let v = DMatrix::from_column_slice(6, 6, y);
        let av = &a * &v;
        let dv = &av + av.transpose() + &d;
        dy.copy_from_slice(dv.as_slice());
    };
    let states = integrate(rhs, v0.as_slice(), times, OdeOptions::default())?;
    let occupancies: Vec<f64> = states
        .iter()
        .map(|y| cm_occupancy(&DMatrix::from_column_slice(6, 6, y)))
        .collect();
    Ok(OccupancyTrajectory {
        times: times.to_vec(),
        occupancies,
        method: TrajectoryMethod::Lyapunov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::{rates, steady_occupancy, RateEquation};
    use crate::model::Mechanism;
    use crate::presets;

    fn decoupled() -> SystemParams {
        SystemParams {
            j_ac: 0.0,
            j_mc: 0.0,
            j_am: 0.0,
            eps_a: Complex64::new(0.0, 0.0),
            gamma_c: 1e-3,
            n_c: 37.0,
            ..presets::fig2_cmi()
        }
    }

    #[test]
    fn decoupled_cm_is_thermal() {
        let s = lyapunov_steady(&decoupled()).unwrap();
        assert!((s.n_c - 37.0).abs() < 1e-9);
        assert!(s.physical);
    }

    #[test]
    fn resonant_squeezed_input_gives_pure_cavity_state() {
        let p = SystemParams {
            delta_a: 0.0,
            ..decoupled()
        };
        let v = lyapunov_steady(&p).unwrap().covariance;
        let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        assert!((det - 0.25).abs() < 1e-9, "{det}");
        assert!(v[(0, 0)].min(v[(1, 1)]) < 0.5 || v[(0, 1)].abs() > 0.0);
    }

    #[test]
    fn vacuum_inputs_give_vacuum_variance() {
        let p = SystemParams {
            r_s: 0.0,
            n_m: 0.0,
            n_c: 0.0,
            ..decoupled()
        };
        let v = lyapunov_steady(&p).unwrap().covariance;
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 0.5 } else { 0.0 };
                assert!((v[(i, j)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_and_symmetry() {
        let p = presets::fig2_cmi().with_q_c(1e7);
        let model = build_drift(&p, true);
        let a = quadrature_drift(&model);
        let d = diffusion_matrix(&model);
        let v = solve_lyapunov(&a, &d).unwrap();
        let r = &a * &v + &v * a.transpose() + &d;
        assert!(r.amax() < 1e-8 * v.amax(), "{}", r.amax());
        assert_eq!(v, v.transpose());
    }

    #[test]
    fn weak_coupling_agrees_with_rate_formula() {
        let p = SystemParams {
            j_ac: 0.03,
            j_mc: 0.05,
            ..presets::fig2_cmi()
        }
        .with_q_c(1e6);
        let (gm, gp) = rates(&p).unwrap();
        let rate_n = steady_occupancy(&p, gm, gp).unwrap();
        let lyap = lyapunov_steady(&p).unwrap();
        assert!(lyap.physical);
        assert!((lyap.n_c - rate_n).abs() / lyap.n_c < 0.15, "{} vs {}", lyap.n_c, rate_n);
    }

    #[test]
    fn steady_start_stays_put() {
        let p = presets::fig2_cmi().with_q_c(1e3);
        let s = lyapunov_steady(&p).unwrap();
        let tr = lyapunov_dynamics(&p, &s.covariance, &[0.0, 5.0, 50.0]).unwrap();
        for n in &tr.occupancies {
            assert!((n - s.n_c).abs() <= 1e-8 * s.n_c, "{n} vs {}", s.n_c);
        }
    }

    #[test]
    fn decoupled_cm_relaxes_exponentially() {
        let p = decoupled();
        let v0 = initial_covariance(&p, 5.0).unwrap();
        let times = [0.0, 100.0, 1000.0, 3000.0];
        let tr = lyapunov_dynamics(&p, &v0, &times).unwrap();
        for (t, n) in times.iter().zip(&tr.occupancies) {
            let e = 37.0 + (5.0 - 37.0) * libm::exp(-p.gamma_c * t);
            assert!((n - e).abs() < 1e-8 * e, "{t}: {n} vs {e}");
        }
    }

    #[test]
    fn weak_coupling_trajectory_tracks_rate_equation() {
        let p = SystemParams {
            j_ac: 0.0,
            j_mc: 0.05,
            n_c: 200.0,
            mechanism: Mechanism::Mcm,
            ..presets::fig2_cmi()
        }
        .with_q_c(1e4);
        let eq = RateEquation::new(&p, 200.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 100.0).collect();
        let v0 = initial_covariance(&p, 200.0).unwrap();
        let tr = lyapunov_dynamics(&p, &v0, &times).unwrap();
        for (t, n) in times.iter().zip(&tr.occupancies) {
            let r = eq.at(*t);
            assert!((n - r).abs() / r < 0.2, "{t}: {n} vs {r}");
        }
    }

    #[test]
    fn unphysical_start_is_refused() {
        let p = decoupled();
        let mut v0 = initial_covariance(&p, 0.0).unwrap();
        v0[(4, 4)] = 0.1;
        v0[(5, 5)] = 0.1;
        assert!(lyapunov_dynamics(&p, &v0, &[0.0, 1.0]).is_err());
    }
}
