use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DriftModel;
use crate::error::{Error, Result};

/// Eigenvalue summary of a drift matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvalue_real_parts: Vec<f64>,
    /// All real parts strictly negative.
    pub stable: bool,
    /// Smallest |Re λ|.
    pub margin: f64,
}

/// Ladder-to-quadrature map x = (o + o†)/√2, p = −i(o − o†)/√2 applied to
/// every mode pair. The result is real.
pub(crate) fn ladder_to_quadrature(n: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    let one = Complex64::new(s, 0.0);
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    let mut t_inv = DMatrix::<Complex64>::zeros(n, n);
    for k in (0..n).step_by(2) {
        t[(k, k)] = one;
        t[(k, k + 1)] = one;
        t[(k + 1, k)] = -i * s;
        t[(k + 1, k + 1)] = i * s;
        t_inv[(k, k)] = one;
        t_inv[(k, k + 1)] = i * s;
        t_inv[(k + 1, k)] = one;
        t_inv[(k + 1, k + 1)] = -i * s;
    }
    (t, t_inv)
}

/// Real drift matrix in the quadrature basis (x_a, p_a, x_m, p_m[, x_c, p_c]).
pub fn quadrature_drift(model: &DriftModel) -> DMatrix<f64> {
    let (t, t_inv) = ladder_to_quadrature(model.dimension);
    (&t * &model.drift * &t_inv).map(|z| z.re)
}

pub fn stability_report(model: &DriftModel) -> StabilityReport {
    let eigenvalues: Vec<Complex64> = quadrature_drift(model)
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    let eigenvalue_real_parts: Vec<f64> = eigenvalues.iter().map(|z| z.re).collect();
    let stable = eigenvalue_real_parts.iter().all(|re| *re < 0.0);
    let margin = eigenvalue_real_parts
        .iter()
        .map(|re| re.abs())
        .fold(f64::INFINITY, f64::min);
    StabilityReport {
        eigenvalues,
        eigenvalue_real_parts,
        stable,
        margin,
    }
}

/// Stability gate used before any spectral or dynamical computation.
pub fn assert_stable(model: &DriftModel) -> Result<StabilityReport> {
    if model.drift.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("drift", f64::NAN, "matrix has non-finite entries"));
    }
    let report = stability_report(model);
    if let Some(worst) = report
        .eigenvalues
        .iter()
        .filter(|z| z.re >= 0.0)
        .max_by(|x, y| x.re.total_cmp(&y.re))
    {
        return Err(Error::Unstable {
            re: worst.re,
            im: worst.im,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::presets;
    use crate::steady_state::build_drift;

    #[test]
    fn uncoupled_margin_is_smallest_half_linewidth() {
        let p = SystemParams {
            j_ac: 0.0,
            j_mc: 0.0,
            j_am: 0.0,
            eps_a: Complex64::new(0.0, 0.0),
            gamma_c: 0.3,
            ..presets::fig2_cmi()
        };
        let r = assert_stable(&build_drift(&p, true)).unwrap();
        assert!(r.stable);
        assert!((r.margin - 0.15).abs() < 1e-12);
        assert_eq!(r.eigenvalues.len(), 6);
    }

    #[test]
    fn above_parametric_threshold_is_unstable() {
        let base = SystemParams {
            j_ac: 0.0,
            j_mc: 0.0,
            j_am: 0.0,
            ..presets::fig2_cmi()
        };
        let limit = base.parametric_limit();
        let p = SystemParams {
            eps_a: Complex64::new(0.0, 0.51 * limit),
            ..base
        };
        assert!(matches!(
            assert_stable(&build_drift(&p, false)),
            Err(Error::Unstable { .. })
        ));
        let q = SystemParams {
            eps_a: Complex64::new(0.0, 0.49 * limit),
            ..base
        };
        assert!(assert_stable(&build_drift(&q, false)).is_ok());
    }

    #[test]
    fn fig2_cmi_is_stable() {
        let p = presets::fig2_cmi();
        let small = assert_stable(&build_drift(&p, false)).unwrap();
        let full = assert_stable(&build_drift(&p, true)).unwrap();
        assert!(small.stable && full.stable);
        assert!(full.eigenvalue_real_parts.iter().all(|r| *r < 0.0));
    }

    #[test]
    fn quadrature_drift_is_real_similarity() {
        let model = build_drift(&presets::fig2_cmi(), true);
        let (t, t_inv) = ladder_to_quadrature(6);
        let q = &t * &model.drift * &t_inv;
        assert!(q.iter().all(|z| z.im.abs() < 1e-15));
        let id = &t * &t_inv;
        for r in 0..6 {
            for c in 0..6 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((id[(r, c)] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }
}
