//! Classical steady state of the driven system, effective couplings, and the
//! linearized fluctuation model built on top of it.

mod drift;
pub(crate) use drift::build_drift_weighted;
pub(crate) mod stability;

pub use drift::{build_drift, DriftModel, MagnonWeighting, Mode};
pub use stability::{assert_stable, quadrature_drift, stability_report, StabilityReport};

use alloc::vec::Vec;

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mechanism, SystemParams};

const NEWTON_MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 40;
const TOLERANCE: f64 = 1e-12;
const DISTINCT_ROOTS: f64 = 1e-6;

/// Steady amplitudes of cavity, magnon and CM modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub a0: Complex64,
    pub m0: Complex64,
    pub c0: Complex64,
    /// Max-norm of the fixed-point residuals, scaled by max(1, |amplitudes|).
    pub residual: f64,
    pub iterations: usize,
    /// Set when multi-start found more than one distinct root.
    pub multistable: bool,
    /// Every distinct root found, as (a0, m0, c0).
    pub roots: Vec<[Complex64; 3]>,
}

/// Cavity-dominated (MCM) steady state: solves
/// (γ_a/2 + iΔ_a) a0 = Ω_a − 2iε_a a0* exactly with m0 = c0 = 0.
///
/// `omega_a` is the cavity drive in units of ω_c.
pub fn solve_mcm(params: &SystemParams, omega_a: f64) -> Result<SteadyState> {
    if params.mechanism != Mechanism::Mcm {
        return Err(Error::Config("solve_mcm requires mechanism = mcm".into()));
    }
    params.validate()?;
    params.check_parametric_threshold()?;
    let drive = Complex64::new(omega_a, 0.0);
    let a0 = cavity_only(params, drive);
    let kappa = Complex64::new(params.gamma_a / 2.0, params.delta_a);
    let res = kappa * a0 + 2.0 * Complex64::i() * params.eps_a * a0.conj() - drive;
    let residual = res.norm() / kappa.norm().max(1.0) / a0.norm().max(1.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(SteadyState {
        a0,
        m0: zero,
        c0: zero,
        residual,
        iterations: 0,
        multistable: false,
        roots: alloc::vec![[a0, zero, zero]],
    })
}

/// Solution of κ a + 2iε a* = Ω from the 2×2 system in (a, a*).
fn cavity_only(params: &SystemParams, drive: Complex64) -> Complex64 {
    let kappa = Complex64::new(params.gamma_a / 2.0, params.delta_a);
    let eps = params.eps_a;
    let det = kappa.norm_sqr() - 4.0 * eps.norm_sqr();
    (kappa.conj() * drive - 2.0 * Complex64::i() * eps * drive.conj()) / det
}

/// Dual-drive (CMI) steady state.
///
/// Damped Newton iteration on the six real unknowns (Re/Im of a0, m0, c0)
/// of the coupled steady-state equations, started from the decoupled
/// solution and from eight perturbations of it. `omega_a`, `eps_m` and
/// `g_amc` are in units of ω_c.
pub fn solve_cmi(params: &SystemParams, omega_a: f64, eps_m: f64, g_amc: f64) -> Result<SteadyState> {
    if params.mechanism != Mechanism::Cmi {
        return Err(Error::Config("solve_cmi requires mechanism = cmi".into()));
    }
    params.validate()?;
    params.check_parametric_threshold()?;
    for (name, v) in [("omega_a", omega_a), ("eps_m", eps_m), ("g_amc", g_amc)] {
        if !v.is_finite() {
            return Err(Error::domain(name, v, "must be finite"));
        }
    }
    let system = CmiSystem::new(params, omega_a, eps_m, g_amc);

    let base = system.decoupled();
    let mut starts = alloc::vec![base];
    let scale = base.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for k in 0..8 {
        let phase = Complex64::from_polar(1.0, core::f64::consts::FRAC_PI_4 * k as f64);
        let stretch = [0.5, 1.5, 2.0, 0.25][k % 4];
        let mut guess = base;
        for z in guess.iter_mut().take(2) {
            *z = *z * stretch * phase + phase * (0.1 * scale);
        }
        guess[2] = system.c_from(guess[0], guess[1]);
        starts.push(guess);
    }

    let mut roots: Vec<([Complex64; 3], f64, usize)> = Vec::new();
    let mut best_failure = f64::INFINITY;
    for start in starts {
        match system.newton(start) {
            Ok((z, res, it)) => {
                if roots.iter().all(|(r, _, _)| distance(r, &z) > DISTINCT_ROOTS) {
                    roots.push((z, res, it));
                }
            }
            Err(res) => best_failure = best_failure.min(res),
        }
    }
    if roots.is_empty() {
        return Err(Error::Convergence {
            iterations: NEWTON_MAX_ITER,
            residual: best_failure,
        });
    }
    let multistable = roots.len() > 1;
    if multistable {
        log::warn!(
            "{} distinct steady states found; keeping the one with smallest |c0|",
            roots.len()
        );
    }
    let chosen = roots
        .iter()
        .min_by(|x, y| x.0[2].norm().total_cmp(&y.0[2].norm()))
        .cloned()
        .expect("non-empty");
    Ok(SteadyState {
        a0: chosen.0[0],
        m0: chosen.0[1],
        c0: chosen.0[2],
        residual: chosen.1,
        iterations: chosen.2,
        multistable,
        roots: roots.into_iter().map(|r| r.0).collect(),
    })
}

fn distance(x: &[Complex64; 3], y: &[Complex64; 3]) -> f64 {
    let scale = x.iter().chain(y.iter()).map(|z| z.norm()).fold(1.0, f64::max);
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale
}

/// The coupled steady-state equations in zero-residual form
///   R_a = κ_a a − Ω_a + 2iε_a a* + 2iG Re[c] m
///   R_m = κ_m m − ε_m + 2iG Re[c] a
///   R_c = κ_c c + iG (a m* + a* m)
/// with κ_o = γ_o/2 + iΔ_o and κ_c = γ_c/2 + i.
pub(crate) struct CmiSystem {
    kappa_a: Complex64,
    kappa_m: Complex64,
    kappa_c: Complex64,
    eps: Complex64,
    omega_a: f64,
    eps_m: f64,
    g: f64,
}

impl CmiSystem {
    pub(crate) fn new(params: &SystemParams, omega_a: f64, eps_m: f64, g: f64) -> Self {
        Self {
            kappa_a: Complex64::new(params.gamma_a / 2.0, params.delta_a),
            kappa_m: Complex64::new(params.gamma_m / 2.0, params.delta_m),
            kappa_c: Complex64::new(params.gamma_c / 2.0, 1.0),
            eps: params.eps_a,
            omega_a,
            eps_m,
            g,
        }
    }

    fn decoupled(&self) -> [Complex64; 3] {
        let drive = Complex64::new(self.omega_a, 0.0);
        let det = self.kappa_a.norm_sqr() - 4.0 * self.eps.norm_sqr();
        let a = (self.kappa_a.conj() * drive - 2.0 * Complex64::i() * self.eps * drive) / det;
        let m = Complex64::new(self.eps_m, 0.0) / self.kappa_m;
        [a, m, self.c_from(a, m)]
    }

    fn c_from(&self, a: Complex64, m: Complex64) -> Complex64 {
        -Complex64::i() * self.g * 2.0 * (a * m.conj()).re / self.kappa_c
    }

    /// Right-hand sides of the fixed-point form a = f_a(a, m, c), ...
    pub(crate) fn fixed_point(&self, z: &[Complex64; 3]) -> [Complex64; 3] {
        let i = Complex64::i();
        let [a, m, c] = *z;
        let dressed = 2.0 * self.g * c.re;
        let fa = (-self.omega_a + i * (2.0 * self.eps * a.conj() + dressed * m)) / -self.kappa_a;
        let fm = (i * dressed * a - self.eps_m) / -self.kappa_m;
        let fc = i * self.g * (a * m.conj() + a.conj() * m) / -self.kappa_c;
        [fa, fm, fc]
    }

    pub(crate) fn residuals(&self, z: &[Complex64; 3]) -> [Complex64; 3] {
        let i = Complex64::i();
        let [a, m, c] = *z;
        let dressed = 2.0 * self.g * c.re;
        [
            self.kappa_a * a - self.omega_a + 2.0 * i * self.eps * a.conj() + i * dressed * m,
            self.kappa_m * m - self.eps_m + i * dressed * a,
            self.kappa_c * c + i * self.g * 2.0 * (a * m.conj()).re,
        ]
    }

    /// Scaled max-norm of |z − f(z)|.
    pub(crate) fn residual_norm(&self, z: &[Complex64; 3]) -> f64 {
        let f = self.fixed_point(z);
        let scale = z.iter().map(|w| w.norm()).fold(1.0, f64::max);
        z.iter()
            .zip(f.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Real 6×6 Jacobian of the residuals with respect to
    /// (Re a, Im a, Re m, Im m, Re c, Im c), from Wirtinger derivatives.
    pub(crate) fn jacobian(&self, z: &[Complex64; 3]) -> Matrix6<f64> {
        let i = Complex64::i();
        let zero = Complex64::new(0.0, 0.0);
        let [a, m, c] = *z;
        let g = self.g;
        let dressed = 2.0 * g * c.re;
        // Per residual: (∂/∂a, ∂/∂a*, ∂/∂m, ∂/∂m*, ∂/∂Re c, ∂/∂Im c).
        let rows: [[Complex64; 6]; 3] = [
            [
                self.kappa_a,
                2.0 * i * self.eps,
                i * dressed,
                zero,
                2.0 * i * g * m,
                zero,
            ],
            [
                i * dressed,
                zero,
                self.kappa_m,
                zero,
                2.0 * i * g * a,
                zero,
            ],
            [
                i * g * m.conj(),
                i * g * m,
                i * g * a.conj(),
                i * g * a,
                self.kappa_c,
                i * self.kappa_c,
            ],
        ];
        let mut jac = Matrix6::zeros();
        for (r, d) in rows.iter().enumerate() {
            let cols = [
                d[0] + d[1],
                i * (d[0] - d[1]),
                d[2] + d[3],
                i * (d[2] - d[3]),
                d[4],
                d[5],
            ];
            for (k, v) in cols.iter().enumerate() {
                jac[(2 * r, k)] = v.re;
                jac[(2 * r + 1, k)] = v.im;
            }
        }
        jac
    }

    /// Damped Newton from `start`. On failure returns the final residual.
    fn newton(&self, start: [Complex64; 3]) -> core::result::Result<([Complex64; 3], f64, usize), f64> {
        let mut z = start;
        let mut res = self.residual_norm(&z);
        for it in 0..NEWTON_MAX_ITER {
            if !res.is_finite() {
                return Err(res);
            }
            if res < TOLERANCE {
                return Ok((z, res, it));
            }
            let r = self.residuals(&z);
            let rhs = Vector6::new(r[0].re, r[0].im, r[1].re, r[1].im, r[2].re, r[2].im);
            let step = match self.jacobian(&z).lu().solve(&rhs) {
                Some(s) => s,
                None => return Err(res),
            };
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let trial = apply_step(&z, &step, lambda);
                let trial_res = self.residual_norm(&trial);
                if trial_res < res {
                    z = trial;
                    res = trial_res;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return if res < TOLERANCE { Ok((z, res, it)) } else { Err(res) };
            }
        }
        if res < TOLERANCE {
            Ok((z, res, NEWTON_MAX_ITER))
        } else {
            Err(res)
        }
    }
}

fn apply_step(z: &[Complex64; 3], step: &Vector6<f64>, lambda: f64) -> [Complex64; 3] {
    let mut out = *z;
    for (k, w) in out.iter_mut().enumerate() {
        *w -= Complex64::new(step[2 * k], step[2 * k + 1]) * lambda;
    }
    out
}

/// (J_ac, J_mc, J_am) = (G|m0|, G|a0|, 2G Re[c0]) in units of ω_c.
///
/// An MCM steady state has m0 = c0 = 0, so only J_mc survives.
pub fn effective_couplings(steady: &SteadyState, g_amc: f64) -> (f64, f64, f64) {
    (
        g_amc * steady.m0.norm(),
        g_amc * steady.a0.norm(),
        2.0 * g_amc * steady.c0.re,
    )
}
