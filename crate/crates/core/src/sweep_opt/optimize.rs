use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cooling::{occupancy_from, rates};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::{assert_stable, build_drift};

const GRID_POINTS: usize = 7;
const MAX_EVALUATIONS: usize = 2000;
const TOLERANCE: f64 = 1e-8;
const R_MAX: f64 = 3.0;
const J_MAX: f64 = 1.0;
/// Fraction of the parametric threshold |ε_a| may reach.
const EPS_FRACTION: f64 = 0.95;

/// Parameters the optimizer may move. `EpsA` contributes two coordinates
/// (Re ε_a, Im ε_a).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    RS,
    PhiS,
    EpsA,
    JAc,
    JMc,
    JAm,
}

impl FreeParam {
    pub fn as_str(self) -> &'static str {
        match self {
            FreeParam::RS => "r_s",
            FreeParam::PhiS => "phi_s",
            FreeParam::EpsA => "eps_a",
            FreeParam::JAc => "j_ac",
            FreeParam::JMc => "j_mc",
            FreeParam::JAm => "j_am",
        }
    }
}

impl FromStr for FreeParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            FreeParam::RS,
            FreeParam::PhiS,
            FreeParam::EpsA,
            FreeParam::JAc,
            FreeParam::JMc,
            FreeParam::JAm,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::Config(alloc::format!("unknown free parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Weak-coupling occupancy n_c.
    #[default]
    MinOccupancy,
    /// Γ+/Γ−.
    MinRateRatio,
    /// |S_F(−ω_c)|.
    MinStokes,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min_occupancy" | "n_c" => Ok(Objective::MinOccupancy),
            "min_rate_ratio" | "ratio" => Ok(Objective::MinRateRatio),
            "min_stokes" | "stokes" => Ok(Objective::MinStokes),
            _ => Err(Error::Config(alloc::format!("unknown objective `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluations: usize,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub params: SystemParams,
    pub free: Vec<FreeParam>,
    pub objective: Objective,
    pub objective_value: f64,
    pub base_value: f64,
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Coordinate layout of a free set.
struct Layout {
    free: Vec<FreeParam>,
    eps_radius: f64,
}

impl Layout {
    fn new(base: &SystemParams, free: &[FreeParam]) -> Self {
        let mut free = free.to_vec();
        free.sort();
        free.dedup();
        Self {
            free,
            eps_radius: EPS_FRACTION * base.parametric_limit() / 2.0,
        }
    }

    fn dims(&self) -> usize {
        self.free.iter().map(|f| if *f == FreeParam::EpsA { 2 } else { 1 }).sum()
    }

    fn encode(&self, p: &SystemParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dims());
        for f in &self.free {
            match f {
                FreeParam::RS => x.push(p.r_s),
                FreeParam::PhiS => x.push(p.phi_s.rem_euclid(TAU)),
                FreeParam::EpsA => {
                    x.push(p.eps_a.re);
                    x.push(p.eps_a.im);
                }
                FreeParam::JAc => x.push(p.j_ac),
                FreeParam::JMc => x.push(p.j_mc),
                FreeParam::JAm => x.push(p.j_am),
            }
        }
        x
    }

    /// Parameters at `x`, or `None` outside the bounds. φ_s wraps.
    fn decode(&self, base: &SystemParams, x: &[f64]) -> Option<SystemParams> {
        let mut p = *base;
        let mut i = 0;
        let in_j = |v: f64| (0.0..=J_MAX).contains(&v);
        for f in &self.free {
            match f {
                FreeParam::RS => {
                    if !(0.0..=R_MAX).contains(&x[i]) {
                        return None;
                    }
                    p.r_s = x[i];
                }
                FreeParam::PhiS => p.phi_s = x[i].rem_euclid(TAU),
                FreeParam::EpsA => {
                    let e = Complex64::new(x[i], x[i + 1]);
                    if !(e.norm() <= self.eps_radius) {
                        return None;
                    }
                    p.eps_a = e;
                    i += 1;
                }
                FreeParam::JAc => {
                    if !in_j(x[i]) {
                        return None;
                    }
                    p.j_ac = x[i];
                }
                FreeParam::JMc => {
                    if !in_j(x[i]) {
                        return None;
                    }
                    p.j_mc = x[i];
                }
                FreeParam::JAm => {
                    if !in_j(x[i]) {
                        return None;
                    }
                    p.j_am = x[i];
                }
            }
            i += 1;
        }
        Some(p)
    }

    /// Coarse grid axes, one per coordinate.
    fn axes(&self) -> Vec<Vec<f64>> {
        let lin = |lo: f64, hi: f64| -> Vec<f64> {
            (0..GRID_POINTS)
                .map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64)
                .collect()
        };
        let mut axes = Vec::new();
        for f in &self.free {
            match f {
                FreeParam::RS => axes.push(lin(0.0, R_MAX)),
                FreeParam::PhiS => axes.push(
                    (0..GRID_POINTS)
                        .map(|k| TAU * k as f64 / GRID_POINTS as f64)
                        .collect(),
                ),
                FreeParam::EpsA => {
                    axes.push(lin(-self.eps_radius, self.eps_radius));
                    axes.push(lin(-self.eps_radius, self.eps_radius));
                }
                FreeParam::JAc | FreeParam::JMc | FreeParam::JAm => axes.push(lin(0.0, J_MAX)),
            }
        }
        axes
    }
}

/// Objective at a parameter point; +∞ for unstable or runaway points.
fn objective_value(p: &SystemParams, objective: Objective) -> f64 {
    if p.validate().is_err() || p.check_parametric_threshold().is_err() {
        return f64::INFINITY;
    }
    if assert_stable(&build_drift(p, false)).is_err() || assert_stable(&build_drift(p, true)).is_err() {
        return f64::INFINITY;
    }
    let Ok((gm, gp)) = rates(p) else {
        return f64::INFINITY;
    };
    match objective {
        Objective::MinOccupancy => occupancy_from(p.gamma_c, p.n_c, gm, gp).unwrap_or(f64::INFINITY),
        Objective::MinRateRatio => {
            if gm > 0.0 {
                gp / gm
            } else {
                f64::INFINITY
            }
        }
        Objective::MinStokes => gp.abs(),
    }
}

/// Coarse grid followed by Nelder–Mead refinement. Every candidate must be
/// stable (4×4 and 6×6 drift) and inside the bounds r_s ∈ [0, 3],
/// |ε_a| ≤ 0.95 × threshold, J ∈ [0, 1]; φ_s is periodic.
pub fn optimize_interference(
    base: &SystemParams,
    free: &[FreeParam],
    objective: Objective,
) -> Result<OptimizationResult> {
    base.validate()?;
    let layout = Layout::new(base, free);
    let base_value = objective_value(base, objective);
    if layout.free.is_empty() {
        return Ok(OptimizationResult {
            params: *base,
            free: Vec::new(),
            objective,
            objective_value: base_value,
            base_value,
            trace: vec![TracePoint {
                evaluations: 1,
                best: base_value,
            }],
            evaluations: 1,
            converged: true,
        });
    }

    let f = |x: &[f64]| match layout.decode(base, x) {
        Some(p) => objective_value(&p, objective),
        None => f64::INFINITY,
    };

    // Coarse grid; the base point competes with it.
    let axes = layout.axes();
    let dims = axes.len();
    let mut best_x = layout.encode(base);
    let mut best = if layout.decode(base, &best_x).is_some() {
        base_value
    } else {
        f64::INFINITY
    };
    let mut evaluations = 1;
    let mut index = vec![0usize; dims];
    let mut x = vec![0.0; dims];
    loop {
        for d in 0..dims {
            x[d] = axes[d][index[d]];
        }
        let v = f(&x);
        evaluations += 1;
        if v < best {
            best = v;
            best_x.copy_from_slice(&x);
        }
        let mut d = 0;
        while d < dims {
            index[d] += 1;
            if index[d] < axes[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == dims {
            break;
        }
    }
    if !best.is_finite() {
        return Err(Error::Infeasible);
    }
    let mut trace = vec![TracePoint { evaluations, best }];

    let steps: Vec<f64> = axes.iter().map(|a| (a[1] - a[0]) / 2.0).collect();
    let nm = nelder_mead(f, &best_x, &steps, TOLERANCE, MAX_EVALUATIONS);
    evaluations += nm.evaluations;
    let offset = trace[0].evaluations;
    trace.extend(nm.trace.iter().map(|t| TracePoint {
        evaluations: t.evaluations + offset,
        best: t.best,
    }));
    let (x_opt, value) = if nm.value <= best {
        (nm.x, nm.value)
    } else {
        (best_x, best)
    };
    let params = layout.decode(base, &x_opt).ok_or(Error::Infeasible)?;
    Ok(OptimizationResult {
        params,
        free: layout.free.clone(),
        objective,
        objective_value: value,
        base_value,
        trace,
        evaluations,
        converged: nm.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Derivative-free simplex minimization from `x0` with initial edge lengths
/// `steps`. Stops when the spread of simplex values falls below
/// `tol·(1 + |f_best|)` or after `max_evals` evaluations.
pub fn nelder_mead<F>(f: F, x0: &[f64], steps: &[f64], tol: f64, max_evals: usize) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if steps[i] != 0.0 { steps[i] } else { 1e-3 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let mut trace = Vec::new();
    let mut converged = false;

    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect()
    };

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        simplex = order.iter().map(|i| simplex[*i].clone()).collect();
        values = order.iter().map(|i| values[*i]).collect();
        trace.push(TracePoint {
            evaluations: evals,
            best: values[0],
        });

        let spread = values[n] - values[0];
        if values[0].is_finite() && spread.is_finite() && spread <= tol * (1.0 + values[0].abs()) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = point(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = point(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = point(&centroid, &worst, -0.5);
            let v = f(&c);
            (c, v)
        } else {
            let c = point(&centroid, &worst, 0.5);
            let v = f(&c);
            (c, v)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            simplex[i] = point(&simplex[0], &simplex[i], 0.5);
            values[i] = f(&simplex[i]);
        }
        evals += n;
    }

    let (k, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    NelderMeadResult {
        x: simplex[k].clone(),
        value: values[k],
        evaluations: evals,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            1e-14,
            5000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn simplex_handles_rosenbrock() {
        let r = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            1e-16,
            20000,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn empty_free_set_returns_base() {
        let base = presets::fig2_cmi();
        let r = optimize_interference(&base, &[], Objective::MinOccupancy).unwrap();
        assert_eq!(r.params, base);
        assert!(r.converged);
        assert_eq!(r.objective_value, r.base_value);
    }

    #[test]
    fn phase_only_stokes_optimum_near_caption_value() {
        let base = presets::fig2_cmi();
        let r = optimize_interference(&base, &[FreeParam::PhiS], Objective::MinStokes).unwrap();
        assert!(r.objective_value <= r.base_value);
        let deg = r.params.phi_s.to_degrees();
        // the phase enters through e^{2iφ}, so φ and φ + 180° are equivalent
        let d = (deg - 94.0).rem_euclid(180.0);
        assert!(d.min(180.0 - d) < 10.0, "{deg}");
    }

    #[test]
    fn optimum_respects_bounds_and_stability() {
        let base = presets::fig2_cmi();
        let r = optimize_interference(
            &base,
            &[FreeParam::RS, FreeParam::EpsA],
            Objective::MinOccupancy,
        )
        .unwrap();
        let p = r.params;
        assert!(r.objective_value <= r.base_value);
        assert!((0.0..=3.0).contains(&p.r_s));
        assert!(p.eps_a.norm() <= 0.95 * p.parametric_limit() / 2.0 + 1e-15);
        assert!(assert_stable(&build_drift(&p, true)).is_ok());
    }

    #[test]
    fn names_parse() {
        assert_eq!("eps_a".parse::<FreeParam>().unwrap(), FreeParam::EpsA);
        assert_eq!("stokes".parse::<Objective>().unwrap(), Objective::MinStokes);
        assert!("x".parse::<Objective>().is_err());
    }
}
