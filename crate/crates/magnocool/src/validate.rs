//! Cross-module oracle suite behind `magnocool validate`.

use magnocool_core::cooling::{
    bath_occupancy_for, cooling_report, lyapunov_steady, occupancy_from, rates, steady_occupancy,
};
use magnocool_core::presets;
use magnocool_core::spectra::{frequency_grid, mcm_rates, psd_general, Susceptibilities};
use magnocool_core::steady_state::build_drift;
use magnocool_core::sweep_opt::{evaluate_point, run_sweep, Runner, Scale, SweepKey, SweepSpec, SweepValues};
use magnocool_core::{Mechanism, SystemParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output;
use crate::parallel::Parallel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<String, String>) -> Check {
    match run() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs every oracle and returns one row per check, in a fixed order.
pub fn run_suite(runner: &Parallel) -> Vec<Check> {
    vec![
        check("single-channel rates at the reference point", || {
            let p = presets::fig2_mcm();
            let (gm, gp) = mcm_rates(&p, 1.0);
            let rel = ((gm - 0.005) / 0.005).abs().max(((gp - 0.001) / 0.001).abs());
            if rel <= 1e-12 {
                Ok(format!("Gamma- = {gm}, Gamma+ = {gp}"))
            } else {
                Err(format!("Gamma- = {gm}, Gamma+ = {gp}, rel dev {rel:e}"))
            }
        }),
        check("general engine reduces to the Lorentzian", engine_reduction),
        check("susceptibility identities", || {
            let p = presets::fig2_cmi();
            let mut worst: f64 = 0.0;
            for w in frequency_grid(-3.0, 3.0, 61).map_err(err)? {
                let s = Susceptibilities::at(&p, w);
                let inv_da = Complex64::new(p.gamma_a / 2.0, -(w - p.delta_a));
                let expect = inv_da + p.j_am * p.j_am * s.d_m;
                worst = worst.max((Complex64::new(1.0, 0.0) / s.d - expect).norm() / expect.norm());
            }
            (worst <= 1e-12)
                .then(|| format!("max rel dev {worst:.2e}"))
                .ok_or(format!("1/D mismatch {worst:e}"))
        }),
        check("drift conjugation symmetry", || {
            for p in [presets::fig2_cmi(), presets::fig2_mcm(), presets::fig5()] {
                for cm in [false, true] {
                    let a = build_drift(&p, cm).conjugation_asymmetry();
                    if a != 0.0 {
                        return Err(format!("asymmetry {a:e}"));
                    }
                }
            }
            Ok("exact".into())
        }),
        check("PSD non-negative on the default grids", || {
            let grid = frequency_grid(-3.0, 3.0, 2001).map_err(err)?;
            let mut worst = f64::INFINITY;
            for p in [presets::fig2_cmi(), presets::fig2_mcm(), presets::fig6(Mechanism::Cmi)] {
                let s = runner.spectrum(&p, grid.clone()).map_err(err)?;
                worst = worst.min(s.min_relative());
            }
            (worst >= -1e-12)
                .then(|| format!("min S/max S = {worst:.3e}"))
                .ok_or(format!("min S/max S = {worst:.3e}"))
        }),
        check("red/blue sideband sign flip", || {
            let mut out = Vec::new();
            for m in [Mechanism::Mcm, Mechanism::Cmi] {
                let red = cooling_report(&SystemParams { mechanism: m, ..presets::fig2_cmi() }).map_err(err)?;
                let blue = cooling_report(&presets::fig2_blue(m)).map_err(err)?;
                if !(red.gamma_net > 0.0 && blue.gamma_net < 0.0) {
                    return Err(format!("{}: red {} blue {}", m.as_str(), red.gamma_net, blue.gamma_net));
                }
                out.push(format!("{} {:.3e}/{:.3e}", m.as_str(), red.gamma_net, blue.gamma_net));
            }
            Ok(out.join(", "))
        }),
        check("occupancy inversion round trip", || {
            let p = presets::fig2_mcm();
            let (gm, gp) = rates(&p).map_err(err)?;
            let n = steady_occupancy(&p, gm, gp).map_err(err)?;
            let back = occupancy_from(p.gamma_c, bath_occupancy_for(p.gamma_c, n, gm, gp), gm, gp).map_err(err)?;
            let rel = ((back - n) / n).abs();
            (rel <= 1e-12)
                .then(|| format!("n_c = {n}, rel dev {rel:e}"))
                .ok_or(format!("rel dev {rel:e}"))
        }),
        check("Lyapunov covariance vs weak-coupling occupancy", || {
            let p = presets::fig2_cmi().with_q_c(1e7);
            let (gm, gp) = rates(&p).map_err(err)?;
            let rate_n = steady_occupancy(&p, gm, gp).map_err(err)?;
            let l = lyapunov_steady(&p).map_err(err)?;
            let rel = ((l.n_c - rate_n) / rate_n).abs();
            let msg = format!(
                "lyapunov {:.6} vs {:.6} (rel {rel:.2e}), physicality margin {:.2e}",
                l.n_c, rate_n, l.physicality_margin
            );
            (rel <= 0.15 && l.physical).then_some(msg.clone()).ok_or(msg)
        }),
        check("sweep/point consistency", || {
            let spec = SweepSpec::new(
                SweepKey::Delta,
                SweepValues::range(-3.0, 3.0, 25, Scale::Linear),
                presets::fig2_cmi(),
            );
            let t = runner.sweep(&spec).map_err(err)?;
            for row in &t.rows {
                if *row != evaluate_point(&spec, row.value).map_err(err)? {
                    return Err(format!("row at {} differs", row.value));
                }
            }
            Ok(format!("{} rows", t.rows.len()))
        }),
        check("parallel and sequential sweeps are byte-identical", || {
            let spec = SweepSpec::new(
                SweepKey::GammaM,
                SweepValues::range(0.01, 10.0, 41, Scale::Log),
                presets::fig2_cmi(),
            );
            let a = output::sweep_csvs(&runner.sweep(&spec).map_err(err)?).map_err(err)?;
            let b = output::sweep_csvs(&run_sweep(&spec).map_err(err)?).map_err(err)?;
            (a == b).then(|| format!("{} files", a.len())).ok_or("CSV bytes differ".into())
        }),
    ]
}

fn engine_reduction() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = SystemParams {
            delta_a: rng.gen_range(-3.0..3.0),
            delta_m: rng.gen_range(-3.0..3.0),
            gamma_a: rng.gen_range(0.1..5.0),
            gamma_m: rng.gen_range(0.01..5.0),
            n_m: 0.0,
            j_ac: 0.0,
            j_mc: rng.gen_range(1e-3..0.5),
            j_am: 0.0,
            eps_a: Complex64::new(0.0, 0.0),
            r_s: 0.0,
            mechanism: Mechanism::Cmi,
            ..presets::fig2_cmi()
        };
        for _ in 0..50 {
            let w = rng.gen_range(-4.0..4.0);
            let s = psd_general(&p, w).map_err(err)?;
            let e = mcm_rates(&p, w).0;
            worst = worst.max(((s - e) / e).abs());
        }
    }
    (worst <= 1e-10)
        .then(|| format!("5000 points, max rel dev {worst:.2e}"))
        .ok_or(format!("max rel dev {worst:.2e}"))
}

/// Fixed-width pass/fail table.
pub fn render(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "{}  {:width$}  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    s
}
