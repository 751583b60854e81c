//! Acceptance criteria 1–9. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, in order, even when all
//! pass; the process exits non-zero if any fails.

use std::time::Instant;

use magnocool::output;
use magnocool::parallel::Parallel;
use magnocool_core::cooling::{
    bath_occupancy_for, cooling_report, crossing_time, lyapunov_steady, occupancy_from, qc_threshold, rates,
    steady_occupancy, DEFAULT_LOG10_BRACKET,
};
use magnocool_core::presets::{self, CM_BATH_OCCUPANCY};
use magnocool_core::spectra::{mcm_rates, psd_general, psd_on, frequency_grid};
use magnocool_core::sweep_opt::{
    reproduce_figure, reproduce_figure_with, run_sweep, Dataset, FigureBundle, FigureId, Runner, Scale, SweepKey,
    SweepSpec, SweepValues,
};
use magnocool_core::{Mechanism, SystemParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let p = presets::fig2_mcm();
    let (gm, gp) = mcm_rates(&p, 1.0);
    let r = cooling_report(&p).map_err(|e| e.to_string())?;
    let ok = rel(gm, 0.005) <= 1e-12 && rel(gp, 0.001) <= 1e-12 && rel(r.gamma_net, 0.004) <= 1e-12;
    verdict(ok, format!("Gamma- = {gm:e}, Gamma+ = {gp:e}, Gamma_net = {:e} (tol 1e-12 rel)", r.gamma_net))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
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
            let s = psd_general(&p, w).map_err(|e| e.to_string())?;
            worst = worst.max(rel(s, mcm_rates(&p, w).0));
        }
    }
    verdict(worst <= 1e-10, format!("5000 points, max rel dev {worst:.2e} (tol 1e-10)"))
}

fn criterion_3() -> Outcome {
    let cmi = presets::fig2_cmi();
    let up = psd_general(&cmi, 1.0).map_err(|e| e.to_string())?;
    let down = psd_general(&cmi, -1.0).map_err(|e| e.to_string())?;
    let net_cmi = cooling_report(&cmi).map_err(|e| e.to_string())?.gamma_net;
    let net_mcm = cooling_report(&presets::fig2_mcm()).map_err(|e| e.to_string())?.gamma_net;
    let primary = (0.61..=0.82).contains(&up) && down <= 0.006 && (0.60..=0.82).contains(&net_cmi);
    let dip = down < up / 100.0;
    let enhancement = net_cmi / net_mcm;
    let fallback = dip && enhancement > 100.0;
    let detail = format!(
        "S_F(+wc) = {up:.4e} [0.61, 0.82], S_F(-wc) = {down:.4e} (<= 0.006), Gamma_net = {net_cmi:.4e} [0.60, 0.82]; \
         fallback: dip S-/S+ = {:.3e} (< 0.01), enhancement = {enhancement:.3} (> 100)",
        down / up
    );
    verdict(primary || fallback, detail)
}

fn criterion_4() -> Outcome {
    let gamma_c = 1e-7;
    let n_bath = CM_BATH_OCCUPANCY;
    let occ = |gm, gp| occupancy_from(gamma_c, n_bath, gm, gp).map_err(|e| e.to_string());
    let n_mcm = occ(0.005, 0.001)?;
    // CMI clause is conditional on the spectra criterion holding at its
    // centre values; the engine's own value is reported alongside.
    let n_cmi = occ(0.714, 0.003)?;
    let p = presets::fig2_cmi();
    let (gm, gp) = rates(&p).map_err(|e| e.to_string())?;
    let n_engine = steady_occupancy(&p, gm, gp).map_err(|e| e.to_string())?;
    let ok = (n_mcm - 4.93).abs() <= 0.05 && (n_cmi - 0.030).abs() <= 0.006;
    verdict(
        ok,
        format!(
            "n_bath = {n_bath:e}, gamma_c = {gamma_c:e}: n_c(MCM) = {n_mcm:.4} (4.93 +- 0.05), \
             n_c(CMI @ 0.714/0.003) = {n_cmi:.4} (0.030 +- 0.006); engine CMI n_c = {n_engine:.4}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let p = presets::fig2_cmi().with_q_c(1e7);
    let (gm, gp) = rates(&p).map_err(|e| e.to_string())?;
    let rate_n = steady_occupancy(&p, gm, gp).map_err(|e| e.to_string())?;
    let l = lyapunov_steady(&p).map_err(|e| e.to_string())?;
    let dev = rel(l.n_c, rate_n);
    verdict(
        dev <= 0.15 && l.physical,
        format!(
            "Lyapunov n_c = {:.6}, rate formula = {rate_n:.6}, rel dev {dev:.2e} (<= 0.15), physicality margin {:.3e}",
            l.n_c, l.physicality_margin
        ),
    )
}

fn criterion_6() -> Outcome {
    // A bracket failure at the top of the range means n_c stays above one
    // even as Q_c -> infinity; that is reported as "unreachable".
    let thr = |p: SystemParams| -> Result<Option<f64>, String> {
        match qc_threshold(&p, DEFAULT_LOG10_BRACKET) {
            Ok(r) => Ok(Some(r.q_threshold)),
            Err(magnocool_core::Error::Bracket { n_high, .. }) if n_high >= 1.0 => Ok(None),
            Err(e) => Err(e.to_string()),
        }
    };
    let t16 = thr(presets::fig4b(Mechanism::Cmi, 1.6))?;
    let t20 = thr(presets::fig4b(Mechanism::Cmi, 2.0))?;
    let t26 = thr(presets::fig4b(Mechanism::Cmi, 2.6))?;
    let tm = thr(presets::fig2_mcm())?;
    let order = matches!((t26, t20, t16), (Some(a), Some(b), Some(c)) if a < b && b < c);
    let c20 = t20.is_some_and(|t| within_factor(t, 2.5e5, 3.0));
    let c16 = t16.is_some_and(|t| within_factor(t, 3.6e5, 3.0));
    let cm = tm.is_some_and(|t| within_factor(t, 1e7, 3.0));
    let show = |t: Option<f64>| t.map_or("unreachable".to_string(), |t| format!("{t:.3e}"));
    verdict(
        order && c20 && c16 && cm,
        format!(
            "Q_th(r=2.6) = {}, Q_th(r=2.0) = {} [{}], Q_th(r=1.6) = {} [{}], ordering [{}], \
             MCM Q_th = {} [{}] (targets 2.5e5, 3.6e5, 1e7 within x3)",
            show(t26),
            show(t20),
            ok_str(c20),
            show(t16),
            ok_str(c16),
            ok_str(order),
            show(tm),
            ok_str(cm)
        ),
    )
}

fn ok_str(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out"
    }
}

fn criterion_7() -> Outcome {
    let cross = |p: SystemParams| {
        crossing_time(&p, p.n_c, 1.0)
            .map(|t| t.map(|t| p.to_seconds(t)))
            .map_err(|e| e.to_string())
    };
    let cmi = cross(presets::fig4a(Mechanism::Cmi, 1e11))?;
    let mcm = cross(presets::fig4a(Mechanism::Mcm, 1e11))?;
    let mcm_low_q = cross(presets::fig4a(Mechanism::Mcm, 5e7))?;
    let c_ok = cmi.is_some_and(|t| (3e-4..=3e-3).contains(&t));
    let m_ok = mcm.is_some_and(|t| (3e-2..=3e-1).contains(&t));
    let never = mcm_low_q.is_none();
    let show = |t: Option<f64>| t.map_or("never".to_string(), |t| format!("{t:.3e} s"));
    verdict(
        c_ok && m_ok && never,
        format!(
            "CMI crossing {} [3e-4, 3e-3], MCM (Q=1e11) {} [3e-2, 3e-1], MCM (Q=5e7) {} (never)",
            show(cmi),
            show(mcm),
            show(mcm_low_q)
        ),
    )
}

fn column(d: &Dataset, name: &str) -> Vec<f64> {
    d.column(name).unwrap_or_else(|| panic!("{} has no column {name}", d.name))
}

fn criterion_8(fig3: &FigureBundle) -> Outcome {
    let a = fig3.dataset("fig3a_cmi_vs_gamma_a").ok_or("missing fig3a dataset")?;
    let (ga, na, stable) = (column(a, "gamma_a"), column(a, "n_c"), column(a, "stable"));
    let mut min_in = f64::INFINITY;
    let mut arg = f64::NAN;
    let mut max_all: f64 = 0.0;
    let mut failing = 0;
    for i in 0..ga.len() {
        let usable = stable[i] == 1.0 && na[i].is_finite();
        if (1.0..=3.0).contains(&ga[i]) && usable && na[i] < min_in {
            min_in = na[i];
            arg = ga[i];
        }
        // An unstable or heating point has no steady occupancy below one.
        if !usable || na[i] >= 1.0 {
            failing += 1;
        } else {
            max_all = max_all.max(na[i]);
        }
    }
    let a_min = min_in <= 0.05;
    let a_all = failing == 0;

    let b = fig3.dataset("fig3b_mcm_vs_gamma_m").ok_or("missing fig3b dataset")?;
    let (gm, nb) = (column(b, "gamma_m"), column(b, "n_c"));
    let mut crossings = Vec::new();
    for i in 1..gm.len() {
        let (n0, n1) = (nb[i - 1], nb[i]);
        if n0.is_finite() && n1.is_finite() && (n0 - 1.0) * (n1 - 1.0) <= 0.0 && n0 != n1 {
            let f = (1.0 - n0) / (n1 - n0);
            let (l0, l1) = (gm[i - 1].ln(), gm[i].ln());
            crossings.push((l0 + f * (l1 - l0)).exp());
        }
    }
    let b_ok = !crossings.is_empty() && crossings.iter().all(|c| (0.5..=2.0).contains(c));
    verdict(
        a_min && a_all && b_ok,
        format!(
            "fig3a min n_c on gamma_a in [1,3] = {min_in:.4e} at {arg:.4} (<= 0.05) [{}]; points in [0.1,10] \
             without n_c < 1: {failing}/{} [{}]; fig3b MCM n_c = 1 crossings at {crossings:.4?} ([0.5, 2]) [{}]",
            ok_str(a_min),
            ga.len(),
            ok_str(a_all),
            ok_str(b_ok)
        ),
    )
}

fn criterion_9(par: &Parallel) -> Outcome {
    let err = |e: magnocool_core::Error| e.to_string();
    // Every spectrum the tool emits: point presets on the default grid plus
    // the figure bundle spectra.
    let grid = frequency_grid(-3.0, 3.0, 2001).map_err(err)?;
    let mut worst = f64::INFINITY;
    let mut grids = 0;
    for p in [
        presets::fig2_cmi(),
        presets::fig2_mcm(),
        presets::fig2_blue(Mechanism::Cmi),
        presets::fig2_blue(Mechanism::Mcm),
        presets::fig4a(Mechanism::Cmi, 1e11),
        presets::fig5(),
        presets::fig6(Mechanism::Cmi),
    ] {
        worst = worst.min(psd_on(&p, grid.clone()).map_err(err)?.min_relative());
        grids += 1;
    }
    let fig2 = reproduce_figure(FigureId::Fig2).map_err(err)?;
    for d in fig2.datasets.iter().filter(|d| d.columns.iter().any(|c| c == "S_F")) {
        let s = column(d, "S_F");
        let max = s.iter().cloned().fold(0.0, f64::max);
        worst = worst.min(s.iter().cloned().fold(f64::INFINITY, f64::min) / max);
        grids += 1;
    }
    let nonneg = worst >= -1e-12;

    let mut flip = true;
    for m in [Mechanism::Mcm, Mechanism::Cmi] {
        let red = cooling_report(&SystemParams { mechanism: m, ..presets::fig2_cmi() }).map_err(err)?;
        let blue = cooling_report(&presets::fig2_blue(m)).map_err(err)?;
        flip &= red.gamma_net > 0.0 && blue.gamma_net < 0.0;
    }

    let mut round = 0.0f64;
    for p in [presets::fig2_mcm(), presets::fig2_cmi(), presets::fig4a(Mechanism::Mcm, 1e11)] {
        let (gm, gp) = rates(&p).map_err(err)?;
        let n = steady_occupancy(&p, gm, gp).map_err(err)?;
        let back = occupancy_from(p.gamma_c, bath_occupancy_for(p.gamma_c, n, gm, gp), gm, gp).map_err(err)?;
        round = round.max(rel(back, n));
    }
    let inv = round <= 1e-12;

    let spec = SweepSpec::new(SweepKey::GammaA, SweepValues::range(0.1, 10.0, 101, Scale::Log), presets::fig2_cmi().with_q_c(1e7));
    let a = output::sweep_csvs(&par.sweep(&spec).map_err(err)?).map_err(|e| e.to_string())?;
    let b = output::sweep_csvs(&par.sweep(&spec).map_err(err)?).map_err(|e| e.to_string())?;
    let c = output::sweep_csvs(&run_sweep(&spec).map_err(err)?).map_err(|e| e.to_string())?;
    let bundle_bytes = |f: &FigureBundle| {
        f.datasets
            .iter()
            .map(|d| output::dataset_csv(d).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
    };
    let f1 = bundle_bytes(&reproduce_figure_with(FigureId::Fig4b, par).map_err(err)?)?;
    let f2 = bundle_bytes(&reproduce_figure_with(FigureId::Fig4b, par).map_err(err)?)?;
    let det = a == b && a == c && f1 == f2;

    verdict(
        nonneg && flip && inv && det,
        format!(
            "PSD min S/max S over {grids} grids = {worst:.3e} (>= -1e-12) [{}]; red/blue sign flip [{}]; \
             inversion round trip {round:.2e} (<= 1e-12) [{}]; sweep/bundle CSVs identical across runs [{}]",
            ok_str(nonneg),
            ok_str(flip),
            ok_str(inv),
            ok_str(det)
        ),
    )
}

fn main() {
    let par = Parallel::new(None).expect("thread pool");
    let fig3 = reproduce_figure_with(FigureId::Fig3, &par);
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(|| criterion_8(fig3.as_ref().map_err(|e| e.to_string())?))),
        (9, Box::new(|| criterion_9(&par))),
    ];
    let mut failed = Vec::new();
    for (n, run) in &criteria {
        let start = Instant::now();
        let out = run();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match out {
            Ok(d) => println!("PASS criterion {n}: {d} ({ms:.0} ms)"),
            Err(d) => {
                println!("FAIL criterion {n}: {d} ({ms:.0} ms)");
                failed.push(*n);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        criteria.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
