use magnocool_core::cooling::{
    bath_occupancy_for, lyapunov_steady, occupancy_from, rates, steady_occupancy,
};
use magnocool_core::presets;
use magnocool_core::spectra::{frequency_grid, mcm_rates, psd_general, psd_on, PsdEngine};
use magnocool_core::{Mechanism, SystemParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_channel_draw(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        delta_a: rng.gen_range(-3.0..3.0),
        delta_m: rng.gen_range(-3.0..3.0),
        gamma_a: rng.gen_range(0.1..5.0),
        gamma_m: rng.gen_range(0.01..5.0),
        gamma_c: 10f64.powf(rng.gen_range(-9.0..-3.0)),
        n_m: 0.0,
        j_ac: 0.0,
        j_mc: rng.gen_range(1e-3..0.5),
        j_am: 0.0,
        eps_a: Complex64::new(0.0, 0.0),
        r_s: 0.0,
        phi_s: rng.gen_range(0.0..std::f64::consts::TAU),
        mechanism: Mechanism::Cmi,
        ..presets::fig2_cmi()
    }
}

#[test]
fn engine_reduces_to_lorentzian_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = single_channel_draw(&mut rng);
        for _ in 0..50 {
            let w = rng.gen_range(-4.0..4.0);
            let s = psd_general(&p, w).unwrap();
            let e = mcm_rates(&p, w).0;
            worst = worst.max((s - e).abs() / e);
        }
    }
    assert!(worst <= 1e-10, "worst relative deviation {worst:e}");
}

#[test]
fn thermal_magnons_add_the_mirrored_lorentzian() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let n_m = rng.gen_range(0.0..5.0);
        let p = SystemParams {
            n_m,
            ..single_channel_draw(&mut rng)
        };
        for w in [-1.3, -1.0, 0.2, 1.0, 2.5] {
            let (down, up) = mcm_rates(&p, w);
            let e = (n_m + 1.0) * down + n_m * up;
            let s = psd_general(&p, w).unwrap();
            assert!((s - e).abs() <= 1e-10 * e, "{w}: {s} vs {e}");
        }
    }
}

#[test]
fn squeezing_off_matches_engine_without_anomalous_terms() {
    let p = SystemParams {
        r_s: 0.0,
        ..presets::fig2_cmi()
    };
    let full = PsdEngine::new(&p).unwrap();
    let plain = PsdEngine::new(&p).unwrap().without_anomalous();
    for w in frequency_grid(-3.0, 3.0, 61).unwrap() {
        let a = full.psd(w).unwrap();
        let b = plain.psd(w).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{w}: {a} vs {b}");
    }
}

#[test]
fn spectrum_is_quadratic_in_cm_couplings() {
    let p = SystemParams {
        eps_a: Complex64::new(0.0, 0.0),
        r_s: 0.0,
        ..presets::fig2_cmi()
    };
    let scaled = SystemParams {
        j_ac: 3.0 * p.j_ac,
        j_mc: 3.0 * p.j_mc,
        ..p
    };
    for w in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let a = psd_general(&p, w).unwrap();
        let b = psd_general(&scaled, w).unwrap();
        assert!((b - 9.0 * a).abs() <= 1e-10 * b, "{w}: {b} vs 9 x {a}");
    }
}

#[test]
fn occupancy_inversion_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let gamma_c = 10f64.powf(rng.gen_range(-9.0..-2.0));
        let gp = rng.gen_range(0.0..0.01);
        let gm = gp + rng.gen_range(1e-4..1.0);
        let n = rng.gen_range(1e-3..1e3);
        let bath = bath_occupancy_for(gamma_c, n, gm, gp);
        if bath < 0.0 {
            continue;
        }
        let back = occupancy_from(gamma_c, bath, gm, gp).unwrap();
        assert!((back - n).abs() <= 1e-12 * n, "{n} -> {bath} -> {back}");
    }
}

#[test]
fn occupancy_falls_with_quality_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let p = single_channel_draw(&mut rng);
        let p = SystemParams {
            delta_m: rng.gen_range(0.2..3.0),
            n_c: rng.gen_range(1e2..1e6),
            mechanism: Mechanism::Mcm,
            ..p
        };
        let (gm, gp) = rates(&p).unwrap();
        let mut last = f64::INFINITY;
        for q in [1e4, 1e5, 1e6, 1e7, 1e8, 1e9] {
            let n = steady_occupancy(&p.with_q_c(q), gm, gp).unwrap();
            assert!(n < last, "Q = {q}: {n} !< {last}");
            last = n;
        }
    }
}

#[test]
fn lyapunov_matches_rate_formula_at_weak_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 20 {
        let base = presets::fig2_cmi();
        let p = SystemParams {
            j_ac: rng.gen_range(0.0..0.05),
            j_mc: rng.gen_range(0.005..0.05),
            j_am: rng.gen_range(0.0..0.05),
            r_s: rng.gen_range(0.0..1.0),
            n_c: rng.gen_range(10.0..1e3),
            eps_a: base.eps_a * rng.gen_range(0.0..1.0),
            ..base
        }
        .with_q_c(10f64.powf(rng.gen_range(3.0..5.0)));
        let (gm, gp) = rates(&p).unwrap();
        let Ok(rate_n) = steady_occupancy(&p, gm, gp) else {
            continue;
        };
        let lyap = lyapunov_steady(&p).unwrap();
        assert!(lyap.physical, "margin {}", lyap.physicality_margin);
        assert!(
            (lyap.n_c - rate_n).abs() <= 0.15 * rate_n,
            "{p:?}: lyapunov {} vs rate formula {rate_n}",
            lyap.n_c
        );
        checked += 1;
    }
}

#[test]
fn grid_refinement_leaves_sideband_values_unchanged() {
    let p = presets::fig2_cmi();
    let coarse = psd_on(&p, frequency_grid(-3.0, 3.0, 2001).unwrap()).unwrap();
    let fine = psd_on(&p, frequency_grid(-3.0, 3.0, 4001).unwrap()).unwrap();
    for w in [-1.0, 1.0] {
        let a = coarse.interpolate(w).unwrap();
        let b = fine.interpolate(w).unwrap();
        assert!((a - b).abs() < 1e-9, "{w}: {a} vs {b}");
    }
}
