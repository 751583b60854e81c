use magnocool_core::cooling::cooling_report;
use magnocool_core::presets;
use magnocool_core::sweep_opt::{
    evaluate_point, reproduce_figure, run_sweep, FigureId, Provenance, Scale, SweepKey, SweepSpec,
    SweepValues,
};
use magnocool_core::Mechanism;

/// (manifest entry, caption value) pairs that every bundle must carry verbatim.
const CAPTION_TABLE: &[(FigureId, &str, f64)] = &[
    (FigureId::Fig2, "cmi.omega_c_hz", 50e3),
    (FigureId::Fig2, "cmi.gamma_a", 8.0 / 3.0),
    (FigureId::Fig2, "cmi.gamma_m", 2.0),
    (FigureId::Fig2, "cmi.n_m", 0.31),
    (FigureId::Fig2, "cmi.j_ac", 0.09),
    (FigureId::Fig2, "cmi.j_mc", 0.05),
    (FigureId::Fig2, "cmi.j_am", 0.03),
    (FigureId::Fig2, "cmi.gamma_c", 1e-7),
    (FigureId::Fig2, "cmi.r_s", 2.0),
    (FigureId::Fig2, "cmi.phi_s_deg", 94.0),
    (FigureId::Fig2, "cmi.eps_re", 0.575),
    (FigureId::Fig2, "cmi.eps_im", -0.142),
    (FigureId::Fig2, "mcm.j_mc", 0.05),
    (FigureId::Fig2, "mcm.gamma_m", 2.0),
    (FigureId::Fig4a, "cmi_q1e11.j_ac", 0.3),
    (FigureId::Fig4a, "cmi_q1e11.j_mc", 0.025),
    (FigureId::Fig4a, "mcm_q5e7.j_mc", 0.025),
    (FigureId::Fig4a, "cmi_q5e7.gamma_c", 1.0 / 5e7),
    (FigureId::Fig4a, "cmi_q1e11.gamma_c", 1e-11),
    (FigureId::Fig4b, "cmi_r1.6.r_s", 1.6),
    (FigureId::Fig4b, "cmi_r2.0.r_s", 2.0),
    (FigureId::Fig4b, "cmi_r2.6.r_s", 2.6),
    (FigureId::Fig4b, "cmi_r2.0.j_ac", 0.09),
    (FigureId::Fig4b, "cmi_r2.0.j_mc", 0.05),
    (FigureId::Fig4b, "cmi_r2.0.j_am", 0.03),
    (FigureId::Fig5a, "base.j_mc", 0.09),
    (FigureId::Fig5a, "base.j_am", 0.05),
    (FigureId::Fig5a, "base.r_s", 2.6),
    (FigureId::Fig5a, "curve0.j_ac", 0.01),
    (FigureId::Fig5a, "curve4.j_ac", 0.2),
    (FigureId::Fig5b, "base.j_ac", 0.2),
    (FigureId::Fig5b, "base.j_am", 0.05),
    (FigureId::Fig5c, "base.j_ac", 0.2),
    (FigureId::Fig5c, "base.j_mc", 0.09),
    (FigureId::Fig6a, "cmi.j_ac", 0.09),
    (FigureId::Fig6a, "cmi.j_am", 0.03),
    (FigureId::Fig6a, "cmi.gamma_c", 1e-5),
    (FigureId::Fig6a, "cmi.r_s", 2.6),
    (FigureId::Fig6b, "cmi.j_ac", 0.09),
    (FigureId::Fig6b, "cmi.j_mc", 0.05),
    (FigureId::Fig6c, "cmi.j_mc", 0.05),
    (FigureId::Fig6c, "cmi.j_am", 0.03),
    (FigureId::Fig6c, "cmi.gamma_c", 1e-5),
];

#[test]
fn manifests_carry_caption_values() {
    let mut ids: Vec<FigureId> = CAPTION_TABLE.iter().map(|e| e.0).collect();
    ids.dedup();
    for id in ids {
        let bundle = reproduce_figure(id).unwrap();
        for (_, name, expected) in CAPTION_TABLE.iter().filter(|e| e.0 == id) {
            let entry = bundle
                .manifest
                .presets
                .iter()
                .find(|e| e.name == *name)
                .unwrap_or_else(|| panic!("{id:?}: no manifest entry {name}"));
            assert!(
                (entry.value - expected).abs() <= 1e-12 * expected.abs(),
                "{id:?} {name}: {} vs caption {expected}",
                entry.value
            );
            assert_eq!(entry.provenance, Provenance::Stated, "{id:?} {name}");
        }
        assert!(bundle
            .manifest
            .presets
            .iter()
            .filter(|e| e.name.ends_with(".n_c_bath"))
            .all(|e| e.provenance == Provenance::Derived && e.value == presets::CM_BATH_OCCUPANCY));
        for name in &bundle.manifest.datasets {
            assert!(bundle.dataset(name).is_some(), "{id:?}: {name} listed but missing");
        }
    }
}

#[test]
fn sweeps_are_deterministic_and_match_point_evaluation() {
    let spec = SweepSpec::new(
        SweepKey::Delta,
        SweepValues::range(-3.0, 3.0, 41, Scale::Linear),
        presets::fig2_cmi(),
    );
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a, b);
    for row in &a.rows {
        assert_eq!(row, &evaluate_point(&spec, row.value).unwrap());
        let report = cooling_report(&SweepKey::Delta.apply(&spec.base, row.value)).unwrap();
        assert_eq!(row.gamma_net, Some(report.gamma_net));
        assert_eq!(row.n_c, report.n_c);
    }
}

#[test]
fn single_value_sweep_reproduces_point_report() {
    let base = presets::fig2_mcm();
    let spec = SweepSpec::new(SweepKey::GammaM, SweepValues::List(vec![base.gamma_m]), base);
    let row = &run_sweep(&spec).unwrap().rows[0];
    let report = cooling_report(&base).unwrap();
    assert_eq!(row.gamma_minus, Some(report.gamma_minus));
    assert_eq!(row.gamma_plus, Some(report.gamma_plus));
    assert_eq!(row.n_c, report.n_c);
}

#[test]
fn mcm_detuning_sweep_peaks_on_red_sideband() {
    let spec = SweepSpec::new(
        SweepKey::Delta,
        SweepValues::range(-3.0, 3.0, 601, Scale::Linear),
        presets::fig2_mcm(),
    );
    let t = run_sweep(&spec).unwrap();
    let net: Vec<(f64, f64)> = t.rows.iter().map(|r| (r.value, r.gamma_net.unwrap())).collect();
    let max = net.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let min = net.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((max.0 - 1.0).abs() < 0.2, "max at {}", max.0);
    assert!((min.0 + 1.0).abs() < 0.2, "min at {}", min.0);
    assert!(min.1 < 0.0);
}

#[test]
fn mcm_magnon_decay_sweep_minimum() {
    let base = presets::fig2_mcm().with_q_c(1e7);
    let spec = SweepSpec::new(
        SweepKey::GammaM,
        SweepValues::range(0.01, 10.0, 201, Scale::Log),
        base,
    );
    let t = run_sweep(&spec).unwrap();
    let (at, min) = t
        .rows
        .iter()
        .map(|r| (r.value, r.n_c.unwrap()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(at, 0.01);
    assert!((min - 0.019).abs() < 0.0005, "{min}");
    assert_eq!(base.mechanism, Mechanism::Mcm);
}
