//! One-parameter sweeps, figure datasets and interference optimization.

mod figures;
mod optimize;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cooling::{qc_threshold, rates, steady_occupancy, DEFAULT_LOG10_BRACKET};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::spectra::{frequency_grid, psd_on, SpectrumResult, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN};

pub use figures::{
    reproduce_figure, reproduce_figure_with, Dataset, FigureBundle, FigureId, Manifest,
    ManifestEntry, Provenance,
};
pub use optimize::{
    nelder_mead, optimize_interference, FreeParam, NelderMeadResult, Objective,
    OptimizationResult, TracePoint,
};

/// Parameter a sweep varies. `Delta` sets Δ_a = Δ_m together, `QC` sets
/// γ_c = 1/Q_c, and `PhiS` takes degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKey {
    DeltaA,
    DeltaM,
    Delta,
    GammaA,
    GammaM,
    GammaC,
    QC,
    NM,
    NC,
    JAc,
    JMc,
    JAm,
    EpsRe,
    EpsIm,
    RS,
    PhiS,
}

impl SweepKey {
    pub const ALL: [SweepKey; 16] = [
        SweepKey::DeltaA,
        SweepKey::DeltaM,
        SweepKey::Delta,
        SweepKey::GammaA,
        SweepKey::GammaM,
        SweepKey::GammaC,
        SweepKey::QC,
        SweepKey::NM,
        SweepKey::NC,
        SweepKey::JAc,
        SweepKey::JMc,
        SweepKey::JAm,
        SweepKey::EpsRe,
        SweepKey::EpsIm,
        SweepKey::RS,
        SweepKey::PhiS,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepKey::DeltaA => "delta_a",
            SweepKey::DeltaM => "delta_m",
            SweepKey::Delta => "delta",
            SweepKey::GammaA => "gamma_a",
            SweepKey::GammaM => "gamma_m",
            SweepKey::GammaC => "gamma_c",
            SweepKey::QC => "q_c",
            SweepKey::NM => "n_m",
            SweepKey::NC => "n_c",
            SweepKey::JAc => "j_ac",
            SweepKey::JMc => "j_mc",
            SweepKey::JAm => "j_am",
            SweepKey::EpsRe => "eps_re",
            SweepKey::EpsIm => "eps_im",
            SweepKey::RS => "r_s",
            SweepKey::PhiS => "phi_s",
        }
    }

    /// Copy of `base` with this key set to `value`.
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            SweepKey::DeltaA => p.delta_a = value,
            SweepKey::DeltaM => p.delta_m = value,
            SweepKey::Delta => {
                p.delta_a = value;
                p.delta_m = value;
            }
            SweepKey::GammaA => p.gamma_a = value,
            SweepKey::GammaM => p.gamma_m = value,
            SweepKey::GammaC => p.gamma_c = value,
            SweepKey::QC => p.gamma_c = 1.0 / value,
            SweepKey::NM => p.n_m = value,
            SweepKey::NC => p.n_c = value,
            SweepKey::JAc => p.j_ac = value,
            SweepKey::JMc => p.j_mc = value,
            SweepKey::JAm => p.j_am = value,
            SweepKey::EpsRe => p.eps_a.re = value,
            SweepKey::EpsIm => p.eps_a.im = value,
            SweepKey::RS => p.r_s = value,
            SweepKey::PhiS => p.phi_s = value.to_radians(),
        }
        p
    }
}

impl FromStr for SweepKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepKey::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep key `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        n: usize,
        #[serde(default)]
        scale: Scale,
    },
}

impl SweepValues {
    pub fn range(min: f64, max: f64, n: usize, scale: Scale) -> Self {
        SweepValues::Range { min, max, n, scale }
    }

    /// Expanded, validated values (non-empty and increasing).
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { min, max, n, scale } => {
                if *n == 1 {
                    if min != max {
                        return Err(Error::Config("a one-point range needs min == max".to_string()));
                    }
                    alloc::vec![*min]
                } else {
                    match scale {
                        Scale::Linear => frequency_grid(*min, *max, *n)?,
                        Scale::Log => {
                            if !(*min > 0.0) {
                                return Err(Error::domain("min", *min, "log range needs min > 0"));
                            }
                            frequency_grid(libm::log10(*min), libm::log10(*max), *n)?
                                .into_iter()
                                .enumerate()
                                .map(|(i, e)| {
                                    if i == 0 {
                                        *min
                                    } else if i == *n - 1 {
                                        *max
                                    } else {
                                        libm::pow(10.0, e)
                                    }
                                })
                                .collect()
                        }
                    }
                }
            }
        };
        if v.is_empty() {
            return Err(Error::Config("sweep has no values".to_string()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("sweep values must be finite".to_string()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".to_string()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Spectrum,
    GammaMinus,
    GammaPlus,
    GammaNet,
    Occupancy,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub key: SweepKey,
    pub values: SweepValues,
    pub base: SystemParams,
    pub observables: Vec<Observable>,
    /// (ω_min, ω_max, n) for the spectrum observable.
    pub spectrum_grid: (f64, f64, usize),
    pub threshold_bracket: (f64, f64),
}

impl SweepSpec {
    pub fn new(key: SweepKey, values: SweepValues, base: SystemParams) -> Self {
        Self {
            key,
            values,
            base,
            observables: alloc::vec![
                Observable::GammaMinus,
                Observable::GammaPlus,
                Observable::GammaNet,
                Observable::Occupancy,
            ],
            spectrum_grid: (DEFAULT_GRID_SPAN.0, DEFAULT_GRID_SPAN.1, DEFAULT_GRID_POINTS),
            threshold_bracket: DEFAULT_LOG10_BRACKET,
        }
    }

    pub fn with_observables(mut self, observables: &[Observable]) -> Self {
        self.observables = observables.to_vec();
        self
    }

    fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }
}

/// One evaluated sweep point. Rates are present whenever the point is
/// stable; `n_c` and `threshold` may still be absent (runaway heating, no
/// ground-state crossing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub stable: bool,
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_net: Option<f64>,
    pub n_c: Option<f64>,
    pub threshold: Option<f64>,
    pub spectrum: Option<SpectrumResult>,
    /// Why the point has no observables, or why an observable is missing.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub key: SweepKey,
    pub rows: Vec<SweepRow>,
}

fn unstable_row(value: f64, e: &Error) -> SweepRow {
    SweepRow {
        value,
        stable: false,
        gamma_minus: None,
        gamma_plus: None,
        gamma_net: None,
        n_c: None,
        threshold: None,
        spectrum: None,
        note: Some(e.to_string()),
    }
}

/// Evaluates one sweep value. Instability is recorded in the row; other
/// failures (invalid parameters) are errors.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let p = spec.key.apply(&spec.base, value);
    let (gm, gp) = match rates(&p) {
        Ok(r) => r,
        Err(e @ (Error::Unstable { .. } | Error::ParametricThreshold { .. })) => {
            return Ok(unstable_row(value, &e))
        }
        Err(e) => return Err(e),
    };
    let mut note = None;
    let n_c = if spec.wants(Observable::Occupancy) {
        match steady_occupancy(&p, gm, gp) {
            Ok(n) => Some(n),
            Err(e @ Error::Runaway { .. }) => {
                note = Some(e.to_string());
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let threshold = if spec.wants(Observable::Threshold) {
        match qc_threshold(&p, spec.threshold_bracket) {
            Ok(t) => Some(t.q_threshold),
            Err(e @ (Error::Runaway { .. } | Error::Bracket { .. })) => {
                note.get_or_insert_with(|| e.to_string());
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let spectrum = if spec.wants(Observable::Spectrum) {
        let (lo, hi, n) = spec.spectrum_grid;
        Some(psd_on(&p, frequency_grid(lo, hi, n)?)?)
    } else {
        None
    };
    let pick = |o: Observable, v: f64| spec.wants(o).then_some(v);
    Ok(SweepRow {
        value,
        stable: true,
        gamma_minus: pick(Observable::GammaMinus, gm),
        gamma_plus: pick(Observable::GammaPlus, gp),
        gamma_net: pick(Observable::GammaNet, gm - gp),
        n_c,
        threshold,
        spectrum,
        note,
    })
}

/// Sequential sweep in value order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let rows = spec
        .values
        .values()?
        .into_iter()
        .map(|v| evaluate_point(spec, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { key: spec.key, rows })
}

/// Executes sweeps and spectrum grids; the std crate supplies a parallel
/// implementation with identical output.
pub trait Runner {
    fn sweep(&self, spec: &SweepSpec) -> Result<SweepTable>;

    fn spectrum(&self, params: &SystemParams, frequencies: Vec<f64>) -> Result<SpectrumResult> {
        psd_on(params, frequencies)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn sweep(&self, spec: &SweepSpec) -> Result<SweepTable> {
        run_sweep(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::cooling_report;
    use crate::model::Mechanism;
    use crate::presets;

    #[test]
    fn keys_round_trip() {
        for k in SweepKey::ALL {
            assert_eq!(k.as_str().parse::<SweepKey>().unwrap(), k);
        }
        assert!(matches!("nope".parse::<SweepKey>(), Err(Error::Config(_))));
    }

    #[test]
    fn value_expansion() {
        let v = SweepValues::range(0.01, 10.0, 4, Scale::Log).values().unwrap();
        assert_eq!(v[0], 0.01);
        assert_eq!(v[3], 10.0);
        assert!((v[1] - 0.1).abs() < 1e-15 && (v[2] - 1.0).abs() < 1e-14);
        assert!(SweepValues::List(alloc::vec![]).values().is_err());
        assert!(SweepValues::List(alloc::vec![2.0, 1.0]).values().is_err());
        assert!(SweepValues::range(0.0, 1.0, 3, Scale::Log).values().is_err());
        assert_eq!(SweepValues::range(2.0, 2.0, 1, Scale::Linear).values().unwrap(), [2.0]);
    }

    #[test]
    fn single_value_sweep_matches_point_evaluation() {
        let base = presets::fig2_cmi();
        let spec = SweepSpec::new(SweepKey::JAc, SweepValues::List(alloc::vec![base.j_ac]), base);
        let row = &run_sweep(&spec).unwrap().rows[0];
        let r = cooling_report(&base).unwrap();
        assert_eq!(row.gamma_minus, Some(r.gamma_minus));
        assert_eq!(row.gamma_plus, Some(r.gamma_plus));
        assert_eq!(row.gamma_net, Some(r.gamma_net));
        assert_eq!(row.n_c, r.n_c);
    }

    #[test]
    fn mcm_detuning_sweep_extremes() {
        let spec = SweepSpec::new(
            SweepKey::Delta,
            SweepValues::range(-3.0, 3.0, 601, Scale::Linear),
            presets::fig2_mcm(),
        );
        let t = run_sweep(&spec).unwrap();
        let net = |r: &SweepRow| r.gamma_net.unwrap();
        let max = t.rows.iter().max_by(|a, b| net(a).total_cmp(&net(b))).unwrap();
        let min = t.rows.iter().min_by(|a, b| net(a).total_cmp(&net(b))).unwrap();
        assert!((max.value - 1.0).abs() < 0.2, "{}", max.value);
        assert!((min.value + 1.0).abs() < 0.2 && net(min) < 0.0);
    }

    #[test]
    fn unstable_points_are_flagged() {
        // below γ_a ≈ 1.26 the intracavity squeezing exceeds threshold
        let spec = SweepSpec::new(
            SweepKey::GammaA,
            SweepValues::List(alloc::vec![0.5, 8.0 / 3.0]),
            presets::fig2_cmi(),
        );
        let t = run_sweep(&spec).unwrap();
        assert!(!t.rows[0].stable && t.rows[0].gamma_net.is_none());
        assert!(t.rows[1].stable && t.rows[1].n_c.is_some());
    }

    #[test]
    fn spectrum_and_threshold_observables() {
        let spec = SweepSpec::new(
            SweepKey::JMc,
            SweepValues::List(alloc::vec![0.05]),
            presets::fig2_mcm(),
        )
        .with_observables(&[Observable::Spectrum, Observable::Threshold]);
        let row = &run_sweep(&spec).unwrap().rows[0];
        assert_eq!(row.spectrum.as_ref().unwrap().values.len(), DEFAULT_GRID_POINTS);
        let q = row.threshold.unwrap();
        assert!((q / 6.2e7 - 1.0).abs() < 0.01, "{q}");
        assert!(row.gamma_minus.is_none());
        assert_eq!(row.spectrum.as_ref().unwrap().mechanism, Mechanism::Mcm);
    }
}
