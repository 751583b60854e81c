use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Observable, Runner, Scale, Sequential, SweepKey, SweepSpec, SweepTable, SweepValues};
use crate::cooling::{qc_threshold, RateEquation, DEFAULT_LOG10_BRACKET};
use crate::error::{Error, Result};
use crate::model::{Mechanism, SystemParams};
use crate::presets;
use crate::spectra::{frequency_grid, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig6a,
    Fig6b,
    Fig6c,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig5c,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig6c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::Fig6c => "fig6c",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}`")))
    }
}

/// Where a manifest value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Printed in the figure caption or accompanying text.
    Stated,
    /// Computed from stated values.
    Derived,
    /// Not given; picked here.
    Chosen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: FigureId,
    pub description: String,
    pub presets: Vec<ManifestEntry>,
    pub datasets: Vec<String>,
    /// Headline numbers extracted from the datasets; `None` when the
    /// quantity does not exist (e.g. no crossing).
    pub results: BTreeMap<String, Option<f64>>,
}

/// A numeric table; missing values are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureBundle {
    pub manifest: Manifest,
    pub datasets: Vec<Dataset>,
}

impl FigureBundle {
    pub fn dataset(&self, name: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.name == name)
    }
}

pub fn reproduce_figure(id: FigureId) -> Result<FigureBundle> {
    reproduce_figure_with(id, &Sequential)
}

/// Builds the datasets of one figure, delegating sweeps and spectra to
/// `runner`.
pub fn reproduce_figure_with(id: FigureId, runner: &dyn Runner) -> Result<FigureBundle> {
    let mut b = Builder::new(id, runner);
    match id {
        FigureId::Fig2 => b.fig2()?,
        FigureId::Fig3 => b.fig3()?,
        FigureId::Fig4a => b.fig4a()?,
        FigureId::Fig4b => b.fig4b()?,
        FigureId::Fig5a => b.fig5(SweepKey::JAc, &[0.01, 0.03, 0.06, 0.09, 0.2], Provenance::Stated)?,
        FigureId::Fig5b => b.fig5(SweepKey::JMc, &[0.01, 0.03, 0.05, 0.1], Provenance::Chosen)?,
        FigureId::Fig5c => b.fig5(SweepKey::JAm, &[0.01, 0.03, 0.05, 0.1], Provenance::Chosen)?,
        FigureId::Fig6a => b.fig6(SweepKey::JMc, SweepValues::range(1e-3, 10.0, 201, Scale::Log), true)?,
        FigureId::Fig6b => b.fig6(SweepKey::JAm, SweepValues::range(0.0, 0.1, 201, Scale::Linear), false)?,
        FigureId::Fig6c => b.fig6(SweepKey::JAc, SweepValues::range(0.01, 1.0, 201, Scale::Log), false)?,
    }
    Ok(b.finish())
}

const SWEEP_COLUMNS: [&str; 5] = ["stable", "gamma_minus", "gamma_plus", "gamma_net", "n_c"];

fn or_nan(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn sweep_dataset(name: String, table: &SweepTable, with_threshold: bool) -> Dataset {
    let mut columns = vec![table.key.as_str().to_string()];
    columns.extend(SWEEP_COLUMNS.iter().map(|c| c.to_string()));
    if with_threshold {
        columns.push("q_threshold".to_string());
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.value,
                if r.stable { 1.0 } else { 0.0 },
                or_nan(r.gamma_minus),
                or_nan(r.gamma_plus),
                or_nan(r.gamma_net),
                or_nan(r.n_c),
            ];
            if with_threshold {
                row.push(or_nan(r.threshold));
            }
            row
        })
        .collect();
    Dataset { name, columns, rows }
}

/// Smallest finite n_c of a sweep and where it occurs.
fn minimum(table: &SweepTable) -> Option<(f64, f64)> {
    table
        .rows
        .iter()
        .filter_map(|r| r.n_c.map(|n| (r.value, n)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Swept values where n_c crosses 1, interpolated linearly in log10 of the
/// swept value when `log` is set.
fn unity_crossings(table: &SweepTable, log: bool) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.n_c.map(|n| (r.value, n)))
        .collect();
    let map = |x: f64| if log { libm::log10(x) } else { x };
    let unmap = |x: f64| if log { libm::pow(10.0, x) } else { x };
    pts.windows(2)
        .filter(|w| (w[0].1 - 1.0) * (w[1].1 - 1.0) < 0.0)
        .map(|w| {
            let (x0, x1) = (map(w[0].0), map(w[1].0));
            let t = (1.0 - w[0].1) / (w[1].1 - w[0].1);
            unmap(x0 + t * (x1 - x0))
        })
        .collect()
}

struct Builder<'a> {
    id: FigureId,
    runner: &'a dyn Runner,
    description: String,
    presets: Vec<ManifestEntry>,
    datasets: Vec<Dataset>,
    results: BTreeMap<String, Option<f64>>,
}

impl<'a> Builder<'a> {
    fn new(id: FigureId, runner: &'a dyn Runner) -> Self {
        Self {
            id,
            runner,
            description: String::new(),
            presets: Vec::new(),
            datasets: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    fn finish(self) -> FigureBundle {
        FigureBundle {
            manifest: Manifest {
                figure: self.id,
                description: self.description,
                presets: self.presets,
                datasets: self.datasets.iter().map(|d| d.name.clone()).collect(),
                results: self.results,
            },
            datasets: self.datasets,
        }
    }

    fn entry(&mut self, name: String, value: f64, provenance: Provenance, note: &str) {
        self.presets.push(ManifestEntry {
            name,
            value,
            provenance,
            note: note.to_string(),
        });
    }

    /// Records every parameter of `p` under `label`. Names listed in
    /// `derived` / `chosen` get that provenance, the rest are stated.
    fn describe(&mut self, label: &str, p: &SystemParams, derived: &[&str], chosen: &[(&str, &str)]) {
        let fields: [(&str, f64); 15] = [
            ("omega_c_hz", p.omega_c / core::f64::consts::TAU),
            ("delta_a", p.delta_a),
            ("delta_m", p.delta_m),
            ("gamma_a", p.gamma_a),
            ("gamma_m", p.gamma_m),
            ("gamma_c", p.gamma_c),
            ("n_m", p.n_m),
            ("n_c_bath", p.n_c),
            ("j_ac", p.j_ac),
            ("j_mc", p.j_mc),
            ("j_am", p.j_am),
            ("eps_re", p.eps_a.re),
            ("eps_im", p.eps_a.im),
            ("r_s", p.r_s),
            ("phi_s_deg", p.phi_s.to_degrees()),
        ];
        for (name, value) in fields {
            let (prov, note) = if name == "n_c_bath" {
                (
                    Provenance::Derived,
                    "inverted from the quoted single- and dual-channel occupancies",
                )
            } else if derived.contains(&name) {
                (Provenance::Derived, "computed from a stated formula")
            } else if let Some((_, why)) = chosen.iter().find(|(n, _)| *n == name) {
                (Provenance::Chosen, *why)
            } else {
                (Provenance::Stated, "")
            };
            self.entry(format!("{label}.{name}"), value, prov, note);
        }
        self.entry(
            format!("{label}.mechanism_cmi"),
            if p.mechanism == Mechanism::Cmi { 1.0 } else { 0.0 },
            Provenance::Stated,
            "1 = dual-channel, 0 = single-channel",
        );
    }

    fn grid(&mut self, name: &str, values: &SweepValues) {
        if let SweepValues::Range { min, max, n, .. } = values {
            self.entry(format!("grid.{name}.min"), *min, Provenance::Chosen, "plot range");
            self.entry(format!("grid.{name}.max"), *max, Provenance::Chosen, "plot range");
            self.entry(format!("grid.{name}.points"), *n as f64, Provenance::Chosen, "");
        }
    }

    fn sweep(&self, key: SweepKey, values: &SweepValues, base: SystemParams, obs: &[Observable]) -> Result<SweepTable> {
        self.runner
            .sweep(&SweepSpec::new(key, values.clone(), base).with_observables(obs))
    }

    fn result(&mut self, name: String, value: Option<f64>) {
        self.results.insert(name, value);
    }

    fn fig2(&mut self) -> Result<()> {
        self.description = "Force spectra, net cooling rate and occupancy versus detuning \
                            for the single-channel (a-c) and dual-channel (d-f) mechanisms"
            .to_string();
        let red = [("delta_a", "red-sideband resonance used for the spectra panels"), ("delta_m", "red-sideband resonance used for the spectra panels")];
        let mcm = presets::fig2_mcm();
        let cmi = presets::fig2_cmi();
        self.describe("mcm", &mcm, &[], &red);
        self.describe("cmi", &cmi, &[], &red);

        let (lo, hi) = DEFAULT_GRID_SPAN;
        let freqs = frequency_grid(lo, hi, DEFAULT_GRID_POINTS)?;
        self.grid("omega", &SweepValues::range(lo, hi, DEFAULT_GRID_POINTS, Scale::Linear));
        for (panel, label, p) in [("fig2a", "mcm", mcm), ("fig2d", "cmi", cmi)] {
            let s = self.runner.spectrum(&p, freqs.clone())?;
            self.datasets.push(Dataset {
                name: format!("{panel}_psd_{label}"),
                columns: vec!["omega_over_wc".to_string(), "S_F".to_string()],
                rows: s.frequencies.iter().zip(&s.values).map(|(w, v)| vec![*w, *v]).collect(),
            });
            let point = self.runner.spectrum(&p, vec![-1.0, 1.0])?;
            self.result(format!("{label}.S_F(+wc)"), Some(point.values[1]));
            self.result(format!("{label}.S_F(-wc)"), Some(point.values[0]));
        }

        let detuning = SweepValues::range(-3.0, 3.0, 601, Scale::Linear);
        self.grid("delta", &detuning);
        let obs = [Observable::GammaMinus, Observable::GammaPlus, Observable::GammaNet, Observable::Occupancy];
        for (panel, label, p) in [("fig2bc", "mcm", mcm), ("fig2ef", "cmi", cmi)] {
            let t = self.sweep(SweepKey::Delta, &detuning, p, &obs)?;
            self.datasets.push(sweep_dataset(format!("{panel}_{label}_vs_delta"), &t, false));
            let at = self.sweep(SweepKey::Delta, &SweepValues::List(vec![1.0]), p, &obs)?;
            self.result(format!("{label}.gamma_net(delta=wc)"), at.rows[0].gamma_net);
            self.result(format!("{label}.n_c(delta=wc)"), at.rows[0].n_c);
            let min = minimum(&t);
            self.result(format!("{label}.min_n_c"), min.map(|m| m.1));
            self.result(format!("{label}.argmin_delta"), min.map(|m| m.0));
        }
        Ok(())
    }

    fn fig3(&mut self) -> Result<()> {
        self.description =
            "Occupancy versus cavity decay rate (a, dual-channel) and magnon decay rate (b, both)".to_string();
        let q = 1e7;
        let cmi = presets::fig2_cmi().with_q_c(q);
        let mcm = presets::fig2_mcm().with_q_c(q);
        self.describe("mcm", &mcm, &[], &[]);
        self.describe("cmi", &cmi, &[], &[]);
        let obs = [Observable::GammaMinus, Observable::GammaPlus, Observable::GammaNet, Observable::Occupancy];

        let ga = SweepValues::range(0.1, 10.0, 201, Scale::Log);
        self.grid("gamma_a", &ga);
        let t = self.sweep(SweepKey::GammaA, &ga, cmi, &obs)?;
        self.datasets.push(sweep_dataset("fig3a_cmi_vs_gamma_a".to_string(), &t, false));
        let min = minimum(&t);
        self.result("cmi.gamma_a.min_n_c".to_string(), min.map(|m| m.1));
        self.result("cmi.gamma_a.argmin".to_string(), min.map(|m| m.0));
        let unstable = t.rows.iter().filter(|r| !r.stable).count();
        self.result("cmi.gamma_a.unstable_points".to_string(), Some(unstable as f64));

        let gm = SweepValues::range(0.01, 10.0, 201, Scale::Log);
        self.grid("gamma_m", &gm);
        for (label, p) in [("mcm", mcm), ("cmi", cmi)] {
            let t = self.sweep(SweepKey::GammaM, &gm, p, &obs)?;
            self.datasets.push(sweep_dataset(format!("fig3b_{label}_vs_gamma_m"), &t, false));
            let min = minimum(&t);
            self.result(format!("{label}.gamma_m.min_n_c"), min.map(|m| m.1));
            self.result(format!("{label}.gamma_m.argmin"), min.map(|m| m.0));
            self.result(
                format!("{label}.gamma_m.unity_crossing"),
                unity_crossings(&t, true).first().copied(),
            );
        }
        Ok(())
    }

    fn fig4a(&mut self) -> Result<()> {
        self.description = "Occupancy dynamics n_c(t) from the rate equation, starting from the \
                            bath occupancy"
            .to_string();
        let mut times_s = vec![0.0];
        let n = 400;
        for i in 0..=n {
            times_s.push(libm::pow(10.0, -7.0 + 7.0 * i as f64 / n as f64));
        }
        self.entry("grid.t_s.min_positive".to_string(), 1e-7, Provenance::Chosen, "log time grid");
        self.entry("grid.t_s.max".to_string(), 1.0, Provenance::Chosen, "log time grid");
        for q in [5e7, 1e11] {
            for (label, mech) in [("mcm", Mechanism::Mcm), ("cmi", Mechanism::Cmi)] {
                let p = presets::fig4a(mech, q);
                let tag = format!("{label}_q{}", if q == 5e7 { "5e7" } else { "1e11" });
                self.describe(&tag, &p, &["delta_a", "delta_m"], &[]);
                self.entry(
                    format!("{tag}.n0"),
                    p.n_c,
                    Provenance::Chosen,
                    "initial occupancy equal to the bath occupancy",
                );
                let eq = RateEquation::new(&p, p.n_c)?;
                self.datasets.push(Dataset {
                    name: format!("fig4a_{tag}"),
                    columns: vec!["t_s".to_string(), "n_c".to_string()],
                    rows: times_s
                        .iter()
                        .map(|t| vec![*t, eq.at(p.to_dimensionless_time(*t))])
                        .collect(),
                });
                self.result(
                    format!("{tag}.crossing_time_s"),
                    eq.crossing_time(1.0).map(|t| p.to_seconds(t)),
                );
                self.result(format!("{tag}.n_inf"), Some(eq.n_inf));
            }
        }
        Ok(())
    }

    fn q_curves(&mut self, prefix: &str, curves: &[(String, SystemParams)]) -> Result<()> {
        let qs = SweepValues::range(1e2, 1e13, 221, Scale::Log);
        self.grid("q_c", &qs);
        let obs = [Observable::GammaMinus, Observable::GammaPlus, Observable::GammaNet, Observable::Occupancy];
        let mut rows = Vec::new();
        for (i, (label, p)) in curves.iter().enumerate() {
            let t = self.sweep(SweepKey::QC, &qs, *p, &obs)?;
            self.datasets.push(sweep_dataset(format!("{prefix}_{label}"), &t, false));
            let th = match qc_threshold(p, DEFAULT_LOG10_BRACKET) {
                Ok(r) => Some(r.q_threshold),
                Err(Error::Bracket { .. } | Error::Runaway { .. }) => None,
                Err(e) => return Err(e),
            };
            self.result(format!("{label}.q_threshold"), th);
            rows.push(vec![i as f64, or_nan(th)]);
        }
        self.datasets.push(Dataset {
            name: format!("{prefix}_thresholds"),
            columns: vec!["curve".to_string(), "q_threshold".to_string()],
            rows,
        });
        Ok(())
    }

    fn fig4b(&mut self) -> Result<()> {
        self.description = "Occupancy versus Q_c for the single-channel mechanism and the \
                            dual-channel mechanism at three squeezing strengths"
            .to_string();
        let mut curves = vec![("mcm".to_string(), presets::fig2_mcm())];
        for r in [1.6, 2.0, 2.6] {
            curves.push((format!("cmi_r{r:.1}"), presets::fig4b(Mechanism::Cmi, r)));
        }
        for (label, p) in &curves {
            self.describe(label, p, &[], &[("gamma_c", "overridden by the Q_c axis")]);
        }
        self.q_curves("fig4b", &curves)
    }

    fn fig5(&mut self, key: SweepKey, values: &[f64], provenance: Provenance) -> Result<()> {
        self.description = format!(
            "Occupancy versus Q_c for several values of {} (dual-channel, r_s = 2.6)",
            key.as_str()
        );
        let base = presets::fig5();
        self.describe("base", &base, &[], &[("gamma_c", "overridden by the Q_c axis")]);
        for (i, v) in values.iter().enumerate() {
            self.entry(
                format!("curve{i}.{}", key.as_str()),
                *v,
                provenance,
                if provenance == Provenance::Chosen { "value list not given" } else { "" },
            );
        }
        let curves: Vec<(String, SystemParams)> = values
            .iter()
            .map(|v| (format!("{}_{v}", key.as_str()), key.apply(&base, *v)))
            .collect();
        let panel = self.id.as_str();
        self.q_curves(panel, &curves)
    }

    fn fig6(&mut self, key: SweepKey, values: SweepValues, with_mcm: bool) -> Result<()> {
        self.description = format!("Occupancy versus {} at gamma_c = 1e-5, r_s = 2.6", key.as_str());
        let swept: &[(&str, &str)] = match key {
            SweepKey::JAc => &[("j_ac", "swept")],
            SweepKey::JMc => &[("j_mc", "swept")],
            _ => &[("j_am", "swept")],
        };
        let log = matches!(values, SweepValues::Range { scale: Scale::Log, .. });
        self.grid(key.as_str(), &values);
        let obs = [Observable::GammaMinus, Observable::GammaPlus, Observable::GammaNet, Observable::Occupancy];
        let mut curves = vec![("cmi", presets::fig6(Mechanism::Cmi))];
        if with_mcm {
            curves.insert(0, ("mcm", presets::fig6(Mechanism::Mcm)));
        }
        for (label, p) in curves {
            self.describe(label, &p, &[], swept);
            let t = self.sweep(key, &values, p, &obs)?;
            self.datasets
                .push(sweep_dataset(format!("{}_{label}_vs_{}", self.id.as_str(), key.as_str()), &t, false));
            let min = minimum(&t);
            self.result(format!("{label}.min_n_c"), min.map(|m| m.1));
            self.result(format!("{label}.argmin"), min.map(|m| m.0));
            let ground: Vec<f64> = t
                .rows
                .iter()
                .filter(|r| r.n_c.is_some_and(|n| n < 1.0))
                .map(|r| r.value)
                .collect();
            self.result(format!("{label}.ground_state_from"), ground.first().copied());
            self.result(format!("{label}.ground_state_to"), ground.last().copied());
            for (i, c) in unity_crossings(&t, log).into_iter().enumerate() {
                self.result(format!("{label}.unity_crossing{i}"), Some(c));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for f in FigureId::ALL {
            assert_eq!(f.as_str().parse::<FigureId>().unwrap(), f);
        }
        assert!("fig7".parse::<FigureId>().is_err());
    }

    #[test]
    fn fig4a_bundle_shape() {
        let b = reproduce_figure(FigureId::Fig4a).unwrap();
        assert_eq!(b.datasets.len(), 4);
        for d in &b.datasets {
            assert_eq!(d.columns, ["t_s", "n_c"]);
            assert_eq!(d.rows.len(), 402);
        }
        assert_eq!(b.manifest.datasets.len(), 4);
        assert!(b.manifest.results["mcm_q5e7.crossing_time_s"].is_none());
    }

    #[test]
    fn unity_crossing_interpolates() {
        let mk = |v: f64, n: f64| super::super::SweepRow {
            value: v,
            stable: true,
            gamma_minus: None,
            gamma_plus: None,
            gamma_net: None,
            n_c: Some(n),
            threshold: None,
            spectrum: None,
            note: None,
        };
        let t = SweepTable {
            key: SweepKey::GammaM,
            rows: vec![mk(1.0, 0.5), mk(3.0, 1.5)],
        };
        assert_eq!(unity_crossings(&t, false), [2.0]);
        let c = unity_crossings(&t, true)[0];
        assert!((libm::log10(c) - 0.5 * libm::log10(3.0)).abs() < 1e-12);
    }
}
