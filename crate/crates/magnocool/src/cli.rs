//! Subcommand dispatch. Each command computes an [`Outcome`]; the shared
//! tail writes it into a fresh run directory together with the resolved
//! config (`config.toml`, re-runnable as is) and a `run.json` record.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use toml::Table;

use magnocool_core::cooling::{
    cooling_report, initial_covariance, lyapunov_dynamics, occupancy_from, qc_threshold, rates,
    OccupancyTrajectory, RateEquation,
};
use magnocool_core::spectra::frequency_grid;
use magnocool_core::steady_state::{
    build_drift, effective_couplings, solve_cmi, solve_mcm, stability_report, SteadyState,
};
use magnocool_core::sweep_opt::{optimize_interference, reproduce_figure_with, Runner, SweepSpec};
use magnocool_core::{Mechanism, SystemParams};

use crate::config::{self, DynamicsMethod, Mode, RawConfig};
use crate::output::{self, Format};
use crate::parallel::{Parallel, THREADS_ENV};
use crate::physical::{self, Derivation};
use crate::validate;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "magnocool", version, about = "Squeezing-enhanced sideband cooling of a levitated micromagnet")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key (dotted path; bare keys go to [params]).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Start [params] from a named preset.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Parent directory for run directories [default: runs].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Data files to write: csv, json or both [default: both].
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Print results without creating a run directory.
    #[arg(long, global = true)]
    pub no_write: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Force power spectral density on a frequency grid.
    Spectrum,
    /// Cooling/heating rates and steady occupancy at one point.
    Rates,
    /// Weak-coupling steady occupancy.
    Occupancy,
    /// Occupancy trajectory n_c(t).
    Dynamics,
    /// Q_c at which the occupancy reaches 1.
    Threshold,
    /// Parameter sweep.
    Sweep,
    /// Interference optimization.
    Optimize,
    /// Figure dataset bundle.
    Fig {
        /// fig2, fig3, fig4a, fig4b, fig5a-c, fig6a-c.
        id: Option<String>,
    },
    /// Classical steady state and drift stability.
    Steady,
    /// Run the oracle suite and print a pass/fail table.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Rates => "rates",
            Command::Occupancy => "occupancy",
            Command::Dynamics => "dynamics",
            Command::Threshold => "threshold",
            Command::Sweep => "sweep",
            Command::Optimize => "optimize",
            Command::Fig { .. } => "fig",
            Command::Steady => "steady",
            Command::Validate => "validate",
        }
    }
}

/// What a command produced.
pub struct Outcome {
    /// Human-readable summary for stdout.
    pub summary: String,
    /// Data files keyed by file name; the extension decides whether
    /// `--format` keeps them.
    pub files: Vec<(String, Vec<u8>)>,
    /// Command-specific part of `run.json`.
    pub record: Value,
    /// Non-zero when the command completed but the result is a failure
    /// verdict (unstable steady state, failed validation).
    pub exit: i32,
}

impl Outcome {
    fn new(summary: String, record: Value) -> Self {
        Self {
            summary,
            files: Vec::new(),
            record,
            exit: 0,
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("json: {e}")))?;
        text.push('\n');
        self.files.push((format!("{name}.json"), text.into_bytes()));
        Ok(())
    }

    fn csv(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((format!("{name}.csv"), bytes));
    }
}

/// Resolved inputs shared by every command.
pub struct Context {
    pub table: Table,
    pub cfg: RawConfig,
    pub runner: Parallel,
}

impl Context {
    fn params(&self) -> Result<(SystemParams, Option<Derivation>), CliError> {
        let p = self.cfg.system_params()?;
        match self.cfg.mode {
            Mode::Direct => Ok((p, None)),
            Mode::Physical => {
                let (p, d) = physical::derive(&self.cfg, &p)?;
                Ok((p, Some(d)))
            }
        }
    }
}

/// Parses argv, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut table = config::load_table(cli.common.config.as_deref())?;
    if let Some(p) = &cli.common.preset {
        config::apply_override(&mut table, &format!("preset={}", toml::Value::String(p.clone())))?;
    }
    for s in &cli.common.set {
        config::apply_override(&mut table, s)?;
    }
    if let Command::Fig { id: Some(id) } = &cli.command {
        config::apply_override(&mut table, &format!("figure.id={}", toml::Value::String(id.clone())))?;
    }
    let cfg = config::parse(&table)?;
    let out_cfg = cfg.output.clone().unwrap_or_default();
    let format: Format = cli
        .common
        .format
        .as_deref()
        .or(out_cfg.format.as_deref())
        .map(str::parse)
        .transpose()?
        .unwrap_or_default();
    let out_dir = cli
        .common
        .out
        .clone()
        .or(out_cfg.dir.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    let runner = Parallel::new(cli.common.threads)?;
    let ctx = Context { table, cfg, runner };

    let outcome = match &cli.command {
        Command::Spectrum => spectrum(&ctx)?,
        Command::Rates => rates_cmd(&ctx)?,
        Command::Occupancy => occupancy(&ctx)?,
        Command::Dynamics => dynamics(&ctx)?,
        Command::Threshold => threshold(&ctx)?,
        Command::Sweep => sweep(&ctx)?,
        Command::Optimize => optimize(&ctx)?,
        Command::Fig { .. } => figure(&ctx)?,
        Command::Steady => steady(&ctx)?,
        Command::Validate => {
            let checks = validate::run_suite(&ctx.runner);
            print!("{}", validate::render(&checks));
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Validation {
                    failed,
                    total: checks.len(),
                });
            }
            println!("all {} checks passed", checks.len());
            return Ok(0);
        }
    };

    print!("{}", outcome.summary);
    if !cli.common.no_write {
        let dir = write_run(&out_dir, cli.command.name(), &ctx, &outcome, format)?;
        println!("wrote {}", dir.display());
    }
    Ok(outcome.exit)
}

fn write_run(out: &Path, command: &str, ctx: &Context, o: &Outcome, format: Format) -> Result<PathBuf, CliError> {
    let config_text = toml::to_string(&ctx.table).map_err(|e| CliError::Config(format!("toml: {e}")))?;
    let hash = output::config_hash(command, &config_text);
    let dir = output::create_run_dir(out, &hash)?;
    output::write_bytes(&dir.join("config.toml"), config_text.as_bytes())?;
    for (name, bytes) in &o.files {
        let keep = if name.ends_with(".csv") {
            format.csv()
        } else if name == "manifest.json" {
            true
        } else {
            format.json()
        };
        if keep {
            output::write_bytes(&dir.join(name), bytes)?;
        }
    }
    let params = ctx.params().ok().map(|(p, _)| p);
    let record = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "config_hash": hash,
        "preset": ctx.cfg.preset,
        "params_hash": params.as_ref().map(SystemParams::snapshot_hash),
        "params": params,
        "threads": ctx.runner.threads(),
        "result": o.record,
    });
    output::write_json(&dir.join("run.json"), &record)?;
    Ok(dir)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6e}"))
}

fn spectrum(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx.cfg.spectrum.clone().unwrap_or_default();
    let freqs = frequency_grid(sec.min, sec.max, sec.points)?;
    let s = ctx.runner.spectrum_weighted(&p, freqs, sec.weighting)?;
    let at = ctx.runner.spectrum_weighted(&p, vec![-1.0, 1.0], sec.weighting)?;
    let summary = format!(
        "mechanism {}\nS_F(+wc) = {:.6e}\nS_F(-wc) = {:.6e}\nmax S_F  = {:.6e} on {} points\n",
        p.mechanism.as_str(),
        at.values[1],
        at.values[0],
        s.max_value(),
        s.values.len()
    );
    let mut o = Outcome::new(
        summary,
        json!({"S_F(+wc)": at.values[1], "S_F(-wc)": at.values[0], "weighting": sec.weighting}),
    );
    o.csv("spectrum", output::spectrum_csv(&s)?);
    o.json("spectrum", &json!({"params": p, "weighting": sec.weighting, "spectrum": s}))?;
    Ok(o)
}

fn rates_cmd(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let r = cooling_report(&p)?;
    let mut summary = format!(
        "mechanism {}\nGamma-    = {:.6e}\nGamma+    = {:.6e}\nGamma_net = {:.6e}\nn_c       = {}\n",
        p.mechanism.as_str(),
        r.gamma_minus,
        r.gamma_plus,
        r.gamma_net,
        fmt_opt(r.n_c)
    );
    if r.n_c.is_none() {
        summary.push_str("no steady state: gamma_c + Gamma_net <= 0 (runaway heating)\n");
    }
    let mut o = Outcome::new(summary, serde_json::to_value(&r).map_err(json_err)?);
    let row = [r.gamma_minus, r.gamma_plus, r.gamma_net, r.n_c.unwrap_or(f64::NAN)];
    o.csv(
        "rates",
        output::csv_bytes(&["gamma_minus", "gamma_plus", "gamma_net", "n_c"], [&row[..]])?,
    );
    o.json("report", &r)?;
    Ok(o)
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Config(format!("json: {e}"))
}

fn occupancy(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx.cfg.occupancy.clone().unwrap_or_default();
    let (gm, gp) = match (sec.gamma_minus, sec.gamma_plus) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => rates(&p)?,
        _ => {
            return Err(CliError::Config(
                "[occupancy] needs both gamma_minus and gamma_plus, or neither".into(),
            ))
        }
    };
    let n = occupancy_from(p.gamma_c, p.n_c, gm, gp)?;
    let summary = format!(
        "gamma_c = {:.6e}, n_bath = {:.6e}\nGamma- = {gm:.6e}, Gamma+ = {gp:.6e}\nn_c = {n:.6e}\n",
        p.gamma_c, p.n_c
    );
    let rec = json!({"gamma_c": p.gamma_c, "n_bath": p.n_c, "gamma_minus": gm, "gamma_plus": gp, "n_c": n});
    let mut o = Outcome::new(summary, rec.clone());
    let row = [p.gamma_c, p.n_c, gm, gp, n];
    o.csv(
        "occupancy",
        output::csv_bytes(&["gamma_c", "n_bath", "gamma_minus", "gamma_plus", "n_c"], [&row[..]])?,
    );
    o.json("occupancy", &rec)?;
    Ok(o)
}

/// Dimensionless sample times, starting at t = 0.
fn time_grid(p: &SystemParams, sec: &config::DynamicsSection) -> Result<Vec<f64>, CliError> {
    let mut t = match (&sec.times_s, &sec.times) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("[dynamics] takes times_s or times, not both".into()))
        }
        (Some(s), None) => s.values()?.into_iter().map(|t| p.to_dimensionless_time(t)).collect(),
        (None, Some(t)) => t.values()?,
        (None, None) => config::DynamicsSection::default()
            .times_s
            .expect("default grid")
            .values()?
            .into_iter()
            .map(|t| p.to_dimensionless_time(t))
            .collect::<Vec<_>>(),
    };
    if t.first().is_some_and(|t0| *t0 > 0.0) {
        t.insert(0, 0.0);
    }
    Ok(t)
}

fn dynamics(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx.cfg.dynamics.clone().unwrap_or_default();
    let n0 = sec.n0.unwrap_or(p.n_c);
    let times = time_grid(&p, &sec)?;
    let (traj, crossing): (OccupancyTrajectory, Option<f64>) = match sec.method {
        DynamicsMethod::RateEquation => {
            let eq = RateEquation::new(&p, n0)?;
            (eq.sample(&times), eq.crossing_time(sec.level))
        }
        DynamicsMethod::Lyapunov => {
            let v0 = initial_covariance(&p, n0)?;
            let tr = lyapunov_dynamics(&p, &v0, &times)?;
            let c = tr.first_at_or_below(sec.level);
            (tr, c)
        }
    };
    let crossing_s = crossing.map(|t| p.to_seconds(t));
    let last = *traj.occupancies.last().expect("non-empty grid");
    let summary = format!(
        "method {:?}, n0 = {n0:.6e}\nn_c(t_end) = {last:.6e}\nfirst time n_c <= {}: {}\n",
        sec.method,
        sec.level,
        crossing_s.map_or_else(|| "never".to_string(), |t| format!("{t:.6e} s")),
    );
    let rec = json!({"method": sec.method, "n0": n0, "level": sec.level, "crossing_time_s": crossing_s, "n_c_end": last});
    let mut o = Outcome::new(summary, rec);
    let ts = traj.times_in_seconds(p.omega_c);
    let rows: Vec<[f64; 3]> = ts
        .iter()
        .zip(&traj.times)
        .zip(&traj.occupancies)
        .map(|((s, t), n)| [*s, *t, *n])
        .collect();
    o.csv("trajectory", output::csv_bytes(&["t_s", "t_wc", "n_c"], rows.iter().map(|r| &r[..]))?);
    o.json("trajectory", &json!({"params": p, "n0": n0, "crossing_time_s": crossing_s, "trajectory": traj}))?;
    Ok(o)
}

fn threshold(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx.cfg.threshold.clone().unwrap_or_default();
    let r = qc_threshold(&p, sec.bracket)?;
    let summary = format!(
        "Q_c threshold = {:.6e} ({} bisection steps, |n_c - 1| = {:.1e})\nGamma- = {:.6e}, Gamma+ = {:.6e}\n",
        r.q_threshold, r.iterations, r.residual, r.gamma_minus, r.gamma_plus
    );
    let mut o = Outcome::new(summary, serde_json::to_value(&r).map_err(json_err)?);
    let row = [r.q_threshold, r.gamma_minus, r.gamma_plus];
    o.csv(
        "threshold",
        output::csv_bytes(&["q_threshold", "gamma_minus", "gamma_plus"], [&row[..]])?,
    );
    o.json("threshold", &r)?;
    Ok(o)
}

fn sweep(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx
        .cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] table with key and values".into()))?;
    let key = config::parse_sweep_key(&sec.key)?;
    let mut spec = SweepSpec::new(key, sec.values.clone(), p);
    if let Some(obs) = &sec.observables {
        spec = spec.with_observables(obs);
    }
    if let Some(s) = &sec.spectrum {
        spec.spectrum_grid = (s.min, s.max, s.points);
    }
    if let Some(b) = sec.bracket {
        spec.threshold_bracket = b;
    }
    let table = ctx.runner.sweep(&spec)?;
    let unstable: Vec<f64> = table.rows.iter().filter(|r| !r.stable).map(|r| r.value).collect();
    let summary = format!(
        "swept {} over {} values ({} unstable)\n",
        key.as_str(),
        table.rows.len(),
        unstable.len()
    );
    let rec = json!({"key": key.as_str(), "points": table.rows.len(), "unstable_values": unstable, "observables": spec.observables});
    let mut o = Outcome::new(summary, rec);
    for (name, bytes) in output::sweep_csvs(&table)? {
        o.csv(&name, bytes);
    }
    o.json("sweep", &json!({"spec": spec, "table": table}))?;
    Ok(o)
}

fn optimize(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, _) = ctx.params()?;
    let sec = ctx.cfg.optimize.clone().unwrap_or_default();
    let free = config::parse_free(&sec.free)?;
    let objective = config::parse_objective(sec.objective.as_deref())?;
    let r = optimize_interference(&p, &free, objective)?;
    let q = &r.params;
    let summary = format!(
        "objective {:?}: {:.6e} -> {:.6e} ({} evaluations, converged: {})\nr_s = {:.6}, phi_s = {:.4} deg, eps_a = {:.6} {:+.6}i\nj_ac = {:.6}, j_mc = {:.6}, j_am = {:.6}\n",
        objective,
        r.base_value,
        r.objective_value,
        r.evaluations,
        r.converged,
        q.r_s,
        q.phi_s.to_degrees(),
        q.eps_a.re,
        q.eps_a.im,
        q.j_ac,
        q.j_mc,
        q.j_am
    );
    let mut o = Outcome::new(
        summary,
        json!({"objective": objective, "base_value": r.base_value, "objective_value": r.objective_value, "converged": r.converged}),
    );
    let rows: Vec<[f64; 2]> = r.trace.iter().map(|t| [t.evaluations as f64, t.best]).collect();
    o.csv("trace", output::csv_bytes(&["evaluations", "best"], rows.iter().map(|r| &r[..]))?);
    o.json("optimization", &r)?;
    Ok(o)
}

fn figure(ctx: &Context) -> Result<Outcome, CliError> {
    let id = ctx
        .cfg
        .figure
        .as_ref()
        .map(|f| f.id.clone())
        .ok_or_else(|| CliError::Config("fig needs a figure id (argument or [figure] id)".into()))?;
    let id = config::parse_figure(&id)?;
    let bundle = reproduce_figure_with(id, &ctx.runner)?;
    let mut summary = format!("{}: {}\n", id.as_str(), bundle.manifest.description);
    for (k, v) in &bundle.manifest.results {
        summary.push_str(&format!("  {k} = {}\n", fmt_opt(*v)));
    }
    let mut o = Outcome::new(summary, json!({"figure": id.as_str(), "datasets": bundle.manifest.datasets}));
    for d in &bundle.datasets {
        o.csv(&d.name, output::dataset_csv(d)?);
    }
    let mut text = serde_json::to_string_pretty(&bundle.manifest).map_err(json_err)?;
    text.push('\n');
    o.files.push(("manifest.json".to_string(), text.into_bytes()));
    Ok(o)
}

fn steady(ctx: &Context) -> Result<Outcome, CliError> {
    let (p, derivation) = ctx.params()?;
    let (st, g): (SteadyState, f64) = match &derivation {
        Some(d) => (d.steady.clone(), d.g_amc),
        None => {
            let s = ctx.cfg.steady.unwrap_or_default();
            let st = match p.mechanism {
                Mechanism::Mcm => solve_mcm(&p, s.omega_a)?,
                Mechanism::Cmi => solve_cmi(&p, s.omega_a, s.eps_m, s.g_amc)?,
            };
            (st, s.g_amc)
        }
    };
    let (j_ac, j_mc, j_am) = effective_couplings(&st, g);
    let sub = stability_report(&build_drift(&p, false));
    let full = stability_report(&build_drift(&p, true));
    let summary = format!(
        "a0 = {:.6e} {:+.6e}i\nm0 = {:.6e} {:+.6e}i\nc0 = {:.6e} {:+.6e}i\nresidual {:.1e}, multistable: {}\neffective couplings: j_ac = {j_ac:.6e}, j_mc = {j_mc:.6e}, j_am = {j_am:.6e}\nstable (4x4): {} margin {:.3e}\nstable (6x6): {} margin {:.3e}\n",
        st.a0.re, st.a0.im, st.m0.re, st.m0.im, st.c0.re, st.c0.im,
        st.residual,
        st.multistable,
        sub.stable,
        sub.margin,
        full.stable,
        full.margin
    );
    let rec = json!({
        "steady": st,
        "effective_couplings": {"j_ac": j_ac, "j_mc": j_mc, "j_am": j_am},
        "stability_4x4": sub,
        "stability_6x6": full,
        "derivation": derivation,
    });
    let mut o = Outcome::new(summary, rec.clone());
    o.exit = if sub.stable && full.stable { 0 } else { 2 };
    o.json("steady", &rec)?;
    Ok(o)
}
