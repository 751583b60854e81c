use alloc::string::String;

/// Failure modes shared by every computation in the crate.
///
/// Each variant names the offending quantity so the CLI can print a
/// diagnostic without extra context.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "parametric threshold reached: 2|eps_a| = {two_eps} >= |gamma_a/2 + i delta_a| = {kappa}"
    )]
    ParametricThreshold { two_eps: f64, kappa: f64 },

    #[error("unstable drift: eigenvalue {re} {im:+}i has non-negative real part")]
    Unstable { re: f64, im: f64 },

    #[error("no steady state: gamma_c + Gamma_net = {total} <= 0 (runaway heating)")]
    Runaway { total: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("singular response at omega = {omega} (|det| = {det:e})")]
    Singular { omega: f64, det: f64 },

    #[error(
        "threshold bracket does not straddle n_c = 1: n_c(10^{low}) = {n_low}, n_c(10^{high}) = {n_high}"
    )]
    Bracket {
        low: f64,
        high: f64,
        n_low: f64,
        n_high: f64,
    },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("infeasible: every candidate point is unstable")]
    Infeasible,

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
