use libm::pow;
use serde::{Deserialize, Serialize};

use super::{occupancy_from, rates};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// log10 Q_c search range used when none is given.
pub const DEFAULT_LOG10_BRACKET: (f64, f64) = (2.0, 13.0);

const TOLERANCE_DECADES: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub q_threshold: f64,
    /// Final (low, high) bracket in log10 Q_c.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// |n_c − 1| at `q_threshold`.
    pub residual: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

/// Q_c at which n_c = 1. Γ± do not depend on Q_c, so they are computed
/// once and only the occupancy formula is re-evaluated during bisection.
pub fn qc_threshold(params: &SystemParams, log10_bracket: (f64, f64)) -> Result<ThresholdResult> {
    let (gm, gp) = rates(params)?;
    qc_threshold_from_rates(params.n_c, gm, gp, log10_bracket)
}

pub fn qc_threshold_from_rates(
    n_bath: f64,
    gamma_minus: f64,
    gamma_plus: f64,
    log10_bracket: (f64, f64),
) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = log10_bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("bracket", lo, "need finite low < high"));
    }
    let net = gamma_minus - gamma_plus;
    if !(net > 0.0) {
        return Err(Error::Runaway { total: net });
    }
    let n_at = |log_q: f64| occupancy_from(pow(10.0, -log_q), n_bath, gamma_minus, gamma_plus);
    let (n_lo, n_hi) = (n_at(lo)?, n_at(hi)?);
    if !(n_lo > 1.0 && n_hi < 1.0) {
        return Err(Error::Bracket {
            low: lo,
            high: hi,
            n_low: n_lo,
            n_high: n_hi,
        });
    }
    let mut iterations = 0;
    while hi - lo > TOLERANCE_DECADES {
        let mid = 0.5 * (lo + hi);
        if n_at(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mid = 0.5 * (lo + hi);
    Ok(ThresholdResult {
        q_threshold: pow(10.0, mid),
        bracket: (lo, hi),
        iterations,
        residual: (n_at(mid)? - 1.0).abs(),
        gamma_minus,
        gamma_plus,
    })
}

/// Exact inversion of the occupancy formula at n_c = 1:
/// Q_c = (n̄_c − 1)/(Γ− − 2Γ+). `None` when ground-state cooling is
/// unreachable at any Q_c.
pub fn threshold_closed_form(n_bath: f64, gamma_minus: f64, gamma_plus: f64) -> Option<f64> {
    let margin = gamma_minus - 2.0 * gamma_plus;
    (margin > 0.0 && n_bath > 1.0).then(|| (n_bath - 1.0) / margin)
}
