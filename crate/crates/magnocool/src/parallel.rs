//! Rayon-backed [`Runner`]: sweep points and spectrum frequencies are
//! evaluated concurrently and collected in input order, so the output is
//! identical to the sequential runner.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use magnocool_core::Result;
use magnocool_core::spectra::{mcm_rates, PsdEngine, SpectrumResult};
use magnocool_core::steady_state::MagnonWeighting;
use magnocool_core::sweep_opt::{evaluate_point, Runner, SweepSpec, SweepTable};
use magnocool_core::{Mechanism, SystemParams};

use crate::CliError;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "MAGNOCOOL_THREADS";

pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `threads = None` or `Some(0)` lets rayon pick (one per core).
    pub fn new(threads: Option<usize>) -> Result<Self, CliError> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// S_F on `frequencies` under the chosen magnon-noise weighting.
    pub fn spectrum_weighted(
        &self,
        params: &SystemParams,
        frequencies: Vec<f64>,
        weighting: MagnonWeighting,
    ) -> Result<SpectrumResult> {
        let values = match params.mechanism {
            Mechanism::Mcm => {
                params.validate()?;
                let scale = match weighting {
                    MagnonWeighting::Separated => 1.0,
                    MagnonWeighting::Lumped => 2.0 * params.n_m + 1.0,
                };
                frequencies
                    .iter()
                    .map(|w| scale * mcm_rates(params, *w).0)
                    .collect()
            }
            Mechanism::Cmi => {
                let engine = PsdEngine::with_weighting(params, weighting)?;
                self.pool.install(|| {
                    frequencies
                        .par_iter()
                        .map(|w| engine.psd(*w))
                        .collect::<Result<Vec<_>>>()
                })?
            }
        };
        Ok(SpectrumResult {
            frequencies,
            values,
            mechanism: params.mechanism,
            params_hash: params.snapshot_hash(),
        })
    }
}

impl Runner for Parallel {
    fn sweep(&self, spec: &SweepSpec) -> Result<SweepTable> {
        let values = spec.values.values()?;
        let rows = self.pool.install(|| {
            values
                .par_iter()
                .map(|v| evaluate_point(spec, *v))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(SweepTable { key: spec.key, rows })
    }

    fn spectrum(&self, params: &SystemParams, frequencies: Vec<f64>) -> Result<SpectrumResult> {
        self.spectrum_weighted(params, frequencies, MagnonWeighting::Separated)
    }
}
