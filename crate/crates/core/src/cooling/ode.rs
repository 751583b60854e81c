use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 50_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of y' = f(t, y), returning the state
/// at every entry of `times` (the first entry is the initial time).
pub fn integrate<F>(mut f: F, y0: &[f64], times: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    let Some(&t_start) = times.first() else {
        return Ok(out);
    };
    let mut t = t_start;
    let mut y = y0.to_vec();
    out.push(y.clone());

    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    f(t, &y, &mut k[0]);

    let span = times.last().unwrap() - t_start;
    let mut h = initial_step(&y, &k[0], opts, span);
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow { t, h });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t, h: step });
            }

            for s in 1..7 {
                let (done, rest) = k.split_at_mut(s);
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in done.iter().enumerate() {
                        acc += step * A[s][j] * kj[i];
                    }
                    stage[i] = acc;
                }
                f(t + C[s] * step, &stage, &mut rest[0]);
            }
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            y_new.copy_from_slice(&stage);
            let mut norm = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += (B5[s] - B4[s]) * k[s][i];
                }
                err[i] = step * e;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let r = err[i] / scale;
                norm += r * r;
            }
            let norm = libm::sqrt(norm / n.max(1) as f64);

            if norm <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let grow = if norm == 0.0 { 5.0 } else { (0.9 * libm::pow(norm, -0.2)).min(5.0) };
                if !last || step >= h {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * libm::pow(norm, -0.2)).max(0.2);
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[f64], dy: &[f64], opts: OdeOptions, span: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..y.len() {
        let scale = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / scale) * (y[i] / scale);
        d1 += (dy[i] / scale) * (dy[i] / scale);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * libm::sqrt(d0 / d1)
    };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}
