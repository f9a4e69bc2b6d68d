//! Dormand–Prince 5(4) with step landing on output times and breakpoints.
//!
//! The right-hand side receives the current segment `(start, end)` so that a
//! piecewise-defined forcing can be evaluated with one-sided limits at
//! discontinuities; no step ever crosses a segment boundary.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrates `y' = f(t, seg, y)` from `t_out[0]` and returns the state at every
/// entry of `t_out` (ascending). `breaks` are additional forced stops.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t_out: &[f64],
    breaks: &[f64],
    cfg: &OdeConfig,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, (f64, f64), &[f64; N], &mut [f64; N]),
{
    if t_out.is_empty() {
        return Ok(Vec::new());
    }
    if !(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0) {
        return Err(Error::invalid(
            "tolerance",
            "rel_tol and abs_tol must be > 0",
        ));
    }
    if !(cfg.max_step > 0.0) {
        return Err(Error::invalid("max_step", "must be > 0"));
    }
    if t_out.iter().any(|t| !t.is_finite()) || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid(
            "grid",
            "output times must be finite and ascending",
        ));
    }
    let t0 = t_out[0];
    let t_end = t_out[t_out.len() - 1];

    let mut stops: Vec<f64> = t_out.to_vec();
    stops.extend(breaks.iter().copied().filter(|&b| b > t0 && b < t_end));
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut out = Vec::with_capacity(t_out.len());
    let mut next_out = 0;
    let mut y = y0;
    let mut t = t0;
    let mut h = f64::NAN;
    let mut steps = 0usize;

    let push_outputs = |t: f64, y: &[f64; N], out: &mut Vec<[f64; N]>, next_out: &mut usize| {
        while *next_out < t_out.len() && t_out[*next_out] <= t {
            out.push(*y);
            *next_out += 1;
        }
    };
    push_outputs(t, &y, &mut out, &mut next_out);

    for &seg_end in stops.iter().filter(|&&s| s > t0) {
        let seg = (t, seg_end);
        let mut k1 = [0.0; N];
        rhs(t, seg, &y, &mut k1);
        if !h.is_finite() {
            h = initial_step(&k1, &y, seg_end - t, cfg);
        }
        while t < seg_end {
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::TooManySteps { t });
            }
            let remaining = seg_end - t;
            let mut step = h.min(cfg.max_step);
            let lands = step >= remaining * (1.0 - 1e-12);
            if lands {
                step = remaining;
            }
            if step <= 1e-14 * t.abs().max(1.0) && !lands {
                return Err(Error::StepSizeUnderflow { t });
            }

            let mut k2 = [0.0; N];
            let mut k3 = [0.0; N];
            let mut k4 = [0.0; N];
            let mut k5 = [0.0; N];
            let mut k6 = [0.0; N];
            let mut k7 = [0.0; N];
            rhs(t + C2 * step, seg, &axpy(&y, step, &[(A21, &k1)]), &mut k2);
            rhs(
                t + C3 * step,
                seg,
                &axpy(&y, step, &[(A31, &k1), (A32, &k2)]),
                &mut k3,
            );
            rhs(
                t + C4 * step,
                seg,
                &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
                &mut k4,
            );
            rhs(
                t + C5 * step,
                seg,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                &mut k5,
            );
            let t_new = if lands { seg_end } else { t + step };
            rhs(
                t_new,
                seg,
                &axpy(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
                &mut k6,
            );
            let y_new = axpy(
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            rhs(t_new, seg, &y_new, &mut k7);

            // Max norm: structurally zero components must not dilute the error of the others.
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h = 0.2 * step;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                // A landing step is usually shortened; don't let it shrink the proposal.
                h = if lands {
                    h.max(step * factor)
                } else {
                    step * factor
                };
            } else {
                h = step * factor.min(1.0);
            }
        }
        push_outputs(t, &y, &mut out, &mut next_out);
    }
    Ok(out)
}

fn initial_step<const N: usize>(f0: &[f64; N], y0: &[f64; N], span: f64, cfg: &OdeConfig) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).min(cfg.max_step).max(1e-10 * span)
}
