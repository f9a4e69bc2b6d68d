//! Time-local generator rates (γ₊, γ₋, γ_z, ω) and relaxation integrals.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, MapCoefficients, Result};

pub const DEFAULT_EPS_SING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateStatus {
    Regular,
    NearSingularB,
    NearSingularC,
}

impl RateStatus {
    pub fn code(&self) -> &'static str {
        match self {
            RateStatus::Regular => "R",
            RateStatus::NearSingularB => "SB",
            RateStatus::NearSingularC => "SC",
        }
    }

    pub fn is_regular(&self) -> bool {
        *self == RateStatus::Regular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRates {
    pub t: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
    pub omega: f64,
    pub status: RateStatus,
}

impl GeneratorRates {
    pub fn min_rate(&self) -> f64 {
        self.gamma_plus.min(self.gamma_minus).min(self.gamma_z)
    }
}

/// Rates from the map coefficients.
///
/// The free-decay parts of Ȧ, Ḃ, Ċ are cancelled analytically, which keeps
/// small rates (e.g. γ_z deep in the tail) resolvable. The frequency is
/// reported as ω = −Im(Ċ/C) so that ω = Δ₀ in the absence of a photon.
pub fn compute_rates(c: &MapCoefficients, eps_sing: f64) -> GeneratorRates {
    let db_over_b = c.drive_b / c.b;
    let dc_over_c = c.drive_c / c.c;
    let gamma_plus = 2.0 * (c.drive_a - c.a * db_over_b);
    let gamma_minus = 2.0 * c.gamma - 2.0 * db_over_b - gamma_plus;
    let gamma_z = 0.5 * db_over_b - dc_over_c.re;
    let omega = c.delta0 - dc_over_c.im;
    let status = if c.b.abs() < eps_sing {
        RateStatus::NearSingularB
    } else if c.c.norm() < eps_sing {
        RateStatus::NearSingularC
    } else {
        RateStatus::Regular
    };
    GeneratorRates {
        t: c.t,
        gamma_plus,
        gamma_minus,
        gamma_z,
        omega,
        status,
    }
}

pub fn compute_rates_all(coeffs: &[MapCoefficients], eps_sing: f64) -> Vec<GeneratorRates> {
    coeffs.iter().map(|c| compute_rates(c, eps_sing)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationRates {
    pub t: f64,
    pub gamma_longitudinal: f64,
    pub gamma_transversal: f64,
    pub gamma_total: f64,
    pub big_gamma_l: f64,
    pub big_gamma_t: f64,
}

/// Running integrals of a sampled function.
///
/// Each interval is integrated exactly against the cubic through the four
/// nearest samples (fewer when the grid is shorter), using two-point Gauss
/// nodes.
pub fn cumulative_integral(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let m = n.min(4);
    let g = 0.5 / 3f64.sqrt();
    for i in 0..n - 1 {
        let base = i.saturating_sub(1).min(n - m);
        let nodes = &t[base..base + m];
        let vals = &f[base..base + m];
        let interp = |x: f64| -> f64 {
            let mut sum = 0.0;
            for k in 0..m {
                let mut l = 1.0;
                for j in 0..m {
                    if j != k {
                        l *= (x - nodes[j]) / (nodes[k] - nodes[j]);
                    }
                }
                sum += l * vals[k];
            }
            sum
        };
        let (a, b) = (t[i], t[i + 1]);
        let (mid, h) = (0.5 * (a + b), b - a);
        out[i + 1] = out[i] + 0.5 * h * (interp(mid - g * h) + interp(mid + g * h));
    }
    out
}

/// Maximal index ranges of consecutive Regular samples.
pub fn regular_spans(rates: &[GeneratorRates]) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, r) in rates.iter().enumerate() {
        match (r.status.is_regular(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(s..rates.len());
    }
    spans
}

/// γ_L, γ_T, γ_total and the integrals Γ_L, Γ_T from the first sample onward.
pub fn accumulate_relaxation(rates: &[GeneratorRates]) -> Result<Vec<RelaxationRates>> {
    if let Some(bad) = rates.iter().find(|r| !r.status.is_regular()) {
        return Err(Error::SingularSpan { t: bad.t });
    }
    let t: Vec<f64> = rates.iter().map(|r| r.t).collect();
    let gl: Vec<f64> = rates.iter().map(|r| r.gamma_plus + r.gamma_minus).collect();
    let gt: Vec<f64> = rates
        .iter()
        .map(|r| 0.5 * (r.gamma_plus + r.gamma_minus) + 2.0 * r.gamma_z)
        .collect();
    let big_l = cumulative_integral(&t, &gl);
    let big_t = cumulative_integral(&t, &gt);
    Ok(rates
        .iter()
        .enumerate()
        .map(|(i, r)| RelaxationRates {
            t: r.t,
            gamma_longitudinal: gl[i],
            gamma_transversal: gt[i],
            gamma_total: 2.0 * (r.gamma_plus + r.gamma_minus + 2.0 * r.gamma_z),
            big_gamma_l: big_l[i],
            big_gamma_t: big_t[i],
        })
        .collect())
}

/// Whether γ_T ≤ γ_total/2 and γ_L ≤ γ_total/2 hold at this sample.
pub fn semigroup_bound_check(r: &RelaxationRates) -> (bool, bool) {
    let half = 0.5 * r.gamma_total;
    (r.gamma_transversal <= half, r.gamma_longitudinal <= half)
}
