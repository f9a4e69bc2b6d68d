//! Divisibility and non-Markovianity witnesses over a rate trajectory.

use serde::{Deserialize, Serialize};

use crate::{GeneratorRates, MapCoefficients, Singularity, SingularityKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOptions {
    /// Slack on every rate inequality.
    pub tol: f64,
    /// Samples at or before this time are ignored by the eternal test.
    pub t_burn: f64,
    pub sign_product_tol: f64,
}

impl WitnessOptions {
    pub fn for_gamma(gamma: f64) -> Self {
        WitnessOptions {
            tol: 1e-8,
            t_burn: 1e-3 / gamma,
            sign_product_tol: 1e-9,
        }
    }
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions::for_gamma(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: bool,
    /// Maximal runs of failing samples, as `[first, last]` times.
    pub violations: Vec<[f64; 2]>,
    /// Smallest value of the governing expression over the evaluated samples.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_margin: Option<f64>,
}

impl Verdict {
    fn from_flags(times: &[f64], flags: &[Option<bool>], min_margin: Option<f64>) -> Self {
        let mut violations = Vec::new();
        let mut run: Option<[f64; 2]> = None;
        for (t, f) in times.iter().zip(flags) {
            if *f == Some(false) {
                run = Some(match run {
                    Some([a, _]) => [a, *t],
                    None => [*t, *t],
                });
            } else if let Some(r) = run.take() {
                violations.push(r);
            }
        }
        violations.extend(run);
        Verdict {
            verdict: violations.is_empty(),
            violations,
            min_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularTime {
    pub t: f64,
    pub which: SingularityKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub cp_divisible: Verdict,
    pub p_divisible: Verdict,
    pub blp: Verdict,
    pub geometric: Verdict,
    pub eternal_nm: Verdict,
    pub sign_product_ok: Verdict,
    pub singular_times: Vec<SingularTime>,
    /// Runs of samples excluded from every verdict because the rates are singular there.
    pub masked: Vec<[f64; 2]>,
    /// Set when the map is not invertible somewhere; verdicts then only cover the regular spans.
    pub caveat: bool,
}

fn fold_min(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.min(v)))
}

/// Applies the rate criteria sample by sample.
///
/// A sample that satisfies a stronger criterion is counted as satisfying the
/// weaker ones, so the verdicts always respect CP ⇒ P ⇒ BLP ⇒ geometric.
pub fn evaluate_witnesses(
    rates: &[GeneratorRates],
    singular: &[Singularity],
    opts: &WitnessOptions,
) -> WitnessReport {
    let tol = opts.tol;
    let times: Vec<f64> = rates.iter().map(|r| r.t).collect();
    let n = rates.len();
    let mut cp = vec![None; n];
    let mut p = vec![None; n];
    let mut blp = vec![None; n];
    let mut geo = vec![None; n];
    let mut eternal = vec![None; n];
    let mut sign = vec![None; n];
    let mut masked = vec![None; n];
    let (mut m_cp, mut m_p, mut m_blp, mut m_geo, mut m_et, mut m_sign) =
        (None, None, None, None, None, None);

    for (i, r) in rates.iter().enumerate() {
        if !r.status.is_regular() {
            masked[i] = Some(false);
            continue;
        }
        let (gp, gm, gz) = (r.gamma_plus, r.gamma_minus, r.gamma_z);
        let p_mix = (gp.max(0.0) * gm.max(0.0)).sqrt() + 2.0 * gz;
        let blp_val = (gp + gm).min(gp + gm + 4.0 * gz);
        let geo_val = gp + gm + 2.0 * gz;

        let c = r.min_rate() >= -tol;
        let pp = c || (gp >= -tol && gm >= -tol && p_mix >= -tol);
        let b = pp || blp_val >= -tol;
        let g = b || geo_val >= -tol;
        cp[i] = Some(c);
        p[i] = Some(pp);
        blp[i] = Some(b);
        geo[i] = Some(g);
        m_cp = fold_min(m_cp, r.min_rate());
        m_p = fold_min(m_p, gp.min(gm).min(p_mix));
        m_blp = fold_min(m_blp, blp_val);
        m_geo = fold_min(m_geo, geo_val);

        if r.t > opts.t_burn {
            eternal[i] = Some(r.min_rate() < 0.0);
            m_et = Some(m_et.map_or(r.min_rate(), |a: f64| a.max(r.min_rate())));
        }
        let prod = gp * gz;
        sign[i] = Some(prod <= opts.sign_product_tol);
        m_sign = fold_min(m_sign, -prod);
    }

    let eternal_samples = eternal.iter().filter(|e| e.is_some()).count();
    let mut eternal_nm = Verdict::from_flags(&times, &eternal, m_et);
    eternal_nm.verdict &= eternal_samples > 0;

    let masked = Verdict::from_flags(&times, &masked, None).violations;
    WitnessReport {
        cp_divisible: Verdict::from_flags(&times, &cp, m_cp),
        p_divisible: Verdict::from_flags(&times, &p, m_p),
        blp: Verdict::from_flags(&times, &blp, m_blp),
        geometric: Verdict::from_flags(&times, &geo, m_geo),
        eternal_nm,
        sign_product_ok: Verdict::from_flags(&times, &sign, m_sign),
        singular_times: singular
            .iter()
            .map(|s| SingularTime {
                t: s.t,
                which: s.which,
            })
            .collect(),
        caveat: !singular.is_empty() || !masked.is_empty(),
        masked,
    }
}

/// BLP from the signs of Ḃ·B and Re(Ċ·C̄), without dividing by B or C.
pub fn blp_directly_from_coeffs(coeffs: &[MapCoefficients], tol: f64) -> Verdict {
    let times: Vec<f64> = coeffs.iter().map(|c| c.t).collect();
    let flags: Vec<Option<bool>> = coeffs
        .iter()
        .map(|c| {
            let b_ok = c.db * c.b <= 0.5 * tol * c.b * c.b;
            let c_ok = (c.dc * c.c.conj()).re <= 0.25 * tol * c.c.norm_sqr();
            Some(b_ok && c_ok)
        })
        .collect();
    Verdict::from_flags(&times, &flags, None)
}

/// Geometric criterion as monotone decrease of |B·|C|²|.
pub fn geometric_from_determinant(coeffs: &[MapCoefficients], tol: f64) -> Verdict {
    let times: Vec<f64> = coeffs.iter().map(|c| c.t).collect();
    let flags: Vec<Option<bool>> = coeffs
        .iter()
        .map(|c| {
            let det = c.b * c.c.norm_sqr();
            let ddet = c.db * c.c.norm_sqr() + 2.0 * c.b * (c.dc * c.c.conj()).re;
            Some(ddet * det <= tol * det * det)
        })
        .collect();
    Verdict::from_flags(&times, &flags, None)
}
