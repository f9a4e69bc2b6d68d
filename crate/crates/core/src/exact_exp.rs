//! Closed forms for the exponential profile ξ(t) = √(αΓ)·e^{−αΓt/2}.

use crate::{
    dynmap::CoefficientSource, Error, GeneratorRates, MapCoefficients, PhysParams, RateStatus,
    Result, C64, DEFAULT_EPS_SING,
};

/// Below this distance from α = 1 the α = 1 coefficient formulas are used.
pub const ALPHA_ONE_BRANCH: f64 = 1e-9;
/// Same for the rate formulas, whose α ≠ 1 denominators vanish like (α − 1).
pub const ALPHA_ONE_RATE_BRANCH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpParams {
    pub base: PhysParams,
    pub alpha: f64,
}

impl ExpParams {
    pub fn new(base: PhysParams, alpha: f64) -> Result<Self> {
        base.validate()?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        Ok(ExpParams { base, alpha })
    }
}

/// −expm1(−x)/x, continuous at 0.
fn phi(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

fn cexp_m1(z: C64) -> C64 {
    let s = (0.5 * z.im).sin();
    C64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * s * s,
        z.re.exp() * z.im.sin(),
    )
}

/// (e^z − 1)/z, continuous at 0.
fn phi_plus(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        C64::new(1.0, 0.0) + z * 0.5 + z * z / 6.0 + z * z * z / 24.0
    } else {
        cexp_m1(z) / z
    }
}

/// Driven derivative parts from the closed-form inner integrals J and K.
fn drives(t: f64, p: &ExpParams) -> (f64, f64, C64) {
    let g = p.base.gamma_total;
    let d = p.base.delta0;
    let al = p.alpha;
    let kg = p.base.gamma1();
    let amp = (al * g).sqrt();
    let xi = amp * (-0.5 * al * g * t).exp();
    let lam_j = C64::new(0.5 * (1.0 - al) * g, -d);
    let lam_k = C64::new(-0.5 * (1.0 + al) * g, -d);
    let j = phi_plus(lam_j * t) * (amp * t);
    let k = phi_plus(lam_k * t) * (amp * t);
    let drive_a = 2.0 * kg * (C64::new(-0.5 * g * t, -d * t).exp() * j.conj()).re * xi;
    let drive_b = -4.0 * kg * xi * (C64::new(-0.5 * g * t, d * t).exp() * k).re;
    let drive_c = j * (-2.0 * kg * (-g * t).exp() * xi);
    (drive_a, drive_b, drive_c)
}

fn finish(t: f64, a: f64, b: f64, c: C64, p: &ExpParams) -> MapCoefficients {
    let (da, db, dc) = drives(t, p);
    MapCoefficients::from_drive(t, a, b, c, da, db, dc, &p.base)
}

/// Map coefficients at time `t`, choosing the off-resonant, resonant or
/// α = 1 closed form.
pub fn exp_coefficients(t: f64, p: &ExpParams) -> MapCoefficients {
    if p.base.delta0 != 0.0 {
        exp_coefficients_off_resonant(t, p)
    } else if (p.alpha - 1.0).abs() < ALPHA_ONE_BRANCH {
        exp_coefficients_alpha_one(t, p)
    } else {
        exp_coefficients_resonant(t, p)
    }
}

/// The general closed forms, valid whenever (α, Δ₀) ≠ (1, 0).
pub fn exp_coefficients_off_resonant(t: f64, p: &ExpParams) -> MapCoefficients {
    let g = p.base.gamma_total;
    let d = p.base.delta0;
    let al = p.alpha;
    let k = p.base.kappa;
    let e = |r: f64| (r * g * t).exp();
    let den_minus = (1.0 - al).powi(2) * g * g + 4.0 * d * d;
    let den_plus = (1.0 + al).powi(2) * g * g + 4.0 * d * d;
    let (sn, cs) = (d * t).sin_cos();

    let a = 4.0 * k * al * g * g / den_minus * (e(-1.0) - 2.0 * e(-0.5 * (1.0 + al)) * cs + e(-al));

    let inner = ((1.0 - al * al) * g * g - 4.0 * d * d) * (e(-0.5 * (1.0 + al)) * cs - e(-1.0))
        + 4.0 * d * g * e(-0.5 * (1.0 + al)) * sn;
    let b = e(-1.0)
        - 8.0 * k * g / den_plus
            * ((1.0 + al) * g * (e(-1.0 - al) - e(-1.0)) + 2.0 * al * g / den_minus * inner);

    let rot = C64::new(-0.5 * g * t, -d * t).exp();
    let den_c = C64::new(g, -2.0 * d).powi(2) - al * al * g * g;
    let bracket = C64::new((1.0 + al) * g, -2.0 * d) * (rot - rot * e(-al))
        + (e(-(2.0 + al) / 2.0) - rot) * (2.0 * al * g);
    let c = rot - bracket * (4.0 * k * g) / den_c;
    finish(t, a, b, c, p)
}

/// Resonant closed forms (Δ₀ = 0, α ≠ 1), arranged to stay accurate near α = 1
/// and free of growing exponentials at large t.
pub fn exp_coefficients_resonant(t: f64, p: &ExpParams) -> MapCoefficients {
    let g = p.base.gamma_total;
    let al = p.alpha;
    let k = p.base.kappa;
    let e = |r: f64| (r * g * t).exp();
    let x = 0.5 * (al - 1.0) * g * t;
    let near_one = (al - 1.0).abs() < 0.5;

    let a = if near_one {
        k * al * (g * t).powi(2) * e(-1.0) * phi(x).powi(2)
    } else {
        4.0 * k * al / (al - 1.0).powi(2) * (e(-0.5) * -(-x).exp_m1()).powi(2)
    };
    let b = if near_one {
        e(-1.0) * (1.0 - 4.0 * k * g * t * phi(x))
            + 8.0 * k / (al + 1.0) * e(-0.5 * (1.0 + al)) * -(-0.5 * (1.0 + al) * g * t).exp_m1()
    } else {
        16.0 * k * al / (al * al - 1.0) * e(-0.5 * (1.0 + al))
            + (1.0 - 8.0 * k / (al - 1.0)) * e(-1.0)
            - 8.0 * k / (al + 1.0) * e(-(1.0 + al))
    };
    let c = (1.0 - 4.0 * k / (al + 1.0)) * e(-0.5)
        + 4.0 * k / (al + 1.0) * e(-(1.0 + 0.5 * al))
        + 2.0 * k * g * t * e(-(1.0 + 0.5 * al)) * phi(x);
    finish(t, a, b, C64::new(c, 0.0), p)
}

/// Resonant closed forms exactly as printed (α ≠ 1); used to check the
/// rearranged evaluation.
pub fn exp_coefficients_resonant_printed(t: f64, p: &ExpParams) -> MapCoefficients {
    let g = p.base.gamma_total;
    let al = p.alpha;
    let k = p.base.kappa;
    let e = |r: f64| (r * g * t).exp();
    let a = 4.0 * k * al / (1.0 - al).powi(2) * (e(-0.5) - e(-0.5 * al)).powi(2);
    let b = e(-(1.0 + al)) / (al * al - 1.0)
        * (16.0 * k * al * e(0.5 * (1.0 + al)) + (al * al - 8.0 * k * (1.0 + al) - 1.0) * e(al)
            - 8.0 * k * (al - 1.0));
    let c = e(-(1.0 + al)) / (al * al - 1.0)
        * ((1.0 - al) * (4.0 * k - al - 1.0) * e(al + 0.5) - 4.0 * k * (1.0 + al) * e(0.5)
            + 8.0 * k * al * e(0.5 * al));
    finish(t, a, b, C64::new(c, 0.0), p)
}

/// Resonant closed forms at α = 1.
pub fn exp_coefficients_alpha_one(t: f64, p: &ExpParams) -> MapCoefficients {
    let g = p.base.gamma_total;
    let k = p.base.kappa;
    let decay = (-g * t).exp();
    let a = k * g * g * t * t * decay;
    let b = decay * (1.0 - 4.0 * k * g * (t + (decay - 1.0) / g));
    let c = (-0.5 * g * t).exp() * (1.0 - 2.0 * k * g * (-t * decay - (decay - 1.0) / g));
    let q = ExpParams { alpha: 1.0, ..*p };
    finish(t, a, b, C64::new(c, 0.0), &q)
}

/// Closed-form resonant rates. Exponentials in each quotient are scaled by the
/// fastest-growing term before summing.
pub fn exp_rates_resonant(t: f64, p: &ExpParams) -> GeneratorRates {
    let g = p.base.gamma_total;
    let al = p.alpha;
    let k = p.base.kappa;
    let u = g * t;
    let (gp, gm, gz) = if (al - 1.0).abs() < ALPHA_ONE_RATE_BRANCH {
        let em = (-u).exp();
        let gp = 4.0
            * g
            * g
            * k
            * t
            * (2.0 * k * (u + 2.0) * em * em + em * (2.0 * k * (u - 2.0) - 1.0))
            / (4.0 * k * em + (4.0 * k * (u - 1.0) - 1.0));
        let gm = -gp
            + 2.0 * g * (8.0 * k * em + 4.0 * k * (u - 2.0) - 1.0)
                / (4.0 * k * em + 4.0 * k * (u - 1.0) - 1.0);
        let gz = -0.25 * (gp + gm)
            + 0.5 * g * (4.0 * k * u * em / (2.0 * k * (1.0 + u) * em + (1.0 - 2.0 * k)) + 1.0);
        (gp, gm, gz)
    } else {
        let m = al.max(0.5 * (al + 1.0));
        let s = |r: f64| ((r - m) * u).exp();
        let x = 0.5 * (al - 1.0) * u;
        let pre = 8.0 * al * g * k * (-0.5 * u).exp() * -(-x).exp_m1() / (al - 1.0);
        let sinh = |r: f64| 0.5 * (s(r) - s(-r));
        let cosh = |r: f64| 0.5 * (s(r) + s(-r));
        let num = (al * al - 16.0 * k - 1.0) * sinh(0.5 * al)
            + (al * al - 1.0) * cosh(0.5 * al)
            + 16.0 * al * k * sinh(0.5);
        let den = 8.0 * k * (1.0 - al) * s(0.0)
            + 16.0 * al * k * s(0.5 * (al + 1.0))
            + (al + 1.0) * (al - 8.0 * k - 1.0) * s(al);
        let gp = pre * num / den;
        let den2 = 8.0 * k * (1.0 - al) * s(0.0)
            + 8.0 * al * k * s(0.5 * (al + 1.0))
            + (al - 8.0 * k - 1.0) * s(al);
        let gm = -gp + 2.0 * (al + 1.0) * g * den2 / den;
        let mz = al + 0.5;
        let sz = |r: f64| ((r - mz) * u).exp();
        let nz = -8.0 * al * (al + 2.0) * k * sz(0.5 * al)
            + 4.0 * (al + 1.0) * (2.0 * al + 1.0) * k * sz(0.5)
            - (al - 1.0) * (al - 4.0 * k + 1.0) * sz(al + 0.5);
        let dz = 16.0 * al * k * sz(0.5 * al) - 8.0 * (al + 1.0) * k * sz(0.5)
            + 2.0 * (al - 1.0) * (al - 4.0 * k + 1.0) * sz(al + 0.5);
        let gz = -0.25 * (gp + gm) - g * nz / dz;
        (gp, gm, gz)
    };
    let c = exp_coefficients(
        t,
        &ExpParams {
            base: PhysParams {
                delta0: 0.0,
                ..p.base
            },
            ..*p
        },
    );
    let status = if c.b.abs() < DEFAULT_EPS_SING {
        RateStatus::NearSingularB
    } else if c.c.norm() < DEFAULT_EPS_SING {
        RateStatus::NearSingularC
    } else {
        RateStatus::Regular
    };
    GeneratorRates {
        t,
        gamma_plus: gp,
        gamma_minus: gm,
        gamma_z: gz,
        omega: 0.0,
        status,
    }
}

/// Smallest α for which the resonant map is invertible.
pub fn invertibility_threshold(kappa: f64) -> f64 {
    8.0 * kappa + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxExcitation {
    pub p_max: f64,
    pub t_star: f64,
    pub alpha_star: f64,
    pub delta_star: f64,
}

/// Largest excited population reachable from the ground state with an
/// exponential pulse, and where it is attained.
pub fn max_excitation(kappa: f64, gamma: f64) -> MaxExcitation {
    MaxExcitation {
        p_max: 4.0 * kappa * (-2f64).exp(),
        t_star: 2.0 / gamma,
        alpha_star: 1.0,
        delta_star: 0.0,
    }
}

/// Closed-form coefficients on a grid, refinable at arbitrary times.
#[derive(Debug, Clone)]
pub struct ExpTrajectory {
    pub params: ExpParams,
    samples: Vec<MapCoefficients>,
}

impl ExpTrajectory {
    pub fn new(params: ExpParams, grid: &[f64]) -> Self {
        ExpTrajectory {
            params,
            samples: grid.iter().map(|&t| exp_coefficients(t, &params)).collect(),
        }
    }
}

impl CoefficientSource for ExpTrajectory {
    fn samples(&self) -> &[MapCoefficients] {
        &self.samples
    }

    fn at(&self, t: f64) -> Result<MapCoefficients> {
        Ok(exp_coefficients(t, &self.params))
    }

    fn real_c(&self) -> bool {
        self.params.base.delta0 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(kappa: f64, alpha: f64, delta0: f64) -> ExpParams {
        ExpParams::new(PhysParams::new(1.0, kappa, delta0).unwrap(), alpha).unwrap()
    }

    #[test]
    fn identity_at_zero() {
        for (k, a, d) in [
            (1.0, 1.0, 0.0),
            (0.5, 2.0, 0.0),
            (0.25, 0.5, 3.0),
            (1.0, 1.0, 1.5),
        ] {
            let c = exp_coefficients(0.0, &ep(k, a, d));
            assert!(c.a.abs() < 1e-15 && (c.b - 1.0).abs() < 1e-15 && (c.c - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn known_values() {
        let c = exp_coefficients(2.0, &ep(1.0, 1.0, 0.0));
        assert!((c.a - 4.0 * (-2f64).exp()).abs() < 1e-15);
        let c = exp_coefficients(1.0, &ep(1.0, 2.0, 0.0));
        assert!((c.a - 0.455_635_233).abs() < 1e-9);
    }

    #[test]
    fn rearranged_resonant_matches_printed() {
        for al in [0.3, 0.7, 1.2, 1.5, 2.0, 9.5] {
            let p = ep(0.8, al, 0.0);
            for i in 0..=40 {
                let t = i as f64 * 0.5;
                let x = exp_coefficients_resonant(t, &p);
                let y = exp_coefficients_resonant_printed(t, &p);
                assert!(
                    (x.a - y.a).abs() < 1e-12
                        && (x.b - y.b).abs() < 1e-12
                        && (x.c - y.c).norm() < 1e-12,
                    "α={al} t={t}"
                );
            }
        }
    }

    #[test]
    fn off_resonant_reduces_to_resonant() {
        for al in [0.5, 1.5, 9.5] {
            let p = ep(1.0, al, 0.0);
            for i in 0..=30 {
                let t = i as f64 * 0.5;
                let x = exp_coefficients_off_resonant(t, &p);
                let y = exp_coefficients_resonant(t, &p);
                assert!(
                    (x.a - y.a).abs() < 1e-12
                        && (x.b - y.b).abs() < 1e-12
                        && (x.c - y.c).norm() < 1e-12
                );
            }
        }
    }

    #[test]
    fn continuity_across_alpha_one() {
        for eps in [1e-4, 1e-6, 1e-8] {
            for i in 0..=200 {
                let t = i as f64 * 0.1;
                let one = exp_coefficients_alpha_one(t, &ep(1.0, 1.0, 0.0));
                for al in [1.0 - eps, 1.0 + eps] {
                    let x = exp_coefficients(t, &ep(1.0, al, 0.0));
                    let tol = 10.0 * eps;
                    assert!(
                        (x.a - one.a).abs() < tol
                            && (x.b - one.b).abs() < tol
                            && (x.c - one.c).norm() < tol
                    );
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for (k, a, d) in [
            (1.0, 1.5, 3.0),
            (0.5, 0.5, 0.0),
            (1.0, 1.0, 0.0),
            (0.25, 9.5, 1.5),
        ] {
            let p = ep(k, a, d);
            let h = 1e-5;
            for t in [0.3, 1.0, 2.5, 6.0] {
                let c = exp_coefficients(t, &p);
                let (lo, hi) = (exp_coefficients(t - h, &p), exp_coefficients(t + h, &p));
                assert!((c.da - (hi.a - lo.a) / (2.0 * h)).abs() < 1e-8);
                assert!((c.db - (hi.b - lo.b) / (2.0 * h)).abs() < 1e-8);
                assert!((c.dc - (hi.c - lo.c) / (2.0 * h)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn threshold_and_max() {
        assert_eq!(invertibility_threshold(1.0), 9.0);
        assert_eq!(invertibility_threshold(0.0), 1.0);
        assert_eq!(invertibility_threshold(0.5), 5.0);
        let m = max_excitation(1.0, 1.0);
        assert!((m.p_max - 0.541_341).abs() < 1e-6);
        assert_eq!((m.t_star, m.alpha_star, m.delta_star), (2.0, 1.0, 0.0));
        assert!((max_excitation(0.5, 1.0).p_max - 0.270_671).abs() < 1e-6);
        assert_eq!(max_excitation(0.0, 1.0).p_max, 0.0);
    }

    #[test]
    fn closed_form_rates_match_coefficient_rates() {
        for al in [0.5, 1.0, 1.5, 9.5] {
            let p = ep(1.0, al, 0.0);
            for i in 1..=150 {
                let t = i as f64 * 0.1;
                let c = exp_coefficients(t, &p);
                if c.b.abs() < 1e-3 || c.c.norm() < 1e-3 {
                    continue;
                }
                let r = crate::compute_rates(&c, DEFAULT_EPS_SING);
                let e = exp_rates_resonant(t, &p);
                let scale = 1.0 + r.gamma_plus.abs() + r.gamma_minus.abs() + r.gamma_z.abs();
                for (x, y) in [
                    (r.gamma_plus, e.gamma_plus),
                    (r.gamma_minus, e.gamma_minus),
                    (r.gamma_z, e.gamma_z),
                ] {
                    assert!((x - y).abs() < 1e-6 * scale, "α={al} t={t}: {x} vs {y}");
                }
            }
        }
    }
}
