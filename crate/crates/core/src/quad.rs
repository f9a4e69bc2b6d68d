//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use crate::{Error, Result, C64};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }

    /// Absolute tolerance with an interval budget scaled to the number of breakpoints.
    pub fn with_breaks(tol: f64, n_breaks: usize) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: 4000 + 4 * n_breaks,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[a, b]`, splitting first at every interior point in
/// `breaks` (points where the integrand may have a kink or jump).
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> C64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("quadrature bounds", "must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: C64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts = vec![lo];
    cuts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut panels: Vec<Panel> = cuts.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    loop {
        let value: C64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * value.norm());
        // Panels that cannot be split further in floating point stop the refinement.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let m = 0.5 * (p.a + p.b);
                m > p.a && m < p.b
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        if error <= tol {
            return Ok(QuadResult {
                value: value * sign,
                error,
            });
        }
        match worst {
            Some(i) if panels.len() < opts.max_intervals => {
                let p = panels.swap_remove(i);
                let mid = 0.5 * (p.a + p.b);
                panels.push(gk15(&mut f, p.a, mid));
                panels.push(gk15(&mut f, mid, p.b));
            }
            _ => {
                return Err(Error::QuadratureNonConvergence {
                    estimate: error,
                    tol,
                });
            }
        }
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x| C64::new(f(x), 0.0), a, b, breaks, opts)?;
    Ok((r.value.re, r.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate_real(
            |x| x.powi(9) - 3.0 * x * x,
            0.0,
            2.0,
            &[],
            QuadOptions::absolute(1e-14),
        )
        .unwrap();
        assert!((v - (2f64.powi(10) / 10.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn complex_oscillatory_integrand() {
        // ∫₀^π e^{i 5x} dx = (e^{i5π} − 1)/(5i) = 2i/5
        let r = integrate(
            |x| C64::new(0.0, 5.0 * x).exp(),
            0.0,
            std::f64::consts::PI,
            &[],
            QuadOptions::absolute(1e-13),
        )
        .unwrap();
        assert!((r.value - C64::new(0.0, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn kink_handled_by_breakpoint() {
        let f = |x: f64| (x - 0.3).abs();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        let (v, _) = integrate_real(f, 0.0, 1.0, &[0.3], QuadOptions::absolute(1e-14)).unwrap();
        assert!((v - exact).abs() < 1e-14);
        let (v2, _) = integrate_real(f, 0.0, 1.0, &[], QuadOptions::absolute(1e-11)).unwrap();
        assert!((v2 - exact).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let (v, _) =
            integrate_real(|x| x.exp(), 1.0, 0.0, &[], QuadOptions::absolute(1e-13)).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate_real(|x| (1.0 / x).sin(), 1e-4, 1.0, &[], opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}
