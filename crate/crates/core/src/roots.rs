//! Scalar bracketing root search and unimodal minimization.

/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign
/// (or one of them zero). Stops when `|f| < value_tol` or the bracket can no
/// longer be split. Returns the final point and its value.
pub fn bisect<F, E>(mut f: F, mut a: f64, mut b: f64, value_tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut fa = f(a)?;
    if fa == 0.0 {
        return Ok((a, fa));
    }
    let fb = f(b)?;
    if fb == 0.0 {
        return Ok((b, fb));
    }
    // Keep the endpoint with the smaller residual as the running answer.
    let mut best = if fa.abs() <= fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m)?;
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm.abs() < value_tol {
            return Ok((m, fm));
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(best)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_min<F, E>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > x_tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn bisect_cubic() {
        let (x, fx) = bisect(
            |x: f64| Ok::<_, Infallible>(x * x * x - 2.0),
            0.0,
            2.0,
            1e-14,
        )
        .unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-13);
        assert!(fx.abs() < 1e-13);
    }

    #[test]
    fn bisect_exact_endpoint() {
        let (x, _) = bisect(|x: f64| Ok::<_, Infallible>(x - 1.0), 1.0, 3.0, 1e-12).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) = golden_min(
            |x: f64| Ok::<_, Infallible>((x - 0.3).powi(2) + 1.0),
            -1.0,
            2.0,
            1e-10,
        )
        .unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
