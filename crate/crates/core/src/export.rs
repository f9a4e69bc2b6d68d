//! CSV output with a `# `-prefixed comment header.

use std::io::Write;

use crate::{bloch_determinant, GeneratorRates, MapCoefficients, QubitState};

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "pe", "re_coh", "im_coh"];
pub const COEFFICIENT_HEADER: [&str; 10] = [
    "t", "A", "B", "reC", "imC", "dA", "dB", "re_dC", "im_dC", "detBloch",
];
pub const RATE_HEADER: [&str; 6] = [
    "t",
    "gamma_plus",
    "gamma_minus",
    "gamma_z",
    "omega",
    "status",
];

/// Shortest-form rendering with 12 significant digits, like C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_comments<W: Write>(w: &mut W, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

/// Writes comment lines, a header row and the data rows.
pub fn write_table<W: Write>(
    w: &mut W,
    comments: &[String],
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    write_comments(w, comments)?;
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    csv.write_record(header)?;
    for r in rows {
        csv.write_record(&r)?;
    }
    csv.flush()
}

pub fn write_trajectory<W: Write>(
    w: &mut W,
    comments: &[String],
    times: &[f64],
    states: &[QubitState],
) -> std::io::Result<()> {
    let rows = times.iter().zip(states).map(|(t, s)| {
        vec![
            fmt_g(*t),
            fmt_g(s.pe),
            fmt_g(s.coherence.re),
            fmt_g(s.coherence.im),
        ]
    });
    write_table(w, comments, &TRAJECTORY_HEADER, rows)
}

pub fn write_coefficients<W: Write>(
    w: &mut W,
    comments: &[String],
    coeffs: &[MapCoefficients],
) -> std::io::Result<()> {
    let rows = coeffs.iter().map(|c| {
        [
            c.t,
            c.a,
            c.b,
            c.c.re,
            c.c.im,
            c.da,
            c.db,
            c.dc.re,
            c.dc.im,
            bloch_determinant(c),
        ]
        .iter()
        .map(|v| fmt_g(*v))
        .collect()
    });
    write_table(w, comments, &COEFFICIENT_HEADER, rows)
}

/// Rate samples with a non-regular status are written as empty fields.
pub fn write_rates<W: Write>(
    w: &mut W,
    comments: &[String],
    rates: &[GeneratorRates],
) -> std::io::Result<()> {
    let rows = rates.iter().map(|r| {
        let mut row = vec![fmt_g(r.t)];
        for v in [r.gamma_plus, r.gamma_minus, r.gamma_z, r.omega] {
            row.push(if r.status.is_regular() {
                fmt_g(v)
            } else {
                String::new()
            });
        }
        row.push(r.status.code().to_string());
        row
    });
    write_table(w, comments, &RATE_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{compute_rates, PhysParams, RateStatus};

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(123456.789), "123456.789");
        assert_eq!(fmt_g(1e-7), "1e-07");
        assert_eq!(fmt_g(-3.25e-12), "-3.25e-12");
        assert_eq!(fmt_g(1e15), "1e+15");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(std::f64::consts::E), "2.71828182846");
        let samples = [1.0 / 7.0, 2e-300, 6.02214076e23, -0.999999999999951];
        for x in samples {
            let back: f64 = fmt_g(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn rates_csv_masks_singular_samples() {
        let p = PhysParams::new(1.0, 1.0, 0.0).unwrap();
        let mut r = vec![compute_rates(&MapCoefficients::semigroup(0.0, &p), 1e-9)];
        let mut s = r[0];
        s.t = 0.5;
        s.status = RateStatus::NearSingularC;
        r.push(s);
        let mut buf = Vec::new();
        write_rates(&mut buf, &["note".into()], &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# note\nt,gamma_plus,gamma_minus,gamma_z,omega,status\n0,0,2,0,0,R\n0.5,,,,,SC\n"
        );
    }
}
