//! Fixed parameter sets and column layouts for the named figure datasets.

use std::io::Write;
use std::path::Path;

use photonq::export::{fmt_g, write_table};
use photonq::{compute_rates_all, GeneratorRates, MapCoefficients, DEFAULT_EPS_SING};

use crate::commands::solve;
use crate::config::Settings;
use crate::{sink, CliError};

#[derive(Clone, Copy)]
enum Layout {
    Coefficients,
    Rates,
    Magnitudes,
    ShiftedRates,
    Combinations,
}

// name, α, Δ₀, initial P_e, layout
const FIGURES: [(&str, f64, f64, f64, Layout); 11] = [
    ("fig2-left", 9.5, 0.0, 0.5, Layout::Coefficients),
    ("fig2-right", 1.0, 0.0, 0.5, Layout::Coefficients),
    ("fig3-left", 9.5, 0.0, 0.0, Layout::Rates),
    ("fig3-right", 1.0, 0.0, 0.0, Layout::Rates),
    ("multi-0", 1.5, 0.0, 0.0, Layout::Magnitudes),
    ("multi-1.5", 1.5, 1.5, 0.0, Layout::Magnitudes),
    ("multi-2.5", 1.5, 2.5, 0.0, Layout::Magnitudes),
    ("fig4-left", 1.5, 3.0, 0.0, Layout::ShiftedRates),
    ("fig4-right", 1.5, 6.5, 0.0, Layout::ShiftedRates),
    ("fig5-left", 1.5, 3.0, 0.0, Layout::Combinations),
    ("fig5-right", 1.5, 6.5, 0.0, Layout::Combinations),
];

pub fn names() -> Vec<&'static str> {
    FIGURES.iter().map(|f| f.0).collect()
}

fn masked(r: &GeneratorRates, values: &[f64]) -> Vec<String> {
    let mut row = vec![fmt_g(r.t)];
    row.extend(values.iter().map(|v| {
        if r.status.is_regular() {
            fmt_g(*v)
        } else {
            String::new()
        }
    }));
    row.push(r.status.code().to_string());
    row
}

fn rows(
    layout: Layout,
    coeffs: &[MapCoefficients],
    pe0: f64,
) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let rates = compute_rates_all(coeffs, DEFAULT_EPS_SING);
    match layout {
        Layout::Coefficients => (
            vec!["t", "A", "B", "C", "Pe"],
            coeffs
                .iter()
                .map(|c| {
                    [c.t, c.a, c.b, c.c.re, c.a + c.b * pe0]
                        .iter()
                        .map(|v| fmt_g(*v))
                        .collect()
                })
                .collect(),
        ),
        Layout::Magnitudes => (
            vec!["t", "A", "B", "abs_C"],
            coeffs
                .iter()
                .map(|c| {
                    [c.t, c.a, c.b, c.c.norm()]
                        .iter()
                        .map(|v| fmt_g(*v))
                        .collect()
                })
                .collect(),
        ),
        Layout::Rates => (
            vec!["t", "gamma_plus", "gamma_minus", "gamma_z", "status"],
            rates
                .iter()
                .map(|r| masked(r, &[r.gamma_plus, r.gamma_minus, r.gamma_z]))
                .collect(),
        ),
        Layout::ShiftedRates => (
            vec![
                "t",
                "gamma_plus",
                "gamma_minus_minus_2gamma",
                "gamma_z",
                "status",
            ],
            coeffs
                .iter()
                .zip(&rates)
                .map(|(c, r)| masked(r, &[r.gamma_plus, r.gamma_minus - 2.0 * c.gamma, r.gamma_z]))
                .collect(),
        ),
        Layout::Combinations => (
            vec![
                "t",
                "gp_plus_gm",
                "gp_plus_gm_plus_2gz",
                "gp_plus_gm_plus_4gz",
                "status",
            ],
            rates
                .iter()
                .map(|r| {
                    let l = r.gamma_plus + r.gamma_minus;
                    masked(r, &[l, l + 2.0 * r.gamma_z, l + 4.0 * r.gamma_z])
                })
                .collect(),
        ),
    }
}

pub fn run(name: &str, settings: &Settings, out: Option<&Path>) -> Result<(), CliError> {
    let &(_, alpha, delta0, pe0, layout) =
        FIGURES.iter().find(|f| f.0 == name).ok_or_else(|| {
            CliError::config(
                "figure",
                format!("unknown name '{name}' (valid: {})", names().join(", ")),
            )
        })?;
    let caption = Settings {
        gamma: Some(1.0),
        kappa: Some(1.0),
        delta0: Some(delta0),
        profile: Some(format!("exp:{alpha}")),
        pe0: Some(pe0),
        re_coh0: Some(0.0),
        im_coh0: Some(0.0),
        ..Default::default()
    };
    let sc = Settings {
        t_max: settings.t_max,
        points: settings.points,
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        ..caption
    }
    .resolve()?;
    let sol = solve(&sc)?;
    let (header, data) = rows(layout, sol.coefficients(), pe0);
    let mut w = sink(out)?;
    write_table(
        &mut w,
        &sc.header(&format!("figure {name}")),
        &header,
        data.into_iter(),
    )?;
    w.flush()?;
    Ok(())
}
