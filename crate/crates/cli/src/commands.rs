use std::io::Write;
use std::path::{Path, PathBuf};

use photonq::exact_exp::exp_coefficients;
use photonq::export::{fmt_g, write_coefficients, write_rates, write_table, write_trajectory};
use photonq::validation::{self, Level};
use photonq::{
    apply_map, compute_rates_all, evaluate_witnesses, find_singularities, make_optimal_pulse,
    solve_coefficients, solve_hierarchy, uniform_grid, CoefficientSolution, ExpParams,
    GeneratorRates, ProfileSpec, WitnessOptions, WitnessReport,
};
use serde::Serialize;

use crate::config::Scenario;
use crate::{sink, CliError, Output};

fn oracle_params(sc: &Scenario) -> Result<ExpParams, CliError> {
    match sc.profile {
        ProfileSpec::Exp(alpha) => Ok(ExpParams::new(sc.params, alpha)?),
        _ => Err(CliError::config(
            "oracle",
            "closed forms exist only for exp:ALPHA profiles",
        )),
    }
}

pub fn solve(sc: &Scenario) -> Result<CoefficientSolution, CliError> {
    Ok(solve_coefficients(
        &sc.params,
        &sc.photon_profile()?,
        &sc.grid(),
        &sc.solver,
    )?)
}

pub fn witness_report(
    sol: &CoefficientSolution,
    rates: &[GeneratorRates],
    tol: f64,
) -> Result<WitnessReport, CliError> {
    let opts = WitnessOptions {
        tol,
        ..WitnessOptions::for_gamma(sol.params().gamma_total)
    };
    Ok(evaluate_witnesses(rates, &find_singularities(sol)?, &opts))
}

#[derive(Serialize)]
struct WitnessDocument<'a> {
    header: Vec<String>,
    #[serde(flatten)]
    report: &'a WitnessReport,
}

pub fn write_witness_json(
    w: &mut dyn Write,
    header: Vec<String>,
    report: &WitnessReport,
) -> Result<(), CliError> {
    let doc = WitnessDocument { header, report };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w, "{text}")?;
    Ok(())
}

fn sibling(out: &Path, kind: &str, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{kind}.{ext}"))
}

pub fn simulate(
    sc: &Scenario,
    with: &[Output],
    out: Option<&Path>,
    oracle: bool,
) -> Result<(), CliError> {
    let grid = sc.grid();
    let profile = sc.photon_profile()?;
    let extra: Vec<Output> = with
        .iter()
        .copied()
        .filter(|o| *o != Output::Trajectory)
        .collect();
    if !extra.is_empty() && out.is_none() {
        return Err(CliError::config("with", "extra outputs need --out"));
    }
    let exp = if oracle {
        Some(oracle_params(sc)?)
    } else {
        None
    };
    let states = solve_hierarchy(&sc.initial, &sc.params, &profile, &grid, &sc.solver)?;
    let header = sc.header("simulate");
    let mut w = sink(out)?;
    write_trajectory(&mut w, &header, &grid, &states)?;
    w.flush()?;

    if let Some(p) = exp {
        let worst = grid
            .iter()
            .zip(&states)
            .map(|(&t, s)| apply_map(&exp_coefficients(t, &p), &sc.initial).trace_distance(s))
            .fold(0.0, f64::max);
        eprintln!("oracle: max trace distance to the closed-form map {worst:.3e}");
    }

    if let Some(out) = out {
        if extra.is_empty() {
            return Ok(());
        }
        let sol = solve(sc)?;
        let rates = compute_rates_all(sol.coefficients(), photonq::DEFAULT_EPS_SING);
        for kind in extra {
            match kind {
                Output::Coefficients => {
                    let mut w = sink(Some(&sibling(out, "coefficients", "csv")))?;
                    write_coefficients(&mut w, &sc.header("coefficients"), sol.coefficients())?;
                    w.flush()?;
                }
                Output::Rates => {
                    let mut w = sink(Some(&sibling(out, "rates", "csv")))?;
                    write_rates(&mut w, &sc.header("rates"), &rates)?;
                    w.flush()?;
                }
                Output::Witness => {
                    let report = witness_report(&sol, &rates, 1e-8)?;
                    let mut w = sink(Some(&sibling(out, "witness", "json")))?;
                    write_witness_json(&mut w, sc.header("witness"), &report)?;
                    w.flush()?;
                }
                Output::Trajectory => {}
            }
        }
    }
    Ok(())
}

pub fn coefficients(sc: &Scenario, out: Option<&Path>, oracle: bool) -> Result<(), CliError> {
    let exp = if oracle {
        Some(oracle_params(sc)?)
    } else {
        None
    };
    let sol = solve(sc)?;
    let mut w = sink(out)?;
    write_coefficients(&mut w, &sc.header("coefficients"), sol.coefficients())?;
    w.flush()?;
    if let Some(p) = exp {
        let worst = sol
            .coefficients()
            .iter()
            .map(|c| {
                let e = exp_coefficients(c.t, &p);
                (c.a - e.a)
                    .abs()
                    .max((c.b - e.b).abs())
                    .max((c.c - e.c).norm())
            })
            .fold(0.0, f64::max);
        eprintln!("oracle: max |Δ| of A, B, C against the closed forms {worst:.3e}");
    }
    Ok(())
}

pub fn rates(
    sc: &Scenario,
    eps_sing: f64,
    out: Option<&Path>,
    oracle: bool,
) -> Result<(), CliError> {
    if !(eps_sing > 0.0) {
        return Err(CliError::config(
            "eps_sing",
            format!("must be > 0, got {eps_sing}"),
        ));
    }
    let exp = if oracle {
        Some(oracle_params(sc)?)
    } else {
        None
    };
    let sol = solve(sc)?;
    let rates = compute_rates_all(sol.coefficients(), eps_sing);
    let mut header = sc.header("rates");
    header[0].push_str(&format!(" --eps-sing {}", fmt_g(eps_sing)));
    let mut w = sink(out)?;
    write_rates(&mut w, &header, &rates)?;
    w.flush()?;
    if let Some(p) = exp {
        let closed: Vec<_> = sol
            .coefficients()
            .iter()
            .map(|c| exp_coefficients(c.t, &p))
            .collect();
        let reference = compute_rates_all(&closed, eps_sing);
        let worst = rates
            .iter()
            .zip(&reference)
            .filter(|(r, q)| r.status.is_regular() && q.status.is_regular())
            .map(|(r, q)| {
                let scale = 1.0
                    + q.gamma_plus
                        .abs()
                        .max(q.gamma_minus.abs())
                        .max(q.gamma_z.abs());
                (r.gamma_plus - q.gamma_plus)
                    .abs()
                    .max((r.gamma_minus - q.gamma_minus).abs())
                    .max((r.gamma_z - q.gamma_z).abs())
                    .max((r.omega - q.omega).abs())
                    / scale
            })
            .fold(0.0, f64::max);
        eprintln!("oracle: max scaled rate deviation against the closed forms {worst:.3e}");
    }
    Ok(())
}

pub fn witness(sc: &Scenario, eps_sing: f64, tol: f64, out: Option<&Path>) -> Result<(), CliError> {
    if !(eps_sing > 0.0) {
        return Err(CliError::config(
            "eps_sing",
            format!("must be > 0, got {eps_sing}"),
        ));
    }
    if !(tol >= 0.0) {
        return Err(CliError::config("tol", format!("must be >= 0, got {tol}")));
    }
    let sol = solve(sc)?;
    let rates = compute_rates_all(sol.coefficients(), eps_sing);
    let report = witness_report(&sol, &rates, tol)?;
    let mut header = sc.header("witness");
    header[0].push_str(&format!(
        " --eps-sing {} --tol {}",
        fmt_g(eps_sing),
        fmt_g(tol)
    ));
    let mut w = sink(out)?;
    write_witness_json(&mut w, header, &report)?;
    w.flush()?;
    Ok(())
}

pub fn optimal_pulse(sc: &Scenario, horizon: f64, out: Option<&Path>) -> Result<(), CliError> {
    let profile = make_optimal_pulse(horizon, &sc.params)
        .map_err(|_| CliError::config("horizon", format!("must be > 0, got {horizon}")))?;
    let pulse = Scenario {
        profile: ProfileSpec::Optimal(horizon),
        t_max: horizon,
        ..sc.clone()
    };
    let mut header = pulse.header("optimal-pulse");
    header[0].push_str(&format!(" --horizon {}", fmt_g(horizon)));
    let rows = uniform_grid(horizon, sc.points).into_iter().map(|t| {
        let v = profile.eval(t);
        vec![fmt_g(t), fmt_g(v.re), fmt_g(v.im)]
    });
    let mut w = sink(out)?;
    write_table(&mut w, &header, &["t", "re", "im"], rows)?;
    w.flush()?;
    let target = sc.params.kappa * (1.0 - (-sc.params.gamma_total * horizon).exp());
    eprintln!(
        "P_e at t = {} from the ground state: {}",
        fmt_g(horizon),
        fmt_g(target)
    );
    Ok(())
}

pub fn validate(level: Level, out: Option<&Path>) -> Result<(), CliError> {
    let outcomes = validation::run_all(level);
    let mut w = sink(out)?;
    for o in &outcomes {
        writeln!(w, "{o}")?;
    }
    let failed = outcomes
        .iter()
        .filter(|o| !o.passed && o.known_failure.is_none())
        .count();
    let known = outcomes
        .iter()
        .filter(|o| !o.passed && o.known_failure.is_some())
        .count();
    writeln!(
        w,
        "{} checks, {failed} failed, {known} known failure(s)",
        outcomes.len()
    )?;
    w.flush()?;
    if validation::all_passed(&outcomes) {
        Ok(())
    } else {
        Err(CliError::Validation)
    }
}
