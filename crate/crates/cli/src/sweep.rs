//! Parameter sweeps over one or two settings.

use std::path::Path;

use photonq::export::{fmt_g, write_coefficients, write_rates, write_trajectory};
use photonq::{compute_rates_all, solve_hierarchy, DEFAULT_EPS_SING};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{solve, witness_report, write_witness_json};
use crate::config::{Scenario, Settings, KEYS};
use crate::{CliError, Output};

#[derive(Debug, Clone, PartialEq)]
struct Axis {
    key: String,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let bad = |m: String| CliError::config("vary", m);
    let (key, range) = spec
        .split_once('=')
        .ok_or_else(|| bad(format!("'{spec}': expected KEY=START:STOP:COUNT")))?;
    let key = key.trim().replace('-', "_");
    if key != "alpha" && (key == "profile" || !KEYS.contains(&key.as_str())) {
        return Err(bad(format!("'{key}' cannot be swept")));
    }
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad(format!("'{range}': expected START:STOP:COUNT")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("'{s}' is not a number")))
    };
    let (start, stop) = (num(start)?, num(stop)?);
    let count: usize = count
        .trim()
        .parse()
        .ok()
        .filter(|&c| c >= 1)
        .ok_or_else(|| bad(format!("'{count}': COUNT must be a positive integer")))?;
    let values = if count == 1 {
        vec![start]
    } else {
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect()
    };
    Ok(Axis { key, values })
}

fn apply(base: &Settings, key: &str, v: f64) -> Result<Settings, CliError> {
    let mut s = base.clone();
    if key == "alpha" {
        s.profile = Some(format!("exp:{}", fmt_g(v)));
    } else {
        s.set(key, &fmt_g(v))?;
    }
    Ok(s)
}

fn render(sc: &Scenario, what: Output) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let header = sc.header("sweep");
    match what {
        Output::Trajectory => {
            let grid = sc.grid();
            let states = solve_hierarchy(
                &sc.initial,
                &sc.params,
                &sc.photon_profile()?,
                &grid,
                &sc.solver,
            )?;
            write_trajectory(&mut buf, &header, &grid, &states)?;
        }
        Output::Coefficients => write_coefficients(&mut buf, &header, solve(sc)?.coefficients())?,
        Output::Rates => write_rates(
            &mut buf,
            &header,
            &compute_rates_all(solve(sc)?.coefficients(), DEFAULT_EPS_SING),
        )?,
        Output::Witness => {
            let sol = solve(sc)?;
            let rates = compute_rates_all(sol.coefficients(), DEFAULT_EPS_SING);
            write_witness_json(&mut buf, header, &witness_report(&sol, &rates, 1e-8)?)?;
        }
    }
    Ok(buf)
}

#[derive(Serialize)]
struct IndexEntry {
    index: usize,
    file: String,
    values: serde_json::Map<String, serde_json::Value>,
    status: String,
}

pub fn run(base: &Settings, vary: &[String], what: Output, dir: &Path) -> Result<(), CliError> {
    if vary.len() > 2 {
        return Err(CliError::config("vary", "at most two keys"));
    }
    let axes = vary
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<Vec<_>, _>>()?;
    if axes.len() == 2 && axes[0].key == axes[1].key {
        return Err(CliError::config(
            "vary",
            format!("'{}' given twice", axes[0].key),
        ));
    }

    let mut points: Vec<Vec<(String, f64)>> = vec![vec![]];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v));
                    q
                })
            })
            .collect();
    }
    let scenarios = points
        .iter()
        .map(|p| {
            let s = p
                .iter()
                .try_fold(base.clone(), |s, (k, v)| apply(&s, k, *v))?;
            s.resolve()
        })
        .collect::<Result<Vec<_>, _>>()?;

    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let outputs: Vec<Result<Vec<u8>, CliError>> =
        scenarios.par_iter().map(|sc| render(sc, what)).collect();

    let ext = if what == Output::Witness {
        "json"
    } else {
        "csv"
    };
    let mut index = Vec::with_capacity(points.len());
    let mut failed = None;
    for (i, (p, out)) in points.iter().zip(outputs).enumerate() {
        let file = format!("point_{i:04}.{ext}");
        let status = match out {
            Ok(bytes) => {
                std::fs::write(dir.join(&file), bytes)?;
                "ok".to_string()
            }
            Err(e @ CliError::Solver { .. }) => {
                let msg = e.to_string();
                failed.get_or_insert(e);
                msg
            }
            Err(e) => return Err(e),
        };
        index.push(IndexEntry {
            index: i,
            file,
            values: p.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
            status,
        });
    }
    let text = serde_json::to_string_pretty(&index).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("index.json"), text + "\n")?;
    match failed {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
