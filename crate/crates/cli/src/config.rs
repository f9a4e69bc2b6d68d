//! Scenario settings from flags, key–value files and CSV headers.

use std::path::Path;

use num_complex::Complex64;
use photonq::export::fmt_g;
use photonq::{PhotonProfile, PhysParams, ProfileSpec, QubitState, SolverConfig};

use crate::CliError;

pub const KEYS: [&str; 11] = [
    "gamma", "kappa", "delta0", "profile", "t_max", "points", "rel_tol", "abs_tol", "pe0",
    "re_coh0", "im_coh0",
];

/// Partially specified scenario; `None` falls back to the defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub delta0: Option<f64>,
    pub profile: Option<String>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub pe0: Option<f64>,
    pub re_coh0: Option<f64>,
    pub im_coh0: Option<f64>,
}

fn number(field: &str, value: &str) -> Result<f64, CliError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(field, format!("'{value}' is not a number")))
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "gamma" => self.gamma = Some(number("gamma", v)?),
            "kappa" => self.kappa = Some(number("kappa", v)?),
            "delta0" => self.delta0 = Some(number("delta0", v)?),
            "profile" => self.profile = Some(v.to_string()),
            "t_max" => self.t_max = Some(number("t_max", v)?),
            "points" => {
                self.points = Some(v.parse::<usize>().map_err(|_| {
                    CliError::config("points", format!("'{v}' is not a non-negative integer"))
                })?)
            }
            "rel_tol" => self.rel_tol = Some(number("rel_tol", v)?),
            "abs_tol" => self.abs_tol = Some(number("abs_tol", v)?),
            "pe0" => self.pe0 = Some(number("pe0", v)?),
            "re_coh0" => self.re_coh0 = Some(number("re_coh0", v)?),
            "im_coh0" => self.im_coh0 = Some(number("im_coh0", v)?),
            other => {
                return Err(CliError::config(
                    other,
                    format!("unknown setting (known: {})", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines, several per line when separated by `;`.
    ///
    /// A file whose first line starts with `# photonq` is treated as an output
    /// file: only its leading comment block is read.
    pub fn parse(text: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        let header = text
            .lines()
            .next()
            .is_some_and(|l| l.starts_with("# photonq"));
        for (no, line) in text.lines().enumerate() {
            let body = if header {
                if no == 0 {
                    continue;
                }
                match line.strip_prefix('#') {
                    Some(rest) => rest,
                    None => break,
                }
            } else {
                line
            };
            let body = body.trim();
            if body.is_empty() || (!header && body.starts_with('#')) {
                continue;
            }
            for pair in body.split(';') {
                let (k, v) = pair.split_once('=').ok_or_else(|| {
                    CliError::config("config", format!("line {}: expected key = value", no + 1))
                })?;
                s.set(k, v)?;
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        Settings::parse(&text)
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: &Settings) -> Settings {
        Settings {
            gamma: top.gamma.or(self.gamma),
            kappa: top.kappa.or(self.kappa),
            delta0: top.delta0.or(self.delta0),
            profile: top.profile.clone().or(self.profile),
            t_max: top.t_max.or(self.t_max),
            points: top.points.or(self.points),
            rel_tol: top.rel_tol.or(self.rel_tol),
            abs_tol: top.abs_tol.or(self.abs_tol),
            pe0: top.pe0.or(self.pe0),
            re_coh0: top.re_coh0.or(self.re_coh0),
            im_coh0: top.im_coh0.or(self.im_coh0),
        }
    }

    pub fn resolve(&self) -> Result<Scenario, CliError> {
        let params = PhysParams::new(
            self.gamma.unwrap_or(1.0),
            self.kappa.unwrap_or(1.0),
            self.delta0.unwrap_or(0.0),
        )?;
        let profile: ProfileSpec = self.profile.as_deref().unwrap_or("exp:1").parse()?;
        let pe0 = self.pe0.unwrap_or(0.0);
        let coh = Complex64::new(self.re_coh0.unwrap_or(0.0), self.im_coh0.unwrap_or(0.0));
        let initial = QubitState::new(pe0, coh)?;
        let t_max = self.t_max.unwrap_or(15.0 / params.gamma_total);
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(CliError::config(
                "t_max",
                format!("must be > 0, got {t_max}"),
            ));
        }
        let points = self.points.unwrap_or(1501);
        if points < 2 {
            return Err(CliError::config(
                "points",
                format!("must be >= 2, got {points}"),
            ));
        }
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            rel_tol: self.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(defaults.abs_tol),
            ..defaults
        };
        solver.validate()?;
        Ok(Scenario {
            params,
            profile,
            initial,
            t_max,
            points,
            solver,
        })
    }
}

/// A fully resolved, validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: PhysParams,
    pub profile: ProfileSpec,
    pub initial: QubitState,
    pub t_max: f64,
    pub points: usize,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn grid(&self) -> Vec<f64> {
        photonq::uniform_grid(self.t_max, self.points)
    }

    pub fn photon_profile(&self) -> Result<PhotonProfile, CliError> {
        Ok(self.profile.resolve(&self.params)?)
    }

    /// The eight comment lines written at the top of every output file.
    pub fn header(&self, command: &str) -> Vec<String> {
        vec![
            format!("photonq {} {command}", env!("CARGO_PKG_VERSION")),
            format!("gamma = {}", fmt_g(self.params.gamma_total)),
            format!("kappa = {}", fmt_g(self.params.kappa)),
            format!("delta0 = {}", fmt_g(self.params.delta0)),
            format!("profile = {}", self.profile),
            format!(
                "pe0 = {}; re_coh0 = {}; im_coh0 = {}",
                fmt_g(self.initial.pe),
                fmt_g(self.initial.coherence.re),
                fmt_g(self.initial.coherence.im)
            ),
            format!("t_max = {}; points = {}", fmt_g(self.t_max), self.points),
            format!(
                "rel_tol = {}; abs_tol = {}",
                fmt_g(self.solver.rel_tol),
                fmt_g(self.solver.abs_tol)
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_files() {
        let s =
            Settings::parse("# run\ngamma = 2\nkappa=0.5; delta0 = -1\n\nprofile = optimal:2\n")
                .unwrap();
        assert_eq!(s.gamma, Some(2.0));
        assert_eq!(s.kappa, Some(0.5));
        assert_eq!(s.delta0, Some(-1.0));
        assert_eq!(s.profile.as_deref(), Some("optimal:2"));
    }

    #[test]
    fn unknown_key_names_the_field() {
        match Settings::parse("gama = 1") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "gama"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_round_trip() {
        let s = Settings::parse(
            "kappa = 0.3\ndelta0 = 1.25\npe0 = 0.4\nre_coh0 = 0.1\nprofile = exp:2.5\npoints = 11",
        )
        .unwrap();
        let sc = s.resolve().unwrap();
        let mut text: String = sc
            .header("rates")
            .iter()
            .map(|l| format!("# {l}\n"))
            .collect();
        text.push_str("t,A\n0,0\n");
        assert_eq!(Settings::parse(&text).unwrap().resolve().unwrap(), sc);
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::parse("kappa = 0.3\ngamma = 2").unwrap();
        let flags = Settings {
            kappa: Some(0.9),
            ..Default::default()
        };
        let s = file.overlay(&flags);
        assert_eq!((s.kappa, s.gamma), (Some(0.9), Some(2.0)));
    }

    #[test]
    fn invalid_values_name_their_field() {
        for (text, field) in [
            ("kappa = 1.5", "kappa"),
            ("pe0 = 2", "pe0"),
            ("points = 1", "points"),
            ("t_max = 0", "t_max"),
            ("rel_tol = -1", "rel_tol"),
            ("profile = square:1", "profile"),
        ] {
            match Settings::parse(text).unwrap().resolve() {
                Err(CliError::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
