//! Self-checks: oracle equivalences and analytic bounds, each reported
//! as a named pass/fail line.

use std::f64::consts::E;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact_exp::{exp_rates_resonant, ExpTrajectory};
use crate::hierarchy::solve_hierarchy_blocks;
use crate::{
    accumulate_relaxation, apply_map, choi_min_eig, compute_rates_all, evaluate_witnesses,
    exp_coefficients, find_singularities, invertibility_threshold, make_optimal_pulse,
    quadrature_coefficients, roots, solve_coefficients, solve_hierarchy, uniform_grid,
    CoefficientSolution, CoefficientSource, ExpParams, GeneratorRates, MapCoefficients,
    PhotonProfile, PhysParams, QubitState, Result, SampledProfile, SingularityKind, SolverConfig,
    WitnessOptions, C64, DEFAULT_EPS_SING,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level '{s}' (expected quick or full)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    /// Set on a check whose literal statement cannot hold; it is run and
    /// reported but does not count towards the overall verdict.
    pub known_failure: Option<String>,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} [{}] {}: {} ({:.2} s)",
            self.id, self.name, self.detail, self.seconds
        )?;
        if let Some(why) = &self.known_failure {
            write!(f, " [known: {why}]")?;
        }
        Ok(())
    }
}

const KAPPAS: [f64; 3] = [0.25, 0.5, 1.0];
const ALPHAS: [f64; 4] = [0.5, 1.0, 1.5, 9.5];
const DELTAS: [f64; 3] = [0.0, 1.5, 3.0];
const T_MAX: f64 = 15.0;

struct Sizes {
    points: usize,
    states: usize,
    quad_tol: f64,
}

impl Sizes {
    fn of(level: Level) -> Self {
        match level {
            Level::Quick => Sizes {
                points: 1501,
                states: 10,
                quad_tol: 1e-10,
            },
            Level::Full => Sizes {
                points: 1501,
                states: 100,
                quad_tol: 1e-10,
            },
        }
    }
}

fn timed(id: &str, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        id: id.to_string(),
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
        known_failure: None,
    }
}

fn exp_params(kappa: f64, alpha: f64, delta0: f64) -> ExpParams {
    ExpParams::new(
        PhysParams {
            gamma_total: 1.0,
            kappa,
            delta0,
        },
        alpha,
    )
    .expect("valid exponential parameters")
}

fn max_diff(x: &[MapCoefficients], y: &[MapCoefficients]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| {
            (p.a - q.a)
                .abs()
                .max((p.b - q.b).abs())
                .max((p.c - q.c).norm())
        })
        .fold(0.0, f64::max)
}

/// One point of the (κ, α, Δ₀) grid with its closed-form and ODE coefficients.
pub struct GridPoint {
    pub params: ExpParams,
    pub closed: ExpTrajectory,
    pub ode: CoefficientSolution,
}

/// The exponential parameter grid shared by several checks.
pub struct OracleGrid {
    pub grid: Vec<f64>,
    pub points: Vec<GridPoint>,
}

impl OracleGrid {
    pub fn build(level: Level) -> Result<Self> {
        let grid = uniform_grid(T_MAX, Sizes::of(level).points);
        let mut points = Vec::new();
        for &kappa in &KAPPAS {
            for &alpha in &ALPHAS {
                for &delta0 in &DELTAS {
                    let params = exp_params(kappa, alpha, delta0);
                    let profile = PhotonProfile::exponential(alpha, &params.base)?;
                    let ode = solve_coefficients(
                        &params.base,
                        &profile,
                        &grid,
                        &SolverConfig::default(),
                    )?;
                    points.push(GridPoint {
                        params,
                        closed: ExpTrajectory::new(params, &grid),
                        ode,
                    });
                }
            }
        }
        Ok(OracleGrid { grid, points })
    }
}

fn label(p: &ExpParams) -> String {
    format!("κ={} α={} Δ₀={}", p.base.kappa, p.alpha, p.base.delta0)
}

/// Closed forms, augmented ODE and nested quadrature agree pairwise.
pub fn oracle_triangle(g: &OracleGrid, level: Level) -> CheckOutcome {
    timed("1", "oracle triangle", || {
        let tol = 1e-7;
        let mut worst = (0.0, String::new());
        for pt in &g.points {
            let profile = PhotonProfile::exponential(pt.params.alpha, &pt.params.base)?;
            let quad = quadrature_coefficients(
                &pt.params.base,
                &profile,
                &g.grid,
                Sizes::of(level).quad_tol,
            )?;
            let closed = pt.closed.samples();
            let ode = pt.ode.coefficients();
            let d = max_diff(closed, ode)
                .max(max_diff(closed, &quad))
                .max(max_diff(ode, &quad));
            if d >= worst.0 {
                worst = (d, label(&pt.params));
            }
        }
        Ok((
            worst.0 <= tol,
            format!(
                "max pairwise |Δ| = {:.3e} at {} (tol {tol:e})",
                worst.0, worst.1
            ),
        ))
    })
}

fn random_state(rng: &mut ChaCha8Rng) -> QubitState {
    let pe: f64 = rng.gen();
    let r = (pe * (1.0 - pe)).sqrt() * rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    QubitState::new(pe, C64::from_polar(r, phi)).expect("state inside the Bloch ball")
}

fn map_vs_hierarchy_sets() -> Result<Vec<(PhysParams, PhotonProfile)>> {
    let mut sets = Vec::new();
    for (kappa, alpha, delta0) in [
        (1.0, 1.0, 0.0),
        (1.0, 9.5, 0.0),
        (1.0, 1.5, 3.0),
        (0.5, 1.5, 1.5),
        (0.25, 0.5, 0.0),
    ] {
        let p = PhysParams::new(1.0, kappa, delta0)?;
        sets.push((p, PhotonProfile::exponential(alpha, &p)?));
    }
    let p = PhysParams::new(1.0, 0.5, 0.7)?;
    sets.push((p, make_optimal_pulse(2.0, &p)?));
    Ok(sets)
}

fn max_trace_distance(
    level: Level,
    coupling_scale: f64,
    set_limit: usize,
) -> Result<(f64, String)> {
    let sizes = Sizes::of(level);
    let grid = uniform_grid(T_MAX, sizes.points);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let cfg = SolverConfig::default();
    let mut worst = (0.0, String::new());
    for (params, profile) in map_vs_hierarchy_sets()?.into_iter().take(set_limit) {
        let coeffs = solve_coefficients(&params, &profile, &grid, &cfg)?;
        for _ in 0..sizes.states {
            let rho0 = random_state(&mut rng);
            let states: Vec<QubitState> = if coupling_scale == 1.0 {
                solve_hierarchy(&rho0, &params, &profile, &grid, &cfg)?
            } else {
                solve_hierarchy_blocks(&rho0, &params, &profile, &grid, &cfg, coupling_scale)?
                    .iter()
                    .map(|h| h.state())
                    .collect()
            };
            for (c, s) in coeffs.coefficients().iter().zip(&states) {
                let d = apply_map(c, &rho0).trace_distance(s);
                if d > worst.0 {
                    worst = (
                        d,
                        format!("κ={} Δ₀={} t={}", params.kappa, params.delta0, c.t),
                    );
                }
            }
        }
    }
    Ok(worst)
}

/// The map built from (A, B, C) reproduces the hierarchy for random states.
pub fn map_vs_hierarchy(level: Level) -> CheckOutcome {
    timed("2", "map vs hierarchy", || {
        let tol = 1e-6;
        let (d, at) = max_trace_distance(level, 1.0, usize::MAX)?;
        Ok((
            d <= tol,
            format!("max trace distance {d:.3e} at {at} (tol {tol:e})"),
        ))
    })
}

/// Same comparison with Γ₁ → 0.99 Γ₁ in the hierarchy; the check must notice.
pub fn mutation_sensitivity(level: Level) -> CheckOutcome {
    timed("M", "mutation Γ₁→0.99κΓ detected", || {
        let (d, at) = max_trace_distance(level, 0.99f64.sqrt(), 2)?;
        Ok((
            d > 1e-6,
            format!("mutated max trace distance {d:.3e} at {at} (must exceed 1e-6)"),
        ))
    })
}

/// Maximal excitation for the exponential profile.
pub fn max_excitation_check(level: Level) -> CheckOutcome {
    timed("3", "maximal excitation", || {
        let mut msgs = Vec::new();
        let mut ok = true;
        for &kappa in &KAPPAS {
            let p = exp_params(kappa, 1.0, 0.0);
            let (t_star, neg) = roots::golden_min(
                |t| Ok::<_, crate::Error>(-exp_coefficients(t, &p).a),
                0.5,
                5.0,
                1e-9,
            )?;
            let expect = 4.0 * kappa / (E * E);
            let peak_ok = (-neg - expect).abs() <= 1e-6 && (t_star - 2.0).abs() <= 1e-3;
            ok &= peak_ok;

            let (na, nd, nt) = match level {
                Level::Quick => (20, 7, 151),
                Level::Full => (60, 25, 601),
            };
            let mut best = 0.0f64;
            for ia in 0..na {
                let alpha = 0.1 * (100.0f64).powf(ia as f64 / (na - 1) as f64);
                for id in 0..nd {
                    let delta0 = -3.0 + 6.0 * id as f64 / (nd - 1) as f64;
                    let q = exp_params(kappa, alpha, delta0);
                    for t in uniform_grid(T_MAX, nt) {
                        best = best.max(exp_coefficients(t, &q).a);
                    }
                }
            }
            let grid_ok = best <= expect + 1e-5;
            ok &= grid_ok;
            msgs.push(format!(
                "κ={kappa}: max A {:.9} at t={:.6}, grid max {:.9}",
                -neg, t_star, best
            ));
        }
        Ok((ok, msgs.join("; ")))
    })
}

/// The optimal pulse reaches κ(1−e^{−ΓT}) and beats every exponential pulse.
pub fn optimal_pulse_check(level: Level) -> CheckOutcome {
    timed("4", "optimal pulse", || {
        let n_alpha = 20;
        let per_unit = match level {
            Level::Quick => 20,
            Level::Full => 100,
        };
        let mut ok = true;
        let mut worst_err = 0.0f64;
        let mut min_gap = f64::INFINITY;
        for kappa in [0.5, 1.0] {
            let params = PhysParams::new(1.0, kappa, 0.0)?;
            for horizon in [0.5, 1.0, 2.0, 4.0] {
                let profile = make_optimal_pulse(horizon, &params)?;
                let grid = uniform_grid(horizon, (per_unit as f64 * horizon) as usize + 1);
                let states = solve_hierarchy(
                    &QubitState::ground(),
                    &params,
                    &profile,
                    &grid,
                    &SolverConfig::default(),
                )?;
                let pe = states.last().expect("non-empty grid").pe;
                let target = kappa * (1.0 - (-horizon).exp());
                worst_err = worst_err.max((pe - target).abs());
                ok &= (pe - target).abs() <= 1e-5;
                for ia in 0..n_alpha {
                    let alpha = 0.1 * (100.0f64).powf(ia as f64 / (n_alpha - 1) as f64);
                    let a = exp_coefficients(horizon, &exp_params(kappa, alpha, 0.0)).a;
                    min_gap = min_gap.min(pe - a);
                    ok &= pe > a;
                }
            }
        }
        Ok((ok, format!("max |P_e(T) − κ(1−e^{{−ΓT}})| = {worst_err:.3e} (tol 1e-5); min margin over exponentials {min_gap:.3e}")))
    })
}

/// Invertibility boundary α = 8κ + 1.
pub fn invertibility_boundary() -> CheckOutcome {
    timed("5", "invertibility boundary", || {
        let grid = uniform_grid(50.0, 5001);
        let mut ok = true;
        let mut msgs = Vec::new();
        for kappa in [1.0, 0.5] {
            let thr = invertibility_threshold(kappa);
            let above = ExpTrajectory::new(exp_params(kappa, thr, 0.0), &grid);
            let min_b = above
                .samples()
                .iter()
                .map(|c| c.b)
                .fold(f64::INFINITY, f64::min);
            ok &= min_b > 0.0;
            let below = ExpTrajectory::new(exp_params(kappa, thr - 0.1, 0.0), &grid);
            let zero = find_singularities(&below)?
                .into_iter()
                .find(|s| s.which == SingularityKind::B);
            match zero {
                Some(z) => {
                    ok &= z.residual < 1e-10;
                    msgs.push(format!(
                        "κ={kappa}: min B(α={thr}) = {min_b:.3e}; B(α={}) = 0 at t={:.9} (|B| {:.1e})",
                        thr - 0.1,
                        z.t,
                        z.residual
                    ));
                }
                None => {
                    ok = false;
                    msgs.push(format!(
                        "κ={kappa}: min B(α={thr}) = {min_b:.3e}; no zero found at α={}",
                        thr - 0.1
                    ));
                }
            }
        }
        Ok((ok, msgs.join("; ")))
    })
}

/// Smooth random nonnegative profile sampled on a uniform grid, normalized exactly.
fn random_nonnegative_profile(rng: &mut ChaCha8Rng) -> Result<SampledProfile> {
    let times = uniform_grid(12.0, 481);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.2..1.0),
                rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    let raw: Vec<f64> = times
        .iter()
        .map(|&t| {
            bumps
                .iter()
                .map(|(c, w, a)| a * (-((t - c) / w).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    // ∫ of a squared linear interpolant, segment by segment.
    let norm: f64 = times
        .windows(2)
        .zip(raw.windows(2))
        .map(|(t, v)| (t[1] - t[0]) * (v[0] * v[0] + v[0] * v[1] + v[1] * v[1]) / 3.0)
        .sum();
    let s = norm.sqrt();
    SampledProfile::new(times, raw.iter().map(|v| C64::new(v / s, 0.0)).collect())
}

fn rates_of(sol: &CoefficientSolution) -> Vec<GeneratorRates> {
    compute_rates_all(sol.coefficients(), DEFAULT_EPS_SING)
}

/// Resonant real nonnegative profiles with invertible maps.
pub fn nonnegative_profiles(level: Level) -> CheckOutcome {
    timed("6", "nonnegative profiles", || {
        let grid = uniform_grid(T_MAX, Sizes::of(level).points);
        let cfg = SolverConfig::default();
        let mut cases: Vec<(String, PhysParams, PhotonProfile)> = Vec::new();
        for (kappa, alpha) in [(1.0, 9.5), (1.0, 12.0), (0.5, 5.5), (0.25, 3.0)] {
            let p = PhysParams::new(1.0, kappa, 0.0)?;
            cases.push((
                format!("exp κ={kappa} α={alpha}"),
                p,
                PhotonProfile::exponential(alpha, &p)?,
            ));
        }
        for (kappa, horizon) in [(0.25, 1.0), (0.1, 3.0), (0.5, 0.5)] {
            let p = PhysParams::new(1.0, kappa, 0.0)?;
            cases.push((
                format!("optimal κ={kappa} T={horizon}"),
                p,
                make_optimal_pulse(horizon, &p)?,
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        let mut tries = 0;
        let mut random = 0;
        let (mut irregular, mut singular) = (0, 0);
        while random < 3 {
            tries += 1;
            if tries > 200 {
                return Ok((
                    false,
                    format!("could not draw invertible random profiles ({irregular} irregular, {singular} singular)"),
                ));
            }
            let p = PhysParams::new(1.0, 0.1, 0.0)?;
            let prof = PhotonProfile::sampled(random_nonnegative_profile(&mut rng)?);
            let sol = solve_coefficients(&p, &prof, &grid, &cfg)?;
            if !rates_of(&sol).iter().all(|r| r.status.is_regular()) {
                irregular += 1;
            } else if !find_singularities(&sol)?.is_empty() {
                singular += 1;
            } else {
                random += 1;
                cases.push((format!("random #{random}"), p, prof));
            }
        }

        let tol = 1e-9;
        let mut failures = Vec::new();
        for (name, p, prof) in &cases {
            let sol = solve_coefficients(p, prof, &grid, &cfg)?;
            let rates = rates_of(&sol);
            let sing = find_singularities(&sol)?;
            let mut bad = Vec::new();
            if !sing.is_empty() {
                bad.push("not invertible");
            }
            for (c, r) in sol.coefficients().iter().zip(&rates) {
                if !r.status.is_regular() {
                    continue;
                }
                let d_abs_c = (c.c.conj() * c.dc).re / c.c.norm();
                if r.gamma_plus < -tol {
                    bad.push("γ₊");
                }
                if r.gamma_minus < 2.0 * p.gamma_total - tol {
                    bad.push("γ₋");
                }
                if r.gamma_z > tol {
                    bad.push("γ_z");
                }
                if !(c.c.re > 0.0) {
                    bad.push("Re C");
                }
                if d_abs_c > tol {
                    bad.push("d|C|/dt");
                }
            }
            let report =
                evaluate_witnesses(&rates, &sing, &WitnessOptions::for_gamma(p.gamma_total));
            if !report.blp.verdict {
                bad.push("BLP");
            }
            if !bad.is_empty() {
                bad.sort();
                bad.dedup();
                failures.push(format!("{name}: {}", bad.join(",")));
            }
        }
        if failures.is_empty() {
            Ok((
                true,
                format!("{} profiles satisfy all bounds ({tries} random draws, {singular} singular rejected)", cases.len()),
            ))
        } else {
            Ok((false, failures.join("; ")))
        }
    })
}

/// Choi matrices stay positive semidefinite over the shared grid.
pub fn complete_positivity(g: &OracleGrid) -> CheckOutcome {
    timed("7", "complete positivity", || {
        let mut worst = (f64::INFINITY, String::new());
        for pt in &g.points {
            for c in pt.closed.samples().iter().chain(pt.ode.coefficients()) {
                let e = choi_min_eig(c);
                if e < worst.0 {
                    worst = (e, format!("{} t={}", label(&pt.params), c.t));
                }
            }
        }
        Ok((
            worst.0 >= -1e-9,
            format!(
                "min Choi eigenvalue {:.3e} at {} (bound −1e-9)",
                worst.0, worst.1
            ),
        ))
    })
}

fn witness_for(kappa: f64, alpha: f64, delta0: f64, grid: &[f64]) -> Result<crate::WitnessReport> {
    let p = PhysParams::new(1.0, kappa, delta0)?;
    let prof = PhotonProfile::exponential(alpha, &p)?;
    let sol = solve_coefficients(&p, &prof, grid, &SolverConfig::default())?;
    let sing = find_singularities(&sol)?;
    Ok(evaluate_witnesses(
        &rates_of(&sol),
        &sing,
        &WitnessOptions::for_gamma(1.0),
    ))
}

/// BLP fails at Δ₀ = 3 and holds at Δ₀ = 6.5 for α = 1.5.
pub fn detuning_dichotomy(level: Level) -> CheckOutcome {
    timed("8", "detuning dichotomy", || {
        let grid = uniform_grid(T_MAX, Sizes::of(level).points);
        let near = witness_for(1.0, 1.5, 3.0, &grid)?;
        let far = witness_for(1.0, 1.5, 6.5, &grid)?;
        let m = near.blp.min_margin.unwrap_or(f64::NAN);
        let ok =
            !near.blp.verdict && !near.blp.violations.is_empty() && m < -1e-3 && far.blp.verdict;
        Ok((
            ok,
            format!(
                "Δ₀=3: blp {} with {} interval(s), min(γ₊+γ₋+4γ_z) {m:.4}; Δ₀=6.5: blp {}",
                near.blp.verdict,
                near.blp.violations.len(),
                far.blp.verdict
            ),
        ))
    })
}

/// With no photon the generator is the constant semigroup one.
pub fn degenerate_semigroup(level: Level) -> CheckOutcome {
    timed("9", "degenerate semigroup", || {
        let grid = uniform_grid(T_MAX, Sizes::of(level).points);
        let p = PhysParams::new(1.0, 1.0, 0.8)?;
        let sol = solve_coefficients(&p, &PhotonProfile::Zero, &grid, &SolverConfig::default())?;
        let rates = rates_of(&sol);
        let dev = rates
            .iter()
            .map(|r| {
                r.gamma_plus
                    .abs()
                    .max((r.gamma_minus - 2.0).abs())
                    .max(r.gamma_z.abs())
                    .max((r.omega - 0.8).abs())
            })
            .fold(0.0, f64::max);
        let rep = evaluate_witnesses(
            &rates,
            &find_singularities(&sol)?,
            &WitnessOptions::for_gamma(1.0),
        );
        let all_true = rep.cp_divisible.verdict
            && rep.p_divisible.verdict
            && rep.blp.verdict
            && rep.geometric.verdict;
        let ok = dev <= 1e-10 && all_true && !rep.eternal_nm.verdict;
        Ok((
            ok,
            format!(
                "max rate deviation {dev:.1e}; witnesses {all_true}; eternal_nm {}",
                rep.eternal_nm.verdict
            ),
        ))
    })
}

/// Grid points whose maps have no singularity and only regular rate samples.
fn invertible_points(g: &OracleGrid) -> Result<Vec<(&GridPoint, Vec<GeneratorRates>)>> {
    let mut out = Vec::new();
    for pt in &g.points {
        let rates = rates_of(&pt.ode);
        if rates.iter().all(|r| r.status.is_regular()) && find_singularities(&pt.ode)?.is_empty() {
            out.push((pt, rates));
        }
    }
    Ok(out)
}

/// Integrated rates reproduce B and |C|.
///
/// `which` selects the relation: `B` compares exp(−Γ_L/2) with B,
/// `CLiteral` exp(−Γ_T) with |C| and `CHalf` exp(−Γ_T/2) with |C|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundTrip {
    B,
    CLiteral,
    CHalf,
}

pub fn round_trip(g: &OracleGrid, which: RoundTrip) -> CheckOutcome {
    let (id, name) = match which {
        RoundTrip::B => ("10a", "round trip exp(−Γ_L/2) = B"),
        RoundTrip::CLiteral => ("10b", "round trip exp(−Γ_T) = |C|"),
        RoundTrip::CHalf => ("10c", "round trip exp(−Γ_T/2) = |C|"),
    };
    let mut out = timed(id, name, || {
        let tol = 1e-6;
        let pts = invertible_points(g)?;
        let mut worst = (0.0f64, String::new());
        for (pt, rates) in &pts {
            let relax = accumulate_relaxation(rates)?;
            for (c, r) in pt.ode.coefficients().iter().zip(&relax) {
                let d = match which {
                    RoundTrip::B => ((-0.5 * r.big_gamma_l).exp() - c.b).abs(),
                    RoundTrip::CLiteral => ((-r.big_gamma_t).exp() - c.c.norm()).abs(),
                    RoundTrip::CHalf => ((-0.5 * r.big_gamma_t).exp() - c.c.norm()).abs(),
                };
                if d > worst.0 {
                    worst = (d, format!("{} t={}", label(&pt.params), c.t));
                }
            }
        }
        Ok((
            !pts.is_empty() && worst.0 <= tol,
            format!(
                "{} invertible points, max |Δ| {:.3e} at {} (tol {tol:e})",
                pts.len(),
                worst.0,
                worst.1
            ),
        ))
    });
    if which == RoundTrip::CLiteral {
        out.known_failure = Some("exp(−Γ_T) equals |C|², not |C|; see 10c".into());
    }
    out
}

/// Invertible resonant maps are eternally non-Markovian.
pub fn eternal_non_markovianity(g: &OracleGrid) -> CheckOutcome {
    timed("11", "eternal non-Markovianity", || {
        let opts = WitnessOptions::for_gamma(1.0);
        let mut ok = true;
        let mut msgs = Vec::new();
        let mut count = 0;
        for (pt, rates) in invertible_points(g)? {
            if pt.params.base.delta0 != 0.0 {
                continue;
            }
            count += 1;
            let rep = evaluate_witnesses(&rates, &[], &opts);
            let min_rate = rates
                .iter()
                .filter(|r| r.t > opts.t_burn)
                .map(GeneratorRates::min_rate)
                .fold(f64::INFINITY, f64::min);
            let here = rep.eternal_nm.verdict && !rep.cp_divisible.verdict && min_rate < -1e-4;
            ok &= here;
            msgs.push(format!(
                "{}: eternal {} cp {} min rate {min_rate:.4}",
                label(&pt.params),
                rep.eternal_nm.verdict,
                rep.cp_divisible.verdict
            ));
        }
        Ok((ok && count > 0, msgs.join("; ")))
    })
}

/// Rates at t = 30/Γ are close to their long-time limits.
pub fn asymptotic_rates() -> CheckOutcome {
    timed("12", "asymptotic rates", || {
        let mut worst = 0.0f64;
        let mut ok = true;
        for &kappa in &KAPPAS {
            for alpha in [0.5, 1.5] {
                let p = exp_params(kappa, alpha, 0.0);
                let r = exp_rates_resonant(30.0, &p);
                let (gp, gm, gz) = if alpha >= 1.0 {
                    (0.0, 2.0, 0.0)
                } else {
                    (0.0, 1.0 + alpha, 0.25 * (1.0 - alpha))
                };
                let d = (r.gamma_plus - gp)
                    .abs()
                    .max((r.gamma_minus - gm).abs())
                    .max((r.gamma_z - gz).abs());
                ok &= d.is_finite() && d <= 1e-3;
                worst = worst.max(d);
            }
        }
        Ok((
            ok,
            format!("max deviation from limits {worst:.3e} (tol 1e-3)"),
        ))
    })
}

/// True when every check passed, ignoring known failures.
pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes
        .iter()
        .all(|o| o.passed || o.known_failure.is_some())
}

/// Every check at the given level, in criterion order.
pub fn run_all(level: Level) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let grid = match OracleGrid::build(level) {
        Ok(g) => Some(g),
        Err(e) => {
            out.push(CheckOutcome {
                id: "1".into(),
                name: "oracle grid".into(),
                passed: false,
                detail: format!("error: {e}"),
                seconds: 0.0,
                known_failure: None,
            });
            None
        }
    };
    if let Some(g) = &grid {
        out.push(oracle_triangle(g, level));
    }
    out.push(map_vs_hierarchy(level));
    out.push(max_excitation_check(level));
    out.push(optimal_pulse_check(level));
    out.push(invertibility_boundary());
    out.push(nonnegative_profiles(level));
    if let Some(g) = &grid {
        out.push(complete_positivity(g));
    }
    out.push(detuning_dichotomy(level));
    out.push(degenerate_semigroup(level));
    if let Some(g) = &grid {
        out.push(round_trip(g, RoundTrip::B));
        out.push(round_trip(g, RoundTrip::CLiteral));
        out.push(round_trip(g, RoundTrip::CHalf));
        out.push(eternal_non_markovianity(g));
    }
    out.push(asymptotic_rates());
    out.push(mutation_sensitivity(level));
    out
}
