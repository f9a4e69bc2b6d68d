//! The four coupled operator equations for the blocks ϱ¹¹, ϱ¹⁰, ϱ⁰¹, ϱ⁰⁰.
//!
//! ϱ¹¹ is the reduced state of the emitter; the other blocks are auxiliary.

use nalgebra::Matrix2;

use crate::ode::{integrate, OdeConfig};
use crate::quad::{integrate as quad, QuadOptions};
use crate::{Error, PhotonProfile, PhysParams, QubitState, Result, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn zero2() -> Matrix2<C64> {
    Matrix2::zeros()
}

/// σ₋ = |g⟩⟨e| in the basis (g, e).
fn sigma_minus() -> Matrix2<C64> {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

fn sigma_plus() -> Matrix2<C64> {
    sigma_minus().transpose()
}

fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
}

fn comm(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix2<C64> {
    a * b - b * a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyState {
    pub rho11: Matrix2<C64>,
    pub rho10: Matrix2<C64>,
    pub rho01: Matrix2<C64>,
    pub rho00: Matrix2<C64>,
}

impl HierarchyState {
    /// Initial blocks: ϱ¹¹ = ϱ⁰⁰ = ρ(0), ϱ⁰¹ = ϱ¹⁰ = 0.
    pub fn initial(rho0: &QubitState) -> Self {
        let rho = rho0.density_matrix();
        HierarchyState {
            rho11: rho,
            rho10: zero2(),
            rho01: zero2(),
            rho00: rho,
        }
    }

    fn blocks(&self) -> [&Matrix2<C64>; 4] {
        [&self.rho11, &self.rho10, &self.rho01, &self.rho00]
    }

    pub fn to_flat(&self) -> [f64; 32] {
        let mut y = [0.0; 32];
        for (b, m) in self.blocks().iter().enumerate() {
            for (k, z) in m.iter().enumerate() {
                y[8 * b + 2 * k] = z.re;
                y[8 * b + 2 * k + 1] = z.im;
            }
        }
        y
    }

    pub fn from_flat(y: &[f64; 32]) -> Self {
        let block = |b: usize| {
            Matrix2::from_iterator((0..4).map(|k| c(y[8 * b + 2 * k], y[8 * b + 2 * k + 1])))
        };
        HierarchyState {
            rho11: block(0),
            rho10: block(1),
            rho01: block(2),
            rho00: block(3),
        }
    }

    pub fn state(&self) -> QubitState {
        QubitState::from_matrix(&self.rho11)
    }
}

/// E(t), F(t), G(t) of the closed-form ϱ⁰¹ block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliarySolution {
    pub e_fn: C64,
    pub f_fn: C64,
    pub g_fn: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: f64::INFINITY,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid(
                "rel_tol",
                format!("must be > 0, got {}", self.rel_tol),
            ));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(
                "abs_tol",
                format!("must be > 0, got {}", self.abs_tol),
            ));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::invalid(
                "max_step",
                format!("must be > 0, got {}", self.max_step),
            ));
        }
        Ok(())
    }

    pub(crate) fn ode_config(&self, profile: &PhotonProfile) -> OdeConfig {
        OdeConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.min(profile.max_step_hint()),
            ..OdeConfig::default()
        }
    }
}

/// `n` equally spaced times from 0 to `t_max` inclusive.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    t_max
                } else {
                    t_max * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => Err(Error::invalid("grid", "must contain at least one time")),
        Some(&t0) if t0 != 0.0 => Err(Error::invalid(
            "grid",
            format!("must start at 0, starts at {t0}"),
        )),
        _ if grid.iter().any(|t| !t.is_finite()) => {
            Err(Error::invalid("grid", "times must be finite"))
        }
        _ if grid.windows(2).any(|w| w[1] < w[0]) => {
            Err(Error::invalid("grid", "times must be ascending"))
        }
        _ => Ok(()),
    }
}

fn lindblad(rho: &Matrix2<C64>, params: &PhysParams) -> Matrix2<C64> {
    let sz = sigma_z();
    let sm = sigma_minus();
    let sp = sigma_plus();
    let proj = sp * sm;
    let g = params.gamma_total;
    comm(rho, &sz) * c(0.0, -0.5 * params.delta0) - (proj * rho + rho * proj) * c(0.5 * g, 0.0)
        + sm * rho * sp * c(g, 0.0)
}

fn rhs_with(
    state: &HierarchyState,
    xi: C64,
    params: &PhysParams,
    coupling_scale: f64,
) -> HierarchyState {
    let g = params.gamma1().sqrt() * coupling_scale;
    let sm = sigma_minus();
    let sp = sigma_plus();
    let gx = xi * g;
    let gxc = xi.conj() * g;
    HierarchyState {
        rho11: lindblad(&state.rho11, params) + comm(&sm, &state.rho10) * gxc
            - comm(&sp, &state.rho01) * gx,
        rho10: lindblad(&state.rho10, params) - comm(&sp, &state.rho00) * gx,
        rho01: lindblad(&state.rho01, params) + comm(&sm, &state.rho00) * gxc,
        rho00: lindblad(&state.rho00, params),
    }
}

/// Time derivative of every block at time `t`.
pub fn hierarchy_rhs(
    state: &HierarchyState,
    t: f64,
    params: &PhysParams,
    profile: &PhotonProfile,
) -> HierarchyState {
    rhs_with(state, profile.eval(t), params, 1.0)
}

/// Integrates the hierarchy and returns the emitter state on `grid`.
pub fn solve_hierarchy(
    rho0: &QubitState,
    params: &PhysParams,
    profile: &PhotonProfile,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<QubitState>> {
    Ok(
        solve_hierarchy_blocks(rho0, params, profile, grid, cfg, 1.0)?
            .iter()
            .map(HierarchyState::state)
            .collect(),
    )
}

/// Integrates the hierarchy and returns all four blocks on `grid`.
/// `coupling_scale` multiplies √Γ₁ in the photon terms; 1 is the physical model.
pub fn solve_hierarchy_blocks(
    rho0: &QubitState,
    params: &PhysParams,
    profile: &PhotonProfile,
    grid: &[f64],
    cfg: &SolverConfig,
    coupling_scale: f64,
) -> Result<Vec<HierarchyState>> {
    params.validate()?;
    cfg.validate()?;
    validate_grid(grid)?;
    let y0 = HierarchyState::initial(rho0).to_flat();
    let sol = integrate(
        |t, (a, b), y: &[f64; 32], dy: &mut [f64; 32]| {
            let s = HierarchyState::from_flat(y);
            *dy = rhs_with(&s, profile.eval_on(t, a, b), params, coupling_scale).to_flat();
        },
        y0,
        grid,
        &profile.breakpoints(),
        &cfg.ode_config(profile),
    )?;
    Ok(sol.iter().map(HierarchyState::from_flat).collect())
}

/// E, F, G at time `t` by adaptive quadrature of their defining integrals.
pub fn auxiliary_functions(
    t: f64,
    params: &PhysParams,
    profile: &PhotonProfile,
    quad_tol: f64,
) -> Result<AuxiliarySolution> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "must be finite and >= 0"));
    }
    let g = params.gamma_total;
    let d = params.delta0;
    let s1 = params.gamma1().sqrt();
    let breaks = profile.breakpoints();
    let opts = QuadOptions::with_breaks(quad_tol, breaks.len());
    // Exponential prefactors are folded into the integrands to keep them bounded.
    let e = quad(
        |s| profile.eval(s).conj() * c(g * (0.5 * s - t), d * s).exp(),
        0.0,
        t,
        &breaks,
        opts,
    )?
    .value;
    let f = quad(
        |s| profile.eval(s).conj() * c(-0.5 * g * (t + s), -d * (t - s)).exp(),
        0.0,
        t,
        &breaks,
        opts,
    )?
    .value;
    let gg = quad(
        |s| profile.eval(s).conj() * c(0.5 * g * (s - t), d * (s - t)).exp(),
        0.0,
        t,
        &breaks,
        opts,
    )?
    .value;
    Ok(AuxiliarySolution {
        e_fn: e * s1,
        f_fn: f * (2.0 * s1),
        g_fn: -gg * s1,
    })
}

/// Closed-form ϱ⁰¹(t) and ϱ⁰⁰(t).
pub fn analytic_offdiagonal(
    t: f64,
    rho0: &QubitState,
    params: &PhysParams,
    profile: &PhotonProfile,
    quad_tol: f64,
) -> Result<(Matrix2<C64>, Matrix2<C64>)> {
    params.validate()?;
    let aux = auxiliary_functions(t, params, profile, quad_tol)?;
    let rho_eg = rho0.coherence.conj();
    let rho01 = Matrix2::new(
        aux.e_fn * rho_eg,
        aux.f_fn * rho0.pe + aux.g_fn,
        c(0.0, 0.0),
        -aux.e_fn * rho_eg,
    );
    let decay = (-params.gamma_total * t).exp();
    let coh = rho0.coherence * c(-0.5 * params.gamma_total * t, -params.delta0 * t).exp();
    let rho00 = Matrix2::new(
        c(1.0 - rho0.pe * decay, 0.0),
        coh,
        coh.conj(),
        c(rho0.pe * decay, 0.0),
    );
    Ok((rho01, rho00))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64, delta0: f64) -> PhysParams {
        PhysParams::new(1.0, kappa, delta0).unwrap()
    }

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn flat_round_trip() {
        let s = HierarchyState {
            rho11: Matrix2::new(c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)),
            rho10: Matrix2::new(c(-1.0, 0.5), c(0.0, 0.0), c(2.0, 1.0), c(0.0, -3.0)),
            rho01: Matrix2::identity(),
            rho00: Matrix2::zeros(),
        };
        assert_eq!(HierarchyState::from_flat(&s.to_flat()), s);
    }

    #[test]
    fn ground_state_is_stationary_at_start() {
        let p = params(1.0, 0.7);
        let prof = PhotonProfile::exponential(1.0, &p).unwrap();
        let d = hierarchy_rhs(
            &HierarchyState::initial(&QubitState::ground()),
            0.0,
            &p,
            &prof,
        );
        assert!(d.rho11.norm() < 1e-15);
    }

    #[test]
    fn zero_profile_decouples() {
        let p = params(1.0, 0.3);
        let s = HierarchyState {
            rho11: QubitState::excited().density_matrix(),
            rho10: Matrix2::zeros(),
            rho01: Matrix2::zeros(),
            rho00: QubitState::new(0.5, c(0.2, 0.1)).unwrap().density_matrix(),
        };
        let d = hierarchy_rhs(&s, 1.0, &p, &PhotonProfile::Zero);
        assert!(d.rho01.norm() == 0.0 && d.rho10.norm() == 0.0);
    }

    #[test]
    fn free_decay() {
        let p = params(1.0, 0.0);
        let g = grid(5.0, 51);
        let sol = solve_hierarchy(
            &QubitState::excited(),
            &p,
            &PhotonProfile::Zero,
            &g,
            &SolverConfig::default(),
        )
        .unwrap();
        for (t, s) in g.iter().zip(&sol) {
            assert!(
                (s.pe - (-t).exp()).abs() < 1e-10,
                "t={t} err={}",
                s.pe - (-t).exp()
            );
        }
    }

    #[test]
    fn maximal_excitation_at_two() {
        let p = params(1.0, 0.0);
        let prof = PhotonProfile::exponential(1.0, &p).unwrap();
        let sol = solve_hierarchy(
            &QubitState::ground(),
            &p,
            &prof,
            &[0.0, 2.0],
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((sol[1].pe - 4.0 * (-2f64).exp()).abs() < 1e-6);
        assert!(sol[1].coherence.norm() < 1e-14);
    }

    #[test]
    fn offdiagonal_blocks_match_closed_form() {
        let p = params(1.0, 0.0);
        let prof = PhotonProfile::exponential(1.5, &p).unwrap();
        let rho0 = QubitState::new(0.3, c(0.2, -0.35)).unwrap();
        let sol =
            solve_hierarchy_blocks(&rho0, &p, &prof, &[0.0, 1.0], &SolverConfig::default(), 1.0)
                .unwrap();
        let (r01, r00) = analytic_offdiagonal(1.0, &rho0, &p, &prof, 1e-13).unwrap();
        assert!(
            (sol[1].rho01 - r01).norm() < 1e-7,
            "{} vs {}",
            sol[1].rho01,
            r01
        );
        assert!((sol[1].rho00 - r00).norm() < 1e-9);
        assert!((sol[1].rho10 - sol[1].rho01.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn offdiagonal_detuned_optimal_pulse() {
        let p = params(0.6, 1.3);
        let prof = crate::make_optimal_pulse(1.2, &p).unwrap();
        let rho0 = QubitState::new(0.8, c(-0.1, 0.3)).unwrap();
        let g = [0.0, 0.4, 1.2, 2.5];
        let sol =
            solve_hierarchy_blocks(&rho0, &p, &prof, &g, &SolverConfig::default(), 1.0).unwrap();
        for (t, s) in g.iter().zip(&sol) {
            let (r01, _) = analytic_offdiagonal(*t, &rho0, &p, &prof, 1e-13).unwrap();
            assert!((s.rho01 - r01).norm() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn closed_form_at_zero_time() {
        let p = params(1.0, 0.0);
        let prof = PhotonProfile::exponential(2.0, &p).unwrap();
        let rho0 = QubitState::new(0.4, c(0.1, 0.2)).unwrap();
        let (r01, r00) = analytic_offdiagonal(0.0, &rho0, &p, &prof, 1e-12).unwrap();
        assert_eq!(r01, Matrix2::zeros());
        assert!((r00 - rho0.density_matrix()).norm() < 1e-15);
        let aux = auxiliary_functions(0.0, &p, &prof, 1e-12).unwrap();
        assert_eq!(aux.e_fn, c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_grid() {
        let p = params(1.0, 0.0);
        let cfg = SolverConfig::default();
        assert!(solve_hierarchy(
            &QubitState::ground(),
            &p,
            &PhotonProfile::Zero,
            &[0.5, 1.0],
            &cfg
        )
        .is_err());
        assert!(solve_hierarchy(
            &QubitState::ground(),
            &p,
            &PhotonProfile::Zero,
            &[0.0, 2.0, 1.0],
            &cfg
        )
        .is_err());
    }
}
