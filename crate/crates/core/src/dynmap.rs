//! The dynamical map ρ(0) ↦ ρ(t), parameterized by A(t), B(t) and C(t).
//!
//! The nested integrals behind B and C are carried as state variables of one
//! augmented ODE for (J, K, M, N), so derivatives come out in closed form.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::hierarchy::{validate_grid, SolverConfig};
use crate::ode::integrate;
use crate::quad::{integrate as quad, QuadOptions};
use crate::roots::{bisect, golden_min};
use crate::{Error, PhotonProfile, PhysParams, QubitState, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuxIntegrals {
    pub j: C64,
    pub k: C64,
    pub m: C64,
    pub n: C64,
}

impl AuxIntegrals {
    pub fn to_flat(&self) -> [f64; 8] {
        [
            self.j.re, self.j.im, self.k.re, self.k.im, self.m.re, self.m.im, self.n.re, self.n.im,
        ]
    }

    pub fn from_flat(y: &[f64; 8]) -> Self {
        AuxIntegrals {
            j: C64::new(y[0], y[1]),
            k: C64::new(y[2], y[3]),
            m: C64::new(y[4], y[5]),
            n: C64::new(y[6], y[7]),
        }
    }
}

/// A, B, C and their time derivatives at one instant.
///
/// Each derivative splits into the free-decay part and a photon-driven part
/// (`drive_*`), e.g. Ḃ = −ΓB + drive_b. Rates are formed from the driven
/// parts so that the semigroup contribution cancels exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCoefficients {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: C64,
    pub da: f64,
    pub db: f64,
    pub dc: C64,
    pub drive_a: f64,
    pub drive_b: f64,
    pub drive_c: C64,
    pub gamma: f64,
    pub delta0: f64,
}

impl MapCoefficients {
    #[allow(clippy::too_many_arguments)]
    pub fn from_drive(
        t: f64,
        a: f64,
        b: f64,
        c: C64,
        drive_a: f64,
        drive_b: f64,
        drive_c: C64,
        params: &PhysParams,
    ) -> Self {
        let g = params.gamma_total;
        let lam = C64::new(-0.5 * g, -params.delta0);
        MapCoefficients {
            t,
            a,
            b,
            c,
            da: -g * a + drive_a,
            db: -g * b + drive_b,
            dc: lam * c + drive_c,
            drive_a,
            drive_b,
            drive_c,
            gamma: g,
            delta0: params.delta0,
        }
    }

    /// The semigroup map (ξ ≡ 0) at time `t`.
    pub fn semigroup(t: f64, params: &PhysParams) -> Self {
        let g = params.gamma_total;
        let zero = C64::new(0.0, 0.0);
        MapCoefficients::from_drive(
            t,
            0.0,
            (-g * t).exp(),
            C64::new(-0.5 * g * t, -params.delta0 * t).exp(),
            0.0,
            0.0,
            zero,
            params,
        )
    }

    fn assemble(t: f64, aux: &AuxIntegrals, xi: C64, params: &PhysParams) -> Self {
        let g = params.gamma_total;
        let d = params.delta0;
        let kg = params.gamma1();
        let decay = (-g * t).exp();
        let rot = C64::new(-0.5 * g * t, -d * t).exp();
        let a = kg * decay * aux.j.norm_sqr();
        let b = decay * (1.0 - 4.0 * kg * aux.m.re);
        let c = rot * (1.0 - 2.0 * kg * aux.n);
        let drive_a = 2.0 * kg * (xi * rot * aux.j.conj()).re;
        let drive_b = -4.0 * kg * (xi.conj() * C64::new(-0.5 * g * t, d * t).exp() * aux.k).re;
        let drive_c = -2.0 * kg * decay * xi.conj() * aux.j;
        MapCoefficients::from_drive(t, a, b, c, drive_a, drive_b, drive_c, params)
    }
}

fn aux_rhs(t: f64, xi: C64, y: &[f64; 8], params: &PhysParams, dy: &mut [f64; 8]) {
    let g = params.gamma_total;
    let d = params.delta0;
    let aux = AuxIntegrals::from_flat(y);
    let xc = xi.conj();
    let d_aux = AuxIntegrals {
        j: xi * C64::new(0.5 * g * t, -d * t).exp(),
        k: xi * C64::new(-0.5 * g * t, -d * t).exp(),
        m: xc * C64::new(0.5 * g * t, d * t).exp() * aux.k,
        n: xc * C64::new(-0.5 * g * t, d * t).exp() * aux.j,
    };
    *dy = d_aux.to_flat();
}

/// Coefficient trajectory with enough state to evaluate between samples.
pub trait CoefficientSource {
    fn samples(&self) -> &[MapCoefficients];
    /// Coefficients at an arbitrary time inside the sampled range.
    fn at(&self, t: f64) -> Result<MapCoefficients>;
    /// True when C(t) is real by symmetry (resonance and a real profile).
    fn real_c(&self) -> bool;
}

/// Output of [`solve_coefficients`].
#[derive(Debug, Clone)]
pub struct CoefficientSolution {
    params: PhysParams,
    profile: PhotonProfile,
    cfg: SolverConfig,
    aux: Vec<[f64; 8]>,
    coeffs: Vec<MapCoefficients>,
}

impl CoefficientSolution {
    pub fn coefficients(&self) -> &[MapCoefficients] {
        &self.coeffs
    }

    pub fn aux_integrals(&self) -> Vec<AuxIntegrals> {
        self.aux.iter().map(AuxIntegrals::from_flat).collect()
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn into_coefficients(self) -> Vec<MapCoefficients> {
        self.coeffs
    }
}

impl CoefficientSource for CoefficientSolution {
    fn samples(&self) -> &[MapCoefficients] {
        &self.coeffs
    }

    fn at(&self, t: f64) -> Result<MapCoefficients> {
        let i = self.coeffs.partition_point(|c| c.t <= t).saturating_sub(1);
        let t0 = self.coeffs[i].t;
        if t == t0 {
            return Ok(self.coeffs[i]);
        }
        let params = self.params;
        let profile = &self.profile;
        let y = integrate(
            |s, (a, b), y: &[f64; 8], dy: &mut [f64; 8]| {
                aux_rhs(s, profile.eval_on(s, a, b), y, &params, dy)
            },
            self.aux[i],
            &[t0, t],
            &profile.breakpoints(),
            &self.cfg.ode_config(profile),
        )?;
        Ok(MapCoefficients::assemble(
            t,
            &AuxIntegrals::from_flat(&y[1]),
            profile.eval(t),
            &params,
        ))
    }

    fn real_c(&self) -> bool {
        self.params.delta0 == 0.0 && self.profile.is_real()
    }
}

/// Integrates the augmented system and assembles the coefficients on `grid`.
pub fn solve_coefficients(
    params: &PhysParams,
    profile: &PhotonProfile,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<CoefficientSolution> {
    params.validate()?;
    cfg.validate()?;
    validate_grid(grid)?;
    let p = *params;
    let aux = integrate(
        |t, (a, b), y: &[f64; 8], dy: &mut [f64; 8]| {
            aux_rhs(t, profile.eval_on(t, a, b), y, &p, dy)
        },
        [0.0; 8],
        grid,
        &profile.breakpoints(),
        &cfg.ode_config(profile),
    )?;
    let coeffs = grid
        .iter()
        .zip(&aux)
        .map(|(&t, y)| {
            MapCoefficients::assemble(t, &AuxIntegrals::from_flat(y), profile.eval(t), params)
        })
        .collect();
    Ok(CoefficientSolution {
        params: *params,
        profile: profile.clone(),
        cfg: *cfg,
        aux,
        coeffs,
    })
}

/// Coefficients on `grid` by adaptive quadrature of the defining integrals.
///
/// The outer integrals are accumulated interval by interval; on each interval
/// the inner integral is itself evaluated by adaptive quadrature from the
/// previous grid point, so nothing is shared with the ODE path. `tol` is an
/// absolute target on A, B and C.
pub fn quadrature_coefficients(
    params: &PhysParams,
    profile: &PhotonProfile,
    grid: &[f64],
    tol: f64,
) -> Result<Vec<MapCoefficients>> {
    params.validate()?;
    validate_grid(grid)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let g = params.gamma_total;
    let d = params.delta0;
    let kg = params.gamma1().max(1e-300);
    let xi = |s: f64| profile.eval(s);
    let wj = |s: f64| xi(s) * C64::new(0.5 * g * s, -d * s).exp();
    let wk = |s: f64| xi(s) * C64::new(-0.5 * g * s, -d * s).exp();
    let breaks = profile.breakpoints();

    let t_end = grid[grid.len() - 1];
    let mut stops: Vec<f64> = grid.to_vec();
    stops.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < t_end));
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let local = (tol * 1e-3).max(1e-16);
    let mut aux = AuxIntegrals::default();
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0;
    let mut t_prev = 0.0;
    for &t in &stops {
        if t > t_prev {
            // Scale targets by the growth of each integral so the error in A, B, C is ~tol.
            let opts_j = QuadOptions::absolute(local * (0.5 * g * t).exp() / kg.sqrt().max(1.0));
            let opts_m = QuadOptions::absolute(local * (g * t).exp() / (4.0 * kg));
            let opts_n = QuadOptions::absolute(local * (0.5 * g * t).exp().min(1.0) / (2.0 * kg));
            let (j0, k0) = (aux.j, aux.k);
            let inner_k = |s: f64| -> C64 {
                quad(wk, t_prev, s, &[], QuadOptions::absolute(local * 1e-2))
                    .map(|r| r.value)
                    .unwrap_or(C64::new(f64::NAN, f64::NAN))
            };
            let inner_j = |s: f64| -> C64 {
                quad(
                    wj,
                    t_prev,
                    s,
                    &[],
                    QuadOptions::absolute(local * 1e-2 * (0.5 * g * s).exp()),
                )
                .map(|r| r.value)
                .unwrap_or(C64::new(f64::NAN, f64::NAN))
            };
            let dj = quad(wj, t_prev, t, &[], opts_j)?.value;
            let dk = quad(wk, t_prev, t, &[], QuadOptions::absolute(local))?.value;
            let dm = quad(
                |s| xi(s).conj() * C64::new(0.5 * g * s, d * s).exp() * (k0 + inner_k(s)),
                t_prev,
                t,
                &[],
                opts_m,
            )?
            .value;
            let dn = quad(
                |s| xi(s).conj() * C64::new(-0.5 * g * s, d * s).exp() * (j0 + inner_j(s)),
                t_prev,
                t,
                &[],
                opts_n,
            )?
            .value;
            if !(dm.re.is_finite() && dn.re.is_finite()) {
                return Err(Error::QuadratureNonConvergence {
                    estimate: f64::NAN,
                    tol: local,
                });
            }
            aux.j += dj;
            aux.k += dk;
            aux.m += dm;
            aux.n += dn;
            t_prev = t;
        }
        while next < grid.len() && grid[next] <= t {
            out.push(MapCoefficients::assemble(
                grid[next],
                &aux,
                xi(grid[next]),
                params,
            ));
            next += 1;
        }
    }
    Ok(out)
}

/// Applies the map to an initial state.
pub fn apply_map(coeffs: &MapCoefficients, rho0: &QubitState) -> QubitState {
    QubitState {
        pe: coeffs.a + coeffs.b * rho0.pe,
        coherence: coeffs.c * rho0.coherence,
    }
}

/// Choi matrix Σ |i⟩⟨j| ⊗ Λ(|i⟩⟨j|) with basis index 2i + a.
pub fn choi_matrix(coeffs: &MapCoefficients) -> Matrix4<C64> {
    let r = |x: f64| C64::new(x, 0.0);
    let (a, b) = (coeffs.a, coeffs.b);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = r(1.0 - a);
    m[(1, 1)] = r(a);
    m[(2, 2)] = r(1.0 - a - b);
    m[(3, 3)] = r(a + b);
    m[(0, 3)] = coeffs.c;
    m[(3, 0)] = coeffs.c.conj();
    m
}

/// Smallest eigenvalue of the Choi matrix; the map is CP iff it is ≥ 0.
pub fn choi_min_eig(coeffs: &MapCoefficients) -> f64 {
    choi_matrix(coeffs)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Determinant of the map restricted to the Bloch vector, B·|C|².
pub fn bloch_determinant(coeffs: &MapCoefficients) -> f64 {
    coeffs.b * coeffs.c.norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub t: f64,
    pub which: SingularityKind,
    /// |B| or |C| at the refined time.
    pub residual: f64,
}

const ZERO_TOL: f64 = 1e-10;
const C_MIN_ACCEPT: f64 = 1e-6;

/// Times where B or C vanishes, refined from sign changes (B, and C when it
/// is real) or from interior minima of |C|.
pub fn find_singularities<S: CoefficientSource + ?Sized>(source: &S) -> Result<Vec<Singularity>> {
    let s = source.samples();
    let mut found = Vec::new();
    let zero_crossings = |value: &dyn Fn(&MapCoefficients) -> f64,
                          which: SingularityKind,
                          found: &mut Vec<Singularity>|
     -> Result<()> {
        for (i, c) in s.iter().enumerate() {
            let v = value(c);
            if v == 0.0 && c.t > 0.0 {
                found.push(Singularity {
                    t: c.t,
                    which,
                    residual: 0.0,
                });
            }
            if let Some(next) = s.get(i + 1) {
                let w = value(next);
                if v * w < 0.0 {
                    let (t, r) =
                        bisect(|t| source.at(t).map(|c| value(&c)), c.t, next.t, ZERO_TOL)?;
                    found.push(Singularity {
                        t,
                        which,
                        residual: r.abs(),
                    });
                }
            }
        }
        Ok(())
    };
    zero_crossings(&|c| c.b, SingularityKind::B, &mut found)?;
    if source.real_c() {
        zero_crossings(&|c| c.c.re, SingularityKind::C, &mut found)?;
    } else {
        for i in 1..s.len().saturating_sub(1) {
            let (l, m, r) = (s[i - 1].c.norm(), s[i].c.norm(), s[i + 1].c.norm());
            if m <= l && m < r && m < 1e-3 {
                let (t, v) = golden_min(
                    |t| source.at(t).map(|c| c.c.norm_sqr()),
                    s[i - 1].t,
                    s[i + 1].t,
                    1e-13 * s[i + 1].t.max(1.0),
                )?;
                if v.sqrt() < C_MIN_ACCEPT {
                    found.push(Singularity {
                        t,
                        which: SingularityKind::C,
                        residual: v.sqrt(),
                    });
                }
            }
        }
    }
    found.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_profile_is_semigroup() {
        let p = PhysParams::new(1.3, 0.7, 0.4).unwrap();
        let g = grid(10.0, 101);
        let sol =
            solve_coefficients(&p, &PhotonProfile::Zero, &g, &SolverConfig::default()).unwrap();
        for c in sol.coefficients() {
            let s = MapCoefficients::semigroup(c.t, &p);
            assert_eq!(c.a, 0.0);
            assert!((c.b - s.b).abs() < 1e-15);
            assert!((c.c - s.c).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_at_zero() {
        let p = PhysParams::new(1.0, 1.0, 2.0).unwrap();
        let prof = PhotonProfile::exponential(1.5, &p).unwrap();
        let sol = solve_coefficients(&p, &prof, &[0.0, 1.0], &SolverConfig::default()).unwrap();
        let c0 = sol.coefficients()[0];
        assert_eq!((c0.a, c0.b, c0.c), (0.0, 1.0, C64::new(1.0, 0.0)));
    }

    #[test]
    fn resonant_value_a_at_one() {
        let p = PhysParams::new(1.0, 1.0, 0.0).unwrap();
        let prof = PhotonProfile::exponential(2.0, &p).unwrap();
        let sol = solve_coefficients(&p, &prof, &[0.0, 1.0], &SolverConfig::default()).unwrap();
        let expect = 8.0 * ((-0.5f64).exp() - (-1f64).exp()).powi(2);
        assert!((sol.coefficients()[1].a - expect).abs() < 1e-9);
        assert!((expect - 0.455_635_233).abs() < 1e-9);
        let q = quadrature_coefficients(&p, &prof, &[0.0, 1.0], 1e-11).unwrap();
        assert!((q[1].a - expect).abs() < 1e-10);
    }

    #[test]
    fn quadrature_matches_ode_on_detuned_pulse() {
        let p = PhysParams::new(1.0, 0.8, 1.1).unwrap();
        let prof = crate::make_optimal_pulse(1.5, &p).unwrap();
        let g = grid(4.0, 41);
        let ode = solve_coefficients(&p, &prof, &g, &SolverConfig::default()).unwrap();
        let q = quadrature_coefficients(&p, &prof, &g, 1e-10).unwrap();
        for (x, y) in ode.coefficients().iter().zip(&q) {
            assert!((x.a - y.a).abs() < 1e-8);
            assert!((x.b - y.b).abs() < 1e-8);
            assert!((x.c - y.c).norm() < 1e-8);
            assert!((x.db - y.db).abs() < 1e-8);
        }
    }

    #[test]
    fn restart_between_samples() {
        let p = PhysParams::new(1.0, 1.0, 1.5).unwrap();
        let prof = PhotonProfile::exponential(1.5, &p).unwrap();
        let coarse =
            solve_coefficients(&p, &prof, &grid(4.0, 5), &SolverConfig::default()).unwrap();
        let fine = solve_coefficients(&p, &prof, &[0.0, 2.37], &SolverConfig::default()).unwrap();
        let x = coarse.at(2.37).unwrap();
        let y = fine.coefficients()[1];
        assert!((x.b - y.b).abs() < 1e-10 && (x.c - y.c).norm() < 1e-10);
    }

    #[test]
    fn map_action() {
        let c = MapCoefficients {
            t: 1.0,
            a: 0.2,
            b: 0.5,
            c: C64::new(0.3, -0.4),
            da: 0.0,
            db: 0.0,
            dc: C64::new(0.0, 0.0),
            drive_a: 0.0,
            drive_b: 0.0,
            drive_c: C64::new(0.0, 0.0),
            gamma: 1.0,
            delta0: 0.0,
        };
        let out = apply_map(&c, &QubitState::new(0.5, C64::new(0.1, 0.2)).unwrap());
        assert!((out.pe - 0.45).abs() < 1e-15);
        assert!((out.coherence - C64::new(0.11, 0.02)).norm() < 1e-15);
        let g = apply_map(&c, &QubitState::ground());
        assert_eq!((g.pe, g.coherence), (0.2, C64::new(0.0, 0.0)));
    }

    #[test]
    fn choi_of_identity_and_damping() {
        let p = PhysParams::new(1.0, 1.0, 0.0).unwrap();
        let id = MapCoefficients::semigroup(0.0, &p);
        let mut ev: Vec<f64> = choi_matrix(&id)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[0].abs() < 1e-15 && (ev[3] - 2.0).abs() < 1e-15);
        for t in [0.1, 1.0, 5.0] {
            assert!(choi_min_eig(&MapCoefficients::semigroup(t, &p)) >= -1e-15);
        }
        // A map with |C| too large is not CP.
        let mut bad = MapCoefficients::semigroup(1.0, &p);
        bad.c = C64::new(1.0, 0.0);
        assert!(choi_min_eig(&bad) < -0.1);
    }

    #[test]
    fn determinant() {
        let p = PhysParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(bloch_determinant(&MapCoefficients::semigroup(0.0, &p)), 1.0);
        assert!(
            (bloch_determinant(&MapCoefficients::semigroup(1.0, &p)) - (-2f64).exp()).abs() < 1e-16
        );
    }

    #[test]
    fn singular_resonant_case() {
        let p = PhysParams::new(1.0, 1.0, 0.0).unwrap();
        let prof = PhotonProfile::exponential(1.0, &p).unwrap();
        let sol =
            solve_coefficients(&p, &prof, &grid(15.0, 301), &SolverConfig::default()).unwrap();
        let s = find_singularities(&sol).unwrap();
        assert!(s
            .iter()
            .any(|x| x.which == SingularityKind::B && x.residual < 1e-10));
        assert!(s
            .iter()
            .any(|x| x.which == SingularityKind::C && x.residual < 1e-10));
        let regular = PhotonProfile::exponential(9.5, &p).unwrap();
        let sol =
            solve_coefficients(&p, &regular, &grid(15.0, 301), &SolverConfig::default()).unwrap();
        assert!(find_singularities(&sol).unwrap().is_empty());
    }
}
