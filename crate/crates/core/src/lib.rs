//! Reduced dynamics of a two-level emitter driven by a single-photon
//! wavepacket: the operator hierarchy, the dynamical map `(A, B, C)`, the
//! time-local generator rates and the divisibility witnesses built on them.
//!
//! ```
//! use photonq::{PhotonProfile, PhysParams, SolverConfig, solve_coefficients, compute_rates};
//!
//! let params = PhysParams::new(1.0, 1.0, 0.0).unwrap();
//! let profile = PhotonProfile::exponential(9.5, &params).unwrap();
//! let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
//! let sol = solve_coefficients(&params, &profile, &grid, &SolverConfig::default()).unwrap();
//! let rates = compute_rates(&sol.coefficients()[50], 1e-9);
//! assert!(rates.gamma_z < 0.0);
//! ```

pub mod dynmap;
mod error;
pub mod exact_exp;
pub mod export;
pub mod hierarchy;
pub mod ode;
mod params;
pub mod profile;
pub mod quad;
pub mod rates;
pub mod roots;
pub mod validation;
pub mod witness;

pub use num_complex::Complex64 as C64;

pub use dynmap::{
    apply_map, bloch_determinant, choi_matrix, choi_min_eig, find_singularities,
    quadrature_coefficients, solve_coefficients, AuxIntegrals, CoefficientSolution,
    CoefficientSource, MapCoefficients, Singularity, SingularityKind,
};
pub use error::{Error, Result};
pub use exact_exp::{
    exp_coefficients, exp_rates_resonant, invertibility_threshold, max_excitation, ExpParams,
    MaxExcitation,
};
pub use hierarchy::{
    analytic_offdiagonal, hierarchy_rhs, solve_hierarchy, uniform_grid, AuxiliarySolution,
    HierarchyState, SolverConfig,
};
pub use params::{PhysParams, QubitState};
pub use profile::{
    make_optimal_pulse, profile_eval, profile_norm, PhotonProfile, ProfileSpec, SampledProfile,
};
pub use rates::{
    accumulate_relaxation, compute_rates, compute_rates_all, semigroup_bound_check, GeneratorRates,
    RateStatus, RelaxationRates, DEFAULT_EPS_SING,
};
pub use witness::{
    blp_directly_from_coeffs, evaluate_witnesses, Verdict, WitnessOptions, WitnessReport,
};
