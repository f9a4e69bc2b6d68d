//! Physical parameters and qubit states.
//!
//! Matrices use the ordered basis `(|g>, |e>)`, so a state reads
//! `[[1 - pe, rho_ge], [rho_eg, pe]]`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Coupling rate, channel split and detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// Total decay rate Γ = Γ₁ + Γ₂.
    pub gamma_total: f64,
    /// Fraction of Γ carried by the photon channel, Γ₁ = κΓ.
    pub kappa: f64,
    /// Detuning Δ₀ between pulse carrier and atomic transition.
    pub delta0: f64,
}

impl PhysParams {
    pub fn new(gamma_total: f64, kappa: f64, delta0: f64) -> Result<Self> {
        let p = PhysParams {
            gamma_total,
            kappa,
            delta0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_total.is_finite() && self.gamma_total > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and > 0, got {}", self.gamma_total),
            ));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::invalid(
                "kappa",
                format!("must lie in [0, 1], got {}", self.kappa),
            ));
        }
        if !self.delta0.is_finite() {
            return Err(Error::invalid("delta0", "must be finite"));
        }
        Ok(())
    }

    /// Γ₁ = κΓ, the decay rate into the photon-carrying channel.
    pub fn gamma1(&self) -> f64 {
        self.kappa * self.gamma_total
    }

    /// Γ₂ = (1 − κ)Γ.
    pub fn gamma2(&self) -> f64 {
        (1.0 - self.kappa) * self.gamma_total
    }
}

/// Qubit density matrix in terms of excited population and coherence ρ_ge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub pe: f64,
    pub coherence: C64,
}

const STATE_TOL: f64 = 1e-12;

impl QubitState {
    pub fn new(pe: f64, coherence: C64) -> Result<Self> {
        if !(pe.is_finite() && (-STATE_TOL..=1.0 + STATE_TOL).contains(&pe)) {
            return Err(Error::invalid(
                "pe0",
                format!("population must lie in [0, 1], got {pe}"),
            ));
        }
        if !(coherence.re.is_finite() && coherence.im.is_finite()) {
            return Err(Error::invalid("coherence", "must be finite"));
        }
        if coherence.norm_sqr() > pe * (1.0 - pe) + STATE_TOL {
            return Err(Error::invalid(
                "coherence",
                format!(
                    "|rho_ge|^2 = {} exceeds pe(1 - pe) = {}",
                    coherence.norm_sqr(),
                    pe * (1.0 - pe)
                ),
            ));
        }
        Ok(QubitState { pe, coherence })
    }

    /// State read off a numerically evolved density matrix; no validation.
    pub fn from_matrix(rho: &Matrix2<C64>) -> Self {
        QubitState {
            pe: rho[(1, 1)].re,
            coherence: rho[(0, 1)],
        }
    }

    pub fn ground() -> Self {
        QubitState {
            pe: 0.0,
            coherence: C64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        QubitState {
            pe: 1.0,
            coherence: C64::new(0.0, 0.0),
        }
    }

    pub fn density_matrix(&self) -> Matrix2<C64> {
        Matrix2::new(
            C64::new(1.0 - self.pe, 0.0),
            self.coherence,
            self.coherence.conj(),
            C64::new(self.pe, 0.0),
        )
    }

    /// Trace distance ½‖ρ − σ‖₁. For a traceless Hermitian 2×2 difference the
    /// eigenvalues are ±√(d² + |x|²).
    pub fn trace_distance(&self, other: &QubitState) -> f64 {
        let d = self.pe - other.pe;
        let x = self.coherence - other.coherence;
        (d * d + x.norm_sqr()).sqrt()
    }
}
