//! Two-level emitter in the modulated medium: decay factor β(t), level
//! shift Δ(t) and excited-state population.
//!
//! Frequencies are in units of ω₀ and times in 1/ω₀; β and Δ carry the
//! units of Γ_A as supplied.

mod direct;
mod shift;
mod trace;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use direct::{beta_direct, DirectRates};
pub use shift::{delta_dispersive, delta_dissipative, delta_off_resonant, delta_resonant, sgn_kernel_pv, ShiftParts};
pub use trace::{compute_trace, population, DecayTrace, RateModel};

use crate::dielectric::{upper_half_sqrt, DielectricError, DielectricSpec};
use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmitterError {
    #[error("invalid emitter: {0}")]
    Config(String),
    #[error(transparent)]
    Dielectric(#[from] DielectricError),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error(
        "detuning {detuning} sits on the absorption window edge ±γ₀/2, where the resonant shift diverges; \
         move ω_A off the edge"
    )]
    WindowEdge { detuning: f64 },
    #[error("branch violation: Im √ε < 0 at ω = {omega}")]
    Branch { omega: f64 },
}

impl From<QuadratureError> for EmitterError {
    fn from(e: QuadratureError) -> Self {
        EmitterError::Quadrature(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSpec {
    #[serde(rename = "omega_A")]
    pub omega_a: f64,
    #[serde(rename = "gamma_A")]
    pub gamma_a: f64,
}

impl EmitterSpec {
    pub fn new(omega_a: f64, gamma_a: f64) -> Self {
        Self { omega_a, gamma_a }
    }

    pub fn validate(&self) -> Result<(), EmitterError> {
        if !(self.omega_a > 0.0 && self.omega_a.is_finite()) {
            return Err(EmitterError::Config(format!("omega_A must be > 0, got {}", self.omega_a)));
        }
        if !(self.gamma_a > 0.0 && self.gamma_a.is_finite()) {
            return Err(EmitterError::Config(format!("gamma_A must be > 0, got {}", self.gamma_a)));
        }
        Ok(())
    }
}

/// Warnings when Γ_A ≤ Ω/10 ≤ ω_A/100 fails, i.e. the modulation is not
/// in the rapid-adiabatic window.
pub fn adiabatic_warnings(dielectric: &DielectricSpec, emitter: &EmitterSpec) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(rate) = dielectric.modulation.rate() {
        if emitter.gamma_a > rate / 10.0 {
            out.push(format!(
                "modulation rate Ω = {rate:.3e} is not fast compared with Γ_A = {:.3e} (want Γ_A ≤ Ω/10)",
                emitter.gamma_a
            ));
        }
        if rate > emitter.omega_a / 10.0 {
            out.push(format!(
                "modulation rate Ω = {rate:.3e} is not slow compared with ω_A = {:.3e} (want Ω ≤ ω_A/10)",
                emitter.omega_a
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Dissipative,
    Dispersive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub tag: Regime,
    pub detuning: f64,
    pub threshold: f64,
}

pub fn classify_regime(dielectric: &DielectricSpec, emitter: &EmitterSpec) -> RegimeClassification {
    let detuning = (emitter.omega_a - dielectric.omega0).abs();
    let threshold = dielectric.gamma0 / 2.0;
    RegimeClassification {
        tag: if detuning <= threshold {
            Regime::Dissipative
        } else {
            Regime::Dispersive
        },
        detuning,
        threshold,
    }
}

/// Integrand of the decay factor at (ω, t, t′):
/// i(ω/ω_A) e^{−i(ω−ω_A)(t−t′)} √Im ε(t) √Im ε(t′) / (√ε(t) + √ε*(t′)).
pub fn beta_kernel(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    omega: f64,
    t: f64,
    t_prime: f64,
) -> Result<Complex64, EmitterError> {
    if !(0.0 <= t_prime && t_prime <= t) {
        return Err(EmitterError::Config(format!("need 0 <= t' <= t, got t = {t}, t' = {t_prime}")));
    }
    if !(omega > 0.0 && omega < dielectric.cutoff_lambda) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let now = KernelFactor::new(dielectric, omega, dielectric.gamma(t)?)?;
    let then = KernelFactor::new(dielectric, omega, dielectric.gamma(t_prime)?)?;
    let phase = Complex64::from_polar(1.0, -(omega - emitter.omega_a) * (t - t_prime));
    Ok(now.envelope(&then, omega / emitter.omega_a) * phase)
}

/// √Im ε and √ε at one (ω, γ).
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelFactor {
    sqrt_im: f64,
    root: Complex64,
    /// √ε* on the upper-half branch.
    conj_root: Complex64,
}

impl KernelFactor {
    pub(crate) fn new(dielectric: &DielectricSpec, omega: f64, gamma: f64) -> Result<Self, EmitterError> {
        let eps = dielectric.eps_with_damping(omega, gamma);
        let root = upper_half_sqrt(eps);
        let conj_root = upper_half_sqrt(eps.conj());
        if root.im < 0.0 || conj_root.im < 0.0 {
            return Err(EmitterError::Branch { omega });
        }
        Ok(Self {
            sqrt_im: eps.im.max(0.0).sqrt(),
            root,
            conj_root,
        })
    }

    /// i·ratio·√Im ε(t)√Im ε(t′)/(√ε(t) + √ε*(t′)) with `self` at t.
    pub(crate) fn envelope(&self, earlier: &KernelFactor, ratio: f64) -> Complex64 {
        let num = self.sqrt_im * earlier.sqrt_im;
        if num == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let den = self.root + earlier.conj_root;
        Complex64::new(0.0, ratio * num) / den
    }
}

/// (Γ_A/2)·ω_c/√(2ω₀γ(t)) inside the absorption window, 0 outside.
pub fn beta_dissipative(dielectric: &DielectricSpec, emitter: &EmitterSpec, t: f64) -> Result<f64, EmitterError> {
    if classify_regime(dielectric, emitter).tag == Regime::Dispersive {
        return Ok(0.0);
    }
    resonant_beta0(dielectric, emitter, t)
}

/// Near-resonance β₀ = (Γ_A/2)·ω_c/√(2ω₀γ(t)), without the window gate.
pub(crate) fn resonant_beta0(dielectric: &DielectricSpec, emitter: &EmitterSpec, t: f64) -> Result<f64, EmitterError> {
    let gamma = dielectric.gamma(t)?;
    Ok(0.5 * emitter.gamma_a * dielectric.omega_c / (2.0 * dielectric.omega0 * gamma).sqrt())
}

/// β₀(ω,t) = (Γ_A/2)(ω/ω_A) Re √ε(ω,t).
pub fn beta0(dielectric: &DielectricSpec, emitter: &EmitterSpec, omega: f64, t: f64) -> Result<f64, EmitterError> {
    let gamma = dielectric.gamma(t)?;
    Ok(beta0_with_damping(dielectric, emitter, omega, gamma))
}

pub(crate) fn beta0_with_damping(dielectric: &DielectricSpec, emitter: &EmitterSpec, omega: f64, gamma: f64) -> f64 {
    let n = upper_half_sqrt(dielectric.eps_with_damping(omega, gamma));
    0.5 * emitter.gamma_a * omega / emitter.omega_a * n.re
}

/// β(t) = β₀(ω_A, t).
pub fn beta_dispersive(dielectric: &DielectricSpec, emitter: &EmitterSpec, t: f64) -> Result<f64, EmitterError> {
    beta0(dielectric, emitter, emitter.omega_a, t)
}

/// Atom-polariton coupling, up to one documented constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingStrength {
    pub k: f64,
    pub omega: f64,
    pub t: f64,
    /// g = √Γ_A · ω √Im ε / (ω² ε* − k²).
    pub g: Complex64,
}

impl CouplingStrength {
    pub fn g_sq(&self) -> f64 {
        self.g.norm_sqr()
    }
}

pub fn coupling_strength(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    k: f64,
    omega: f64,
    t: f64,
) -> Result<CouplingStrength, EmitterError> {
    if !(k > 0.0) {
        return Err(EmitterError::Config(format!("wavenumber must be > 0, got {k}")));
    }
    if !(omega > 0.0 && omega < dielectric.cutoff_lambda) {
        return Err(EmitterError::Config(format!("ω must lie in (0, Λ), got {omega}")));
    }
    let eps = dielectric.eps_with_damping(omega, dielectric.gamma(t)?);
    let den = eps.conj() * omega * omega - k * k;
    let g = if eps.im <= 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        emitter.gamma_a.sqrt() * omega * eps.im.sqrt() / den
    };
    Ok(CouplingStrength { k, omega, t, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::ModulationProfile;
    use std::f64::consts::PI;

    fn medium() -> DielectricSpec {
        DielectricSpec::constant(1.0, 0.5, 0.05, 75.0)
    }

    #[test]
    fn regime_threshold_is_inclusive() {
        let d = medium();
        let deep = classify_regime(&d, &EmitterSpec::new(1.0 + 0.03 * 0.05, 1e-6));
        assert_eq!(deep.tag, Regime::Dissipative);
        let edge = classify_regime(&d, &EmitterSpec::new(1.0 + 0.025, 1e-6));
        assert_eq!(edge.tag, Regime::Dissipative);
        assert_eq!(classify_regime(&d, &EmitterSpec::new(2.0, 1e-6)).tag, Regime::Dispersive);
    }

    #[test]
    fn static_kernel_on_diagonal_is_index_real_part() {
        let d = medium();
        let e = EmitterSpec::new(1.5, 1e-6);
        let k = beta_kernel(&d, &e, 1.2, 3.0, 3.0).unwrap();
        let n = upper_half_sqrt(d.eps_with_damping(1.2, 0.05));
        // i Im ε/(2iκ) = η
        assert!((k - Complex64::new(1.2 / 1.5 * n.re, 0.0)).norm() < 1e-12);
        assert_eq!(beta_kernel(&d, &e, 80.0, 3.0, 1.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(beta_kernel(&d, &e, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn dissipative_closed_form() {
        let d = medium().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.99,
            rate: 1.0,
        });
        let e = EmitterSpec::new(1.0, 2.0);
        let peak = beta_dissipative(&d, &e, PI / 2.0).unwrap();
        assert!((peak - 0.5 / (2.0 * 1.99 * 0.05f64).sqrt()).abs() < 1e-14);
        let far = EmitterSpec::new(1.1, 2.0);
        assert_eq!(beta_dissipative(&d, &far, 0.3).unwrap(), 0.0);
        let flat = beta_dissipative(&medium(), &e, 17.0).unwrap();
        assert!((flat - 0.5 / (0.1f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dispersive_values() {
        let d = medium();
        let e = EmitterSpec::new(1.5, 2.0);
        let b = beta_dispersive(&d, &e, 0.0).unwrap();
        let eps = Complex64::new(1.0, 0.0) + 0.25 / Complex64::new(1.0 - 2.25, -0.075);
        assert!((b - upper_half_sqrt(eps).re).abs() < 1e-14);
        // η ≈ √Re ε away from resonance
        assert!((b - (1.0f64 + 0.25 / (1.0 - 2.25)).sqrt()).abs() < 1e-3);
        let mut vac = d.clone();
        vac.omega_c = 0.0;
        assert_eq!(beta_dispersive(&vac, &e, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn coupling_strength_properties() {
        let d = medium();
        let e = EmitterSpec::new(1.5, 1.0);
        // k-scan peaks near Re(ω√ε)
        let w = 2.0;
        let n = upper_half_sqrt(d.eps_with_damping(w, 0.05));
        let ks: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-3).collect();
        let best = ks
            .iter()
            .copied()
            .max_by(|a, b| {
                let ga = coupling_strength(&d, &e, *a, w, 0.0).unwrap().g_sq();
                let gb = coupling_strength(&d, &e, *b, w, 0.0).unwrap().g_sq();
                ga.total_cmp(&gb)
            })
            .unwrap();
        assert!((best - w * n.re).abs() < 5e-3, "{best} vs {}", w * n.re);
        // linear in γ far from resonance, up to O(γ²ω²/(ω²−ω₀²)²)
        let mut strong = d.clone();
        strong.gamma0 = 0.1;
        let r = coupling_strength(&strong, &e, 1.0, 5.0, 0.0).unwrap().g_sq()
            / coupling_strength(&d, &e, 1.0, 5.0, 0.0).unwrap().g_sq();
        assert!((r - 2.0).abs() < 2e-3, "{r}");
    }

    #[test]
    fn adiabatic_window_warnings() {
        let d = medium().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.5,
            rate: 1e-3,
        });
        assert!(adiabatic_warnings(&d, &EmitterSpec::new(1.0, 1e-6)).is_empty());
        assert_eq!(adiabatic_warnings(&d, &EmitterSpec::new(1.0, 1e-3)).len(), 1);
        assert_eq!(adiabatic_warnings(&d, &EmitterSpec::new(1e-3, 1e-3)).len(), 2);
    }
}
