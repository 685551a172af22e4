//! Drude-Lorentz medium with time-modulated damping.
//!
//! All frequencies are in units of ω₀ and times in units of 1/ω₀ unless a
//! caller rescales them.

mod kk;
mod modulation;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kk::{kramers_kronig_re, LossTable};
pub use kk::{excision_radius, resonance_grid};
pub use modulation::{GammaSample, GammaTable, ModulationProfile};

use crate::interp::InterpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DielectricError {
    #[error("invalid dielectric: {0}")]
    Invalid(String),
    #[error("time {t} outside the tabulated range [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("frequency {omega} outside the allowed range: {reason}")]
    FrequencyOutOfRange { omega: f64, reason: String },
    #[error("ω_c = 0: the coupling is undefined for a vacuum-like medium")]
    DegenerateMedium,
    #[error("grid spacing {spacing:.3e} near ω = {omega} exceeds the excision radius {radius:.3e}")]
    GridTooSparse { omega: f64, spacing: f64, radius: f64 },
    #[error(transparent)]
    Table(#[from] InterpError),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DielectricSpec {
    pub omega0: f64,
    pub omega_c: f64,
    pub gamma0: f64,
    pub modulation: ModulationProfile,
    pub cutoff_lambda: f64,
}

impl DielectricSpec {
    /// Unmodulated medium.
    pub fn constant(omega0: f64, omega_c: f64, gamma0: f64, cutoff_lambda: f64) -> Self {
        Self {
            omega0,
            omega_c,
            gamma0,
            modulation: ModulationProfile::Constant,
            cutoff_lambda,
        }
    }

    pub fn with_modulation(mut self, modulation: ModulationProfile) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn validate(&self) -> Result<(), DielectricError> {
        let bad = |msg: String| Err(DielectricError::Invalid(msg));
        let finite = [self.omega0, self.omega_c, self.gamma0, self.cutoff_lambda]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("all parameters must be finite".into());
        }
        if self.omega0 <= 0.0 {
            return bad(format!("omega0 must be > 0, got {}", self.omega0));
        }
        if self.omega_c < 0.0 {
            return bad(format!("omega_c must be >= 0, got {}", self.omega_c));
        }
        if self.gamma0 <= 0.0 {
            return bad(format!("gamma0 must be > 0, got {}", self.gamma0));
        }
        let min_cutoff = 10.0 * self.omega0.max(self.omega_c);
        if self.cutoff_lambda < min_cutoff {
            return bad(format!(
                "cutoff_lambda must be >= 10·max(omega0, omega_c) = {min_cutoff}, got {}",
                self.cutoff_lambda
            ));
        }
        self.modulation.validate()
    }

    /// γ(t).
    pub fn gamma(&self, t: f64) -> Result<f64, DielectricError> {
        if !(t >= 0.0) {
            return Err(DielectricError::Invalid(format!("time must be >= 0, got {t}")));
        }
        self.modulation.gamma(self.gamma0, t)
    }

    /// Time-independent ε for a given damping; 1 outside |ω| < Λ.
    pub fn eps_with_damping(&self, omega: f64, gamma: f64) -> Complex64 {
        if omega.abs() >= self.cutoff_lambda {
            return Complex64::new(1.0, 0.0);
        }
        let den = Complex64::new(self.omega0 * self.omega0 - omega * omega, -gamma * omega);
        1.0 + self.omega_c * self.omega_c / den
    }

    /// Im ε for a given damping, from the real closed form.
    pub fn im_eps_with_damping(&self, omega: f64, gamma: f64) -> f64 {
        if omega.abs() >= self.cutoff_lambda {
            return 0.0;
        }
        let detune = omega * omega - self.omega0 * self.omega0;
        self.omega_c * self.omega_c * omega * gamma / (detune * detune + omega * omega * gamma * gamma)
    }
}

/// Permittivity or refractive index sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Permittivity,
    RefractiveIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResponse {
    pub value: Complex64,
    pub omega: f64,
    pub t: f64,
    pub kind: ResponseKind,
    /// Set when |ω| ≥ Λ, where the medium response is switched off.
    pub beyond_cutoff: bool,
}

/// γ(t) for the spec's modulation profile.
pub fn gamma_at(spec: &DielectricSpec, t: f64) -> Result<f64, DielectricError> {
    spec.gamma(t)
}

/// ε(ω, t) = 1 + ω_c²/(ω₀² − ω² − iγ(t)ω) for |ω| < Λ, exactly 1 beyond.
pub fn epsilon(spec: &DielectricSpec, omega: f64, t: f64) -> Result<ComplexResponse, DielectricError> {
    let gamma = spec.gamma(t)?;
    Ok(ComplexResponse {
        value: spec.eps_with_damping(omega, gamma),
        omega,
        t,
        kind: ResponseKind::Permittivity,
        beyond_cutoff: omega.abs() >= spec.cutoff_lambda,
    })
}

/// ω_c²ωγ(t) / ((ω² − ω₀²)² + ω²γ(t)²), zero beyond the cutoff.
pub fn im_epsilon_from_coupling(spec: &DielectricSpec, omega: f64, t: f64) -> Result<f64, DielectricError> {
    Ok(spec.im_eps_with_damping(omega, spec.gamma(t)?))
}

/// |ζ(ω,t)|² = 2ω² Im ε / (π ω_c²).
pub fn zeta_magnitude_sq(spec: &DielectricSpec, omega: f64, t: f64) -> Result<f64, DielectricError> {
    if spec.omega_c == 0.0 {
        return Err(DielectricError::DegenerateMedium);
    }
    let im = im_epsilon_from_coupling(spec, omega, t)?;
    Ok(2.0 * omega * omega * im / (std::f64::consts::PI * spec.omega_c * spec.omega_c))
}

/// Square root on the branch with Im ≥ 0. On the negative real axis the
/// result is `+i√|z|`.
pub fn upper_half_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re < 0.0 {
        return Complex64::new(0.0, (-z.re).sqrt());
    }
    let w = z.sqrt();
    if w.im < 0.0 {
        -w
    } else {
        w
    }
}

/// n = η + iκ with κ ≥ 0.
pub fn refractive_index(spec: &DielectricSpec, omega: f64, t: f64) -> Result<ComplexResponse, DielectricError> {
    let eps = epsilon(spec, omega, t)?;
    Ok(ComplexResponse {
        value: upper_half_sqrt(eps.value),
        kind: ResponseKind::RefractiveIndex,
        ..eps
    })
}

/// ε(ω,t) ≈ 1 + iω_c²/(ω₀γ(t)), valid for |ω − ω₀| ≲ γ₀/2.
pub fn near_resonance_epsilon(spec: &DielectricSpec, t: f64) -> Result<Complex64, DielectricError> {
    let gamma = spec.gamma(t)?;
    Ok(Complex64::new(1.0, spec.omega_c * spec.omega_c / (spec.omega0 * gamma)))
}

/// ε(ω,t) ≈ 1 + ω_c²/(ω₀² − ω²) + iω_c²ωγ(t)/(ω₀² − ω²)², valid far from ω₀.
pub fn far_resonance_epsilon(spec: &DielectricSpec, omega: f64, t: f64) -> Result<Complex64, DielectricError> {
    let gamma = spec.gamma(t)?;
    let d = spec.omega0 * spec.omega0 - omega * omega;
    let wc2 = spec.omega_c * spec.omega_c;
    Ok(Complex64::new(1.0 + wc2 / d, wc2 * omega * gamma / (d * d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealityCheck {
    pub residual: f64,
    pub pass: bool,
}

/// Residual threshold for the parity identity ε(−ω) = ε*(ω).
pub const REALITY_THRESHOLD: f64 = 1e-12;

/// Checks ε(−ω,t) = ε*(ω,t); the residual is relative to |ε(ω,t)|.
pub fn reality_constraint_check(spec: &DielectricSpec, omega: f64, t: f64) -> Result<RealityCheck, DielectricError> {
    let plus = epsilon(spec, omega, t)?.value;
    let minus = epsilon(spec, -omega, t)?.value;
    let residual = (minus - plus.conj()).norm() / plus.norm();
    Ok(RealityCheck {
        residual,
        pass: residual < REALITY_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> DielectricSpec {
        DielectricSpec::constant(1.0, 0.5, 0.05, 75.0)
    }

    fn modulated() -> DielectricSpec {
        spec().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.99,
            rate: 1.0,
        })
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn gamma_examples() {
        let s = modulated();
        assert_eq!(gamma_at(&s, 0.0).unwrap(), 0.05);
        assert!((gamma_at(&s, PI / 2.0).unwrap() - 1.99 * 0.05).abs() < 1e-15);
        assert_eq!(gamma_at(&spec(), 123.4).unwrap(), 0.05);
        assert!(gamma_at(&s, -1.0).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let s = spec();
        let at_res = epsilon(&s, 1.0, 0.0).unwrap().value;
        assert!(close(at_res, Complex64::new(1.0, 0.25 / 0.05), 1e-15));
        let dc = epsilon(&s, 0.0, 0.0).unwrap().value;
        assert_eq!(dc, Complex64::new(1.25, 0.0));
        let two = epsilon(&s, 2.0, 0.0).unwrap().value;
        let expect = 1.0 + 0.25 / Complex64::new(-3.0, -0.1);
        assert!(close(two, expect, 1e-15));
    }

    #[test]
    fn beyond_cutoff_is_vacuum() {
        let r = epsilon(&spec(), 80.0, 0.0).unwrap();
        assert_eq!(r.value, Complex64::new(1.0, 0.0));
        assert!(r.beyond_cutoff);
        assert!(epsilon(&spec(), 75.0, 0.0).unwrap().beyond_cutoff);
        assert!(!epsilon(&spec(), 74.9, 0.0).unwrap().beyond_cutoff);
    }

    #[test]
    fn im_epsilon_examples() {
        let s = spec();
        assert!((im_epsilon_from_coupling(&s, 1.0, 0.0).unwrap() - 0.25 / 0.05).abs() < 1e-13);
        assert!(im_epsilon_from_coupling(&s, 1e-12, 0.0).unwrap().abs() < 1e-12);
        let expect = 0.25 * 2.0 * 0.05 / (9.0 + 4.0 * 0.0025);
        assert!((im_epsilon_from_coupling(&s, 2.0, 0.0).unwrap() - expect).abs() < 1e-16);
        for &w in &[0.3, 0.99, 1.0, 1.7, 40.0] {
            let direct = epsilon(&s, w, 0.0).unwrap().value.im;
            let formula = im_epsilon_from_coupling(&s, w, 0.0).unwrap();
            assert!((direct - formula).abs() <= 1e-14 * formula.abs());
        }
    }

    #[test]
    fn zeta_examples() {
        let s = spec();
        assert_eq!(zeta_magnitude_sq(&s, 100.0, 0.0).unwrap(), 0.0);
        let z = zeta_magnitude_sq(&s, 1.0, 0.0).unwrap();
        assert!((z - 2.0 / (PI * 0.05)).abs() < 1e-12);
        let mut vacuum = s.clone();
        vacuum.omega_c = 0.0;
        assert_eq!(zeta_magnitude_sq(&vacuum, 1.0, 0.0), Err(DielectricError::DegenerateMedium));
    }

    #[test]
    fn sqrt_branch_examples() {
        assert_eq!(upper_half_sqrt(Complex64::new(4.0, 0.0)), Complex64::new(2.0, 0.0));
        assert_eq!(upper_half_sqrt(Complex64::new(-1.0, 0.0)), Complex64::new(0.0, 1.0));
        let (eta, kappa) = (1.3, 0.4);
        let z = Complex64::new(eta * eta - kappa * kappa, -2.0 * eta * kappa);
        assert!(close(upper_half_sqrt(z), Complex64::new(-eta, kappa), 1e-15));
        // negative zero imaginary part still lands on +i
        assert_eq!(upper_half_sqrt(Complex64::new(-4.0, -0.0)), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn refractive_index_examples() {
        let s = spec();
        assert_eq!(refractive_index(&s, 100.0, 0.0).unwrap().value, Complex64::new(1.0, 0.0));
        let dc = refractive_index(&s, 0.0, 0.0).unwrap().value;
        assert!((dc.re - 1.25f64.sqrt()).abs() < 1e-15 && dc.im == 0.0);
        // deep-dissipative medium: ω_c²/(ω₀γ) ≫ 1
        let deep = DielectricSpec::constant(1.0, 3.0, 0.01, 100.0);
        let n = refractive_index(&deep, 1.0, 0.0).unwrap().value;
        let approx = Complex64::new(1.0, 1.0) * (3.0 / (2.0f64 * 0.01).sqrt());
        assert!(close(n, approx, 2e-3));
    }

    #[test]
    fn reality_check_examples() {
        let s = modulated();
        for (w, t) in [(0.7, 0.0), (1.0, 0.3), (13.0, 2.0)] {
            let r = reality_constraint_check(&s, w, t).unwrap();
            assert!(r.pass && r.residual < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn far_resonance_form_is_close_far_away() {
        let s = modulated();
        let w = 1.5;
        let exact = epsilon(&s, w, 0.4).unwrap().value;
        let far = far_resonance_epsilon(&s, w, 0.4).unwrap();
        let rel = (far - exact).norm() / (exact - 1.0).norm();
        let g = s.gamma(0.4).unwrap();
        assert!(rel < 5.0 * (g / (w - 1.0)).powi(2), "{rel}");
    }

    #[test]
    fn validation() {
        assert!(spec().validate().is_ok());
        let mut s = spec();
        s.cutoff_lambda = 5.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.gamma0 = 0.0;
        assert!(s.validate().is_err());
        let s = spec().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 1.0,
            rate: 1.0,
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = modulated();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"A\":0.99"));
        let back: DielectricSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
