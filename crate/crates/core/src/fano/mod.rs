//! Fano diagonalization of the matter field: renormalized frequency,
//! dispersion function z(ω,t) and the dressed-operator coefficients.
//!
//! Conventions: ρ = 1, V(ω,t) is real and non-negative for ω > 0, and |v|²
//! is even in ω so that |V|² = |v|²ω/ω̃₀ is odd.

mod checks;
mod polariton;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checks::{
    coupling_inequality_check, orthonormality_check, sum_rule_check, CheckReport, OrthonormalityReport,
    SUM_RULE_TOLERANCE,
};
pub use polariton::{polariton_coeffs, polariton_inequality_check, PolaritonCoefficients};

use crate::dielectric::{DielectricError, DielectricSpec, ModulationProfile};
use crate::interp::Pchip;
use crate::quadrature::{integrate_segments, pv_integrate, AdaptiveLimits, PvIntegrand, QuadratureError, Tolerance};

const Z_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-10,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FanoError {
    #[error("invalid coupling: {0}")]
    Config(String),
    #[error(transparent)]
    Dielectric(#[from] DielectricError),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("ω = {omega} lies on the cutoff, where z(ω) diverges")]
    CutoffPole { omega: f64 },
    #[error("ω² − ω̃₀²z vanishes at ω = {omega}")]
    Singular { omega: f64 },
    #[error("ω = {omega} outside (0, Λ)")]
    OutOfRange { omega: f64 },
}

impl From<QuadratureError> for FanoError {
    fn from(e: QuadratureError) -> Self {
        FanoError::Quadrature(e.to_string())
    }
}

/// Shape of |v(ω,t)|² on (0, Λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CouplingShape {
    /// |v|² = 2γ(t)/π.
    DrudeLorentz {
        gamma0: f64,
        modulation: ModulationProfile,
    },
    /// Time-independent |v|² sampled on [0, Λ].
    Tabulated {
        #[serde(with = "pchip_samples")]
        v_sq: Pchip,
    },
}

mod pchip_samples {
    use super::Pchip;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Samples {
        omega: Vec<f64>,
        v_sq: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(p: &Pchip, s: S) -> Result<S::Ok, S::Error> {
        Samples {
            omega: p.x().to_vec(),
            v_sq: p.y().to_vec(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Pchip, D::Error> {
        let raw = Samples::deserialize(d)?;
        Pchip::new(raw.omega, raw.v_sq).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub omega0: f64,
    pub cutoff: f64,
    pub shape: CouplingShape,
}

impl CouplingSpec {
    /// Boxcar coupling equivalent to a Drude-Lorentz medium.
    pub fn drude_lorentz(spec: &DielectricSpec) -> Self {
        Self {
            omega0: spec.omega0,
            cutoff: spec.cutoff_lambda,
            shape: CouplingShape::DrudeLorentz {
                gamma0: spec.gamma0,
                modulation: spec.modulation.clone(),
            },
        }
    }

    /// Tabulated |v|² whose samples must span exactly [0, cutoff].
    pub fn tabulated(omega0: f64, omega: Vec<f64>, v_sq: Vec<f64>) -> Result<Self, FanoError> {
        if v_sq.iter().any(|v| !(*v >= 0.0)) {
            return Err(FanoError::Config("|v|² samples must be non-negative".into()));
        }
        if omega.first() != Some(&0.0) {
            return Err(FanoError::Config("|v|² samples must start at ω = 0".into()));
        }
        let p = Pchip::new(omega, v_sq).map_err(|e| FanoError::Config(e.to_string()))?;
        let cutoff = p.domain().1;
        let spec = Self {
            omega0,
            cutoff,
            shape: CouplingShape::Tabulated { v_sq: p },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FanoError> {
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return Err(FanoError::Config(format!("omega0 must be >= 0, got {}", self.omega0)));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(FanoError::Config(format!("cutoff must be finite and > 0, got {}", self.cutoff)));
        }
        match &self.shape {
            CouplingShape::DrudeLorentz { gamma0, modulation } => {
                if !(*gamma0 >= 0.0 && gamma0.is_finite()) {
                    return Err(FanoError::Config(format!("gamma0 must be >= 0, got {gamma0}")));
                }
                modulation.validate()?;
            }
            CouplingShape::Tabulated { v_sq } => {
                if (v_sq.domain().1 - self.cutoff).abs() > 0.0 {
                    return Err(FanoError::Config("tabulated |v|² must end at the cutoff".into()));
                }
            }
        }
        Ok(())
    }

    /// Same coupling with the damping scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out.shape {
            CouplingShape::DrudeLorentz { gamma0, .. } => *gamma0 *= factor,
            CouplingShape::Tabulated { v_sq } => {
                let y = v_sq.y().iter().map(|v| v * factor).collect();
                *v_sq = Pchip::new(v_sq.x().to_vec(), y).expect("scaling keeps the table valid");
            }
        }
        out
    }

    fn gamma(&self, t: f64) -> Result<f64, FanoError> {
        match &self.shape {
            CouplingShape::DrudeLorentz { gamma0, modulation } => {
                if !(t >= 0.0) {
                    return Err(FanoError::Config(format!("time must be >= 0, got {t}")));
                }
                Ok(modulation.gamma(*gamma0, t)?)
            }
            CouplingShape::Tabulated { .. } => Ok(0.0),
        }
    }
}

/// ω̃₀(t), z(ω,t) and |V(ω,t)|² at one instant.
#[derive(Debug, Clone)]
pub struct RenormalizedFrequencies<'a> {
    coupling: &'a CouplingSpec,
    pub t: f64,
    /// γ(t) for Drude-Lorentz couplings, 0 otherwise.
    pub gamma: f64,
    pub omega0_tilde: f64,
    /// ∫₀^Λ |v|² dω.
    pub v_sq_integral: f64,
}

impl<'a> RenormalizedFrequencies<'a> {
    pub fn at(coupling: &'a CouplingSpec, t: f64) -> Result<Self, FanoError> {
        coupling.validate()?;
        let gamma = coupling.gamma(t)?;
        let v_sq_integral = match &coupling.shape {
            CouplingShape::DrudeLorentz { .. } => 2.0 * gamma * coupling.cutoff / std::f64::consts::PI,
            CouplingShape::Tabulated { v_sq } => {
                integrate_segments(
                    |w| Complex64::new(v_sq.eval_unchecked(w), 0.0),
                    v_sq.x(),
                    Tolerance::relative(1e-13),
                    AdaptiveLimits::default(),
                )?
                .value
                .re
            }
        };
        let omega0_tilde = (coupling.omega0 * coupling.omega0 + v_sq_integral).sqrt();
        Ok(Self {
            coupling,
            t,
            gamma,
            omega0_tilde,
            v_sq_integral,
        })
    }

    pub fn coupling(&self) -> &CouplingSpec {
        self.coupling
    }

    /// |v(ω,t)|², even in ω, zero for |ω| ≥ Λ.
    pub fn v_sq(&self, omega: f64) -> f64 {
        let w = omega.abs();
        if w >= self.coupling.cutoff {
            return 0.0;
        }
        match &self.coupling.shape {
            CouplingShape::DrudeLorentz { .. } => 2.0 * self.gamma / std::f64::consts::PI,
            CouplingShape::Tabulated { v_sq } => v_sq.eval_unchecked(w).max(0.0),
        }
    }

    /// |V(ω,t)|² = |v|² ω/ω̃₀, odd in ω.
    pub fn big_v_sq(&self, omega: f64) -> f64 {
        self.v_sq(omega) * omega / self.omega0_tilde
    }

    /// V(ω,t) in the real gauge; defined for ω ≥ 0.
    pub fn big_v(&self, omega: f64) -> f64 {
        self.big_v_sq(omega.abs()).sqrt()
    }

    /// z(ω,t). Drude-Lorentz couplings use the closed-form PV integral.
    pub fn z(&self, omega: f64) -> Result<Complex64, FanoError> {
        match self.coupling.shape {
            CouplingShape::DrudeLorentz { .. } => self.z_closed_form(omega),
            CouplingShape::Tabulated { .. } => self.z_quadrature(omega),
        }
    }

    /// z(ω,t) with the PV integral done analytically for the boxcar.
    pub fn z_closed_form(&self, omega: f64) -> Result<Complex64, FanoError> {
        let CouplingShape::DrudeLorentz { .. } = self.coupling.shape else {
            return self.z_quadrature(omega);
        };
        let lam = self.coupling.cutoff;
        if omega.abs() == lam {
            return Err(FanoError::CutoffPole { omega });
        }
        let c = 2.0 * self.gamma / (std::f64::consts::PI * self.omega0_tilde);
        let pv = c * (2.0 * lam + omega * ((lam - omega) / (lam + omega)).abs().ln());
        let res = std::f64::consts::PI * self.big_v_sq(omega);
        Ok(1.0 - Complex64::new(pv, -res) / (2.0 * self.omega0_tilde))
    }

    /// z(ω,t) from principal-value quadrature of the dispersion integral.
    pub fn z_quadrature(&self, omega: f64) -> Result<Complex64, FanoError> {
        let lam = self.coupling.cutoff;
        if omega.abs() == lam {
            return Err(FanoError::CutoffPole { omega });
        }
        if omega < 0.0 {
            return Ok(self.z_quadrature(-omega)?.conj());
        }
        // Folding the odd |V|² onto (0, Λ): 1/(u−ω) + 1/(u+ω) = 2u/(u²−ω²).
        let mut hints = vec![self.coupling.omega0];
        if let CouplingShape::Tabulated { v_sq } = &self.coupling.shape {
            hints.extend(v_sq.x().iter().copied().filter(|&x| (x - omega).abs() > 1e-3 * lam));
        }
        hints.retain(|&x| x > 0.0 && x < lam);
        let pv = if omega == 0.0 {
            let mut pts = vec![0.0];
            pts.extend(hints.iter().copied());
            pts.push(lam);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_segments(
                |u| Complex64::new(2.0 * self.big_v_sq(u) / u, 0.0),
                &pts,
                Z_TOL,
                AdaptiveLimits::default(),
            )?
            .value
            .re
        } else if omega < lam {
            let numerator = |u: f64| Complex64::new(self.big_v_sq(u) * 2.0 * u / (u + omega), 0.0);
            pv_integrate(
                PvIntegrand::new(numerator, omega, 0.0, lam).with_breakpoints(hints),
                Z_TOL,
            )?
            .value
            .re
        } else {
            let mut pts = vec![0.0];
            pts.extend(hints.iter().copied());
            pts.push(lam);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_segments(
                |u| Complex64::new(self.big_v_sq(u) * 2.0 * u / (u * u - omega * omega), 0.0),
                &pts,
                Z_TOL,
                AdaptiveLimits::default(),
            )?
            .value
            .re
        };
        let res = std::f64::consts::PI * self.big_v_sq(omega);
        Ok(1.0 - Complex64::new(pv, -res) / (2.0 * self.omega0_tilde))
    }

    /// ω² − ω̃₀² z(ω,t).
    pub fn denominator(&self, omega: f64) -> Result<Complex64, FanoError> {
        let d = omega * omega - self.omega0_tilde * self.omega0_tilde * self.z(omega)?;
        if d.norm() == 0.0 {
            return Err(FanoError::Singular { omega });
        }
        Ok(d)
    }
}

/// ω̃₀(t) = √(ω₀² + ∫|v|²dω).
pub fn omega0_tilde(coupling: &CouplingSpec, t: f64) -> Result<f64, FanoError> {
    Ok(RenormalizedFrequencies::at(coupling, t)?.omega0_tilde)
}

/// z(ω,t) for any coupling.
pub fn z_of(coupling: &CouplingSpec, omega: f64, t: f64) -> Result<Complex64, FanoError> {
    RenormalizedFrequencies::at(coupling, t)?.z(omega)
}

/// `delta_weight·δ(ω−ω′) + pv_numerator·PV 1/(ω−ω′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularKernel {
    pub delta_weight: Complex64,
    pub pv_numerator: Complex64,
}

impl SingularKernel {
    /// Regular part at ω ≠ ω′; `None` on the diagonal.
    pub fn regular(&self, omega: f64, omega_prime: f64) -> Option<Complex64> {
        (omega != omega_prime).then(|| self.pv_numerator / (omega - omega_prime))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoCoefficients {
    pub omega: f64,
    pub omega_prime: f64,
    pub t: f64,
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub alpha1: SingularKernel,
    pub beta1: Complex64,
}

impl FanoCoefficients {
    /// |α₀|² − |β₀|².
    pub fn norm_density(&self) -> f64 {
        self.alpha0.norm_sqr() - self.beta0.norm_sqr()
    }
}

pub fn fano_coeffs(coupling: &CouplingSpec, omega: f64, omega_prime: f64, t: f64) -> Result<FanoCoefficients, FanoError> {
    let rf = RenormalizedFrequencies::at(coupling, t)?;
    fano_coeffs_at(&rf, omega, omega_prime)
}

/// Coefficients with a precomputed [`RenormalizedFrequencies`].
pub fn fano_coeffs_at(rf: &RenormalizedFrequencies<'_>, omega: f64, omega_prime: f64) -> Result<FanoCoefficients, FanoError> {
    let lam = rf.coupling.cutoff;
    for w in [omega, omega_prime] {
        if !(w > 0.0 && w < lam) {
            return Err(FanoError::OutOfRange { omega: w });
        }
    }
    let wt = rf.omega0_tilde;
    let d = rf.denominator(omega)?;
    let v = rf.big_v(omega);
    let vp = rf.big_v(omega_prime);
    let common = v / d;
    let a = common * (wt / 2.0);
    Ok(FanoCoefficients {
        omega,
        omega_prime,
        t: rf.t,
        alpha0: common * ((omega + wt) / 2.0),
        beta0: common * ((omega - wt) / 2.0),
        alpha1: SingularKernel {
            delta_weight: 1.0 + Complex64::new(0.0, std::f64::consts::PI) * a * v,
            pv_numerator: a * vp,
        },
        beta1: a * vp / (omega + omega_prime),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dl(lam: f64) -> CouplingSpec {
        CouplingSpec::drude_lorentz(&DielectricSpec::constant(1.0, 0.5, 0.05, lam))
    }

    fn dl_denominator(omega: f64, gamma: f64, lam: f64) -> Complex64 {
        let log = ((lam - omega) / (lam + omega)).abs().ln();
        Complex64::new(omega * omega - 1.0 + gamma * omega / PI * log, -gamma * omega)
    }

    #[test]
    fn omega0_tilde_values() {
        // midpoint-rule oracle for ∫|v|²
        let lam = 50.0;
        let n = 10_000;
        let h = lam / n as f64;
        let mid: f64 = (0..n).map(|_| 2.0 * 0.05 / PI * h).sum();
        let w = omega0_tilde(&dl(lam), 0.0).unwrap();
        assert!((w - (1.0 + mid).sqrt()).abs() < 1e-12);
        assert!((w - (1.0f64 + 5.0 / PI).sqrt()).abs() < 1e-14);

        let modulated = CouplingSpec::drude_lorentz(
            &DielectricSpec::constant(1.0, 0.5, 0.05, lam).with_modulation(ModulationProfile::Sinusoidal {
                amplitude: 0.99,
                rate: 1.0,
            }),
        );
        let peak = omega0_tilde(&modulated, PI / 2.0).unwrap();
        assert!((peak - (1.0 + 2.0 * 0.0995 * 50.0 / PI).sqrt()).abs() < 1e-12);

        let mut zero = dl(lam);
        zero.shape = CouplingShape::DrudeLorentz {
            gamma0: 0.0,
            modulation: ModulationProfile::Constant,
        };
        assert_eq!(omega0_tilde(&zero, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_denominator_identity() {
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        for w in [0.2, 0.97, 1.0, 1.3, 7.0, 49.0] {
            let d = rf.denominator(w).unwrap();
            let e = dl_denominator(w, 0.05, 50.0);
            assert!((d - e).norm() < 1e-12 * e.norm(), "ω={w}");
        }
    }

    #[test]
    fn quadrature_z_matches_closed_form() {
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        for w in [0.0, 0.3, 1.0, 2.0, 30.0, 60.0, -1.5] {
            let q = rf.z_quadrature(w).unwrap();
            let a = rf.z_closed_form(w).unwrap();
            assert!((q - a).norm() < 1e-9, "ω={w}: {q} vs {a}");
        }
    }

    #[test]
    fn z_conjugation_symmetry() {
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        for w in [0.4, 1.0, 3.3] {
            let plus = rf.z(w).unwrap();
            let minus = rf.z(-w).unwrap();
            assert!((minus.conj() - plus).norm() < 1e-14);
        }
    }

    #[test]
    fn imaginary_part_of_z_follows_the_coupling() {
        // −iπ|V|² inside 1 − (…)/(2ω̃₀) leaves Im z = π|V|²/(2ω̃₀) ≥ 0 for ω > 0
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        for w in [0.2, 1.0, 7.0, 49.0] {
            let expected = std::f64::consts::PI * rf.big_v_sq(w) / (2.0 * rf.omega0_tilde);
            let im = rf.z(w).unwrap().im;
            assert!(im >= 0.0 && (im - expected).abs() < 1e-14 * expected.max(1.0), "ω={w}: {im} vs {expected}");
        }
    }

    #[test]
    fn z_tends_to_one_far_beyond_cutoff() {
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        let far = rf.z(1e6).unwrap();
        assert!((far - 1.0).norm() < 1e-3);
        assert!(matches!(rf.z(50.0), Err(FanoError::CutoffPole { .. })));
    }

    #[test]
    fn denominator_approaches_lorentzian_as_cutoff_grows() {
        let target = |w: f64| Complex64::new(w * w - 1.0, -0.05 * w).norm_sqr();
        let mut last = f64::INFINITY;
        for lam in [50.0, 100.0, 200.0] {
            let c = dl(lam);
            let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
            let w = 1.2;
            let rel = (rf.denominator(w).unwrap().norm_sqr() - target(w)).abs() / target(w);
            assert!(rel < last);
            last = rel;
        }
        // at ω = ω₀ the real log term is the only discrepancy
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        let rel = (rf.denominator(1.0).unwrap().norm_sqr() - target(1.0)).abs() / target(1.0);
        assert!(rel < 2.0 / PI * 0.05 / 50.0, "{rel}");
    }

    #[test]
    fn coefficient_identities() {
        let c = dl(50.0);
        let rf = RenormalizedFrequencies::at(&c, 0.0).unwrap();
        let w = 0.93;
        let f = fano_coeffs_at(&rf, w, 1.4).unwrap();
        let expected = w * rf.omega0_tilde * rf.big_v_sq(w) / rf.denominator(w).unwrap().norm_sqr();
        assert!((f.norm_density() - expected).abs() < 1e-12 * expected);
        assert!(f.norm_density() >= 0.0);

        let on = fano_coeffs_at(&rf, rf.omega0_tilde, 1.0).unwrap();
        assert_eq!(on.beta0, Complex64::new(0.0, 0.0));
        assert!(on.alpha1.regular(1.0, 1.0).is_none());
        assert!(f.alpha1.regular(w, 1.4).is_some());
        assert!(matches!(fano_coeffs_at(&rf, 0.0, 1.0), Err(FanoError::OutOfRange { .. })));
    }

    #[test]
    fn tabulated_coupling_round_trip() {
        let omega: Vec<f64> = (0..=100).map(|k| k as f64 * 0.2).collect();
        let v: Vec<f64> = omega.iter().map(|w| 0.03 * (-(w - 1.0) * (w - 1.0)).exp()).collect();
        let c = CouplingSpec::tabulated(1.0, omega, v).unwrap();
        assert_eq!(c.cutoff, 20.0);
        let text = serde_json::to_string(&c).unwrap();
        let back: CouplingSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(CouplingSpec::tabulated(1.0, vec![0.0, 1.0], vec![0.1, -0.1]).is_err());
    }
}
