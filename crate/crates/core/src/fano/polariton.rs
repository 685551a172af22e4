//! Expansion coefficients of the polariton operators (c = 1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CheckReport, FanoError, SingularKernel};
use crate::dielectric::DielectricSpec;
use crate::quadrature::{integrate_segments, AdaptiveLimits, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonCoefficients {
    pub k: f64,
    /// k̃ = √(k² + ω_c²).
    pub k_tilde: f64,
    pub omega: f64,
    pub omega_prime: f64,
    pub t: f64,
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub alpha1: SingularKernel,
    pub beta1: Complex64,
}

/// ζ(ω,t) in the real-V gauge: i|ζ|, with |ζ|² = 2ω² Im ε/(πω_c²).
fn zeta(spec: &DielectricSpec, omega: f64, gamma: f64) -> Complex64 {
    if spec.omega_c == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let im = spec.im_eps_with_damping(omega, gamma).max(0.0);
    let mag = (2.0 * omega * omega * im / (std::f64::consts::PI * spec.omega_c * spec.omega_c)).sqrt();
    Complex64::new(0.0, mag)
}

/// α̃₀, β̃₀ at ω and the regular parts of α̃₁, β̃₁ at (ω, ω′).
pub fn polariton_coeffs(
    spec: &DielectricSpec,
    k: f64,
    omega: f64,
    omega_prime: f64,
    t: f64,
) -> Result<PolaritonCoefficients, FanoError> {
    spec.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(FanoError::Config(format!("wavenumber must be > 0, got {k}")));
    }
    let lam = spec.cutoff_lambda;
    for w in [omega, omega_prime] {
        if !(w > 0.0 && w < lam) {
            return Err(FanoError::OutOfRange { omega: w });
        }
    }
    let gamma = spec.gamma(t)?;
    let wc2 = spec.omega_c * spec.omega_c;
    let k_tilde = (k * k + wc2).sqrt();
    let eps = spec.eps_with_damping(omega, gamma);
    let den = eps.conj() * omega * omega - k * k;
    if den.norm() == 0.0 {
        return Err(FanoError::Singular { omega });
    }
    let z = zeta(spec, omega, gamma);
    let zp = zeta(spec, omega_prime, gamma);
    let lead = (wc2 / k_tilde).sqrt() * z / den;
    let tail = wc2 / 2.0 * z / den;
    Ok(PolaritonCoefficients {
        k,
        k_tilde,
        omega,
        omega_prime,
        t,
        alpha0: lead * ((omega + k_tilde) / 2.0),
        beta0: lead * ((omega - k_tilde) / 2.0),
        alpha1: SingularKernel {
            delta_weight: 1.0 + Complex64::new(0.0, std::f64::consts::PI) * tail * z.conj(),
            pv_numerator: tail * zp.conj(),
        },
        beta1: tail * zp / (omega + omega_prime),
    })
}

/// (ω_c²/k̃) ∫₀^Λ |ζ|²/ω dω compared with k̃; `margin` = k̃ − lhs.
pub fn polariton_inequality_check(spec: &DielectricSpec, k: f64, t: f64) -> Result<CheckReport, FanoError> {
    spec.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(FanoError::Config(format!("wavenumber must be > 0, got {k}")));
    }
    let gamma = spec.gamma(t)?;
    let k_tilde = (k * k + spec.omega_c * spec.omega_c).sqrt();
    let lam = spec.cutoff_lambda;
    let w0 = spec.omega0;
    let mut pts = vec![0.0, w0, lam];
    for m in [0.5, 2.0, 8.0, 32.0] {
        pts.push(w0 - m * gamma);
        pts.push(w0 + m * gamma);
    }
    pts.retain(|&x| (0.0..=lam).contains(&x));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // ω_c²|ζ|²/ω = 2ω Im ε/π
    let report = integrate_segments(
        |w| Complex64::new(2.0 * w * spec.im_eps_with_damping(w, gamma) / std::f64::consts::PI, 0.0),
        &pts,
        Tolerance {
            abs: 1e-14,
            rel: 1e-10,
        },
        AdaptiveLimits::default(),
    )?;
    let lhs = report.value.re / k_tilde;
    let margin = k_tilde - lhs;
    Ok(CheckReport {
        check: "polariton_inequality".into(),
        value: lhs,
        error: report.error / k_tilde,
        tolerance: k_tilde,
        pass: margin > report.error / k_tilde,
        margin: Some(margin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> DielectricSpec {
        DielectricSpec::constant(1.0, 0.5, 0.05, 50.0)
    }

    #[test]
    fn beta0_vanishes_on_light_line() {
        let s = spec();
        let k = 1.3;
        let kt = (k * k + 0.25f64).sqrt();
        let c = polariton_coeffs(&s, k, kt, 1.0, 0.0).unwrap();
        assert_eq!(c.beta0, Complex64::new(0.0, 0.0));
        assert!(c.alpha0.norm() > 0.0);
    }

    #[test]
    fn light_decouples_as_plasma_frequency_vanishes() {
        let mut last = f64::INFINITY;
        // |ζ| is independent of ω_c, so α̃₀ ∝ ω_c once ε → 1
        for wc in [0.05, 0.005, 0.0005] {
            let mut s = spec();
            s.omega_c = wc;
            let c = polariton_coeffs(&s, 2.0, 0.98, 1.1, 0.0).unwrap();
            let a = c.alpha0.norm();
            if last.is_finite() {
                assert!((last / a - 10.0).abs() < 0.1, "{last} {a}");
            }
            last = a;
        }
        assert!(last < 1e-3);
        let mut s = spec();
        s.omega_c = 0.0;
        let c = polariton_coeffs(&s, 1.0, 0.98, 1.1, 0.0).unwrap();
        assert_eq!(c.alpha0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zeta_reproduces_loss() {
        let s = spec();
        let z = zeta(&s, 1.2, 0.05);
        let back = z.norm_sqr() * std::f64::consts::PI * 0.25 / (2.0 * 1.44);
        assert!((back - s.im_eps_with_damping(1.2, 0.05)).abs() < 1e-12 * back);
    }

    #[test]
    fn inequality_holds_for_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let wc = rng.gen_range(0.1..2.0);
            let g = rng.gen_range(0.01..0.3);
            let s = DielectricSpec::constant(1.0, wc, g, 50.0 * f64::max(1.0, wc));
            let k = rng.gen_range(0.1..3.0);
            let r = polariton_inequality_check(&s, k, 0.0).unwrap();
            assert!(r.pass, "{r:?}");
            // f-sum rule: lhs ≈ ω_c²/k̃ up to the cutoff tail
            let kt = (k * k + wc * wc).sqrt();
            assert!((r.value - wc * wc / kt).abs() < 0.02 * wc * wc / kt, "{r:?}");
        }
    }
}
