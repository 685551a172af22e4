//! Level shift Δ(t): resonant closed form and principal-value remainder.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{beta0_with_damping, resonant_beta0, EmitterError, EmitterSpec};
use crate::dielectric::DielectricSpec;
use crate::quadrature::{integrate, pv_integrate, PvIntegrand, QuadratureError, QuadratureReport, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParts {
    /// PV ∫₀^Λ β₀(ω,t)/(π(ω−ω_A)) dω.
    pub off_resonant: f64,
    /// Window contribution; zero in the dispersive regime.
    pub resonant: f64,
    pub total: f64,
    /// Quadrature error of `off_resonant`.
    pub error: f64,
}

/// (β̂₀/π)·ln|(δ − γ₀/2)/(δ + γ₀/2)| with δ = ω_A − ω₀ and the
/// near-resonance β̂₀ ∝ 1/√γ(t).
pub fn delta_resonant(dielectric: &DielectricSpec, emitter: &EmitterSpec, t: f64) -> Result<f64, EmitterError> {
    let delta = emitter.omega_a - dielectric.omega0;
    let half = dielectric.gamma0 / 2.0;
    if (delta.abs() - half).abs() <= 1e-12 * half {
        return Err(EmitterError::WindowEdge { detuning: delta });
    }
    let b = resonant_beta0(dielectric, emitter, t)?;
    Ok(b / std::f64::consts::PI * ((delta - half) / (delta + half)).abs().ln())
}

/// PV ∫₀^Λ β₀(ω,t)/(π(ω−ω_A)) dω.
pub fn delta_off_resonant(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    t: f64,
    tol: Tolerance,
) -> Result<QuadratureReport, EmitterError> {
    emitter.validate()?;
    let lam = dielectric.cutoff_lambda;
    let wa = emitter.omega_a;
    if !(wa < lam) {
        return Err(EmitterError::Config(format!("omega_A = {wa} must lie below the cutoff {lam}")));
    }
    let gamma = dielectric.gamma(t)?;
    let w0 = dielectric.omega0;
    let mut hints = vec![w0];
    for m in [0.5, 2.0, 8.0, 32.0] {
        hints.push(w0 - m * gamma);
        hints.push(w0 + m * gamma);
    }
    hints.retain(|&x| x > 0.0 && x < lam && (x - wa).abs() > 1e-9);
    let numerator =
        |w: f64| Complex64::new(beta0_with_damping(dielectric, emitter, w, gamma) / std::f64::consts::PI, 0.0);
    Ok(pv_integrate(PvIntegrand::new(numerator, wa, 0.0, lam).with_breakpoints(hints), tol)?)
}

/// Δ(t) in the absorption window: off-resonant PV part plus the log form.
pub fn delta_dissipative(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    t: f64,
    tol: Tolerance,
) -> Result<ShiftParts, EmitterError> {
    let resonant = delta_resonant(dielectric, emitter, t)?;
    let off = delta_off_resonant(dielectric, emitter, t, tol)?;
    Ok(ShiftParts {
        off_resonant: off.value.re,
        resonant,
        total: off.value.re + resonant,
        error: off.error,
    })
}

/// Δ(t) far from resonance, PV over (0, Λ).
pub fn delta_dispersive(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    t: f64,
    tol: Tolerance,
) -> Result<ShiftParts, EmitterError> {
    let off = delta_off_resonant(dielectric, emitter, t, tol)?;
    Ok(ShiftParts {
        off_resonant: off.value.re,
        resonant: 0.0,
        total: off.value.re,
        error: off.error,
    })
}

/// PV ∫_{−∞}^{∞} sgn(x)[1/(a₁+x) − 1/(a₂+x)] dx by quadrature.
///
/// Each pole is handled on a finite core [−L, L]; the tails are mapped to
/// u = 1/|x| where the difference of the two terms is regular.
pub fn sgn_kernel_pv(a1: f64, a2: f64, tol: Tolerance) -> Result<f64, QuadratureError> {
    if a1 == 0.0 || a2 == 0.0 || !a1.is_finite() || !a2.is_finite() {
        return Err(QuadratureError::Domain(format!(
            "poles must be finite and away from the sign jump, got a1 = {a1}, a2 = {a2}"
        )));
    }
    if a1 == a2 {
        return Ok(0.0);
    }
    let l = 4.0 * a1.abs().max(a2.abs());
    let sgn = |x: f64| Complex64::new(x.signum(), 0.0);
    let piece_tol = tol.scaled(0.25);
    let core1 = pv_integrate(PvIntegrand::new(sgn, -a1, -l, l).with_breakpoints([0.0]), piece_tol)?;
    let core2 = pv_integrate(PvIntegrand::new(sgn, -a2, -l, l).with_breakpoints([0.0]), piece_tol)?;
    let d = a2 - a1;
    let right = integrate(
        |u| Complex64::new(d / ((1.0 + a1 * u) * (1.0 + a2 * u)), 0.0),
        0.0,
        1.0 / l,
        piece_tol,
    )?;
    let left = integrate(
        |u| Complex64::new(-d / ((a1 * u - 1.0) * (a2 * u - 1.0)), 0.0),
        0.0,
        1.0 / l,
        piece_tol,
    )?;
    Ok((core1.value - core2.value + right.value + left.value).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::ModulationProfile;

    fn medium() -> DielectricSpec {
        DielectricSpec::constant(1.0, 0.5, 0.05, 50.0)
    }

    const TOL: Tolerance = Tolerance {
        abs: 1e-14,
        rel: 1e-10,
    };

    #[test]
    fn sgn_kernel_matches_log() {
        let v = sgn_kernel_pv(0.2, -0.3, TOL).unwrap();
        assert!((v - 2.0 * 1.5f64.ln()).abs() < 1e-8, "{v}");
        let w = sgn_kernel_pv(0.7, 0.1, TOL).unwrap();
        assert!((w - 2.0 * (0.1f64 / 0.7).ln()).abs() < 1e-8, "{w}");
        assert!(sgn_kernel_pv(0.0, 1.0, TOL).is_err());
    }

    #[test]
    fn resonant_shift_symmetry() {
        let d = medium();
        let on = EmitterSpec::new(1.0, 1.0);
        assert_eq!(delta_resonant(&d, &on, 0.0).unwrap(), 0.0);
        // dyadic offsets keep 1 ± x exact
        for x in [2f64.powi(-12), 2f64.powi(-10)] {
            let up = delta_resonant(&d, &EmitterSpec::new(1.0 + x, 1.0), 0.0).unwrap();
            let down = delta_resonant(&d, &EmitterSpec::new(1.0 - x, 1.0), 0.0).unwrap();
            assert!((up + down).abs() < 1e-12 * up.abs().max(1e-300), "{up} {down}");
        }
        assert!(matches!(
            delta_resonant(&d, &EmitterSpec::new(1.025, 1.0), 0.0),
            Err(EmitterError::WindowEdge { .. })
        ));
    }

    #[test]
    fn resonant_shift_tracks_inverse_sqrt_gamma() {
        let d = medium().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.99,
            rate: 1.0,
        });
        let e = EmitterSpec::new(1.0 + 0.03 * 0.05, 1.0);
        let c0 = delta_resonant(&d, &e, 0.0).unwrap() * d.gamma(0.0).unwrap().sqrt();
        for t in [0.4, 1.7, 3.3, 5.0] {
            let c = delta_resonant(&d, &e, t).unwrap() * d.gamma(t).unwrap().sqrt();
            assert!((c - c0).abs() < 1e-12 * c0.abs());
        }
    }

    #[test]
    fn free_space_shift_with_cutoff() {
        let mut d = medium();
        d.omega_c = 0.0;
        let e = EmitterSpec::new(1.5, 2.0);
        let r = delta_dispersive(&d, &e, 0.0, TOL).unwrap();
        // (Γ_A/2πω_A)[Λ + ω_A ln((Λ−ω_A)/ω_A)]
        let lam = 50.0;
        let exact = 2.0 / (2.0 * std::f64::consts::PI * 1.5) * (lam + 1.5 * ((lam - 1.5) / 1.5f64).ln());
        assert!((r.total - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.total);
        assert_eq!(r.resonant, 0.0);
    }

    #[test]
    fn dispersive_shift_time_average_is_modulation_insensitive() {
        let e = EmitterSpec::new(2.0, 1.0);
        let flat = delta_dispersive(&medium(), &e, 0.0, TOL).unwrap().total;
        let d = medium().with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.99,
            rate: 1.0,
        });
        let n = 32;
        let avg: f64 = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                delta_dispersive(&d, &e, t, TOL).unwrap().total
            })
            .sum::<f64>()
            / n as f64;
        assert!((avg - flat).abs() < 0.01 * flat.abs(), "{avg} vs {flat}");
    }
}
