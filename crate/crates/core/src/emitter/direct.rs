//! β(t) and Δ(t) by direct quadrature of the memory kernel.
//!
//! The t′ integral is written in τ = t − t′ so that each frequency sees a
//! fixed oscillation rate ω − ω_A; the frequency integral is split at the
//! resonance window and clustered around ω_A.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EmitterError, EmitterSpec, KernelFactor};
use crate::dielectric::DielectricSpec;
use crate::quadrature::{
    frequency_integrate_split, oscillatory_integrate, OscillatoryIntegrand, ReportDigest, SplitPlan, Tolerance,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectRates {
    pub t: f64,
    pub beta: f64,
    pub delta: f64,
    pub beta_err: f64,
    pub delta_err: f64,
    pub report: ReportDigest,
}

/// Resonance half-window used for the frequency split.
fn window(dielectric: &DielectricSpec) -> f64 {
    2.0 * dielectric.gamma0
}

/// (Γ_A/2π)·Re and −(Γ_A/2π)·Im of ∫₀^Λ dω ∫₀^t dτ kernel.
///
/// `tol` applies to the frequency integral; each τ integral runs at a tenth
/// of it.
pub fn beta_direct(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    t: f64,
    tol: Tolerance,
) -> Result<DirectRates, EmitterError> {
    dielectric.validate()?;
    emitter.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(EmitterError::Config(format!("time must be finite and >= 0, got {t}")));
    }
    let lam = dielectric.cutoff_lambda;
    if emitter.omega_a >= lam {
        return Err(EmitterError::Config(format!(
            "omega_A = {} must lie below the cutoff {lam}",
            emitter.omega_a
        )));
    }
    if t == 0.0 {
        return Ok(DirectRates {
            t,
            beta: 0.0,
            delta: 0.0,
            beta_err: 0.0,
            delta_err: 0.0,
            report: ReportDigest {
                error: 0.0,
                nodes: 0,
                panels: 0,
            },
        });
    }

    let gamma_now = dielectric.gamma(t)?;
    let constant = dielectric.modulation.is_constant();
    let scale = dielectric.modulation.time_scale();
    let inner_tol = tol.scaled(0.1);
    let ratio = 1.0 / emitter.omega_a;

    let mut failure: Option<EmitterError> = None;
    let mut inner_err = 0.0f64;
    let mut inner_nodes = 0usize;
    let mut integrand = |omega: f64| -> Result<Complex64, EmitterError> {
        if !(omega > 0.0 && omega < lam) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let now = KernelFactor::new(dielectric, omega, gamma_now)?;
        let rate = omega - emitter.omega_a;
        let report = if constant {
            let env = now.envelope(&now, omega * ratio);
            oscillatory_integrate(OscillatoryIntegrand::new(|_| env, rate, t), inner_tol)?
        } else {
            let mut bad = None;
            let envelope = |tau: f64| {
                let earlier = dielectric
                    .gamma(t - tau)
                    .map_err(EmitterError::from)
                    .and_then(|g| KernelFactor::new(dielectric, omega, g));
                match earlier {
                    Ok(k) => now.envelope(&k, omega * ratio),
                    Err(e) => {
                        bad.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            };
            let mut osc = OscillatoryIntegrand::new(envelope, rate, t);
            if let Some(s) = scale {
                osc = osc.with_max_panel(s / 8.0);
            }
            let r = oscillatory_integrate(osc, inner_tol)?;
            if let Some(e) = bad {
                return Err(e);
            }
            r
        };
        inner_err = inner_err.max(report.error);
        inner_nodes += report.nodes;
        Ok(report.value)
    };

    let plan = SplitPlan::new(dielectric.omega0, window(dielectric), emitter.omega_a, lam)
        .with_max_panel(2.0 * std::f64::consts::PI / t);
    let outer = frequency_integrate_split(
        |w| match integrand(w) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &plan,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let pref = emitter.gamma_a / (2.0 * std::f64::consts::PI);
    let err = pref * (outer.error + lam * inner_err);
    Ok(DirectRates {
        t,
        beta: pref * outer.value.re,
        delta: -pref * outer.value.im,
        beta_err: err,
        delta_err: err,
        report: ReportDigest {
            error: err,
            nodes: outer.nodes + inner_nodes,
            panels: outer.panels.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::{upper_half_sqrt, ModulationProfile};

    #[test]
    fn zero_time_gives_zero() {
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 20.0);
        let r = beta_direct(&d, &EmitterSpec::new(1.5, 1.0), 0.0, Tolerance::relative(1e-5)).unwrap();
        assert_eq!((r.beta, r.delta), (0.0, 0.0));
    }

    #[test]
    fn dispersive_static_limit_short_cutoff() {
        // smaller medium and time than the acceptance run; same physics
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 20.0);
        let e = EmitterSpec::new(1.5, 1.0);
        let r = beta_direct(&d, &e, 100.0, Tolerance::relative(1e-5)).unwrap();
        let eta = upper_half_sqrt(d.eps_with_damping(1.5, 0.05)).re;
        assert!((r.beta - eta / 2.0).abs() < 0.02 * eta / 2.0, "{} vs {}", r.beta, eta / 2.0);
        assert!(r.beta_err >= 0.0);
    }

    #[test]
    fn modulated_medium_stays_close_to_average() {
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 20.0).with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.5,
            rate: 0.2,
        });
        let e = EmitterSpec::new(1.5, 1.0);
        let r = beta_direct(&d, &e, 60.0, Tolerance::relative(1e-5)).unwrap();
        let eta = upper_half_sqrt(d.eps_with_damping(1.5, 0.05)).re;
        // dispersive β depends only weakly on γ
        assert!((r.beta - eta / 2.0).abs() < 0.05 * eta / 2.0, "{} vs {}", r.beta, eta / 2.0);
    }
}
