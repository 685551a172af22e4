//! Numerical certificates for the bosonic normalization of the dressed
//! operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CouplingSpec, FanoError, RenormalizedFrequencies};
use crate::quadrature::{integrate_segments, pv_integrate, AdaptiveLimits, PvIntegrand, Tolerance};

pub const SUM_RULE_TOLERANCE: f64 = 1e-3;

const CHECK_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-9,
};

/// Outcome of one numerical check, serialized as the `verify` report entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub value: f64,
    /// Quadrature error estimate of `value`.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

/// Frequency where Re(ω² − ω̃₀²z) changes sign, found by bisection.
fn resonance(rf: &RenormalizedFrequencies<'_>) -> Result<Option<f64>, FanoError> {
    let lam = rf.coupling().cutoff;
    let re_d = |w: f64| -> Result<f64, FanoError> {
        Ok(w * w - rf.omega0_tilde * rf.omega0_tilde * rf.z(w)?.re)
    };
    // Re D(0) = −ω₀² ≤ 0; scan outward until it turns positive.
    let mut lo = 0.0;
    let mut hi = f64::NAN;
    let n = 256;
    for k in 1..n {
        let w = lam * k as f64 / n as f64;
        if re_d(w)? > 0.0 {
            hi = w;
            break;
        }
        lo = w;
    }
    if hi.is_nan() {
        return Ok(None);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if re_d(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Mandatory nodes: ω₀, table nodes, and a ladder around the resonance
/// reaching out to where the integrand has dropped well below 1% of its peak.
fn sum_rule_nodes(rf: &RenormalizedFrequencies<'_>) -> Result<Vec<f64>, FanoError> {
    let c = rf.coupling();
    let lam = c.cutoff;
    let mut pts = vec![0.0, lam, c.omega0];
    if let super::CouplingShape::Tabulated { v_sq } = &c.shape {
        pts.extend_from_slice(v_sq.x());
    }
    if let Some(peak) = resonance(rf)? {
        // Half-width of the Lorentzian peak is π|v|²/4 at the resonance.
        let hw = (std::f64::consts::PI * rf.v_sq(peak) / 4.0).max(1e-9 * lam);
        pts.push(peak);
        for m in [0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 30.0, 100.0, 300.0] {
            pts.push(peak - m * hw);
            pts.push(peak + m * hw);
        }
    }
    pts.retain(|&x| (0.0..=lam).contains(&x) && x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// ∫₀^Λ (|α₀|² − |β₀|²) dω, which must equal 1.
pub fn sum_rule_check(coupling: &CouplingSpec, t: f64, tolerance: f64) -> Result<CheckReport, FanoError> {
    let rf = RenormalizedFrequencies::at(coupling, t)?;
    let pts = sum_rule_nodes(&rf)?;
    let mut failure = None;
    let report = integrate_segments(
        |w| {
            if w <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            match rf.denominator(w) {
                Ok(d) => Complex64::new(w * w * rf.v_sq(w) / d.norm_sqr(), 0.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        &pts,
        CHECK_TOL,
        AdaptiveLimits::default(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let value = report.value.re;
    Ok(CheckReport {
        check: "sum_rule".into(),
        value,
        error: report.error,
        tolerance,
        pass: (value - 1.0).abs() + report.error <= tolerance,
        margin: None,
    })
}

/// ∫₀^Λ |V|²/ω dω compared with ω̃₀; `margin` = ω̃₀ − lhs.
pub fn coupling_inequality_check(coupling: &CouplingSpec, t: f64) -> Result<CheckReport, FanoError> {
    let rf = RenormalizedFrequencies::at(coupling, t)?;
    let mut pts = vec![0.0, coupling.cutoff];
    if let super::CouplingShape::Tabulated { v_sq } = &coupling.shape {
        pts.extend_from_slice(v_sq.x());
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let report = integrate_segments(
        |w| Complex64::new(rf.v_sq(w) / rf.omega0_tilde, 0.0),
        &pts,
        CHECK_TOL,
        AdaptiveLimits::default(),
    )?;
    let lhs = report.value.re;
    let margin = rf.omega0_tilde - lhs;
    Ok(CheckReport {
        check: "coupling_inequality".into(),
        value: lhs,
        error: report.error,
        tolerance: rf.omega0_tilde,
        pass: margin > report.error,
        margin: Some(margin),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalityReport {
    pub omega: f64,
    /// φ(ω) of the Gaussian test function.
    pub expected: f64,
    /// ∫dν [α₁*(ν,ω) F(ν) − β₁(ν,ω) G(ν)] with F, G the kernels applied to φ.
    pub value: Complex64,
    pub relative_error: f64,
    pub pass: bool,
}

/// Applies the completeness kernel to φ(ω′) = exp(−(ω′−c)²/2σ²) and
/// evaluates the result at ω, where it must reproduce φ(ω).
///
/// Needs a Drude-Lorentz or smooth tabulated coupling with the Gaussian well
/// inside (0, Λ). Passing means a relative deviation below 2%.
pub fn orthonormality_check(
    coupling: &CouplingSpec,
    t: f64,
    center: f64,
    sigma: f64,
    omega: f64,
) -> Result<OrthonormalityReport, FanoError> {
    let rf = RenormalizedFrequencies::at(coupling, t)?;
    let lam = coupling.cutoff;
    let (lo, hi) = (center - 10.0 * sigma, center + 10.0 * sigma);
    if !(sigma > 0.0 && lo > 0.0 && hi < lam && omega > 0.0 && omega < lam) {
        return Err(FanoError::Config(
            "test function and evaluation point must lie inside (0, Λ)".into(),
        ));
    }
    let phi = |w: f64| (-(w - center) * (w - center) / (2.0 * sigma * sigma)).exp();
    let a = |nu: f64| -> Result<Complex64, FanoError> {
        Ok(rf.big_v(nu) * rf.omega0_tilde / 2.0 / rf.denominator(nu)?)
    };
    let inner_tol = Tolerance {
        abs: 1e-12,
        rel: 1e-8,
    };
    let vphi = |w: f64| Complex64::new(rf.big_v(w) * phi(w), 0.0);
    let gauss_nodes = [lo, center - 3.0 * sigma, center, center + 3.0 * sigma, hi];

    // F(ν) = φ(ν) + A(ν)[PV∫Vφ/(ν−ω′) + iπV(ν)φ(ν)]
    let big_f = |nu: f64| -> Result<Complex64, FanoError> {
        let hilbert = if nu > lo && nu < hi {
            // PV∫ Vφ/(ν−ω′) = −PV∫ Vφ/(ω′−ν)
            -pv_integrate(
                PvIntegrand::new(vphi, nu, lo, hi).with_breakpoints(gauss_nodes),
                inner_tol,
            )?
            .value
        } else {
            integrate_segments(|w| vphi(w) / (nu - w), &gauss_nodes, inner_tol, AdaptiveLimits::default())?.value
        };
        let v = rf.big_v(nu);
        Ok(phi(nu) + a(nu)? * (hilbert + Complex64::new(0.0, std::f64::consts::PI * v * phi(nu))))
    };
    // G(ν) = A*(ν) ∫ Vφ/(ν+ω′)
    let big_g = |nu: f64| -> Result<Complex64, FanoError> {
        let s = integrate_segments(|w| vphi(w) / (nu + w), &gauss_nodes, inner_tol, AdaptiveLimits::default())?.value;
        Ok(a(nu)?.conj() * s)
    };

    let mut failure: Option<FanoError> = None;
    let mut guard = |r: Result<Complex64, FanoError>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };

    let mut hints: Vec<f64> = gauss_nodes.to_vec();
    if let Some(peak) = resonance(&rf)? {
        let hw = std::f64::consts::PI * rf.v_sq(peak) / 4.0;
        hints.extend([peak - 4.0 * hw, peak - hw, peak, peak + hw, peak + 4.0 * hw]);
    }
    hints.push(coupling.omega0);
    hints.retain(|&x| x > 0.0 && x < lam);
    hints.sort_by(f64::total_cmp);
    hints.dedup();
    let outer_tol = Tolerance {
        abs: 1e-10,
        rel: 1e-6,
    };

    let f_at = big_f(omega)?;
    let a_at = a(omega)?;
    let v_at = rf.big_v(omega);

    let pv_part = pv_integrate(
        PvIntegrand::new(|nu| guard(a(nu).and_then(|an| Ok(an.conj() * big_f(nu)?))), omega, 0.0, lam)
            .with_breakpoints(hints.iter().copied()),
        outer_tol,
    )?
    .value;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut pts = vec![0.0];
    pts.extend(hints.iter().copied());
    pts.push(lam);
    let mut failure2: Option<FanoError> = None;
    let beta_part = integrate_segments(
        |nu| match a(nu).and_then(|an| Ok(an * big_g(nu)? / (nu + omega))) {
            Ok(v) => v,
            Err(e) => {
                failure2.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &pts,
        outer_tol,
        AdaptiveLimits::default(),
    )?
    .value;
    if let Some(e) = failure2 {
        return Err(e);
    }

    let value = f_at + v_at * (pv_part - Complex64::new(0.0, std::f64::consts::PI) * a_at.conj() * f_at)
        - v_at * beta_part;
    let expected = phi(omega);
    let relative_error = (value - expected).norm() / expected.abs();
    Ok(OrthonormalityReport {
        omega,
        expected,
        value,
        relative_error,
        pass: relative_error <= 0.02,
    })
}
