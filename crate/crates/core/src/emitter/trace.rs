//! Time series of β(t), Δ(t) and the excited-state population.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    beta_direct, beta_dispersive, beta_dissipative, classify_regime, delta_dispersive, delta_dissipative,
    EmitterError, EmitterSpec, Regime,
};
use crate::dielectric::DielectricSpec;
use crate::quadrature::{ReportDigest, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// Regime closed forms for β and the PV/log forms for Δ.
    ClosedForm,
    /// Double quadrature of the memory kernel.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub model: RateModel,
    pub times: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    pub population: Vec<f64>,
    pub beta_err: Vec<f64>,
    pub delta_err: Vec<f64>,
    pub digests: Vec<Option<ReportDigest>>,
    /// Per-point failure messages; the point's rates are NaN when set.
    pub flags: Vec<Option<String>>,
}

impl DecayTrace {
    pub fn failures(&self) -> usize {
        self.flags.iter().filter(|f| f.is_some()).count()
    }
}

/// P_e(t) = exp(−2∫₀^t β) by the trapezoidal rule, starting from 1.
///
/// Negative and non-finite β samples are treated as 0 here only.
pub fn population(times: &[f64], beta: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), beta.len(), "times and beta must have equal length");
    let clamp = |b: f64| if b.is_finite() { b.max(0.0) } else { 0.0 };
    let mut out = Vec::with_capacity(times.len());
    let mut integral = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            integral += 0.5 * (times[i] - times[i - 1]) * (clamp(beta[i]) + clamp(beta[i - 1]));
        }
        out.push((-2.0 * integral).exp());
    }
    out
}

struct Point {
    beta: f64,
    delta: f64,
    beta_err: f64,
    delta_err: f64,
    digest: Option<ReportDigest>,
    flag: Option<String>,
}

fn point(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    t: f64,
    model: RateModel,
    tol: Tolerance,
    regime: Regime,
) -> Result<Point, EmitterError> {
    match model {
        RateModel::Direct => {
            let r = beta_direct(dielectric, emitter, t, tol)?;
            Ok(Point {
                beta: r.beta,
                delta: r.delta,
                beta_err: r.beta_err,
                delta_err: r.delta_err,
                digest: Some(r.report),
                flag: None,
            })
        }
        RateModel::ClosedForm => {
            let (beta, shift) = match regime {
                Regime::Dissipative => (
                    beta_dissipative(dielectric, emitter, t)?,
                    delta_dissipative(dielectric, emitter, t, tol)?,
                ),
                Regime::Dispersive => (
                    beta_dispersive(dielectric, emitter, t)?,
                    delta_dispersive(dielectric, emitter, t, tol)?,
                ),
            };
            Ok(Point {
                beta,
                delta: shift.total,
                beta_err: 0.0,
                delta_err: shift.error,
                digest: None,
                flag: None,
            })
        }
    }
}

/// Evaluates β, Δ on `times` (which must start at 0 and increase) in
/// parallel, then accumulates the population sequentially.
///
/// Quadrature failures are recorded per point and do not stop the run.
pub fn compute_trace(
    dielectric: &DielectricSpec,
    emitter: &EmitterSpec,
    times: &[f64],
    model: RateModel,
    tol: Tolerance,
) -> Result<DecayTrace, EmitterError> {
    dielectric.validate()?;
    emitter.validate()?;
    if times.first() != Some(&0.0) {
        return Err(EmitterError::Config("time grid must start at t = 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(EmitterError::Config("time grid must be finite and strictly increasing".into()));
    }
    let regime = classify_regime(dielectric, emitter).tag;
    let points: Vec<Point> = times
        .par_iter()
        .map(|&t| match point(dielectric, emitter, t, model, tol, regime) {
            Ok(p) => p,
            Err(e) => Point {
                beta: f64::NAN,
                delta: f64::NAN,
                beta_err: f64::NAN,
                delta_err: f64::NAN,
                digest: None,
                flag: Some(e.to_string()),
            },
        })
        .collect();

    for (t, p) in times.iter().zip(&points) {
        if let Some(f) = &p.flag {
            log::warn!("t = {t}: {f}");
        } else if p.beta < -p.beta_err {
            log::warn!("t = {t}: β = {:.3e} is negative beyond its error {:.3e}", p.beta, p.beta_err);
        }
    }

    let beta: Vec<f64> = points.iter().map(|p| p.beta).collect();
    Ok(DecayTrace {
        model,
        times: times.to_vec(),
        population: population(times, &beta),
        beta,
        delta: points.iter().map(|p| p.delta).collect(),
        beta_err: points.iter().map(|p| p.beta_err).collect(),
        delta_err: points.iter().map(|p| p.delta_err).collect(),
        digests: points.iter().map(|p| p.digest).collect(),
        flags: points.into_iter().map(|p| p.flag).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::ModulationProfile;
    use proptest::prelude::*;

    #[test]
    fn constant_rate_is_exponential() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let p = population(&times, &vec![0.3; times.len()]);
        for (t, v) in times.iter().zip(&p) {
            assert!((v - (-0.6 * t).exp()).abs() < 1e-12);
        }
        let zero = population(&times, &vec![0.0; times.len()]);
        assert!(zero.iter().all(|&v| v == 1.0));
    }

    proptest! {
        #[test]
        fn population_is_monotone(betas in proptest::collection::vec(-1.0f64..2.0, 2..60)) {
            let times: Vec<f64> = (0..betas.len()).map(|k| k as f64 * 0.05).collect();
            let p = population(&times, &betas);
            prop_assert_eq!(p[0], 1.0);
            for w in p.windows(2) {
                prop_assert!(w[1] <= w[0]);
                prop_assert!(w[1] >= 0.0);
            }
        }
    }

    #[test]
    fn closed_form_trace_in_dissipative_regime() {
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 50.0).with_modulation(ModulationProfile::Sinusoidal {
            amplitude: 0.99,
            rate: 0.1,
        });
        let e = EmitterSpec::new(1.0 + 0.03 * 0.05, 1e-3);
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.5).collect();
        let tr = compute_trace(&d, &e, &times, RateModel::ClosedForm, Tolerance::relative(1e-8)).unwrap();
        assert_eq!(tr.failures(), 0);
        assert_eq!(tr.population[0], 1.0);
        for (k, &t) in times.iter().enumerate() {
            let b = beta_dissipative(&d, &e, t).unwrap();
            assert_eq!(tr.beta[k], b);
        }
        let again = compute_trace(&d, &e, &times, RateModel::ClosedForm, Tolerance::relative(1e-8)).unwrap();
        assert_eq!(tr, again);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 50.0);
        let e = EmitterSpec::new(1.5, 1e-3);
        let tol = Tolerance::default();
        assert!(compute_trace(&d, &e, &[0.5, 1.0], RateModel::ClosedForm, tol).is_err());
        assert!(compute_trace(&d, &e, &[0.0, 1.0, 1.0], RateModel::ClosedForm, tol).is_err());
    }

    #[test]
    fn window_edge_is_flagged_not_fatal() {
        let d = DielectricSpec::constant(1.0, 0.5, 0.05, 50.0);
        let e = EmitterSpec::new(1.025, 1e-3);
        let tr = compute_trace(&d, &e, &[0.0, 1.0], RateModel::ClosedForm, Tolerance::default()).unwrap();
        assert_eq!(tr.failures(), 2);
        assert!(tr.beta[0].is_nan());
    }
}
