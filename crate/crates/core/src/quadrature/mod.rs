//! Integration engines: adaptive Gauss-Kronrod, principal value, oscillatory
//! τ-integrals and resonance-aware frequency splitting.

mod gauss;
mod oscillatory;
mod pv;
mod split;
mod sum;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gauss::{gauss10_rule, gk21, integrate, integrate_segments, AdaptiveLimits, Gk21};
pub use oscillatory::{oscillatory_integrate, OscillatoryIntegrand};
pub use pv::{pv_integrate, PvIntegrand};
pub use split::{frequency_integrate_split, SplitPlan};
pub use sum::{CompensatedComplexSum, CompensatedSum};

/// Requested accuracy: converged once `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs.max(self.rel * magnitude)
    }

    /// Same tolerance with both components scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-6)
    }
}

/// Contribution of one top-level integration segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub lower: f64,
    pub upper: f64,
    /// Number of rule applications the segment ended up with.
    pub subpanels: usize,
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: Complex64,
    /// Estimated absolute error, always non-negative.
    pub error: f64,
    /// Integrand evaluations spent.
    pub nodes: usize,
    pub panels: Vec<PanelSummary>,
}

impl QuadratureReport {
    pub(crate) fn empty() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            nodes: 0,
            panels: Vec::new(),
        }
    }

    /// Short digest used in traces.
    pub fn digest(&self) -> ReportDigest {
        ReportDigest {
            error: self.error,
            nodes: self.nodes,
            panels: self.panels.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportDigest {
    pub error: f64,
    pub nodes: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Error)]
pub enum QuadratureError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },
    #[error("tolerance not reached: error {} > target {target} after {} nodes", report.error, report.nodes)]
    Accuracy {
        target: f64,
        report: Box<QuadratureReport>,
    },
}

impl QuadratureError {
    /// The best available estimate when the tolerance was missed.
    pub fn partial_report(&self) -> Option<&QuadratureReport> {
        match self {
            QuadratureError::Accuracy { report, .. } => Some(report),
            _ => None,
        }
    }
}
