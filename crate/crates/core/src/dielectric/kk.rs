//! Real part of ε from tabulated Im ε by the dispersion (Hilbert) integral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DielectricError, DielectricSpec, RealityCheck, REALITY_THRESHOLD};
use crate::interp::Pchip;
use crate::quadrature::{integrate_segments, pv_integrate, AdaptiveLimits, PvIntegrand, Tolerance};

const KK_TOL: Tolerance = Tolerance {
    abs: 1e-10,
    rel: 1e-9,
};

/// Im ε(ω) sampled on a grid.
///
/// Samples at ω ≥ 0 define the loss profile. Between ω = 0 and the first
/// positive node it ramps linearly from zero, and it vanishes beyond the last
/// node. Negative-frequency samples, if present, are only used by
/// [`LossTable::parity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossTableRaw", into = "LossTableRaw")]
pub struct LossTable {
    positive: Pchip,
    negative: Option<Pchip>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LossTableRaw {
    omega: Vec<f64>,
    im_eps: Vec<f64>,
}

impl TryFrom<LossTableRaw> for LossTable {
    type Error = DielectricError;
    fn try_from(raw: LossTableRaw) -> Result<Self, Self::Error> {
        LossTable::new(raw.omega, raw.im_eps)
    }
}

impl From<LossTable> for LossTableRaw {
    fn from(table: LossTable) -> Self {
        let mut omega = Vec::new();
        let mut im_eps = Vec::new();
        if let Some(neg) = &table.negative {
            omega.extend_from_slice(neg.x());
            im_eps.extend_from_slice(neg.y());
        }
        let skip = usize::from(table.negative.is_some() && table.positive.x()[0] == 0.0);
        omega.extend_from_slice(&table.positive.x()[skip..]);
        im_eps.extend_from_slice(&table.positive.y()[skip..]);
        LossTableRaw { omega, im_eps }
    }
}

impl LossTable {
    /// Builds the table from strictly increasing ω samples.
    pub fn new(omega: Vec<f64>, im_eps: Vec<f64>) -> Result<Self, DielectricError> {
        if omega.len() != im_eps.len() {
            return Err(DielectricError::Invalid(format!(
                "loss table has {} frequencies but {} values",
                omega.len(),
                im_eps.len()
            )));
        }
        let split = omega.partition_point(|&w| w < 0.0);
        let (neg_w, pos_w) = omega.split_at(split);
        let (neg_v, pos_v) = im_eps.split_at(split);
        let negative = if neg_w.is_empty() {
            None
        } else {
            // Close the negative branch at ω = 0 when the table has a zero node.
            let mut w = neg_w.to_vec();
            let mut v = neg_v.to_vec();
            if pos_w.first() == Some(&0.0) {
                w.push(0.0);
                v.push(pos_v[0]);
            }
            Some(Pchip::new(w, v)?)
        };
        if pos_w.len() < 2 {
            return Err(DielectricError::Invalid(
                "loss table needs at least two samples at ω >= 0".into(),
            ));
        }
        let positive = Pchip::new(pos_w.to_vec(), pos_v.to_vec())?;
        Ok(Self { positive, negative })
    }

    /// Samples Im ε of a Drude-Lorentz medium at time t on the given grid.
    pub fn from_dielectric(spec: &DielectricSpec, t: f64, grid: &[f64]) -> Result<Self, DielectricError> {
        let gamma = spec.gamma(t)?;
        let values = grid.iter().map(|&w| spec.im_eps_with_damping(w, gamma)).collect();
        Self::new(grid.to_vec(), values)
    }

    /// Im ε at ω ≥ 0 from the positive samples, extended oddly to ω < 0.
    pub fn im_eps(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return -self.im_eps(-omega);
        }
        let (lo, hi) = self.positive.domain();
        if omega > hi {
            0.0
        } else if omega < lo {
            self.positive.y()[0] * omega / lo
        } else {
            self.positive.eval_unchecked(omega)
        }
    }

    /// Largest sampled frequency.
    pub fn max_omega(&self) -> f64 {
        self.positive.domain().1
    }

    /// Local node spacing around ω ≥ 0, or `None` outside the sampled range.
    pub fn spacing_at(&self, omega: f64) -> Option<f64> {
        let (lo, hi) = self.positive.domain();
        if omega < lo || omega > hi {
            return None;
        }
        let x = self.positive.x();
        let i = self.positive.interval(omega);
        Some(x[i + 1] - x[i])
    }

    /// Compares tabulated negative-frequency samples with −Im ε(|ω|).
    ///
    /// Without negative samples the odd extension holds by construction.
    pub fn parity_check(&self) -> RealityCheck {
        let Some(neg) = &self.negative else {
            return RealityCheck {
                residual: 0.0,
                pass: true,
            };
        };
        let scale = self
            .positive
            .y()
            .iter()
            .chain(neg.y())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let residual = neg
            .x()
            .iter()
            .zip(neg.y())
            .filter(|(w, _)| **w < 0.0)
            .map(|(&w, &v)| (v + self.im_eps(-w)).abs() / scale)
            .fold(0.0f64, f64::max);
        RealityCheck {
            residual,
            pass: residual < REALITY_THRESHOLD,
        }
    }

    fn peak(&self) -> f64 {
        let x = self.positive.x();
        let y = self.positive.y();
        let i = (0..y.len())
            .max_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()))
            .unwrap_or(0);
        x[i]
    }
}

/// Frequency grid on [0, Λ) fine enough for [`kramers_kronig_re`] on a
/// Drude-Lorentz loss profile: spacing grows linearly away from ω₀, stays
/// below γ₀/250 at the resonance and below the excision radius everywhere.
pub fn resonance_grid(spec: &DielectricSpec) -> Vec<f64> {
    let top = spec.cutoff_lambda * (1.0 - 1e-9);
    let w0 = spec.omega0;
    let mut grid = vec![0.0];
    let mut w = 1e-3 * w0;
    while w < top {
        grid.push(w);
        let step = (spec.gamma0 / 250.0 + 2e-3 * (w - w0).abs())
            .min(8e-3 * w)
            .min(0.8 * excision_radius(w))
            .max(1e-4 * w0);
        w += step;
    }
    grid.push(top);
    grid
}

/// Radius of the region around ω that has to be resolved by the table.
pub fn excision_radius(omega: f64) -> f64 {
    (1e-2 * omega.abs()).max(5e-3)
}

/// Re ε(ω) − 1 = (1/π) PV∫ Im ε(ω′)/(ω′ − ω) dω′ over the whole real line,
/// folded onto ω′ > 0 with the odd extension of Im ε.
pub fn kramers_kronig_re(table: &LossTable, omega: f64) -> Result<f64, DielectricError> {
    let omega = omega.abs();
    let top = table.max_omega();
    let radius = excision_radius(omega);
    if let Some(spacing) = table.spacing_at(omega) {
        if spacing > radius {
            return Err(DielectricError::GridTooSparse {
                omega,
                spacing,
                radius,
            });
        }
    }
    let lo = table.positive.domain().0;
    let mut hints = vec![lo, table.peak()];
    hints.retain(|&x| x > 0.0 && x < top);
    let quad = |e: crate::quadrature::QuadratureError| DielectricError::Quadrature(e.to_string());

    // Folded kernel: 1/(u−ω) + 1/(u+ω) = 2u/(u²−ω²).
    let value = if omega == 0.0 {
        let mut pts = vec![0.0];
        pts.extend(hints.iter().copied());
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        integrate_segments(
            |u| Complex64::new(2.0 * table.im_eps(u) / u, 0.0),
            &pts,
            KK_TOL,
            AdaptiveLimits::default(),
        )
        .map_err(quad)?
        .value
        .re
    } else if omega < top {
        let numerator = |u: f64| Complex64::new(table.im_eps(u) * 2.0 * u / (u + omega), 0.0);
        let integrand = PvIntegrand::new(numerator, omega, 0.0, top)
            .with_excision(radius)
            .with_breakpoints(hints);
        pv_integrate(integrand, KK_TOL).map_err(quad)?.value.re
    } else if omega > top {
        let mut pts = vec![0.0];
        pts.extend(hints.iter().copied());
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        integrate_segments(
            |u| Complex64::new(table.im_eps(u) * 2.0 * u / (u * u - omega * omega), 0.0),
            &pts,
            KK_TOL,
            AdaptiveLimits::default(),
        )
        .map_err(quad)?
        .value
        .re
    } else {
        return Err(DielectricError::FrequencyOutOfRange {
            omega,
            reason: "ω coincides with the last tabulated frequency".into(),
        });
    };
    Ok(value / std::f64::consts::PI)
}
