//! `∫_0^Λ f(ω) dω` split at a resonance window and an emitter line.

use num_complex::Complex64;

use super::gauss::{integrate_segments, AdaptiveLimits};
use super::sum::CompensatedComplexSum;
use super::{PanelSummary, QuadratureError, QuadratureReport, Tolerance};

/// Breakpoint layout for [`frequency_integrate_split`].
#[derive(Debug, Clone, Copy)]
pub struct SplitPlan {
    /// Resonance centre ω₀.
    pub center: f64,
    /// Window half-width W.
    pub half_width: f64,
    /// Emitter line ω_A.
    pub line: f64,
    /// Upper limit Λ.
    pub upper: f64,
    /// Extra nodes at `line ± half_width·2^{-k}` for k = 1..=levels.
    pub cluster_levels: u32,
    /// Optional cap on the width of the initial panels.
    pub max_panel: Option<f64>,
    pub limits: AdaptiveLimits,
}

impl SplitPlan {
    pub fn new(center: f64, half_width: f64, line: f64, upper: f64) -> Self {
        Self {
            center,
            half_width,
            line,
            upper,
            cluster_levels: 4,
            max_panel: None,
            limits: AdaptiveLimits::default(),
        }
    }

    pub fn with_max_panel(mut self, width: f64) -> Self {
        self.max_panel = Some(width);
        self
    }

    /// Mandatory breakpoints, sorted, including 0 and Λ.
    pub fn breakpoints(&self) -> Result<Vec<f64>, QuadratureError> {
        let Self {
            center,
            half_width: w,
            line,
            upper,
            ..
        } = *self;
        if !(w > 0.0 && upper.is_finite() && upper > 0.0) {
            return Err(QuadratureError::Domain(format!(
                "need W > 0 and finite Λ > 0, got W = {w}, Λ = {upper}"
            )));
        }
        if !(center - w > 0.0 && center + w < upper) {
            return Err(QuadratureError::Domain(format!(
                "resonance window [{}, {}] is not inside (0, {upper})",
                center - w,
                center + w
            )));
        }
        if !(line > 0.0 && line < upper) {
            return Err(QuadratureError::Domain(format!(
                "emitter line {line} is not inside (0, {upper})"
            )));
        }
        let mut pts = vec![0.0, center - w, center + w, line, upper];
        let mut offset = w;
        for _ in 0..self.cluster_levels {
            offset *= 0.5;
            pts.push(line - offset);
            pts.push(line + offset);
        }
        pts.retain(|&x| (0.0..=upper).contains(&x));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }
}

/// Integrates f over (0, Λ) starting from the plan's breakpoints.
///
/// The report has one panel per mandatory segment; segments inside
/// `[ω₀−W, ω₀+W]` make up the resonant contribution and the rest the
/// off-resonant remainder.
pub fn frequency_integrate_split<F>(
    f: F,
    plan: &SplitPlan,
    tol: Tolerance,
) -> Result<QuadratureReport, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let mandatory = plan.breakpoints()?;
    let Some(width) = plan.max_panel.filter(|m| *m > 0.0) else {
        return integrate_segments(f, &mandatory, tol, plan.limits);
    };

    let mut pts = vec![mandatory[0]];
    let mut owner = Vec::new();
    for (s, seg) in mandatory.windows(2).enumerate() {
        let pieces = ((seg[1] - seg[0]) / width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            let x = if k == pieces {
                seg[1]
            } else {
                seg[0] + (seg[1] - seg[0]) * k as f64 / pieces as f64
            };
            pts.push(x);
            owner.push(s);
        }
    }
    let fine = integrate_segments(f, &pts, tol, plan.limits);
    let regroup = |r: QuadratureReport| -> QuadratureReport {
        let mut panels: Vec<PanelSummary> = Vec::new();
        let mut sums: Vec<CompensatedComplexSum> = Vec::new();
        for p in r.panels {
            let s = owner[pts.partition_point(|&x| x < p.lower)];
            if panels.last().map(|last| last.lower) != Some(mandatory[s]) {
                panels.push(PanelSummary {
                    lower: mandatory[s],
                    upper: mandatory[s + 1],
                    subpanels: 0,
                    value: Complex64::new(0.0, 0.0),
                    error: 0.0,
                });
                sums.push(CompensatedComplexSum::new());
            }
            let last = panels.last_mut().expect("pushed above");
            last.subpanels += p.subpanels;
            last.error += p.error;
            sums.last_mut().expect("pushed above").add(p.value);
        }
        for (p, s) in panels.iter_mut().zip(sums) {
            p.value = s.value();
        }
        QuadratureReport { panels, ..r }
    };
    match fine {
        Ok(r) => Ok(regroup(r)),
        Err(QuadratureError::Accuracy { target, report }) => Err(QuadratureError::Accuracy {
            target,
            report: Box::new(regroup(*report)),
        }),
        Err(e) => Err(e),
    }
}
