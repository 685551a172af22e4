//! Cauchy principal value by symmetric excision.
//!
//! Around the pole p the symmetric part
//! `∫_h^d [g(p+u) − g(p−u)]/u du` is integrated in the variable s = ln u,
//! which removes the 1/u factor and keeps the integrand bounded. The excised
//! strip contributes `2 g'(p) h + O(h³)`, so values at h, h/2 and h/4 are
//! combined by Richardson extrapolation in odd powers of h. The part of the
//! interval outside the symmetric window is regular and integrated directly.

use num_complex::Complex64;

use super::gauss::{integrate_segments, AdaptiveLimits};
use super::sum::CompensatedComplexSum;
use super::{PanelSummary, QuadratureError, QuadratureReport, Tolerance};

/// `PV ∫_lower^upper numerator(x) / (x − pole) dx`.
pub struct PvIntegrand<F> {
    pub numerator: F,
    pub pole: f64,
    pub lower: f64,
    pub upper: f64,
    /// Initial excision half-width; defaults to an eighth of the distance from
    /// the pole to the nearer bound.
    pub excision: Option<f64>,
    /// Points where the numerator has kinks or narrow features.
    pub breakpoints: Vec<f64>,
}

impl<F> PvIntegrand<F>
where
    F: FnMut(f64) -> Complex64,
{
    pub fn new(numerator: F, pole: f64, lower: f64, upper: f64) -> Self {
        Self {
            numerator,
            pole,
            lower,
            upper,
            excision: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn with_excision(mut self, h: f64) -> Self {
        self.excision = Some(h);
        self
    }
}

const MAX_HALVINGS: usize = 40;

/// Richardson-extrapolated value from excisions h, h/2, h/4.
fn extrapolate(v_h: Complex64, v_h2: Complex64, v_h4: Complex64) -> Complex64 {
    let w1 = v_h2 * 2.0 - v_h;
    let w2 = v_h4 * 2.0 - v_h2;
    (w2 * 8.0 - w1) / 7.0
}

pub fn pv_integrate<F>(integrand: PvIntegrand<F>, tol: Tolerance) -> Result<QuadratureReport, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let PvIntegrand {
        mut numerator,
        pole: p,
        lower,
        upper,
        excision,
        breakpoints,
    } = integrand;

    if !(lower.is_finite() && upper.is_finite() && p.is_finite()) {
        return Err(QuadratureError::Domain("bounds and pole must be finite".into()));
    }
    if !(lower < p && p < upper) {
        return Err(QuadratureError::Domain(format!(
            "pole {p} must lie strictly inside ({lower}, {upper})"
        )));
    }
    let d = (p - lower).min(upper - p);
    let h0 = match excision {
        Some(h) if h > 0.0 => h.min(d / 8.0),
        Some(_) => return Err(QuadratureError::Domain("excision half-width must be positive".into())),
        None => d / 8.0,
    };

    // Sub-tolerances: the three pieces share the budget.
    let piece_tol = tol.scaled(0.25);
    let mut nodes = 0;
    let mut panels = Vec::new();

    // Regular tail on the longer side.
    let tail = if upper - p > d * (1.0 + 1e-15) {
        Some((p + d, upper))
    } else if p - lower > d * (1.0 + 1e-15) {
        Some((lower, p - d))
    } else {
        None
    };
    let tail_report = match tail {
        Some((a, b)) => {
            let mut pts = vec![a];
            pts.extend(sorted_inside(&breakpoints, a, b));
            pts.push(b);
            let r = integrate_segments(
                |x| numerator(x) / (x - p),
                &pts,
                piece_tol,
                AdaptiveLimits::default(),
            )?;
            nodes += r.nodes;
            panels.push(PanelSummary {
                lower: a,
                upper: b,
                subpanels: r.panels.iter().map(|s| s.subpanels).sum(),
                value: r.value,
                error: r.error,
            });
            Some(r)
        }
        None => None,
    };

    // Symmetric part from h0 out to d, in s = ln u.
    let mut sym = |s: f64| {
        let u = s.exp();
        numerator(p + u) - numerator(p - u)
    };
    let log_break = |lo_u: f64, hi_u: f64| -> Vec<f64> {
        let mut pts: Vec<f64> = breakpoints
            .iter()
            .map(|b| (b - p).abs())
            .filter(|&u| u > lo_u && u < hi_u)
            .map(f64::ln)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    };

    let mut outer_pts = vec![h0.ln()];
    outer_pts.extend(log_break(h0, d));
    outer_pts.push(d.ln());
    let outer = integrate_segments(&mut sym, &outer_pts, piece_tol, AdaptiveLimits::default())?;
    nodes += outer.nodes;

    // Strip [h/2, h] in log space; always has length ln 2.
    let strip = |h: f64, sym: &mut dyn FnMut(f64) -> Complex64, nodes: &mut usize| {
        let mut pts = vec![(h / 2.0).ln()];
        pts.extend(log_break(h / 2.0, h));
        pts.push(h.ln());
        let r = integrate_segments(sym, &pts, piece_tol, AdaptiveLimits::default())?;
        *nodes += r.nodes;
        Ok::<_, QuadratureError>(r)
    };

    // Running values V(h) for the current h, h/2, h/4.
    let mut strips = CompensatedComplexSum::new();
    let mut strip_err = 0.0;
    let mut values: Vec<Complex64> = vec![outer.value];
    let mut h = h0;
    for _ in 0..2 {
        let r = strip(h, &mut sym, &mut nodes)?;
        strips.add(r.value);
        strip_err += r.error;
        values.push(outer.value + strips.value());
        h /= 2.0;
    }
    let mut previous = extrapolate(values[0], values[1], values[2]);
    let mut halvings = 0;
    let (sym_value, richardson_err) = loop {
        let r = strip(h, &mut sym, &mut nodes)?;
        strips.add(r.value);
        strip_err += r.error;
        values.push(outer.value + strips.value());
        h /= 2.0;
        let n = values.len();
        let current = extrapolate(values[n - 3], values[n - 2], values[n - 1]);
        let change = (current - previous).norm();
        let tail_value = tail_report.as_ref().map(|t| t.value).unwrap_or_default();
        let target = piece_tol.target((current + tail_value).norm());
        if change <= target {
            break (current, change);
        }
        halvings += 1;
        if halvings >= MAX_HALVINGS {
            let mut report = QuadratureReport::empty();
            report.value = current + tail_value;
            report.error = change + outer.error + strip_err;
            report.nodes = nodes;
            return Err(QuadratureError::Accuracy {
                target,
                report: Box::new(report),
            });
        }
        previous = current;
    };

    panels.insert(
        0,
        PanelSummary {
            lower: p - d,
            upper: p + d,
            subpanels: outer.panels.iter().map(|s| s.subpanels).sum::<usize>() + values.len() - 1,
            value: sym_value,
            error: richardson_err + outer.error + strip_err,
        },
    );
    panels.sort_by(|a, b| a.lower.total_cmp(&b.lower));

    let mut total = CompensatedComplexSum::new();
    let mut error = 0.0;
    for panel in &panels {
        total.add(panel.value);
        error += panel.error;
    }
    Ok(QuadratureReport {
        value: total.value(),
        error,
        nodes,
        panels,
    })
}

fn sorted_inside(points: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut v: Vec<f64> = points.iter().copied().filter(|&x| x > a && x < b).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
