//! `∫_0^T env(τ) e^{−iaτ} dτ` with panels no wider than a quarter period.

use num_complex::Complex64;

use super::gauss::gauss10_rule;
use super::sum::CompensatedComplexSum;
use super::{PanelSummary, QuadratureError, QuadratureReport, Tolerance};

/// Panel count cap; beyond this the request is reported as unattainable.
const MAX_PANELS: usize = 1 << 26;

/// Panels between exact recomputations of the centre phase.
const REANCHOR: usize = 16;

pub struct OscillatoryIntegrand<F> {
    pub envelope: F,
    /// Oscillation rate a in `e^{−iaτ}`.
    pub rate: f64,
    /// Upper bound T.
    pub length: f64,
    /// Optional extra cap on panel width, for envelopes with their own
    /// time scale.
    pub max_panel: Option<f64>,
}

impl<F> OscillatoryIntegrand<F>
where
    F: FnMut(f64) -> Complex64,
{
    pub fn new(envelope: F, rate: f64, length: f64) -> Self {
        Self {
            envelope,
            rate,
            length,
            max_panel: None,
        }
    }

    pub fn with_max_panel(mut self, width: f64) -> Self {
        self.max_panel = Some(width);
        self
    }
}

/// Integrates with `n` equal panels; returns the compensated sum and the sum
/// of panel magnitudes.
fn panel_sum<F>(env: &mut F, rate: f64, length: f64, n: usize) -> Result<(Complex64, f64), QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let (x, w) = gauss10_rule();
    let width = length / n as f64;
    let half = 0.5 * width;
    let mut node_phase = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        node_phase[j] = Complex64::from_polar(half * w[j], -rate * x[j] * half);
    }
    let step = Complex64::from_polar(1.0, -rate * width);

    let mut total = CompensatedComplexSum::new();
    let mut magnitude = 0.0;
    let mut centre_phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let centre = (k as f64 + 0.5) * width;
        if k % REANCHOR == 0 {
            centre_phase = Complex64::from_polar(1.0, -rate * centre);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..10 {
            let tau = centre + x[j] * half;
            let e = env(tau);
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(QuadratureError::NonFinite { at: tau });
            }
            acc += e * node_phase[j];
        }
        let panel = acc * centre_phase;
        magnitude += panel.norm();
        total.add(panel);
        centre_phase *= step;
    }
    Ok((total.value(), magnitude))
}

/// Integrates `∫_0^T env(τ) e^{−iaτ} dτ`.
///
/// The panel count starts at the quarter-period bound and doubles until two
/// successive resolutions agree within `tol` or within the rounding level of
/// the panel sum; the reported error is the larger of the two.
pub fn oscillatory_integrate<F>(
    integrand: OscillatoryIntegrand<F>,
    tol: Tolerance,
) -> Result<QuadratureReport, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let OscillatoryIntegrand {
        mut envelope,
        rate,
        length,
        max_panel,
    } = integrand;
    if !rate.is_finite() || !length.is_finite() || length < 0.0 {
        return Err(QuadratureError::Domain(format!(
            "need finite rate and length >= 0, got a = {rate}, T = {length}"
        )));
    }
    if length == 0.0 {
        return Ok(QuadratureReport::empty());
    }

    let mut width = length;
    if rate != 0.0 {
        width = width.min(std::f64::consts::FRAC_PI_2 / rate.abs());
    }
    if let Some(m) = max_panel {
        if m > 0.0 {
            width = width.min(m);
        }
    }
    let initial = (length / width).ceil();
    if initial > MAX_PANELS as f64 {
        return Err(QuadratureError::Domain(format!(
            "a·T = {} needs more than {MAX_PANELS} panels",
            rate * length
        )));
    }
    let mut n = (initial as usize).max(2);
    if n % 2 == 1 {
        n += 1;
    }

    let mut nodes = 0;
    let (mut coarse, _) = panel_sum(&mut envelope, rate, length, n / 2)?;
    nodes += 5 * n;
    loop {
        let (fine, magnitude) = panel_sum(&mut envelope, rate, length, n)?;
        nodes += 10 * n;
        let diff = (fine - coarse).norm();
        let floor = 32.0 * f64::EPSILON * magnitude;
        let error = diff.max(floor);
        let target = tol.target(fine.norm());
        let report = QuadratureReport {
            value: fine,
            error,
            nodes,
            panels: vec![PanelSummary {
                lower: 0.0,
                upper: length,
                subpanels: n,
                value: fine,
                error,
            }],
        };
        // Past the rounding floor more panels only add noise.
        if error <= target || diff <= floor {
            return Ok(report);
        }
        if 2 * n > MAX_PANELS {
            return Err(QuadratureError::Accuracy {
                target,
                report: Box::new(report),
            });
        }
        coarse = fine;
        n *= 2;
    }
}
