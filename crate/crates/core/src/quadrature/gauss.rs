//! 10-point Gauss / 21-point Kronrod pair and a globally adaptive integrator
//! built on it.

// Published nodes and weights, kept at full precision.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::sum::CompensatedComplexSum;
use super::{PanelSummary, QuadratureError, QuadratureReport, Tolerance};

/// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss nodes.
pub(crate) const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// The ten Gauss-Legendre nodes on [-1, 1] with their weights, ascending.
pub fn gauss10_rule() -> ([f64; 10], [f64; 10]) {
    let mut x = [0.0; 10];
    let mut w = [0.0; 10];
    for j in 0..5 {
        let node = XGK[2 * j + 1];
        x[j] = -node;
        w[j] = WG[j];
        x[9 - j] = node;
        w[9 - j] = WG[j];
    }
    (x, w)
}

/// Result of one GK21 panel evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Gk21 {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |f| over the panel.
    pub resabs: f64,
}

/// Applies the Gauss-Kronrod 10/21 pair on [a, b].
///
/// The error estimate follows the usual QUADPACK heuristics, applied to the
/// modulus of the complex difference.
pub fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Gk21, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];

    let fc = eval(f, center)?;
    let mut resg = Complex64::new(0.0, 0.0);
    let mut resk = fc * WGK[10];
    let mut resabs = fc.norm() * WGK[10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }

    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let scale = half.abs();
    let value = resk * half;
    resabs *= scale;
    resasc *= scale;
    let mut error = ((resk - resg) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Gk21 {
        value,
        error,
        resabs,
    })
}

fn eval<F>(f: &mut F, x: f64) -> Result<Complex64, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    let v = f(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { at: x })
    }
}

/// Limits for the adaptive engine.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveLimits {
    /// Maximum number of bisections on top of the initial segments.
    pub max_bisections: usize,
}

impl Default for AdaptiveLimits {
    fn default() -> Self {
        Self {
            max_bisections: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    lower: f64,
    upper: f64,
    value: Complex64,
    error: f64,
    segment: usize,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    // Largest error first; ties broken by position so the refinement order
    // never depends on heap internals.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lower.total_cmp(&self.lower))
    }
}

/// Adaptive integration over [a, b].
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureReport, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_segments(f, &[a, b], tol, AdaptiveLimits::default())
}

/// Globally adaptive integration over consecutive segments
/// `[points[0], points[1]], [points[1], points[2]], ...`.
///
/// All segments share one error budget: the interval with the largest error
/// estimate anywhere is bisected next. The report carries one panel summary
/// per input segment.
pub fn integrate_segments<F>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    limits: AdaptiveLimits,
) -> Result<QuadratureReport, QuadratureError>
where
    F: FnMut(f64) -> Complex64,
{
    if points.len() < 2 {
        return Err(QuadratureError::Domain(
            "at least two integration points are required".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(QuadratureError::Domain("integration points must be finite".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuadratureError::Domain(
            "integration points must be non-decreasing".into(),
        ));
    }

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Interval> = Vec::new();
    let mut nodes = 0usize;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut resabs = 0.0;

    for (segment, w) in points.windows(2).enumerate() {
        if w[0] == w[1] {
            continue;
        }
        let r = gk21(&mut f, w[0], w[1])?;
        nodes += 21;
        value += r.value;
        error += r.error;
        resabs += r.resabs;
        heap.push(Interval {
            lower: w[0],
            upper: w[1],
            value: r.value,
            error: r.error,
            segment,
        });
    }

    let mut bisections = 0;
    let converged = loop {
        let target = tol.target(value.norm());
        if error <= target {
            break true;
        }
        // Nothing left to gain once the remaining error is rounding noise.
        if error <= 50.0 * f64::EPSILON * resabs {
            break true;
        }
        if bisections >= limits.max_bisections {
            break false;
        }
        let Some(worst) = heap.pop() else {
            break false;
        };
        let mid = 0.5 * (worst.lower + worst.upper);
        if !(mid > worst.lower && mid < worst.upper) {
            frozen.push(worst);
            continue;
        }
        let left = gk21(&mut f, worst.lower, mid)?;
        let right = gk21(&mut f, mid, worst.upper)?;
        nodes += 42;
        bisections += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        for (lo, hi, r) in [(worst.lower, mid, left), (mid, worst.upper, right)] {
            heap.push(Interval {
                lower: lo,
                upper: hi,
                value: r.value,
                error: r.error,
                segment: worst.segment,
            });
        }
        if bisections % 256 == 0 {
            // Re-sum to stop drift in the running totals.
            error = heap.iter().chain(frozen.iter()).map(|i| i.error).sum();
        }
    };

    let mut intervals: Vec<Interval> = heap.into_vec();
    intervals.extend(frozen);
    intervals.sort_by(|x, y| x.lower.total_cmp(&y.lower));
    let report = assemble(intervals, points, nodes);
    if converged {
        Ok(report)
    } else {
        let target = tol.target(report.value.norm());
        Err(QuadratureError::Accuracy {
            target,
            report: Box::new(report),
        })
    }
}

fn assemble(intervals: Vec<Interval>, points: &[f64], nodes: usize) -> QuadratureReport {
    let nseg = points.len() - 1;
    let mut seg_value = vec![CompensatedComplexSum::new(); nseg];
    let mut seg_error = vec![0.0; nseg];
    let mut seg_count = vec![0usize; nseg];
    let mut total = CompensatedComplexSum::new();
    let mut total_error = 0.0;
    for iv in &intervals {
        seg_value[iv.segment].add(iv.value);
        seg_error[iv.segment] += iv.error;
        seg_count[iv.segment] += 1;
        total.add(iv.value);
        total_error += iv.error;
    }
    let panels = (0..nseg)
        .filter(|&s| seg_count[s] > 0)
        .map(|s| PanelSummary {
            lower: points[s],
            upper: points[s + 1],
            subpanels: seg_count[s],
            value: seg_value[s].value(),
            error: seg_error[s],
        })
        .collect();
    QuadratureReport {
        value: total.value(),
        error: total_error,
        nodes,
        panels,
    }
}
