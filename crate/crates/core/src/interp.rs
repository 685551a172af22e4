//! Monotone piecewise cubic Hermite interpolation (Fritsch-Carlson slopes).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("abscissae and ordinates differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("abscissae must be finite and strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("ordinate at index {0} is not finite")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, InterpError> {
        let n = x.len();
        if n != y.len() {
            return Err(InterpError::LengthMismatch(n, y.len()));
        }
        if n < 2 {
            return Err(InterpError::TooFewSamples(n));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(InterpError::NonFinite(i));
        }
        for i in 0..n {
            if !x[i].is_finite() || (i > 0 && x[i] <= x[i - 1]) {
                return Err(InterpError::NotIncreasing(i));
            }
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Index i of the interval `[x[i], x[i+1]]` containing `t`, clamped.
    pub fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1
    }

    /// Value at `t`, or `None` outside the sample range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        Some(self.eval_unchecked(t))
    }

    /// Cubic evaluation without the range check; outside the samples this
    /// extends the end cubics.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

// Three-point end slope with the usual monotonicity safeguards.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
