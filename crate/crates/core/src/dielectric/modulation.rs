use serde::{Deserialize, Serialize};

use super::DielectricError;
use crate::interp::Pchip;

/// Time dependence of the damping rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModulationProfile {
    /// γ(t) = γ₀.
    #[serde(alias = "Constant")]
    Constant,
    /// γ(t) = γ₀(1 + A sin Ωt).
    #[serde(alias = "Sinusoidal")]
    Sinusoidal {
        #[serde(rename = "A")]
        amplitude: f64,
        #[serde(rename = "Omega")]
        rate: f64,
    },
    /// γ(t) read from samples with monotone cubic interpolation.
    #[serde(alias = "Tabulated")]
    Tabulated { samples: GammaTable },
}

impl ModulationProfile {
    pub fn validate(&self) -> Result<(), DielectricError> {
        match self {
            ModulationProfile::Constant => Ok(()),
            ModulationProfile::Sinusoidal { amplitude, rate } => {
                if !(amplitude.is_finite() && (0.0..1.0).contains(amplitude)) {
                    return Err(DielectricError::Invalid(format!(
                        "modulation amplitude A must satisfy 0 <= A < 1, got {amplitude}"
                    )));
                }
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(DielectricError::Invalid(format!(
                        "modulation rate Omega must be finite and >= 0, got {rate}"
                    )));
                }
                Ok(())
            }
            // Positivity and ordering are checked when the table is built.
            ModulationProfile::Tabulated { .. } => Ok(()),
        }
    }

    pub fn gamma(&self, gamma0: f64, t: f64) -> Result<f64, DielectricError> {
        match self {
            ModulationProfile::Constant => Ok(gamma0),
            ModulationProfile::Sinusoidal { amplitude, rate } => Ok(gamma0 * (1.0 + amplitude * (rate * t).sin())),
            ModulationProfile::Tabulated { samples } => samples.gamma(t),
        }
    }

    /// Modulation angular frequency, if periodic.
    pub fn rate(&self) -> Option<f64> {
        match self {
            ModulationProfile::Sinusoidal { rate, .. } if *rate > 0.0 => Some(*rate),
            _ => None,
        }
    }

    /// Shortest time scale of γ(t): the period, or the tightest sample spacing.
    pub fn time_scale(&self) -> Option<f64> {
        match self {
            ModulationProfile::Constant => None,
            ModulationProfile::Sinusoidal { .. } => self.rate().map(|r| 2.0 * std::f64::consts::PI / r),
            ModulationProfile::Tabulated { samples } => samples
                .interp
                .x()
                .windows(2)
                .map(|w| w[1] - w[0])
                .min_by(f64::total_cmp),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ModulationProfile::Constant => true,
            ModulationProfile::Sinusoidal { amplitude, rate } => *amplitude == 0.0 || *rate == 0.0,
            ModulationProfile::Tabulated { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSample {
    pub t: f64,
    pub gamma: f64,
}

/// Validated γ samples with their interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GammaSample>", into = "Vec<GammaSample>")]
pub struct GammaTable {
    interp: Pchip,
}

impl GammaTable {
    pub fn new(samples: Vec<GammaSample>) -> Result<Self, DielectricError> {
        if let Some(s) = samples.iter().find(|s| !(s.gamma > 0.0 && s.gamma.is_finite())) {
            return Err(DielectricError::Invalid(format!(
                "tabulated damping must be strictly positive, got {} at t = {}",
                s.gamma, s.t
            )));
        }
        let (t, g) = samples.iter().map(|s| (s.t, s.gamma)).unzip();
        let interp = Pchip::new(t, g)?;
        Ok(Self { interp })
    }

    pub fn gamma(&self, t: f64) -> Result<f64, DielectricError> {
        let (lo, hi) = self.interp.domain();
        self.interp
            .eval(t)
            .ok_or(DielectricError::TimeOutOfRange { t, lo, hi })
    }

    pub fn time_range(&self) -> (f64, f64) {
        self.interp.domain()
    }
}

impl TryFrom<Vec<GammaSample>> for GammaTable {
    type Error = DielectricError;

    fn try_from(samples: Vec<GammaSample>) -> Result<Self, Self::Error> {
        Self::new(samples)
    }
}

impl From<GammaTable> for Vec<GammaSample> {
    fn from(table: GammaTable) -> Self {
        table
            .interp
            .x()
            .iter()
            .zip(table.interp.y())
            .map(|(&t, &gamma)| GammaSample { t, gamma })
            .collect()
    }
}
