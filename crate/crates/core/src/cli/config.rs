//! Run configuration, presets and time-grid construction.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::dielectric::{DielectricSpec, LossTable, ModulationProfile};
use crate::emitter::{beta_dispersive, beta_dissipative, classify_regime, EmitterSpec, Regime};

pub const SCHEMA_VERSION: u32 = 1;

/// Smallest accepted sampling densities of the time grid.
pub const MIN_POINTS_PER_PERIOD: usize = 40;
pub const MIN_POINTS_PER_DECAY: usize = 200;

/// Upper bound on the number of time points a run may request.
pub const MAX_TIME_POINTS: usize = 5_000_000;

/// All times are in 1/ω₀, all frequencies in ω₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    #[serde(default = "default_ppp")]
    pub points_per_period: usize,
    /// Per decay time 1/(2β̄), β̄ the closed-form rate averaged over the run.
    #[serde(default = "default_ppd")]
    pub points_per_decay: usize,
}

fn default_ppp() -> usize {
    MIN_POINTS_PER_PERIOD
}

fn default_ppd() -> usize {
    MIN_POINTS_PER_DECAY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of frequency integrals (shift, sum rules, KK).
    pub frequency: f64,
    /// Relative tolerance handed to the direct double integral.
    pub oscillatory: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            frequency: 1e-6,
            oscillatory: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    #[default]
    #[serde(alias = "closed_form", alias = "closed-form")]
    Closed,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write a gnuplot script next to the data.
    #[serde(default)]
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            gnuplot: false,
        }
    }
}

/// Frequency/time grid of the `epsilon` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub times: Vec<f64>,
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        Self {
            omega_min: 0.0,
            omega_max: 3.0,
            points: 301,
            times: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftConfig {
    /// Signed ω_A − ω₀ values in units of γ₀.
    pub detunings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub dielectric: DielectricSpec,
    pub emitter: EmitterSpec,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub epsilon: EpsilonGrid,
    /// Detunings for `shift`; the emitter's own detuning when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftConfig>,
    /// Measured Im ε samples checked by `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_table: Option<LossTable>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive_tol(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance {name} must lie in (0, 1), got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid(format!("config JSON: {e}")))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every module invariant before anything is computed.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.dielectric.validate().map_err(|e| invalid(e.to_string()))?;
        self.emitter.validate().map_err(|e| invalid(e.to_string()))?;
        if self.emitter.omega_a >= self.dielectric.cutoff_lambda {
            return Err(invalid("emitter.omega_A must lie below dielectric.cutoff_lambda"));
        }
        let g = &self.time_grid;
        if !(g.t_max > 0.0 && g.t_max.is_finite()) {
            return Err(invalid(format!("time_grid.t_max must be finite and > 0, got {}", g.t_max)));
        }
        if g.points_per_period < MIN_POINTS_PER_PERIOD {
            return Err(invalid(format!(
                "time_grid.points_per_period must be >= {MIN_POINTS_PER_PERIOD}, got {}",
                g.points_per_period
            )));
        }
        if g.points_per_decay < MIN_POINTS_PER_DECAY {
            return Err(invalid(format!(
                "time_grid.points_per_decay must be >= {MIN_POINTS_PER_DECAY}, got {}",
                g.points_per_decay
            )));
        }
        if let ModulationProfile::Tabulated { samples } = &self.dielectric.modulation {
            let (lo, hi) = samples.time_range();
            if lo > 0.0 || hi < g.t_max {
                return Err(invalid(format!(
                    "tabulated modulation covers [{lo}, {hi}] but the run needs [0, {}]",
                    g.t_max
                )));
            }
        }
        positive_tol("frequency", self.tolerances.frequency)?;
        positive_tol("oscillatory", self.tolerances.oscillatory)?;

        let e = &self.epsilon;
        if !(e.omega_min.is_finite() && e.omega_max.is_finite() && e.omega_min < e.omega_max) {
            return Err(invalid("epsilon grid needs finite omega_min < omega_max"));
        }
        if e.points < 2 || e.times.is_empty() || e.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(invalid("epsilon grid needs >= 2 points and finite times >= 0"));
        }
        if let Some(s) = &self.shift {
            if s.detunings.is_empty() || s.detunings.iter().any(|d| !d.is_finite()) {
                return Err(invalid("shift.detunings must be a non-empty list of finite numbers"));
            }
            for &x in &s.detunings {
                let wa = self.dielectric.omega0 + x * self.dielectric.gamma0;
                if !(wa > 0.0) {
                    return Err(invalid(format!("shift detuning {x}·γ₀ puts omega_A at {wa} <= 0")));
                }
            }
        }
        if self.mode != Mode::Direct {
            let regime = classify_regime(&self.dielectric, &self.emitter);
            let half = self.dielectric.gamma0 / 2.0;
            if regime.tag == Regime::Dissipative && (regime.detuning - half).abs() <= 1e-12 * half {
                return Err(invalid(
                    "closed-form mode needs omega_A off the absorption window edge |omega_A − omega0| = gamma0/2",
                ));
            }
        }
        let n = self.time_points()?;
        if n > MAX_TIME_POINTS {
            return Err(invalid(format!(
                "time grid would need {n} points (limit {MAX_TIME_POINTS}); reduce t_max or the sampling density"
            )));
        }
        Ok(())
    }

    /// Closed-form β for the configured regime.
    pub fn closed_beta(&self, t: f64) -> Result<f64, CliError> {
        let r = match classify_regime(&self.dielectric, &self.emitter).tag {
            Regime::Dissipative => beta_dissipative(&self.dielectric, &self.emitter, t),
            Regime::Dispersive => beta_dispersive(&self.dielectric, &self.emitter, t),
        };
        r.map_err(|e| invalid(e.to_string()))
    }

    /// Time step from the modulation time scale and the mean decay time.
    fn time_step(&self) -> Result<f64, CliError> {
        let g = &self.time_grid;
        let mut step = g.t_max;
        let scale = self.dielectric.modulation.time_scale();
        if let Some(s) = scale {
            step = step.min(s / g.points_per_period as f64);
        }
        let window = scale.map_or(g.t_max, |s| s.min(g.t_max));
        let m = 256;
        let mut mean = 0.0;
        for k in 0..m {
            mean += self.closed_beta(window * k as f64 / m as f64)?;
        }
        mean /= m as f64;
        if mean > 0.0 {
            step = step.min(1.0 / (2.0 * mean) / g.points_per_decay as f64);
        }
        Ok(step)
    }

    fn time_points(&self) -> Result<usize, CliError> {
        let n = (self.time_grid.t_max / self.time_step()?).ceil();
        Ok(if n.is_finite() && n < usize::MAX as f64 {
            n as usize + 1
        } else {
            usize::MAX
        })
    }

    /// Uniform grid on [0, t_max].
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let n = self.time_points()? - 1;
        let t_max = self.time_grid.t_max;
        Ok((0..=n).map(|k| t_max * k as f64 / n as f64).collect())
    }

    /// Signed detunings (units of γ₀) for the `shift` command.
    pub fn shift_detunings(&self) -> Vec<f64> {
        match &self.shift {
            Some(s) => s.detunings.clone(),
            None => vec![(self.emitter.omega_a - self.dielectric.omega0) / self.dielectric.gamma0],
        }
    }
}

/// Shipped parameter sets. Medium defaults: ω_c = 0.5, γ₀ = 0.05, Γ_A = 1e-6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// A = 0.99, Ω = 10Γ′_A, detuning 0.03γ₀.
    #[value(name = "fig3a-slow")]
    Fig3aSlow,
    /// A = 0.99, Ω = 10⁴Γ′_A, detuning 0.03γ₀.
    #[value(name = "fig3a-fast")]
    Fig3aFast,
    /// A = 0.99, Ω = 10γ₀, detuning 0.03γ₀.
    #[value(name = "fig3b-deep")]
    Fig3bDeep,
    /// A = 0.99, Ω = 10γ₀, detuning 0.45γ₀.
    #[value(name = "fig3b-weak")]
    Fig3bWeak,
    /// No modulation, detuning 0.03γ₀.
    #[value(name = "unmodulated")]
    Unmodulated,
}

pub const DEFAULT_OMEGA_C: f64 = 0.5;
pub const DEFAULT_GAMMA0: f64 = 0.05;
pub const DEFAULT_GAMMA_A: f64 = 1e-6;

/// Λ = 50·max(ω₀, ω_A, ω_c).
pub fn default_cutoff(omega0: f64, omega_a: f64, omega_c: f64) -> f64 {
    50.0 * omega0.max(omega_a).max(omega_c)
}

/// Γ′_A: twice the closed-form dissipative rate of the unmodulated medium.
pub fn unmodulated_rate(dielectric: &DielectricSpec, emitter: &EmitterSpec) -> Result<f64, CliError> {
    let mut d = dielectric.clone();
    d.modulation = ModulationProfile::Constant;
    Ok(2.0 * beta_dissipative(&d, emitter, 0.0).map_err(|e| invalid(e.to_string()))?)
}

impl Preset {
    pub fn config(self) -> RunConfig {
        let x = match self {
            Preset::Fig3bWeak => 0.45,
            _ => 0.03,
        };
        let omega_a = 1.0 + x * DEFAULT_GAMMA0;
        let emitter = EmitterSpec::new(omega_a, DEFAULT_GAMMA_A);
        let base = DielectricSpec::constant(
            1.0,
            DEFAULT_OMEGA_C,
            DEFAULT_GAMMA0,
            default_cutoff(1.0, omega_a, DEFAULT_OMEGA_C),
        );
        let g_prime = unmodulated_rate(&base, &emitter).expect("preset medium is valid");
        let (rate, t_max) = match self {
            Preset::Fig3aSlow => (Some(10.0 * g_prime), 4.0 / g_prime),
            Preset::Fig3aFast => (Some(1e4 * g_prime), 4.0 / g_prime),
            Preset::Fig3bDeep | Preset::Fig3bWeak => {
                let rate = 10.0 * DEFAULT_GAMMA0;
                (Some(rate), 4.0 * 2.0 * std::f64::consts::PI / rate)
            }
            Preset::Unmodulated => (None, 4.0 / g_prime),
        };
        let dielectric = match rate {
            Some(rate) => base.with_modulation(ModulationProfile::Sinusoidal { amplitude: 0.99, rate }),
            None => base,
        };
        RunConfig {
            schema_version: SCHEMA_VERSION,
            dielectric,
            emitter,
            time_grid: TimeGrid {
                t_max,
                points_per_period: MIN_POINTS_PER_PERIOD,
                points_per_decay: MIN_POINTS_PER_DECAY,
            },
            tolerances: Tolerances::default(),
            mode: Mode::Closed,
            output: OutputConfig::default(),
            epsilon: EpsilonGrid::default(),
            shift: matches!(self, Preset::Fig3bDeep | Preset::Fig3bWeak).then(|| ShiftConfig {
                detunings: vec![x, -x],
            }),
            loss_table: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Preset; 5] = [
        Preset::Fig3aSlow,
        Preset::Fig3aFast,
        Preset::Fig3bDeep,
        Preset::Fig3bWeak,
        Preset::Unmodulated,
    ];

    #[test]
    fn presets_validate_and_round_trip() {
        for p in ALL {
            let cfg = p.config();
            cfg.validate().unwrap_or_else(|e| panic!("{p:?}: {e}"));
            let back = RunConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{p:?}");
        }
    }

    #[test]
    fn slow_preset_rate_is_ten_unmodulated_rates() {
        let cfg = Preset::Fig3aSlow.config();
        let g = unmodulated_rate(&cfg.dielectric, &cfg.emitter).unwrap();
        // Γ′_A = (Γ_A)·ω_c/√(2ω₀γ₀) = Γ_A·0.5/√0.1
        assert!((g - 1e-6 * 0.5 / 0.1f64.sqrt()).abs() < 1e-18);
        assert_eq!(cfg.dielectric.modulation.rate(), Some(10.0 * g));
    }

    #[test]
    fn grid_meets_sampling_densities() {
        let cfg = Preset::Fig3aSlow.config();
        let times = cfg.times().unwrap();
        let dt = times[1] - times[0];
        let period = cfg.dielectric.modulation.time_scale().unwrap();
        assert!(period / dt >= 40.0);
        let beta_max = (0..64)
            .map(|k| cfg.closed_beta(period * k as f64 / 64.0).unwrap())
            .fold(0.0, f64::max);
        // decay time at the mean rate is sampled at ≥ 200 points, and even
        // the peak rate is resolved
        assert!(1.0 / (2.0 * beta_max) / dt > 20.0);
        assert_eq!(*times.last().unwrap(), cfg.time_grid.t_max);
    }

    #[test]
    fn invalid_fields_are_config_errors() {
        let mut cfg = Preset::Unmodulated.config();
        cfg.time_grid.points_per_period = 10;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = Preset::Unmodulated.config();
        cfg.dielectric.cutoff_lambda = 5.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = Preset::Unmodulated.config();
        cfg.schema_version = 2;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = Preset::Unmodulated.config();
        cfg.emitter.omega_a = 1.025;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        cfg.mode = Mode::Direct;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&Preset::Unmodulated.config().to_json()).unwrap();
        v["time_grid"]["dt"] = serde_json::json!(0.1);
        assert!(RunConfig::from_json(&v.to_string()).is_err());
    }
}
