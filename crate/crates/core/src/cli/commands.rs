//! The four subcommands. Each returns whether the run succeeded; config
//! problems surface as [`CliError::Config`] before any computation.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{unmodulated_rate, Mode, RunConfig};
use super::CliError;
use crate::dielectric::{
    epsilon, kramers_kronig_re, reality_constraint_check, refractive_index, resonance_grid, LossTable,
    REALITY_THRESHOLD,
};
use crate::emitter::{
    adiabatic_warnings, classify_regime, compute_trace, delta_resonant, DecayTrace, EmitterSpec, RateModel,
};
use crate::fano::{
    coupling_inequality_check, polariton_inequality_check, sum_rule_check, CheckReport, CouplingSpec,
    SUM_RULE_TOLERANCE,
};
use crate::quadrature::Tolerance;

/// Direct-mode work estimate (frequency panels per time point) above which
/// a warning is logged.
const DIRECT_PANEL_WARNING: f64 = 2e4;

/// Shortest round-trip decimal form, so identical runs give identical bytes.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir)
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Serialize)]
struct Provenance<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    result: T,
}

fn provenance<'a, T: Serialize>(command: &'static str, config: &'a RunConfig, result: T) -> Provenance<'a, T> {
    Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result,
    }
}

/// `omega, t, re_eps, im_eps, eta, kappa` over the configured grid, t-major.
pub fn cmd_epsilon(cfg: &RunConfig) -> Result<bool, CliError> {
    let g = &cfg.epsilon;
    let d = &cfg.dielectric;
    let mut rows = Vec::with_capacity(g.points * g.times.len());
    for &t in &g.times {
        for k in 0..g.points {
            let w = g.omega_min + (g.omega_max - g.omega_min) * k as f64 / (g.points - 1) as f64;
            let eps = epsilon(d, w, t).map_err(|e| CliError::Config(e.to_string()))?.value;
            let n = refractive_index(d, w, t).map_err(|e| CliError::Config(e.to_string()))?.value;
            rows.push(vec![num(w), num(t), num(eps.re), num(eps.im), num(n.re), num(n.im)]);
        }
    }
    let path = out_dir(cfg)?.join("epsilon.csv");
    write_csv(&path, &["omega", "t", "re_eps", "im_eps", "eta", "kappa"], rows)?;
    log::info!("wrote {}", path.display());
    Ok(true)
}

/// One line of the `verify` report.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(flatten)]
    pub report: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

fn failed(check: &str, t: Option<f64>, tolerance: f64, message: String) -> VerifyEntry {
    VerifyEntry {
        t,
        report: CheckReport {
            check: check.into(),
            value: f64::NAN,
            error: f64::NAN,
            tolerance,
            pass: false,
            margin: None,
        },
        message: Some(message),
    }
}

fn entry<E: std::fmt::Display>(check: &str, t: Option<f64>, tol: f64, r: Result<CheckReport, E>) -> VerifyEntry {
    match r {
        Ok(report) => VerifyEntry {
            t,
            report,
            message: None,
        },
        Err(e) => failed(check, t, tol, e.to_string()),
    }
}

/// Times at which the time-local checks run: 8 phases of a period, or t = 0.
fn verify_times(cfg: &RunConfig) -> Vec<f64> {
    match cfg.dielectric.modulation.rate() {
        Some(rate) => (0..8).map(|k| 2.0 * PI / rate * k as f64 / 8.0).collect(),
        None => vec![0.0],
    }
}

/// KK reconstruction error of the Drude-Lorentz medium at t = 0, measured
/// against |ε| so that zeros of Re ε do not dominate.
fn kk_round_trip(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    const KK_TOLERANCE: f64 = 1e-3;
    let d = &cfg.dielectric;
    let table = LossTable::from_dielectric(d, 0.0, &resonance_grid(d)).map_err(|e| CliError::Compute(e.to_string()))?;
    let lo: f64 = 0.1 * d.omega0;
    let hi = 0.95 * d.cutoff_lambda;
    let gamma = d.gamma(0.0).map_err(|e| CliError::Compute(e.to_string()))?;
    let mut worst = 0.0f64;
    for k in 0..=96 {
        let w = lo * (hi / lo).powf(k as f64 / 96.0);
        if (w - d.omega0).abs() < 0.1 * d.gamma0 {
            continue;
        }
        let exact = d.eps_with_damping(w, gamma);
        let got = 1.0 + kramers_kronig_re(&table, w).map_err(|e| CliError::Compute(e.to_string()))?;
        worst = worst.max((got - exact.re).abs() / exact.norm());
    }
    Ok(CheckReport {
        check: "kramers_kronig_round_trip".into(),
        value: worst,
        error: 0.0,
        tolerance: KK_TOLERANCE,
        pass: worst <= KK_TOLERANCE,
        margin: None,
    })
}

#[derive(Serialize)]
struct VerifySummary {
    pass: bool,
    checks: Vec<VerifyEntry>,
}

/// Sum rule, coupling inequality, reality, KK and polariton checks.
pub fn cmd_verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let d = &cfg.dielectric;
    let coupling = CouplingSpec::drude_lorentz(d);
    let mut checks = Vec::new();
    for t in verify_times(cfg) {
        checks.push(entry(
            "sum_rule",
            Some(t),
            SUM_RULE_TOLERANCE,
            sum_rule_check(&coupling, t, SUM_RULE_TOLERANCE),
        ));
        checks.push(entry("coupling_inequality", Some(t), 0.0, coupling_inequality_check(&coupling, t)));
    }
    for w in [0.5 * d.omega0, d.omega0, 2.0 * d.omega0, 0.5 * d.cutoff_lambda] {
        let r = reality_constraint_check(d, w, 0.0).map(|rc| CheckReport {
            check: format!("reality_constraint(omega={w})"),
            value: rc.residual,
            error: 0.0,
            tolerance: REALITY_THRESHOLD,
            pass: rc.pass,
            margin: None,
        });
        checks.push(entry("reality_constraint", Some(0.0), REALITY_THRESHOLD, r));
    }
    checks.push(entry("kramers_kronig_round_trip", Some(0.0), 1e-3, kk_round_trip(cfg)));
    for k in [0.5 * d.omega0, d.omega0, 2.0 * d.omega0] {
        let r = polariton_inequality_check(d, k, 0.0).map(|mut r| {
            r.check = format!("{}(k={k})", r.check);
            r
        });
        checks.push(entry("polariton_inequality", Some(0.0), 0.0, r));
    }
    if let Some(table) = &cfg.loss_table {
        let rc = table.parity_check();
        checks.push(VerifyEntry {
            t: None,
            report: CheckReport {
                check: "loss_table_parity".into(),
                value: rc.residual,
                error: 0.0,
                tolerance: REALITY_THRESHOLD,
                pass: rc.pass,
                margin: None,
            },
            message: (!rc.pass).then(|| "tabulated Im ε is not odd in ω".to_string()),
        });
    }
    let pass = checks.iter().all(|c| c.report.pass);
    for c in checks.iter().filter(|c| !c.report.pass) {
        log::warn!(
            "check {} failed: value {} (tolerance {}){}",
            c.report.check,
            c.report.value,
            c.report.tolerance,
            c.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
        );
    }
    let summary = VerifySummary { pass, checks };
    let path = out_dir(cfg)?.join("verify.json");
    write_json(&path, &provenance("verify", cfg, &summary))?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("report serializes"));
    Ok(pass)
}

fn models(mode: Mode) -> &'static [RateModel] {
    match mode {
        Mode::Closed => &[RateModel::ClosedForm],
        Mode::Direct => &[RateModel::Direct],
        Mode::Both => &[RateModel::ClosedForm, RateModel::Direct],
    }
}

fn model_name(m: RateModel) -> &'static str {
    match m {
        RateModel::ClosedForm => "closed",
        RateModel::Direct => "direct",
    }
}

#[derive(Serialize)]
struct TraceSummary {
    model: RateModel,
    file: PathBuf,
    points: usize,
    failures: usize,
    final_population: f64,
}

#[derive(Serialize)]
struct DecaySummary {
    regime: crate::emitter::RegimeClassification,
    /// 2β of the unmodulated medium in the dissipative closed form.
    unmodulated_rate: Option<f64>,
    warnings: Vec<String>,
    traces: Vec<TraceSummary>,
}

fn decay_rows(trace: &DecayTrace, gamma_a: f64) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..trace.times.len()).map(move |i| {
        vec![
            num(trace.times[i] * gamma_a),
            num(trace.beta[i] / gamma_a),
            num(trace.delta[i] / gamma_a),
            num(trace.population[i]),
            num(trace.beta_err[i] / gamma_a),
            num(trace.delta_err[i] / gamma_a),
        ]
    })
}

fn gnuplot_script(files: &[PathBuf]) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'Γ_A t'\nset ylabel 'P_e'\nplot ",
    );
    let plots: Vec<String> = files
        .iter()
        .map(|f| format!("'{}' using 1:4 with lines", f.file_name().unwrap().to_string_lossy()))
        .collect();
    s.push_str(&plots.join(", "));
    s.push('\n');
    s
}

/// β(t), Δ(t) and P_e(t) per requested model, plus a JSON provenance file.
pub fn cmd_decay(cfg: &RunConfig) -> Result<bool, CliError> {
    let d = &cfg.dielectric;
    let e = &cfg.emitter;
    let times = cfg.times()?;
    let mut warnings = adiabatic_warnings(d, e);
    for w in &warnings {
        log::warn!("{w}");
    }
    if cfg.mode != Mode::Closed {
        let panels = d.cutoff_lambda * cfg.time_grid.t_max / (2.0 * PI);
        if panels > DIRECT_PANEL_WARNING {
            let msg = format!(
                "direct mode at t_max = {} needs about {panels:.0} frequency panels per late time point; \
                 expect long run times or use --mode closed",
                cfg.time_grid.t_max
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let dir = out_dir(cfg)?;
    let mut traces = Vec::new();
    let mut files = Vec::new();
    for &model in models(cfg.mode) {
        let tol = Tolerance::relative(match model {
            RateModel::ClosedForm => cfg.tolerances.frequency,
            RateModel::Direct => cfg.tolerances.oscillatory,
        });
        let trace = compute_trace(d, e, &times, model, tol).map_err(|err| CliError::Config(err.to_string()))?;
        let path = dir.join(format!("decay_{}.csv", model_name(model)));
        write_csv(
            &path,
            &["t", "beta", "delta", "population", "beta_err", "delta_err"],
            decay_rows(&trace, e.gamma_a),
        )?;
        log::info!("wrote {} ({} points, {} flagged)", path.display(), times.len(), trace.failures());
        traces.push(TraceSummary {
            model,
            file: PathBuf::from(path.file_name().unwrap()),
            points: times.len(),
            failures: trace.failures(),
            final_population: *trace.population.last().unwrap(),
        });
        files.push(path);
    }
    if cfg.output.gnuplot {
        let path = dir.join("decay.gp");
        fs::write(&path, gnuplot_script(&files)).map_err(io_err(&path))?;
    }
    let regime = classify_regime(d, e);
    let summary = DecaySummary {
        regime,
        unmodulated_rate: (regime.tag == crate::emitter::Regime::Dissipative)
            .then(|| unmodulated_rate(d, e).ok())
            .flatten(),
        warnings,
        traces,
    };
    write_json(&dir.join("decay.json"), &provenance("decay", cfg, summary))?;
    Ok(true)
}

#[derive(Serialize)]
struct ShiftSeries {
    detuning: f64,
    amplitude: f64,
    mean: f64,
    failures: usize,
}

#[derive(Serialize)]
struct ShiftSummary {
    series: Vec<ShiftSeries>,
}

/// Δ_res(t) for each configured detuning: `t, detuning, delta_res` with t in
/// 1/ω₀, detuning in γ₀ and Δ_res in Γ_A.
pub fn cmd_shift(cfg: &RunConfig) -> Result<bool, CliError> {
    let d = &cfg.dielectric;
    let times = cfg.times()?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for x in cfg.shift_detunings() {
        let e = EmitterSpec::new(d.omega0 + x * d.gamma0, cfg.emitter.gamma_a);
        let mut failures = 0;
        let values: Vec<f64> = times
            .iter()
            .map(|&t| match delta_resonant(d, &e, t) {
                Ok(v) => v / e.gamma_a,
                Err(err) => {
                    failures += 1;
                    log::warn!("detuning {x}·γ₀, t = {t}: {err}");
                    f64::NAN
                }
            })
            .collect();
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let (amplitude, mean) = if finite.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let max = finite.iter().copied().fold(f64::MIN, f64::max);
            let min = finite.iter().copied().fold(f64::MAX, f64::min);
            ((max - min) / 2.0, finite.iter().sum::<f64>() / finite.len() as f64)
        };
        series.push(ShiftSeries {
            detuning: x,
            amplitude,
            mean,
            failures,
        });
        rows.extend(times.iter().zip(&values).map(|(&t, &v)| vec![num(t), num(x), num(v)]));
    }
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("shift.csv"), &["t", "detuning", "delta_res"], rows)?;
    write_json(&dir.join("shift.json"), &provenance("shift", cfg, ShiftSummary { series }))?;
    Ok(true)
}
