//! Command implementations behind the `pvtrack` binary.
//!
//! Each command writes its human-readable output to the supplied writer and
//! returns a [`CliError`] carrying the process exit code on failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::controllers::ControllerKind;
use crate::environment::Scenario;
use crate::error::Error;
use crate::metrics::{self, SummaryMetrics, WaveformSamples, DEFAULT_SETTLING_BAND};
use crate::power_stage::duty_for_target_voltage;
use crate::pv_model::{open_circuit_voltage, true_mpp, EnvSample};
use crate::sim::{fmt_sig9, simulate, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidK(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_RUNTIME,
            message: format!("io error: {e}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub controller: String,
    pub metrics: SummaryMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<PathBuf>,
    pub scenario_hash: String,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario_hash)?;
        writeln!(
            f,
            "{:<4} {:<10} {:>10} {:>12} {:>12} {:>10}",
            "rank", "controller", "efficiency", "mean_power_w", "ripple_w", "settling"
        )?;
        for (n, row) in self.rows.iter().enumerate() {
            let m = &row.metrics;
            let settling = if m.settling_steps.is_empty() {
                "-".to_string()
            } else {
                m.settling_steps
                    .iter()
                    .map(|(_, s)| s.map_or("never".to_string(), |v| v.to_string()))
                    .collect::<Vec<_>>()
                    .join("/")
            };
            writeln!(
                f,
                "{:<4} {:<10} {:>10.6} {:>12.4} {:>12.4} {:>10}",
                n + 1,
                row.controller,
                m.tracking_efficiency,
                m.mean_power,
                m.steady_ripple,
                settling
            )?;
        }
        for p in &self.traces {
            writeln!(f, "trace {}", p.display())?;
        }
        Ok(())
    }
}

fn parse_controller(name: &str) -> CliResult<ControllerKind> {
    name.parse::<ControllerKind>().map_err(CliError::from)
}

fn run_one(scenario: &Scenario, kind: ControllerKind) -> crate::Result<(Trace, SummaryMetrics)> {
    let mut s = scenario.clone();
    s.controller.name = kind;
    let trace = simulate(&s)?;
    let summary = metrics::summarize(&trace, &s.profile.disturbance_times(), DEFAULT_SETTLING_BAND)?;
    Ok((trace, summary))
}

/// Simulate one controller, write its trace CSV and report its metrics.
pub fn cmd_simulate(
    scenario_path: &Path,
    controller: Option<&str>,
    out_path: &Path,
    out: &mut dyn Write,
) -> CliResult<RunReport> {
    let scenario = Scenario::load(scenario_path)?;
    let kind = match controller {
        Some(name) => parse_controller(name)?,
        None => scenario.controller.name,
    };
    let (trace, summary) = run_one(&scenario, kind)?;
    trace.save_csv(out_path)?;
    let report = RunReport {
        rows: vec![ReportRow {
            controller: kind.to_string(),
            metrics: summary,
        }],
        traces: vec![out_path.to_path_buf()],
        scenario_hash: scenario.hash(),
    };
    write!(out, "{report}")?;
    Ok(report)
}

/// Run several controllers on the same scenario and rank them by efficiency.
pub fn cmd_compare(
    scenario_path: &Path,
    controllers: &[String],
    out_dir: &Path,
    out: &mut dyn Write,
) -> CliResult<RunReport> {
    if controllers.len() < 2 {
        return Err(CliError::usage("compare needs at least two controllers (--controllers a,b)"));
    }
    let scenario = Scenario::load(scenario_path)?;
    let mut kinds = controllers
        .iter()
        .map(|c| parse_controller(c))
        .collect::<CliResult<Vec<_>>>()?;
    kinds.sort_by_key(|k| k.as_str());

    let results: Vec<crate::Result<(Trace, SummaryMetrics)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&k| {
                let s = &scenario;
                scope.spawn(move || run_one(s, k))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });

    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (n, (kind, result)) in kinds.iter().zip(results).enumerate() {
        let (trace, summary) = result?;
        let dup = kinds[..n].iter().filter(|k| *k == kind).count();
        let file = if dup == 0 {
            format!("{kind}.csv")
        } else {
            format!("{kind}_{}.csv", dup + 1)
        };
        let path = out_dir.join(file);
        trace.save_csv(&path)?;
        traces.push(path);
        rows.push(ReportRow {
            controller: kind.to_string(),
            metrics: summary,
        });
    }
    // Stable sort: ties keep name order.
    rows.sort_by(|a, b| {
        b.metrics
            .tracking_efficiency
            .partial_cmp(&a.metrics.tracking_efficiency)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let report = RunReport {
        rows,
        traces,
        scenario_hash: scenario.hash(),
    };
    write!(out, "{report}")?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MppReport {
    pub v_mpp: f64,
    pub i_mpp: f64,
    pub p_mpp: f64,
    pub voc: f64,
    pub duty: f64,
}

/// Print the true maximum power point for `(g, t)` and its boost duty.
pub fn cmd_mpp(scenario_path: Option<&Path>, g: f64, t: f64, out: &mut dyn Write) -> CliResult<MppReport> {
    let scenario = match scenario_path {
        Some(p) => Scenario::load(p)?,
        None => Scenario::stc_constant(),
    };
    let env = EnvSample::new(g, t);
    let mpp = true_mpp(&env, &scenario.panel)?;
    let voc = open_circuit_voltage(&env, &scenario.panel)?;
    let duty = duty_for_target_voltage(mpp.v, &scenario.bus)?;
    for (key, value) in [
        ("g_w_m2", g),
        ("t_c", t),
        ("v_mpp", mpp.v),
        ("i_mpp", mpp.i),
        ("p_mpp", mpp.p),
        ("voc", voc),
        ("v_over_voc", mpp.v / voc),
        ("duty", duty),
    ] {
        writeln!(out, "{key:<11}{}", fmt_sig9(value))?;
    }
    Ok(MppReport {
        v_mpp: mpp.v,
        i_mpp: mpp.i,
        p_mpp: mpp.p,
        voc,
        duty,
    })
}

/// Read a one-column CSV of samples; a non-numeric first line is a header.
pub fn read_samples(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if n == 0 => {}
            Err(_) => {
                return Err(CliError::usage(format!(
                    "{}:{}: `{field}` is not a number",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    Ok(samples)
}

pub fn cmd_thd(
    csv_path: &Path,
    sample_rate: f64,
    fundamental: f64,
    n_harmonics: usize,
    out: &mut dyn Write,
) -> CliResult<f64> {
    let samples = read_samples(csv_path)?;
    let w = WaveformSamples::new(samples, sample_rate, fundamental);
    let value = metrics::thd(&w, n_harmonics)?;
    writeln!(out, "thd_percent {}", fmt_sig9(value))?;
    Ok(value)
}
