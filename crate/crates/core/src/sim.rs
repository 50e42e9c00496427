//! Fixed-step closed-loop simulation.
//!
//! Each step samples the environment, lets the controller pick a duty from
//! the previous step's measurement (one-step sensing delay), solves the
//! panel/converter operating point, and records it next to the ideal MPP
//! power for the same environment.

use std::collections::HashMap;
use std::io::{self, Write};
use std::path::Path;

use crate::controllers::{Controller, Measurement, Mode, ProbeKind};
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::power_stage::{operating_point_on, BusParams};
use crate::pv_model::DiodeCurve;

pub const CSV_HEADER: &str = "time_s,g_w_m2,t_c,duty,v_pv,i_pv,p_pv,p_ideal,mode";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub g: f64,
    pub t: f64,
    pub duty: f64,
    pub v_pv: f64,
    pub i_pv: f64,
    pub p_pv: f64,
    pub p_ideal: f64,
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub dt: f64,
    pub controller: String,
    pub scenario_hash: String,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Energy drawn from the panel (J).
    pub fn panel_energy(&self) -> f64 {
        self.records.iter().map(|r| r.p_pv * self.dt).sum()
    }

    /// Energy delivered to the bus (J).
    pub fn bus_energy(&self, bus: &BusParams) -> f64 {
        self.records.iter().map(|r| r.p_pv * bus.efficiency * self.dt).sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_sig9(r.time),
                fmt_sig9(r.g),
                fmt_sig9(r.t),
                fmt_sig9(r.duty),
                fmt_sig9(r.v_pv),
                fmt_sig9(r.i_pv),
                fmt_sig9(r.p_pv),
                fmt_sig9(r.p_ideal),
                r.mode.map(Mode::as_str).unwrap_or(""),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        let mut w = io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn fmt_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Run the scenario's configured controller.
pub fn simulate(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    let mut controller = scenario.controller.build(&scenario.panel, &scenario.bus)?;
    simulate_with(scenario, controller.as_mut())
}

pub fn simulate_with(scenario: &Scenario, controller: &mut dyn Controller) -> Result<Trace> {
    scenario.validate()?;
    let n = scenario.sim.steps();
    let dt = scenario.sim.dt;
    let panel = &scenario.panel;
    let bus = &scenario.bus;
    let mut ideal_cache: HashMap<(u64, u64), f64> = HashMap::new();
    let mut records = Vec::with_capacity(n);
    let mut last: Option<Measurement> = None;

    for k in 0..n {
        let at_step = |e: Error| Error::Simulation {
            step: k,
            source: Box::new(e),
        };
        let time = k as f64 * dt;
        let env = scenario.profile.sample(time).map_err(at_step)?;
        let curve = DiodeCurve::new(&env, panel).map_err(at_step)?;

        let p_ideal = match ideal_cache.get(&(env.g.to_bits(), env.t.to_bits())) {
            Some(&p) => p,
            None => {
                let p = if env.g > 0.0 {
                    curve.max_power_point().map_err(at_step)?.p
                } else {
                    0.0
                };
                ideal_cache.insert((env.g.to_bits(), env.t.to_bits()), p);
                p
            }
        };

        let probe = controller.probe(time);
        let (duty, v_pv, i_pv, mode) = match probe {
            Some(kind) => {
                // Load disconnected: the panel terminals are open or shorted.
                let (v, i) = match kind {
                    ProbeKind::OpenCircuit => {
                        let voc = if curve.i_ph > 0.0 {
                            curve.open_circuit_voltage().map_err(at_step)?
                        } else {
                            0.0
                        };
                        (voc, 0.0)
                    }
                    ProbeKind::ShortCircuit => (0.0, curve.current(0.0).map_err(at_step)?.max(0.0)),
                };
                (controller.duty(), v, i, Some(Mode::Probe))
            }
            None => {
                let duty = match &last {
                    Some(m) => controller.step(m).map_err(at_step)?,
                    None => controller.duty(),
                };
                let op = operating_point_on(&curve, duty, bus).map_err(at_step)?;
                (op.duty, op.v_pv, op.i_pv, controller.mode())
            }
        };
        // Probe steps produce nothing for the bus.
        let p_pv = if probe.is_some() { 0.0 } else { v_pv * i_pv };

        records.push(TraceRecord {
            time,
            g: env.g,
            t: env.t,
            duty,
            v_pv,
            i_pv,
            p_pv,
            p_ideal,
            mode,
        });
        last = Some(Measurement {
            v_pv,
            i_pv,
            p_pv,
            t: env.t,
            time,
            probe,
        });
    }

    Ok(Trace {
        records,
        dt,
        controller: controller.name().to_string(),
        scenario_hash: scenario.hash(),
    })
}
