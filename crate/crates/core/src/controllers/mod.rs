//! MPPT controllers.
//!
//! Each algorithm is a step function over a [`ControllerState`] plus a small
//! wrapper implementing [`Controller`] so the simulator can drive any of them
//! uniformly. All duties leave the controllers clamped to `[0, d_max]`.

mod fractional;
mod hybrid;
mod inccond;
mod po;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power_stage::BusParams;
use crate::pv_model::PanelParams;

pub use fractional::{
    estimate_impp_fractional_isc, estimate_vmpp_fractional_voc, fractional_isc_controller_step,
    fractional_voc_controller_step, FractionalIsc, FractionalVoc,
};
pub use hybrid::{hybrid_step, temperature_corrected_voc, Hybrid, HybridConfig};
pub use inccond::{inc_cond_step, IncCond};
pub use po::{po_step, PerturbObserve};

/// Duty applied before any measurement exists.
pub const BOOTSTRAP_DUTY: f64 = 0.5;

/// What the controller sees of the panel at one control instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub v_pv: f64,
    pub i_pv: f64,
    pub p_pv: f64,
    /// Cell temperature (°C).
    pub t: f64,
    pub time: f64,
    /// Set when the panel was disconnected from the converter for a probe.
    pub probe: Option<ProbeKind>,
}

impl Measurement {
    pub fn new(v_pv: f64, i_pv: f64, t: f64, time: f64) -> Self {
        Measurement {
            v_pv,
            i_pv,
            p_pv: v_pv * i_pv,
            t,
            time,
            probe: None,
        }
    }
}

/// Load-disconnect probe used by the offline fractional methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    OpenCircuit,
    ShortCircuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Operating point recomputed from the temperature-corrected Voc.
    Calc,
    /// Fine hill-climbing adjustment.
    Fine,
    /// Panel disconnected to sample Voc or Isc.
    Probe,
    /// Duty held between probes.
    Hold,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Calc => "calc",
            Mode::Fine => "fine",
            Mode::Probe => "probe",
            Mode::Hold => "hold",
        }
    }
}

/// Sign of the next duty perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

/// Per-run controller memory.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub last_duty: f64,
    pub last_power: f64,
    pub last_temp: f64,
    pub last_v: f64,
    pub last_i: f64,
    pub perturb_dir: Direction,
    pub mode: Option<Mode>,
    /// False until the first measurement has been consumed.
    pub initialized: bool,
    pub d_max: f64,
}

impl ControllerState {
    pub fn new(initial_duty: f64, d_max: f64) -> Self {
        ControllerState {
            last_duty: initial_duty.clamp(0.0, d_max),
            last_power: 0.0,
            last_temp: f64::NAN,
            last_v: 0.0,
            last_i: 0.0,
            perturb_dir: Direction::Up,
            mode: None,
            initialized: false,
            d_max,
        }
    }

    pub(crate) fn set_duty(&mut self, duty: f64) -> f64 {
        self.last_duty = duty.clamp(0.0, self.d_max);
        self.last_duty
    }
}

/// A duty-cycle controller driven once per simulation step.
pub trait Controller: Send {
    fn name(&self) -> &'static str;

    /// Duty currently commanded (the bootstrap duty before the first step).
    fn duty(&self) -> f64;

    fn mode(&self) -> Option<Mode> {
        None
    }

    /// Asked at the start of each step; `Some` disconnects the panel for this
    /// step to sample it.
    fn probe(&mut self, _time: f64) -> Option<ProbeKind> {
        None
    }

    /// Consume a measurement and return the duty for the next step.
    fn step(&mut self, m: &Measurement) -> Result<f64>;
}

/// Holds one duty forever. Handy as an oracle-pinned baseline.
#[derive(Debug, Clone)]
pub struct FixedDuty {
    duty: f64,
}

impl FixedDuty {
    pub fn new(duty: f64, bus: &BusParams) -> Result<Self> {
        if !(0.0..=bus.d_max).contains(&duty) {
            return Err(Error::DutyOutOfRange {
                duty,
                d_max: bus.d_max,
            });
        }
        Ok(FixedDuty { duty })
    }
}

impl Controller for FixedDuty {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn duty(&self) -> f64 {
        self.duty
    }

    fn step(&mut self, _m: &Measurement) -> Result<f64> {
        Ok(self.duty)
    }
}

/// Controller names accepted on the command line and in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Hybrid,
    Po,
    Inccond,
    FracVoc,
    FracIsc,
    Fixed,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 6] = [
        ControllerKind::Hybrid,
        ControllerKind::Po,
        ControllerKind::Inccond,
        ControllerKind::FracVoc,
        ControllerKind::FracIsc,
        ControllerKind::Fixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Hybrid => "hybrid",
            ControllerKind::Po => "po",
            ControllerKind::Inccond => "inccond",
            ControllerKind::FracVoc => "frac_voc",
            ControllerKind::FracIsc => "frac_isc",
            ControllerKind::Fixed => "fixed",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::Config {
                line: None,
                key: Some("controller".into()),
                message: format!("unknown controller `{s}`; valid names: {}", Self::valid_names()),
            })
    }
}

fn d_po_step() -> f64 {
    0.01
}
fn d_inccond_step() -> f64 {
    0.01
}
fn d_inccond_eps() -> f64 {
    0.005
}
fn d_k() -> f64 {
    0.74
}
fn d_kk() -> f64 {
    0.87
}
fn d_t_threshold() -> f64 {
    1.0
}
fn d_fine_step() -> f64 {
    0.005
}
fn d_probe_interval() -> f64 {
    5.0
}
fn d_initial_duty() -> f64 {
    BOOTSTRAP_DUTY
}
fn d_kind() -> ControllerKind {
    ControllerKind::Hybrid
}

/// Controller selection plus every tunable, as read from `[controller]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSettings {
    #[serde(default = "d_kind")]
    pub name: ControllerKind,
    /// P&O duty increment.
    #[serde(default = "d_po_step")]
    pub po_step: f64,
    #[serde(default = "d_inccond_step")]
    pub inccond_step: f64,
    /// Incremental-conductance hold tolerance (A/V).
    #[serde(default = "d_inccond_eps")]
    pub inccond_eps: f64,
    /// Fractional open-circuit constant.
    #[serde(default = "d_k")]
    pub k: f64,
    /// Fractional short-circuit constant.
    #[serde(default = "d_kk")]
    pub kk: f64,
    #[serde(default = "d_t_threshold")]
    pub t_threshold: f64,
    #[serde(default = "d_fine_step")]
    pub fine_step: f64,
    /// Seconds between offline probes.
    #[serde(default = "d_probe_interval")]
    pub probe_interval: f64,
    #[serde(default = "d_initial_duty")]
    pub initial_duty: f64,
    /// Duty held by the `fixed` controller.
    #[serde(default)]
    pub fixed_duty: Option<f64>,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        ControllerSettings {
            name: d_kind(),
            po_step: d_po_step(),
            inccond_step: d_inccond_step(),
            inccond_eps: d_inccond_eps(),
            k: d_k(),
            kk: d_kk(),
            t_threshold: d_t_threshold(),
            fine_step: d_fine_step(),
            probe_interval: d_probe_interval(),
            initial_duty: d_initial_duty(),
            fixed_duty: None,
        }
    }
}

impl ControllerSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("po_step", self.po_step)?;
        positive("inccond_step", self.inccond_step)?;
        positive("inccond_eps", self.inccond_eps)?;
        positive("t_threshold", self.t_threshold)?;
        positive("probe_interval", self.probe_interval)?;
        if !(self.fine_step > 0.0 && self.fine_step <= 0.1) {
            return Err(Error::invalid("fine_step", "must lie in (0, 0.1]"));
        }
        for v in [self.k, self.kk] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidK(v));
            }
        }
        if !(0.0..1.0).contains(&self.initial_duty) {
            return Err(Error::invalid("initial_duty", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Instantiate the selected controller for one run.
    pub fn build(&self, panel: &PanelParams, bus: &BusParams) -> Result<Box<dyn Controller>> {
        self.build_kind(self.name, panel, bus)
    }

    pub fn build_kind(
        &self,
        kind: ControllerKind,
        panel: &PanelParams,
        bus: &BusParams,
    ) -> Result<Box<dyn Controller>> {
        self.validate()?;
        let init = self.initial_duty.min(bus.d_max);
        Ok(match kind {
            ControllerKind::Po => Box::new(PerturbObserve::new(self.po_step, init, bus.d_max)),
            ControllerKind::Inccond => Box::new(IncCond::new(
                self.inccond_step,
                self.inccond_eps,
                init,
                bus.d_max,
            )),
            ControllerKind::Hybrid => {
                let cfg = HybridConfig {
                    k: self.k,
                    voc_n: panel.voc_n,
                    kv: panel.kv,
                    t_threshold: self.t_threshold,
                    fine_step: self.fine_step,
                };
                Box::new(Hybrid::new(cfg, *bus, init)?)
            }
            ControllerKind::FracVoc => {
                Box::new(FractionalVoc::new(self.k, self.probe_interval, *bus, init)?)
            }
            ControllerKind::FracIsc => Box::new(FractionalIsc::new(
                self.kk,
                self.probe_interval,
                *panel,
                *bus,
                init,
            )?),
            ControllerKind::Fixed => {
                let duty = self.fixed_duty.ok_or_else(|| Error::Config {
                    line: None,
                    key: Some("fixed_duty".into()),
                    message: "the fixed controller needs `fixed_duty`".into(),
                })?;
                Box::new(FixedDuty::new(duty, bus)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn measurement_stream() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((0.0..80.0f64, -1.0..12.0f64, -20.0..80.0f64), 1..60)
    }

    fn all_controllers() -> Vec<Box<dyn Controller>> {
        let panel = PanelParams::reference();
        let bus = BusParams::default();
        let settings = ControllerSettings {
            fixed_duty: Some(0.4),
            ..Default::default()
        };
        ControllerKind::ALL
            .iter()
            .map(|&k| settings.build_kind(k, &panel, &bus).unwrap())
            .collect()
    }

    fn feed(c: &mut dyn Controller, stream: &[(f64, f64, f64)]) -> Vec<Result<f64>> {
        stream
            .iter()
            .enumerate()
            .map(|(n, &(v, i, t))| {
                let time = n as f64 * 0.01;
                let mut m = Measurement::new(v, i, t, time);
                m.probe = c.probe(time);
                c.step(&m)
            })
            .collect()
    }

    #[test]
    fn kind_round_trip_and_unknown_name() {
        for k in ControllerKind::ALL {
            assert_eq!(k.as_str().parse::<ControllerKind>().unwrap(), k);
        }
        let err = "mystery".parse::<ControllerKind>().unwrap_err();
        assert!(err.to_string().contains("hybrid, po, inccond, frac_voc, frac_isc"));
    }

    proptest! {
        #[test]
        fn duties_stay_in_range(stream in measurement_stream()) {
            let d_max = BusParams::default().d_max;
            for mut c in all_controllers() {
                for d in feed(c.as_mut(), &stream).into_iter().flatten() {
                    prop_assert!((0.0..=d_max).contains(&d), "{} emitted {}", c.name(), d);
                }
            }
        }

        #[test]
        fn identical_streams_identical_duties(stream in measurement_stream()) {
            for (mut a, mut b) in all_controllers().into_iter().zip(all_controllers()) {
                let da: Vec<_> = feed(a.as_mut(), &stream).into_iter().map(|r| r.ok().map(f64::to_bits)).collect();
                let db: Vec<_> = feed(b.as_mut(), &stream).into_iter().map(|r| r.ok().map(f64::to_bits)).collect();
                prop_assert_eq!(da, db);
            }
        }
    }
}
