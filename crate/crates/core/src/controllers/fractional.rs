//! Offline fractional estimators.
//!
//! Both controllers periodically disconnect the panel (one step of zero
//! production), sample Voc or Isc, and hold the derived duty until the next
//! probe.

use super::{Controller, ControllerState, Measurement, Mode, ProbeKind};
use crate::error::{Error, Result};
use crate::power_stage::{duty_for_target_voltage, BusParams};
use crate::pv_model::{DiodeCurve, EnvSample, PanelParams, G_REF};

fn check_fraction(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidK(k))
    }
}

/// `V_mpp ≈ k * V_oc`.
pub fn estimate_vmpp_fractional_voc(voc: f64, k: f64) -> Result<f64> {
    check_fraction(k)?;
    Ok(k * voc)
}

/// `I_mpp ≈ K * I_sc`.
pub fn estimate_impp_fractional_isc(isc: f64, kk: f64) -> Result<f64> {
    check_fraction(kk)?;
    Ok(kk * isc)
}

pub fn fractional_voc_controller_step(
    state: &mut ControllerState,
    m: &Measurement,
    k: f64,
    bus: &BusParams,
) -> Result<f64> {
    state.initialized = true;
    if m.probe != Some(ProbeKind::OpenCircuit) {
        state.mode = Some(Mode::Hold);
        return Ok(state.last_duty);
    }
    let voc = m.v_pv;
    if !(voc > 0.0) {
        return Err(Error::NoLight);
    }
    let v_est = estimate_vmpp_fractional_voc(voc, k)?;
    state.mode = Some(Mode::Calc);
    let duty = duty_for_target_voltage(v_est, bus)?;
    Ok(state.set_duty(duty))
}

/// Maps the measured short-circuit current to a duty. The irradiance is
/// inferred from Isc at the measured temperature, then the duty giving
/// `kk * Isc` on that model curve is found by bisection (current rises
/// monotonically with duty).
pub fn fractional_isc_controller_step(
    state: &mut ControllerState,
    m: &Measurement,
    kk: f64,
    panel: &PanelParams,
    bus: &BusParams,
) -> Result<f64> {
    state.initialized = true;
    if m.probe != Some(ProbeKind::ShortCircuit) {
        state.mode = Some(Mode::Hold);
        return Ok(state.last_duty);
    }
    let isc = m.i_pv;
    if !(isc > 0.0) {
        return Err(Error::NoLight);
    }
    let target = estimate_impp_fractional_isc(isc, kk)?;

    let isc_ref = DiodeCurve::new(&EnvSample::new(G_REF, m.t), panel)?.current(0.0)?;
    let g_est = G_REF * isc / isc_ref;
    let curve = DiodeCurve::new(&EnvSample::new(g_est, m.t), panel)?;
    let current_at = |d: f64| -> Result<f64> { Ok(curve.current((1.0 - d) * bus.v_l)?.max(0.0)) };

    let (mut lo, mut hi) = (0.0, bus.d_max);
    let duty = if current_at(lo)? >= target {
        lo
    } else if current_at(hi)? <= target {
        hi
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if current_at(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    state.mode = Some(Mode::Calc);
    Ok(state.set_duty(duty))
}

#[derive(Debug, Clone)]
struct ProbeSchedule {
    interval: f64,
    taken: u64,
}

impl ProbeSchedule {
    fn due(&mut self, time: f64) -> bool {
        let next = self.taken as f64 * self.interval;
        if time + 1e-9 * self.interval >= next {
            // Skip any probe instants that fell between steps.
            self.taken = ((time + 1e-9 * self.interval) / self.interval).floor() as u64 + 1;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone)]
pub struct FractionalVoc {
    state: ControllerState,
    k: f64,
    bus: BusParams,
    schedule: ProbeSchedule,
}

impl FractionalVoc {
    pub fn new(k: f64, probe_interval: f64, bus: BusParams, initial_duty: f64) -> Result<Self> {
        check_fraction(k)?;
        Ok(FractionalVoc {
            state: ControllerState::new(initial_duty, bus.d_max),
            k,
            bus,
            schedule: ProbeSchedule {
                interval: probe_interval,
                taken: 0,
            },
        })
    }
}

impl Controller for FractionalVoc {
    fn name(&self) -> &'static str {
        "frac_voc"
    }

    fn duty(&self) -> f64 {
        self.state.last_duty
    }

    fn mode(&self) -> Option<Mode> {
        self.state.mode
    }

    fn probe(&mut self, time: f64) -> Option<ProbeKind> {
        self.schedule.due(time).then_some(ProbeKind::OpenCircuit)
    }

    fn step(&mut self, m: &Measurement) -> Result<f64> {
        fractional_voc_controller_step(&mut self.state, m, self.k, &self.bus)
    }
}

#[derive(Debug, Clone)]
pub struct FractionalIsc {
    state: ControllerState,
    kk: f64,
    panel: PanelParams,
    bus: BusParams,
    schedule: ProbeSchedule,
}

impl FractionalIsc {
    pub fn new(
        kk: f64,
        probe_interval: f64,
        panel: PanelParams,
        bus: BusParams,
        initial_duty: f64,
    ) -> Result<Self> {
        check_fraction(kk)?;
        Ok(FractionalIsc {
            state: ControllerState::new(initial_duty, bus.d_max),
            kk,
            panel,
            bus,
            schedule: ProbeSchedule {
                interval: probe_interval,
                taken: 0,
            },
        })
    }
}

impl Controller for FractionalIsc {
    fn name(&self) -> &'static str {
        "frac_isc"
    }

    fn duty(&self) -> f64 {
        self.state.last_duty
    }

    fn mode(&self) -> Option<Mode> {
        self.state.mode
    }

    fn probe(&mut self, time: f64) -> Option<ProbeKind> {
        self.schedule.due(time).then_some(ProbeKind::ShortCircuit)
    }

    fn step(&mut self, m: &Measurement) -> Result<f64> {
        fractional_isc_controller_step(&mut self.state, m, self.kk, &self.panel, &self.bus)
    }
}
