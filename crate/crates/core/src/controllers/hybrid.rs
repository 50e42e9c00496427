//! Two-loop tracker: an operating-point calculation loop seeded from the
//! temperature-corrected open-circuit voltage, and a fine-adjustment loop
//! that hill-climbs on measured power.
//!
//! Loop selection depends only on temperature. When the cell temperature has
//! moved more than `t_threshold` since the last calculation (or on the very
//! first call) the duty is recomputed as `duty_for(k * voc(t))`; otherwise a
//! perturb-and-observe step of `fine_step` is taken.

use super::po::po_step;
use super::{estimate_vmpp_fractional_voc, Controller, ControllerState, Measurement, Mode};
use crate::error::{Error, Result};
use crate::power_stage::{duty_for_target_voltage, BusParams};
use crate::pv_model::T_REF;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    /// Fractional open-circuit constant.
    pub k: f64,
    /// Open-circuit voltage at reference conditions (V).
    pub voc_n: f64,
    /// Open-circuit voltage temperature coefficient (V/°C).
    pub kv: f64,
    /// Temperature change that triggers a recalculation (°C).
    pub t_threshold: f64,
    /// Duty increment of the fine loop.
    pub fine_step: f64,
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(Error::InvalidK(self.k));
        }
        if !(self.t_threshold > 0.0) {
            return Err(Error::invalid("t_threshold", "must be > 0"));
        }
        if !(self.fine_step > 0.0 && self.fine_step <= 0.1) {
            return Err(Error::invalid("fine_step", "must lie in (0, 0.1]"));
        }
        if !(self.voc_n > 0.0) {
            return Err(Error::invalid("voc_n", "must be > 0"));
        }
        Ok(())
    }

    /// Non-fatal configuration concerns.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.7..=0.8).contains(&self.k) {
            out.push(format!("k = {} is outside the usual 0.7..0.8 range", self.k));
        }
        out
    }
}

/// Datasheet open-circuit voltage shifted linearly by the temperature coefficient.
pub fn temperature_corrected_voc(t: f64, cfg: &HybridConfig) -> f64 {
    cfg.voc_n + cfg.kv * (t - T_REF)
}

pub fn hybrid_step(
    state: &mut ControllerState,
    m: &Measurement,
    cfg: &HybridConfig,
    bus: &BusParams,
) -> Result<f64> {
    let recalc = !state.initialized || (m.t - state.last_temp).abs() > cfg.t_threshold;
    if recalc {
        let voc_t = temperature_corrected_voc(m.t, cfg);
        let v_est = estimate_vmpp_fractional_voc(voc_t, cfg.k)?;
        let duty = duty_for_target_voltage(v_est, bus)?;
        state.mode = Some(Mode::Calc);
        state.last_temp = m.t;
        state.last_power = m.p_pv;
        state.last_v = m.v_pv;
        state.last_i = m.i_pv;
        state.initialized = true;
        Ok(state.set_duty(duty))
    } else {
        state.mode = Some(Mode::Fine);
        Ok(po_step(state, m, cfg.fine_step))
    }
}

#[derive(Debug, Clone)]
pub struct Hybrid {
    state: ControllerState,
    cfg: HybridConfig,
    bus: BusParams,
}

impl Hybrid {
    pub fn new(cfg: HybridConfig, bus: BusParams, initial_duty: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(Hybrid {
            state: ControllerState::new(initial_duty, bus.d_max),
            cfg,
            bus,
        })
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }
}

impl Controller for Hybrid {
    fn name(&self) -> &'static str {
        "hybrid"
    }

    fn duty(&self) -> f64 {
        self.state.last_duty
    }

    fn mode(&self) -> Option<Mode> {
        self.state.mode
    }

    fn step(&mut self, m: &Measurement) -> Result<f64> {
        hybrid_step(&mut self.state, m, &self.cfg, &self.bus)
    }
}
