//! Perturb and observe.

use super::{Controller, ControllerState, Measurement};
use crate::error::Result;

/// One hill-climbing step: keep the perturbation direction while power does
/// not fall, reverse it when it does. Ties keep the previous direction.
pub fn po_step(state: &mut ControllerState, m: &Measurement, step: f64) -> f64 {
    if m.p_pv < state.last_power {
        state.perturb_dir = state.perturb_dir.reversed();
    }
    state.last_power = m.p_pv;
    state.last_v = m.v_pv;
    state.last_i = m.i_pv;
    state.initialized = true;
    let next = state.last_duty + state.perturb_dir.sign() * step;
    state.set_duty(next)
}

#[derive(Debug, Clone)]
pub struct PerturbObserve {
    state: ControllerState,
    step: f64,
}

impl PerturbObserve {
    pub fn new(step: f64, initial_duty: f64, d_max: f64) -> Self {
        PerturbObserve {
            state: ControllerState::new(initial_duty, d_max),
            step,
        }
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }
}

impl Controller for PerturbObserve {
    fn name(&self) -> &'static str {
        "po"
    }

    fn duty(&self) -> f64 {
        self.state.last_duty
    }

    fn step(&mut self, m: &Measurement) -> Result<f64> {
        Ok(po_step(&mut self.state, m, self.step))
    }
}
