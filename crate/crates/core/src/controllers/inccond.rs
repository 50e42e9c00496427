//! Incremental conductance.
//!
//! At the maximum power point `dP/dV = 0`, i.e. `dI/dV = -I/V`. Raising the
//! duty lowers the panel voltage.

use super::{Controller, ControllerState, Measurement};
use crate::error::Result;

pub fn inc_cond_step(state: &mut ControllerState, m: &Measurement, step: f64, eps: f64) -> f64 {
    let dv = m.v_pv - state.last_v;
    let di = m.i_pv - state.last_i;
    let duty = state.last_duty;

    // +1: raise the panel voltage, -1: lower it, 0: hold.
    let voltage_move = if m.v_pv <= 0.0 {
        1.0
    } else if dv == 0.0 {
        if di == 0.0 {
            0.0
        } else if di > 0.0 {
            1.0
        } else {
            -1.0
        }
    } else {
        let g = di / dv + m.i_pv / m.v_pv;
        if g.abs() <= eps {
            0.0
        } else if g > 0.0 {
            1.0
        } else {
            -1.0
        }
    };

    state.last_v = m.v_pv;
    state.last_i = m.i_pv;
    state.last_power = m.p_pv;
    state.initialized = true;
    state.set_duty(duty - voltage_move * step)
}

#[derive(Debug, Clone)]
pub struct IncCond {
    state: ControllerState,
    step: f64,
    eps: f64,
}

impl IncCond {
    pub fn new(step: f64, eps: f64, initial_duty: f64, d_max: f64) -> Self {
        IncCond {
            state: ControllerState::new(initial_duty, d_max),
            step,
            eps,
        }
    }
}

impl Controller for IncCond {
    fn name(&self) -> &'static str {
        "inccond"
    }

    fn duty(&self) -> f64 {
        self.state.last_duty
    }

    fn step(&mut self, m: &Measurement) -> Result<f64> {
        Ok(inc_cond_step(&mut self.state, m, self.step, self.eps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(duty: f64, v: f64, i: f64) -> ControllerState {
        let mut s = ControllerState::new(duty, 0.95);
        s.last_v = v;
        s.last_i = i;
        s
    }

    #[test]
    fn holds_at_mpp_condition() {
        // dI/dV = -0.2, I/V = 0.2
        let mut s = state(0.5, 29.0, 6.2);
        let d = inc_cond_step(&mut s, &Measurement::new(30.0, 6.0, 25.0, 0.0), 0.01, 1e-9);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn holds_without_new_information() {
        let mut s = state(0.5, 30.0, 6.0);
        let d = inc_cond_step(&mut s, &Measurement::new(30.0, 6.0, 25.0, 0.0), 0.01, 1e-9);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn left_of_mpp_raises_voltage() {
        // dI/dV = -0.01, I/V = 0.25 -> slope positive, move right (duty down).
        let mut s = state(0.5, 23.0, 6.01);
        let d = inc_cond_step(&mut s, &Measurement::new(24.0, 6.0, 25.0, 0.0), 0.01, 1e-3);
        assert!((d - 0.49).abs() < 1e-12);
    }

    #[test]
    fn right_of_mpp_lowers_voltage() {
        let mut s = state(0.4, 35.0, 3.0);
        let d = inc_cond_step(&mut s, &Measurement::new(36.0, 2.0, 25.0, 0.0), 0.01, 1e-3);
        assert!((d - 0.41).abs() < 1e-12);
    }

    #[test]
    fn constant_voltage_uses_current_sign() {
        let mut s = state(0.4, 30.0, 5.0);
        let d = inc_cond_step(&mut s, &Measurement::new(30.0, 5.5, 25.0, 0.0), 0.01, 1e-3);
        assert!((d - 0.39).abs() < 1e-12);
        let mut s = state(0.4, 30.0, 5.0);
        let d = inc_cond_step(&mut s, &Measurement::new(30.0, 4.5, 25.0, 0.0), 0.01, 1e-3);
        assert!((d - 0.41).abs() < 1e-12);
    }
}
