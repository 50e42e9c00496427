//! Averaged ideal boost converter between the panel and a fixed-voltage bus.
//!
//! In steady state the bus sees `v_l = v_pv / (1 - duty)`, so the duty cycle
//! pins the panel voltage at `(1 - duty) * v_l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pv_model::{DiodeCurve, EnvSample, PanelParams};

pub const DEFAULT_D_MAX: f64 = 0.95;

fn default_d_max() -> f64 {
    DEFAULT_D_MAX
}

fn default_efficiency() -> f64 {
    1.0
}

/// Battery/bus side of the converter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusParams {
    /// Bus voltage (V).
    pub v_l: f64,
    /// Largest admissible duty; keeps clear of the `1/(1-D)` pole.
    #[serde(default = "default_d_max")]
    pub d_max: f64,
    /// Converter efficiency applied to bus-side power.
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

impl Default for BusParams {
    fn default() -> Self {
        BusParams {
            v_l: 60.0,
            d_max: DEFAULT_D_MAX,
            efficiency: 1.0,
        }
    }
}

impl BusParams {
    pub fn new(v_l: f64) -> Self {
        BusParams {
            v_l,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_l > 0.0) || !self.v_l.is_finite() {
            return Err(Error::invalid("v_l", "must be finite and > 0"));
        }
        if !(0.0..1.0).contains(&self.d_max) {
            return Err(Error::invalid("d_max", "must lie in [0, 1)"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }

    fn check_duty(&self, duty: f64) -> Result<()> {
        if (0.0..=self.d_max).contains(&duty) {
            Ok(())
        } else {
            Err(Error::DutyOutOfRange {
                duty,
                d_max: self.d_max,
            })
        }
    }

    pub fn clamp_duty(&self, duty: f64) -> f64 {
        duty.clamp(0.0, self.d_max)
    }
}

/// Converter state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub duty: f64,
    pub v_pv: f64,
    pub i_pv: f64,
    pub p_pv: f64,
}

impl OperatingPoint {
    /// Power delivered to the bus.
    pub fn bus_power(&self, bus: &BusParams) -> f64 {
        self.p_pv * bus.efficiency
    }

    /// Bus-side current implied by power balance.
    pub fn bus_current(&self, bus: &BusParams) -> f64 {
        self.bus_power(bus) / bus.v_l
    }
}

pub fn panel_voltage_for_duty(duty: f64, bus: &BusParams) -> Result<f64> {
    bus.check_duty(duty)?;
    Ok((1.0 - duty) * bus.v_l)
}

/// Duty that places the panel at `v_target`, clamped to `[0, d_max]`.
pub fn duty_for_target_voltage(v_target: f64, bus: &BusParams) -> Result<f64> {
    if v_target > bus.v_l {
        return Err(Error::TargetAboveBus {
            target: v_target,
            bus: bus.v_l,
        });
    }
    if !(v_target > 0.0) {
        return Err(Error::invalid("v_target", format!("must be > 0, got {v_target}")));
    }
    Ok(bus.clamp_duty(1.0 - v_target / bus.v_l))
}

pub fn solve_operating_point(
    duty: f64,
    env: &EnvSample,
    panel: &PanelParams,
    bus: &BusParams,
) -> Result<OperatingPoint> {
    let curve = DiodeCurve::new(env, panel)?;
    operating_point_on(&curve, duty, bus)
}

/// Same as [`solve_operating_point`] with the diode curve already resolved.
pub fn operating_point_on(curve: &DiodeCurve, duty: f64, bus: &BusParams) -> Result<OperatingPoint> {
    let v_pv = panel_voltage_for_duty(duty, bus)?;
    // No reverse conduction: above Voc (or in the dark) the panel sources nothing.
    let i_pv = curve.current(v_pv)?.max(0.0);
    Ok(OperatingPoint {
        duty,
        v_pv,
        i_pv,
        p_pv: v_pv * i_pv,
    })
}
