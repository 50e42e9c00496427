//! Single-diode photovoltaic panel model.
//!
//! The panel is a photocurrent source in parallel with a diode and a shunt
//! resistance, feeding the terminals through a series resistance:
//!
//! ```text
//! I = I_ph - I_0 * (exp((V + I*R_s) / (N_s * n * V_t)) - 1) - (V + I*R_s) / R_sh
//! ```
//!
//! `I_ph` scales linearly with irradiance and with the short-circuit
//! temperature coefficient. `I_0` is recalibrated at every cell temperature
//! so that the open-circuit voltage at reference irradiance follows the
//! datasheet line `voc_n + kv * (t - 25)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference irradiance (W/m²).
pub const G_REF: f64 = 1000.0;
/// Reference cell temperature (°C).
pub const T_REF: f64 = 25.0;

const BOLTZMANN: f64 = 1.380_649e-23;
const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
const KELVIN_OFFSET: f64 = 273.15;

/// Residual tolerance of the implicit current solve (A).
pub const CURRENT_TOLERANCE: f64 = 1e-9;
const MAX_NEWTON_ITERATIONS: usize = 100;
/// Uniform scan resolution used to seed the MPP search.
pub const MPP_SCAN_POINTS: usize = 1000;

/// Datasheet and model constants of one panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelParams {
    /// Open-circuit voltage at reference conditions (V).
    pub voc_n: f64,
    /// Short-circuit current at reference conditions (A).
    pub isc_n: f64,
    /// Open-circuit voltage temperature coefficient (V/°C).
    pub kv: f64,
    /// Short-circuit current temperature coefficient (A/°C).
    pub ki: f64,
    /// Cells in series.
    pub n_series: u32,
    /// Diode ideality factor.
    pub ideality: f64,
    /// Series resistance (Ω).
    pub r_s: f64,
    /// Shunt resistance (Ω).
    pub r_sh: f64,
}

impl PanelParams {
    /// Synthetic 60-cell, ~180 W reference panel. Not a real datasheet.
    pub fn reference() -> Self {
        PanelParams {
            voc_n: 40.0,
            isc_n: 7.0,
            kv: -0.13,
            ki: 0.004,
            n_series: 60,
            ideality: 1.9,
            r_s: 0.6,
            r_sh: 200.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.voc_n, self.isc_n, self.kv, self.ki, self.ideality, self.r_s, self.r_sh]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("panel", "all parameters must be finite"));
        }
        if self.voc_n <= 0.0 {
            return Err(Error::invalid("voc_n", "must be > 0"));
        }
        if self.isc_n <= 0.0 {
            return Err(Error::invalid("isc_n", "must be > 0"));
        }
        if self.n_series < 1 {
            return Err(Error::invalid("n_series", "must be >= 1"));
        }
        if !(1.0..=2.0).contains(&self.ideality) {
            return Err(Error::invalid("ideality", "must lie in [1, 2]"));
        }
        if self.r_s < 0.0 {
            return Err(Error::invalid("r_s", "must be >= 0"));
        }
        if self.r_sh <= 0.0 {
            return Err(Error::invalid("r_sh", "must be > 0"));
        }
        Ok(())
    }
}

/// Irradiance and cell temperature at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSample {
    /// Irradiance (W/m²).
    pub g: f64,
    /// Cell temperature (°C).
    pub t: f64,
    /// Simulation time (s).
    pub time: f64,
}

impl EnvSample {
    pub fn new(g: f64, t: f64) -> Self {
        EnvSample { g, t, time: 0.0 }
    }

    pub fn stc() -> Self {
        EnvSample::new(G_REF, T_REF)
    }
}

/// A point on the panel's I–V curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

/// Thermal voltage `kT/q` at a cell temperature in °C.
pub fn thermal_voltage(t: f64) -> f64 {
    BOLTZMANN * (t + KELVIN_OFFSET) / ELECTRON_CHARGE
}

/// Light-generated current; negative temperature-corrected values clamp to 0.
pub fn photocurrent(env: &EnvSample, p: &PanelParams) -> f64 {
    let isc_t = (p.isc_n + p.ki * (env.t - T_REF)).max(0.0);
    isc_t * env.g / G_REF
}

/// The diode equation's coefficients resolved for one environment.
#[derive(Debug, Clone, Copy)]
pub struct DiodeCurve {
    pub i_ph: f64,
    pub i_0: f64,
    /// Modified ideality `N_s * n * V_t` (V).
    pub a: f64,
    pub r_s: f64,
    pub r_sh: f64,
}

impl DiodeCurve {
    pub fn new(env: &EnvSample, p: &PanelParams) -> Result<Self> {
        if !(env.g >= 0.0) || !env.g.is_finite() {
            return Err(Error::invalid("g", format!("irradiance must be finite and >= 0, got {}", env.g)));
        }
        if !env.t.is_finite() || env.t <= -KELVIN_OFFSET {
            return Err(Error::invalid("t", format!("temperature {} °C is not physical", env.t)));
        }
        let a = f64::from(p.n_series) * p.ideality * thermal_voltage(env.t);
        let dt = env.t - T_REF;
        let voc_t = p.voc_n + p.kv * dt;
        let i_ph_ref = photocurrent(&EnvSample::new(G_REF, env.t), p);
        let numerator = i_ph_ref - voc_t / p.r_sh;
        if voc_t <= 0.0 || numerator <= 0.0 {
            return Err(Error::invalid(
                "t",
                format!("temperature {} °C drives the panel outside its model range", env.t),
            ));
        }
        let i_0 = numerator / (voc_t / a).exp_m1();
        Ok(DiodeCurve {
            i_ph: photocurrent(env, p),
            i_0,
            a,
            r_s: p.r_s,
            r_sh: p.r_sh,
        })
    }

    fn residual(&self, v: f64, i: f64) -> (f64, f64) {
        let vd = v + i * self.r_s;
        let e = (vd / self.a).exp();
        let f = self.i_ph - self.i_0 * (e - 1.0) - vd / self.r_sh - i;
        let df = -self.i_0 * e * self.r_s / self.a - self.r_s / self.r_sh - 1.0;
        (f, df)
    }

    /// Terminal current at voltage `v`. Newton iteration kept inside a sign
    /// bracket; steps that leave the bracket fall back to bisection.
    pub fn current(&self, v: f64) -> Result<f64> {
        let scale = self.i_ph.max(self.i_0).max(1e-3);
        let mut lo = -scale;
        let mut hi = 2.0 * scale;
        // f is strictly decreasing in I: need f(lo) > 0 > f(hi).
        let mut widen = 0;
        while self.residual(v, lo).0 <= 0.0 {
            lo *= 2.0;
            widen += 1;
            if widen > 200 {
                return Err(Error::NonConvergence { voltage: v, iterations: widen });
            }
        }
        while self.residual(v, hi).0 >= 0.0 {
            hi *= 2.0;
            widen += 1;
            if widen > 200 {
                return Err(Error::NonConvergence { voltage: v, iterations: widen });
            }
        }

        let mut i = (self.i_ph - v / self.r_sh).clamp(lo, hi);
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let (f, df) = self.residual(v, i);
            if f.abs() < CURRENT_TOLERANCE {
                return Ok(i);
            }
            if f > 0.0 {
                lo = i;
            } else {
                hi = i;
            }
            let newton = i - f / df;
            i = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < f64::EPSILON * scale {
                // Bracket collapsed to machine precision; accept the midpoint.
                return Ok(i);
            }
        }
        Err(Error::NonConvergence {
            voltage: v,
            iterations: MAX_NEWTON_ITERATIONS,
        })
    }

    /// Zero-current root of the panel equation.
    pub fn open_circuit_voltage(&self) -> Result<f64> {
        if self.i_ph <= 0.0 {
            return Err(Error::NoLight);
        }
        let g = |v: f64| -> (f64, f64) {
            let e = (v / self.a).exp();
            (
                self.i_ph - self.i_0 * (e - 1.0) - v / self.r_sh,
                -self.i_0 * e / self.a - 1.0 / self.r_sh,
            )
        };
        let mut lo = 0.0;
        let mut hi = self.a * (self.i_ph / self.i_0).ln_1p();
        let mut v = hi;
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let (f, df) = g(v);
            if f.abs() < 1e-13 || hi - lo < 1e-13 {
                return Ok(v);
            }
            if f > 0.0 {
                lo = v;
            } else {
                hi = v;
            }
            let newton = v - f / df;
            v = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::NonConvergence {
            voltage: v,
            iterations: MAX_NEWTON_ITERATIONS,
        })
    }

    pub fn point(&self, v: f64) -> Result<PanelPoint> {
        let i = self.current(v)?;
        Ok(PanelPoint { v, i, p: v * i })
    }

    /// Maximum power point: uniform scan over `[0, Voc]`, then golden-section
    /// refinement between the neighbours of the best scan point.
    pub fn max_power_point(&self) -> Result<PanelPoint> {
        let voc = self.open_circuit_voltage()?;
        let n = MPP_SCAN_POINTS;
        let step = voc / (n - 1) as f64;
        let mut best = PanelPoint { v: 0.0, i: 0.0, p: f64::NEG_INFINITY };
        let mut best_idx = 0;
        for k in 0..n {
            let pt = self.point(k as f64 * step)?;
            if pt.p > best.p {
                best = pt;
                best_idx = k;
            }
        }

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut a = best_idx.saturating_sub(1) as f64 * step;
        let mut b = ((best_idx + 1).min(n - 1)) as f64 * step;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut pc = self.point(c)?.p;
        let mut pd = self.point(d)?.p;
        while b - a > 1e-10 {
            if pc > pd {
                b = d;
                d = c;
                pd = pc;
                c = b - inv_phi * (b - a);
                pc = self.point(c)?.p;
            } else {
                a = c;
                c = d;
                pc = pd;
                d = a + inv_phi * (b - a);
                pd = self.point(d)?.p;
            }
        }
        let refined = self.point(0.5 * (a + b))?;
        Ok(if refined.p >= best.p { refined } else { best })
    }
}

/// Terminal current at voltage `v`.
pub fn panel_current(v: f64, env: &EnvSample, p: &PanelParams) -> Result<f64> {
    DiodeCurve::new(env, p)?.current(v)
}

/// Open-circuit voltage; `NoLight` when the panel is dark.
pub fn open_circuit_voltage(env: &EnvSample, p: &PanelParams) -> Result<f64> {
    if env.g == 0.0 {
        return Err(Error::NoLight);
    }
    DiodeCurve::new(env, p)?.open_circuit_voltage()
}

pub fn short_circuit_current(env: &EnvSample, p: &PanelParams) -> Result<f64> {
    panel_current(0.0, env, p)
}

/// Ground-truth maximum power point of the panel in `env`.
pub fn true_mpp(env: &EnvSample, p: &PanelParams) -> Result<PanelPoint> {
    if env.g == 0.0 {
        return Err(Error::NoLight);
    }
    DiodeCurve::new(env, p)?.max_power_point()
}
