//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's Newton solver or golden-section search.

#![allow(dead_code)]

use pvtrack::pv_model::{thermal_voltage, G_REF, T_REF};
use pvtrack::PanelParams;

pub struct OracleMpp {
    pub v: f64,
    pub i: f64,
    pub p: f64,
    pub voc: f64,
    pub isc: f64,
}

struct Coeffs {
    iph: f64,
    i0: f64,
    a: f64,
}

fn coeffs(g: f64, t: f64, p: &PanelParams) -> Coeffs {
    let a = f64::from(p.n_series) * p.ideality * thermal_voltage(t);
    let voc_t = p.voc_n + p.kv * (t - T_REF);
    let iph_ref = (p.isc_n + p.ki * (t - T_REF)).max(0.0);
    let i0 = (iph_ref - voc_t / p.r_sh) / ((voc_t / a).exp() - 1.0);
    Coeffs {
        iph: iph_ref * g / G_REF,
        i0,
        a,
    }
}

/// Current by plain bisection on the implicit diode equation.
pub fn current(v: f64, g: f64, t: f64, p: &PanelParams) -> f64 {
    let c = coeffs(g, t, p);
    let f = |i: f64| {
        let vd = v + i * p.r_s;
        c.iph - c.i0 * ((vd / c.a).exp() - 1.0) - vd / p.r_sh - i
    };
    let (mut lo, mut hi) = (-2.0 * p.isc_n, 2.0 * p.isc_n);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn voc(g: f64, t: f64, p: &PanelParams) -> f64 {
    let (mut lo, mut hi) = (0.0, 2.0 * p.voc_n);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if current(mid, g, t, p) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense scan of P(v) over [0, Voc] followed by ternary refinement.
pub fn mpp(g: f64, t: f64, p: &PanelParams) -> OracleMpp {
    let voc = voc(g, t, p);
    let n = 2000;
    let power = |v: f64| v * current(v, g, t, p);
    let step = voc / n as f64;
    let best = (0..=n)
        .max_by(|&a, &b| power(a as f64 * step).total_cmp(&power(b as f64 * step)))
        .unwrap();
    let (mut lo, mut hi) = ((best.max(1) - 1) as f64 * step, ((best + 1).min(n)) as f64 * step);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if power(m1) < power(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let v = 0.5 * (lo + hi);
    let i = current(v, g, t, p);
    OracleMpp {
        v,
        i,
        p: v * i,
        voc,
        isc: current(0.0, g, t, p),
    }
}

/// True when the sequence rises to one maximum then falls, ignoring wiggles
/// smaller than `noise`.
pub fn is_unimodal(values: &[f64], noise: f64) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d < -noise {
            falling = true;
        } else if falling && d > noise {
            return false;
        }
    }
    true
}
