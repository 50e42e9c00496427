//! Post-hoc trace and waveform analysis.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sim::Trace;

/// Default settling band as a fraction of ideal power.
pub const DEFAULT_SETTLING_BAND: f64 = 0.02;
/// Default harmonic count for THD.
pub const DEFAULT_HARMONICS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryMetrics {
    pub tracking_efficiency: f64,
    /// Steps to settle after each disturbance; `None` if it never settles.
    pub settling_steps: Vec<(f64, Option<usize>)>,
    /// Peak-to-peak power over the final quarter of the trace (W).
    pub steady_ripple: f64,
    pub mean_power: f64,
}

/// Harvested energy over the energy an ideal tracker would have harvested.
pub fn tracking_efficiency(trace: &Trace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if let Some(index) = trace.records.iter().position(|r| !(r.p_ideal > 0.0)) {
        return Err(Error::ZeroIdeal { index });
    }
    let harvested: f64 = trace.records.iter().map(|r| r.p_pv * trace.dt).sum();
    let ideal: f64 = trace.records.iter().map(|r| r.p_ideal * trace.dt).sum();
    Ok((harvested / ideal).clamp(0.0, 1.0))
}

/// Steps after `disturbance_time` until `p_pv >= (1 - band) * p_ideal` holds
/// for the rest of the trace.
pub fn settling_steps(trace: &Trace, disturbance_time: f64, band: f64) -> Result<usize> {
    let recs = &trace.records;
    let last_time = recs.last().ok_or(Error::EmptyTrace)?.time;
    if disturbance_time < recs[0].time || disturbance_time > last_time {
        return Err(Error::OutOfRange {
            time: disturbance_time,
        });
    }
    let start = recs.partition_point(|r| r.time < disturbance_time - 1e-9 * trace.dt);
    let outside = |r: &crate::sim::TraceRecord| r.p_pv < (1.0 - band) * r.p_ideal;
    match recs[start..].iter().rposition(outside) {
        None => Ok(0),
        Some(j) if start + j + 1 == recs.len() => Err(Error::NotSettled),
        Some(j) => Ok(j + 1),
    }
}

pub fn steady_ripple(trace: &Trace) -> f64 {
    let n = trace.len();
    let tail = &trace.records[n - n / 4..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.p_pv), hi.max(r.p_pv)));
    if tail.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn summarize(trace: &Trace, disturbances: &[f64], band: f64) -> Result<SummaryMetrics> {
    let tracking_efficiency = tracking_efficiency(trace)?;
    let settling_steps = disturbances
        .iter()
        .map(|&t| match settling_steps(trace, t, band) {
            Ok(s) => Ok((t, Some(s))),
            Err(Error::NotSettled) => Ok((t, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_power = trace.records.iter().map(|r| r.p_pv).sum::<f64>() / trace.len() as f64;
    Ok(SummaryMetrics {
        tracking_efficiency,
        settling_steps,
        steady_ripple: steady_ripple(trace),
        mean_power,
    })
}

/// Uniformly sampled real waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSamples {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub fundamental: f64,
}

impl WaveformSamples {
    pub fn new(samples: Vec<f64>, sample_rate: f64, fundamental: f64) -> Self {
        WaveformSamples {
            samples,
            sample_rate,
            fundamental,
        }
    }

    fn samples_per_period(&self) -> f64 {
        self.sample_rate / self.fundamental
    }

    /// Amplitude of the `h`-th harmonic over the first `n` samples.
    fn harmonic_amplitude(&self, h: usize, n: usize) -> f64 {
        let w = 2.0 * PI * h as f64 * self.fundamental / self.sample_rate;
        let (re, im) = self.samples[..n]
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &x)| {
                let phase = w * k as f64;
                (re + x * phase.cos(), im - x * phase.sin())
            });
        2.0 * (re * re + im * im).sqrt() / n as f64
    }
}

/// Total harmonic distortion (%) from harmonics `2..=n_harmonics`, evaluated
/// over the largest whole number of fundamental periods in the record.
pub fn thd(w: &WaveformSamples, n_harmonics: usize) -> Result<f64> {
    if n_harmonics < 2 {
        return Err(Error::invalid("n_harmonics", "must be >= 2"));
    }
    if !(w.sample_rate > 0.0 && w.fundamental > 0.0) {
        return Err(Error::invalid("sample_rate", "sample rate and fundamental must be > 0"));
    }
    if w.sample_rate <= 2.0 * w.fundamental * n_harmonics as f64 {
        return Err(Error::InsufficientSamples(format!(
            "sample rate {} Hz does not resolve harmonic {} of {} Hz",
            w.sample_rate, n_harmonics, w.fundamental
        )));
    }
    let spp = w.samples_per_period();
    let periods = (w.samples.len() as f64 / spp + 1e-9).floor();
    if periods < 2.0 {
        return Err(Error::InsufficientSamples(format!(
            "{} samples cover fewer than two fundamental periods",
            w.samples.len()
        )));
    }
    let n = ((periods * spp).round() as usize).min(w.samples.len());

    let rms = (w.samples[..n].iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let a1 = w.harmonic_amplitude(1, n);
    if rms == 0.0 || a1 < 1e-12 * rms {
        return Err(Error::ZeroFundamental);
    }
    let harmonic_power: f64 = (2..=n_harmonics)
        .map(|h| w.harmonic_amplitude(h, n).powi(2))
        .sum();
    Ok(harmonic_power.sqrt() / a1 * 100.0)
}
