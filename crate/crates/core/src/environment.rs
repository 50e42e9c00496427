//! Irradiance/temperature profiles and scenario files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controllers::ControllerSettings;
use crate::error::{Error, Result};
use crate::power_stage::BusParams;
use crate::pv_model::{EnvSample, PanelParams};

/// Upper bound on `duration / dt`.
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    Step,
    Ramp,
    Piecewise,
}

/// How a piecewise segment evolves towards the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Hold,
    Linear,
}

/// Breakpoint `(start_time, g, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment(pub f64, pub f64, pub f64);

impl Segment {
    pub fn start(&self) -> f64 {
        self.0
    }
}

fn default_hold() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub kind: ProfileKind,
    pub segments: Vec<Segment>,
    /// Per-segment rule, piecewise profiles only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interp: Vec<Interp>,
    /// Hold the last breakpoint past the end of the profile.
    #[serde(default = "default_hold")]
    pub hold: bool,
}

impl Profile {
    pub fn constant(g: f64, t: f64) -> Self {
        Profile {
            kind: ProfileKind::Constant,
            segments: vec![Segment(0.0, g, t)],
            interp: Vec::new(),
            hold: true,
        }
    }

    pub fn step(segments: Vec<Segment>) -> Self {
        Profile {
            kind: ProfileKind::Step,
            segments,
            interp: Vec::new(),
            hold: true,
        }
    }

    pub fn ramp(segments: Vec<Segment>) -> Self {
        Profile {
            kind: ProfileKind::Ramp,
            segments,
            interp: Vec::new(),
            hold: true,
        }
    }

    pub fn piecewise(segments: Vec<Segment>, interp: Vec<Interp>) -> Self {
        Profile {
            kind: ProfileKind::Piecewise,
            segments,
            interp,
            hold: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::invalid("segments", "profile needs at least one segment"));
        }
        if self.kind == ProfileKind::Constant && self.segments.len() != 1 {
            return Err(Error::invalid("segments", "constant profile takes exactly one segment"));
        }
        for s in &self.segments {
            if !(s.0.is_finite() && s.1.is_finite() && s.2.is_finite()) {
                return Err(Error::invalid("segments", "values must be finite"));
            }
            if s.1 < 0.0 {
                return Err(Error::invalid("segments", format!("negative irradiance {}", s.1)));
            }
        }
        if self.segments.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("segments", "start times must be strictly increasing"));
        }
        if self.kind == ProfileKind::Piecewise && self.interp.len() != self.segments.len() {
            return Err(Error::invalid("interp", "piecewise profile needs one rule per segment"));
        }
        Ok(())
    }

    /// Times at which a step/piecewise profile changes discontinuously.
    pub fn disturbance_times(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Step => self.segments.iter().skip(1).map(|s| s.0).collect(),
            ProfileKind::Piecewise => self
                .segments
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(n, _)| self.interp[n - 1] == Interp::Hold)
                .map(|(_, s)| s.0)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Environment at `time`. Step boundaries are left-closed: the new value
    /// applies from the boundary instant onwards.
    pub fn sample(&self, time: f64) -> Result<EnvSample> {
        let at = |g: f64, t: f64| Ok(EnvSample { g, t, time });
        let segs = &self.segments;
        let first = segs.first().ok_or(Error::OutOfRange { time })?;
        if self.kind == ProfileKind::Constant {
            return at(first.1, first.2);
        }
        if time < first.0 {
            return Err(Error::OutOfRange { time });
        }
        // Last breakpoint whose start is <= time.
        let idx = segs.partition_point(|s| s.0 <= time) - 1;
        let cur = segs[idx];
        let Some(next) = segs.get(idx + 1) else {
            return if self.hold || time == cur.0 {
                at(cur.1, cur.2)
            } else {
                Err(Error::OutOfRange { time })
            };
        };
        let linear = match self.kind {
            ProfileKind::Step | ProfileKind::Constant => false,
            ProfileKind::Ramp => true,
            ProfileKind::Piecewise => self.interp[idx] == Interp::Linear,
        };
        if !linear {
            return at(cur.1, cur.2);
        }
        let frac = (time - cur.0) / (next.0 - cur.0);
        at(cur.1 + frac * (next.1 - cur.1), cur.2 + frac * (next.2 - cur.2))
    }
}

fn default_duration() -> f64 {
    5.0
}
fn default_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    /// Simulated time (s).
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Control and simulation period (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            duration: default_duration(),
            dt: default_dt(),
        }
    }
}

impl SimSettings {
    pub fn steps(&self) -> usize {
        // Tolerate representation error so 0.1 / 0.01 gives 10, not 11.
        let ratio = self.duration / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() < 1e-9 * rounded.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be finite and > 0"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if self.duration / self.dt > MAX_STEPS {
            return Err(Error::invalid("dt", "duration/dt exceeds 1e7 steps"));
        }
        Ok(())
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "PanelParams::reference")]
    pub panel: PanelParams,
    #[serde(default)]
    pub bus: BusParams,
    pub profile: Profile,
    #[serde(default)]
    pub controller: ControllerSettings,
    #[serde(default)]
    pub sim: SimSettings,
}

impl Scenario {
    pub fn new(profile: Profile) -> Self {
        Scenario {
            panel: PanelParams::reference(),
            bus: BusParams::default(),
            profile,
            controller: ControllerSettings::default(),
            sim: SimSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.panel.validate()?;
        self.bus.validate()?;
        self.profile.validate()?;
        self.controller.validate()?;
        self.sim.validate()
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(src).map_err(|e| config_error(src, &e))?;
        scenario.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config {
                line: find_key_line(src, name),
                key: Some(name.to_string()),
                message: reason,
            },
            Error::InvalidK(k) => Error::Config {
                line: None,
                key: Some("k".into()),
                message: format!("fractional constant {k} must lie in (0, 1)"),
            },
            other => other,
        })?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Short content hash identifying the scenario.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn stc_constant() -> Self {
        Scenario::new(Profile::constant(1000.0, 25.0))
    }

    /// 1000 → 600 W/m² at mid-run.
    pub fn irradiance_step() -> Self {
        Scenario::new(Profile::step(vec![
            Segment(0.0, 1000.0, 25.0),
            Segment(2.5, 600.0, 25.0),
        ]))
    }

    /// 25 → 45 °C at mid-run.
    pub fn temperature_step() -> Self {
        Scenario::new(Profile::step(vec![
            Segment(0.0, 1000.0, 25.0),
            Segment(2.5, 1000.0, 45.0),
        ]))
    }

    /// Irradiance and temperature ramping together over the run.
    pub fn combined_ramp() -> Self {
        Scenario::new(Profile::ramp(vec![
            Segment(0.0, 400.0, 20.0),
            Segment(5.0, 1000.0, 40.0),
        ]))
    }

    pub fn canonical() -> Vec<(&'static str, Scenario)> {
        vec![
            ("stc", Self::stc_constant()),
            ("irradiance_step", Self::irradiance_step()),
            ("temperature_step", Self::temperature_step()),
            ("combined_ramp", Self::combined_ramp()),
        ]
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn find_key_line(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        l.split('=')
            .next()
            .is_some_and(|lhs| lhs.trim() == key && l.contains('='))
    })
    .map(|n| n + 1)
}

fn config_error(src: &str, e: &toml::de::Error) -> Error {
    let (line, key) = match e.span() {
        Some(span) => {
            let text = src.get(span.clone()).unwrap_or("").trim();
            let key = text
                .split(['=', '\n'])
                .next()
                .map(|k| k.trim().trim_matches('"').to_string())
                .filter(|k| !k.is_empty() && !k.starts_with('['));
            (Some(line_of(src, span.start)), key)
        }
        None => (None, None),
    };
    Error::Config {
        line,
        key,
        message: e.message().trim().to_string(),
    }
}
