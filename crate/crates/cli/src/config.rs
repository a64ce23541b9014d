use std::fmt;
use std::path::{Path, PathBuf};

use fockwit::states::{cplx, StateSpec};
use fockwit::C64;
use serde::{Deserialize, Serialize};

/// Invalid or inconsistent run configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn pair() -> [usize; 2] {
    [0, 1]
}

fn is_pair(m: &[usize; 2]) -> bool {
    *m == [0, 1]
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmpMethod {
    /// Closed-form moments of every order.
    #[default]
    Moments,
    /// Master-equation integration on the truncated density matrix.
    Lindblad,
}

/// One device application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "device", rename_all = "snake_case", deny_unknown_fields)]
pub enum Device {
    /// `t = cos(theta) e^{i phi_t}`, `r = sin(theta) e^{i phi_r}`.
    BeamSplitter {
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
        theta: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        phi_t: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        phi_r: f64,
    },
    /// `c = cosh r`, `s = sinh r e^{i theta}`.
    Squeezer {
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
        r: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        theta: f64,
    },
    PhaseShift {
        mode: usize,
        phi: f64,
    },
    Displacement {
        mode: usize,
        #[serde(with = "cplx")]
        alpha: C64,
    },
    /// Two-mode gain/loss channel; must be the last step.
    Amplifier {
        gain_a: f64,
        loss_a: f64,
        gain_b: f64,
        loss_b: f64,
        t: f64,
        #[serde(default)]
        method: AmpMethod,
        /// Lindblad only: uniform cutoff to embed the input into.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
    },
}

impl Device {
    pub fn name(&self) -> &'static str {
        match self {
            Device::BeamSplitter { .. } => "beam_splitter",
            Device::Squeezer { .. } => "squeezer",
            Device::PhaseShift { .. } => "phase_shift",
            Device::Displacement { .. } => "displacement",
            Device::Amplifier { .. } => "amplifier",
        }
    }

    fn modes(&self) -> Vec<usize> {
        match self {
            Device::BeamSplitter { modes, .. } | Device::Squeezer { modes, .. } => modes.to_vec(),
            Device::PhaseShift { mode, .. } | Device::Displacement { mode, .. } => vec![*mode],
            Device::Amplifier { .. } => vec![0, 1],
        }
    }
}

/// One requested witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessSpec {
    HzProduct {
        m: usize,
        n: usize,
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
    },
    HzSum {
        m: usize,
        n: usize,
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
    },
    HzCentral {
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
    },
    /// Fixed `xi`, or minimized over `xi` when absent.
    DuanSimon {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xi: Option<f64>,
        #[serde(default = "pair", skip_serializing_if = "is_pair")]
        modes: [usize; 2],
    },
    Tripartite {
        #[serde(default = "triple", skip_serializing_if = "is_triple")]
        order: [usize; 3],
    },
}

fn triple() -> [usize; 3] {
    [0, 1, 2]
}

fn is_triple(o: &[usize; 3]) -> bool {
    *o == [0, 1, 2]
}

/// A scanned parameter: a dotted path into the configuration, e.g. `states.0.alpha`
/// or `pipeline.1.t`, swept over `steps` evenly spaced values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ScanAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// One cutoff for every mode, or one per mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cutoffs: Vec<usize>,
    /// Margin tolerance for verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.cutoffs.is_empty() && self.tolerance.is_none()
    }
}

impl OutputConfig {
    pub fn is_empty(&self) -> bool {
        self.format.is_none() && self.path.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Product-state factors, in mode order.
    pub states: Vec<StateSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pipeline: Vec<Device>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scan: Vec<ScanAxis>,
    /// Sample times for `evolve`; defaults to the amplifier's own `t`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub truncation: Overrides,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    pub fn modes(&self) -> usize {
        self.states.iter().map(|s| s.modes()).sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.states.is_empty() {
            return Err(bad("no states given"));
        }
        let modes = self.modes();
        for (i, d) in self.pipeline.iter().enumerate() {
            let used = d.modes();
            if let Some(&m) = used.iter().find(|&&m| m >= modes) {
                return Err(bad(format!("pipeline step {i} ({}) uses mode {m} of {modes}", d.name())));
            }
            if used.len() == 2 && used[0] == used[1] {
                return Err(bad(format!("pipeline step {i} ({}) needs two distinct modes", d.name())));
            }
            if let Device::Amplifier { .. } = d {
                if modes != 2 {
                    return Err(bad(format!("the amplifier acts on two-mode states, got {modes} modes")));
                }
                if i + 1 != self.pipeline.len() {
                    return Err(bad("the amplifier must be the last pipeline step"));
                }
            }
        }
        for w in &self.witnesses {
            match w {
                WitnessSpec::HzProduct { modes: p, .. }
                | WitnessSpec::HzSum { modes: p, .. }
                | WitnessSpec::HzCentral { modes: p }
                | WitnessSpec::DuanSimon { modes: p, .. } => {
                    if p[0] == p[1] || p.iter().any(|&m| m >= modes) {
                        return Err(bad(format!("witness modes {p:?} invalid for {modes} modes")));
                    }
                }
                WitnessSpec::Tripartite { order } => {
                    if modes != 3 {
                        return Err(bad(format!("tripartite witness needs 3 modes, got {modes}")));
                    }
                    let mut o = order.to_vec();
                    o.sort_unstable();
                    if o != [0, 1, 2] {
                        return Err(bad(format!("{order:?} is not a permutation of 0, 1, 2")));
                    }
                }
            }
            if let WitnessSpec::DuanSimon { xi: Some(x), .. } = w {
                if *x == 0.0 || !x.is_finite() {
                    return Err(bad("duan_simon xi must be finite and nonzero"));
                }
            }
        }
        if self.scan.len() > 2 {
            return Err(bad(format!("at most two scan axes, got {}", self.scan.len())));
        }
        for axis in &self.scan {
            if axis.steps == 0 {
                return Err(bad(format!("scan axis `{}` has zero steps", axis.param)));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return Err(bad(format!("scan axis `{}` has a non-finite range", axis.param)));
            }
            self.with_param(&axis.param, axis.start)?;
        }
        let c = &self.truncation.cutoffs;
        if !(c.is_empty() || c.len() == 1 || c.len() == modes) {
            return Err(bad(format!("{} cutoffs given for {modes} modes", c.len())));
        }
        if let Some(t) = self.truncation.tolerance {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(bad(format!("tolerance must be a non-negative number, got {t}")));
            }
        }
        Ok(())
    }

    /// Copy with the numeric field at `path` set to `value`. A complex field
    /// addressed as a whole becomes real; address `.0` or `.1` for one part.
    pub fn with_param(&self, path: &str, value: f64) -> Result<RunConfig, ConfigError> {
        let mut root = toml::Value::try_from(self).map_err(|e| bad(e.to_string()))?;
        let mut slot = &mut root;
        for key in path.split('.') {
            slot = match slot {
                toml::Value::Table(t) => t.get_mut(key),
                toml::Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| bad(format!("scan parameter `{path}` does not name a field")))?;
        }
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Array(a) if a.len() == 2 && a.iter().all(|v| v.is_float()) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(bad(format!("`{path}` takes non-negative integers, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            _ => return Err(bad(format!("scan parameter `{path}` is not numeric"))),
        };
        let out: RunConfig = root.try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BS: &str = r#"
states = [{ family = "number", n = 3 }, { family = "vacuum" }]

[[pipeline]]
device = "beam_splitter"
theta = 0.7853981633974483

[[witnesses]]
kind = "hz_product"
m = 1
n = 1

[[scan]]
param = "pipeline.0.theta"
start = 0.0
stop = 1.5
steps = 4
"#;

    #[test]
    fn parses_and_defaults_modes() {
        let cfg = RunConfig::parse(BS).unwrap();
        assert_eq!(cfg.modes(), 2);
        assert!(matches!(cfg.pipeline[0], Device::BeamSplitter { modes: [0, 1], phi_t, .. } if phi_t == 0.0));
    }

    #[test]
    fn with_param_sets_nested_fields() {
        let cfg = RunConfig::parse(BS).unwrap();
        let moved = cfg.with_param("pipeline.0.theta", 0.3).unwrap();
        assert!(matches!(moved.pipeline[0], Device::BeamSplitter { theta, .. } if theta == 0.3));
        let n = cfg.with_param("states.0.n", 5.0).unwrap();
        assert_eq!(n.states[0], StateSpec::Number { n: 5 });
        assert!(cfg.with_param("states.0.n", 1.5).is_err());
        assert!(cfg.with_param("states.4.n", 1.0).is_err());
        assert!(cfg.with_param("states.0.family", 1.0).is_err());
    }

    #[test]
    fn rejects_bad_modes() {
        let text = BS.replace("theta = 0.78", "modes = [0, 2]\ntheta = 0.78");
        assert!(RunConfig::parse(&text).is_err());
        let text = BS.replace("m = 1\nn = 1", "m = 1\nn = 1\nmodes = [1, 1]");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn axis_values_are_inclusive() {
        let a = ScanAxis { param: "x".into(), start: 0.0, stop: 1.0, steps: 5 };
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
