use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{content_lines, parse_field, ParseError};
use crate::graph::{PowerRating, DEFAULT_REFERENCE_BANDWIDTH};
use crate::types::LinkId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Gospf,
    /// Plain OSPF with every link powered.
    Baseline,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Gospf => "gospf",
            Mode::Baseline => "baseline",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gospf" => Ok(Mode::Gospf),
            "baseline" => Ok(Mode::Baseline),
            other => Err(format!("unknown mode '{other}' (expected gospf|baseline)")),
        }
    }
}

/// A scheduled physical link failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFailure {
    pub link: LinkId,
    pub at: f64,
}

/// Simulation parameters. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub mode: Mode,
    /// Power figures for links that do not carry their own.
    pub power: PowerRating,
    pub gamma_u: f64,
    pub gamma_l: f64,
    pub t_sample: f64,
    /// `None` means ten sample windows.
    pub safeguard_interval: Option<f64>,
    pub mcst_reset_timer: f64,
    pub control_latency: f64,
    /// `None` means whole days of 1440 s covering the last traffic breakpoint.
    pub horizon: Option<f64>,
    pub reference_bandwidth: u64,
    pub ctrl_msg_bytes: u64,
    /// Capacity fraction usable in the network design model; ignored by the simulation.
    pub alpha: f64,
    pub tcp_burst_fraction: f64,
    pub failures: Vec<LinkFailure>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: Mode::Gospf,
            power: PowerRating::default(),
            gamma_u: 0.8,
            gamma_l: 0.2,
            t_sample: 0.2,
            safeguard_interval: None,
            mcst_reset_timer: 5.0,
            control_latency: 0.001,
            horizon: None,
            reference_bandwidth: DEFAULT_REFERENCE_BANDWIDTH,
            ctrl_msg_bytes: 64,
            alpha: 0.8,
            tcp_burst_fraction: 0.01,
            failures: Vec::new(),
        }
    }
}

pub const DAY_LENGTH: f64 = 1440.0;

impl EngineConfig {
    pub fn safeguard(&self) -> f64 {
        self.safeguard_interval.unwrap_or(10.0 * self.t_sample)
    }

    /// Checks value ranges. Link references are checked when the scenario is assembled.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("t_sample", self.t_sample),
            ("safeguard_interval", self.safeguard()),
            ("mcst_reset_timer", self.mcst_reset_timer),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.control_latency >= 0.0 && self.control_latency.is_finite()) {
            return Err(format!("control_latency must be >= 0, got {}", self.control_latency));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(format!("horizon must be positive, got {h}"));
            }
        }
        if !(0.0 <= self.gamma_l && self.gamma_l < self.gamma_u && self.gamma_u <= 1.0) {
            return Err(format!(
                "thresholds must satisfy 0 <= gamma_l < gamma_u <= 1 (gamma_l={}, gamma_u={})",
                self.gamma_l, self.gamma_u
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(format!("alpha must be in (0, 1], got {}", self.alpha));
        }
        let p = &self.power;
        if [p.p_active, p.p_idle, p.p_sleep, p.e_c].iter().any(|v| !(*v >= 0.0)) {
            return Err("power figures must be non-negative".into());
        }
        if self.reference_bandwidth == 0 {
            return Err("reference_bandwidth must be positive".into());
        }
        if !(self.tcp_burst_fraction >= 0.0) {
            return Err("tcp_burst_fraction must be >= 0".into());
        }
        for f in &self.failures {
            if !(f.at >= 0.0 && f.at.is_finite()) {
                return Err(format!("failure time of link {} must be >= 0", f.link));
            }
        }
        Ok(())
    }
}

/// Parses `key=value` lines. `fail_link=<link>@<seconds>` may repeat. Value ranges are checked
/// by [`EngineConfig::validate`].
pub fn parse_config(text: &str) -> Result<EngineConfig, ParseError> {
    let mut cfg = EngineConfig::default();
    for (line, content) in content_lines(text) {
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ParseError::new(line, "expected `key=value`"))?;
        let float = |what| parse_field::<f64>(line, what, value);
        match key {
            "mode" => cfg.mode = value.parse().map_err(|e: String| ParseError::new(line, e))?,
            "p_active" => cfg.power.p_active = float(key)?,
            "p_idle" => cfg.power.p_idle = float(key)?,
            "p_sleep" => cfg.power.p_sleep = float(key)?,
            "e_c" => cfg.power.e_c = float(key)?,
            "gamma_u" => cfg.gamma_u = float(key)?,
            "gamma_l" => cfg.gamma_l = float(key)?,
            "t_sample" => cfg.t_sample = float(key)?,
            "safeguard_interval" => cfg.safeguard_interval = Some(float(key)?),
            "mcst_reset_timer" => cfg.mcst_reset_timer = float(key)?,
            "control_latency" => cfg.control_latency = float(key)?,
            "horizon" => cfg.horizon = Some(float(key)?),
            "reference_bandwidth" => cfg.reference_bandwidth = parse_field(line, key, value)?,
            "ctrl_msg_bytes" => cfg.ctrl_msg_bytes = parse_field(line, key, value)?,
            "alpha" => cfg.alpha = float(key)?,
            "tcp_burst_fraction" => cfg.tcp_burst_fraction = float(key)?,
            "fail_link" => {
                let (link, at) = value
                    .split_once('@')
                    .ok_or_else(|| ParseError::new(line, "expected `fail_link=<link>@<seconds>`"))?;
                cfg.failures.push(LinkFailure {
                    link: LinkId(parse_field(line, "link id", link.trim())?),
                    at: parse_field(line, "failure time", at.trim())?,
                });
            }
            other => return Err(ParseError::new(line, format!("unknown config key '{other}'"))),
        }
    }
    Ok(cfg)
}

/// Writes every setting in the format read by [`parse_config`].
pub fn write_config(cfg: &EngineConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: &dyn fmt::Display| writeln!(out, "{k}={v}").unwrap();
    kv("mode", &cfg.mode);
    kv("p_active", &cfg.power.p_active);
    kv("p_idle", &cfg.power.p_idle);
    kv("p_sleep", &cfg.power.p_sleep);
    kv("e_c", &cfg.power.e_c);
    kv("gamma_u", &cfg.gamma_u);
    kv("gamma_l", &cfg.gamma_l);
    kv("t_sample", &cfg.t_sample);
    if let Some(s) = cfg.safeguard_interval {
        kv("safeguard_interval", &s);
    }
    kv("mcst_reset_timer", &cfg.mcst_reset_timer);
    kv("control_latency", &cfg.control_latency);
    if let Some(h) = cfg.horizon {
        kv("horizon", &h);
    }
    kv("reference_bandwidth", &cfg.reference_bandwidth);
    kv("ctrl_msg_bytes", &cfg.ctrl_msg_bytes);
    kv("alpha", &cfg.alpha);
    kv("tcp_burst_fraction", &cfg.tcp_burst_fraction);
    for f in &cfg.failures {
        kv("fail_link", &format_args!("{}@{}", f.link, f.at));
    }
    out
}
