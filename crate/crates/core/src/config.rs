//! Scenario configuration and its flat `key = value` text form.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::RadioParams;
use crate::error::{Error, Result};
use crate::layout::HeterogeneityConfig;
use crate::protocol::ProtocolKind;

/// How the lifetime estimate `R` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum RMode {
    /// `R = E_total / E_round`, with `E_round` measured on a discarded
    /// dry run of round 0.
    Measured,
    /// Use this `R` directly.
    Fixed(f64),
    /// `R = E_total / E_round` for the given per-round consumption.
    Analytic(f64),
}

impl fmt::Display for RMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RMode::Measured => f.write_str("measured"),
            RMode::Fixed(r) => write!(f, "fixed:{r}"),
            RMode::Analytic(e) => write!(f, "analytic:{e}"),
        }
    }
}

impl FromStr for RMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (mode, arg) = match s.split_once(':') {
            Some((m, a)) => (m.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |a: Option<&str>| -> std::result::Result<f64, String> {
            let a = a.ok_or_else(|| format!("`{mode}` needs a value, e.g. `{mode}:2500`"))?;
            let v: f64 = a.parse().map_err(|_| format!("malformed number `{a}`"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{v} must be positive"))
            }
        };
        match mode {
            "measured" if arg.is_none() => Ok(RMode::Measured),
            "fixed" => number(arg).map(RMode::Fixed),
            "analytic" => number(arg).map(RMode::Analytic),
            _ => Err(format!("unknown mode `{s}` (expected measured, fixed:R or analytic:E)")),
        }
    }
}

/// Population over which the average-energy estimate is taken for
/// Ad-LEACH elections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyScope {
    /// Whole-network initial energy and node count.
    Global,
    /// The static cluster's own initial energy and node count.
    Cluster,
}

impl FromStr for EnergyScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "global" => Ok(EnergyScope::Global),
            "cluster" => Ok(EnergyScope::Cluster),
            other => Err(format!("unknown scope `{other}` (expected global or cluster)")),
        }
    }
}

impl fmt::Display for EnergyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyScope::Global => "global",
            EnergyScope::Cluster => "cluster",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub field_w: f64,
    pub field_h: f64,
    pub q: usize,
    pub m: f64,
    pub a: f64,
    pub e0: f64,
    pub p_opt: f64,
    pub radio: RadioParams,
    /// Size of advertisement and join-request messages.
    pub control_bits: u64,
    pub max_rounds: u64,
    pub seed: u64,
    pub r_mode: RMode,
    pub e_avg_scope: EnergyScope,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolKind::AdLeach,
            n: 100,
            field_w: 100.0,
            field_h: 50.0,
            q: 4,
            m: 0.1,
            a: 0.0,
            e0: 0.5,
            p_opt: 0.1,
            radio: RadioParams::default(),
            control_bits: 200,
            max_rounds: 20_000,
            seed: 1,
            r_mode: RMode::Measured,
            e_avg_scope: EnergyScope::Global,
        }
    }
}

/// Every key accepted in a config file, in serialization order.
pub const KEYS: &[&str] = &[
    "protocol",
    "nodes",
    "field_w",
    "field_h",
    "clusters",
    "m",
    "a",
    "e0",
    "p_opt",
    "e_elec",
    "eps_fs",
    "eps_mp",
    "e_da",
    "packet_bits",
    "control_bits",
    "max_rounds",
    "seed",
    "r_mode",
    "e_avg_scope",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("malformed number `{value}`")))
}

impl ScenarioConfig {
    pub fn heterogeneity(&self) -> HeterogeneityConfig {
        HeterogeneityConfig {
            m: self.m,
            a: self.a,
            e0: self.e0,
        }
    }

    /// Assigns one key. Values are checked for syntax only; call
    /// [`ScenarioConfig::validate`] once all keys are set.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "protocol" => self.protocol = value.parse()?,
            "nodes" | "n" => self.n = num(key, value)?,
            "field_w" => self.field_w = num(key, value)?,
            "field_h" => self.field_h = num(key, value)?,
            "clusters" | "q" => self.q = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "a" => self.a = num(key, value)?,
            "e0" => self.e0 = num(key, value)?,
            "p_opt" => self.p_opt = num(key, value)?,
            "e_elec" => self.radio.e_elec = num(key, value)?,
            "eps_fs" => self.radio.eps_fs = num(key, value)?,
            "eps_mp" => self.radio.eps_mp = num(key, value)?,
            "e_da" => self.radio.e_da = num(key, value)?,
            "packet_bits" => self.radio.packet_bits = num(key, value)?,
            "control_bits" => self.control_bits = num(key, value)?,
            "max_rounds" => self.max_rounds = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "r_mode" => self.r_mode = value.parse().map_err(|e| Error::config(key, e))?,
            "e_avg_scope" => self.e_avg_scope = value.parse().map_err(|e| Error::config(key, e))?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`. Blank lines and
    /// `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let with_line = |e: Error| match e {
                Error::InvalidConfig { key, reason, .. } => Error::InvalidConfig {
                    key,
                    line: Some(idx + 1),
                    reason,
                },
                other => other,
            };
            let (key, value) = line.split_once('=').ok_or_else(|| {
                with_line(Error::config(line, "expected `key = value`"))
            })?;
            self.set(key.trim(), value).map_err(with_line)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("nodes", "need at least one node"));
        }
        for (key, v) in [("field_w", self.field_w), ("field_h", self.field_h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be positive")));
            }
        }
        if self.q == 0 {
            return Err(Error::config("clusters", "need at least one cluster"));
        }
        self.heterogeneity().validate()?;
        if !(self.p_opt > 0.0 && self.p_opt <= 1.0) {
            return Err(Error::config("p_opt", format!("{} is outside (0, 1]", self.p_opt)));
        }
        self.radio.validate()?;
        Ok(())
    }

    /// Flat text form accepted by [`parse_config`].
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let r = &self.radio;
        let rows: [(&str, String); 19] = [
            ("protocol", self.protocol.to_string()),
            ("nodes", self.n.to_string()),
            ("field_w", self.field_w.to_string()),
            ("field_h", self.field_h.to_string()),
            ("clusters", self.q.to_string()),
            ("m", self.m.to_string()),
            ("a", self.a.to_string()),
            ("e0", self.e0.to_string()),
            ("p_opt", self.p_opt.to_string()),
            ("e_elec", r.e_elec.to_string()),
            ("eps_fs", r.eps_fs.to_string()),
            ("eps_mp", r.eps_mp.to_string()),
            ("e_da", r.e_da.to_string()),
            ("packet_bits", r.packet_bits.to_string()),
            ("control_bits", self.control_bits.to_string()),
            ("max_rounds", self.max_rounds.to_string()),
            ("seed", self.seed.to_string()),
            ("r_mode", self.r_mode.to_string()),
            ("e_avg_scope", self.e_avg_scope.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Builds a validated config from defaults, an optional file body and
/// then `overrides` (later entries win).
pub fn parse_config<K, V>(text: Option<&str>, overrides: &[(K, V)]) -> Result<ScenarioConfig>
where
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut config = ScenarioConfig::default();
    if let Some(text) = text {
        config.apply_text(text)?;
    }
    for (k, v) in overrides {
        config.set(k.as_ref(), v.as_ref())?;
    }
    config.validate()?;
    Ok(config)
}
