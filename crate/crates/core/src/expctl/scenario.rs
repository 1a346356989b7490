//! Scenario files: flat `key = value` lines with `#` comments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::defense::DefenseMode;
use crate::metrics::FprGranularity;
use crate::rpl::message::Mop;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// No attacker, no defense.
    Rpl,
    UnderAttack,
    LiMsd,
    SecRpl,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Rpl, Variant::UnderAttack, Variant::LiMsd, Variant::SecRpl];

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Rpl => "rpl",
            Variant::UnderAttack => "underattack",
            Variant::LiMsd => "limsd",
            Variant::SecRpl => "secrpl",
        }
    }

    pub fn defense(&self) -> DefenseMode {
        match self {
            Variant::Rpl | Variant::UnderAttack => DefenseMode::None,
            Variant::LiMsd => DefenseMode::LiMsd,
            Variant::SecRpl => DefenseMode::SecRpl,
        }
    }

    pub fn attacked(&self) -> bool {
        *self != Variant::Rpl
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rpl" | "none" => Ok(Variant::Rpl),
            "underattack" | "under_attack" | "attack" => Ok(Variant::UnderAttack),
            "limsd" | "li-msd" => Ok(Variant::LiMsd),
            "secrpl" => Ok(Variant::SecRpl),
            o => Err(format!("unknown variant '{o}'")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub arena: f64,
    /// Legitimate non-root nodes.
    pub clients: usize,
    pub servers: usize,
    pub attackers: usize,
    pub mobility: bool,
    pub speed_min: f64,
    pub speed_max: f64,
    pub replay_interval: f64,
    pub attack_start: f64,
    pub defense: DefenseMode,
    pub beta: u32,
    pub activate_at: f64,
    pub reinit_period: f64,
    pub secrpl_threshold: u32,
    pub node_max: usize,
    pub tx_range: f64,
    pub interference_range: f64,
    pub rx_success: f64,
    pub data_interval: f64,
    pub data_size: usize,
    pub duration: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub mop: Mop,
    /// Receiver wake-up period of the link layer, seconds.
    pub wakeup_interval: f64,
    pub queue_capacity: usize,
    pub replay_intervals: Vec<f64>,
    pub mobility_modes: Vec<bool>,
    pub variants: Vec<Variant>,
    pub fpr_granularity: FprGranularity,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            arena: 150.0,
            clients: 15,
            servers: 1,
            attackers: 4,
            mobility: false,
            speed_min: 1.0,
            speed_max: 2.0,
            replay_interval: 1.0,
            attack_start: 90.0,
            defense: DefenseMode::None,
            beta: 10,
            activate_at: 120.0,
            reinit_period: 1800.0,
            secrpl_threshold: 10,
            node_max: 32,
            tx_range: 50.0,
            interference_range: 100.0,
            rx_success: 1.0,
            data_interval: 60.0,
            data_size: 30,
            duration: 1800.0,
            replications: 10,
            base_seed: 1,
            mop: Mop::Storing,
            wakeup_interval: 0.125,
            queue_capacity: 8,
            replay_intervals: vec![1.0, 2.0, 4.0, 8.0],
            mobility_modes: vec![false, true],
            variants: Variant::ALL.to_vec(),
            fpr_granularity: FprGranularity::Node,
        }
    }
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("'{v}' is not a valid number"))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" | "mobile" => Ok(true),
        "false" | "off" | "no" | "0" | "static" => Ok(false),
        _ => Err(format!("'{v}' is not a boolean")),
    }
}

fn list<T, F: Fn(&str) -> Result<T, String>>(v: &str, f: F) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, String> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

/// Parses `"1s"`, `"1.5"` or `"8 s"` as seconds.
pub fn seconds(v: &str) -> Result<f64, String> {
    num(v.trim().trim_end_matches('s').trim())
}

impl Scenario {
    pub fn nodes(&self) -> usize {
        self.servers + self.clients + self.attackers
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "arena" => self.arena = num(v)?,
            "clients" => self.clients = num(v)?,
            "servers" => self.servers = num(v)?,
            "attackers" => self.attackers = num(v)?,
            "mobility" => self.mobility = boolean(v)?,
            "speed_min" => self.speed_min = num(v)?,
            "speed_max" => self.speed_max = num(v)?,
            "replay_interval" => self.replay_interval = seconds(v)?,
            "attack_start" => self.attack_start = seconds(v)?,
            "defense" => self.defense = v.parse()?,
            "beta" => self.beta = num(v)?,
            "activate_at" => self.activate_at = seconds(v)?,
            "reinit_period" => self.reinit_period = seconds(v)?,
            "secrpl_threshold" => self.secrpl_threshold = num(v)?,
            "node_max" => self.node_max = num(v)?,
            "tx_range" => self.tx_range = num(v)?,
            "interference_range" => self.interference_range = num(v)?,
            "rx_success" => self.rx_success = num(v)?,
            "data_interval" => self.data_interval = seconds(v)?,
            "data_size" => self.data_size = num(v)?,
            "duration" => self.duration = seconds(v)?,
            "replications" => self.replications = num(v)?,
            "base_seed" => self.base_seed = num(v)?,
            "mop" => self.mop = Mop::from_value(num(v)?).ok_or_else(|| format!("mop '{v}' not in 0..=3"))?,
            "wakeup_interval" => self.wakeup_interval = seconds(v)?,
            "queue_capacity" => self.queue_capacity = num(v)?,
            "replay_intervals" => self.replay_intervals = list(v, seconds)?,
            "mobility_modes" => self.mobility_modes = list(v, boolean)?,
            "variants" => self.variants = list(v, |s| s.parse())?,
            "fpr_granularity" => {
                self.fpr_granularity = match v.to_ascii_lowercase().as_str() {
                    "node" => FprGranularity::Node,
                    "event" => FprGranularity::Event,
                    _ => return Err(format!("fpr_granularity '{v}' is not node or event")),
                }
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut s = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| ScenarioError::Parse { line, msg: format!("expected 'key = value', got '{content}'") })?;
            s.set(k.trim(), v.trim()).map_err(|msg| ScenarioError::Parse { line, msg })?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Scenario::parse(&text)
    }

    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.servers != 1 {
            return bad(format!("exactly one server is supported, got {}", self.servers));
        }
        if self.attackers > self.clients {
            return bad(format!("attackers ({}) exceed clients ({})", self.attackers, self.clients));
        }
        if !(self.arena > 0.0) {
            return bad("arena must be positive".into());
        }
        if !(self.tx_range > 0.0 && self.tx_range <= self.interference_range) {
            return bad("need 0 < tx_range <= interference_range".into());
        }
        if !(0.0..=1.0).contains(&self.rx_success) {
            return bad("rx_success must lie in [0, 1]".into());
        }
        if !(self.speed_min > 0.0 && self.speed_min <= self.speed_max) {
            return bad("need 0 < speed_min <= speed_max".into());
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive".into());
        }
        if self.attack_start >= self.duration {
            return bad("attack_start must precede the end of the run".into());
        }
        for &r in self.replay_intervals.iter().chain(std::iter::once(&self.replay_interval)) {
            if !(r > 0.0) {
                return bad(format!("replay interval {r} must be positive"));
            }
        }
        if self.beta < 1 || self.secrpl_threshold < 1 {
            return bad("beta and secrpl_threshold must be at least 1".into());
        }
        if !(self.activate_at >= 0.0) || !(self.reinit_period > 0.0) {
            return bad("need activate_at >= 0 and reinit_period > 0".into());
        }
        if !(self.data_interval > 0.0) {
            return bad("data_interval must be positive".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(self.wakeup_interval >= 0.0) || self.queue_capacity == 0 || self.node_max == 0 {
            return bad("need wakeup_interval >= 0, queue_capacity >= 1 and node_max >= 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let s = Scenario::parse("").unwrap();
        assert_eq!((s.clients, s.servers, s.attackers), (15, 1, 4));
        assert_eq!((s.arena, s.duration, s.data_interval), (150.0, 1800.0, 60.0));
        assert_eq!(s.nodes(), 20);
    }

    #[test]
    fn off_grid_replay_interval_is_accepted() {
        let s = Scenario::parse("replay_interval = 3\n").unwrap();
        assert_eq!(s.replay_interval, 3.0);
    }

    #[test]
    fn too_many_attackers_is_rejected() {
        assert!(matches!(Scenario::parse("attackers = 20"), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Scenario::parse("# comment\nbeta = 10\nfoo = 1\n").unwrap_err();
        assert_eq!(e, ScenarioError::Parse { line: 3, msg: "unknown key 'foo'".into() });
        let e = Scenario::parse("\n\nbeta = ten").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 3, .. }));
        let e = Scenario::parse("beta").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 1, .. }));
    }

    #[test]
    fn lists_and_units() {
        let s = Scenario::parse("replay_intervals = 1s, 2s\nvariants = rpl, limsd\nmobility_modes = static\nmop = 1 # ns")
            .unwrap();
        assert_eq!(s.replay_intervals, vec![1.0, 2.0]);
        assert_eq!(s.variants, vec![Variant::Rpl, Variant::LiMsd]);
        assert_eq!(s.mobility_modes, vec![false]);
        assert_eq!(s.mop, Mop::NonStoring);
    }
}
