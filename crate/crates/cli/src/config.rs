//! Sectioned `key = value` configuration.
//!
//! ```text
//! [source]
//! type = wcp        # wcp, pdc or ideal
//! mu = 0.3
//! ```
//!
//! Unknown sections and keys are errors, reported with their line number.

use crate::CliError;
use nsm_core::scan::{PointSpec, SourceFamily};
use nsm_core::security::Regime;
use std::path::Path;
use std::str::FromStr;

/// Which protocol chain `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Wsee,
    Decoy,
    Frot,
    Ot,
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wsee" => Ok(Pipeline::Wsee),
            "decoy" => Ok(Pipeline::Decoy),
            "frot" => Ok(Pipeline::Frot),
            "ot" => Ok(Pipeline::Ot),
            other => Err(format!("unknown pipeline '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeChoice {
    /// Hamming codes sized for the honest error rate.
    Auto,
    Trivial,
    Golay,
}

impl FromStr for CodeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(CodeChoice::Auto),
            "trivial" => Ok(CodeChoice::Trivial),
            "golay" => Ok(CodeChoice::Golay),
            other => Err(format!("unknown code '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSettings {
    pub pipeline: Pipeline,
    /// Valid rounds per run; total rounds for the decoy pipeline.
    pub rounds: u64,
    pub runs: u64,
    pub beta: usize,
    pub ell: usize,
    pub code: CodeChoice,
    /// Bob's choice bit for the OT pipeline; random when absent.
    pub choice: Option<bool>,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        Self { pipeline: Pipeline::Wsee, rounds: 10_000, runs: 1, beta: 16, ell: 16, code: CodeChoice::Auto, choice: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub point: PointSpec,
    /// Trade-off parameter of the OT length.
    pub omega: f64,
    /// Error of the underlying string erasure, added twice to the OT error.
    pub eps_wsee: f64,
    pub protocol: ProtocolSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self { point: PointSpec::default(), omega: 2.0, eps_wsee: 0.0, protocol: ProtocolSettings::default() }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config { line, msg: format!("cannot parse '{value}' for {key}") })
}

fn parse_with<T, E: ToString>(line: usize, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config { line, msg: e.to_string() })
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !["source", "detector", "storage", "security", "protocol"].contains(&name) {
                    return Err(CliError::Config { line, msg: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config { line, msg: format!("expected 'key = value', got '{content}'") });
            };
            let Some(sec) = section.as_deref() else {
                return Err(CliError::Config { line, msg: "assignment before any [section]".into() });
            };
            cfg.assign(line, sec, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies a `section.key=value` override; errors report line 0.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let bad = || CliError::Config { line: 0, msg: format!("--set expects section.key=value, got '{assignment}'") };
        let (path, value) = assignment.split_once('=').ok_or_else(bad)?;
        let (sec, key) = path.trim().split_once('.').ok_or_else(bad)?;
        self.assign(0, sec, key, value.trim())
    }

    fn assign(&mut self, line: usize, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        let p = &mut self.point;
        match (section, key) {
            ("source", "type") => p.family = parse_with(line, value.parse::<SourceFamily>())?,
            ("source", "mu") => p.mu = parse(line, key, value)?,
            ("source", "mu_hat") => p.mu_hat = Some(parse(line, key, value)?),
            ("source", "n_max") => p.n_max = parse(line, key, value)?,
            ("detector", "eta") => p.eta = parse(line, key, value)?,
            ("detector", "p_dark") => p.p_dark = parse(line, key, value)?,
            ("detector", "e_det") => p.e_det = parse(line, key, value)?,
            ("storage", "d") => p.d = parse(line, key, value)?,
            ("storage", "r") => p.r = parse(line, key, value)?,
            ("storage", "nu") => p.nu = parse(line, key, value)?,
            ("security", "delta") => p.delta = parse(line, key, value)?,
            ("security", "M") => p.m = parse::<f64>(line, key, value)? as u64,
            ("security", "eps_interval") => p.eps_interval = parse(line, key, value)?,
            ("security", "regime") => p.regime = parse_with(line, value.parse::<Regime>())?,
            ("security", "omega") => self.omega = parse(line, key, value)?,
            ("security", "eps_wsee") => self.eps_wsee = parse(line, key, value)?,
            ("protocol", "pipeline") => self.protocol.pipeline = parse_with(line, value.parse())?,
            ("protocol", "rounds") => self.protocol.rounds = parse::<f64>(line, key, value)? as u64,
            ("protocol", "runs") => self.protocol.runs = parse(line, key, value)?,
            ("protocol", "beta") => self.protocol.beta = parse(line, key, value)?,
            ("protocol", "ell") => self.protocol.ell = parse(line, key, value)?,
            ("protocol", "code") => self.protocol.code = parse_with(line, value.parse())?,
            ("protocol", "choice") => self.protocol.choice = Some(parse::<u8>(line, key, value)? == 1),
            _ => return Err(CliError::Config { line, msg: format!("unknown key '{key}' in [{section}]") }),
        }
        Ok(())
    }
}
