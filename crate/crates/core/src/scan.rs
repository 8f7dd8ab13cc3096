//! Feasibility scans over two physical parameters.

use crate::error::{Error, Result};
use crate::security::{decoy_tau, lambda_rate, Regime, SecurityConfig};
use crate::sources::{characterize, DetectorModel, SourceModel, DEFAULT_N_MAX};
use crate::storage::DepolarizingStorage;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFamily {
    Wcp,
    Pdc,
    Ideal,
}

impl FromStr for SourceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wcp" => Ok(Self::Wcp),
            "pdc" => Ok(Self::Pdc),
            "ideal" => Ok(Self::Ideal),
            other => Err(Error::domain(format!("unknown source type '{other}'"))),
        }
    }
}

/// Every input of a security evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub family: SourceFamily,
    pub mu: f64,
    pub n_max: usize,
    pub eta: f64,
    pub p_dark: f64,
    pub e_det: f64,
    pub d: u32,
    pub r: f64,
    pub nu: f64,
    pub delta: f64,
    pub m: u64,
    pub eps_interval: f64,
    pub regime: Regime,
    /// Weak decoy intensity; `None` runs without decoy states.
    pub mu_hat: Option<f64>,
}

impl Default for PointSpec {
    fn default() -> Self {
        Self {
            family: SourceFamily::Wcp,
            mu: 0.3,
            n_max: DEFAULT_N_MAX,
            eta: 0.7,
            p_dark: 0.85e-6,
            e_det: 0.033,
            d: 2,
            r: 0.5,
            nu: 1.0,
            delta: 0.01,
            m: 1_000_000,
            eps_interval: 1e-6,
            regime: Regime::Asymptotic,
            mu_hat: None,
        }
    }
}

impl PointSpec {
    pub fn source(&self) -> Result<SourceModel> {
        let s = match self.family {
            SourceFamily::Wcp => SourceModel::wcp(self.mu)?,
            SourceFamily::Pdc => SourceModel::pdc(self.mu)?,
            SourceFamily::Ideal => SourceModel::ideal(),
        };
        s.with_n_max(self.n_max)
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.eta, self.p_dark, self.e_det)
    }

    pub fn storage(&self) -> Result<DepolarizingStorage> {
        DepolarizingStorage::new(self.d, self.r, self.nu)
    }

    pub fn security(&self) -> Result<SecurityConfig> {
        SecurityConfig::new(self.delta, self.m, self.eps_interval, self.regime)
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Mu => self.mu,
            Param::Eta => self.eta,
            Param::PDark => self.p_dark,
            Param::EDet => self.e_det,
            Param::R => self.r,
            Param::Nu => self.nu,
            Param::Delta => self.delta,
            Param::M => self.m as f64,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Mu => self.mu = v,
            Param::Eta => self.eta = v,
            Param::PDark => self.p_dark = v,
            Param::EDet => self.e_det = v,
            Param::R => self.r = v,
            Param::Nu => self.nu = v,
            Param::Delta => self.delta = v,
            Param::M => self.m = v.round() as u64,
        }
    }
}

/// A parameter that can serve as a scan axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Mu,
    Eta,
    PDark,
    EDet,
    R,
    Nu,
    Delta,
    M,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Mu => "mu",
            Param::Eta => "eta",
            Param::PDark => "p_dark",
            Param::EDet => "e_det",
            Param::R => "r",
            Param::Nu => "nu",
            Param::Delta => "delta",
            Param::M => "M",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mu" => Param::Mu,
            "eta" => Param::Eta,
            "p_dark" => Param::PDark,
            "e_det" => Param::EDet,
            "r" => Param::R,
            "nu" => Param::Nu,
            "delta" => Param::Delta,
            "M" | "m" => Param::M,
            other => return Err(Error::domain(format!("unknown scan parameter '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::domain(format!("axis {param} needs at least one step")));
        }
        if !(lo <= hi) {
            return Err(Error::domain(format!("axis {param}: lower end {lo} above upper end {hi}")));
        }
        Ok(Self { param, lo, hi, steps })
    }

    /// `steps` evenly spaced values including both ends; a single step
    /// gives the lower end.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub cond1: bool,
    pub cond2: bool,
    pub lambda: Option<f64>,
    pub eps: f64,
}

impl PointResult {
    pub fn secure(&self) -> bool {
        self.cond1 && self.cond2 && self.lambda.is_some_and(|l| l > 0.0)
    }
}

/// Evaluates the conditions, the min-entropy rate and the error at one point.
///
/// With decoy states in the finite regime, each setting is assumed to be
/// used for `M` rounds.
pub fn evaluate_point(spec: &PointSpec) -> Result<PointResult> {
    let det = spec.detector()?;
    let src = spec.source()?;
    let ch = characterize(&src, &det)?;
    let storage = spec.storage()?;
    let cfg = spec.security()?;
    let decoy = match spec.mu_hat {
        Some(mu_hat) => {
            let dch = characterize(&SourceModel::wcp(mu_hat)?.with_n_max(spec.n_max)?, &det)?;
            let counts = (spec.regime == Regime::Finite).then_some([spec.m; 3]);
            Some(decoy_tau(&ch, &dch, counts, spec.eps_interval)?)
        }
        None => None,
    };
    let report = match lambda_rate(&ch, &storage, &cfg, decoy.as_ref()) {
        Ok(r) => r,
        // No single-photon rounds survive the finite-size correction.
        Err(Error::Constraint(_)) => {
            return Ok(PointResult { cond1: false, cond2: false, lambda: None, eps: 1.0 });
        }
        Err(e) => return Err(e),
    };
    Ok(PointResult { cond1: report.cond1, cond2: report.cond2, lambda: report.lambda, eps: report.eps })
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub x: f64,
    pub y: f64,
    pub result: PointResult,
}

/// Evaluates `base` over the grid `a x b`, in parallel, returning rows in
/// grid order (`a` outer, `b` inner).
///
/// When `mu` is an axis and decoy states are enabled, the decoy intensity
/// keeps its ratio to the signal intensity of `base`.
pub fn scan_grid(base: &PointSpec, a: &Axis, b: &Axis) -> Result<Vec<ScanRow>> {
    if a.param == b.param {
        return Err(Error::domain(format!("both axes vary {}", a.param)));
    }
    let points: Vec<(f64, f64)> =
        a.values().into_iter().flat_map(|x| b.values().into_iter().map(move |y| (x, y))).collect();
    points
        .par_iter()
        .map(|&(x, y)| {
            let mut spec = *base;
            spec.set(a.param, x);
            spec.set(b.param, y);
            if let Some(mu_hat) = base.mu_hat {
                spec.mu_hat = Some(mu_hat * spec.mu / base.mu);
            }
            Ok(ScanRow { x, y, result: evaluate_point(&spec)? })
        })
        .collect()
}
