//! Binary entropy and Chernoff-style finite-size intervals.
//!
//! Entropies are in bits. The only natural logarithm in the crate is the one
//! inside [`chernoff_halfwidth`].

use crate::error::{check_probability, Error, Result};

/// Whether an interval must hold on both sides or only bound from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    /// `2 exp(-2 zeta^2 M) <= eps`; used by the abort tests.
    #[default]
    TwoSided,
    /// `exp(-2 zeta^2 M) <= eps`; sufficient for a worst-case lower bound,
    /// e.g. intensity fluctuations of the source.
    OneSided,
}

/// `-p log2 p - (1-p) log2 (1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(xlog2x(p) + xlog2x(1.0 - p))
}

/// `-x log2 x`, zero at the endpoints.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Half-width `zeta = sqrt(ln(2/eps) / (2M))` of the two-sided interval
/// that contains the empirical frequency of `m` Bernoulli trials except with
/// probability `eps`.
///
/// `eps` may be as large as 2, where the interval collapses to a point.
pub fn chernoff_halfwidth(m: u64, eps: f64) -> Result<f64> {
    chernoff_halfwidth_with(m, eps, Sidedness::TwoSided)
}

pub fn chernoff_halfwidth_with(m: u64, eps: f64, sides: Sidedness) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("chernoff_halfwidth needs at least one trial"));
    }
    let numerator = match sides {
        Sidedness::TwoSided => 2.0,
        Sidedness::OneSided => 1.0,
    };
    if !(eps > 0.0 && eps <= numerator) {
        return Err(Error::domain(format!(
            "eps = {eps} outside (0, {numerator}] for a {sides:?} bound"
        )));
    }
    Ok(((numerator / eps).ln() / (2.0 * m as f64)).sqrt())
}

/// Inclusive test `(p - zeta) M <= observed <= (p + zeta) M`.
pub fn interval_contains(observed: u64, expected_p: f64, zeta: f64, m: u64) -> bool {
    let observed = observed as f64;
    let m = m as f64;
    (expected_p - zeta) * m <= observed && observed <= (expected_p + zeta) * m
}

/// A probability together with its finite-size half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub halfwidth: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn new(center: f64, halfwidth: f64) -> Result<Self> {
        check_probability("center", center)?;
        if !(halfwidth >= 0.0) {
            return Err(Error::domain(format!("negative halfwidth {halfwidth}")));
        }
        Ok(Self {
            center,
            halfwidth,
            lo: (center - halfwidth).max(0.0),
            hi: (center + halfwidth).min(1.0),
        })
    }

    /// Interval around `center` for `m` trials at failure probability `eps`.
    pub fn chernoff(center: f64, m: u64, eps: f64) -> Result<Self> {
        Self::new(center, chernoff_halfwidth(m, eps)?)
    }

    pub fn contains_count(&self, observed: u64, m: u64) -> bool {
        interval_contains(observed, self.center, self.halfwidth, m)
    }
}
