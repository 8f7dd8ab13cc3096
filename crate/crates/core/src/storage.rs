//! The adversary's quantum storage: depolarizing channels and their strong
//! converse parameter.

use crate::error::{Error, Result};

/// Default upper end of the Rényi-order search.
pub const ALPHA_MAX: f64 = 1e6;

/// Rates within this distance above capacity are treated as capacity.
pub const CAPACITY_TOL: f64 = 1e-12;

/// A storage channel with the strong converse property.
pub trait StrongConverseChannel {
    /// Classical capacity in bits per channel use.
    fn capacity(&self) -> f64;

    /// Exponent `gamma` with success probability at most `2^(-gamma n)` for
    /// coding at rate `rate`. Zero at or below capacity.
    fn gamma(&self, rate: f64) -> f64;
}

/// Storage modelled as `nu * M_store` uses of a `d`-dimensional depolarizing
/// channel that keeps the state with probability `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingStorage {
    pub d: u32,
    pub r: f64,
    pub nu: f64,
}

impl DepolarizingStorage {
    pub fn new(d: u32, r: f64, nu: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain(format!("storage dimension d = {d} must be at least 2")));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!("retention r = {r} outside [0, 1]")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::domain(format!("storage rate nu = {nu} must be positive")));
        }
        Ok(Self { d, r, nu })
    }
}

impl StrongConverseChannel for DepolarizingStorage {
    fn capacity(&self) -> f64 {
        depolarizing_capacity(self.d, self.r)
    }

    fn gamma(&self, rate: f64) -> f64 {
        strong_converse_gamma(self.d, self.r, rate)
    }
}

/// Output eigenvalues: one of weight `a`, `d - 1` of weight `b`.
fn eigenvalues(d: u32, r: f64) -> (f64, f64) {
    let b = (1.0 - r) / d as f64;
    (r + b, b)
}

/// Classical capacity of the depolarizing channel in bits.
pub fn depolarizing_capacity(d: u32, r: f64) -> f64 {
    let (a, b) = eigenvalues(d, r);
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let c = (d as f64).log2() + xlogx(a) + (d as f64 - 1.0) * xlogx(b);
    c.max(0.0)
}

/// The bracketed objective at Rényi order `alpha >= 1`.
///
/// Written as `((alpha-1)/alpha)(R - log d) - (1/alpha) log(a^alpha + ...)`,
/// which avoids the `1/(1-alpha)` singularity at `alpha = 1`.
pub fn gamma_objective(d: u32, r: f64, rate: f64, alpha: f64) -> f64 {
    let (a, b) = eigenvalues(d, r);
    let dm1 = d as f64 - 1.0;
    // a >= b, so factor out a^alpha to keep the sum from underflowing.
    let rest = if b > 0.0 { dm1 * (b / a).powf(alpha) } else { 0.0 };
    let log_power_sum = alpha * a.log2() + rest.ln_1p() / std::f64::consts::LN_2;
    let log_d = (d as f64).log2();
    ((alpha - 1.0) / alpha) * (rate - log_d) - log_power_sum / alpha
}

/// Strong converse parameter `max_{alpha >= 1}` of [`gamma_objective`].
pub fn strong_converse_gamma(d: u32, r: f64, rate: f64) -> f64 {
    strong_converse_gamma_with(d, r, rate, ALPHA_MAX)
}

pub fn strong_converse_gamma_with(d: u32, r: f64, rate: f64, alpha_max: f64) -> f64 {
    if rate <= depolarizing_capacity(d, r) + CAPACITY_TOL {
        return 0.0;
    }
    let f = |t: f64| gamma_objective(d, r, rate, t.exp());
    let t_hi = alpha_max.ln();

    // The objective is concave in 1/alpha, hence unimodal in log(alpha).
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, t_hi);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = f(0.5 * (lo + hi)).max(f1).max(f2).max(f(0.0)).max(f(t_hi));
    for i in 0..512 {
        best = best.max(f(t_hi * i as f64 / 511.0));
    }
    best.max(0.0)
}
