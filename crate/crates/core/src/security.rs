//! Security parameters of weak string erasure and oblivious transfer.
//!
//! Everything here is a pure function of a [`SourceCharacterization`], a
//! storage model and a [`SecurityConfig`]. The `Finite` regime keeps every
//! Chernoff half-width; `Asymptotic` sets them all to zero.

use crate::error::{Error, Result};
use crate::sources::{honest_gain, SourceCharacterization, SourceKind};
use crate::stats::{binary_entropy, chernoff_halfwidth};
use crate::storage::{DepolarizingStorage, StrongConverseChannel};

/// Default number of grid points for the single-photon report fraction.
pub const DEFAULT_R1_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    #[default]
    Asymptotic,
    Finite,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Regime::Asymptotic),
            "finite" => Ok(Regime::Finite),
            other => Err(Error::domain(format!("unknown regime '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityConfig {
    pub delta: f64,
    /// Number of valid rounds `M`.
    pub m: u64,
    /// Failure probability of each interval check.
    pub eps_interval: f64,
    pub regime: Regime,
    pub r1_steps: usize,
}

impl SecurityConfig {
    pub fn new(delta: f64, m: u64, eps_interval: f64, regime: Regime) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::domain(format!("delta = {delta} outside (0, 1/2)")));
        }
        if m == 0 {
            return Err(Error::domain("M must be at least 1"));
        }
        if !(eps_interval > 0.0 && eps_interval <= 2.0) {
            return Err(Error::domain(format!("eps_interval = {eps_interval} outside (0, 2]")));
        }
        Ok(Self { delta, m, eps_interval, regime, r1_steps: DEFAULT_R1_STEPS })
    }

    pub fn with_r1_steps(mut self, steps: usize) -> Self {
        self.r1_steps = steps.max(1);
        self
    }

    /// Half-width of every `M`-round interval, zero in the asymptotic regime.
    pub fn zeta(&self) -> f64 {
        self.zeta_for(self.m)
    }

    fn zeta_for(&self, count: u64) -> f64 {
        match self.regime {
            Regime::Asymptotic => 0.0,
            Regime::Finite => chernoff_halfwidth(count, self.eps_interval).unwrap_or(f64::INFINITY),
        }
    }
}

/// Expected number of single-photon rounds honest Bob would receive; the
/// quantity that sizes the adversary's storage.
pub fn m_store(ch: &SourceCharacterization, m: u64) -> f64 {
    ch.p1_sent() * ch.p_h1_click * m as f64
}

/// The two feasibility conditions in their large-`M` form.
pub fn security_conditions<S: StrongConverseChannel + ?Sized>(
    ch: &SourceCharacterization,
    channel: &S,
    nu: f64,
) -> (bool, bool) {
    let q = ch.cond1_quantity();
    let cond1 = q > 0.0;
    let denom = ch.p1_sent() * ch.p_h1_click;
    let cond2 = cond1 && denom > 0.0 && channel.capacity() * nu < 0.5 * q / denom;
    (cond1, cond2)
}

/// `(1/2 - delta)(1 - r1) / p_h1_click`, or 0 when Bob's single-photon
/// click probability vanishes.
pub fn rate_r(delta: f64, r1: f64, p_h1_click: f64) -> f64 {
    if p_h1_click > 0.0 {
        ((0.5 - delta) * (1.0 - r1) / p_h1_click).max(0.0)
    } else {
        0.0
    }
}

/// Finite-`M` rate: the large-`M` rate scaled by `(p1 - zeta) / p1`.
pub fn rate_r_finite(delta: f64, r1: f64, p_h1_click: f64, p1_sent: f64, zeta1: f64) -> f64 {
    if p1_sent <= 0.0 {
        return 0.0;
    }
    rate_r(delta, r1, p_h1_click) * ((p1_sent - zeta1) / p1_sent).max(0.0)
}

/// Largest fraction of single-photon rounds dishonest Bob can claim as
/// missing without triggering Alice's abort test.
pub fn r1_bound(
    ch: &SourceCharacterization,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> Result<f64> {
    let z = cfg.zeta();
    let denom = ch.p1_sent() - z;
    if !(denom > 0.0) {
        return Err(Error::constraint(format!(
            "p1_sent - zeta = {denom:e} leaves no single-photon rounds to bound"
        )));
    }
    let budget = ((ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) / denom).clamp(0.0, 1.0);
    Ok(match decoy {
        Some(d) => budget.min(1.0 - d.tau_for(cfg.regime)),
        None => budget,
    })
}

/// The report budget `M^d_report` in rounds.
pub fn report_budget(ch: &SourceCharacterization, cfg: &SecurityConfig) -> f64 {
    let z = cfg.zeta();
    ((ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) * cfg.m as f64).max(0.0)
}

/// Bits of information per kept `n`-photon round, `-log2(1 - p)`, with `p`
/// capped at 1/2.
pub fn multiphoton_leak(pd_n_err: f64) -> f64 {
    -(1.0 - pd_n_err.clamp(0.0, 0.5)).log2()
}

/// Dishonest Bob's choice of how many rounds to report missing, reduced to
/// the numbers the min-entropy objective depends on.
#[derive(Debug, Clone)]
pub struct LambdaProblem<'a> {
    pub channel: &'a dyn StrongConverseChannel,
    pub nu: f64,
    pub m_store: f64,
    /// `R = rate_coeff * (1 - r1)`.
    pub rate_coeff: f64,
    /// Expected `n`-photon round counts `M^(n)` for `n = 1..`; entry 0 is
    /// the single-photon count.
    pub counts: Vec<f64>,
    /// Per-round leakage for each entry of `counts`; entry 0 is ignored.
    pub leak: Vec<f64>,
    pub budget: f64,
    pub r1_max: f64,
}

impl std::fmt::Debug for dyn StrongConverseChannel + '_ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StrongConverseChannel(C = {})", self.capacity())
    }
}

impl LambdaProblem<'_> {
    fn single_photon_entropy(&self, r1: f64) -> f64 {
        let rate = self.rate_coeff * (1.0 - r1);
        self.nu * self.channel.gamma(rate / self.nu) * self.m_store
    }

    /// Min-entropy rate for an explicit report profile `r[k]` (photon number
    /// `k + 1`). `None` when the profile exceeds the budget or nothing is
    /// left.
    pub fn objective(&self, r: &[f64]) -> Option<f64> {
        if r.len() != self.counts.len() || r[0] > self.r1_max + 1e-12 {
            return None;
        }
        // Single-photon reports spend the budget first; in the finite regime
        // r1_max alone may slightly exceed it.
        let multi: f64 = r.iter().zip(&self.counts).skip(1).map(|(ri, c)| ri * c).sum();
        let left = (self.budget - r[0] * self.counts[0]).max(0.0);
        if multi > left + 1e-9 * self.budget.max(1.0) {
            return None;
        }
        let kept: Vec<f64> = r.iter().zip(&self.counts).map(|(ri, c)| (1.0 - ri) * c).collect();
        let m: f64 = kept.iter().sum();
        if m <= 1e-12 * self.counts.iter().sum::<f64>().max(1.0) {
            return None;
        }
        let multi: f64 = kept.iter().zip(&self.leak).skip(1).map(|(k, l)| k * l).sum();
        Some((self.single_photon_entropy(r[0]) + multi) / m)
    }

    /// Best multi-photon reports for a fixed `r1`.
    fn greedy_profile(&self, r1: f64, order: &[usize]) -> Option<(f64, Vec<f64>)> {
        let mut r = vec![0.0; self.counts.len()];
        r[0] = r1;
        let mut left = (self.budget - r1 * self.counts[0]).max(0.0);
        let mut num = self.single_photon_entropy(r1);
        let mut den = (1.0 - r1) * self.counts[0];
        for k in 1..self.counts.len() {
            num += self.leak[k] * self.counts[k];
            den += self.counts[k];
        }
        for &k in order {
            if left <= 0.0 || (den > 0.0 && self.leak[k] <= num / den) {
                break;
            }
            if self.counts[k] <= 0.0 {
                continue;
            }
            let take = left.min(self.counts[k]);
            r[k] = take / self.counts[k];
            left -= take;
            num -= self.leak[k] * take;
            den -= take;
        }
        let total: f64 = self.counts.iter().sum();
        if den <= 1e-12 * total.max(1.0) {
            return None;
        }
        Some((num / den, r))
    }

    /// Grid over `r1` with a greedy allocation of the remaining budget.
    pub fn solve(&self, steps: usize) -> Option<(f64, Vec<f64>)> {
        let mut order: Vec<usize> = (1..self.counts.len()).collect();
        order.sort_by(|&a, &b| self.leak[b].total_cmp(&self.leak[a]));
        let steps = steps.max(1);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..=steps {
            let r1 = self.r1_max * i as f64 / steps as f64;
            if let Some((v, r)) = self.greedy_profile(r1, &order) {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, r));
                }
            }
        }
        best
    }
}

/// Assemble the optimisation problem for one configuration.
pub fn lambda_problem<'a>(
    ch: &SourceCharacterization,
    channel: &'a dyn StrongConverseChannel,
    nu: f64,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> Result<LambdaProblem<'a>> {
    let m = cfg.m as f64;
    let r1_max = r1_bound(ch, cfg, decoy)?;
    let rate_coeff = match cfg.regime {
        Regime::Asymptotic => rate_r(cfg.delta, 0.0, ch.p_h1_click),
        Regime::Finite => rate_r_finite(cfg.delta, 0.0, ch.p_h1_click, ch.p1_sent(), cfg.zeta()),
    };
    Ok(LambdaProblem {
        channel,
        nu,
        m_store: m_store(ch, cfg.m),
        rate_coeff,
        counts: ch.pn_sent.iter().skip(1).map(|p| p * m).collect(),
        leak: ch.pd_n_err.iter().skip(1).map(|&p| multiphoton_leak(p)).collect(),
        budget: report_budget(ch, cfg),
        r1_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityReport {
    pub cond1: bool,
    pub cond2: bool,
    pub m_store: f64,
    pub m_d_report: f64,
    /// Rate `R` at the minimising single-photon report fraction.
    pub rate: f64,
    /// Worst-case single-photon report fraction Alice's test admits.
    pub r1_max: f64,
    /// Min-entropy rate; `None` when a feasibility condition fails.
    pub lambda: Option<f64>,
    /// Security error clamped to `[0, 1]`.
    pub eps: f64,
    pub eps_raw: f64,
    /// Minimising report fractions for photon numbers `1, 2, ...`.
    pub r_profile: Vec<f64>,
    /// Expected length of the output string.
    pub m_expected: f64,
    pub secure: bool,
}

pub fn lambda_rate(
    ch: &SourceCharacterization,
    storage: &DepolarizingStorage,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> Result<SecurityReport> {
    lambda_rate_with(ch, storage, storage.nu, cfg, decoy)
}

pub fn lambda_rate_with(
    ch: &SourceCharacterization,
    channel: &dyn StrongConverseChannel,
    nu: f64,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> Result<SecurityReport> {
    let problem = lambda_problem(ch, channel, nu, cfg, decoy)?;
    let r_at_max = problem.rate_coeff * (1.0 - problem.r1_max);
    let cond1 = problem.r1_max < 1.0;
    let cond2 = cond1 && channel.capacity() * nu < r_at_max / (0.5 - cfg.delta) * 0.5;
    let eps_raw = epsilon_raw(ch, cfg, decoy);
    let mut report = SecurityReport {
        cond1,
        cond2,
        m_store: problem.m_store,
        m_d_report: problem.budget,
        rate: r_at_max,
        r1_max: problem.r1_max,
        lambda: None,
        eps: eps_raw.clamp(0.0, 1.0),
        eps_raw,
        r_profile: Vec::new(),
        m_expected: 0.0,
        secure: false,
    };
    if !(cond1 && cond2) {
        return Ok(report);
    }
    if let Some((lambda, profile)) = problem.solve(cfg.r1_steps) {
        report.rate = problem.rate_coeff * (1.0 - profile[0]);
        report.m_expected = profile.iter().zip(&problem.counts).map(|(r, c)| (1.0 - r) * c).sum();
        report.secure = lambda > 0.0;
        report.lambda = Some(lambda);
        report.r_profile = profile;
    }
    Ok(report)
}

/// The simplified rate for sources whose multi-photon rounds are fully
/// revealed: Bob reports only single-photon rounds, as many as allowed.
pub fn lambda_closed_form(
    ch: &SourceCharacterization,
    storage: &DepolarizingStorage,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> Result<Option<f64>> {
    let problem = lambda_problem(ch, storage, storage.nu, cfg, decoy)?;
    let mut r = vec![0.0; problem.counts.len()];
    r[0] = problem.r1_max;
    Ok(problem.objective(&r))
}

/// Coefficient `delta^2 / (512 (4 + log2(1/delta))^2)` of the exponent.
pub fn epsilon_exponent_coeff(delta: f64) -> f64 {
    let l = 4.0 + (1.0 / delta).log2();
    delta * delta / (512.0 * l * l)
}

fn epsilon_raw(ch: &SourceCharacterization, cfg: &SecurityConfig, decoy: Option<&DecoyEstimate>) -> f64 {
    let c = epsilon_exponent_coeff(cfg.delta);
    let m = cfg.m as f64;
    match decoy {
        Some(d) => {
            let s = d.settings.len() as f64;
            2.0 * (1.0 + s) * (-c * d.tau_for(cfg.regime) * ch.p1_sent() * m).exp()
        }
        None => {
            let p1 = ch.p1_sent();
            let z = cfg.zeta();
            let arg = match cfg.regime {
                Regime::Asymptotic => ch.cond1_quantity(),
                Regime::Finite if p1 - z > 0.0 => {
                    p1 - p1 * (ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) / (p1 - z)
                }
                Regime::Finite => f64::NEG_INFINITY,
            };
            4.0 * (-c * arg * m).exp()
        }
    }
}

/// Security error of weak string erasure. Returns `(clamped, raw)`.
pub fn epsilon_bound(
    ch: &SourceCharacterization,
    cfg: &SecurityConfig,
    decoy: Option<&DecoyEstimate>,
) -> (f64, f64) {
    let raw = epsilon_raw(ch, cfg, decoy);
    (raw.clamp(0.0, 1.0), raw)
}

/// Single-photon yield bound from a vacuum, a weak decoy and a signal
/// intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoyEstimate {
    /// Intensities `[0, mu_hat, mu]`.
    pub settings: [f64; 3],
    /// Honest gains for each setting.
    pub q_h: [f64; 3],
    pub zetas: [f64; 3],
    pub tau: f64,
    pub tau_asymptotic: f64,
    /// False when the finite bound is not positive, i.e. carries no
    /// information.
    pub informative: bool,
}

impl DecoyEstimate {
    pub fn tau_for(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Asymptotic => self.tau_asymptotic,
            Regime::Finite => self.tau,
        }
    }
}

/// The yield bound for gains `q = [Q_vac, Q_mu_hat, Q_mu]`, each already
/// shifted by any finite-size correction.
pub fn tau_from_gains(mu: f64, mu_hat: f64, q: [f64; 3]) -> f64 {
    let pre = mu / (mu * mu_hat - mu_hat * mu_hat);
    let ratio = mu_hat * mu_hat / (mu * mu);
    pre * (q[1] * mu_hat.exp() - q[2] * mu.exp() * ratio - (1.0 - ratio) * q[0])
}

/// Decoy estimate for weak coherent pulses. `counts` holds the number of
/// rounds per setting `[vac, mu_hat, mu]`; `None` gives the asymptotic
/// estimate only.
pub fn decoy_tau(
    signal: &SourceCharacterization,
    decoy: &SourceCharacterization,
    counts: Option<[u64; 3]>,
    eps_interval: f64,
) -> Result<DecoyEstimate> {
    let (SourceKind::Wcp { mu }, SourceKind::Wcp { mu: mu_hat }) = (signal.source.kind, decoy.source.kind)
    else {
        return Err(Error::domain("decoy estimation is defined for weak coherent pulses"));
    };
    if !(mu_hat < mu) {
        return Err(Error::domain(format!("decoy intensity {mu_hat} must be below signal {mu}")));
    }
    let q_h = [signal.detector.p_dark_click(), honest_gain(decoy), honest_gain(signal)];
    let zetas = match counts {
        Some(c) => {
            let mut z = [0.0; 3];
            for (zi, &ci) in z.iter_mut().zip(&c) {
                if ci == 0 {
                    return Err(Error::domain("every decoy setting needs at least one round"));
                }
                *zi = chernoff_halfwidth(ci, eps_interval)?;
            }
            z
        }
        None => [0.0; 3],
    };
    let tau_hat = tau_from_gains(mu, mu_hat, q_h);
    let shifted = [q_h[0] + 2.0 * zetas[0], q_h[1] - 2.0 * zetas[1], q_h[2] + 2.0 * zetas[2]];
    let tau = tau_from_gains(mu, mu_hat, shifted);
    Ok(DecoyEstimate {
        settings: [0.0, mu_hat, mu],
        q_h,
        zetas,
        tau: tau.clamp(0.0, 1.0),
        tau_asymptotic: tau_hat.clamp(0.0, 1.0),
        informative: tau > 0.0,
    })
}

/// Length and error of fully randomized oblivious transfer built from a
/// weak string erasure instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtLength {
    /// Output length; zero or negative means infeasible.
    pub ell: i64,
    pub error: f64,
    pub feasible: bool,
}

/// Output length for min-entropy rate `lambda`, WSEE length `m`, block size
/// `beta`, trade-off `omega` and error rate `p_err`; `eps_wsee` is the error
/// of the underlying weak string erasure.
pub fn ot_length(lambda: f64, m: u64, beta: u64, omega: f64, p_err: f64, eps_wsee: f64) -> Result<OtLength> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::constraint(format!("lambda = {lambda} must lie in (0, 1]")));
    }
    if !(omega >= 2.0) {
        return Err(Error::constraint(format!("omega = {omega} violates omega >= 2")));
    }
    let beta_min = 67f64.max(256.0 * omega * omega / (lambda * lambda));
    if (beta as f64) < beta_min * (1.0 - 1e-12) {
        return Err(Error::constraint(format!(
            "beta = {beta} violates beta >= max(67, 256 omega^2 / lambda^2) = {beta_min}"
        )));
    }
    if m < 4 * beta {
        return Err(Error::constraint(format!("m = {m} violates m >= 4 beta = {}", 4 * beta)));
    }
    let h = binary_entropy(p_err)?;
    let (mf, bf) = (m as f64, beta as f64);
    let smooth = lambda * lambda / (512.0 * omega * omega * bf);
    let per_bit = ((omega - 1.0) / omega) * lambda / 8.0 - smooth - 1.2 * h / 8.0;
    let ell = (per_bit * mf - 0.5).floor();
    let error = 41.0 * (-smooth * mf).exp2() + 2.0 * eps_wsee;
    Ok(OtLength { ell: ell as i64, error, feasible: ell > 0.0 })
}
