//! Photon-source and detector statistics.
//!
//! [`characterize`] turns a (source, detector) pair into every probability
//! the security analysis consumes. Weak coherent pulses have closed forms;
//! parametric down-conversion sums over photon numbers up to `n_max` and
//! refuses to run when the neglected tail is heavier than [`TAIL_TOL`].
//!
//! Naming follows the usual convention: `h` is honest Bob, `d` dishonest Bob,
//! `S` the signal part of a click (ignoring dark counts), `D` a dark count.

use crate::error::{check_probability, Error, Result};

/// Largest photon-number tail mass allowed beyond the truncation point.
pub const TAIL_TOL: f64 = 1e-10;

/// Default truncation for photon-number sums.
pub const DEFAULT_N_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Overall transmittance times detector efficiency.
    pub eta: f64,
    /// Dark-count probability per detector and time slot.
    pub p_dark: f64,
    /// Probability that the wrong detector fires for a transmitted signal.
    pub e_det: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, p_dark: f64, e_det: f64) -> Result<Self> {
        check_probability("eta", eta)?;
        if !(0.0..1.0).contains(&p_dark) {
            return Err(Error::domain(format!("p_dark = {p_dark} outside [0, 1)")));
        }
        if !(0.0..=0.5).contains(&e_det) {
            return Err(Error::domain(format!("e_det = {e_det} outside [0, 1/2]")));
        }
        Ok(Self { eta, p_dark, e_det })
    }

    /// Noise-free detector with unit efficiency.
    pub fn ideal() -> Self {
        Self { eta: 1.0, p_dark: 0.0, e_det: 0.0 }
    }

    /// Probability that at least one of two detectors fires on dark counts.
    pub fn p_dark_click(&self) -> f64 {
        self.p_dark * (2.0 - self.p_dark)
    }

    /// Honest click probability given `n` photons reach Bob's setup.
    pub fn p_h_n_click(&self, n: usize) -> f64 {
        1.0 - (1.0 - self.p_dark).powi(2) * (1.0 - self.eta).powi(n as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Phase-randomized weak coherent pulses, Poisson photon number.
    Wcp { mu: f64 },
    /// Parametric down-conversion with Alice measuring one half locally.
    Pdc { mu: f64 },
    IdealSinglePhoton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub kind: SourceKind,
    pub n_max: usize,
}

impl SourceModel {
    pub fn wcp(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self { kind: SourceKind::Wcp { mu }, n_max: DEFAULT_N_MAX })
    }

    pub fn pdc(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self { kind: SourceKind::Pdc { mu }, n_max: DEFAULT_N_MAX })
    }

    pub fn ideal() -> Self {
        Self { kind: SourceKind::IdealSinglePhoton, n_max: DEFAULT_N_MAX }
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::domain(format!("n_max = {n_max} must be at least 2")));
        }
        self.n_max = n_max;
        Ok(self)
    }

    /// Mean photon (pair) number; zero for the ideal source's vacuum-free
    /// distribution is meaningless, so it reports 1.
    pub fn mu(&self) -> f64 {
        match self.kind {
            SourceKind::Wcp { mu } | SourceKind::Pdc { mu } => mu,
            SourceKind::IdealSinglePhoton => 1.0,
        }
    }

    /// Same kind and truncation at a different intensity. Used for decoy
    /// settings.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        let kind = match self.kind {
            SourceKind::Wcp { .. } => SourceKind::Wcp { mu },
            SourceKind::Pdc { .. } => SourceKind::Pdc { mu },
            SourceKind::IdealSinglePhoton => {
                return Err(Error::domain("the ideal source has no intensity"))
            }
        };
        Ok(Self { kind, n_max: self.n_max })
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SourceKind::Wcp { .. } => "wcp",
            SourceKind::Pdc { .. } => "pdc",
            SourceKind::IdealSinglePhoton => "ideal",
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("mu = {mu} must be positive")))
    }
}

/// All derived probabilities for one source and detector.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct SourceCharacterization {
    pub source: SourceModel,
    pub detector: DetectorModel,
    /// Probability that the source emits exactly one photon (before any
    /// post-selection by Alice).
    pub p1_src: f64,
    /// Photon-number distribution of the rounds Alice counts as sent,
    /// indexed `0..=n_max`.
    pub pn_sent: Vec<f64>,
    pub p_h1_click: f64,
    pub p_h_B_S_no_click: f64,
    pub p_h_B_no_click: f64,
    pub p_h_B_click: f64,
    pub p_d_B_no_click: f64,
    pub p_B_D_err: f64,
    pub p_B_DS_err: f64,
    pub p_h_B_S_err: f64,
    pub p_h_B_err: f64,
    pub p_err_conditioned: f64,
    /// Dishonest Bob's decoding error per photon number, indexed `0..=n_max`.
    /// Entry 0 is 1/2 (vacuum carries no information).
    pub pd_n_err: Vec<f64>,
    /// Mass of the raw emission distribution beyond `n_max`.
    pub tail_mass: f64,
    /// Probability that Alice accepts a round (PDC post-selection; 1 otherwise).
    pub p_alice_valid: f64,
}

impl SourceCharacterization {
    pub fn p1_sent(&self) -> f64 {
        self.pn_sent[1]
    }

    pub fn n_max(&self) -> usize {
        self.pn_sent.len() - 1
    }

    /// The quantity that must be positive for the security error to vanish.
    pub fn cond1_quantity(&self) -> f64 {
        self.p1_sent() - self.p_h_B_no_click + self.p_d_B_no_click
    }

    /// Hand all multi-photon information to dishonest Bob, as in the
    /// simplified analysis.
    pub fn without_multiphoton_advantage(mut self) -> Self {
        for p in self.pd_n_err.iter_mut().skip(2) {
            *p = 0.0;
        }
        self
    }
}

#[allow(non_snake_case)]
struct SignalStats {
    pn_sent: Vec<f64>,
    p_S_no_click: f64,
    p_S_err: f64,
    p_alice_valid: f64,
    tail_mass: f64,
}

pub fn characterize(src: &SourceModel, det: &DetectorModel) -> Result<SourceCharacterization> {
    match src.kind {
        SourceKind::Wcp { .. } => characterize_wcp(src, det),
        SourceKind::Pdc { .. } => characterize_pdc(src, det),
        SourceKind::IdealSinglePhoton => {
            let mut pn_sent = vec![0.0; src.n_max + 1];
            pn_sent[1] = 1.0;
            let snc = 1.0 - det.eta;
            let stats = SignalStats {
                pn_sent,
                p_S_no_click: snc,
                p_S_err: det.e_det * (1.0 - snc),
                p_alice_valid: 1.0,
                tail_mass: 0.0,
            };
            let pd = vec![0.0; src.n_max + 1];
            compose(src, det, 1.0, stats, pd)
        }
    }
}

pub fn characterize_wcp(src: &SourceModel, det: &DetectorModel) -> Result<SourceCharacterization> {
    let SourceKind::Wcp { mu } = src.kind else {
        return Err(Error::domain("characterize_wcp needs a WCP source"));
    };
    let pn_sent = poisson(mu, src.n_max);
    let tail_mass = poisson_tail(mu, src.n_max);
    check_tail(src.n_max, tail_mass)?;
    let snc = (-det.eta * mu).exp();
    let stats = SignalStats {
        pn_sent,
        p_S_no_click: snc,
        p_S_err: det.e_det * (1.0 - snc),
        p_alice_valid: 1.0,
        tail_mass,
    };
    // Multi-photon pulses reveal the bit completely.
    let pd = vec![0.0; src.n_max + 1];
    compose(src, det, mu * (-mu).exp(), stats, pd)
}

fn poisson(mu: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = (-mu).exp();
    for n in 0..=n_max {
        if n > 0 {
            term *= mu / n as f64;
        }
        out.push(term);
    }
    out
}

fn poisson_tail(mu: f64, n_max: usize) -> f64 {
    let mut term = poisson(mu, n_max)[n_max];
    let mut tail = 0.0;
    for n in n_max + 1..n_max + 400 {
        term *= mu / n as f64;
        tail += term;
        if term < tail * 1e-17 {
            break;
        }
    }
    tail
}

fn check_tail(n_max: usize, tail: f64) -> Result<()> {
    if tail > TAIL_TOL {
        Err(Error::Truncation { n_max, tail, tol: TAIL_TOL })
    } else {
        Ok(())
    }
}

/// Emission probability of `n` photon pairs,
/// `(n+1) (mu/2)^n / (1+mu/2)^(n+2)`.
pub fn pdc_emission(mu: f64, n: usize) -> f64 {
    let x = pdc_ratio(mu);
    (n as f64 + 1.0) * x.powi(n as i32) * (1.0 - x).powi(2)
}

fn pdc_ratio(mu: f64) -> f64 {
    (mu / 2.0) / (1.0 + mu / 2.0)
}

/// Mass of the pair-number distribution above `n_max`.
pub fn pdc_tail_mass(mu: f64, n_max: usize) -> f64 {
    let x = pdc_ratio(mu);
    let n = n_max as f64;
    x.powi(n_max as i32 + 1) * ((n + 2.0) * (1.0 - x) + x)
}

/// Weight of the event "Alice's first detector alone clicks and her second
/// mode held `m` of the `n` photons", with the emission probability and the
/// `1/(n+1)` split factored out.
fn alice_single_click(ebar: f64, p_dark: f64, n: usize, m: usize) -> f64 {
    (1.0 - p_dark) * (ebar.powi(m as i32) - (1.0 - p_dark) * ebar.powi(n as i32))
}

pub fn characterize_pdc(src: &SourceModel, det: &DetectorModel) -> Result<SourceCharacterization> {
    let SourceKind::Pdc { mu } = src.kind else {
        return Err(Error::domain("characterize_pdc needs a PDC source"));
    };
    let n_max = src.n_max;
    let tail_mass = pdc_tail_mass(mu, n_max);
    check_tail(n_max, tail_mass)?;

    let ebar = 1.0 - det.eta;
    let e = det.e_det;
    let mut weight_n = vec![0.0; n_max + 1];
    let mut p_no_click = 0.0;
    let mut p_err = 0.0;
    for (n, slot) in weight_n.iter_mut().enumerate() {
        let p_n = pdc_emission(mu, n) / (n as f64 + 1.0);
        for m in 0..=n {
            let w = p_n * alice_single_click(ebar, det.p_dark, n, m);
            // Bob's copy: m photons in the wrong mode, n - m in the right one.
            let wrong = 1.0 - ebar.powi(m as i32);
            let right = 1.0 - ebar.powi((n - m) as i32);
            let err = (1.0 - e) * wrong * (1.0 - right)
                + e * right * (1.0 - wrong)
                + 0.5 * wrong * right;
            *slot += w;
            p_no_click += w * ebar.powi(n as i32);
            p_err += w * err;
        }
    }
    let c: f64 = weight_n.iter().sum();
    if !(c > 0.0) {
        return Err(Error::UndefinedConditional(
            "Alice never registers a single click".into(),
        ));
    }
    let pn_sent: Vec<f64> = weight_n.iter().map(|w| w / c).collect();
    let mut pd = vec![0.5; n_max + 1];
    for (n, p) in pd.iter_mut().enumerate().skip(1) {
        *p = pdc_dishonest_error(det.eta, det.p_dark, n)?;
    }
    let stats = SignalStats {
        pn_sent,
        p_S_no_click: p_no_click / c,
        p_S_err: p_err / c,
        p_alice_valid: 2.0 * c,
        tail_mass,
    };
    compose(src, det, pdc_emission(mu, 1), stats, pd)
}

/// Dishonest Bob's optimal error in guessing Alice's bit from the `n`-photon
/// part of a PDC emission, given Alice registered a single click.
///
/// The emission probability cancels in the normalisation, so the result does
/// not depend on the pair number.
pub fn pdc_dishonest_error(eta: f64, p_dark: f64, n: usize) -> Result<f64> {
    check_probability("eta", eta)?;
    check_probability("p_dark", p_dark)?;
    if n == 0 {
        return Err(Error::domain("photon number must be at least 1"));
    }
    let ebar = 1.0 - eta;
    let mut norm = 0.0;
    let mut dist = 0.0;
    for m in 0..=n {
        norm += alice_single_click(ebar, p_dark, n, m);
        dist += (ebar.powi(m as i32) - ebar.powi((n - m) as i32)).abs();
    }
    if !(norm > 0.0) {
        return Err(Error::UndefinedConditional(format!(
            "no single click for n = {n} at eta = {eta}, p_dark = {p_dark}"
        )));
    }
    let p = 0.5 - 0.25 * (1.0 - p_dark) * dist / norm;
    Ok(p.clamp(0.0, 0.5))
}

/// Fold the signal statistics together with the dark-count model.
#[allow(non_snake_case)]
fn compose(
    src: &SourceModel,
    det: &DetectorModel,
    p1_src: f64,
    s: SignalStats,
    pd_n_err: Vec<f64>,
) -> Result<SourceCharacterization> {
    let pdk = det.p_dark;
    let no_dark = (1.0 - pdk).powi(2);
    let p_S_click = 1.0 - s.p_S_no_click;
    let p_h_B_no_click = s.p_S_no_click * no_dark;
    let p_h_B_click = 1.0 - p_h_B_no_click;
    let p_B_D_err = pdk * (1.0 - pdk) + pdk * pdk / 2.0;
    let p_B_DS_err = s.p_S_err * pdk * (1.5 - pdk) + (p_S_click - s.p_S_err) * pdk / 2.0;
    let p_h_B_err = s.p_S_err * no_dark + s.p_S_no_click * p_B_D_err + p_B_DS_err;
    let p_err_conditioned = if p_h_B_click > 0.0 { p_h_B_err / p_h_B_click } else { 0.0 };
    Ok(SourceCharacterization {
        source: *src,
        detector: *det,
        p1_src,
        p_d_B_no_click: s.pn_sent[0],
        pn_sent: s.pn_sent,
        p_h1_click: det.p_h_n_click(1),
        p_h_B_S_no_click: s.p_S_no_click,
        p_h_B_no_click,
        p_h_B_click,
        p_B_D_err,
        p_B_DS_err,
        p_h_B_S_err: s.p_S_err,
        p_h_B_err,
        p_err_conditioned,
        pd_n_err,
        tail_mass: s.tail_mass,
        p_alice_valid: s.p_alice_valid,
    })
}

/// Bit-error rate on rounds where honest Bob registered a click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedError {
    pub p_err: f64,
    /// Set when the raw quotient exceeded 1/2 and was clamped.
    pub clamped: bool,
}

pub fn conditioned_bit_error(ch: &SourceCharacterization) -> Result<ConditionedError> {
    conditioned_from_parts(ch.p_h_B_err, ch.p_h_B_no_click)
}

pub fn conditioned_from_parts(p_h_b_err: f64, p_h_b_no_click: f64) -> Result<ConditionedError> {
    let click = 1.0 - p_h_b_no_click;
    if !(click > 0.0) {
        return Err(Error::UndefinedConditional("honest Bob never clicks".into()));
    }
    let raw = p_h_b_err / click;
    Ok(ConditionedError { p_err: raw.clamp(0.0, 0.5), clamped: raw > 0.5 })
}

/// Honest gain, the probability of a click, for a source setting.
pub fn honest_gain(ch: &SourceCharacterization) -> f64 {
    ch.pn_sent
        .iter()
        .enumerate()
        .map(|(n, p)| p * ch.detector.p_h_n_click(n))
        .sum()
}
