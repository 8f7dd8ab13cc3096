use crate::config::{CodeChoice, Config, Pipeline};
use crate::{Cli, CliError, Command, Common, Status};
use nsm_core::codes::linear::LinearCode;
use nsm_core::protocol::{
    ot_from_frot, run_frot, run_wsee, run_wsee_decoy, DecoyConfig, FrotParams, HonestBob, SessionRng,
    Transport, WseeConfig, WseeOutputs,
};
use nsm_core::scan::{scan_grid, Axis, Param, PointSpec, SourceFamily};
use nsm_core::security::{decoy_tau, lambda_rate, ot_length, tau_from_gains, DecoyEstimate, Regime};
use nsm_core::sources::{characterize, SourceCharacterization, SourceModel};
use nsm_core::stats::chernoff_halfwidth;
use rand::Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};

/// Nine significant digits, the fixed format of every printed number.
pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn run(cli: &Cli) -> Result<Status, CliError> {
    let cfg = load_config(&cli.common)?;
    let mut out = output(&cli.common)?;
    let status = match &cli.command {
        Command::Params => cmd_params(&cfg, &mut out)?,
        Command::Region { x, y, decoy } => cmd_region(&cfg, x, y, *decoy, &mut out)?,
        Command::Lambda { decoy } => cmd_lambda(&cfg, *decoy, &mut out)?,
        Command::Otrate { m_from, m_to, points, lambda, beta, m, p_err } => match lambda {
            Some(l) => cmd_ot_spot(&cfg, *l, beta.unwrap_or_default(), m.unwrap_or_default(), *p_err, &mut out)?,
            None => cmd_otrate(&cfg, *m_from, *m_to, *points, &mut out)?,
        },
        Command::Decoy { measured } => cmd_decoy(&cfg, *measured, cli.common.seed, &mut out)?,
        Command::Simulate { transcript } => {
            let (status, dump) = cmd_simulate(&cfg, cli.common.seed, &mut out)?;
            if let Some(path) = transcript {
                std::fs::write(path, dump)?;
            }
            status
        }
    };
    out.flush()?;
    Ok(status)
}

pub fn load_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for s in &common.set {
        cfg.set(s)?;
    }
    if let Some(regime) = common.regime {
        cfg.point.regime = regime;
    }
    Ok(cfg)
}

fn output(common: &Common) -> Result<Box<dyn Write>, CliError> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn characterization(point: &PointSpec) -> Result<SourceCharacterization, CliError> {
    Ok(characterize(&point.source()?, &point.detector()?)?)
}

/// Every probability of the source and detector model, one per row.
pub fn params_rows(ch: &SourceCharacterization) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> = [
        ("p1_src", ch.p1_src),
        ("p1_sent", ch.p1_sent()),
        ("p_h1_click", ch.p_h1_click),
        ("p_h_B_S_no_click", ch.p_h_B_S_no_click),
        ("p_h_B_no_click", ch.p_h_B_no_click),
        ("p_h_B_click", ch.p_h_B_click),
        ("p_d_B_no_click", ch.p_d_B_no_click),
        ("p_B_D_err", ch.p_B_D_err),
        ("p_B_DS_err", ch.p_B_DS_err),
        ("p_h_B_S_err", ch.p_h_B_S_err),
        ("p_h_B_err", ch.p_h_B_err),
        ("p_err_conditioned", ch.p_err_conditioned),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    if ch.source.label() == "pdc" {
        rows.push(("p_alice_valid".into(), ch.p_alice_valid));
        rows.push(("tail_mass".into(), ch.tail_mass));
        for (n, p) in ch.pd_n_err.iter().enumerate() {
            rows.push((format!("pd_n_err[{n}]"), *p));
        }
    }
    rows
}

fn cmd_params(cfg: &Config, out: &mut dyn Write) -> Result<Status, CliError> {
    let ch = characterization(&cfg.point)?;
    writeln!(out, "quantity,value[prob]")?;
    for (k, v) in params_rows(&ch) {
        writeln!(out, "{k},{}", num(v))?;
    }
    Ok(Status::Ok)
}

fn unit(p: Param) -> &'static str {
    match p {
        Param::Mu => "mu[photons/pulse]",
        Param::Eta => "eta[prob]",
        Param::PDark => "p_dark[prob]",
        Param::EDet => "e_det[prob]",
        Param::R => "r[prob]",
        Param::Nu => "nu[qubits/round]",
        Param::Delta => "delta[1]",
        Param::M => "M[rounds]",
    }
}

pub fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("axis '{spec}' is not name:lo:hi:steps"));
    let [name, lo, hi, steps] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let steps: usize = steps.parse().map_err(|_| bad())?;
    Ok(Axis::new(name.parse()?, lo, hi, steps)?)
}

fn decoy_point(cfg: &Config, decoy: bool) -> Result<PointSpec, CliError> {
    let mut point = cfg.point;
    if !decoy {
        point.mu_hat = None;
    } else if point.mu_hat.is_none() {
        return Err(CliError::Usage("decoy states need source.mu_hat".into()));
    }
    Ok(point)
}

fn cmd_region(cfg: &Config, x: &str, y: &str, decoy: bool, out: &mut dyn Write) -> Result<Status, CliError> {
    let (a, b) = (parse_axis(x)?, parse_axis(y)?);
    let rows = scan_grid(&decoy_point(cfg, decoy)?, &a, &b)?;
    writeln!(out, "{},{},cond1[bool],cond2[bool],lambda[bits/bit],eps[prob]", unit(a.param), unit(b.param))?;
    for row in rows {
        let r = &row.result;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(row.x),
            num(row.y),
            r.cond1 as u8,
            r.cond2 as u8,
            opt_num(r.lambda),
            num(r.eps)
        )?;
    }
    Ok(Status::Ok)
}

fn decoy_estimate(point: &PointSpec, ch: &SourceCharacterization) -> Result<DecoyEstimate, CliError> {
    let mu_hat = point.mu_hat.ok_or_else(|| CliError::Usage("decoy states need source.mu_hat".into()))?;
    let dch = characterize(&SourceModel::wcp(mu_hat)?.with_n_max(point.n_max)?, &point.detector()?)?;
    let counts = (point.regime == Regime::Finite).then_some([point.m; 3]);
    Ok(decoy_tau(ch, &dch, counts, point.eps_interval)?)
}

fn cmd_lambda(cfg: &Config, decoy: bool, out: &mut dyn Write) -> Result<Status, CliError> {
    let point = decoy_point(cfg, decoy)?;
    let ch = characterization(&point)?;
    let est = if decoy { Some(decoy_estimate(&point, &ch)?) } else { None };
    let rep = lambda_rate(&ch, &point.storage()?, &point.security()?, est.as_ref())?;
    writeln!(out, "quantity,value")?;
    writeln!(out, "cond1,{}", rep.cond1)?;
    writeln!(out, "cond2,{}", rep.cond2)?;
    writeln!(out, "m_store,{}", num(rep.m_store))?;
    writeln!(out, "m_d_report,{}", num(rep.m_d_report))?;
    writeln!(out, "r1_max,{}", num(rep.r1_max))?;
    writeln!(out, "rate,{}", num(rep.rate))?;
    writeln!(out, "lambda,{}", opt_num(rep.lambda))?;
    writeln!(out, "eps,{}", num(rep.eps))?;
    writeln!(out, "m_expected,{}", num(rep.m_expected))?;
    for (k, r) in rep.r_profile.iter().enumerate().filter(|(_, r)| **r > 0.0) {
        writeln!(out, "r[{}],{}", k + 1, num(*r))?;
    }
    Ok(if rep.secure { Status::Ok } else { Status::Infeasible })
}

fn cmd_ot_spot(cfg: &Config, lambda: f64, beta: u64, m: f64, p_err: f64, out: &mut dyn Write) -> Result<Status, CliError> {
    let m = m as u64;
    let len = ot_length(lambda, m, beta, cfg.omega, p_err, cfg.eps_wsee)?;
    writeln!(out, "ell[bits],m[bits],rate[ell/m],error[prob]")?;
    writeln!(out, "{},{m},{},{}", len.ell, num(len.ell as f64 / m as f64), num(len.error))?;
    Ok(if len.feasible { Status::Ok } else { Status::Infeasible })
}

/// One row of the rate sweep; `Err` carries the reason the rate is blank.
struct OtRow {
    m_total: u64,
    lambda: Option<f64>,
    p_err: f64,
    result: Result<(u64, u64, i64, f64), String>,
}

fn ot_row(cfg: &Config, ch: &SourceCharacterization, m_total: u64) -> Result<OtRow, CliError> {
    let mut point = cfg.point;
    point.m = m_total;
    let rep = lambda_rate(ch, &point.storage()?, &point.security()?, None)?;
    let p_err = ch.p_err_conditioned;
    let mut row = OtRow { m_total, lambda: rep.lambda, p_err, result: Err(String::new()) };
    row.result = match rep.lambda {
        Some(l) if l > 0.0 => {
            let l = l.min(1.0);
            let beta = (256.0 * cfg.omega * cfg.omega / (l * l)).ceil().max(67.0) as u64;
            let m = rep.m_expected.floor() as u64;
            match ot_length(l, m, beta, cfg.omega, p_err, cfg.eps_wsee) {
                Ok(len) if len.feasible => Ok((beta, m, len.ell, len.error)),
                Ok(len) => Err(format!("ell = {} not positive", len.ell)),
                Err(e) => Err(e.to_string()),
            }
        }
        _ => Err("no positive min-entropy rate".into()),
    };
    Ok(row)
}

fn cmd_otrate(cfg: &Config, m_from: f64, m_to: f64, points: usize, out: &mut dyn Write) -> Result<Status, CliError> {
    if !(m_from >= 1.0 && m_to >= m_from && points >= 1) {
        return Err(CliError::Usage("need 1 <= m-from <= m-to and at least one point".into()));
    }
    let ch = characterization(&cfg.point)?;
    let ms: Vec<u64> = (0..points)
        .map(|i| {
            let f = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            (m_from.ln() + f * (m_to.ln() - m_from.ln())).exp().round() as u64
        })
        .collect();
    let rows = ms.par_iter().map(|&m| ot_row(cfg, &ch, m)).collect::<Result<Vec<_>, _>>()?;
    writeln!(
        out,
        "M[rounds],lambda[bits/bit],p_err[prob],beta[bits],m[bits],ell[bits],rate[ell/M],error[prob],reason"
    )?;
    let mut any = false;
    for row in rows {
        let head = format!("{},{},{}", row.m_total, opt_num(row.lambda), num(row.p_err));
        match row.result {
            Ok((beta, m, ell, error)) => {
                any = true;
                let rate = num(ell as f64 / row.m_total as f64);
                writeln!(out, "{head},{beta},{m},{ell},{rate},{},", num(error))?;
            }
            Err(reason) => writeln!(out, "{head},,,,,,\"{}\"", reason.replace('"', "'"))?,
        }
    }
    Ok(if any { Status::Ok } else { Status::Infeasible })
}

fn cmd_decoy(cfg: &Config, measured: bool, seed: u64, out: &mut dyn Write) -> Result<Status, CliError> {
    let point = decoy_point(cfg, true)?;
    if point.family != SourceFamily::Wcp {
        return Err(CliError::Usage("decoy estimation needs source.type = wcp".into()));
    }
    let ch = characterization(&point)?;
    let est = decoy_estimate(&point, &ch)?;
    let rep = lambda_rate(&ch, &point.storage()?, &point.security()?, Some(&est))?;
    writeln!(out, "quantity,value")?;
    for (name, q) in ["q_vac", "q_mu_hat", "q_mu"].iter().zip(est.q_h) {
        writeln!(out, "{name},{}", num(q))?;
    }
    writeln!(out, "p_h1_click,{}", num(ch.p_h1_click))?;
    writeln!(out, "tau_asymptotic,{}", num(est.tau_asymptotic))?;
    writeln!(out, "tau,{}", num(est.tau))?;
    writeln!(out, "informative,{}", est.informative)?;
    writeln!(out, "r1_max,{}", num(rep.r1_max))?;
    writeln!(out, "lambda,{}", opt_num(rep.lambda))?;
    writeln!(out, "eps,{}", num(rep.eps))?;
    if measured {
        let dcfg = DecoyConfig {
            rounds: cfg.protocol.rounds,
            mu_hat: est.settings[1],
            mu: est.settings[2],
            eps_interval: point.eps_interval,
        };
        let run = run_wsee_decoy(&dcfg, &point.detector()?, &mut HonestBob, &mut Transport::new(), &mut SessionRng::new(seed))?;
        for (name, q) in ["q_vac_measured", "q_mu_hat_measured", "q_mu_measured"].iter().zip(run.gains_measured) {
            writeln!(out, "{name},{}", num(q))?;
        }
        if run.counts.iter().all(|&c| c > 0) {
            let z: Vec<f64> = run
                .counts
                .iter()
                .map(|&c| chernoff_halfwidth(c, point.eps_interval))
                .collect::<Result<_, _>>()?;
            let q = run.gains_measured;
            let shifted = [q[0] + 2.0 * z[0], q[1] - 2.0 * z[1], q[2] + 2.0 * z[2]];
            writeln!(out, "tau_hat_measured,{}", num(tau_from_gains(dcfg.mu, dcfg.mu_hat, q)))?;
            writeln!(out, "tau_measured,{}", num(tau_from_gains(dcfg.mu, dcfg.mu_hat, shifted)))?;
        }
        writeln!(out, "aborted,{}", run.wsee.aborted.is_some())?;
    }
    Ok(if rep.secure { Status::Ok } else { Status::Infeasible })
}

#[derive(Debug, Default)]
struct RunStats {
    aborted: bool,
    m: usize,
    i_len: usize,
    errors: usize,
    recovered: Option<bool>,
}

fn code_for(cfg: &Config, ch: &SourceCharacterization) -> Result<LinearCode, CliError> {
    let beta = cfg.protocol.beta;
    Ok(match cfg.protocol.code {
        CodeChoice::Auto => LinearCode::for_error_rate(ch.p_err_conditioned, beta)?,
        CodeChoice::Trivial => LinearCode::trivial(beta),
        CodeChoice::Golay if beta.is_multiple_of(23) => LinearCode::golay23().repeat(beta / 23),
        CodeChoice::Golay => return Err(CliError::Usage(format!("Golay blocks need beta divisible by 23, got {beta}"))),
    })
}

fn wsee_stats(w: &WseeOutputs) -> RunStats {
    RunStats { aborted: w.aborted.is_some(), m: w.m(), i_len: w.bob_i.len(), errors: w.bit_errors(), recovered: None }
}

fn simulate_once(
    cfg: &Config,
    code: Option<&LinearCode>,
    seed: u64,
) -> Result<(RunStats, Transport), CliError> {
    let point = &cfg.point;
    let (src, det) = (point.source()?, point.detector()?);
    let mut t = Transport::new();
    let mut rng = SessionRng::new(seed);
    let wcfg = WseeConfig { rounds: cfg.protocol.rounds, eps_interval: point.eps_interval };
    let p = &cfg.protocol;
    let stats = match p.pipeline {
        Pipeline::Wsee => wsee_stats(&run_wsee(&wcfg, &src, &det, &mut HonestBob, &mut t, &mut rng)?),
        Pipeline::Decoy => {
            let mu_hat = point.mu_hat.ok_or_else(|| CliError::Usage("decoy pipeline needs source.mu_hat".into()))?;
            let dcfg = DecoyConfig { rounds: p.rounds, mu_hat, mu: point.mu, eps_interval: point.eps_interval };
            wsee_stats(&run_wsee_decoy(&dcfg, &det, &mut HonestBob, &mut t, &mut rng)?.wsee)
        }
        Pipeline::Frot | Pipeline::Ot => {
            let w = run_wsee(&wcfg, &src, &det, &mut HonestBob, &mut t, &mut rng)?;
            let mut stats = wsee_stats(&w);
            let code = code.expect("code is built for FROT pipelines");
            let (frot, _) = run_frot(&w, &FrotParams::new(p.beta, p.ell)?, code, &mut t, &mut rng)?;
            stats.aborted |= frot.aborted.is_some();
            stats.recovered = Some(if stats.aborted {
                false
            } else if p.pipeline == Pipeline::Frot {
                frot.recovered()
            } else {
                let m0: Vec<bool> = (0..p.ell).map(|_| rng.alice.gen()).collect();
                let m1: Vec<bool> = (0..p.ell).map(|_| rng.alice.gen()).collect();
                let choice = p.choice.unwrap_or_else(|| rng.bob.gen());
                let got = ot_from_frot(&frot, &m0, &m1, choice, &mut t)?;
                got == if choice { m1 } else { m0 }
            });
            stats
        }
    };
    Ok((stats, t))
}

fn cmd_simulate(cfg: &Config, seed: u64, out: &mut dyn Write) -> Result<(Status, String), CliError> {
    let p = &cfg.protocol;
    if p.runs == 0 || p.rounds == 0 {
        return Err(CliError::Usage("protocol.runs and protocol.rounds must be positive".into()));
    }
    let ch = characterization(&cfg.point)?;
    let code = match p.pipeline {
        Pipeline::Frot | Pipeline::Ot => Some(code_for(cfg, &ch)?),
        _ => None,
    };
    let results = (0..p.runs)
        .into_par_iter()
        .map(|r| simulate_once(cfg, code.as_ref(), seed.wrapping_add(r)))
        .collect::<Result<Vec<_>, _>>()?;
    let dump = results[0].1.dump();
    let stats: Vec<&RunStats> = results.iter().map(|(s, _)| s).collect();
    let runs = stats.len() as f64;
    let aborts = stats.iter().filter(|s| s.aborted).count();
    let m: usize = stats.iter().map(|s| s.m).sum();
    let i_len: usize = stats.iter().map(|s| s.i_len).sum();
    let errors: usize = stats.iter().map(|s| s.errors).sum();

    let pipeline = format!("{:?}", p.pipeline).to_lowercase();
    writeln!(out, "pipeline: {pipeline}")?;
    writeln!(out, "source: {}", cfg.point.source()?.label())?;
    writeln!(out, "seed: {seed}")?;
    writeln!(out, "runs: {}", p.runs)?;
    writeln!(out, "aborts: {aborts}")?;
    writeln!(out, "abort_rate: {}", num(aborts as f64 / runs))?;
    writeln!(out, "mean_m: {}", num(m as f64 / runs))?;
    writeln!(out, "mean_I: {}", num(i_len as f64 / runs))?;
    writeln!(out, "bit_errors: {errors}")?;
    let empirical = if i_len > 0 { errors as f64 / i_len as f64 } else { 0.0 };
    writeln!(out, "empirical_p_err: {}", num(empirical))?;
    writeln!(out, "expected_p_err: {}", num(ch.p_err_conditioned))?;
    if let Some(code) = &code {
        writeln!(out, "code: {}", code.name())?;
        let ok = stats.iter().filter(|s| s.recovered == Some(true)).count();
        writeln!(out, "recovered_runs: {ok}/{}", p.runs)?;
        writeln!(out, "recovered: {}", ok == stats.len())?;
    }
    Ok((Status::Ok, dump))
}
