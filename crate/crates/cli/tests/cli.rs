use nsm_core::sources::{characterize, DetectorModel, SourceModel};
use std::path::Path;
use std::process::{Command, Output};

fn nsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ideal(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "simulate",
        "--set",
        "source.type=ideal",
        "--set",
        "detector.eta=1",
        "--set",
        "detector.p_dark=0",
        "--set",
        "detector.e_det=0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_owned(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    nsm(&refs)
}

/// Parses the body of a region CSV into (x, y, secure) triples.
fn region_cells(out: &str) -> Vec<(f64, f64, bool)> {
    out.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), !f[4].is_empty())
        })
        .collect()
}

#[test]
fn params_table_matches_library() {
    let o = nsm(&["params"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13, "{text}");

    let det = DetectorModel::new(0.7, 0.85e-6, 0.033).unwrap();
    let ch = characterize(&SourceModel::wcp(0.3).unwrap(), &det).unwrap();
    let row = |name: &str| -> String {
        lines.iter().find(|l| l.starts_with(&format!("{name},"))).unwrap().split(',').nth(1).unwrap().to_string()
    };
    assert_eq!(row("p1_src"), format!("{:.8e}", ch.p1_src));
    assert_eq!(row("p_h1_click"), format!("{:.8e}", ch.p_h1_click));
    assert_eq!(row("p_err_conditioned"), format!("{:.8e}", ch.p_err_conditioned));
}

#[test]
fn pdc_params_list_every_photon_number() {
    let o = nsm(&["params", "--set", "source.type=pdc", "--set", "source.mu=0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("p_alice_valid,"));
    for n in 0..=40 {
        assert!(text.contains(&format!("pd_n_err[{n}],")), "missing n = {n}");
    }
}

#[test]
fn validation_errors_exit_with_two() {
    let o = nsm(&["params", "--set", "detector.eta=1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nsm(&["params", "--set", "detector.etta=0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nsm(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "[source]\nmu = 0.3\n\n[detector]\nefficiency = 0.7\n").unwrap();
    let o = nsm(&["params", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = nsm(&["params", "--config", "/nonexistent/nsm.conf"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_region_has_one_row() {
    let o = nsm(&["region", "--x", "eta:0.7:0.7:1", "--y", "mu:0.3:0.3:1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn region_shrinks_as_noise_parameter_grows() {
    let count = |nu: &str| {
        let o = nsm(&[
            "region",
            "--x",
            "eta:0.05:1:12",
            "--y",
            "mu:0.02:1:12",
            "--set",
            "storage.r=0.9",
            "--set",
            &format!("storage.nu={nu}"),
        ]);
        assert!(o.status.success());
        region_cells(&stdout(&o)).iter().filter(|c| c.2).count()
    };
    let counts: Vec<usize> = ["0.1", "0.25", "0.5"].iter().map(|nu| count(nu)).collect();
    assert!(counts[0] >= counts[1] && counts[1] >= counts[2], "{counts:?}");
    assert!(counts[0] > counts[2], "{counts:?}");
}

#[test]
fn r_nu_boundary_is_monotone() {
    let o = nsm(&["region", "--x", "r:0.05:0.95:10", "--y", "nu:0.05:1:10"]);
    assert!(o.status.success());
    let cells = region_cells(&stdout(&o));
    // For each r, the largest secure nu must not grow with r.
    let mut last = f64::INFINITY;
    for chunk in cells.chunks(10) {
        let best = chunk.iter().filter(|c| c.2).map(|c| c.1).fold(0.0, f64::max);
        assert!(best <= last, "r = {}: {best} > {last}", chunk[0].0);
        last = best;
    }
}

#[test]
fn region_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = nsm(&["region", "--x", "eta:0.1:1:6", "--y", "mu:0.05:0.6:6", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn otrate_spot_value() {
    let o = nsm(&["otrate", "--lambda", "0.2", "--beta", "25600", "--m", "1e6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap().split(',').next().unwrap(), "12499");
    assert!(text.contains("1.24990000e-2"));
}

#[test]
fn otrate_sweep_becomes_positive_for_large_m() {
    let o = nsm(&[
        "otrate",
        "--set",
        "security.omega=1000",
        "--set",
        "source.mu=0.15",
        "--set",
        "detector.eta=0.3",
        "--set",
        "storage.r=0.1",
        "--set",
        "storage.nu=0.1",
        "--m-from",
        "1e6",
        "--m-to",
        "1e14",
        "--points",
        "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rates: Vec<Option<f64>> =
        text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().ok()).collect();
    assert_eq!(rates.len(), 5);
    assert!(rates[0].is_none());
    assert!(rates[4].unwrap() > 0.0);
}

#[test]
fn infeasible_lambda_exits_with_three() {
    let o = nsm(&["lambda", "--set", "detector.eta=0.05", "--set", "storage.r=0.9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("lambda,\n"));
    let o = nsm(&["lambda"]);
    assert!(o.status.success());
}

#[test]
fn decoy_estimate_runs() {
    let o = nsm(&["decoy", "--set", "source.mu_hat=0.05"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("informative,true"));
    let o = nsm(&["decoy", "--measured", "--set", "source.mu_hat=0.05", "--set", "protocol.rounds=1e5"]);
    assert!(o.status.success());
    let o = nsm(&["decoy"]);
    assert_eq!(o.status.code(), Some(2), "decoy needs mu_hat");
}

#[test]
fn ideal_wsee_has_no_errors() {
    let o = run_owned(&ideal(&["--set", "protocol.rounds=1e4", "--seed", "1"]));
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bit_errors: 0\n"), "{text}");
    assert!(text.contains("aborts: 0\n"));
}

#[test]
fn noiseless_frot_recovers() {
    let o = run_owned(&ideal(&[
        "--set",
        "protocol.pipeline=frot",
        "--set",
        "protocol.rounds=256",
        "--set",
        "protocol.code=trivial",
        "--seed",
        "7",
    ]));
    assert!(o.status.success());
    assert!(stdout(&o).contains("recovered: true"), "{}", stdout(&o));
}

#[test]
fn ot_pipeline_recovers_over_many_runs() {
    let o = run_owned(&ideal(&[
        "--set",
        "protocol.pipeline=ot",
        "--set",
        "protocol.rounds=256",
        "--set",
        "protocol.runs=8",
        "--set",
        "protocol.code=trivial",
    ]));
    assert!(o.status.success());
    assert!(stdout(&o).contains("recovered_runs: 8/8"), "{}", stdout(&o));
}

fn transcript(dir: &Path, name: &str, seed: &str) -> Vec<u8> {
    let path = dir.join(name);
    let o = run_owned(&ideal(&[
        "--set",
        "protocol.pipeline=ot",
        "--set",
        "protocol.rounds=512",
        "--seed",
        seed,
        "--transcript",
        path.to_str().unwrap(),
    ]));
    assert!(o.status.success());
    std::fs::read(path).unwrap()
}

#[test]
fn same_seed_gives_identical_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let a = transcript(dir.path(), "a.txt", "11");
    let b = transcript(dir.path(), "b.txt", "11");
    let c = transcript(dir.path(), "c.txt", "12");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_ne!(a, c);
}
