use hoci_core::gaussian::{self, GaussianEnsembleSpec};
use hoci_core::{io, ChannelMatrix};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hoci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoci"))
        .args(args)
        .env_remove("HOCI_SEED")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gaussian_csv(dir: &Path, n: usize) -> PathBuf {
    let spec = GaussianEnsembleSpec::new(1.0, 1.0, 0.3, n).unwrap();
    let m = gaussian::sample_ensemble(&spec, 20_000, 4).unwrap();
    let path = dir.join("gauss.csv");
    io::write_channels_csv(&m, &path).unwrap();
    path
}

#[test]
fn gaussian_single_point() {
    let out = hoci(&["gaussian", "--sigma-n2-grid", "1", "--rho-grid", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("# "));
    let cells: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    // R2 = ½·log2(4/3) at σX² = σN² = 1, ρ = 0
    assert!((cells[5] - 0.5 * (4.0f64 / 3.0).log2()).abs() < 1e-12);
}

#[test]
fn discrete_check_passes_and_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("d.csv");
    let out = hoci(&[
        "discrete", "--n", "3", "--samples", "5000", "--samples-out", samples.to_str().unwrap(), "--seed", "2",
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["verification"]["passed"], Value::Bool(true));
    let m = io::ingest_csv(&samples, &Default::default()).unwrap();
    assert_eq!((m.num_channels(), m.num_samples()), (3, 5000));
}

#[test]
fn estimate_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = gaussian_csv(dir.path(), 4);
    let report = dir.path().join("r.json");
    let out = hoci(&["estimate", "--input", input.to_str().unwrap(), "--order", "4", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = io::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed.order, 4);
    assert_eq!(parsed.channels.len(), 4);
    let truth = gaussian::r3_lower(&GaussianEnsembleSpec::new(1.0, 1.0, 0.3, 4).unwrap()).as_f64();
    assert!((parsed.r3_lower.unwrap().bits() - truth).abs() < 0.03);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = gaussian_csv(dir.path(), 3);
    let args = ["estimate", "--input", input.to_str().unwrap()];
    let from_env = Command::new(env!("CARGO_BIN_EXE_hoci")).args(args).env("HOCI_SEED", "17").output().unwrap();
    let explicit = hoci(&[&args[..], &["--seed", "17"]].concat());
    assert_eq!(stdout_json(&from_env)["seed"], 17);
    assert_eq!(from_env.stdout, explicit.stdout);
    assert_eq!(stdout_json(&hoci(&args))["seed"], 0);
}

#[test]
fn non_finite_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut text = String::from("a,b\n");
    for t in 0..50 {
        text += &format!("{t},{}\n", if t == 20 { "nan".into() } else { format!("{}", t % 7) });
    }
    std::fs::write(&path, text).unwrap();
    let out = hoci(&["estimate", "--input", path.to_str().unwrap(), "--order", "2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[E_INGEST]"), "{err}");
    assert!(err.contains("line 22"), "{err}");
}

#[test]
fn sci_by_channel_name() {
    let dir = tempfile::tempdir().unwrap();
    let input = gaussian_csv(dir.path(), 3);
    let names = io::ingest_csv(&input, &Default::default()).unwrap().names().to_vec();
    let pair = format!("{},{}", names[2], names[0]);
    let doc = stdout_json(&hoci(&["sci", "--input", input.to_str().unwrap(), "--pair", &pair]));
    assert_eq!(doc["descriptor"]["partner_channel"], 2);
    assert_eq!(doc["descriptor"]["base_channel"], 0);
    assert_eq!(doc["verification"]["passed"], Value::Bool(true));
    let bad = hoci(&["sci", "--input", input.to_str().unwrap(), "--pair", "0,0"]);
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error[E_CONFIG]"));
}

#[test]
fn lagscan_finds_a_planted_delay() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GaussianEnsembleSpec::new(1.0, 0.01, 0.0, 2).unwrap();
    let src = gaussian::sample_ensemble(&spec, 3_000, 8).unwrap();
    let r = src.channel(0).values().to_vec();
    let lag = 240;
    let delayed: Vec<f64> = (0..r.len()).map(|t| if t >= lag { r[t - lag] } else { src.channel(1).values()[t] }).collect();
    let m = ChannelMatrix::new(vec!["ref".into(), "late".into()], vec![r, delayed], None).unwrap();
    let path = dir.path().join("lag.csv");
    io::write_channels_csv(&m, &path).unwrap();
    let doc = stdout_json(&hoci(&["lagscan", "--input", path.to_str().unwrap(), "--sample-rate", "1000", "--ref-channel", "ref"]));
    let res = &doc["channels"][0]["result"];
    assert_eq!(res["lag_samples"].as_i64().unwrap().abs(), lag as i64);
    assert!(res["abs_corr"].as_f64().unwrap() > 0.9);
    let missing = hoci(&["lagscan", "--input", path.to_str().unwrap(), "--ref-channel", "ref"]);
    assert!(!missing.status.success());
}
