use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ffcomp::config::ExperimentConfig;
use ffcomp::csvio;
use ffcomp_core::log::Channel;
use ffcomp_core::sim::run;

fn ffcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffcomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Small but complete training setup so CLI round trips stay fast.
const QUICK: &str = "seed = 3
[collection]
target_samples = 700
[training]
epochs = 15
restarts = 2
small_samples = 120
";

#[test]
fn shipped_default_config_matches_built_in_defaults() {
    let cfg = ExperimentConfig::load(&repo_file("configs/default.toml"), None).unwrap();
    let mut expected = ExperimentConfig::default();
    expected.base_dir = cfg.base_dir.clone();
    assert_eq!(cfg, expected);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        "seed = 1\n[plant]\nactuator_delay = 0.07\n",
        "[plant]\nactuator_delay = 0.1\n",
        "seed = 1\n[compensator]\nkp = -1.0\n",
        "seed = 1\n[predictor]\nmodels = [\"missing.json\"]\n",
        "seed = 1\nnot_a_field = true\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.toml"), text);
        let o = ffcomp(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = ffcomp(&["simulate", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn divergence_exits_with_3_and_keeps_partial_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "div.toml",
        "seed = 1
[scenario]
speed_kmh = 80.0
lookahead = 2.0
calibrate_disturbance = false
[scenario.path]
kind = \"slalom\"
amplitude = 4.0
wavelength = 30.0
length = 300.0
[plant]
actuator_delay = 0.4
",
    );
    let out = dir.path().join("out");
    let o = ffcomp(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let log = csvio::read_log(&out.join("log.csv")).unwrap();
    assert!(log.len() > 10);
    let metrics = std::fs::read_to_string(out.join("metrics.toml")).unwrap();
    assert!(metrics.contains("terminated = \"off_path\""));
}

#[test]
fn simulate_log_round_trips_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "sim.toml", "seed = 11\n");
    let out = dir.path().join("out");
    let o = ffcomp(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let read = csvio::read_log(&out.join("log.csv")).unwrap();

    let cfg = ExperimentConfig::load(&cfg_path, None).unwrap();
    let direct = run(&ffcomp::pipeline::scenario(&cfg).unwrap()).unwrap();
    assert_eq!(read.len(), direct.log.len());
    for c in Channel::ALL {
        assert_eq!(read.channel(c), direct.log.channel(c), "{}", c.name());
    }
    let header = std::fs::read_to_string(out.join("log.csv")).unwrap();
    assert!(header.starts_with("t [s],x [m],y [m],psi [rad],v [km/h]"));
    let path = csvio::read_path(&out.join("path.csv")).unwrap();
    assert!((path.total_length() - 200.0).abs() < 1e-9);
}

#[test]
fn custom_path_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("x [m],y [m]\n");
    for i in 0..=40 {
        let x = i as f64 * 2.5;
        rows.push_str(&format!("{x},{}\n", 2.0 * (x / 15.0).sin()));
    }
    write(dir.path(), "wave.csv", &rows);
    let cfg = write(
        dir.path(),
        "c.toml",
        "seed = 2\n[scenario.path]\nkind = \"csv\"\nfile = \"wave.csv\"\n",
    );
    let out = dir.path().join("out");
    let o = ffcomp(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let exported = csvio::read_path(&out.join("path.csv")).unwrap();
    let again = csvio::read_path(&dir.path().join("wave.csv")).unwrap();
    assert_eq!(exported, again);
}

#[test]
fn delay_and_pca_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 5\n");
    let out = dir.path().join("out");
    let o = ffcomp(&["delay", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("delay = 0.20 s"));

    let o = ffcomp(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let log = out.join("log.csv");
    let o = ffcomp(&[
        "pca",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("pca_report.txt")).unwrap();
    assert!(report.contains("Cr (%)"));
    assert!(report.contains("selected features:"));
}

#[test]
fn train_then_evaluate_with_saved_models() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "quick.toml", QUICK);
    let out = dir.path().join("train");
    let o = ffcomp(&["train", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let accuracy = std::fs::read_to_string(out.join("accuracy.csv")).unwrap();
    assert_eq!(accuracy.lines().count(), 4);
    let models: Vec<String> = (0..2)
        .map(|i| out.join(format!("models/tdnn_{i:02}.json")).to_str().unwrap().to_string())
        .collect();
    let model = ffcomp::model_io::load(Path::new(&models[0])).unwrap();
    assert_eq!(model.horizon_steps, 4);

    let eval = dir.path().join("eval");
    let mut args = vec!["evaluate", "--config", cfg.to_str().unwrap(), "--out", eval.to_str().unwrap()];
    for m in &models {
        args.push("--model");
        args.push(m);
    }
    let o = ffcomp(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = std::fs::read_to_string(eval.join("metrics.toml")).unwrap();
    assert!(metrics.starts_with("# compensator: kp = 0.6, ki = 0.1, kd = 0,"));
    assert!(metrics.contains("[improvement]"));
    let compensated = csvio::read_log(&eval.join("compensated.csv")).unwrap();
    assert!(compensated.channel(Channel::U1).iter().any(|u| *u != 0.0));

    let off = dir.path().join("off");
    args[4] = off.to_str().unwrap();
    args.push("--no-compensator");
    let o = ffcomp(&args);
    assert!(o.status.success());
    assert!(!off.join("compensated.csv").exists());
    let metrics = std::fs::read_to_string(off.join("metrics.toml")).unwrap();
    assert!(metrics.starts_with("# compensator: off"));
}

#[test]
fn evaluate_without_models_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ffcomp(&["evaluate", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
