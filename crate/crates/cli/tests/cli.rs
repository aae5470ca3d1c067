use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqed_cli::config::DEFAULT_CONFIG;
use cqed_core::budget::t1_limit_from_seam;
use cqed_core::units::hz_to_angular;
use cqed_core::verify::SEAM_TABLE;
use serde_json::Value;

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn design_reports_couplings_and_transmon() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cqed(&["design", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(tmp.path().join("design.json"));
    let t = &r["transmon"];
    let ratio = t["ej_over_ec"].as_f64().unwrap();
    assert!((191.0..=193.0).contains(&ratio), "{ratio}");
    assert_eq!(t["transmon_regime"], Value::Bool(true));
    let g: Vec<(String, f64)> = r["couplers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["cavity"].as_str().unwrap().to_string(), c["g_hz"].as_f64().unwrap()))
        .collect();
    assert_eq!(g[0].0, "storage");
    assert!((g[0].1 / 1e6 - 49.0).abs() < 0.5, "{g:?}");
    assert_eq!(g[1].0, "readout");
    assert!((g[1].1 / 1e6 - 38.0).abs() < 0.5, "{g:?}");
    // Measured shift -1.17 MHz at -2.03 GHz back to g.
    let gm = r["couplers"][0]["g_from_measured_chi_hz"].as_f64().unwrap();
    assert!(rel(gm, 48.7e6) < 0.01, "{gm}");
}

#[test]
fn empty_circuit_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[circuit]\n");
    let o = cqed(&["design", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["e_j", "e_c", "couplers"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn unknown_config_key_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &DEFAULT_CONFIG.replace("t2_echo", "t2_ecko"));
    let o = cqed(&["design", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t2_ecko"), "{}", stderr(&o));
}

#[test]
fn budget_reproduces_seam_catalogue_and_channels() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cqed(&["budget", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = read_json(tmp.path().join("budget.json"));
    assert_eq!(stdout, r);
    let seams = r["seams"].as_array().unwrap();
    assert_eq!(seams.len(), SEAM_TABLE.len());
    let (wq, wmu) = (hz_to_angular(7.3e9), hz_to_angular(9.25e9));
    for (s, (label, yq, ymu, _, _, g)) in seams.iter().zip(SEAM_TABLE) {
        assert_eq!(s["label"], label);
        let tq = s["t1_limit"]["qubit"].as_f64().unwrap();
        let tmu = s["t1_limit"]["storage"].as_f64().unwrap();
        assert!(rel(tq, t1_limit_from_seam(yq, g, wq).unwrap()) < 1e-12);
        assert!(rel(tmu, t1_limit_from_seam(ymu, g, wmu).unwrap()) < 1e-12);
    }
    // Spot values: In/In storage 108 us, 3x3 mm square 17 / 42 us.
    assert!((seams[6]["t1_limit"]["storage"].as_f64().unwrap() * 1e6 - 108.0).abs() <= 1.0);
    assert!((seams[3]["t1_limit"]["qubit"].as_f64().unwrap() * 1e6 - 17.0).abs() <= 1.0);
    assert!((seams[3]["t1_limit"]["storage"].as_f64().unwrap() * 1e6 - 42.0).abs() <= 1.0);
    // 1 / (1/100 + 1/40) us
    let storage = r["combined_t1"]["storage"].as_f64().unwrap();
    assert!((storage - 200.0e-6 / 7.0).abs() < 1e-12, "{storage}");
    let purcell = r["purcell"]["t1_limit"].as_f64().unwrap();
    assert!((90e-6..110e-6).contains(&purcell), "{purcell}");
}

#[test]
fn single_active_seam_is_its_own_total() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[[device.modes]]
label = "storage"
frequency = "9.25 GHz"
dim = 2

[[seams]]
label = "In/In perimeter"
g = "1e8 /Ohm m"
y = { storage = "15.96 /Ohm m" }
"#,
    );
    let o = cqed(&["budget", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(tmp.path().join("budget.json"));
    assert_eq!(r["combined_t1"]["storage"], r["seams"][0]["t1_limit"]["storage"]);
}

#[test]
fn simulate_revival_and_t1() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, key, want) in [("revival", "revival_period", 1.0 / 1.17e6), ("t1_decay", "T1", 6.4e-6)] {
        let o = cqed(&["simulate", name, "--out", &out_arg(tmp.path())]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let r = read_json(tmp.path().join(format!("{name}.json")));
        let got = r["summary"][key].as_f64().unwrap();
        assert!(rel(got, want) < 0.01, "{name}: {got}");
        assert_eq!(r["fit"]["converged"], Value::Bool(true));
        assert!(tmp.path().join(format!("{name}.csv")).exists());
    }
    let r = read_json(tmp.path().join("revival.json"));
    assert!((r["summary"]["revival_period"].as_f64().unwrap() * 1e6 - 0.855).abs() < 0.01);
}

#[test]
fn simulate_rejects_single_point_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let text = DEFAULT_CONFIG.replace(
        r#"grid = { start = "0 us", stop = "32 us", points = 101 }"#,
        r#"grid = { start = "0 us", stop = "32 us", points = 1 }"#,
    );
    assert_ne!(text, DEFAULT_CONFIG);
    let cfg = write_config(tmp.path(), &text);
    let o = cqed(&["simulate", "t1_decay", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("points"), "{}", stderr(&o));
}

#[test]
fn simulate_unknown_protocol_lists_names() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cqed(&["simulate", "rabi", "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("ramsey") && err.contains("stark_slope"), "{err}");
}

#[test]
fn fit_round_trip_matches_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cqed(&["simulate", "ramsey", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sim = read_json(tmp.path().join("ramsey.json"));
    let csv = tmp.path().join("ramsey.csv");
    let o = cqed(&["fit", csv.to_str().unwrap(), "damped_fringes"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit: Value = serde_json::from_slice(&o.stdout).unwrap();
    let params = sim["fit"]["params"].as_object().unwrap();
    assert_eq!(params.len(), 5);
    for (name, p) in params {
        let a = p["value"].as_f64().unwrap();
        let b = fit["params"][name]["value"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-30), "{name}: {a} vs {b}");
    }
}

#[test]
fn fit_exponential_on_synthetic_file() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("# x_unit: s\n# quantity: signal\nx,value\n");
    for i in 0..60 {
        let t = i as f64 * 1e-6;
        text.push_str(&format!("{t:e},{:e}\n", 0.8 * (-t / 12e-6).exp() + 0.1));
    }
    let path = tmp.path().join("decay.csv");
    std::fs::write(&path, text).unwrap();
    let out = tmp.path().join("fits");
    let o = cqed(&["fit", path.to_str().unwrap(), "exponential", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit = read_json(out.join("decay.exponential.json"));
    assert!(rel(fit["params"]["T"]["value"].as_f64().unwrap(), 12e-6) < 1e-6);
    assert_eq!(fit["params"]["T"]["unit"], "s");
}

#[test]
fn fit_unknown_model_lists_models() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("x.csv");
    std::fs::write(&path, "x,value\n0,1\n").unwrap();
    let o = cqed(&["fit", path.to_str().unwrap(), "gaussian"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("exponential") && err.contains("damped_fringes"), "{err}");
}

#[test]
fn fit_schema_error_names_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    std::fs::write(&path, "# x_unit: s\nx,value\n0,1\n1e-6,oops\n").unwrap();
    let o = cqed(&["fit", path.to_str().unwrap(), "exponential"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn unresolvable_fit_exits_one() {
    // One and a half periods: too few for a fringe fit, not an exponential.
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("# x_unit: s\nx,value\n");
    for i in 0..100 {
        let t = i as f64 * 1e-7;
        text.push_str(&format!("{t:e},{:e}\n", 0.5 + 0.5 * (2.0 * std::f64::consts::PI * 1.5 * t / 9.9e-6).sin()));
    }
    let path = tmp.path().join("slow.csv");
    std::fs::write(&path, text).unwrap();
    let o = cqed(&["fit", path.to_str().unwrap(), "damped_fringes"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

fn noisy_config(dir: &Path) -> String {
    let text = DEFAULT_CONFIG.replace("name = \"t1_decay\"\n", "name = \"t1_decay\"\nnoise = 0.02\n");
    assert_ne!(text, DEFAULT_CONFIG);
    write_config(dir, &text)
}

#[test]
fn seeded_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = noisy_config(tmp.path());
    let run = |sub: &str, seed: &str, jobs: &str| {
        let dir = tmp.path().join(sub);
        let o = cqed(&["simulate", "all", "--config", &cfg, "--out", &out_arg(&dir), "--seed", seed, "--jobs", jobs]);
        assert!(o.status.success(), "{}", stderr(&o));
        dir
    };
    let a = run("a", "7", "1");
    let b = run("b", "7", "4");
    let c = run("c", "8", "1");
    for name in ["t1_decay", "ramsey", "revival", "number_splitting", "stark_slope"] {
        let f = format!("{name}.json");
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{name}");
        assert_eq!(
            std::fs::read(a.join(format!("{name}.csv"))).unwrap(),
            std::fs::read(b.join(format!("{name}.csv"))).unwrap()
        );
    }
    assert_ne!(std::fs::read(a.join("t1_decay.json")).unwrap(), std::fs::read(c.join("t1_decay.json")).unwrap());
    let noisy = read_json(a.join("t1_decay.json"));
    assert!(rel(noisy["summary"]["T1"].as_f64().unwrap(), 6.4e-6) < 0.05);
}

#[test]
fn verify_reports_every_criterion() {
    let o = cqed(&["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = stdout.lines().filter(|l| l.starts_with("criterion")).collect();
    assert_eq!(lines.len(), 11, "{stdout}");
    assert!(lines.iter().all(|l| l.contains("PASS") || l.contains("FAIL")));
    let failed = lines.iter().filter(|l| l.contains("FAIL")).count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}

#[test]
fn bad_flag_is_input_error() {
    let o = cqed(&["simulate", "revival", "--seed", "minus-one"]);
    assert_eq!(o.status.code(), Some(2));
}
