use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn mdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    mdlab(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_hash(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().strip_prefix("# config_hash=").unwrap().to_string()
}

fn simulate_config() -> Value {
    json!({
        "dim": 1, "mass": 0.5, "eps": 0.1, "t_max": 0.2, "potential_mode": "zero",
        "grid": {"half_width": 2.56, "n": 1024}
    })
}

#[test]
fn simulate_writes_manifest_and_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &simulate_config());
    let out = tmp.path().join("out");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("charge drift"));

    let manifest = read_json(&out.join("manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(manifest["charge_drift"].as_f64().unwrap() < 1e-6);
    for f in manifest["files"].as_array().unwrap() {
        let name = f.as_str().unwrap();
        assert!(out.join(name).exists(), "{name}");
        if name.ends_with(".csv") {
            assert_eq!(csv_hash(&out.join(name)), hash);
        }
    }
    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    // hash, eps, header, 41 levels
    assert_eq!(diag.lines().count(), 3 + 41);
    assert!(diag.lines().nth(2).unwrap().starts_with("t,charge,l1_u,l1_v"));
}

#[test]
fn simulate_oracle_matches_cone_charge() {
    let tmp = TempDir::new().unwrap();
    let mut c = simulate_config();
    c["probes"] = json!([[0.2, 0.0], [0.1, 0.05]]);
    let cfg = write_config(tmp.path(), "c.json", &c);
    let out = tmp.path().join("out");
    let o = run("simulate", &cfg, &out, &["--oracle"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let oracle = &read_json(&out.join("manifest.json"))["oracle"];
    let h: f64 = 2.0 * 2.56 / 1024.0;
    assert_eq!(oracle["rows"].as_array().unwrap().len(), 2);
    let dev = oracle["max_deviation"].as_f64().unwrap();
    assert!(dev > 0.0 && dev < 20.0 * h * h, "{dev}");
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let mut dt = simulate_config();
    dt["grid"]["dt"] = json!(0.01);
    let mut unknown = simulate_config();
    unknown["colour"] = json!("red");
    let mut no_mass = simulate_config();
    no_mass.as_object_mut().unwrap().remove("mass");
    let mut both = simulate_config();
    both["eps_list"] = json!([0.1, 0.05]);
    let mut wide = simulate_config();
    wide["grid"]["half_width"] = json!(2.0);
    for (name, c) in [("dt", dt), ("unknown", unknown), ("no_mass", no_mass), ("both", both), ("wide", wide)] {
        let cfg = write_config(tmp.path(), &format!("{name}.json"), &c);
        let o = run("simulate", &cfg, &out, &[]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"), "{name}");
    }
    assert!(!out.exists());
    let o = mdlab(&["simulate", "--config", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solver_abort_exits_with_three() {
    // randomized linear data reach the edge of this short grid
    let tmp = TempDir::new().unwrap();
    let c = json!({
        "dim": 1, "mass": 0.0, "eps": 0.1, "t_max": 0.5, "potential_mode": "zero",
        "grid": {"half_width": 1.2, "n": 240}, "seed": 3,
        "verify": {"suites": ["energy"], "count": 5}
    });
    let cfg = write_config(tmp.path(), "c.json", &c);
    let o = run("verify", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary"));
}

fn campaign(dim: u8, mass: f64) -> Value {
    json!({
        "dim": dim, "mass": mass,
        "eps_list": [0.01, 0.0031622776601683794, 0.001],
        "t_max": 0.05, "potential_mode": "zero",
        "experiments": ["claim1", "claim2", "claim3", "gauss"]
    })
}

#[test]
fn sweep_campaign_is_reproducible_and_rechecks() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &campaign(2, 1.0));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = run("sweep", &cfg, &a, &["--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run("sweep", &cfg, &b, &[])), 0);
    let summary = fs::read(a.join("summary.json")).unwrap();
    assert_eq!(summary, fs::read(b.join("summary.json")).unwrap());

    let s = read_json(&a.join("summary.json"));
    assert_eq!(s["pass"], json!(true));
    for p in s["verdicts"]["claim3"]["probes"].as_array().unwrap() {
        let (t, x) = (p["t"].as_f64().unwrap(), p["x"].as_f64().unwrap());
        assert!((p["slope_bound"].as_f64().unwrap() - (x + t) / 8.0).abs() < 1e-15);
        assert!(p["slope"].as_f64().unwrap() >= p["slope_bound"].as_f64().unwrap());
    }
    for k in 0..3 {
        assert!(a.join(format!("run_{k:02}_diagnostics.csv")).exists());
    }
    let plot = fs::read_to_string(a.join("plot_a0_probe_00.csv")).unwrap();
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert_eq!(csv_hash(&a.join("plot_gauss_pairing.csv")), s["config_hash"].as_str().unwrap());

    let o = mdlab(&["recheck", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    // a tampered verdict no longer matches the persisted runs
    let mut bad = s.clone();
    bad["verdicts"]["claim3"]["c_q"] = json!(123.0);
    fs::write(a.join("summary.json"), serde_json::to_string(&bad).unwrap()).unwrap();
    assert_eq!(code(&mdlab(&["recheck", "--out", a.to_str().unwrap()])), 4);
}

#[test]
fn sweep_guards_and_failing_verdicts() {
    let tmp = TempDir::new().unwrap();
    let mut long = campaign(2, 1.0);
    long["t_max"] = json!(0.4);
    long["experiments"] = json!(["claim2"]);
    long["probes"] = json!([]);
    let cfg = write_config(tmp.path(), "long.json", &long);
    let o = run("sweep", &cfg, &tmp.path().join("long"), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("6 (M + 1) T < 1"));

    let mut constrained = campaign(2, 0.0);
    constrained["potential_mode"] = json!("constrained");
    constrained["experiments"] = json!(["claim3"]);
    let cfg = write_config(tmp.path(), "cons.json", &constrained);
    assert_eq!(code(&run("sweep", &cfg, &tmp.path().join("cons"), &[])), 2);

    // at eps = 0.1 the off-centre pairing has not settled
    let gauss = json!({
        "dim": 1, "mass": 0.0, "eps_list": [0.1, 0.05, 0.025], "t_max": 0.05,
        "potential_mode": "zero", "experiments": ["gauss"]
    });
    let cfg = write_config(tmp.path(), "gauss.json", &gauss);
    let out = tmp.path().join("gauss");
    let o = run("sweep", &cfg, &out, &[]);
    assert_eq!(code(&o), 4);
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["verdicts"]["gauss"]["off_centre_pass"], json!(false));
    assert!(!out.join("results.json").exists());
    assert_eq!(code(&mdlab(&["recheck", "--out", out.to_str().unwrap()])), 0);
}

fn verify_config(suites: Value) -> Value {
    json!({
        "dim": 2, "mass": 1.0, "eps": 0.1, "t_max": 0.1, "potential_mode": "zero",
        "grid": {"half_width": 2.56, "n": 1024, "dt": 0.005},
        "verify": {"suites": suites, "count": 40, "refinement_seeds": [20, 23, 38], "bootstrap_rho": 0.5}
    })
}

#[test]
fn verify_runs_every_suite() {
    let tmp = TempDir::new().unwrap();
    let suites = json!(["energy", "run_energy", "wave", "nullform", "gronwall", "bootstrap", "bilinear"]);
    let cfg = write_config(tmp.path(), "c.json", &verify_config(suites));
    let out = tmp.path().join("out");
    let o = run("verify", &cfg, &out, &["--seed", "42"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("verify_report.json"));
    let entries = r["suites"].as_array().unwrap();
    assert_eq!(entries.len(), 7);
    let count = |i: usize| entries[i]["reports"].as_array().unwrap().len();
    assert_eq!((count(0), count(1), count(2), count(3)), (40, 1, 160, 40));
    assert_eq!(count(5), 2);
    for row in r["refinement"].as_array().unwrap() {
        let slack: Vec<f64> = row["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x["report"]["slack_factor"].as_f64().unwrap())
            .collect();
        assert!(slack.windows(2).all(|w| w[1] < w[0]) && slack[2] < 1.06, "{slack:?}");
    }
    assert!(!out.join("failures").exists());
    assert_eq!(code(&mdlab(&["recheck", "--out", out.to_str().unwrap()])), 0);

    // seeds come from the flag; without one the randomized suites refuse to run
    let o = run("verify", &cfg, &tmp.path().join("noseed"), &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_seed_changes_instances_and_hash() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &verify_config(json!(["nullform"])));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run("verify", &cfg, &a, &["--seed", "1"])), 0);
    assert_eq!(code(&run("verify", &cfg, &b, &["--seed", "2"])), 0);
    let (ra, rb) = (read_json(&a.join("verify_report.json")), read_json(&b.join("verify_report.json")));
    assert_ne!(ra["config_hash"], rb["config_hash"]);
    assert_ne!(ra["suites"][0]["reports"], rb["suites"][0]["reports"]);
}

#[test]
fn bootstrap_guard_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let mut c = verify_config(json!(["bootstrap"]));
    // 2 (M + 1) T = 1.2
    c["t_max"] = json!(0.3);
    let cfg = write_config(tmp.path(), "c.json", &c);
    assert_eq!(code(&run("verify", &cfg, &tmp.path().join("out"), &[])), 2);
}

#[test]
fn norms_report_profile_growth() {
    let tmp = TempDir::new().unwrap();
    let c = json!({
        "dim": 2, "mass": 0.0, "eps_list": [0.04, 0.02, 0.01], "t_max": 0.0, "potential_mode": "zero",
        "grid": {"half_width": 2.2, "n": 88000},
        "norms": {"p": [1.0, 2.0], "s": [-0.5]}
    });
    let cfg = write_config(tmp.path(), "c.json", &c);
    let out = tmp.path().join("out");
    let o = run("norms", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_json(&out.join("norms.json"))["rows"].as_array().unwrap().clone();
    let charge = |k: usize| rows[k]["charge"].as_f64().unwrap();
    let l1 = |k: usize| rows[k]["lp"][0][1].as_f64().unwrap();
    // the charge grows by about 2 log 2 per halving; the L^1 norm converges
    // with increments shrinking like sqrt(eps)
    for k in 0..2 {
        assert!((charge(k + 1) - charge(k) - 2.0 * std::f64::consts::LN_2).abs() < 0.05);
    }
    let ratio = (l1(2) - l1(1)) / (l1(1) - l1(0));
    assert!((ratio - 0.5f64.sqrt()).abs() < 0.02, "{ratio}");
    assert!(out.join("profile_02.csv").exists());
}
