use std::path::Path;
use std::process::{Command, Output};

fn photonq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photonq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV with leading comments, keyed by the header line.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = table(text);
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn output_is_deterministic() {
    let args = [
        "rates",
        "--kappa",
        "0.5",
        "--profile",
        "exp:1.5",
        "--delta0",
        "1.5",
        "--points",
        "301",
    ];
    let a = photonq(&args);
    let b = photonq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn header_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let o = photonq(&[
        "coefficients",
        "--kappa",
        "0.3",
        "--delta0",
        "-1.25",
        "--profile",
        "exp:2.5",
        "--t-max",
        "6",
        "--points",
        "121",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = photonq(&["coefficients", "--config", first.to_str().unwrap()]);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(std::fs::read(&first).unwrap(), again.stdout);
}

#[test]
fn flags_override_a_settings_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "kappa = 0.3\npoints = 11; t_max = 2\n").unwrap();
    let o = photonq(&[
        "coefficients",
        "--config",
        cfg.to_str().unwrap(),
        "--kappa",
        "0.6",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# kappa = 0.6\n"));
    assert!(text.contains("# t_max = 2; points = 11\n"));
}

#[test]
fn invalid_input_exits_2_naming_the_field() {
    for (args, field) in [
        (vec!["rates", "--kappa", "1.5"], "kappa"),
        (vec!["simulate", "--pe0", "-0.1"], "pe0"),
        (vec!["simulate", "--profile", "square:1"], "profile"),
        (vec!["rates", "--points", "1"], "points"),
        (
            vec!["coefficients", "--profile", "zero", "--oracle"],
            "oracle",
        ),
        (vec!["optimal-pulse", "--horizon", "-1"], "horizon"),
        (vec!["validate", "slow"], "level"),
    ] {
        let o = photonq(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn solver_failure_exits_3() {
    let o = photonq(&[
        "coefficients",
        "--profile",
        "exp:1",
        "--points",
        "3",
        "--rel-tol",
        "1e-100",
        "--abs-tol",
        "1e-100",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("solver failed"));
}

#[test]
fn free_decay_without_a_photon() {
    let o = photonq(&[
        "simulate",
        "--profile",
        "zero",
        "--pe0",
        "0.7",
        "--points",
        "101",
        "--t-max",
        "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let t = column(&text, "t");
    let pe = column(&text, "pe");
    for (t, pe) in t.iter().zip(&pe) {
        assert!((pe - 0.7 * (-t).exp()).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn oracle_flag_reports_small_deviation() {
    let o = photonq(&[
        "simulate",
        "--profile",
        "exp:9.5",
        "--pe0",
        "0.5",
        "--re-coh0",
        "0.3",
        "--points",
        "301",
        "--oracle",
    ]);
    assert!(o.status.success());
    let err = stderr(&o);
    let value: f64 = err.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(value < 1e-7, "{err}");
}

#[test]
fn simulate_writes_companion_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = photonq(&[
        "simulate",
        "--points",
        "201",
        "--with",
        "rates,witness",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("run.rates.csv").exists());
    assert!(json(&dir.path().join("run.witness.json"))["blp"]["verdict"].is_boolean());
    assert_eq!(
        photonq(&["simulate", "--with", "rates"]).status.code(),
        Some(2)
    );
}

fn witness(args: &[&str]) -> serde_json::Value {
    let o = photonq(&[&["witness"], args].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn witness_verdicts() {
    let detuned = witness(&["--profile", "exp:1.5", "--delta0", "3"]);
    assert_eq!(detuned["blp"]["verdict"], false);

    let regular = witness(&["--profile", "exp:9.5"]);
    assert_eq!(regular["blp"]["verdict"], true);
    assert_eq!(regular["eternal_nm"]["verdict"], true);
    assert_eq!(regular["cp_divisible"]["verdict"], false);

    let free = witness(&["--profile", "zero"]);
    for key in ["cp_divisible", "p_divisible", "blp", "geometric"] {
        assert_eq!(free[key]["verdict"], true, "{key}");
    }
    assert_eq!(free["eternal_nm"]["verdict"], false);
    assert_eq!(
        free["header"][0],
        "photonq 0.1.0 witness --eps-sing 1e-09 --tol 1e-08"
    );
}

#[test]
fn figures() {
    let o = photonq(&["figure", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig2-left"));

    let o = photonq(&["figure", "fig2-left", "--points", "301"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["B", "C"] {
        let v = column(&text, name);
        assert!(v.iter().all(|x| *x > 0.0), "{name}");
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{name}");
    }
    let (header, _) = table(&text);
    assert_eq!(header, ["t", "A", "B", "C", "Pe"]);

    // The rates diverge where B crosses zero.
    let o = photonq(&["figure", "fig3-right", "--points", "1501"]);
    let gm = column(&stdout(&o), "gamma_minus");
    assert!(gm.iter().any(|g| g.abs() > 100.0));
}

#[test]
fn optimal_pulse_samples() {
    let o = photonq(&[
        "optimal-pulse",
        "--horizon",
        "2",
        "--kappa",
        "0.5",
        "--points",
        "21",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# profile = optimal:2\n"));
    let t = column(&text, "t");
    assert_eq!((t.len(), t[20]), (21, 2.0));
    let re = column(&text, "re");
    assert!(re.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn sweep_writes_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = photonq(&[
        "sweep",
        "--vary",
        "kappa=0.25:1:4",
        "--vary",
        "alpha=1:9.5:2",
        "--what",
        "witness",
        "--points",
        "301",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let index = json(&dir.path().join("index.json"));
    let entries = index.as_array().unwrap();
    assert_eq!(entries.len(), 8);
    for e in entries {
        assert_eq!(e["status"], "ok");
        let doc = json(&dir.path().join(e["file"].as_str().unwrap()));
        assert!(doc["header"][4]
            .as_str()
            .unwrap()
            .starts_with("profile = exp:"));
    }
    assert_eq!(entries[7]["values"]["kappa"], 1.0);
    assert_eq!(entries[7]["values"]["alpha"], 9.5);

    let bad = photonq(&[
        "sweep",
        "--vary",
        "kappa=0.5:1.5:3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn quick_validation_passes() {
    let o = photonq(&["validate", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}
