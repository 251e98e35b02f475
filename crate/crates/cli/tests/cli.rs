use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ezgames(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ezgames")).args(args).output().expect("run ezgames")
}

fn run(args: &[&str], out: &Path) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    ezgames(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn solve_ne_writes_certified_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-ne", "--input", fixture("two_agents.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&tmp.path().join("equilibrium.json"));
    assert_eq!(r["certified"], true);
    let res = &r["report"]["residuals"];
    for key in ["fixed_point_pi", "fixed_point_c", "consumption_identity"] {
        assert!(res[key].as_f64().unwrap().is_finite(), "{key}");
    }
    let csv = fs::read_to_string(tmp.path().join("consumption.csv")).unwrap();
    assert!(csv.starts_with("agent,t,c\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 401);
}

#[test]
fn unit_risk_aversion_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-ne", "--input", fixture("unit_gamma.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parameter regime"), "{}", stderr(&o));
}

#[test]
fn empty_agent_list_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-ne", "--input", fixture("no_agents.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_input_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-ne", "--input", "/nonexistent/game.json"], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_mfg_reports_consistency() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-mfg", "--input", fixture("two_atoms.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&tmp.path().join("equilibrium.json"));
    assert_eq!(r["certified"], true);
    let m = &r["report"]["residuals"]["mfg_consistency"];
    for key in ["m_hat", "b_hat", "sigma_hat", "mu_hat"] {
        assert!(m[key].as_f64().unwrap() <= 1e-10, "{key}");
    }
}

#[test]
fn single_atom_mfg_solves() {
    let tmp = tempfile::tempdir().unwrap();
    let game = write(
        tmp.path(),
        "one.json",
        r#"{"horizon": {"T": 2.0, "grid_n": 100}, "mfg_atoms": [{"weight": 1.0, "type":
            {"x0": 1, "mu": 0.05, "nu": 0.1, "sigma": 0.2, "eta": 0.1, "gamma": 2,
             "delta": 1.5, "epsilon": 1, "theta": 0.5}}]}"#,
    );
    let o = run(&["solve-mfg", "--input", game.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn weights_not_summing_to_one_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve-mfg", "--input", fixture("bad_weights.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_passes_on_equilibrium_and_fails_on_perturbation() {
    let tmp = tempfile::tempdir().unwrap();
    let game = fixture("two_agents.json");
    let game = game.to_str().unwrap();
    let o = run(&["verify", "--input", game], &tmp.path().join("v"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&tmp.path().join("v/verification.json"));
    assert_eq!(v["all_pass"], true);

    let o = run(&["solve-ne", "--input", game], &tmp.path().join("ne"));
    assert_eq!(code(&o), 0);
    let mut r = json(&tmp.path().join("ne/equilibrium.json"));
    let strategies = r["report"]["strategies"].as_array_mut().unwrap();
    let pi = strategies[0]["pi"].as_f64().unwrap();
    strategies[0]["pi"] = Value::from(pi + 0.2);
    let perturbed = write(tmp.path(), "perturbed.json", &serde_json::to_string(&r).unwrap());

    let o =
        run(&["verify", "--input", game, "--strategies", perturbed.to_str().unwrap()], &tmp.path().join("p"));
    assert_eq!(code(&o), 4);
    let v = json(&tmp.path().join("p/verification.json"));
    let checks = v["profiles"][0]["checks"].as_array().unwrap();
    let scan = checks.iter().find(|c| c["check"] == "deviation_scan" && c["member"] == 0).unwrap();
    assert_eq!(scan["pass"], false);
}

#[test]
fn verify_runs_monte_carlo_only_for_time_additive_agents() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "verify",
            "--input",
            fixture("time_additive.json").to_str().unwrap(),
            "--paths",
            "20000",
            "--seed",
            "3",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&tmp.path().join("verification.json"));
    let mc = v["profiles"][0]["monte_carlo"].as_array().unwrap();
    assert_eq!(mc.len(), 1);
    assert_eq!(mc[0]["member"], 0);
    assert_eq!(mc[0]["n_paths"], 20000);
}

#[test]
fn strategy_count_must_match() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write(
        tmp.path(),
        "s.json",
        r#"[{"consumption": {"kind": "chi", "chi1": 1.0, "chi2": 0.5, "t_end": 1.0}, "pi": 0.5}]"#,
    );
    let o = run(
        &[
            "verify",
            "--input",
            fixture("two_agents.json").to_str().unwrap(),
            "--strategies",
            s.to_str().unwrap(),
        ],
        &tmp.path().join("out"),
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn value_reports_each_agent() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["value", "--input", fixture("two_agents.json").to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&tmp.path().join("values.json"));
    let values = v[0]["values"].as_array().unwrap();
    assert_eq!(values.len(), 2);
    // gamma > 1: utilities are negative.
    assert!(values.iter().all(|x| x["v0"].as_f64().unwrap() < 0.0));
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let game = fixture("two_agents.json");
    let game = game.to_str().unwrap();
    run(&["solve-ne", "--input", game], &tmp.path().join("a"));
    run(&["solve-ne", "--input", game], &tmp.path().join("b"));
    for f in ["equilibrium.json", "consumption.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
    let text = fs::read_to_string(tmp.path().join("a/equilibrium.json")).unwrap();
    assert!(text.contains("\"fixed_point_pi\": 1.0000000000000000e-8"));
}

#[test]
fn tolerance_overrides_are_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let game = fixture("two_agents.json");
    for bad in ["nonsense=1", "deviation", "deviation=-1"] {
        let o = run(&["solve-ne", "--input", game.to_str().unwrap(), "--tol-override", bad], tmp.path());
        assert_eq!(code(&o), 2, "{bad}");
    }
}

#[test]
fn grid_override_changes_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["solve-ne", "--input", fixture("two_agents.json").to_str().unwrap(), "--grid-n", "10"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("consumption.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 11);
    assert_eq!(code(&run(&["solve-ne", "--input", "x", "--grid-n", "1"], tmp.path())), 2);
}

#[test]
fn converge_flags_only_the_approximate_equilibrium_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["converge", "--paths", "20"], &tmp.path().join("a"));
    assert_eq!(code(&o), 4);
    let r = json(&tmp.path().join("a/converge.json"));
    for key in ["strategy_pi", "strategy_c", "value"] {
        assert_eq!(r[key]["pass"], true, "{key}");
    }
    assert_eq!(r["wealth"]["pass"], true);
    assert_eq!(r["approximate_ne"]["pass"], false);
    let slope = r["approximate_ne"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 0.1, "{slope}");

    let o = run(
        &[
            "converge",
            "--paths",
            "20",
            "--tol-override",
            "approximate_ne_slope_low=-2.15",
            "--tol-override",
            "approximate_ne_slope_high=-1.85",
        ],
        &tmp.path().join("b"),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rates = fs::read_to_string(tmp.path().join("b/rates.csv")).unwrap();
    assert!(rates.starts_with("experiment,N,gap\n"));
    assert_eq!(rates.lines().count(), 1 + 4 * 7);
}

#[test]
fn converge_without_competition_skips_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(
        tmp.path(),
        "fixture.json",
        r#"{"agent": {"x0": 1, "mu": 0.05, "nu": 0.1, "sigma": 0.2, "eta": 0.1, "gamma": 2,
            "delta": 1.5, "epsilon": 1, "theta": 0}, "log_x0_mean": 0, "log_x0_sd": 0.1, "horizon_t": 1}"#,
    );
    let o = run(
        &["converge", "--input", f.to_str().unwrap(), "--ns", "10,100,1000", "--paths", "5"],
        &tmp.path().join("o"),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&tmp.path().join("o/converge.json"));
    for key in ["strategy_pi", "strategy_c", "value", "approximate_ne"] {
        assert!(r[key]["fit"]["slope"].is_null(), "{key}");
        assert!(r[key]["fit"]["values"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    }
}

#[test]
fn converge_needs_two_player_counts() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["converge", "--ns", "10"], tmp.path())), 2);
    assert_eq!(code(&run(&["converge", "--ns", "10,abc"], tmp.path())), 2);
}

#[test]
fn converge_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["converge", "--ns", "10,100,1000", "--paths", "8", "--seed", "11", "--grid-n", "200"];
    run(&args, &tmp.path().join("a"));
    run(&args, &tmp.path().join("b"));
    for f in ["converge.json", "rates.csv", "wealth.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn statics_reference_figure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["statics"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&tmp.path().join("statics.json"));
    let c = &r["statics"]["consumption"];
    assert!((c["delta_star"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(c["below_delta_star"], "increasing");
    assert_eq!(c["above_delta_star"], "decreasing");
    for curve in r["curves"].as_array().unwrap() {
        assert_eq!(curve["label"], curve["observed"]);
        assert_eq!(curve["terminal_gap"].as_f64(), Some(0.0));
    }
    let csv = fs::read_to_string(tmp.path().join("figure1.csv")).unwrap();
    assert!(csv.starts_with("delta,t,c\n"));
}

#[test]
fn statics_reports_missing_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.json", r#"{"deltas": [2.0, 2.5, 3.0]}"#);
    let o = run(&["statics", "--input", cfg.to_str().unwrap()], &tmp.path().join("o"));
    assert_eq!(code(&o), 0);
    let r = json(&tmp.path().join("o/statics.json"));
    assert_eq!(r["statics"]["consumption"]["no_sign_change"], true);
    assert!(r["statics"]["consumption"]["delta_star"].is_null());
}

#[test]
fn statics_at_competition_threshold_has_zero_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.json",
        r#"{"population": {"horizon": {"T": 1, "grid_n": 50}, "mfg_atoms": [{"weight": 1, "type":
            {"x0": 1, "mu": 0.06, "nu": 0, "sigma": 0.2, "eta": 0.1, "gamma": 2, "delta": 1.5,
             "epsilon": 1, "theta": 1}}]}}"#,
    );
    let o = run(&["statics", "--input", cfg.to_str().unwrap()], &tmp.path().join("o"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&tmp.path().join("o/statics.json"));
    let atom = &r["statics"]["portfolio"]["atoms"][0];
    assert_eq!(atom["dpi_dgamma"].as_f64(), Some(0.0));
    assert_eq!(atom["sensitivity"], "zero");
}
