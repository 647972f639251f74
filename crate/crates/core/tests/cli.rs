use std::fs;
use std::process::{Command, Output};

use hpsim::output::{read_csv, RunManifest, CSV_HEADER};
use hpsim::SystemConfig;

fn hpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpsim"))
        .args(args)
        .output()
        .expect("spawn hpsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 8] = ["--set", "n_tx=32", "--set", "n_rf=8", "--set", "n_paths=6", "--trials", "4"];

#[test]
fn single_prints_both_records() {
    let mut args = SMALL.to_vec();
    args.extend(["--set", "n_users=4", "single"]);
    let o = hpsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("algorithm        zf"));
    assert!(text.contains("algorithm        svdde"));
    assert!(text.contains("n_users 4"));
    // m_max(8, 4) = floor(128 / 47) = 2
    assert!(text.contains("m_used           2"));
}

#[test]
fn single_at_defaults_with_eight_users() {
    let o = hpsim(&["--set", "n_users=8", "single"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("n_tx 256  n_rf 60  n_users 8"));
    assert!(text.contains("m_used           7"));
    assert!(text.contains("flops.lambda1    3720"));
    assert!(text.contains("flops.lambda3    3674"));
}

#[test]
fn too_many_users_is_a_config_error() {
    let o = hpsim(&["--set", "n_users=70", "single"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K ≤ N_RF"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_flag_are_rejected() {
    let o = hpsim(&["--set", "bogus=1", "single"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
    let o = hpsim(&["--frobnicate", "single"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_axis_out_of_range_is_a_config_error() {
    let mut args = SMALL.to_vec();
    args.extend(["sweep-users", "--k-min", "2", "--k-max", "9"]);
    assert_eq!(hpsim(&args).status.code(), Some(2));
    let mut args = SMALL.to_vec();
    args.extend(["sweep-users", "--k-min", "5", "--k-max", "3"]);
    assert_eq!(hpsim(&args).status.code(), Some(2));
}

#[test]
fn sweep_users_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("users.csv");
    let mut args = SMALL.to_vec();
    args.extend(["sweep-users", "--k-min", "2", "--k-max", "6", "--k-step", "2", "--out"]);
    args.push(out.to_str().unwrap());
    let o = hpsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let file = fs::read_to_string(&out).unwrap();
    assert_eq!(stdout(&o), file);
    assert_eq!(file.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv(&out).unwrap();
    assert_eq!(rows.iter().map(|r| r.axis_value).collect::<Vec<_>>(), [2, 4, 6]);
    assert!(rows.iter().all(|r| r.axis == "n_users" && r.trials == 4));
    assert!(rows.iter().all(|r| r.thr_svdde_bps <= r.thr_zf_bps));

    let manifest = fs::read_to_string(RunManifest::path_for(&out)).unwrap();
    assert!(manifest.contains("# command: sweep-users --k-min 2 --k-max 6 --k-step 2"));
    let cfg = SystemConfig::parse_str(&manifest).unwrap();
    assert_eq!((cfg.n_tx, cfg.n_rf, cfg.trials), (32, 8, 4));
}

#[test]
fn sweep_rf_uses_listed_values() {
    let mut args = SMALL.to_vec();
    args.extend(["--set", "n_users=3", "sweep-rf", "--list", "4,6,8"]);
    let o = hpsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values, ["4", "6", "8"]);
    assert!(text.lines().skip(1).all(|l| l.starts_with("n_rf,")));
}

#[test]
fn error_curve_is_non_increasing() {
    let mut args = SMALL.to_vec();
    args.extend(["--set", "n_users=5", "error-curve", "--m", "1..K"]);
    let o = hpsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let errs: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 5);
    assert!(errs.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(errs[4], 0.0);

    let mut args = SMALL.to_vec();
    args.extend(["--set", "n_users=5", "error-curve", "--m", "0..3"]);
    assert_eq!(hpsim(&args).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "# small scenario\nn_tx = 32\nn_rf = 8\nn_paths = 6\nn_users = 4\n").unwrap();
    let p = path.to_str().unwrap();
    let o = hpsim(&["--config", p, "--set", "n_users=3", "single"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n_users 3"));

    fs::write(&path, "n_tx 32\n").unwrap();
    let o = hpsim(&["--config", p, "single"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn seeds_change_results() {
    let run = |seed: &str| {
        let mut args = SMALL.to_vec();
        args.extend(["--seed", seed, "sweep-users", "--k-min", "3", "--k-max", "3"]);
        stdout(&hpsim(&args))
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}
