use std::fs;
use std::path::Path;

use assert_cmd::cargo::cargo_bin_cmd;
use serde_json::Value;

fn keyrot(args: &[&str]) -> std::process::Output {
    cargo_bin_cmd!("keyrot").args(args).output().expect("runs")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = keyrot(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

const TOY: [&str; 10] = [
    "--lambda", "16", "--s-min-bits", "16", "--block-bits", "16", "--file-size", "2B", "--target-bits", "11",
];

#[test]
fn plan_reproduces_worked_example() {
    let ctr = json(&["plan", "--mode", "ctr", "--lambda", "128", "--s-min-bits", "121", "--block-bits", "128",
        "--file-size", "1.5KB", "--target-bits", "80"]);
    assert_eq!(ctr["q_star"], "1210759");
    assert_eq!(ctr["max_data_volume_kb"], "1816138.500");
    assert_eq!(ctr["max_data_volume_mb"], "1773.573");
    let cbc = json(&["plan", "--mode", "cbc"]);
    assert_eq!(cbc["q_star"], "123575");
    assert_eq!(cbc["max_data_volume_mb"], "181.018");
    let ecbc = json(&["plan", "--mode", "ecbc-mac", "--ecbc-denominator", "n"]);
    assert_eq!(ecbc["q_star"], "174751");
}

#[test]
fn plan_exit_codes() {
    let o = keyrot(&["plan", "--target-bits", "200"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("infeasible"));
    assert_eq!(keyrot(&["plan", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(keyrot(&["plan", "--mode", "ofb"]).status.code(), Some(2));
    assert_eq!(keyrot(&["plan", "--eps", "3/2"]).status.code(), Some(2));
    assert_eq!(keyrot(&["plan", "--eps", "1/4", "--target-bits", "9"]).status.code(), Some(2));
    assert_eq!(keyrot(&["plan", "--file-size", "1.5XB"]).status.code(), Some(2));
}

#[test]
fn eps_escape_hatch_matches_target_bits() {
    let a = json(&["plan", "--eps", "1/1208925819614629174706176"]);
    let b = json(&["plan", "--target-bits", "80"]);
    assert_eq!(a, b);
}

#[test]
fn improve_and_benefit_at_k_two() {
    let imp = json(&["improve", "--k", "2"]);
    assert_eq!(imp["delta_bits"], "1.999923746");
    assert_eq!(imp["strictly_bracketed"], true);
    assert_eq!(imp["closed_form_bits"], imp["direct_difference_bits"]);
    let ben = json(&["benefit", "--k", "2", "--key-cost", "1"]);
    assert_eq!(ben["benefit"], "1210712.837418871");
    let half = json(&["benefit", "--k", "2", "--key-cost", "2"]);
    assert_eq!(half["benefit"], "605356.418709435");
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_is_monotone_and_consistent() {
    for mode in ["ctr", "cbc", "ecbc-mac"] {
        let o = keyrot(&["sweep", "--mode", mode, "--k-powers", "10"]);
        assert!(o.status.success());
        let text = stdout(&o);
        assert!(!text.contains('\r'));
        let rows = parse_csv(&text);
        assert_eq!(rows[0].join(","), "k,delta_bits,lower_log2k,upper_2log2k,benefit");
        assert_eq!(rows.len(), 12);
        let col = |j: usize| rows[1..].iter().map(|r| r[j].parse::<f64>().unwrap()).collect::<Vec<_>>();
        let delta = col(1);
        let benefit = col(4);
        assert!(delta.windows(2).all(|w| w[0] < w[1]), "{mode}");
        assert!(benefit[1..].windows(2).all(|w| w[0] > w[1]), "{mode}");
    }
    let rows = parse_csv(&stdout(&keyrot(&["sweep", "--k", "2"])));
    let imp = json(&["improve", "--k", "2"]);
    let ben = json(&["benefit", "--k", "2"]);
    assert_eq!(rows[1][1], imp["delta_bits"].as_str().unwrap());
    assert_eq!(rows[1][4], ben["benefit"].as_str().unwrap());
}

#[test]
fn sweep_edge_cases() {
    let o = keyrot(&["sweep", "--k", ""]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "k,delta_bits,lower_log2k,upper_2log2k,benefit\n");
    let mut args = vec!["sweep", "--k", "1,2,8"];
    args.extend(TOY);
    let o = keyrot(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k = 8"), "{}", stderr(&o));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["plan", "--format", "json"][..],
        &["sweep", "--mode", "cbc"],
        &["simulate", "--mode", "cbc", "--q", "8", "--l", "4", "--trials", "20000", "--seed", "3", "--format", "csv"],
    ] {
        assert_eq!(keyrot(args).stdout, keyrot(args).stdout, "{args:?}");
    }
}

#[test]
fn validate_passes_and_detects_perturbation() {
    let o = keyrot(&["validate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("11/11 checks passed"));
    assert!(!stdout(&o).contains("FAIL"));
    let o = keyrot(&["validate", "--s-min-bits", "120"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("FAIL  ctr q_star: 1210727"));
}

#[test]
fn simulate_examples() {
    let r = json(&["simulate", "--mode", "ctr", "--block-bits", "16", "--q", "16", "--l", "4", "--trials", "100000",
        "--seed", "7"]);
    let frac: f64 = r["collision_fraction"].as_str().unwrap().parse().unwrap();
    assert!(frac <= 0.03125 && frac > 0.0);
    assert_eq!(r["bound_respected"], true);
    let r = json(&["simulate", "--q", "1", "--l", "4", "--trials", "5000"]);
    assert_eq!(r["collisions"], 0);
    assert_eq!(keyrot(&["simulate", "--q", "4", "--l", "2", "--trials", "999"]).status.code(), Some(2));
    assert_eq!(keyrot(&["simulate", "--mode", "ecbc-mac", "--q", "4", "--l", "2"]).status.code(), Some(2));
}

fn write_keys(dir: &Path, n: usize) -> String {
    let path = dir.join("keys.txt");
    let body: String = (0..n).map(|i| format!("{:032x}\n", 0x1234_5678_9abc_def0_u128 + i as u128)).collect();
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn write_manifest(dir: &Path, lines: &[&str]) -> String {
    let path = dir.join("manifest.txt");
    fs::write(&path, lines.join("\n")).unwrap();
    path.display().to_string()
}

fn rotate(dir: &Path, keys: &str, manifest: &str, extra: &[&str]) -> std::process::Output {
    let events = dir.join("events.jsonl").display().to_string();
    let mut args = vec!["rotate", "--keys", keys, "--manifest", manifest, "--events", &events];
    args.extend(TOY);
    args.extend(extra);
    keyrot(&args)
}

#[test]
fn rotate_three_keys_for_seven_files() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 5);
    let names: Vec<String> = (0..7).map(|i| format!("file{i}.bin,2")).collect();
    let manifest = write_manifest(dir.path(), &names.iter().map(String::as_str).collect::<Vec<_>>());
    let o = rotate(dir.path(), &keys, &manifest, &["--key-cost", "3/2", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["q_star"], "3");
    assert_eq!(s["keys_consumed"], 3);
    assert_eq!(s["rotations"], 2);
    assert_eq!(s["total_cost"], "9/2");
    let log = fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    let events: Vec<Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 2);
    assert_eq!(events[0]["at_file_count"], 3);
    assert_eq!(events[1]["new_key_id"], 3);
}

#[test]
fn rotate_persists_loadable_state() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 5);
    let manifest = write_manifest(dir.path(), &["a,2", "b,1B", "c,2", "d,2"]);
    let state = dir.path().join("state.json");
    let o = rotate(dir.path(), &keys, &manifest, &["--state", state.to_str().unwrap()]);
    assert!(o.status.success());
    let loaded = keyrot_core::rotation::load_state(&state).unwrap();
    assert_eq!(loaded.total_files(), 4);
    assert_eq!(loaded.keys_consumed(), 2);
}

#[test]
fn rotate_rejects_oversized_file_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 5);
    let manifest = write_manifest(dir.path(), &["small,2", "too-big.dat,3"]);
    let o = rotate(dir.path(), &keys, &manifest, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("too-big.dat"));
}

#[test]
fn rotate_pool_exhaustion_exits_five_with_progress() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 2);
    let names: Vec<String> = (0..8).map(|i| format!("f{i},2")).collect();
    let manifest = write_manifest(dir.path(), &names.iter().map(String::as_str).collect::<Vec<_>>());
    let o = rotate(dir.path(), &keys, &manifest, &["--format", "json"]);
    assert_eq!(o.status.code(), Some(5));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["status"], "incomplete");
    assert_eq!(s["files_processed"], 6);
    assert!(stderr(&o).contains("'f6'"));
}

#[test]
fn rotate_reports_malformed_key_line() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.txt");
    fs::write(&keys, "00112233445566778899aabbccddeeff\n0011223\n").unwrap();
    let manifest = write_manifest(dir.path(), &["a,2"]);
    let o = rotate(dir.path(), keys.to_str().unwrap(), &manifest, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}
