use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spinjump::cli::{parse_config, simulate, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinjump"))
}

fn example(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "examples", name]
        .iter()
        .collect()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--quiet")
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn summary(path: &Path) -> serde_json::Map<String, Value> {
    match serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap() {
        Value::Object(m) => m,
        other => panic!("expected a JSON object, got {other}"),
    }
}

#[test]
fn every_shipped_scenario_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            parse_config(&std::fs::read(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn run_writes_csv_and_sorted_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["run", example("dark_triplet.conf").to_str().unwrap()],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(dir.path().join("dark_triplet.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 8);
    assert_eq!(first[0], "0.0000000000000000e0");
    assert_eq!(csv.lines().count(), 1 + 20_000 / 100 + 1);

    let text = std::fs::read_to_string(dir.path().join("dark_triplet.json")).unwrap();
    let json = summary(&dir.path().join("dark_triplet.json"));
    let keys: Vec<&String> = json.keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // key order in the file itself
    let positions: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(json["theory"], "haberkorn");
    assert_eq!(json["seed"], 0);
    assert!((json["singlet_yield"].as_f64().unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn jones_hore_keeps_the_dark_triplet_half() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example("dark_triplet.conf")).unwrap();
    let cfg = write_config(
        dir.path(),
        "jh.conf",
        &text.replace("theory = haberkorn", "theory = jones_hore"),
    );
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let json = summary(&dir.path().join("dark_triplet.json"));
    assert!((json["final_p_t"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    assert!((json["survival"].as_f64().unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn revised_equation_matches_independent_solver() {
    // reference: adaptive 8th-order Runge-Kutta at rtol 1e-12
    let cfg =
        parse_config(&std::fs::read(example("kominis_revised_triplet.conf")).unwrap()).unwrap();
    let out = simulate(&cfg).unwrap();
    let last = out.final_row();
    assert!(
        (last.p_t - 0.277_958_421_440_684).abs() < 1e-7,
        "{}",
        last.p_t
    );
    assert!(last.p_s.abs() < 1e-7);

    let mixed = cfg
        .to_config_string()
        .replace("J = 0.0", "J = 0.5")
        .replace("delta = 0.0", "delta = 0.3");
    let mixed = mixed
        .replace("kT = 0.0", "kT = 0.5")
        .replace("t_end = 20.0", "t_end = 5.0");
    let out = simulate(&parse_config(mixed.as_bytes()).unwrap()).unwrap();
    let last = out.final_row();
    assert!(
        (last.p_s - 0.010_906_052_446_540).abs() < 1e-7,
        "{}",
        last.p_s
    );
    assert!(
        (last.p_t - 0.011_166_753_607_157).abs() < 1e-7,
        "{}",
        last.p_t
    );
    assert!(
        (last.coh_mag - 0.002_983_418_856_941).abs() < 1e-7,
        "{}",
        last.coh_mag
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = example("determinism.conf");
    for dir in [a.path(), b.path()] {
        let out = run_in(dir, &["run", cfg.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for file in ["determinism.csv", "determinism.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("determinism.conf");
    let out = run_in(dir.path(), &["--seed", "99", "run", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(summary(&dir.path().join("determinism.json"))["seed"], 99);
}

#[test]
fn validation_errors_exit_with_one_and_list_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.conf",
        "scheme = kominis\nkS = -1\nkT = 0.5\nwhat = 3\ninitial = S\n",
    );
    let out = run_in(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4: unknown key `what`"), "{err}");
    assert!(err.contains("missing required key `t_end`"), "{err}");
    assert!(err.contains("`kS` must be a finite rate >= 0"), "{err}");
    assert!(err.contains("Kominis scheme requires kT=0"), "{err}");
}

#[test]
fn missing_config_file_is_reported_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "/nonexistent/scenario.conf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/scenario.conf"));
}

#[test]
fn compare_joins_theories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example("dark_triplet.conf");
    let out = bin()
        .arg("--output-dir")
        .arg(dir.path())
        .args([
            "compare",
            cfg.to_str().unwrap(),
            "--theories",
            "haberkorn,jones_hore,kominis_revised",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("kominis_revised"), "{table}");

    let csv = std::fs::read_to_string(dir.path().join("dark_triplet_compare.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("time,p_s_haberkorn,p_t_haberkorn,coh_mag_haberkorn,p_s_jones_hore"));
    let json = summary(&dir.path().join("dark_triplet_compare.json"));
    let jh = json["jones_hore"]["final_p_t"].as_f64().unwrap();
    let kr = json["kominis_revised"]["final_p_t"].as_f64().unwrap();
    assert!((jh - 0.5).abs() < 1e-4);
    assert!((kr - 0.277_958).abs() < 1e-5);

    let bad = run_in(
        dir.path(),
        &[
            "compare",
            cfg.to_str().unwrap(),
            "--theories",
            "haberkorn,nonsense",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    assert!(text.lines().count() >= 6);
}
