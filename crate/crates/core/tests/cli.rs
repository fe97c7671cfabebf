use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tvcalib"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&std::ffi::OsStr]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_DISC: &str = r#"
command = "verify"

[problem]
cells = 48
lambda = 32.0
datum = { kind = "disc", center = [0.5, 0.5], radius = 0.25 }

[diagnostics]
radii = [6.0, 4.0, 2.0]
trace_rho = 8.0
trace_r = 2.0
normal_radius = 4.0
boundary_points = 8
max_trace_error = 0.2
max_blowup_residual = 0.3

[output]
formats = ["json", "csv", "pgm", "pbm", "bin"]
"#;

#[test]
fn verify_writes_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DISC);
    let out = dir.path().join("out");
    let o = run(&[cfg.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
    let doc = report(&out);
    assert!(doc["metadata"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    let r = &doc["report"];
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "verify");
    assert_eq!(r["config"].as_str().unwrap(), SMALL_DISC);
    assert_eq!(r["passed"], true);
    for name in ["u.bin", "z.bin", "u.pgm", "set.pbm", "gap_history.csv"] {
        assert!(out.join(name).is_file(), "{name}");
        assert!(
            r["artifacts"].as_array().unwrap().iter().any(|a| a == name),
            "{name}"
        );
    }
    match tvcalib::io::load_dump(&out.join("u.bin")).unwrap() {
        tvcalib::io::Dump::Scalar(u) => assert_eq!(u.grid().shape(), &[48, 48]),
        _ => panic!("u.bin should hold a scalar field"),
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DISC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[cfg.as_os_str(), "--out".as_ref(), out.as_os_str()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(report(&a)["report"], report(&b)["report"]);
    assert_eq!(
        std::fs::read(a.join("z.bin")).unwrap(),
        std::fs::read(b.join("z.bin")).unwrap()
    );
}

#[test]
fn command_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DISC);
    let out = dir.path().join("out");
    let o = run(&[
        cfg.as_os_str(),
        "--command".as_ref(),
        "solve".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["report"]["command"], "solve");
    assert_eq!(r["report"]["checks"].as_array().unwrap().len(), 1);
}

#[test]
fn failed_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_DISC.replace("max_trace_error = 0.2", "max_trace_error = 1e-6");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run(&[cfg.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("FAIL median_trace_error"));
    assert_eq!(report(&out)["report"]["passed"], false);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&[missing.as_os_str()]).status.code(), Some(3));

    let bad = write_config(dir.path(), "command = \"verify\"\n[problem\ncells = 4\n");
    assert_eq!(run(&[bad.as_os_str()]).status.code(), Some(4));
    let unknown = write_config(
        dir.path(),
        &SMALL_DISC.replace("lambda = 32.0", "lambda = 32.0\nlambada = 1.0"),
    );
    assert_eq!(run(&[unknown.as_os_str()]).status.code(), Some(4));

    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--bogus".as_ref()]).status.code(), Some(1));
    assert_eq!(run(&["--help".as_ref()]).status.code(), Some(0));

    let heavy = r#"
command = "solve"
[problem]
mode = "prescribed_g"
cells = 48
domain = { center = [0.5, 0.5], radius = 0.45 }
g = { kind = "disc", center = [0.5, 0.5], radius = 0.2, value = 40.0 }
boundary = { kind = "affine", offset = 0.0, slope = [1.0, 0.0] }
[output]
formats = []
"#;
    let p = write_config(dir.path(), heavy);
    let o = run(&[p.as_os_str(), "--out".as_ref(), dir.path().join("h").as_os_str()]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));

    let invalid = "command = \"counterexample\"\n[counterexample]\ndimension = 2\nepsilon = 0.5\ndelta = 0.2\n[output]\nformats = []\n";
    let p = write_config(dir.path(), invalid);
    let o = run(&[p.as_os_str(), "--out".as_ref(), dir.path().join("c").as_os_str()]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn selftest_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--command".as_ref(),
        "selftest".as_ref(),
        "--out".as_ref(),
        dir.path().as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(dir.path())["report"]["passed"], true);
}

#[test]
fn counterexample_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        config("counterexample_2d.toml").as_os_str(),
        "--out".as_ref(),
        dir.path().as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("averages.csv")).unwrap();
    assert!(csv.starts_with("n,radius,large_ball_average,small_ball_average"));
}

#[test]
fn library_entry_point_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let a = tvcalib::run::run_text(SMALL_DISC, Some(&dir.path().join("lib")), None).unwrap();
    let cfg = write_config(dir.path(), SMALL_DISC);
    let out = dir.path().join("bin");
    run(&[cfg.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(a.report, report(&out)["report"]);
}
