//! The `calr` binary: outputs, determinism and exit codes.

use std::path::Path;
use std::process::Command;

const MN: &str = r#"{"dimension":2,"omega_radius":8.0,"annulus":{"r2":1.0,"r3":4.0},
 "profile":{"kind":"constant","value":1.0},
 "source":{"radius":1.5,"spectrum":{"kind":"geometric","t":0.85,"max_mode":200}},"cutoff":200}"#;

fn calr(args: &[&str], threads: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_calr"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("CALR_THREADS", t);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_the_documented_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mn.json");
    std::fs::write(&cfg, MN).unwrap();
    let (a, b, svg) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("p.svg"));
    let args = |out: &Path| {
        vec!["sweep", "--config", s(&cfg), "--delta-start", "1e-2", "--delta-end", "1e-10", "--points", "17", "--out"]
            .into_iter()
            .chain([s(out)])
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let mut first = args(&a);
    first.extend(["--plot".into(), s(&svg).into()]);
    let (code, out, _) = calr(&first.iter().map(String::as_str).collect::<Vec<_>>(), None);
    assert_eq!(code, 0);
    assert!(out.contains("BlowUp"));
    let (code, _, _) = calr(&args(&b).iter().map(String::as_str).collect::<Vec<_>>(), Some("1"));
    assert_eq!(code, 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb, "CSV differs between runs");
    let text = String::from_utf8(ta).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,power,shell_energy,u_farfield_h1,v_farfield_h1,c_delta");
    assert_eq!(lines.len(), 18);
    for l in &lines[1..] {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 6);
        for c in cols {
            let mantissa = c.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.len(), 18, "{c} does not carry 17 digits");
        }
    }
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn solve_dumps_reproducible_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mn.json");
    std::fs::write(&cfg, MN).unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let (code, _, err) = calr(&["solve", "--config", s(&cfg), "--delta", "1e-6", "--modes", "256", "--out", s(out)], None);
        assert_eq!(code, 0, "{err}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(v["modes"].as_array().unwrap().len(), 401);
    assert_eq!(v["modes"][0]["layers"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // validation: missing file, bad flag, malformed config, bad thread count
    assert_eq!(calr(&["sweep", "--config", "/no/such.json", "--out", s(&out)], None).0, 1);
    assert_eq!(calr(&["sweep", "--bogus"], None).0, 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dimension":4}"#).unwrap();
    assert_eq!(calr(&["solve", "--config", s(&bad), "--delta", "1e-3", "--out", s(&out)], None).0, 1);
    assert_eq!(calr(&["verify", "--suite", "three-spheres"], Some("-2")).0, 1);
    // success
    let (code, out, _) = calr(&["verify", "--suite", "three-spheres"], None);
    assert_eq!(code, 0);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() == 2);
}

#[test]
fn failing_checks_exit_with_three() {
    use calr::cli::verify::CheckLine;
    let line = |passed| CheckLine { suite: "modes", check: "synthetic".into(), value: 2.0, bound: "<= 1".into(), passed };
    assert_eq!(calr::cli::verdict_code(&[line(true), line(true)]), calr::cli::EXIT_OK);
    assert_eq!(calr::cli::verdict_code(&[line(true), line(false)]), calr::cli::EXIT_ASSERTION);
    assert!(calr::cli::verify::table(&[line(false)]).starts_with("FAIL"));
}
