use std::path::Path;
use std::process::{Command, Output};

fn amprb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amprb")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const PISTON: &str = "problem = \"piston\"\nresolution = 4\nt_final = 0.0\n[body]\nmass = 1.0\n[time]\ndt = 0.01\n";

#[test]
fn bad_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "problem = \"piston\"\n[fluid]\nrho = -1.0\n").unwrap();
    let o = amprb(dir.path(), &["run", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("rho") && err.contains("line 3"), "{err}");
}

#[test]
fn missing_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = amprb(dir.path(), &["run", "nope.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rectangle_tensor_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = amprb(dir.path(), &["tensors", "rectangle:w=1,h=0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("analytic"));
    assert!(s.contains("positive definite: yes"));
    let eig = s.lines().find(|l| l.starts_with("eigenvalues")).unwrap();
    // planar block diag(2 w, 2 h, w h (w + h) / 2) for w = 1, h = 0.5
    for v in ["0.375000", "1.000000", "2.000000"] {
        assert!(eig.contains(v), "{eig}");
    }
    assert!(dir.path().join("out/tensors.txt").exists());
}

#[test]
fn zero_length_run_writes_header_and_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.toml"), PISTON).unwrap();
    let o = amprb(dir.path(), &["--quiet", "run", "p.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/history.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("t,x_b1,x_b2,theta_b"));
    assert!(lines[1].starts_with("0.0,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PISTON.replace("t_final = 0.0", "t_final = 0.05");
    std::fs::write(dir.path().join("p.toml"), cfg).unwrap();
    let read = || {
        let o = amprb(dir.path(), &["--quiet", "run", "p.toml"]);
        assert!(o.status.success());
        std::fs::read(dir.path().join("out/history.csv")).unwrap()
    };
    let first = read();
    assert_eq!(first, read());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 7);
}

#[test]
fn light_piston_separates_amp_from_tp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PISTON.replace("t_final = 0.0", "t_final = 1.0").replace("mass = 1.0", "mass = 0.01");
    std::fs::write(dir.path().join("p.toml"), cfg).unwrap();
    let o = amprb(dir.path(), &["compare", "p.toml"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("AMP: stable"), "{s}");
    assert!(s.contains("TP: unstable"), "{s}");

    let o = amprb(dir.path(), &["--quiet", "run", "p.toml", "--mode", "tp"]);
    assert_eq!(o.status.code(), Some(4));
}
