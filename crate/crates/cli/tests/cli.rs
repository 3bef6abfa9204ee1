use std::path::Path;
use std::process::{Command, Output};

fn polyknot(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyknot")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn thickness_of_the_32_gon() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&polyknot(&["gen-ngon", "--n", "32", "--out", "k.txt"], dir.path()));
    let v: serde_json::Value = serde_json::from_str(&stdout(&polyknot(&["thickness", "k.txt"], dir.path()))).unwrap();
    let r = v["radius"].as_f64().unwrap();
    assert!((r - 0.9951847).abs() < 1e-7);
    let text = stdout(&polyknot(&["thickness", "k.txt"], dir.path()));
    assert!(text.contains("\"radius\": 0.9951847"));
    assert!(dir.path().join("k.txt.manifest.json").exists());
}

#[test]
fn thresholds_table_for_the_32_gon() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&polyknot(&["thresholds", "--ngon", "32", "--format", "table"], dir.path()));
    for (name, value) in [("t4", "0.2903"), ("t5", "0.3827"), ("t6", "0.4714")] {
        assert!(text.lines().any(|l| l.starts_with(name) && l.ends_with(value)), "{text}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(polyknot(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(polyknot(&["perturb", "--radius", "0.1"], dir.path()).status.code(), Some(2));
    assert_eq!(polyknot(&["thickness", "missing.txt"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.txt"), "0 0 0\n1 0 0\n").unwrap();
    assert_eq!(polyknot(&["thickness", "bad.txt"], dir.path()).status.code(), Some(1));
}

#[test]
fn homfly_of_a_trefoil_file() {
    let dir = tempfile::tempdir().unwrap();
    let k = polyknot::homfly::stick_trefoil();
    std::fs::write(dir.path().join("t.txt"), polyknot::io::format_knot(&k, None)).unwrap();
    let text = stdout(&polyknot(&["homfly", "t.txt"], dir.path()));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, vec!["−1·ℓ^−4·m^0 + −2·ℓ^−2·m^0 + 1·ℓ^−2·m^2", "Trefoil_R"]);
}

#[test]
fn sampling_output_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    for (threads, out) in [("1", "a.json"), ("4", "b.json")] {
        stdout(&polyknot(
            &["scan-radius", "--ngon", "24", "--radii", "0.3,0.6", "--samples", "500", "--seed", "2", "--format", "json", "--threads", threads, "--out", out],
            dir.path(),
        ));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn anneal_writes_knot_and_log() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&polyknot(&["gen-ngon", "--n", "10", "--edge", "1", "--out", "k.txt"], dir.path()));
    stdout(&polyknot(
        &["anneal", "--input", "k.txt", "--epochs", "5", "--moves", "20", "--out", "a.txt", "--log", "a.csv"],
        dir.path(),
    ));
    let k = polyknot::io::read_knot(dir.path().join("a.txt")).unwrap();
    assert!(k.equilateral_deviation() < 1e-10);
    let log = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("epoch,temperature,current,best"));
    assert_eq!(log.lines().count(), 6);
}

#[test]
fn fit_reads_scan_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("host,n,r,N,seed,polynomial,label,count,frequency\n");
    for n in (10..40).step_by(3) {
        let p = 0.5 * ((n - 6) as f64).powf(1.2) * (-0.08 * n as f64 - 1e-4 * (n * n) as f64).exp();
        csv += &format!("ngon:{n},{n},0.5,1000,0,1·ℓ^0·m^0,Unknot,0,{p}\n");
    }
    std::fs::write(dir.path().join("scan.csv"), csv).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&polyknot(&["fit", "--input", "scan.csv", "--out", "curve.csv"], dir.path()))).unwrap();
    assert!((v["b"].as_f64().unwrap() - 1.2).abs() < 1e-4);
    assert!(std::fs::read_to_string(dir.path().join("curve.csv")).unwrap().starts_with("n,observed,fitted\n"));
}
