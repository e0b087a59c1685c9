use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rank2ke")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn constants_of_the_g2_long_fiber() {
    let out = run(&["constants", "--space", "G2/SO4", "--facet", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)[0];
    assert_eq!(row["a0"], "5/6");
    assert_eq!(row["a1"], "1/3");
    assert_eq!(row["zeta"], "3/2");
}

#[test]
fn output_is_deterministic() {
    let a = run(&["criteria", "--all"]);
    let b = run(&["criteria", "--all"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["constants", "--space", "NoSuch/Space"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--space", "G2/SO4", "--facet", "3"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("b");
    let refused = run(&["ansatz", "--space", "G2/SO4", "--facet", "1", "--out", bundle.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(3));
    assert!(!bundle.exists());
}

#[test]
fn stenzel_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = run(&["stenzel", "--m1", "2", "--m2", "1", "--C", "0.5", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["x", "u", "du", "ddu", "gap"]);
    let worst = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let (x, du): (f64, f64) = (r[0].parse().unwrap(), r[2].parse().unwrap());
            if x > 0.0 { (du - x.sinh()).abs() / x.sinh() } else { du.abs() }
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    assert!(dir.path().join("s.json").exists());
}
