use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn tkt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tkt")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mine_check_export_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("orders.tkt");
    let orders = data("orders.trace");
    let o = tkt(&["mine", s(&orders), "--policy", "minmax", "--param", "0", "-o", s(&model), "--dump-stages"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("tkt-model 1\n"));
    assert!(text.contains("guards t=[23,30] c6=[7,11]"), "{text}");
    for stage in ["initial", "merged", "refined"] {
        assert!(dir.path().join(format!("orders.tkt.{stage}")).exists());
    }

    let o = tkt(&["check", s(&model), s(&orders)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ACCEPT\nACCEPT\n");

    let slow = dir.path().join("slow.trace");
    fs::write(&slow, "B processPhoneOrder 0\nE processPhoneOrder 2\nB processItem 3\nE processItem 30\n").unwrap();
    let o = tkt(&["check", s(&model), s(&slow)]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.starts_with("REJECT event 3"), "{out}");
    assert!(out.contains("guard on t"), "{out}");
    let o = tkt(&["check", s(&model), s(&slow), "--no-absolute"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("guard on c2") && out.contains("c2=27 not in [4,6]"), "{out}");

    let o = tkt(&["export", s(&model)]);
    assert!(o.status.success());
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot, stdout(&tkt(&["export", s(&model)])));
}

#[test]
fn gen_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let valid = dir.path().join("valid.trace");
    let invalid = dir.path().join("invalid.trace");
    let o = tkt(&["gen", s(&data("service.toml")), "--count", "40", "-o", s(&valid)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = tkt(&[
        "gen",
        s(&data("service.toml")),
        "--count",
        "20",
        "--seed",
        "5",
        "--anomaly",
        s(&data("overload.toml")),
        "-o",
        s(&invalid),
    ]);
    assert!(o.status.success());
    let again = dir.path().join("again.trace");
    tkt(&["gen", s(&data("service.toml")), "--count", "40", "-o", s(&again)]);
    assert_eq!(fs::read(&valid).unwrap(), fs::read(&again).unwrap());

    let csv = dir.path().join("report.csv");
    let o = tkt(&[
        "eval", "--valid", s(&valid), "--invalid", s(&invalid), "--configs", "M1,G4", "--folds", "5", "--fractions",
        "0.5,1", "--extractions", "2", "--csv", s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 1 + 4);
    let report = fs::read_to_string(&csv).unwrap();
    assert!(report.starts_with("config_id,fraction,metric,value\n"));
    assert!(report.contains("G4,0.5,specificity,"));
}

#[test]
fn exit_codes_for_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.trace");
    assert_eq!(tkt(&["mine", s(&missing)]).status.code(), Some(1));

    let bad = dir.path().join("bad.trace");
    fs::write(&bad, "B f 0\nE g 1\n").unwrap();
    let o = tkt(&["mine", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let orders = data("orders.trace");
    assert_eq!(tkt(&["mine", s(&orders), "--config", "M99"]).status.code(), Some(2));
    assert_eq!(tkt(&["mine", s(&orders), "--k", "0"]).status.code(), Some(2));

    let model = dir.path().join("bad.tkt");
    fs::write(&model, "tkt-model 7\n").unwrap();
    assert_eq!(tkt(&["export", s(&model)]).status.code(), Some(2));

    let spec = dir.path().join("cyclic.toml");
    fs::write(&spec, "seed = 1\nroots = [\"f\"]\n[[operations]]\nlabel = \"f\"\nchildren = [\"f\"]\nduration = { kind = \"uniform\", lo = 1, hi = 2 }\n").unwrap();
    assert_eq!(tkt(&["gen", s(&spec)]).status.code(), Some(2));
}
