use std::process::Command;

fn ncpt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncpt"))
}

#[test]
fn timeline_flag_prints_table() {
    let out = ncpt().arg("--fig5").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("tick  multipath  network-coded"));
    assert!(text.contains("multipath empty from t7"));
}

#[test]
fn csv_goes_to_stdout() {
    let out = ncpt()
        .args(["--mode", "nc", "--packet-count", "400", "--reps", "2", "--buffer-m", "100,200"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ncpt::harness::CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.starts_with("nc,4,9,")));
}

#[test]
fn config_file_is_read_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "mode = multipath\npacket_count = 400\nrepetitions = 1\nbuffer_m = 50\n").unwrap();
    let out = ncpt().arg("--config").arg(&path).args(["--buffer-m", "60"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("multipath,4,9,60,"), "{row}");
}

#[test]
fn bad_input_fails_with_field_name() {
    let cases: [&[&str]; 3] = [
        &["--mode", "carrier-pigeon"],
        &["--buffer-m", "0", "--packet-count", "10", "--reps", "1"],
        &["--delays", "1,2,x"],
    ];
    for args in cases {
        let out = ncpt().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.starts_with("ncpt: "), "{args:?}: {err}");
    }
    let out = ncpt().args(["--delays", "1,2,x"]).output().unwrap();
    assert!(String::from_utf8(out.stderr).unwrap().contains("path_delays"));
}

#[test]
fn missing_config_file_fails() {
    let out = ncpt().args(["--config", "/nonexistent/ncpt.cfg"]).output().unwrap();
    assert!(!out.status.success());
}
