use std::fs;
use std::process::Command;

fn vemlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vemlab"))
}

#[test]
fn mesh_gen_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    let out = vemlab()
        .args(["mesh", "gen", "--family", "lloyd100", "--cells", "64", "--seed", "3", "--out"])
        .arg(&mesh)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("64 cells"));

    let out = vemlab().args(["mesh", "check", "--mesh"]).arg(&mesh).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("cells            64"), "{text}");
    assert!(text.contains("not star-shaped  0"), "{text}");
}

#[test]
fn run_writes_csv_and_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conv.csv");
    let out = vemlab()
        .args(["run", "--k", "2", "--family", "square,lloyd0", "--sizes", "25,100", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("square") && stdout.contains("lloyd0"), "{stdout}");
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4 + 2);
    assert!(dir.path().join("conv_square_k2_standard.dat").exists());
    assert!(dir.path().join("conv_lloyd0_k2_standard.dat").exists());
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = vemlab().args(["run", "--k", "7", "--out", "/dev/null"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error"));

    let out = vemlab().args(["mesh", "check", "--mesh", "/nonexistent/m.json"]).output().unwrap();
    assert!(!out.status.success());

    let out = vemlab().args(["run", "--family", "hexagons"]).output().unwrap();
    assert!(!out.status.success());
}
