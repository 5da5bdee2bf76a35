use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pdmix_cli::{run, RunConfig};
use pdmix_core::manufactured::InterfaceMode;

fn pdmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmix")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = pdmix(&["--example", "1", "--max-level", "8", "--csv", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h_inv,e_p1,r_p1,e_p2_L2,r_p2_L2,e_p2_H1,r_p2_H1,e_u1_L2,r_u1_L2,e_u1_Hdiv,r_u1_Hdiv,e_u2,r_u2");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,") && lines[1].split(',').nth(2) == Some(""));
}

#[test]
fn diagnostics_are_positive_at_level_one() {
    let o = pdmix(&["--example", "1", "--max-level", "1", "--diagnostics"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let row = out.lines().skip_while(|l| !l.contains("inf_sup")).nth(1).unwrap();
    let values: Vec<f64> = row.split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values.iter().all(|v| *v > 0.0), "{row}");
}

#[test]
fn invalid_combinations_exit_nonzero_with_reason() {
    let cases: [(&[&str], &str); 5] = [
        (&["--example", "1", "--interface-mode", "constant_projection"], "constant_projection"),
        (&["--example", "4", "--interface-mode", "paper_literal"], "paper_literal"),
        (&["--max-level", "12"], "max level"),
        (&["--beta", "-1"], "beta"),
        (&["--example", "5"], "example"),
    ];
    for (args, needle) in cases {
        let o = pdmix(args);
        assert!(!o.status.success(), "{args:?}");
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn field_dumps_are_written_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let fields = dir.path().join("fields");
    let o = pdmix(&["--example", "3", "--max-level", "2", "--fields", fields.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for level in [1, 2] {
        for region in [1, 2] {
            let text = fs::read_to_string(fields.join(format!("region{region}_{level}.vtk"))).unwrap();
            assert!(text.starts_with("# vtk DataFile Version 3.0"));
            assert!(text.contains("ASCII"));
        }
    }
}

#[test]
fn matrix_and_mesh_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.vtk");
    let o = pdmix(&[
        "--max-level",
        "1",
        "--dump-mesh",
        mesh.to_str().unwrap(),
        "--dump-matrix",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(&mesh).unwrap().contains("CELL_DATA 8"));
    let matrix = fs::read_to_string(dir.path().join("matrix_1.mtx")).unwrap();
    assert!(matrix.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(Path::new(&dir.path().join("rhs_1.mtx")).exists());
}

#[test]
fn constant_projection_relative_errors_are_reported() {
    let config = RunConfig {
        example: 4,
        interface_mode: InterfaceMode::ConstantProjection,
        max_level_inv: 4,
        ..RunConfig::default()
    };
    let mut out = Vec::new();
    run(&config, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("relative errors (%)"));
    assert!(text.contains("constant_projection"));
}

#[test]
fn beta_override_changes_the_case() {
    let config = RunConfig {
        beta_override: Some(2.5),
        ..RunConfig::default()
    };
    assert_eq!(config.case().unwrap().beta, 2.5);
    assert!(RunConfig { beta_override: Some(0.0), ..RunConfig::default() }.validate().is_err());
    assert!(RunConfig { beta_override: Some(f64::NAN), ..RunConfig::default() }.validate().is_err());
}
