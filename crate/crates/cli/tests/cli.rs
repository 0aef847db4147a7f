use std::path::Path;
use std::process::{Command, Output};

use lap_core::grid::{read_field, write_field};
use lap_core::resolvent::{apply_free_resolvent, SpectralParameter};
use lap_core::{Field, Grid};
use num_complex::Complex64;

fn lap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PROBLEM: &str = r#"
[grid]
N = 8
L = 6.283185307179586

[medium]
family = "constant"

[currents]
family = "mode"
mode = [3, 0, 0]
pol_e = [0.0, 1.0, 0.0]

[exponents]
p = "6/5"
ptilde = "2"
q = "4"

[sweep]
omega = 1.0
delta0 = 0.5
ratio = 0.8
count = 3
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn maxwell_exponents_are_admissible() {
    let o = lap(&["exponents", "check", "--system", "maxwell", "--p", "6/5", "--ptilde", "2", "--q", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "admissible");
}

#[test]
fn gutierrez_violation_exits_one() {
    let o = lap(&["exponents", "check", "--system", "gutierrez", "--p", "2", "--q", "2", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("1/p > (n+1)/2n"), "{}", stdout(&o));
}

#[test]
fn missing_inputs_and_bad_flags_exit_one() {
    let o = lap(&["lap", "sweep", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.toml"));

    let o = lap(&["exponents", "check", "--system", "maxwell", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));

    // a system whose exponents were not all given
    let o = lap(&["exponents", "check", "--system", "maxwell", "--p", "6/5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--ptilde"));

    // n = 2 is outside the exponent systems' domain
    let o = lap(&["exponents", "check", "--system", "gutierrez", "--p", "2", "--q", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bracket_scan() {
    let o = lap(&["exponents", "scan", "--p", "6/5", "--ptilde", "2", "--q", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("q1 = ") && out.contains("q2 = "), "{out}");
}

#[test]
fn resolvent_apply_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::cube(8, 3.0).unwrap();
    let f = Field::from_fn(g, 1, |x, _| Complex64::new(x[0].sin(), x[1].cos()));
    let input = dir.path().join("f.lapf");
    let output = dir.path().join("u.lapf");
    write_field(&f, &input).unwrap();
    let o = lap(&[
        "resolvent",
        "apply",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--zeta-re",
        "-1.5",
        "--zeta-im",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expect = apply_free_resolvent(&f, &SpectralParameter::interior(Complex64::new(-1.5, 0.5)).unwrap()).unwrap();
    assert_eq!(read_field(&output).unwrap(), expect);
}

#[test]
fn resonance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::cube(8, 2.0 * std::f64::consts::PI).unwrap();
    let input = dir.path().join("f.lapf");
    write_field(&Field::from_fn(g, 1, |x, _| Complex64::new(x[0].cos(), 0.0)), &input).unwrap();
    let out = dir.path().join("u.lapf");
    let o = lap(&[
        "resolvent",
        "apply",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--zeta-re",
        "1",
        "--limit",
        "plus",
        "--delta",
        "1e-14",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("resonance"));
}

#[test]
fn helmholtz_probe_of_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::cube(8, 4.0).unwrap();
    let v = dir.path().join("v.lapf");
    write_field(&Field::zeros(g, 1), &v).unwrap();
    let o = lap(&["helmholtz", "probe", "--potential", v.to_str().unwrap(), "--zeta-re", "2", "--zeta-im", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let value: f64 = stdout(&o).trim().trim_start_matches("sigma_min = ").parse().unwrap();
    assert!((value - 1.0).abs() < 1e-8);
}

#[test]
fn helmholtz_solve_writes_solution() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::cube(8, 4.0).unwrap();
    let f = dir.path().join("f.lapf");
    let v = dir.path().join("v.lapf");
    let u = dir.path().join("u.lapf");
    write_field(&Field::from_fn(g, 1, |x, _| Complex64::new(x[2].cos(), 0.0)), &f).unwrap();
    write_field(&Field::from_fn(g, 1, |x, _| Complex64::new(0.3 * x[0].sin(), 0.0)), &v).unwrap();
    let o = lap(&[
        "helmholtz",
        "solve",
        "--input",
        f.to_str().unwrap(),
        "--potential",
        v.to_str().unwrap(),
        "--output",
        u.to_str().unwrap(),
        "--zeta-re",
        "-3",
        "--zeta-im",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("relative_residual"));
    assert_eq!(read_field(&u).unwrap().components(), 1);
}

#[test]
fn maxwell_solve_oracle_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PROBLEM);
    let solve_dir = dir.path().join("solve");
    let o = lap(&["maxwell", "solve", "--config", &cfg, "--zeta-re", "0", "--zeta-im", "1", "--out-dir", solve_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(solve_dir.join("report.csv")).unwrap();
    assert!(report.starts_with("zeta_re,zeta_im,iterations,res1,res2"));

    let oracle_dir = dir.path().join("oracle");
    let o = lap(&["maxwell", "oracle", "--config", &cfg, "--zeta-re", "0", "--zeta-im", "1", "--out-dir", oracle_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["E.lapf", "H.lapf"] {
        let a = read_field(solve_dir.join(name)).unwrap();
        let b = read_field(oracle_dir.join(name)).unwrap();
        assert!(a.sub(&b).unwrap().l2_norm() <= 1e-10 * b.l2_norm());
    }

    let o = lap(&["maxwell", "verify", "--config", &cfg, "--zeta-re", "1", "--zeta-im", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("poynting_gap"));

    // the oracle refuses variable media
    let bumps = PROBLEM.replace(
        "family = \"constant\"",
        "family = \"bumps\"\n[[medium.eps_bumps]]\namplitude = 0.1\ncenter = [3.0, 3.0, 3.0]\nwidth = 1.6",
    );
    let cfg = write_config(dir.path(), &bumps);
    let o = lap(&["maxwell", "oracle", "--config", &cfg, "--zeta-re", "0", "--zeta-im", "1", "--out-dir", oracle_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &PROBLEM.replace("count = 3", "count = 3\nc_floor = 0.5"));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let fields = dir.path().join("fields");
    for (out, extra) in [(&a, Some(&fields)), (&b, None)] {
        let mut args = vec!["lap", "sweep", "--config", &cfg, "--output", out.to_str().unwrap()];
        if let Some(f) = extra {
            args.extend(["--save-fields", f.to_str().unwrap()]);
        }
        let o = lap(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv = std::fs::read(&a).unwrap();
    assert_eq!(csv, std::fs::read(&b).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("delta,norm_u_q,norm_EH_q,res1,res2,poynting_gap,diff_prev\n"));
    assert_eq!(text.lines().count(), 1 + 3 + 2);
    assert!(fields.join("E_00.lapf").exists() && fields.join("H_02.lapf").exists());

    // below the default floor 2 omega / L: rejected before solving
    let cfg = write_config(dir.path(), &PROBLEM.replace("delta0 = 0.5", "delta0 = 0.2"));
    let o = lap(&["lap", "sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("floor"));
}
