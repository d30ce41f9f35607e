use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sk_core::dense::io::{write_matrix, write_vector};
use sk_core::dense::DenseMatrix;
use sk_core::problems::ep_diag_128;
use sk_core::solvers::{solve, trace_csv, SolverConfig};
use tempfile::TempDir;

fn sk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to run sk")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_system(dir: &Path, a: &DenseMatrix, b: &[f64]) {
    write_matrix(dir.join("A.txt"), a).unwrap();
    write_vector(dir.join("b.txt"), b).unwrap();
}

fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
        .to_string()
}

#[test]
fn identity_system_converges_in_one_step() {
    let dir = TempDir::new().unwrap();
    write_system(dir.path(), &DenseMatrix::identity(3), &[1.0, 2.0, 3.0]);
    let out = sk(&["solve", "A.txt", "b.txt", "--out", "trace.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("iter,resnorm_rel,normal_resnorm_rel"));
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn nilpotent_start_exits_with_no_solution() {
    let dir = TempDir::new().unwrap();
    let out = sk(&["export", "gp_2x2", "--eps", "0", "--outdir", "p"], dir.path());
    assert_eq!(code(&out), 0);
    for method in ["gmres", "rrgmres"] {
        let out = sk(
            &["solve", "p/gp_2x2_A.txt", "p/gp_2x2_b.txt", "--method", method],
            dir.path(),
        );
        assert_eq!(code(&out), 2, "{method}");
    }
}

#[test]
fn solve_trace_matches_library_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let out = sk(
        &["export", "ep_diag_128", "--gamma", "1", "--delta", "1", "--outdir", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let out = sk(
        &["solve", "ep_diag_128_A.txt", "ep_diag_128_b.txt", "--maxiter", "128"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);

    let p = ep_diag_128(1.0, 1.0).unwrap();
    let config = SolverConfig {
        max_iter: 128,
        ..SolverConfig::default()
    };
    let trace = solve(&p.a, &p.b, &p.x0, &config).unwrap();
    assert_eq!(stdout(&out), trace_csv(&trace));
}

#[test]
fn diagnose_reports_classification() {
    let dir = TempDir::new().unwrap();
    write_matrix(dir.path().join("d.txt"), &DenseMatrix::from_diag(&[1.0, 0.0])).unwrap();
    let out = sk(&["diagnose", "d.txt"], dir.path());
    assert_eq!(code(&out), 0);
    let report = stdout(&out);
    assert_eq!(report_value(&report, "isEP"), "true");
    assert_eq!(report_value(&report, "rank"), "1");

    write_matrix(dir.path().join("z.txt"), &DenseMatrix::zeros(3, 3)).unwrap();
    let out = sk(&["diagnose", "z.txt"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(report_value(&stdout(&out), "rank"), "0");

    let out = sk(&["export", "strakos_gp_128", "--rho", "8", "--outdir", "."], dir.path());
    assert_eq!(code(&out), 0);
    let out = sk(&["diagnose", "strakos_gp_128_A.txt"], dir.path());
    assert_eq!(code(&out), 0);
    let kappa: f64 = report_value(&stdout(&out), "kappaK").parse().unwrap();
    let expected = 1e8 / 2f64.sqrt();
    assert!((kappa / expected - 1.0).abs() < 0.01, "kappaK {kappa:e}");
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    write_matrix(dir.path().join("r.txt"), &DenseMatrix::zeros(2, 3)).unwrap();
    fs::write(dir.path().join("bad.txt"), "2 2\n1 2\n3\n").unwrap();
    let cases: [&[&str]; 5] = [
        &["diagnose", "r.txt"],
        &["diagnose", "bad.txt"],
        &["diagnose", "missing.txt"],
        &["reproduce", "no-such-figure"],
        &["solve", "--maxiter", "ten"],
    ];
    for args in cases {
        let out = sk(args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_with_zero() {
    let dir = TempDir::new().unwrap();
    let out = sk(&["--help"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("reproduce"));
}

#[test]
fn reproduce_writes_deterministic_traces_and_charts() {
    let dir = TempDir::new().unwrap();
    let mut listings = Vec::new();
    for run in ["one", "two"] {
        let out = sk(&["reproduce", "relres", "--outdir", run], dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let mut names: Vec<String> = fs::read_dir(dir.path().join(run))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        listings.push(names);
    }
    assert_eq!(listings[0], listings[1]);
    let names = &listings[0];
    assert_eq!(names.iter().filter(|n| n.ends_with(".csv")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.ends_with(".svg")).count(), 2);

    for name in names {
        let a = fs::read(dir.path().join("one").join(name)).unwrap();
        let b = fs::read(dir.path().join("two").join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
        if name.ends_with(".svg") {
            let svg = String::from_utf8(a).unwrap();
            assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
            assert!(svg.trim_end().ends_with("</svg>"));
            assert_eq!(svg.matches("<polyline").count(), 4, "{name}");
            assert!(svg.matches(r#"class="grid""#).count() >= 2, "{name}");
        }
    }
}
