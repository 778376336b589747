use poincare_cli::output::DiagnosticsRecord;
use poincare_cli::problem::ProblemFile;
use poincare_core::verification::{random_manufactured, MANUFACTURED_SEED};
use poincare_core::C64;

mod common;

use common::*;

#[test]
fn manufactured_problem_file_solves() {
    let dir = tempfile::tempdir().unwrap();
    let case = random_manufactured(MANUFACTURED_SEED).unwrap();
    let file = manufactured_file(&case);
    let path = dir.path().join("manufactured.json");
    std::fs::write(&path, file.to_canonical()).unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out.join("field.csv"));
    assert_eq!(header, ["x", "y", "u_1", "u_2"]);
    assert_eq!(rows.len(), 36);
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for r in &rows {
        let exact = case.u(r[0], r[1]);
        for j in 0..2 {
            err = err.max((r[2 + j] - exact[j]).abs());
            scale = scale.max(exact[j].abs());
        }
    }
    assert!(err / scale <= 1e-6, "relative field error {:e}", err / scale);

    let (header, rows) = read_csv(&out.join("density.csv"));
    assert_eq!(header, ["theta", "mu_1", "mu_2"]);
    assert_eq!(rows.len(), 128);

    let d = diagnostics(&out);
    assert!(d.normal);
    assert_eq!(d.kappa, Some(0));
    assert_eq!(d.moments.len(), 2);

    // the copy written by the tool is canonical and re-parses to the same problem
    let written = std::fs::read_to_string(out.join("problem.json")).unwrap();
    assert_eq!(written, file.to_canonical());
    assert_eq!(ProblemFile::parse(&written).unwrap(), file);
}

#[test]
fn laplace_neumann_solves_and_recovers_dipole() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["solve", fixture("laplace_neumann.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("field.csv"));
    assert_eq!(rows.len(), 24);
    for r in rows {
        // ∂u/∂r = −cos θ on |z| = 1 for u = Re(1/z)
        let z = C64::new(r[0], r[1]);
        assert!((r[2] - (1.0 / z).re).abs() < 1e-10, "{r:?}");
    }
    let d = diagnostics(dir.path());
    assert_eq!((d.normal, d.kappa), (true, Some(0)));
}

#[test]
fn nonzero_mean_data_is_unsolvable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["solve", fixture("laplace_nonzero_mean.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("adjoint kernel"), "{stderr}");
    let d = diagnostics(dir.path());
    assert_eq!(d.residuals.len(), 1);
    assert!(
        (d.residuals[0] - 2.0 * std::f64::consts::PI * 0.5).abs() < 1e-8,
        "{:?}",
        d.residuals
    );
}

#[test]
fn malformed_and_unknown_inputs_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", fixture("malformed.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = run(
        &["solve", dir.path().join("missing.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    let extra = std::fs::read_to_string(fixture("laplace_neumann.json"))
        .unwrap()
        .replace("\"version\": 1,", "\"version\": 1, \"colour\": 3,");
    let path = dir.path().join("extra.json");
    std::fs::write(&path, extra).unwrap();
    let o = run(&["solve", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["example", "robin"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let o = run(
        &[
            "solve",
            fixture("laplace_neumann.json").to_str().unwrap(),
            "--nodes",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    let o = run(
        &[
            "solve",
            fixture("laplace_neumann.json").to_str().unwrap(),
            "--grid",
            "1:2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn diagnose_reports_normality_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["diagnose", fixture("laplace_neumann.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let d = diagnostics(dir.path());
    assert_eq!((d.normal, d.kappa), (true, Some(0)));

    let o = run(
        &["diagnose", fixture("synthetic_index_two.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let d = diagnostics(dir.path());
    assert_eq!((d.kappa, d.l, d.l_prime), (Some(2), Some(2), Some(0)));
    let printed: DiagnosticsRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, d);

    let o = run(&["diagnose", fixture("alpha_zero.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(!diagnostics(dir.path()).normal);
    let o = run(&["solve", fixture("alpha_zero.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dirichlet_example_emits_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["example", "dirichlet", "--k", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let certs: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certificates.json")).unwrap()).unwrap();
    assert_eq!(certs.len(), 5);
    for c in &certs {
        assert!(c["passed"].as_bool().unwrap());
        assert!(c["value"].as_f64().unwrap() <= 1e-12);
    }
    let (header, rows) = read_csv(&dir.path().join("null_family.csv"));
    assert_eq!(header, ["k", "x", "y", "u_1", "u_2"]);
    assert_eq!(rows.len(), 5 * 80);
}

#[test]
fn neumann_example_emits_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["example", "neumann", "--k", "3", "--nodes", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn problem6_example_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["example", "problem6", "--f1", "cos1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let d = diagnostics(dir.path());
    assert!(d.normal);
    assert!(d.residuals.iter().all(|&r| r <= 1e-8));

    let o = run(&["example", "problem6", "--f1", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("zero-mean condition on f1"), "{stderr}");
    let d = diagnostics(dir.path());
    assert!((d.moments[0] - 2.0 * std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn special_neumann_example_and_problem6_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "example",
            "special_neumann",
            "--f1",
            "cos1",
            "--f2",
            "-0.5*sin2",
            "--K",
            "0.25",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!diagnostics(dir.path()).normal);

    let o = run(&["solve", fixture("problem6.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("field.csv"));
    assert_eq!(header, ["x", "y", "u_1", "u_2"]);
    assert!(rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
}

#[test]
fn verify_runs_the_certificate_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("certificates.json").exists());
}
