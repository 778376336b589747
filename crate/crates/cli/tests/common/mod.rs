#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poincare_cli::output::DiagnosticsRecord;
use poincare_cli::problem::{
    BoundarySpec, CoefficientSpec, CurveSpec, DecomposableSpec, OutputOptions, ProblemFile, ProblemSpec, SolverOptions,
};
use poincare_core::decomposable::ScalarFn;
use poincare_core::geometry::FourierTable;
use poincare_core::quadrature::{fourier_coefficients, wavenumber, PeriodicGrid};
use poincare_core::verification::ManufacturedCase;
use poincare_core::C64;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincare"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

pub fn diagnostics(dir: &Path) -> DiagnosticsRecord {
    let text = std::fs::read_to_string(dir.join("diagnostics.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

pub fn table(f: &ScalarFn) -> FourierTable {
    match f {
        ScalarFn::Table(t) => t.clone(),
        ScalarFn::Func(_) => panic!("manufactured coefficients are tables"),
    }
}

/// Fourier table of a smooth periodic function, from 256 samples.
pub fn interpolate(f: impl Fn(f64) -> f64) -> FourierTable {
    let grid = PeriodicGrid::new(256).unwrap();
    let values: Vec<C64> = grid.nodes().into_iter().map(|t| C64::from(f(t))).collect();
    let c = fourier_coefficients(&values);
    let mut out = FourierTable::constant(c[0].re);
    out.cos = vec![0.0; 127];
    out.sin = vec![0.0; 127];
    for (i, ck) in c.iter().enumerate() {
        let k = wavenumber(i, 256);
        if (1..128).contains(&k) {
            out.cos[k as usize - 1] = 2.0 * ck.re;
            out.sin[k as usize - 1] = -2.0 * ck.im;
        }
    }
    out
}

pub fn manufactured_file(case: &ManufacturedCase) -> ProblemFile {
    let curve_spec = CurveSpec::Ellipse { a: 1.5, b: 1.0 };
    let curve = curve_spec.build().unwrap();
    let rows = |m: &poincare_core::decomposable::MatrixFn| -> Vec<Vec<FourierTable>> {
        (0..2).map(|r| (0..2).map(|c| table(m.entry(r, c))).collect()).collect()
    };
    ProblemFile {
        version: 1,
        problem: ProblemSpec::Decomposable(DecomposableSpec {
            curve: curve_spec,
            coeffs: CoefficientSpec {
                a: (0..2).map(|j| case.coeffs.a(j)).collect(),
                b: (0..2).map(|j| case.coeffs.b(j)).collect(),
                c: (0..2).map(|j| case.coeffs.c(j)).collect(),
            },
            boundary: BoundarySpec {
                preset: None,
                p: Some(rows(&case.p)),
                q: Some(rows(&case.q)),
                r: None,
            },
            f: (0..2)
                .map(|k| interpolate(|t| case.boundary_value(&curve, k, t)))
                .collect(),
        }),
        solver: Some(SolverOptions {
            nodes: Some(128),
            tol: Some(1e-8),
        }),
        output: Some(OutputOptions {
            grid: Some("5:9:3,0:6.283185307179586:12".into()),
        }),
    }
}
