//! Subcommands. Each returns an exit code; artifacts go to the output directory.

use std::path::{Path, PathBuf};

use poincare_core::bitsadze::{self, BitsadzeSolution, BoundaryMatrixPreset, FixtureStatus};
use poincare_core::decomposable::{diagnose_poincare, solve_poincare, FieldSolution};
use poincare_core::geometry::{Curve, FourierTable};
use poincare_core::quadrature::{BoundarySamples, PeriodicGrid};
use poincare_core::sie::{self, NoetherDiagnostics, SolveStatus, RANK_TOL};
use poincare_core::verification::{fd_directional, run_certificates, Certificate};
use poincare_core::{Error, C64};

use crate::output::*;
use crate::problem::{BitsadzeSpec, ProblemFile, ProblemSpec};
use crate::terms::{PolarGrid, DEFAULT_GRID};
use crate::{exit, exit_code, InputError};

pub const DEFAULT_NODES: usize = 128;
pub const DEFAULT_BITSADZE_NODES: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_FAMILY_SIZE: u32 = 5;

/// Flags shared by the subcommands; command-line values override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub grid: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("poincare-out"))
    }
}

enum Failure {
    Input(InputError),
    Core(Error),
    Io(std::io::Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn report(result: Result<i32, Failure>) -> i32 {
    match result {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            exit::INPUT
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            exit::INPUT
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Settings {
    nodes: usize,
    tol: f64,
    grid: PolarGrid,
    artifacts: Artifacts,
}

fn settings(file: Option<&ProblemFile>, o: &Overrides, default_nodes: usize) -> Result<Settings, Failure> {
    let nodes = o.nodes.or(file.and_then(|f| f.nodes())).unwrap_or(default_nodes);
    PeriodicGrid::new(nodes).map_err(|e| InputError::new(e.to_string()))?;
    let tol = o.tol.or(file.and_then(|f| f.tol())).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(InputError::new(format!("tolerance must be positive, got {tol}")).into());
    }
    let grid_text = o
        .grid
        .clone()
        .or(file.and_then(|f| f.grid().map(str::to_string)))
        .unwrap_or(DEFAULT_GRID.to_string());
    let grid = PolarGrid::parse(&grid_text)?;
    let artifacts = Artifacts::create(&o.out_dir())?;
    Ok(Settings {
        nodes,
        tol,
        grid,
        artifacts,
    })
}

pub fn cmd_solve(path: &Path, o: &Overrides) -> i32 {
    report(solve_inner(path, o))
}

fn solve_inner(path: &Path, o: &Overrides) -> Result<i32, Failure> {
    let file = ProblemFile::read(path)?;
    match &file.problem {
        ProblemSpec::Decomposable(spec) => {
            let s = settings(Some(&file), o, DEFAULT_NODES)?;
            let problem = spec.build()?;
            s.artifacts.write_text(PROBLEM_FILE, &file.to_canonical())?;
            log::info!("solving {}-component problem on {} nodes", problem.n(), s.nodes);
            match solve_poincare(&problem, s.nodes, s.tol) {
                Ok(sol) => {
                    write_field_solution(&s, &problem.curve, &sol)?;
                    println!(
                        "solvable: κ = {}, l = {}, l′ = {}, boundary residual on 2N grid = {:.3e}{}",
                        sol.diagnostics.kappa.unwrap_or(0),
                        sol.diagnostics.l,
                        sol.diagnostics.l_prime,
                        sol.fine_grid_residual,
                        if sol.equivalence_certified() {
                            ""
                        } else {
                            " (above 10×tol: density under-resolved)"
                        }
                    );
                    Ok(exit::SOLVABLE)
                }
                Err(e) => noether_failure(&s, e),
            }
        }
        ProblemSpec::Singular(spec) => {
            let s = settings(Some(&file), o, DEFAULT_NODES)?;
            let sys = spec.build(s.nodes)?;
            s.artifacts.write_text(PROBLEM_FILE, &file.to_canonical())?;
            let (mut diag, disc, nulls) = match sie::diagnose(&sys, RANK_TOL) {
                Ok(v) => v,
                Err(e) => return noether_failure(&s, e),
            };
            let out = sie::solve(&disc.matrix, &disc.rhs, &disc.weights, &nulls, s.tol);
            diag.residuals = out.residuals.clone();
            diag.solvability_limit = out.limit;
            s.artifacts
                .write_json(DIAGNOSTICS_FILE, &DiagnosticsRecord::from(&diag))?;
            let grid = sys.curve.grid.nodes();
            let rows: Vec<Vec<f64>> = grid
                .iter()
                .enumerate()
                .map(|(i, &t)| vec![t, out.mu[i].re, out.mu[i].im])
                .collect();
            s.artifacts
                .write_csv(DENSITY_FILE, &["theta".into(), "mu_re".into(), "mu_im".into()], &rows)?;
            if out.status == SolveStatus::Unsolvable {
                eprintln!(
                    "unsolvable: solvability residuals {:?} exceed {:.3e}",
                    out.residuals, out.limit
                );
                return Ok(exit::UNSOLVABLE);
            }
            println!(
                "solvable: κ = {}, l = {}, l′ = {}",
                diag.kappa.unwrap_or(0),
                diag.l,
                diag.l_prime
            );
            Ok(exit::SOLVABLE)
        }
        ProblemSpec::Bitsadze(spec) => {
            let s = settings(Some(&file), o, DEFAULT_BITSADZE_NODES)?;
            s.artifacts.write_text(PROBLEM_FILE, &file.to_canonical())?;
            run_bitsadze(spec, &s)
        }
    }
}

/// Writes whatever diagnostics an unsolvable or non-normal run carries and maps the error.
fn noether_failure(s: &Settings, e: Error) -> Result<i32, Failure> {
    let diag: Option<&NoetherDiagnostics> = match &e {
        Error::Unsolvable { diagnostics, .. } => Some(diagnostics),
        Error::NotNormal {
            diagnostics: Some(d), ..
        } => Some(d),
        _ => None,
    };
    if let Some(d) = diag {
        s.artifacts.write_json(DIAGNOSTICS_FILE, &DiagnosticsRecord::from(d))?;
    }
    if let Error::Unsolvable { residuals, diagnostics } = &e {
        for (k, r) in residuals.iter().enumerate() {
            if *r > diagnostics.solvability_limit {
                eprintln!(
                    "unsolvable: orthogonality to adjoint kernel element {} violated: residual = {r:.4} (limit {:.1e})",
                    k + 1,
                    diagnostics.solvability_limit
                );
            }
        }
        return Ok(exit::UNSOLVABLE);
    }
    Err(Failure::Core(e))
}

fn write_field_solution(s: &Settings, curve: &Curve, sol: &FieldSolution) -> Result<(), Failure> {
    let n = sol.field.components();
    s.artifacts
        .write_json(DIAGNOSTICS_FILE, &DiagnosticsRecord::from(&sol.diagnostics))?;
    let grid = sol.density.grid().clone();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            std::iter::once(grid.theta(i))
                .chain((0..n).map(|j| sol.density.component(j)[i].re))
                .collect()
        })
        .collect();
    let mut header = vec!["theta".to_string()];
    header.extend(numbered("mu", n));
    s.artifacts.write_csv(DENSITY_FILE, &header, &rows)?;

    let mut skipped = 0;
    let rows: Vec<Vec<f64>> = s
        .grid
        .points()
        .into_iter()
        .map(|(x, y)| {
            let u = if curve.in_exterior(C64::new(x, y)) {
                sol.u(x, y).ok()
            } else {
                None
            };
            let u = u.unwrap_or_else(|| {
                skipped += 1;
                vec![f64::NAN; n]
            });
            [x, y].into_iter().chain(u).collect()
        })
        .collect();
    if skipped > 0 {
        log::warn!("{skipped} grid points are inside the curve or too close to it; written as nan");
    }
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend(numbered("u", n));
    s.artifacts.write_csv(FIELD_FILE, &header, &rows)?;
    Ok(())
}

pub fn cmd_diagnose(path: &Path, o: &Overrides) -> i32 {
    report(diagnose_inner(path, o))
}

fn diagnose_inner(path: &Path, o: &Overrides) -> Result<i32, Failure> {
    let file = ProblemFile::read(path)?;
    let s = settings(Some(&file), o, DEFAULT_NODES)?;
    let diag = match &file.problem {
        ProblemSpec::Decomposable(spec) => diagnose_poincare(&spec.build()?, s.nodes),
        ProblemSpec::Singular(spec) => sie::diagnose(&spec.build(s.nodes)?, RANK_TOL).map(|d| d.0),
        ProblemSpec::Bitsadze(spec) => {
            let rec = bitsadze_record(spec.preset, Vec::new(), Vec::new());
            return finish_diagnose(&s, &rec);
        }
    };
    match diag {
        Ok(d) => finish_diagnose(&s, &DiagnosticsRecord::from(&d)),
        Err(Error::NotNormal {
            diagnostics: Some(d), ..
        }) => finish_diagnose(&s, &DiagnosticsRecord::from(d.as_ref())),
        Err(e) => Err(e.into()),
    }
}

fn finish_diagnose(s: &Settings, rec: &DiagnosticsRecord) -> Result<i32, Failure> {
    s.artifacts.write_json(DIAGNOSTICS_FILE, rec)?;
    println!("{}", serde_json::to_string_pretty(rec).expect("diagnostics serialize"));
    Ok(if rec.normal { exit::SOLVABLE } else { exit::NOT_NORMAL })
}

/// For the Bitsadze presets `normal` reports `det(P + iQ) ≠ 0` on the
/// unit circle; the index and kernel counts are not computed.
fn bitsadze_record(preset: BoundaryMatrixPreset, residuals: Vec<f64>, moments: Vec<f64>) -> DiagnosticsRecord {
    let grid = PeriodicGrid::new(64).expect("valid grid");
    let normal = grid.nodes().into_iter().all(|t| preset.det_p_plus_iq(t).norm() > 1e-12);
    DiagnosticsRecord {
        normal,
        kappa: None,
        l: None,
        l_prime: None,
        residuals,
        moments,
    }
}

/// Flags of `poincare example`.
#[derive(Debug, Clone, Default)]
pub struct ExampleArgs {
    pub k: Option<u32>,
    pub f1: Option<String>,
    pub f2: Option<String>,
    pub constant: Option<f64>,
}

pub fn cmd_example(preset: &str, args: &ExampleArgs, o: &Overrides) -> i32 {
    report(example_inner(preset, args, o))
}

fn example_inner(preset: &str, args: &ExampleArgs, o: &Overrides) -> Result<i32, Failure> {
    let preset = BoundaryMatrixPreset::from_name(preset).ok_or_else(|| {
        let names: Vec<&str> = BoundaryMatrixPreset::ALL.iter().map(|p| p.name()).collect();
        InputError::new(format!(
            "unknown preset {preset:?}; expected one of {}",
            names.join(", ")
        ))
    })?;
    let parse = |text: &Option<String>, default: &str| crate::terms::parse_terms(text.as_deref().unwrap_or(default));
    let spec = BitsadzeSpec {
        preset,
        f1: parse(&args.f1, "cos1")?,
        f2: parse(&args.f2, "0")?,
        constant: args.constant.unwrap_or(0.0),
        k: args.k,
    };
    let s = settings(None, o, DEFAULT_BITSADZE_NODES)?;
    run_bitsadze(&spec, &s)
}

fn samples(grid: &PeriodicGrid, table: &FourierTable) -> BoundarySamples {
    BoundarySamples::from_real_fn(grid, |t| table.eval(t))
}

fn print_certificates(certs: &[Certificate]) {
    for c in certs {
        println!(
            "{} {}: {:.3e} (≤ {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
}

fn run_bitsadze(spec: &BitsadzeSpec, s: &Settings) -> Result<i32, Failure> {
    let grid = PeriodicGrid::new(s.nodes).map_err(|e| InputError::new(e.to_string()))?;
    match spec.preset {
        BoundaryMatrixPreset::Dirichlet | BoundaryMatrixPreset::Neumann => null_family(spec, s, &grid),
        BoundaryMatrixPreset::SpecialNeumann | BoundaryMatrixPreset::Problem6 => {
            let f1 = samples(&grid, &spec.f1);
            let f2 = samples(&grid, &spec.f2);
            let result = if spec.preset == BoundaryMatrixPreset::Problem6 {
                bitsadze::solve_problem6(&f1, &f2)
            } else {
                bitsadze::solve_special_neumann(&f1, &f2, spec.constant)
            };
            let sol = match result {
                Ok(sol) => sol,
                Err(Error::SolvabilityViolated { condition, moment }) => {
                    let rec = bitsadze_record(spec.preset, vec![moment.abs()], vec![moment]);
                    s.artifacts.write_json(DIAGNOSTICS_FILE, &rec)?;
                    eprintln!("unsolvable: {condition} violated: moment = {moment:.4}");
                    return Ok(exit::UNSOLVABLE);
                }
                Err(e) => return Err(e.into()),
            };
            let mut data = f1.values().to_vec();
            data.extend_from_slice(f2.values());
            let data = BoundarySamples::new(grid.clone(), 2, data)?;
            let r = bitsadze::boundary_residual(&sol, spec.preset, Some(&data), &grid)?;
            let scale = data.values().iter().map(|v| v.norm()).fold(1.0, f64::max);
            let mut certs = vec![
                Certificate::at_most("boundary condition 1 residual", r[0], 1e-8 * scale),
                Certificate::at_most("boundary condition 2 residual", r[1], 1e-8 * scale),
            ];
            if let Some(FixtureStatus::Discrepancy { residual }) = sol.fixture_status {
                certs.push(Certificate::at_most("special neumann fixture", residual, 1e-8 * scale));
            }
            if !sol.single_valued() {
                println!("note: ψ carries a logarithmic term; w is multivalued in the exterior");
            }
            print_certificates(&certs);
            s.artifacts.write_json(CERTIFICATES_FILE, &certs)?;
            s.artifacts.write_json(
                DIAGNOSTICS_FILE,
                &bitsadze_record(spec.preset, vec![r[0], r[1]], Vec::new()),
            )?;
            write_bitsadze_field(s, &sol)?;
            Ok(if certs.iter().all(|c| c.passed) {
                exit::SOLVABLE
            } else {
                exit::FAILURE
            })
        }
    }
}

fn write_bitsadze_field(s: &Settings, sol: &BitsadzeSolution) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = s
        .grid
        .points()
        .into_iter()
        .map(|(x, y)| {
            let z = C64::new(x, y);
            let w = if z.norm() > 1.0 { sol.eval(z).ok() } else { None };
            let w = w.unwrap_or(C64::new(f64::NAN, f64::NAN));
            vec![x, y, w.re, w.im]
        })
        .collect();
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend(numbered("u", 2));
    s.artifacts.write_csv(FIELD_FILE, &header, &rows)?;
    Ok(())
}

/// Null elements `k = 1..K` of the homogeneous dirichlet or neumann problem with their certificates.
fn null_family(spec: &BitsadzeSpec, s: &Settings, grid: &PeriodicGrid) -> Result<i32, Failure> {
    let count = spec.k.unwrap_or(DEFAULT_FAMILY_SIZE);
    if count == 0 {
        return Err(InputError::new("--k must be at least 1").into());
    }
    let dirichlet = spec.preset == BoundaryMatrixPreset::Dirichlet;
    let mut certs = Vec::new();
    let mut rows = Vec::new();
    let points = s.grid.points();
    for k in 1..=count as i64 {
        let w = if dirichlet {
            bitsadze::dirichlet_null_element(k)?
        } else {
            bitsadze::neumann_null_element(k)?
        };
        let mut worst = 0.0_f64;
        for theta in grid.nodes() {
            let t = C64::from_polar(1.0, theta);
            if dirichlet {
                worst = worst.max(w.eval(t)?.norm());
            } else {
                let (c, sn) = (theta.cos(), theta.sin());
                for part in 0..2 {
                    let field = |x: f64, y: f64| {
                        let v = w.eval(C64::new(x, y))?;
                        Ok(if part == 0 { v.re } else { v.im })
                    };
                    worst = worst.max(fd_directional(field, c, sn, (c, sn), 1e-5)?.abs());
                }
            }
        }
        let (name, tol) = if dirichlet {
            (format!("k = {k}: max |ω_k| on |z| = 1"), 1e-12)
        } else {
            (format!("k = {k}: max |∂ω_k/∂ν| on |z| = 1"), 1e-6)
        };
        certs.push(Certificate::at_most(&name, worst, tol));
        for &(x, y) in &points {
            let z = C64::new(x, y);
            let v = if z.norm() >= 1.0 {
                w.eval(z)?
            } else {
                C64::new(f64::NAN, f64::NAN)
            };
            rows.push(vec![k as f64, x, y, v.re, v.im]);
        }
    }
    print_certificates(&certs);
    s.artifacts.write_json(CERTIFICATES_FILE, &certs)?;
    let header: Vec<String> = ["k", "x", "y", "u_1", "u_2"].iter().map(|h| h.to_string()).collect();
    s.artifacts.write_csv(NULL_FAMILY_FILE, &header, &rows)?;
    s.artifacts
        .write_json(DIAGNOSTICS_FILE, &bitsadze_record(spec.preset, Vec::new(), Vec::new()))?;
    Ok(if certs.iter().all(|c| c.passed) {
        exit::SOLVABLE
    } else {
        exit::FAILURE
    })
}

pub fn cmd_verify(o: &Overrides) -> i32 {
    report(verify_inner(o))
}

fn verify_inner(o: &Overrides) -> Result<i32, Failure> {
    let nodes = o.nodes.unwrap_or(256);
    let certs = run_certificates(nodes)?;
    print_certificates(&certs);
    if let Some(dir) = &o.out_dir {
        Artifacts::create(dir)?.write_json(CERTIFICATES_FILE, &certs)?;
    }
    let failed = certs.iter().filter(|c| !c.passed).count();
    println!("{} of {} certificates passed", certs.len() - failed, certs.len());
    Ok(if failed == 0 { exit::SOLVABLE } else { exit::FAILURE })
}
