//! Command-line shorthands: Fourier data terms and polar output grids.

use std::f64::consts::PI;

use poincare_core::geometry::FourierTable;

use crate::InputError;

/// Parses comma-separated terms such as `1,cos1,-0.5*sin2` into a Fourier table.
///
/// A term is a number, `cosK`, `sinK`, or `A*cosK` / `A*sinK`. Repeated
/// terms add up.
pub fn parse_terms(text: &str) -> Result<FourierTable, InputError> {
    let mut table = FourierTable::constant(0.0);
    for raw in text.split(',') {
        let term = raw.trim();
        if term.is_empty() {
            return Err(InputError::new(format!("empty term in {text:?}")));
        }
        let (amp, basis) = match term.split_once('*') {
            Some((a, b)) => (parse_number(a)?, b.trim()),
            None if term.starts_with("cos") || term.starts_with("sin") => (1.0, term),
            None => (parse_number(term)?, ""),
        };
        if basis.is_empty() {
            table.constant += amp;
            continue;
        }
        let (is_cos, k) = if let Some(k) = basis.strip_prefix("cos") {
            (true, k)
        } else if let Some(k) = basis.strip_prefix("sin") {
            (false, k)
        } else {
            return Err(InputError::new(format!("unknown basis function {basis:?}")));
        };
        let k: usize = k
            .parse()
            .map_err(|_| InputError::new(format!("bad wavenumber in {term:?}")))?;
        if k == 0 {
            return Err(InputError::new(format!("wavenumber must be positive in {term:?}")));
        }
        let coeffs = if is_cos { &mut table.cos } else { &mut table.sin };
        if coeffs.len() < k {
            coeffs.resize(k, 0.0);
        }
        coeffs[k - 1] += amp;
    }
    Ok(table)
}

fn parse_number(s: &str) -> Result<f64, InputError> {
    s.trim()
        .parse()
        .map_err(|_| InputError::new(format!("bad number {s:?}")))
}

/// Polar evaluation grid: `nr` radii from `r0` to `r1` and `nt` angles from
/// `t0` to `t1`, endpoints included (the angle endpoint is dropped when the
/// range covers a full turn).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub r0: f64,
    pub r1: f64,
    pub nr: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl PolarGrid {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let err = || InputError::new(format!("grid must look like \"r0:r1:nr,t0:t1:nt\", got {text:?}"));
        let (r, t) = text.split_once(',').ok_or_else(err)?;
        let triple = |s: &str| -> Result<(f64, f64, usize), InputError> {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(err());
            }
            let a = parts[0].parse().map_err(|_| err())?;
            let b = parts[1].parse().map_err(|_| err())?;
            let n = parts[2].parse().map_err(|_| err())?;
            Ok((a, b, n))
        };
        let (r0, r1, nr) = triple(r)?;
        let (t0, t1, nt) = triple(t)?;
        if nr == 0 || nt == 0 || !(r0 > 0.0) || r1 < r0 || !t1.is_finite() || !t0.is_finite() {
            return Err(err());
        }
        Ok(PolarGrid { r0, r1, nr, t0, t1, nt })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let full_turn = ((self.t1 - self.t0).abs() - 2.0 * PI).abs() < 1e-12;
        let step = |a: f64, b: f64, n: usize, closed: bool| {
            if n == 1 {
                0.0
            } else if closed {
                (b - a) / n as f64
            } else {
                (b - a) / (n - 1) as f64
            }
        };
        let dr = step(self.r0, self.r1, self.nr, false);
        let dt = step(self.t0, self.t1, self.nt, full_turn);
        let mut out = Vec::with_capacity(self.nr * self.nt);
        for i in 0..self.nr {
            let r = self.r0 + dr * i as f64;
            for j in 0..self.nt {
                let t = self.t0 + dt * j as f64;
                out.push((r * t.cos(), r * t.sin()));
            }
        }
        out
    }
}

pub const DEFAULT_GRID: &str = "2:6:5,0:6.283185307179586:16";
