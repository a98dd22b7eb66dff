//! Square-well Schrödinger operators `-d²/dx² + V_h` whose resolvents converge
//! to the free Laplacian while a bound state persists below zero.
//!
//! Variant 1 is the unit well `-1` on `[h, h + 1]`, variant 2 the half-line
//! well `-1` on `[h, ∞)`. Both live on `[-left_pad, l_big]` with Dirichlet
//! ends and the three-point Laplacian; nodes sit on every integer, and the
//! potential takes its mean value `-1/2` at the jump nodes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::eigenvalue_by_index;
use crate::error::{Error, Result};
use crate::factor::count_below;
use crate::grid::SpinorField;
use crate::operator::HermitianOperator;
use crate::resolvent::Resolvent;

/// Relative residual of the resolvent solves. The three-point Laplacian has
/// norm `4 / dx²`, which puts the rounding floor of the residual near 1e-10
/// at the default resolution; discrepancies are judged at the 1e-6 level.
pub const WELL_SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellSpec {
    /// 1: unit well on `[h, h + 1]`; 2: half-line well on `[h, l_big]`.
    pub variant: u8,
    pub h: u32,
    /// Right end of the domain.
    pub l_big: u32,
    /// Grid points per unit length.
    pub points_per_unit: u32,
    /// Extent of the domain to the left of the origin.
    pub left_pad: u32,
}

impl WellSpec {
    pub fn new(variant: u8, h: u32) -> Self {
        WellSpec {
            variant,
            h,
            l_big: 200,
            points_per_unit: 400,
            left_pad: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.variant, 1 | 2) {
            return Err(Error::config("counterexample.variant", "must be 1 or 2"));
        }
        if self.h == 0 {
            return Err(Error::config("counterexample.h", "must be positive"));
        }
        if self.points_per_unit < 4 {
            return Err(Error::config("counterexample.points_per_unit", "must be at least 4"));
        }
        let need = if self.variant == 1 { self.h + 20 } else { self.h + 1 };
        if self.l_big < need {
            return Err(Error::config(
                "counterexample.l_big",
                format!("domain too small: l_big = {} < {need}", self.l_big),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.points_per_unit as f64
    }

    /// Interior nodes.
    pub fn len(&self) -> usize {
        ((self.left_pad + self.l_big) * self.points_per_unit) as usize - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of interior node `j`.
    pub fn node(&self, j: usize) -> f64 {
        self.ticks(j) as f64 * self.dx()
    }

    /// Node position in units of `dx`, exact.
    fn ticks(&self, j: usize) -> i64 {
        (j as i64 + 1) - (self.left_pad * self.points_per_unit) as i64
    }

    fn potential(&self, j: usize) -> f64 {
        let k = self.ticks(j);
        let p = self.points_per_unit as i64;
        let lo = self.h as i64 * p;
        let hi = lo + p;
        match self.variant {
            1 if k > lo && k < hi => -1.0,
            1 if k == lo || k == hi => -0.5,
            2 if k > lo => -1.0,
            2 if k == lo => -0.5,
            _ => 0.0,
        }
    }

    /// Field on this grid sampled from `f`.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SpinorField {
        let vals = (0..self.len()).map(|j| Complex64::new(f(self.node(j)), 0.0)).collect();
        SpinorField::new(vals, 1, self.dx())
    }
}

fn laplacian_with(ws: &WellSpec, potential: impl Fn(usize) -> f64) -> Result<HermitianOperator> {
    ws.validate()?;
    let n = ws.len();
    let dx = ws.dx();
    let diag = (0..n).map(|j| 2.0 / (dx * dx) + potential(j)).collect();
    let sub = vec![Complex64::new(-1.0 / (dx * dx), 0.0); n - 1];
    HermitianOperator::tridiagonal(diag, sub, 1, dx)
}

pub fn assemble_schrodinger(ws: &WellSpec) -> Result<HermitianOperator> {
    Ok(laplacian_with(ws, |j| ws.potential(j))?.with_provenance(format!(
        "schrodinger variant={} h={} domain=[-{}, {}] dx={:e}",
        ws.variant,
        ws.h,
        ws.left_pad,
        ws.l_big,
        ws.dx()
    )))
}

/// Free Dirichlet Laplacian on the same grid as `ws`.
pub fn assemble_free_laplacian(ws: &WellSpec) -> Result<HermitianOperator> {
    laplacian_with(ws, |_| 0.0)
}

/// Ground state of a square well of the given depth and width, from the
/// even-parity matching condition `q tan(q w / 2) = κ`, `q² + κ² = depth`,
/// solved by bisection.
pub fn square_well_ground_state(depth: f64, width: f64) -> f64 {
    let f = |q: f64| q * (0.5 * q * width).sin() - (depth - q * q).max(0.0).sqrt() * (0.5 * q * width).cos();
    let mut lo = 0.0;
    let mut hi = depth.sqrt().min(std::f64::consts::PI / width);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let q = 0.5 * (lo + hi);
    q * q - depth
}

/// The unique eigenvalue of the variant-1 operator in `(-1, 0)`.
pub fn bound_state_energy(ws: &WellSpec) -> Result<f64> {
    if ws.variant != 1 {
        return Err(Error::config(
            "counterexample.variant",
            "bound state energy needs variant 1",
        ));
    }
    let a = assemble_schrodinger(ws)?;
    let inside = count_below(&a, 0.0)? - count_below(&a, -1.0)?;
    if inside != 1 {
        return Err(Error::Experiment(format!(
            "expected one eigenvalue in (-1, 0), found {inside}; the grid is too coarse"
        )));
    }
    eigenvalue_by_index(&a, 0)
}

/// Lowest eigenvalue of the variant-2 operator.
pub fn spectrum_bottom(ws: &WellSpec) -> Result<f64> {
    eigenvalue_by_index(&assemble_schrodinger(ws)?, 0)
}

/// Smooth bump supported in `[0, 1]`.
pub fn unit_bump(x: f64) -> f64 {
    let t = 2.0 * x - 1.0;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub h: u32,
    pub mu_h: f64,
    /// `||(A_{1,h} + λ)^{-1} f - (A + λ)^{-1} f||` with `A` the free Laplacian.
    pub discrepancy: f64,
    pub bottom_variant2: f64,
    /// Same discrepancy for variant 2 at shift `λ + 1`.
    pub discrepancy_variant2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub shift: f64,
    pub oracle_mu: f64,
    pub rows: Vec<CounterexampleRow>,
    /// `max_h |μ_h - oracle|`.
    pub oracle_error: f64,
    /// `max μ_h - min μ_h`.
    pub mu_spread: f64,
    pub discrepancy_decreasing: bool,
    pub variant2_decreasing: bool,
    /// `max_h |bottom + 1|`.
    pub variant2_bottom_error: f64,
    /// Smallest eigenvalue of the free Laplacian.
    pub free_min_eigenvalue: f64,
}

fn strictly_decreasing_or_floor(seq: &[f64], floor: f64) -> bool {
    seq.windows(2).all(|w| w[1] < w[0] || w[1] <= floor)
}

/// Resolvent actions against the free Laplacian and the persistent bound
/// state, over increasing well positions `h_list`.
///
/// Variant 2 has spectrum down to about `-1`, so its resolvent is taken at
/// `λ + 1` to keep the shifted operator uniformly positive.
pub fn srs_vs_spectrum_report(base: &WellSpec, h_list: &[u32], shift: f64) -> Result<CounterexampleReport> {
    if h_list.is_empty() || h_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("h_list", "must be nonempty and strictly increasing"));
    }
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::config("shift", "must be positive and finite"));
    }
    let mut base = *base;
    base.variant = 1;
    base.h = *h_list.last().expect("nonempty");
    base.validate()?;
    let free = assemble_free_laplacian(&base)?;
    let f = base.sample(unit_bump);
    let free_action = Resolvent::new(&free, shift, WELL_SOLVE_TOL)?.solve(&f)?;
    let free_action2 = Resolvent::new(&free, shift + 1.0, WELL_SOLVE_TOL)?.solve(&f)?;
    let free_min_eigenvalue = eigenvalue_by_index(&free, 0)?;

    let rows: Vec<CounterexampleRow> = h_list
        .par_iter()
        .map(|&h| {
            let ws1 = WellSpec { h, variant: 1, ..base };
            let ws2 = WellSpec { h, variant: 2, ..base };
            let a1 = assemble_schrodinger(&ws1)?;
            let a2 = assemble_schrodinger(&ws2)?;
            let r1 = Resolvent::new(&a1, shift, WELL_SOLVE_TOL)?.solve(&f)?;
            let r2 = Resolvent::new(&a2, shift + 1.0, WELL_SOLVE_TOL)?.solve(&f)?;
            Ok(CounterexampleRow {
                h,
                mu_h: bound_state_energy(&ws1)?,
                discrepancy: r1.sub(&free_action).norm(),
                bottom_variant2: eigenvalue_by_index(&a2, 0)?,
                discrepancy_variant2: r2.sub(&free_action2).norm(),
            })
        })
        .collect::<Result<_>>()?;

    let oracle_mu = square_well_ground_state(1.0, 1.0);
    let mus: Vec<f64> = rows.iter().map(|r| r.mu_h).collect();
    let d1: Vec<f64> = rows.iter().map(|r| r.discrepancy).collect();
    let d2: Vec<f64> = rows.iter().map(|r| r.discrepancy_variant2).collect();
    // Discrepancies below the solver floor cannot keep decreasing.
    let floor = 10.0 * WELL_SOLVE_TOL * f.norm();
    Ok(CounterexampleReport {
        shift,
        oracle_mu,
        oracle_error: mus.iter().map(|m| (m - oracle_mu).abs()).fold(0.0, f64::max),
        mu_spread: mus.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - mus.iter().copied().fold(f64::INFINITY, f64::min),
        discrepancy_decreasing: strictly_decreasing_or_floor(&d1, floor),
        variant2_decreasing: strictly_decreasing_or_floor(&d2, floor),
        variant2_bottom_error: rows.iter().map(|r| (r.bottom_variant2 + 1.0).abs()).fold(0.0, f64::max),
        free_min_eigenvalue,
        rows,
    })
}
