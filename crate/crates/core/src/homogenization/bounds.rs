//! The inverse-eigenvalue bound `|1/μ_h - 1/μ| <= c sup ||K_h u - K u||` and the
//! consistency of the limit eigenpair with the homogenized eigenproblem.

use num_complex::Complex64;
use serde::Serialize;

use super::sweep::GapSweep;
use super::weak::period_average;
use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::operator::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint {
    pub h: u32,
    /// `|1/μ_h - 1/μ|`.
    pub lhs: f64,
    /// `sup ||K_h u - K u||` over the limit eigenspace.
    pub sup_discrepancy: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseBoundReport {
    /// 1-based eigenvalue index.
    pub k: usize,
    pub points: Vec<BoundPoint>,
    /// Smallest constant for which the bound holds on every point.
    pub c: f64,
    /// Same fit restricted to the larger-h half of the points.
    pub c_upper_half: f64,
    /// `c` and `c_upper_half` agree within a factor of two.
    pub stable: bool,
    pub holds: bool,
    /// h values skipped because the eigenspace dimension changed.
    pub multiplicity_change: Vec<u32>,
}

fn ratio(lhs: f64, s: f64) -> f64 {
    if lhs <= 1e-15 {
        0.0
    } else if s == 0.0 {
        f64::INFINITY
    } else {
        lhs / s
    }
}

/// Fits the constant of the bound (with the nuisance sequence set to zero, so
/// `c λ/(λ - r) = c` in the inverse convention) on `points` sorted by h.
pub fn fit_bound_constant(k: usize, points: Vec<BoundPoint>, skipped: Vec<u32>) -> Result<InverseBoundReport> {
    if points.len() < 3 {
        return Err(Error::Experiment("need ≥ 3 values of h to fit c".into()));
    }
    let c = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let half = points.len().div_ceil(2);
    let c_upper_half = points[points.len() - half..]
        .iter()
        .map(|p| p.ratio)
        .fold(0.0, f64::max);
    let stable = c.is_finite() && c_upper_half <= 2.0 * c && c <= 2.0 * c_upper_half;
    let holds = c.is_finite()
        && points
            .iter()
            .all(|p| p.lhs <= c * p.sup_discrepancy * (1.0 + 1e-12) + 1e-15);
    Ok(InverseBoundReport {
        k,
        points,
        c,
        c_upper_half,
        stable,
        holds,
        multiplicity_change: skipped,
    })
}

/// Bound check for the `k`-th (1-based) gap eigenvalue of a sweep, computed on
/// the positive point restrictions.
pub fn inverse_bound_check(sweep: &GapSweep, k: usize) -> Result<InverseBoundReport> {
    if k == 0 {
        return Err(Error::config("k", "eigenvalue index is 1-based"));
    }
    let hom_values: Vec<f64> = sweep.hom.pairs.iter().map(|p| p.value).collect();
    let mu = *hom_values
        .get(k - 1)
        .ok_or_else(|| Error::Experiment(format!("limit operator has no gap eigenvalue {k}")))?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for r in &sweep.records {
        if r.eig_errors.len() < k {
            return Err(Error::Experiment(format!("no gap eigenvalue {k} at h = {}", r.h)));
        }
        if r.multiplicity_change[k - 1] {
            skipped.push(r.h);
            continue;
        }
        let mu_h = r.gap_eigs[k - 1];
        let lhs = (1.0 / mu_h - 1.0 / mu).abs();
        let s = r.inverse_gap_discrepancy[k - 1];
        points.push(BoundPoint {
            h: r.h,
            lhs,
            sup_discrepancy: s,
            ratio: ratio(lhs, s),
        });
    }
    fit_bound_constant(k, points, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub h_ref: u32,
    /// Extrapolated limit eigenvalue.
    pub mu_star: f64,
    /// `||A u* - μ* u*|| / ||u*||` with `A` the homogenized operator.
    pub residual: f64,
    /// Whether `u*` is the period average of `u_h` (oscillating profile) or `u_h` itself.
    pub averaged: bool,
}

/// One converged pair `(h, μ_h, u_h)` of the sequence.
#[derive(Debug, Clone)]
pub struct SequencePair {
    pub h: u32,
    pub value: f64,
    pub vector: SpinorField,
}

/// Extrapolates the limit pair from the last two sequence pairs and returns
/// its residual in the homogenized eigenproblem.
///
/// `μ*` is the Richardson extrapolation of the last two eigenvalues with the
/// observed order `order`; `u*` is the weak limit of `u_h` realised as a
/// two-fold moving average over one period `1/h` (a triangle kernel, whose
/// Fourier transform has double zeros at all multiples of `h`). Without
/// oscillation there is nothing to average and `u* = u_h`.
pub fn glimit_consistency(
    hom: &HermitianOperator,
    dx: f64,
    pairs: &[SequencePair],
    order: f64,
    oscillating: bool,
) -> Result<LimitReport> {
    let last = pairs
        .last()
        .ok_or_else(|| Error::Experiment("no converged pairs supplied".into()))?;
    if last.vector.norm() == 0.0 {
        return Err(Error::Experiment("zero eigenvector".into()));
    }
    if !last.vector.is_finite() || !last.value.is_finite() {
        return Err(Error::Experiment("non-finite eigenpair".into()));
    }
    let mu_star = match pairs.len() {
        1 => last.value,
        n => {
            let prev = &pairs[n - 2];
            let r = last.h as f64 / prev.h as f64;
            let denom = r.powf(order) - 1.0;
            if denom > 0.0 && denom.is_finite() {
                last.value + (last.value - prev.value) / denom
            } else {
                last.value
            }
        }
    };
    let u_star = if oscillating {
        let w = 1.0 / last.h as f64;
        period_average(&period_average(&last.vector, dx, w), dx, w)
    } else {
        last.vector.clone()
    };
    let mut r = hom.apply(&u_star)?;
    r.axpy(Complex64::new(-mu_star, 0.0), &u_star);
    Ok(LimitReport {
        h_ref: last.h,
        mu_star,
        residual: r.norm() / u_star.norm(),
        averaged: oscillating,
    })
}

impl GapSweep {
    /// Limit-pair consistency for the `k`-th gap eigenvalue at the largest h.
    pub fn limit_consistency(&self, k: usize) -> Result<LimitReport> {
        if k == 0 {
            return Err(Error::config("k", "eigenvalue index is 1-based"));
        }
        let pairs: Vec<SequencePair> = self
            .records
            .iter()
            .zip(&self.levels)
            .filter_map(|(r, l)| {
                l.pairs.get(k - 1).map(|p| SequencePair {
                    h: r.h,
                    value: p.value,
                    vector: p.vector.clone(),
                })
            })
            .collect();
        if pairs.len() != self.records.len() {
            return Err(Error::Experiment(format!("gap eigenvalue {k} missing for some h")));
        }
        let order = self
            .fitted_rates
            .get(k - 1)
            .copied()
            .flatten()
            .map(|s| -s)
            .filter(|p| *p > 0.0)
            .unwrap_or(2.0);
        let hom = super::sweep::assemble_homogenized(&self.setup.grid, &self.setup.spec)?;
        glimit_consistency(
            &hom,
            self.setup.grid.dx(),
            &pairs,
            order,
            !self.setup.spec.v2.is_constant() && self.setup.spec.g != 0.0,
        )
    }
}
