//! Uniform grids on a truncated interval and the discrete fields living on them.
//!
//! Inner products carry the quadrature weight of the grid (`dx` for grid
//! fields, `1` for coefficient vectors in an orthonormal basis) so that
//! discrete norms approximate L² norms.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of `n` interior nodes on `(-L, L)` with Dirichlet ends at `±L`.
///
/// Node `i` (zero-based) sits at `x_i = -L + (i + 1) dx` with `dx = 2L / (n + 1)`.
/// `n` is even so that the origin falls strictly between the two middle nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    dx: f64,
}

pub fn make_grid(half_width: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(half_width, n)
}

impl Grid1D {
    pub const MIN_NODES: usize = 8;

    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::config(
                "L",
                format!("must be positive and finite, got {half_width}"),
            ));
        }
        if n < Self::MIN_NODES {
            return Err(Error::config(
                "n",
                format!("must be at least {}, got {n}", Self::MIN_NODES),
            ));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::config("n", format!("n must be even, got {n}")));
        }
        Ok(Grid1D {
            half_width,
            n,
            dx: 2.0 * half_width / (n as f64 + 1.0),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of interior node `i` (zero-based).
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.dx
    }

    /// Midpoint between node `i` and its left neighbour, `x_i - dx/2`.
    pub fn half_node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same half-width, twice as many nodes (rounded to stay even).
    pub fn refined(&self) -> Result<Self> {
        Grid1D::new(self.half_width, 2 * self.n)
    }
}

/// Complex field with a fixed number of components per site and a quadrature weight.
///
/// Layout is site-major: component `c` of site `s` is `values[s * components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    values: Vec<Complex64>,
    components: usize,
    weight: f64,
}

impl SpinorField {
    pub fn new(values: Vec<Complex64>, components: usize, weight: f64) -> Self {
        assert!(components > 0, "field needs at least one component");
        assert!(
            values.len().is_multiple_of(components),
            "length {} is not a multiple of {components}",
            values.len()
        );
        assert!(weight > 0.0, "quadrature weight must be positive");
        SpinorField {
            values,
            components,
            weight,
        }
    }

    pub fn zeros(len: usize, components: usize, weight: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], components, weight)
    }

    /// Two-component field on a grid, zero everywhere.
    pub fn on_grid(grid: &Grid1D) -> Self {
        Self::zeros(2 * grid.len(), 2, grid.dx())
    }

    /// Four-component layout on the same grid.
    pub fn four_component(grid: &Grid1D) -> Self {
        Self::zeros(4 * grid.len(), 4, grid.dx())
    }

    /// Entries drawn uniformly from the unit square of the complex plane, centred at 0.
    pub fn random<R: Rng>(rng: &mut R, len: usize, components: usize, weight: f64) -> Self {
        let values = (0..len)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        Self::new(values, components, weight)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Weighted inner product `<self, other> = w * sum conj(self_j) other_j`.
    pub fn dot(&self, other: &SpinorField) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.weight
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weight * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, alpha: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= alpha);
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: Complex64, x: &SpinorField) {
        debug_assert_eq!(self.len(), x.len());
        self.values
            .iter_mut()
            .zip(&x.values)
            .for_each(|(y, xi)| *y += alpha * xi);
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        out
    }

    /// Normalizes in the weighted norm; returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let nrm = self.norm();
        if nrm > 0.0 {
            self.scale(Complex64::new(1.0 / nrm, 0.0));
        }
        nrm
    }

    /// Fixes the global phase: the first entry of largest modulus becomes real positive.
    ///
    /// Ties are broken towards the lowest index with a relative slack so that a
    /// second application selects the same entry.
    pub fn fix_phase(&mut self) {
        let max = self.values.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if max == 0.0 {
            return;
        }
        let pivot = self
            .values
            .iter()
            .position(|z| z.norm() >= max * (1.0 - 1e-12))
            .expect("maximum exists");
        let z = self.values[pivot];
        let phase = z.conj() / z.norm();
        self.scale(phase);
        self.values[pivot] = Complex64::new(self.values[pivot].norm(), 0.0);
    }
}
