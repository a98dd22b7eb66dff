//! Banded Hermitian operators.
//!
//! Only the diagonal (real) and the strictly lower bands are stored; the upper
//! triangle is implied by `A[i][j] = conj(A[j][i])`, so every stored operator is
//! Hermitian by construction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::SpinorField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    diag: Vec<f64>,
    /// `lower[d - 1][i] = A[i + d][i]` for `d = 1..=bandwidth`.
    lower: Vec<Vec<Complex64>>,
    components: usize,
    weight: f64,
    gap_hint: Option<(f64, f64)>,
    provenance: String,
}

impl HermitianOperator {
    /// Builds an operator from its diagonal and lower bands.
    pub fn from_bands(diag: Vec<f64>, lower: Vec<Vec<Complex64>>, components: usize, weight: f64) -> Result<Self> {
        let n = diag.len();
        for (k, band) in lower.iter().enumerate() {
            let d = k + 1;
            if band.len() != n.saturating_sub(d) {
                return Err(Error::DimensionMismatch {
                    expected: n.saturating_sub(d),
                    got: band.len(),
                });
            }
        }
        if components == 0 || !n.is_multiple_of(components) {
            return Err(Error::config(
                "components",
                format!("dimension {n} is not a multiple of {components}"),
            ));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::config("weight", "must be positive and finite"));
        }
        Ok(HermitianOperator {
            diag,
            lower,
            components,
            weight,
            gap_hint: None,
            provenance: String::new(),
        })
    }

    pub fn diagonal(diag: Vec<f64>, components: usize, weight: f64) -> Result<Self> {
        Self::from_bands(diag, Vec::new(), components, weight)
    }

    pub fn identity(dim: usize, weight: f64) -> Self {
        Self::diagonal(vec![1.0; dim], 1, weight).expect("valid identity")
    }

    pub fn zero(dim: usize, weight: f64) -> Self {
        Self::diagonal(vec![0.0; dim], 1, weight).expect("valid zero operator")
    }

    /// Hermitian tridiagonal operator from its real diagonal and complex subdiagonal.
    pub fn tridiagonal(diag: Vec<f64>, sub: Vec<Complex64>, components: usize, weight: f64) -> Result<Self> {
        Self::from_bands(diag, vec![sub], components, weight)
    }

    /// Takes the lower triangle of a dense matrix. Fails if the matrix is not
    /// Hermitian to `tol` (absolute, entrywise).
    pub fn from_dense(m: &DMatrix<Complex64>, weight: f64, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.ncols(),
            });
        }
        let mut bandwidth = 0;
        for j in 0..n {
            for i in j..n {
                let a = m[(i, j)];
                let b = m[(j, i)].conj();
                if (a - b).norm() > tol {
                    return Err(Error::Contract(format!(
                        "matrix is not Hermitian at ({i}, {j}): {a} vs {b}"
                    )));
                }
                if i > j && a != ZERO {
                    bandwidth = bandwidth.max(i - j);
                }
            }
        }
        let diag = (0..n).map(|i| m[(i, i)].re).collect();
        let lower = (1..=bandwidth)
            .map(|d| (0..n - d).map(|i| m[(i + d, i)]).collect())
            .collect();
        Self::from_bands(diag, lower, 1, weight)
    }

    pub fn with_gap_hint(mut self, lo: f64, hi: f64) -> Self {
        self.gap_hint = Some((lo, hi));
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.lower.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn gap_hint(&self) -> Option<(f64, f64)> {
        self.gap_hint
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Stored band `d` (1-based distance below the diagonal).
    pub fn band(&self, d: usize) -> &[Complex64] {
        &self.lower[d - 1]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            return Complex64::new(self.diag[i], 0.0);
        }
        let (r, c, conj) = if i > j { (i, j, false) } else { (j, i, true) };
        let d = r - c;
        if d > self.bandwidth() {
            return ZERO;
        }
        let v = self.lower[d - 1][c];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// `A + s I`, keeping metadata; the gap hint moves with the spectrum.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d += s);
        out.gap_hint = self.gap_hint.map(|(a, b)| (a + s, b + s));
        out
    }

    /// `alpha A` for real `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d *= alpha);
        out.lower
            .iter_mut()
            .for_each(|b| b.iter_mut().for_each(|z| *z *= alpha));
        out.gap_hint = self.gap_hint.map(|(a, b)| {
            let (x, y) = (a * alpha, b * alpha);
            (x.min(y), x.max(y))
        });
        out
    }

    /// `y = A x` on raw coefficient slices.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            y[i] = x[i] * self.diag[i];
        }
        for (k, band) in self.lower.iter().enumerate() {
            let d = k + 1;
            for (c, a) in band.iter().enumerate() {
                y[c + d] += a * x[c];
                y[c] += a.conj() * x[c + d];
            }
        }
    }

    pub fn apply(&self, u: &SpinorField) -> Result<SpinorField> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        let mut y = vec![ZERO; self.dim()];
        self.apply_into(u.values(), &mut y);
        Ok(SpinorField::new(y, u.components(), u.weight()))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for i in 0..n {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for (k, band) in self.lower.iter().enumerate() {
            let d = k + 1;
            for (c, a) in band.iter().enumerate() {
                m[(c + d, c)] = *a;
                m[(c, c + d)] = a.conj();
            }
        }
        m
    }

    /// Zero field with this operator's layout.
    pub fn zero_field(&self) -> SpinorField {
        SpinorField::zeros(self.dim(), self.components, self.weight)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        let n = self.dim();
        let mut row = self.diag.iter().map(|d| d.abs()).collect::<Vec<_>>();
        for (k, band) in self.lower.iter().enumerate() {
            let d = k + 1;
            for (c, a) in band.iter().enumerate() {
                row[c + d] += a.norm();
                row[c] += a.norm();
            }
        }
        (0..n).map(|i| row[i]).fold(0.0, f64::max)
    }

    /// Operator norm estimate by power iteration on `A^2` (deterministic start).
    pub fn norm_estimate(&self, iterations: usize) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v = SpinorField::random(&mut rng, n, self.components, self.weight);
        v.normalize();
        let mut estimate = 0.0;
        let mut w = vec![ZERO; n];
        for _ in 0..iterations.max(1) {
            self.apply_into(v.values(), &mut w);
            let nrm = SpinorField::new(w.clone(), self.components, self.weight).norm();
            if nrm == 0.0 {
                return 0.0;
            }
            estimate = nrm;
            let inv = 1.0 / nrm;
            v.values_mut().iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi * inv);
        }
        estimate
    }
}
