//! Eigensolvers: a dense reference solver and the interior (windowed) solver.
//!
//! The interior solver certifies completeness with Sylvester inertia counts:
//! the number of eigenvalues in `[a, b)` is `neg(A - bI) - neg(A - aI)`.
//! Eigenvalues are isolated by bisection on those counts and the eigenvectors
//! are obtained by shift-invert iteration with the indefinite factorization
//! at each isolated shift (block iteration plus Rayleigh–Ritz for clusters).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factor::{count_below, HermitianFactorization};
use crate::grid::SpinorField;
use crate::operator::HermitianOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest dimension accepted by [`dense_eigh`].
pub const DENSE_EIG_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector in the weighted norm, phase fixed.
    pub vector: SpinorField,
    /// `||A u - value u|| / ||u||`.
    pub residual: f64,
}

impl EigenPair {
    pub fn new(a: &HermitianOperator, value: f64, mut vector: SpinorField) -> Result<Self> {
        vector.normalize();
        vector.fix_phase();
        let residual = residual_norm(a, value, &vector)?;
        Ok(EigenPair {
            value,
            vector,
            residual,
        })
    }
}

pub fn residual_norm(a: &HermitianOperator, value: f64, u: &SpinorField) -> Result<f64> {
    let mut r = a.apply(u)?;
    r.axpy(Complex64::new(-value, 0.0), u);
    Ok(r.norm() / u.norm())
}

/// Full eigendecomposition, ascending, with weighted-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<SpinorField>,
}

/// Dense Hermitian eigensolver. Tridiagonal operators are reduced to real
/// symmetric form by a diagonal phase similarity and solved by implicit QL;
/// wider bands go through nalgebra's Hermitian eigensolver.
pub fn dense_eigh(a: &HermitianOperator) -> Result<DenseEigen> {
    let n = a.dim();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::config(
            "dimension",
            format!("dense eigensolve limited to {DENSE_EIG_LIMIT}, got {n}"),
        ));
    }
    let scale = 1.0 / a.weight().sqrt();
    let (values, columns): (Vec<f64>, Vec<Vec<Complex64>>) = if a.bandwidth() <= 1 {
        let mut phases = vec![Complex64::new(1.0, 0.0); n];
        let mut off = vec![0.0; n];
        if a.bandwidth() == 1 {
            for (j, e) in a.band(1).iter().enumerate() {
                let m = e.norm();
                off[j] = m;
                phases[j + 1] = if m > 0.0 { phases[j] * (e / m) } else { phases[j] };
            }
        }
        let (vals, vecs) = tridiagonal_ql(a.diag().to_vec(), off)?;
        let cols = vecs
            .into_iter()
            .map(|y| y.iter().zip(&phases).map(|(yi, p)| p * yi * scale).collect())
            .collect();
        (vals, cols)
    } else {
        let eig = SymmetricEigen::new(a.to_dense());
        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
            .map(|k| {
                (
                    eig.eigenvalues[k],
                    eig.eigenvectors.column(k).iter().map(|z| z * scale).collect(),
                )
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs.into_iter().unzip()
    };
    let vectors = columns
        .into_iter()
        .map(|c| SpinorField::new(c, a.components(), a.weight()))
        .collect();
    Ok(DenseEigen { values, vectors })
}

/// Implicit QL with Wilkinson shifts for a real symmetric tridiagonal matrix.
/// Returns ascending eigenvalues and the matching unit eigenvectors.
fn tridiagonal_ql(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = d.len();
    // z[i] is the i-th column of the accumulated rotation (stored row-wise).
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Solver {
                    reason: "implicit QL did not converge".into(),
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut(i + 1);
                let zi = &mut lo[i];
                let zi1 = &mut hi[0];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order.into_iter().map(|k| std::mem::take(&mut z[k])).collect();
    Ok((values, vectors))
}

/// Result of [`interior_eigs`].
#[derive(Debug, Clone)]
pub struct InteriorEigs {
    pub window: (f64, f64),
    /// Ascending eigenpairs in the window (at most `k_max`).
    pub pairs: Vec<EigenPair>,
    /// Sylvester count of eigenvalues in `[a, b)`.
    pub count: usize,
    /// Eigenvalues lie within the edge margin just outside the window.
    pub edge_warning: bool,
    /// More eigenvalues exist in the window than `k_max`.
    pub truncated: bool,
}

impl InteriorEigs {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Options for [`interior_eigs_with`].
#[derive(Debug, Clone, Copy)]
pub struct InteriorOptions {
    /// Relative width (of the window) of the bands outside the endpoints that
    /// trigger `edge_warning` when occupied.
    pub edge_margin: f64,
    pub max_iterations: usize,
}

impl Default for InteriorOptions {
    fn default() -> Self {
        InteriorOptions {
            edge_margin: 0.01,
            max_iterations: 12,
        }
    }
}

pub fn interior_eigs(a: &HermitianOperator, window: (f64, f64), k_max: usize, tol: f64) -> Result<InteriorEigs> {
    interior_eigs_with(a, window, k_max, tol, InteriorOptions::default())
}

pub fn interior_eigs_with(
    a: &HermitianOperator,
    window: (f64, f64),
    k_max: usize,
    tol: f64,
    opts: InteriorOptions,
) -> Result<InteriorEigs> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::config("window", "empty window"));
    }
    if let Some((g0, g1)) = a.gap_hint() {
        if lo < g0 || hi > g1 {
            return Err(Error::Contract(format!(
                "window ({lo}, {hi}) is not inside the gap hint ({g0}, {g1})"
            )));
        }
    }
    let c_lo = count_below(a, lo)?;
    let c_hi = count_below(a, hi)?;
    let count = c_hi.saturating_sub(c_lo);
    let margin = opts.edge_margin * (hi - lo);
    let edge_warning = count_below(a, lo - margin)? != c_lo || count_below(a, hi + margin)? != c_hi;
    let mut result = InteriorEigs {
        window,
        pairs: Vec::new(),
        count,
        edge_warning,
        truncated: count > k_max,
    };
    if count == 0 || k_max == 0 {
        return Ok(result);
    }

    let norm = a.gershgorin_bound();
    let iso_tol = (16.0 * f64::EPSILON * norm).max(1e-3 * tol).max(f64::MIN_POSITIVE);
    let clusters = isolate(a, (lo, c_lo), (hi, c_hi), iso_tol, k_max)?;

    let mut seed = 0u64;
    for (center, multiplicity) in clusters {
        let block = shift_invert_block(a, center, multiplicity, tol, opts.max_iterations, seed)?;
        seed += multiplicity as u64;
        for p in block {
            if result.pairs.len() < k_max {
                result.pairs.push(p);
            }
        }
    }
    result.pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(result)
}

/// The `index`-th smallest eigenvalue (zero-based) by bisection on inertia
/// counts, accurate to a few ulps of the spectral radius.
pub fn eigenvalue_by_index(a: &HermitianOperator, index: usize) -> Result<f64> {
    if index >= a.dim() {
        return Err(Error::config(
            "index",
            format!("{index} out of range for dimension {}", a.dim()),
        ));
    }
    let bound = a.gershgorin_bound() * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(a, mid)? > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on inertia counts. Returns (center, multiplicity) of isolated
/// clusters in ascending order, stopping after `k_max` eigenvalues.
fn isolate(
    a: &HermitianOperator,
    lower: (f64, usize),
    upper: (f64, usize),
    iso_tol: f64,
    k_max: usize,
) -> Result<Vec<(f64, usize)>> {
    let mut out = Vec::new();
    let mut found = 0;
    // Depth-first, lowest interval first.
    let mut stack = vec![(lower, upper)];
    while let Some(((x0, c0), (x1, c1))) = stack.pop() {
        if c1 <= c0 || found >= k_max {
            continue;
        }
        if x1 - x0 <= iso_tol {
            out.push((0.5 * (x0 + x1), c1 - c0));
            found += c1 - c0;
            continue;
        }
        let mid = 0.5 * (x0 + x1);
        let cm = count_below(a, mid)?;
        stack.push(((mid, cm), (x1, c1)));
        stack.push(((x0, c0), (mid, cm)));
    }
    Ok(out)
}

fn gram_schmidt(block: &mut [SpinorField]) {
    for i in 0..block.len() {
        for _ in 0..2 {
            for j in 0..i {
                let (left, right) = block.split_at_mut(i);
                let proj = left[j].dot(&right[0]);
                right[0].axpy(-proj, &left[j]);
            }
        }
        block[i].normalize();
    }
}

fn shift_invert_block(
    a: &HermitianOperator,
    shift: f64,
    multiplicity: usize,
    tol: f64,
    max_iterations: usize,
    seed: u64,
) -> Result<Vec<EigenPair>> {
    let fact = HermitianFactorization::new(a, shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e1e_0000 + seed);
    let mut block: Vec<SpinorField> = (0..multiplicity)
        .map(|_| SpinorField::random(&mut rng, a.dim(), a.components(), a.weight()))
        .collect();
    gram_schmidt(&mut block);
    let mut worst = f64::INFINITY;
    for iteration in 1..=max_iterations {
        for v in block.iter_mut() {
            fact.solve_in_place(v.values_mut());
        }
        gram_schmidt(&mut block);
        let (values, rotated) = rayleigh_ritz(a, &block)?;
        block = rotated;
        worst = 0.0;
        for (v, &lam) in block.iter().zip(&values) {
            worst = worst.max(residual_norm(a, lam, v)?);
        }
        if worst <= tol && iteration >= 2 {
            return block
                .into_iter()
                .zip(values)
                .map(|(v, lam)| EigenPair::new(a, lam, v))
                .collect();
        }
    }
    Err(Error::Solver {
        reason: format!("shift-invert iteration at {shift} did not reach tolerance {tol:e}"),
        iterations: max_iterations,
        residual: worst,
    })
}

/// Rayleigh–Ritz on an orthonormal block; returns ascending Ritz values and vectors.
pub(crate) fn rayleigh_ritz(a: &HermitianOperator, block: &[SpinorField]) -> Result<(Vec<f64>, Vec<SpinorField>)> {
    let m = block.len();
    let images: Vec<SpinorField> = block.iter().map(|v| a.apply(v)).collect::<Result<_>>()?;
    let mut h = DMatrix::from_element(m, m, ZERO);
    for i in 0..m {
        for j in 0..m {
            h[(i, j)] = block[i].dot(&images[j]);
        }
    }
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut values = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    for k in order {
        values.push(eig.eigenvalues[k]);
        let mut v = block[0].scaled(ZERO);
        for (i, b) in block.iter().enumerate() {
            v.axpy(eig.eigenvectors[(i, k)], b);
        }
        vectors.push(v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_tridiagonal(n: usize, seed: u64) -> HermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diag = (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let sub = (0..n - 1)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        HermitianOperator::tridiagonal(diag, sub, 1, 0.5).unwrap()
    }

    fn nalgebra_values(a: &HermitianOperator) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(a.to_dense()).eigenvalues.iter().copied().collect();
        v.sort_by(|x, y| x.total_cmp(y));
        v
    }

    #[test]
    fn tridiagonal_dense_path_matches_nalgebra() {
        let a = random_tridiagonal(60, 4);
        let dense = dense_eigh(&a).unwrap();
        let reference = nalgebra_values(&a);
        for (x, y) in dense.values.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-12);
        }
        for (lam, v) in dense.values.iter().zip(&dense.vectors) {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(residual_norm(&a, *lam, v).unwrap() < 1e-12);
        }
        let overlap = dense.vectors[3].dot(&dense.vectors[7]).norm();
        assert!(overlap < 1e-12);
    }

    #[test]
    fn interior_matches_dense_window() {
        let a = random_tridiagonal(200, 8);
        let reference = nalgebra_values(&a);
        let window = (-0.4, 0.6);
        let res = interior_eigs(&a, window, 1000, 1e-10).unwrap();
        let expected: Vec<f64> = reference
            .iter()
            .copied()
            .filter(|x| *x >= window.0 && *x < window.1)
            .collect();
        assert_eq!(res.count, expected.len());
        assert_eq!(res.pairs.len(), expected.len());
        for (p, e) in res.pairs.iter().zip(&expected) {
            assert!((p.value - e).abs() < 1e-9, "{} vs {}", p.value, e);
            assert!(p.residual <= 1e-10);
        }
    }

    #[test]
    fn repeated_eigenvalues_are_resolved_as_a_block() {
        // Direct sum of two identical blocks gives every eigenvalue twice.
        let block = random_tridiagonal(20, 2);
        let mut diag = block.diag().to_vec();
        diag.extend_from_slice(block.diag());
        let mut sub = block.band(1).to_vec();
        sub.push(ZERO);
        sub.extend_from_slice(block.band(1));
        let a = HermitianOperator::tridiagonal(diag, sub, 1, 1.0).unwrap();
        let reference = nalgebra_values(&a);
        let res = interior_eigs(&a, (-3.0, 3.0), 100, 1e-10).unwrap();
        assert_eq!(res.pairs.len(), 40);
        for (p, e) in res.pairs.iter().zip(&reference) {
            assert!((p.value - e).abs() < 1e-9);
        }
        // Each pair of the doubled eigenvalue must span a 2-d space.
        let g = res.pairs[0].vector.dot(&res.pairs[1].vector).norm();
        assert!(g < 1e-8);
    }

    #[test]
    fn truncation_keeps_lowest() {
        let a = random_tridiagonal(80, 11);
        let full = interior_eigs(&a, (-1.0, 1.0), 1000, 1e-10).unwrap();
        let cut = interior_eigs(&a, (-1.0, 1.0), 3, 1e-10).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.pairs.len(), 3);
        for k in 0..3 {
            assert!((cut.pairs[k].value - full.pairs[k].value).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_by_index_matches_dense() {
        let a = random_tridiagonal(50, 21);
        let reference = nalgebra_values(&a);
        for k in [0, 17, 49] {
            let x = eigenvalue_by_index(&a, k).unwrap();
            assert!((x - reference[k]).abs() < 1e-13, "{x} vs {}", reference[k]);
        }
    }

    #[test]
    fn empty_window_is_an_error() {
        let a = random_tridiagonal(20, 1);
        assert!(matches!(
            interior_eigs(&a, (0.3, 0.3), 5, 1e-10),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn window_outside_gap_hint_violates_contract() {
        let a = random_tridiagonal(20, 1).with_gap_hint(-0.5, 0.5);
        assert!(matches!(
            interior_eigs(&a, (-1.0, 0.2), 5, 1e-10),
            Err(Error::Contract(_))
        ));
    }
}
