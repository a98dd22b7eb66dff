//! Factorizations of shifted operators.
//!
//! * [`HermitianFactorization`] factors `A - sigma I` for a Hermitian `A` and
//!   exposes its inertia (Sylvester's law). Tridiagonal operators use an
//!   `L D L^*` recurrence (the Sturm count); wider bands fall back to a dense
//!   Bunch–Kaufman factorization with 1x1 and 2x2 pivots.
//! * [`BandLu`] is banded LU with partial pivoting for the complex
//!   non-Hermitian systems of the Cayley propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Dense operators above this size are refused by the Bunch–Kaufman path.
pub const DENSE_FACTOR_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub enum HermitianFactorization {
    Tridiagonal(TridiagonalLdl),
    Dense(BunchKaufman),
}

impl HermitianFactorization {
    /// Factors `A - shift I`.
    pub fn new(a: &HermitianOperator, shift: f64) -> Result<Self> {
        if a.bandwidth() <= 1 {
            Ok(Self::Tridiagonal(TridiagonalLdl::new(a, shift)))
        } else {
            Ok(Self::Dense(BunchKaufman::new(a, shift)?))
        }
    }

    pub fn inertia(&self) -> Inertia {
        match self {
            Self::Tridiagonal(f) => f.inertia(),
            Self::Dense(f) => f.inertia(),
        }
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        match self {
            Self::Tridiagonal(f) => f.solve_in_place(b),
            Self::Dense(f) => f.solve_in_place(b),
        }
    }

    /// Pivots that had to be lifted off zero (shift numerically on an eigenvalue).
    pub fn perturbed_pivots(&self) -> usize {
        match self {
            Self::Tridiagonal(f) => f.perturbed,
            Self::Dense(f) => f.perturbed,
        }
    }
}

/// Number of eigenvalues of `a` strictly below `x` (up to the pivot floor).
pub fn count_below(a: &HermitianOperator, x: f64) -> Result<usize> {
    Ok(HermitianFactorization::new(a, x)?.inertia().negative)
}

/// `L D L^*` of a shifted Hermitian tridiagonal matrix.
///
/// Pivots smaller than `eps * ||A - sigma||` are replaced by `-eps * ||A - sigma||`,
/// which amounts to a backward perturbation of that size.
#[derive(Debug, Clone)]
pub struct TridiagonalLdl {
    d: Vec<f64>,
    /// `l[j] = L[j + 1][j]`.
    l: Vec<Complex64>,
    perturbed: usize,
}

impl TridiagonalLdl {
    pub fn new(a: &HermitianOperator, shift: f64) -> Self {
        let n = a.dim();
        let diag = a.diag();
        let sub: &[Complex64] = if a.bandwidth() == 1 { a.band(1) } else { &[] };
        let scale = a.gershgorin_bound() + shift.abs();
        let pivmin = f64::EPSILON * scale.max(f64::MIN_POSITIVE.sqrt());
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        let mut perturbed = 0;
        for j in 0..n {
            let mut dj = diag[j] - shift;
            if j > 0 {
                let e = sub.get(j - 1).copied().unwrap_or(ZERO);
                let prev = d[j - 1];
                let lj = e / prev;
                dj -= (e.norm_sqr()) / prev;
                l.push(lj);
            }
            if dj.abs() < pivmin {
                dj = -pivmin;
                perturbed += 1;
            }
            d.push(dj);
        }
        TridiagonalLdl { d, l, perturbed }
    }

    pub fn inertia(&self) -> Inertia {
        let negative = self.d.iter().filter(|&&x| x < 0.0).count();
        Inertia {
            negative,
            zero: 0,
            positive: self.d.len() - negative,
        }
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        for j in 1..n {
            let prev = b[j - 1];
            b[j] -= self.l[j - 1] * prev;
        }
        for j in 0..n {
            b[j] /= self.d[j];
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let next = b[j + 1];
            b[j] -= self.l[j].conj() * next;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Pivot {
    One(f64),
    /// Hermitian 2x2 block `[[a, conj(b)], [b, c]]`.
    Two {
        a: f64,
        b: Complex64,
        c: f64,
    },
}

/// Dense Hermitian Bunch–Kaufman factorization `P A P^T = L D L^*`.
#[derive(Debug, Clone)]
pub struct BunchKaufman {
    n: usize,
    /// Column-major unit lower factor (strict lower part used).
    l: Vec<Complex64>,
    /// Block start index and pivot.
    blocks: Vec<(usize, Pivot)>,
    /// `swaps[k] = Some(p)`: rows/cols `k` and `p` exchanged at step `k`.
    swaps: Vec<(usize, usize)>,
    perturbed: usize,
}

impl BunchKaufman {
    pub fn new(a: &HermitianOperator, shift: f64) -> Result<Self> {
        let n = a.dim();
        if n > DENSE_FACTOR_LIMIT {
            return Err(Error::Solver {
                reason: format!("dense indefinite factorization refused for dimension {n} > {DENSE_FACTOR_LIMIT}"),
                iterations: 0,
                residual: f64::NAN,
            });
        }
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;
        let scale = a.gershgorin_bound() + shift.abs();
        let pivmin = f64::EPSILON * scale.max(f64::MIN_POSITIVE.sqrt());
        // Full Hermitian working copy, column-major: w[i + j * n] = A[i][j].
        let mut w = vec![ZERO; n * n];
        for j in 0..n {
            for i in 0..n {
                w[i + j * n] = a.entry(i, j);
            }
            w[j + j * n] -= shift;
        }
        let idx = |i: usize, j: usize| i + j * n;
        let mut blocks = Vec::new();
        let mut swaps = Vec::new();
        let mut perturbed = 0;
        let mut k = 0;
        while k < n {
            let absakk = w[idx(k, k)].re.abs();
            let (mut imax, mut colmax) = (k, 0.0);
            for i in k + 1..n {
                let v = w[idx(i, k)].norm();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }
            let (kp, kstep);
            if absakk.max(colmax) <= pivmin || absakk >= alpha * colmax {
                kp = k;
                kstep = 1;
            } else {
                let mut rowmax: f64 = 0.0;
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(w[idx(imax, j)].norm());
                    }
                }
                if absakk * rowmax >= alpha * colmax * colmax {
                    kp = k;
                    kstep = 1;
                } else if w[idx(imax, imax)].re.abs() >= alpha * rowmax {
                    kp = imax;
                    kstep = 1;
                } else {
                    kp = imax;
                    kstep = 2;
                }
            }
            let kk = k + kstep - 1;
            if kp != kk {
                // Symmetric exchange of rows/columns kk and kp over the whole matrix;
                // columns < k hold L and only their rows move.
                for j in 0..n {
                    w.swap(idx(kk, j), idx(kp, j));
                }
                for i in k..n {
                    w.swap(idx(i, kk), idx(i, kp));
                }
                swaps.push((kk, kp));
            }
            if kstep == 1 {
                let mut d = w[idx(k, k)].re;
                if d.abs() <= pivmin {
                    d = -pivmin;
                    perturbed += 1;
                }
                for i in k + 1..n {
                    w[idx(i, k)] /= d;
                }
                for j in k + 1..n {
                    let ljd = w[idx(j, k)].conj() * d;
                    if ljd == ZERO {
                        continue;
                    }
                    for i in k + 1..n {
                        let li = w[idx(i, k)];
                        w[idx(i, j)] -= li * ljd;
                    }
                }
                blocks.push((k, Pivot::One(d)));
            } else {
                let a11 = w[idx(k, k)].re;
                let b21 = w[idx(k + 1, k)];
                let a22 = w[idx(k + 1, k + 1)].re;
                let det = a11 * a22 - b21.norm_sqr();
                // D^{-1} = [[a22, -conj(b21)], [-b21, a11]] / det
                for i in k + 2..n {
                    let x1 = w[idx(i, k)];
                    let x2 = w[idx(i, k + 1)];
                    w[idx(i, k)] = (x1 * a22 - x2 * b21) / det;
                    w[idx(i, k + 1)] = (x2 * a11 - x1 * b21.conj()) / det;
                }
                for j in k + 2..n {
                    let l1 = w[idx(j, k)];
                    let l2 = w[idx(j, k + 1)];
                    // (D L_j^*) components
                    let t1 = a11 * l1.conj() + b21.conj() * l2.conj();
                    let t2 = b21 * l1.conj() + a22 * l2.conj();
                    for i in k + 2..n {
                        let upd = w[idx(i, k)] * t1 + w[idx(i, k + 1)] * t2;
                        w[idx(i, j)] -= upd;
                    }
                }
                blocks.push((k, Pivot::Two { a: a11, b: b21, c: a22 }));
            }
            k += kstep;
        }
        Ok(BunchKaufman {
            n,
            l: w,
            blocks,
            swaps,
            perturbed,
        })
    }

    pub fn inertia(&self) -> Inertia {
        let mut neg = 0;
        let mut zero = 0;
        let mut pos = 0;
        for (_, p) in &self.blocks {
            match *p {
                Pivot::One(d) => {
                    if d < 0.0 {
                        neg += 1
                    } else if d > 0.0 {
                        pos += 1
                    } else {
                        zero += 1
                    }
                }
                Pivot::Two { a, b, c } => {
                    let det = a * c - b.norm_sqr();
                    if det < 0.0 {
                        neg += 1;
                        pos += 1;
                    } else if det > 0.0 {
                        if a + c > 0.0 {
                            pos += 2
                        } else {
                            neg += 2
                        }
                    } else {
                        zero += 1;
                        if a + c > 0.0 {
                            pos += 1
                        } else {
                            neg += 1
                        }
                    }
                }
            }
        }
        Inertia {
            negative: neg,
            zero,
            positive: pos,
        }
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let idx = |i: usize, j: usize| i + j * n;
        for &(kk, kp) in &self.swaps {
            b.swap(kk, kp);
        }
        // L y = b (block columns)
        for &(k, p) in &self.blocks {
            let width = match p {
                Pivot::One(_) => 1,
                Pivot::Two { .. } => 2,
            };
            for c in k..k + width {
                let bc = b[c];
                if bc == ZERO {
                    continue;
                }
                for i in k + width..n {
                    b[i] -= self.l[idx(i, c)] * bc;
                }
            }
        }
        // D z = y
        for &(k, p) in &self.blocks {
            match p {
                Pivot::One(d) => b[k] /= d,
                Pivot::Two { a, b: off, c } => {
                    let det = a * c - off.norm_sqr();
                    let (y1, y2) = (b[k], b[k + 1]);
                    b[k] = (y1 * c - off.conj() * y2) / det;
                    b[k + 1] = (y2 * a - off * y1) / det;
                }
            }
        }
        // L^* x = z
        for &(k, p) in self.blocks.iter().rev() {
            let width = match p {
                Pivot::One(_) => 1,
                Pivot::Two { .. } => 2,
            };
            for c in k..k + width {
                let mut s = ZERO;
                for i in k + width..n {
                    s += self.l[idx(i, c)].conj() * b[i];
                }
                b[c] -= s;
            }
        }
        for &(kk, kp) in self.swaps.iter().rev() {
            b.swap(kk, kp);
        }
    }
}

/// Banded LU with partial pivoting for `M = alpha I + beta A`, `A` Hermitian banded.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    ab: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Factors `alpha I + beta A`.
    pub fn new(a: &HermitianOperator, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = a.dim();
        let kl = a.bandwidth();
        let ku = kl;
        let width = 2 * kl + ku + 1;
        let mut ab = vec![ZERO; n * width];
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let mut v = beta * a.entry(i, j);
                if i == j {
                    v += alpha;
                }
                ab[at(i, j)] = v;
            }
        }
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = ab[at(k, k)].norm();
            for i in k + 1..=last {
                let v = ab[at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Solver {
                    reason: format!("singular banded matrix at column {k}"),
                    iterations: k,
                    residual: f64::NAN,
                });
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    ab.swap(at(k, j), at(p, j));
                }
            }
            let pivot = ab[at(k, k)];
            for i in k + 1..=last {
                let l = ab[at(i, k)] / pivot;
                ab[at(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..=jmax {
                    let u = ab[at(k, j)];
                    ab[at(i, j)] -= l * u;
                }
            }
        }
        Ok(BandLu { n, kl, width, ab, piv })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let kl = self.kl;
        let width = self.width;
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.ab[at(i, k)] * bk;
            }
        }
        let ubw = 2 * kl;
        for i in (0..n).rev() {
            let mut s = b[i];
            let jmax = (i + ubw).min(n - 1);
            for j in i + 1..=jmax {
                s -= self.ab[at(i, j)] * b[j];
            }
            b[i] = s / self.ab[at(i, i)];
        }
    }
}
