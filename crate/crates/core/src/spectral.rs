//! Spectral decompositions, spectral projectors and restricted operators.
//!
//! The continuous parts of the shifted Dirac spectrum are represented at the
//! discrete level by the eigenvectors below `δ` and above `2 - δ` ("edge
//! band" subspaces); the point part by the eigenvectors in `(δ, 2 - δ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigen::{dense_eigh, interior_eigs_with, InteriorOptions};
use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::operator::HermitianOperator;

/// Default edge buffer between the gap and the continuum surrogates.
pub const DEFAULT_EDGE_DELTA: f64 = 0.05;

/// Above this dimension operator norms are estimated from probe actions.
pub const DENSE_CHECK_LIMIT: usize = 512;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralClass {
    Below,
    Gap,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecomposeMode {
    Dense,
    /// Only eigenpairs within `band` of the gap `(g0, g1)`.
    Windowed {
        band: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<SpinorField>,
    pub classes: Vec<SpectralClass>,
    pub delta_edge: f64,
    /// Gap of the operator used for classification.
    pub gap: (f64, f64),
    /// Whether every eigenpair of the operator is present.
    pub complete: bool,
    dim: usize,
    components: usize,
    weight: f64,
}

fn classify(x: f64, gap: (f64, f64), delta: f64) -> SpectralClass {
    if x <= gap.0 + delta {
        SpectralClass::Below
    } else if x >= gap.1 - delta {
        SpectralClass::Above
    } else {
        SpectralClass::Gap
    }
}

pub fn decompose(a: &HermitianOperator, mode: DecomposeMode) -> Result<SpectralDecomposition> {
    decompose_with(a, mode, DEFAULT_EDGE_DELTA)
}

/// Decomposes `a` and classifies each eigenvalue against the operator's gap
/// hint (default `(0, 2)`) with buffer `delta_edge`.
pub fn decompose_with(a: &HermitianOperator, mode: DecomposeMode, delta_edge: f64) -> Result<SpectralDecomposition> {
    let gap = a.gap_hint().unwrap_or((0.0, 2.0));
    if !(delta_edge >= 0.0 && 2.0 * delta_edge < gap.1 - gap.0) {
        return Err(Error::config(
            "delta_edge",
            format!("{delta_edge} does not fit in the gap"),
        ));
    }
    let (values, vectors, complete) = match mode {
        DecomposeMode::Dense => {
            let d = dense_eigh(a)?;
            (d.values, d.vectors, true)
        }
        DecomposeMode::Windowed { band } => {
            let window = (gap.0 - band, gap.1 + band);
            let unhinted = HermitianOperator::from_bands(
                a.diag().to_vec(),
                (1..=a.bandwidth()).map(|d| a.band(d).to_vec()).collect(),
                a.components(),
                a.weight(),
            )?;
            let res = interior_eigs_with(&unhinted, window, a.dim(), 1e-9, InteriorOptions::default())?;
            let complete = res.pairs.len() == a.dim();
            let (v, u) = res.pairs.into_iter().map(|p| (p.value, p.vector)).unzip();
            (v, u, complete)
        }
    };
    let classes = values.iter().map(|x| classify(*x, gap, delta_edge)).collect();
    Ok(SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
        classes,
        delta_edge,
        gap,
        complete,
        dim: a.dim(),
        components: a.components(),
        weight: a.weight(),
    })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self, class: SpectralClass) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    fn projector_where(&self, keep: impl Fn(f64, SpectralClass) -> bool) -> Projector {
        let basis = self
            .eigenvalues
            .iter()
            .zip(&self.classes)
            .zip(&self.eigenvectors)
            .filter(|((x, c), _)| keep(**x, **c))
            .map(|(_, v)| v.clone())
            .collect();
        Projector::new(basis, self.dim, self.components, self.weight)
    }

    /// Spectral projector `E(S)` of a finite union of half-open intervals.
    pub fn spectral_projector(&self, set: &SpectralSet) -> Projector {
        self.projector_where(|x, _| set.contains(x))
    }

    /// Largest `||A - sum λ_i v_i v_i^*||` relative to `||A||`, by power iteration.
    pub fn reconstruction_error(&self, a: &HermitianOperator) -> Result<f64> {
        let diff = |u: &SpinorField| -> Result<SpinorField> {
            let mut y = a.apply(u)?;
            for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
                let c = v.dot(u) * *lam;
                y.axpy(-c, v);
            }
            Ok(y)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0xdec0);
        let mut u = SpinorField::random(&mut rng, a.dim(), a.components(), a.weight());
        u.normalize();
        let mut est: f64 = 0.0;
        for _ in 0..60 {
            let mut y = diff(&u)?;
            let nrm = y.normalize();
            est = est.max(nrm);
            if nrm == 0.0 {
                break;
            }
            u = y;
        }
        Ok(est / a.norm_estimate(100).max(f64::MIN_POSITIVE))
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, vi) in self.eigenvectors.iter().enumerate() {
            for vj in &self.eigenvectors[i..] {
                let g = vi.dot(vj);
                let target = if std::ptr::eq(vi, vj) { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Half-open interval `[lo, hi)`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// Finite union of half-open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSet(pub Vec<Interval>);

impl SpectralSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        SpectralSet(vec![Interval::new(lo, hi)])
    }

    pub fn real_line() -> Self {
        Self::interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn union(&self, other: &SpectralSet) -> SpectralSet {
        SpectralSet(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &SpectralSet) -> SpectralSet {
        SpectralSet(
            self.0
                .iter()
                .flat_map(|a| other.0.iter().map(move |b| a.intersect(b)))
                .filter(|i| i.lo < i.hi)
                .collect(),
        )
    }
}

/// Orthogonal projector `P u = sum <v_i, u> v_i` onto an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: Vec<SpinorField>,
    dim: usize,
    components: usize,
    weight: f64,
}

impl Projector {
    pub fn new(basis: Vec<SpinorField>, dim: usize, components: usize, weight: f64) -> Self {
        Projector {
            basis,
            dim,
            components,
            weight,
        }
    }

    pub fn basis(&self) -> &[SpinorField] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> f64 {
        self.basis.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn apply(&self, u: &SpinorField) -> SpinorField {
        let mut out = SpinorField::zeros(self.dim, self.components, self.weight);
        for v in &self.basis {
            out.axpy(v.dot(u), v);
        }
        out
    }

    /// Coefficients `<v_i, u>` in the projector's basis.
    pub fn compress(&self, u: &SpinorField) -> SpinorField {
        let c = self.basis.iter().map(|v| v.dot(u)).collect();
        SpinorField::new(c, 1, 1.0)
    }

    /// `sum c_i v_i`.
    pub fn lift(&self, c: &SpinorField) -> SpinorField {
        let mut out = SpinorField::zeros(self.dim, self.components, self.weight);
        for (ci, v) in c.values().iter().zip(&self.basis) {
            out.axpy(*ci, v);
        }
        out
    }

    pub fn zero_field(&self) -> SpinorField {
        SpinorField::zeros(self.dim, self.components, self.weight)
    }
}

/// Operator norm of a linear action in the weighted norm: Frobenius norm of
/// its matrix (an upper bound) up to [`DENSE_CHECK_LIMIT`], otherwise the
/// largest action on deterministic random probes.
pub fn action_norm(dim: usize, components: usize, weight: f64, action: impl Fn(&SpinorField) -> SpinorField) -> f64 {
    if dim <= DENSE_CHECK_LIMIT {
        let scale = 1.0 / weight.sqrt();
        let mut frob = 0.0;
        let mut e = SpinorField::zeros(dim, components, weight);
        for j in 0..dim {
            e.values_mut()[j] = Complex64::new(scale, 0.0);
            frob += action(&e).norm_sqr();
            e.values_mut()[j] = ZERO;
        }
        frob.sqrt()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9b0b);
        (0..16)
            .map(|_| {
                let mut u = SpinorField::random(&mut rng, dim, components, weight);
                u.normalize();
                action(&u).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Projector onto the gap eigenvectors.
pub fn point_projector(dec: &SpectralDecomposition) -> Projector {
    dec.projector_where(|_, c| c == SpectralClass::Gap)
}

/// Projectors onto the below-gap and above-gap surrogates of the continuous parts.
pub fn continuous_split(dec: &SpectralDecomposition) -> (Projector, Projector) {
    (
        dec.projector_where(|_, c| c == SpectralClass::Below),
        dec.projector_where(|_, c| c == SpectralClass::Above),
    )
}

/// Algebraic properties of one projector, measured in operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectorChecks {
    pub idempotence: f64,
    pub self_adjointness: f64,
    /// `max(0, ||P|| - 1)`.
    pub contraction_excess: f64,
    /// `||A P - P A|| / ||A||`.
    pub commutation: f64,
}

impl ProjectorChecks {
    pub fn max_error(&self) -> f64 {
        self.idempotence
            .max(self.self_adjointness)
            .max(self.contraction_excess)
            .max(self.commutation)
    }
}

pub fn projector_checks(p: &Projector, a: &HermitianOperator) -> Result<ProjectorChecks> {
    let (n, c, w) = (p.dim, p.components, p.weight);
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.dim(),
        });
    }
    let idempotence = action_norm(n, c, w, |u| {
        let pu = p.apply(u);
        p.apply(&pu).sub(&pu)
    });
    // P is self-adjoint iff <Pu, v> = <u, Pv>; in the orthonormal-basis form
    // the adjoint is P itself, so compare against the explicit adjoint action.
    let self_adjointness = action_norm(n, c, w, |u| {
        let mut adj = p.zero_field();
        for v in &p.basis {
            adj.axpy(u.dot(v).conj(), v);
        }
        p.apply(u).sub(&adj)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0a7);
    let mut norm: f64 = 0.0;
    for _ in 0..16 {
        let mut u = SpinorField::random(&mut rng, n, c, w);
        u.normalize();
        norm = norm.max(p.apply(&u).norm());
    }
    let a_norm = a.norm_estimate(100).max(f64::MIN_POSITIVE);
    let commutation = action_norm(n, c, w, |u| {
        let apu = a.apply(&p.apply(u)).expect("dimensions checked");
        let pau = p.apply(&a.apply(u).expect("dimensions checked"));
        apu.sub(&pau)
    }) / a_norm;
    Ok(ProjectorChecks {
        idempotence,
        self_adjointness,
        contraction_excess: (norm - 1.0).max(0.0),
        commutation,
    })
}

/// `P A P` (or `-P A P`) as an operator on the coefficient space of `P`'s basis.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub operator: HermitianOperator,
    pub projector: Projector,
    pub negated: bool,
}

impl Restriction {
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.operator.dim() == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(dense_eigh(&self.operator)?.values[0])
    }
}

/// Tolerance of the commutation test in [`restrict`], relative to `||A||`.
pub const COMMUTATION_TOL: f64 = 1e-8;

pub fn restrict(a: &HermitianOperator, p: &Projector, negate: bool) -> Result<Restriction> {
    let (n, c, w) = (p.dim, p.components, p.weight);
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.dim(),
        });
    }
    // Commutation on probes: ||A P u - P A u|| for random u.
    let a_norm = a.norm_estimate(100).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for _ in 0..8 {
        let mut u = SpinorField::random(&mut rng, n, c, w);
        u.normalize();
        let apu = a.apply(&p.apply(&u))?;
        let pau = p.apply(&a.apply(&u)?);
        let err = apu.sub(&pau).norm() / a_norm;
        if err > COMMUTATION_TOL {
            return Err(Error::Contract(format!(
                "projector does not commute with the operator (relative defect {err:e})"
            )));
        }
    }
    let m = p.rank();
    let sign = if negate { -1.0 } else { 1.0 };
    let images: Vec<SpinorField> = p.basis.iter().map(|v| a.apply(v)).collect::<Result<_>>()?;
    let mut mat = DMatrix::from_element(m, m, ZERO);
    for i in 0..m {
        for j in 0..=i {
            let z = p.basis[i].dot(&images[j]) * sign;
            mat[(i, j)] = z;
            mat[(j, i)] = z.conj();
        }
        mat[(i, i)] = Complex64::new(mat[(i, i)].re, 0.0);
    }
    let operator = HermitianOperator::from_dense(&mat, 1.0, 0.0)?
        .with_provenance(format!("restriction(rank={m}, negated={negate})"));
    Ok(Restriction {
        operator,
        projector: p.clone(),
        negated: negate,
    })
}

/// Spectral-measure identities on a family of spectral sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub idempotence: f64,
    pub self_adjointness: f64,
    /// `||E(S1 ∩ S2) - E(S1) E(S2)||`.
    pub intersection: f64,
    /// `||E(S1 ∪ S2) + E(S1 ∩ S2) - E(S1) - E(S2)||`.
    pub modularity: f64,
    /// `||E(S1 ∪ S2) - E(S1) - E(S2)||` over disjoint pairs.
    pub additivity: f64,
    /// `||E(λ1) E(λ2) - E(λ1)||` for `λ1 <= λ2`, `E(λ) = E((-∞, λ))`.
    pub monotonicity: f64,
    /// `||E(R) - I||`.
    pub completeness: f64,
    /// `||E(S)||` for sets missing the spectrum.
    pub off_spectrum: f64,
}

impl MeasureReport {
    pub fn max_error(&self) -> f64 {
        [
            self.idempotence,
            self.self_adjointness,
            self.intersection,
            self.modularity,
            self.additivity,
            self.monotonicity,
            self.completeness,
            self.off_spectrum,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the identities of the projection-valued measure built from `dec`
/// on all pairs of `intervals`.
pub fn measure_properties(dec: &SpectralDecomposition, intervals: &[Interval]) -> Result<MeasureReport> {
    if !dec.complete {
        return Err(Error::Contract("measure checks need a complete decomposition".into()));
    }
    let (n, c, w) = (dec.dim, dec.components, dec.weight);
    let norm = |f: &dyn Fn(&SpinorField) -> SpinorField| action_norm(n, c, w, f);
    let sets: Vec<SpectralSet> = intervals.iter().map(|i| SpectralSet(vec![*i])).collect();
    let proj: Vec<Projector> = sets.iter().map(|s| dec.spectral_projector(s)).collect();

    let mut rep = MeasureReport {
        idempotence: 0.0,
        self_adjointness: 0.0,
        intersection: 0.0,
        modularity: 0.0,
        additivity: 0.0,
        monotonicity: 0.0,
        completeness: 0.0,
        off_spectrum: 0.0,
    };
    for p in &proj {
        rep.idempotence = rep.idempotence.max(norm(&|u| {
            let pu = p.apply(u);
            p.apply(&pu).sub(&pu)
        }));
        rep.self_adjointness = rep.self_adjointness.max(norm(&|u| {
            let mut adj = p.zero_field();
            for v in p.basis() {
                adj.axpy(u.dot(v).conj(), v);
            }
            p.apply(u).sub(&adj)
        }));
    }
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            let (p1, p2) = (&proj[i], &proj[j]);
            let cap = dec.spectral_projector(&sets[i].intersection(&sets[j]));
            let cup = dec.spectral_projector(&sets[i].union(&sets[j]));
            rep.intersection = rep
                .intersection
                .max(norm(&|u| cap.apply(u).sub(&p1.apply(&p2.apply(u)))));
            rep.modularity = rep.modularity.max(norm(&|u| {
                cup.apply(u).add(&cap.apply(u)).sub(&p1.apply(u)).sub(&p2.apply(u))
            }));
            if i != j && sets[i].intersection(&sets[j]).0.is_empty() {
                rep.additivity = rep
                    .additivity
                    .max(norm(&|u| cup.apply(u).sub(&p1.apply(u)).sub(&p2.apply(u))));
            }
        }
    }
    let mut cuts: Vec<f64> = intervals
        .iter()
        .flat_map(|i| [i.lo, i.hi])
        .filter(|x| x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    let below: Vec<Projector> = cuts
        .iter()
        .map(|x| dec.spectral_projector(&SpectralSet::interval(f64::NEG_INFINITY, *x)))
        .collect();
    for i in 0..below.len() {
        for j in i..below.len() {
            let (e1, e2) = (&below[i], &below[j]);
            rep.monotonicity = rep
                .monotonicity
                .max(norm(&|u| e1.apply(&e2.apply(u)).sub(&e1.apply(u))));
        }
    }
    let all = dec.spectral_projector(&SpectralSet::real_line());
    rep.completeness = norm(&|u| all.apply(u).sub(u));
    for (s, p) in sets.iter().zip(&proj) {
        if !dec.eigenvalues.iter().any(|x| s.contains(*x)) {
            rep.off_spectrum = rep.off_spectrum.max(norm(&|u| p.apply(u)));
        }
    }
    Ok(rep)
}
