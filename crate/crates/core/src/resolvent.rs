//! Resolvent solves `(A + λI) u = v` for positive definite `A + λI`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::HermitianFactorization;
use crate::grid::SpinorField;
use crate::operator::HermitianOperator;

/// Default relative residual tolerance of resolvent solves.
pub const RESOLVENT_TOL: f64 = 1e-12;

const MAX_REFINEMENT: usize = 4;

/// Factorization of `A + λI`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct Resolvent<'a> {
    a: &'a HermitianOperator,
    shift: f64,
    fact: HermitianFactorization,
    tol: f64,
}

impl<'a> Resolvent<'a> {
    /// Factors `A + λI` and certifies positive definiteness by its inertia.
    pub fn new(a: &'a HermitianOperator, shift: f64, tol: f64) -> Result<Self> {
        if !(shift > 0.0 && shift.is_finite()) {
            return Err(Error::config("shift", format!("must be positive, got {shift}")));
        }
        if !(tol > 0.0) {
            return Err(Error::config("tol", "must be positive"));
        }
        let fact = HermitianFactorization::new(a, -shift)?;
        let inertia = fact.inertia();
        if inertia.negative > 0 || inertia.zero > 0 || fact.perturbed_pivots() > 0 {
            return Err(Error::Contract(format!(
                "A + {shift} I is not positive definite (inertia {} negative, {} zero); \
                 restrict the operator to a positive spectral subspace first",
                inertia.negative, inertia.zero
            )));
        }
        Ok(Resolvent { a, shift, fact, tol })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Solves with iterative refinement until `||(A + λ)u - v|| <= tol ||v||`.
    ///
    /// The attainable `tol` is bounded below by about `eps ||A + λ|| ||u|| / ||v||`.
    pub fn solve(&self, v: &SpinorField) -> Result<SpinorField> {
        if v.len() != self.a.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.a.dim(),
                got: v.len(),
            });
        }
        let target = self.tol * v.norm();
        let mut u = v.clone();
        self.fact.solve_in_place(u.values_mut());
        let mut residual = f64::INFINITY;
        for iteration in 0..=MAX_REFINEMENT {
            let mut r = self.apply_shifted(&u)?;
            r.scale(Complex64::new(-1.0, 0.0));
            r.axpy(Complex64::new(1.0, 0.0), v);
            residual = r.norm();
            if residual <= target {
                return Ok(u);
            }
            if iteration < MAX_REFINEMENT {
                self.fact.solve_in_place(r.values_mut());
                u.axpy(Complex64::new(1.0, 0.0), &r);
            }
        }
        Err(Error::Solver {
            reason: format!("resolvent solve at shift {} stalled", self.shift),
            iterations: MAX_REFINEMENT,
            residual: residual / v.norm(),
        })
    }

    fn apply_shifted(&self, u: &SpinorField) -> Result<SpinorField> {
        let mut y = self.a.apply(u)?;
        y.axpy(Complex64::new(self.shift, 0.0), u);
        Ok(y)
    }
}

/// One-shot `(A + λI)^{-1} v`.
pub fn resolvent_solve(a: &HermitianOperator, shift: f64, v: &SpinorField, tol: f64) -> Result<SpinorField> {
    Resolvent::new(a, shift, tol)?.solve(v)
}

/// Both resolvent inequalities for `u = (A + λ)^{-1} v` with slack `eps`:
/// `<u, v> >= λ ||u||² - eps` and `||u|| <= ||v|| / λ + eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventBounds {
    pub coercivity_margin: f64,
    pub contraction_margin: f64,
    pub holds: bool,
}

pub fn resolvent_bounds(u: &SpinorField, v: &SpinorField, shift: f64, eps: f64) -> ResolventBounds {
    let coercivity_margin = u.dot(v).re - shift * u.norm_sqr() + eps;
    let contraction_margin = v.norm() / shift + eps - u.norm();
    ResolventBounds {
        coercivity_margin,
        contraction_margin,
        holds: coercivity_margin >= 0.0 && contraction_margin >= 0.0,
    }
}

/// Outcome of checking both resolvent inequalities on many random probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSuite {
    pub checks: usize,
    pub violations: usize,
    pub min_coercivity_margin: f64,
    pub min_contraction_margin: f64,
}

impl ResolventSuite {
    pub fn passes(&self) -> bool {
        self.violations == 0
    }

    pub fn merge(self, other: ResolventSuite) -> ResolventSuite {
        ResolventSuite {
            checks: self.checks + other.checks,
            violations: self.violations + other.violations,
            min_coercivity_margin: self.min_coercivity_margin.min(other.min_coercivity_margin),
            min_contraction_margin: self.min_contraction_margin.min(other.min_contraction_margin),
        }
    }
}

/// Checks [`resolvent_bounds`] for `probes` unit-norm random vectors per shift
/// on a positive semi-definite operator `a`, with slack `eps`.
pub fn resolvent_suite(
    a: &HermitianOperator,
    shifts: &[f64],
    probes: usize,
    seed: u64,
    eps: f64,
) -> Result<ResolventSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ResolventSuite {
        checks: 0,
        violations: 0,
        min_coercivity_margin: f64::INFINITY,
        min_contraction_margin: f64::INFINITY,
    };
    for &shift in shifts {
        let r = Resolvent::new(a, shift, RESOLVENT_TOL)?;
        for _ in 0..probes {
            let mut v = SpinorField::random(&mut rng, a.dim(), a.components(), a.weight());
            v.normalize();
            let u = r.solve(&v)?;
            let b = resolvent_bounds(&u, &v, shift, eps);
            out.checks += 1;
            out.violations += usize::from(!b.holds);
            out.min_coercivity_margin = out.min_coercivity_margin.min(b.coercivity_margin);
            out.min_contraction_margin = out.min_contraction_margin.min(b.contraction_margin);
        }
    }
    Ok(out)
}
