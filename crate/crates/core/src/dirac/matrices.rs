//! Dirac and Pauli matrices in the standard (Dirac) representation.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

/// Units with `hbar = c = m = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub m: f64,
}

pub const UNITS: PhysicalConstants = PhysicalConstants {
    hbar: 1.0,
    c: 1.0,
    m: 1.0,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DiracMatrices {
    pub alpha: [Matrix4<Complex64>; 3],
    pub beta: Matrix4<Complex64>,
    pub sigma: [Matrix2<Complex64>; 3],
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli() -> [Matrix2<Complex64>; 3] {
    let o = c(0.0, 0.0);
    [
        Matrix2::new(o, c(1.0, 0.0), c(1.0, 0.0), o),
        Matrix2::new(o, c(0.0, -1.0), c(0.0, 1.0), o),
        Matrix2::new(c(1.0, 0.0), o, o, c(-1.0, 0.0)),
    ]
}

/// `alpha_i = [[0, sigma_i], [sigma_i, 0]]`, `beta = diag(I, -I)`.
pub fn dirac_matrices() -> DiracMatrices {
    let sigma = pauli();
    let alpha = sigma.map(|s| {
        let mut a = Matrix4::zeros();
        a.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        a.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
        a
    });
    let mut beta = Matrix4::identity();
    beta[(2, 2)] = c(-1.0, 0.0);
    beta[(3, 3)] = c(-1.0, 0.0);
    DiracMatrices { alpha, beta, sigma }
}

/// Outcome of one exact algebraic identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraCheck {
    pub name: String,
    pub holds: bool,
}

impl DiracMatrices {
    /// The anticommutation identities, compared with exact equality:
    /// `{alpha_i, alpha_j} = 2 delta_ij I` (6), `{alpha_i, beta} = 0` (3),
    /// `beta^2 = I` (1) and `{sigma_i, sigma_j} = 2 delta_ij I` (6).
    pub fn anticommutation_checks(&self) -> Vec<AlgebraCheck> {
        let i4 = Matrix4::<Complex64>::identity();
        let i2 = Matrix2::<Complex64>::identity();
        let two = c(2.0, 0.0);
        let mut out = Vec::with_capacity(16);
        for i in 0..3 {
            for j in i..3 {
                let ac = self.alpha[i] * self.alpha[j] + self.alpha[j] * self.alpha[i];
                let expected = if i == j { i4 * two } else { Matrix4::zeros() };
                out.push(AlgebraCheck {
                    name: format!("{{alpha{}, alpha{}}}", i + 1, j + 1),
                    holds: ac == expected,
                });
            }
        }
        for i in 0..3 {
            let ac = self.alpha[i] * self.beta + self.beta * self.alpha[i];
            out.push(AlgebraCheck {
                name: format!("{{alpha{}, beta}}", i + 1),
                holds: ac == Matrix4::zeros(),
            });
        }
        out.push(AlgebraCheck {
            name: "beta^2".into(),
            holds: self.beta * self.beta == i4,
        });
        for i in 0..3 {
            for j in i..3 {
                let ac = self.sigma[i] * self.sigma[j] + self.sigma[j] * self.sigma[i];
                let expected = if i == j { i2 * two } else { Matrix2::zeros() };
                out.push(AlgebraCheck {
                    name: format!("{{sigma{}, sigma{}}}", i + 1, j + 1),
                    holds: ac == expected,
                });
            }
        }
        out
    }

    /// Hermiticity of every matrix and the Pauli product rule
    /// `sigma_i sigma_j = delta_ij I + i eps_ijk sigma_k`.
    pub fn structure_checks(&self) -> Vec<AlgebraCheck> {
        let mut out = Vec::new();
        for (i, a) in self.alpha.iter().enumerate() {
            out.push(AlgebraCheck {
                name: format!("alpha{} hermitian", i + 1),
                holds: *a == a.adjoint(),
            });
        }
        out.push(AlgebraCheck {
            name: "beta hermitian".into(),
            holds: self.beta == self.beta.adjoint(),
        });
        for (i, s) in self.sigma.iter().enumerate() {
            out.push(AlgebraCheck {
                name: format!("sigma{} hermitian", i + 1),
                holds: *s == s.adjoint(),
            });
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut expected = if i == j { Matrix2::identity() } else { Matrix2::zeros() };
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        expected += self.sigma[k] * c(0.0, e);
                    }
                }
                out.push(AlgebraCheck {
                    name: format!("sigma{} sigma{} product rule", i + 1, j + 1),
                    holds: self.sigma[i] * self.sigma[j] == expected,
                });
            }
        }
        out
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
